#include "meanderkit/moves.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "meanderkit/builder.hpp"

namespace meanderkit {

const char* move_kind_name(MoveKind k) {
  switch (k) {
    case MoveKind::R1Plus: return "R1+";
    case MoveKind::R1Minus: return "R1-";
    case MoveKind::R2Plus: return "R2+";
    case MoveKind::R2Minus: return "R2-";
    case MoveKind::R3: return "R3";
    case MoveKind::Detour: return "Detour";
    case MoveKind::EliminateSelfCrossing: return "EliminateSelfCrossing";
    case MoveKind::RelocateVertex: return "RelocateVertex";
    case MoveKind::Subdivide: return "Subdivide";
    case MoveKind::Smooth: return "Smooth";
    case MoveKind::Flype: return "Flype";
  }
  return "?";
}

MoveKind move_kind_from_name(const std::string& s) {
  for (MoveKind k : {MoveKind::R1Plus, MoveKind::R1Minus, MoveKind::R2Plus, MoveKind::R2Minus,
                     MoveKind::R3, MoveKind::Detour, MoveKind::EliminateSelfCrossing,
                     MoveKind::RelocateVertex, MoveKind::Subdivide, MoveKind::Smooth,
                     MoveKind::Flype})
    if (s == move_kind_name(k)) return k;
  fail(errc::schema_error, "unknown move kind " + s);
}

nlohmann::json MoveRecord::to_json() const {
  nlohmann::json j = payload;
  j["move"] = move_kind_name(kind);
  return j;
}

MoveRecord MoveRecord::from_json(const nlohmann::json& j) {
  MoveRecord r;
  r.kind = move_kind_from_name(j.at("move").get<std::string>());
  r.payload = j;
  r.payload.erase("move");
  return r;
}

std::string records_to_json(const std::vector<MoveRecord>& rs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rs) j.push_back(r.to_json());
  return j.dump(2);
}

std::vector<MoveRecord> records_from_json(const std::string& s) {
  std::vector<MoveRecord> out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(s);
  } catch (const std::exception& e) {
    fail(errc::schema_error, std::string("bad move JSON: ") + e.what());
  }
  for (const auto& je : j) out.push_back(MoveRecord::from_json(je));
  return out;
}

namespace {

// First dart that stays alive and lies on one of the given pre-surgery face
// orbits; used to keep the outer-face mark valid across a surgery.
DartId surviving_mark(const Diagram& d, const std::set<DartId>& dying,
                      const std::vector<DartId>& seeds) {
  for (DartId s : seeds) {
    DartId cur = s;
    do {
      if (!dying.count(cur)) return cur;
      cur = d.face_next(cur);
    } while (cur != s);
  }
  return kNoDart;
}

// One updated mark per input outer dart; kNoDart when every dart of the
// neighbourhood dies (callers substitute a replacement).
std::vector<DartId> outer_marks_after(const Diagram& d, const std::set<DartId>& dying) {
  std::vector<DartId> marks;
  for (DartId od : d.outer_darts) {
    if (!dying.count(od)) {
      marks.push_back(od);
      continue;
    }
    std::vector<DartId> seeds{od};
    for (DartId x : dying) seeds.push_back(d.opp[x]);
    marks.push_back(surviving_mark(d, dying, seeds));
  }
  return marks;
}

void require_marks(const std::vector<DartId>& marks) {
  for (DartId m : marks)
    if (m == kNoDart) fail(errc::internal, "outer face swallowed by surgery");
}

std::vector<std::vector<DartId>> face_orbit_list(const Diagram& d) {
  std::vector<std::vector<DartId>> orbits;
  std::vector<char> seen(d.dart_count(), 0);
  for (DartId s = 0; s < d.dart_count(); ++s) {
    if (seen[s]) continue;
    std::vector<DartId> cyc;
    DartId cur = s;
    do {
      seen[cur] = 1;
      cyc.push_back(cur);
      cur = d.face_next(cur);
    } while (cur != s);
    orbits.push_back(std::move(cyc));
  }
  return orbits;
}

int crossing_count(const Diagram& d) {
  int k = 0;
  for (const Node& n : d.nodes)
    if (n.kind == NodeKind::Crossing) ++k;
  return k;
}

// ---------------------------------------------------------------------------
// R1+

Diagram do_r1_plus(const Diagram& d, DartId t, bool over_in, MoveRecord* inv) {
  if (t < 0 || t >= d.dart_count()) fail(errc::pattern_mismatch, "R1+: bad dart");
  MapBuilder b(d);
  ArcId lab = b.label(t);
  DartId tfar = b.opp(t);
  NodeId x = b.add_node(NodeKind::Crossing);
  DartId w = b.add_dart(x, lab);
  DartId e = b.add_dart(x, lab);
  DartId l1 = b.add_dart(x, lab);
  DartId l2 = b.add_dart(x, lab);
  b.set_opp(t, w);
  b.set_opp(e, tfar);
  b.set_opp(l1, l2);
  // passes: (w,l1) and (e,l2); monogon sits left of t's direction of travel
  if (over_in) b.set_over_pair(x, w, l1);
  else b.set_over_pair(x, e, l2);
  Diagram out = b.finish(d.outer_darts);
  if (inv) {
    inv->kind = MoveKind::R1Minus;
    inv->payload = {{"dart", b.compact_id(l1)}};
  }
  return out;
}

// R1-

Diagram do_r1_minus(const Diagram& d, DartId m, MoveRecord* inv) {
  if (m < 0 || m >= d.dart_count() || d.face_next(m) != m)
    fail(errc::pattern_mismatch, "R1-: dart is not a monogon face");
  NodeId x = d.dart_node[m];
  if (!d.is_crossing(x)) fail(errc::pattern_mismatch, "R1-: node is not a crossing");
  DartId om = d.opp[m];  // == rot_next(m)
  // The surviving strand darts at x:
  DartId a = d.nodes[x].rotation[(d.dart_slot[m] + 2) % 4];
  DartId bdart = d.nodes[x].rotation[(d.dart_slot[om] + 2) % 4];
  DartId qa = d.opp[a];
  bool inv_over_in = d.is_over(a);

  std::set<DartId> dying{m, om};
  if (d.opp[a] != bdart) {
    dying.insert(a);
    dying.insert(bdart);
  }
  auto marks = outer_marks_after(d, dying);
  require_marks(marks);

  MapBuilder b(d);
  b.delete_edge(m);
  b.smooth_valence2(x);
  Diagram out = b.finish(marks);
  if (inv) {
    // When the crossing degenerates to a vertex loop the move is not strictly
    // invertible (cannot re-create a vertex-free kink); the inverse record
    // rebuilds the kink on the loop instead.
    DartId at = d.opp[a] == bdart ? bdart : qa;
    inv->kind = MoveKind::R1Plus;
    inv->payload = {{"at", b.compact_id(at)}, {"over_in", inv_over_in}};
  }
  return out;
}

// R2+

Diagram do_r2_plus(const Diagram& d, DartId a, DartId bd, bool a_over, MoveRecord* inv) {
  if (a < 0 || bd < 0 || a >= d.dart_count() || bd >= d.dart_count())
    fail(errc::pattern_mismatch, "R2+: bad darts");
  if (a == bd || a == d.opp[bd] || bd == d.opp[a] || a == d.opp[a])
    fail(errc::pattern_mismatch, "R2+: darts must be on distinct edges");
  // Same face orbit required.
  {
    DartId cur = a;
    bool found = false;
    do {
      if (cur == bd) found = true;
      cur = d.face_next(cur);
    } while (cur != a && !found);
    if (!found) fail(errc::pattern_mismatch, "R2+: darts not on one face");
  }
  MapBuilder b(d);
  ArcId la = b.label(a), lb = b.label(bd);
  DartId afar = b.opp(a), bfar = b.opp(bd);
  NodeId x1 = b.add_node(NodeKind::Crossing);
  DartId x1E = b.add_dart(x1, lb), x1N = b.add_dart(x1, la), x1W = b.add_dart(x1, lb),
         x1S = b.add_dart(x1, la);
  NodeId x2 = b.add_node(NodeKind::Crossing);
  DartId x2E = b.add_dart(x2, lb), x2N = b.add_dart(x2, la), x2W = b.add_dart(x2, lb),
         x2S = b.add_dart(x2, la);
  b.set_opp(a, x1S);
  b.set_opp(x1N, x2N);
  b.set_opp(x2S, afar);
  b.set_opp(bd, x2E);
  b.set_opp(x2W, x1E);
  b.set_opp(x1W, bfar);
  if (a_over) {
    b.set_over_pair(x1, x1N, x1S);
    b.set_over_pair(x2, x2N, x2S);
  } else {
    b.set_over_pair(x1, x1E, x1W);
    b.set_over_pair(x2, x2E, x2W);
  }
  Diagram out = b.finish(d.outer_darts);
  if (inv) {
    inv->kind = MoveKind::R2Minus;
    inv->payload = {{"dart", std::min(b.compact_id(x1E), b.compact_id(x2N))}};
  }
  return out;
}

// R2-

Diagram do_r2_minus(const Diagram& d, DartId g, MoveRecord* inv) {
  if (g < 0 || g >= d.dart_count()) fail(errc::pattern_mismatch, "R2-: bad dart");
  DartId h = d.face_next(g);
  if (h == g || d.face_next(h) != g)
    fail(errc::pattern_mismatch, "R2-: dart is not on a bigon face");
  NodeId x1 = d.dart_node[g], x2 = d.dart_node[h];
  if (x1 == x2 || !d.is_crossing(x1) || !d.is_crossing(x2))
    fail(errc::pattern_mismatch, "R2-: bigon is not between two crossings");
  if (d.is_over(g) != d.is_over(d.opp[g]))
    fail(errc::pattern_mismatch, "R2-: incoherent over/under (not an R2 pair)");

  // Strand A runs through edge(g): x1 -> x2; strand B through edge(h): x2 -> x1.
  DartId aA1 = d.nodes[x1].rotation[(d.dart_slot[g] + 2) % 4];
  DartId aA2 = d.nodes[x2].rotation[(d.dart_slot[d.opp[g]] + 2) % 4];
  DartId bB2 = d.nodes[x2].rotation[(d.dart_slot[h] + 2) % 4];
  DartId bB1 = d.nodes[x1].rotation[(d.dart_slot[d.opp[h]] + 2) % 4];
  DartId qA1 = d.opp[aA1], qA2 = d.opp[aA2];
  DartId qB1 = d.opp[bB1], qB2 = d.opp[bB2];
  bool a_over = d.is_over(g);
  ArcId la = d.edge_label[g], lb = d.edge_label[h];

  std::set<DartId> dying;
  for (DartId dd : d.nodes[x1].rotation) dying.insert(dd);
  for (DartId dd : d.nodes[x2].rotation) dying.insert(dd);
  bool a_closed = (qA1 == aA2);  // A also ran directly between the crossings
  bool b_closed = (qB1 == bB2);
  if (a_closed) {
    dying.insert(aA1);
    dying.insert(qA1);
  }
  if (b_closed) {
    dying.insert(bB1);
    dying.insert(qB1);
  }
  auto marks0 = outer_marks_after(d, dying);

  MapBuilder b(d);
  // Remove the two bigon edges and the four darts of each crossing.
  b.delete_edge(g);
  b.delete_edge(h);
  DartId a_loop_dart = kNoDart, b_loop_dart = kNoDart;
  if (a_closed) {
    b.delete_edge(aA1);
  } else {
    b.remove_dart(aA1);
    b.remove_dart(aA2);
  }
  if (b_closed) {
    b.delete_edge(bB1);
  } else {
    b.remove_dart(bB1);
    b.remove_dart(bB2);
  }
  b.remove_node(x1);
  b.remove_node(x2);
  if (a_closed) {
    NodeId v = b.add_node(NodeKind::Vertex);
    a_loop_dart = b.add_dart(v, la);
    DartId v2 = b.add_dart(v, la);
    b.set_opp(a_loop_dart, v2);
  } else {
    b.set_opp(qA1, qA2);
  }
  if (b_closed) {
    NodeId v = b.add_node(NodeKind::Vertex);
    b_loop_dart = b.add_dart(v, lb);
    DartId v2 = b.add_dart(v, lb);
    b.set_opp(b_loop_dart, v2);
  } else {
    b.set_opp(qB1, qB2);
  }

  std::vector<DartId> marks;
  for (DartId m : marks0) {
    if (m == kNoDart) m = a_closed ? a_loop_dart : b_loop_dart;
    if (m == kNoDart) fail(errc::internal, "R2-: outer face lost");
    marks.push_back(m);
  }
  Diagram out = b.finish(marks);
  if (inv) {
    DartId push = a_closed ? a_loop_dart : qA1;
    DartId target = b_closed ? b_loop_dart : qB2;
    inv->kind = MoveKind::R2Plus;
    inv->payload = {{"push", b.compact_id(push)},
                    {"target", b.compact_id(target)},
                    {"over", a_over}};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Route resolution: turn an edge list into side-correct route darts by
// walking face orbits, with backtracking over ambiguous isthmus edges.

bool resolve_route_rec(const MapBuilder& b, const std::vector<int>& orbit,
                       int region, const std::vector<DartId>& edges, std::size_t k,
                       int end_region, std::vector<DartId>& out) {
  if (k == edges.size()) return region == end_region;
  DartId e = edges[k];
  for (DartId cand : {std::min(e, b.opp(e)), std::max(e, b.opp(e))}) {
    if (orbit[cand] != region) continue;
    out.push_back(cand);
    if (resolve_route_rec(b, orbit, orbit[b.opp(cand)], edges, k + 1, end_region, out))
      return true;
    out.pop_back();
  }
  return false;
}

// Face-orbit id of the corner vacated at an anchor, post-deletion.
int anchor_region(const MapBuilder& b, const std::vector<int>& orbit,
                  const MapBuilder::Anchor& a) {
  if (a.insert_before != kNoDart) return orbit[b.rot_prev(a.insert_before)];
  if (a.region_hint != kNoDart && b.dart_alive(a.region_hint)) return orbit[a.region_hint];
  return -1;
}

// ---------------------------------------------------------------------------
// R3

struct TriangleInfo {
  DartId g, h, i;          // the face orbit
  NodeId n1, n2, n3;       // node(g), node(h), node(i)
  DartId mover = kNoDart;  // dart of the uniform edge, in travel direction
};

TriangleInfo triangle_at(const Diagram& d, DartId g0) {
  TriangleInfo t;
  t.g = g0;
  t.h = d.face_next(g0);
  t.i = d.face_next(t.h);
  if (t.g == t.h || t.h == t.i || d.face_next(t.i) != t.g)
    fail(errc::pattern_mismatch, "R3: dart is not on a triangle face");
  t.n1 = d.dart_node[t.g];
  t.n2 = d.dart_node[t.h];
  t.n3 = d.dart_node[t.i];
  if (t.n1 == t.n2 || t.n2 == t.n3 || t.n1 == t.n3)
    fail(errc::pattern_mismatch, "R3: triangle nodes not distinct");
  for (NodeId n : {t.n1, t.n2, t.n3})
    if (!d.is_crossing(n)) fail(errc::pattern_mismatch, "R3: triangle has a vertex");
  for (DartId e : {t.g, t.h, t.i})
    if (d.is_over(e) == d.is_over(d.opp[e])) {
      if (t.mover == kNoDart || e < t.mover) t.mover = e;
    }
  if (t.mover == kNoDart)
    fail(errc::pattern_mismatch, "R3: no strand passes over (or under) both others");
  return t;
}

Diagram do_r3(const Diagram& d, DartId g0, MoveRecord* inv) {
  TriangleInfo t = triangle_at(d, g0);
  DartId dm = t.mover;                    // travel n_from -> n_to
  NodeId n_from = d.dart_node[dm], n_to = d.dart_node[d.opp[dm]];
  NodeId c = t.n1;  // the third crossing
  if (c == n_from || c == n_to) c = t.n2;
  if (c == n_from || c == n_to) c = t.n3;

  DartId in_from = d.nodes[n_from].rotation[(d.dart_slot[dm] + 2) % 4];
  DartId f1 = d.opp[in_from];
  DartId f3 = d.nodes[n_to].rotation[(d.dart_slot[d.opp[dm]] + 2) % 4];
  if (d.dart_node[f1] == n_from || d.dart_node[f1] == n_to ||
      d.dart_node[d.opp[f3]] == n_from || d.dart_node[d.opp[f3]] == n_to)
    fail(errc::pattern_mismatch, "R3: mover strand re-enters the triangle");

  // Strand P crosses the mover at n_from; its triangle-side edge at c leads
  // to n_from.  Strand Q likewise via n_to.
  auto away_dart_at_c = [&](NodeId via) {
    for (DartId dd : d.nodes[c].rotation) {
      NodeId far = d.dart_node[d.opp[dd]];
      if (far == via) return d.nodes[c].rotation[(d.dart_slot[dd] + 2) % 4];
    }
    fail(errc::internal, "R3: triangle edge not found");
  };
  DartId p_away = away_dart_at_c(n_from);
  DartId q_away = away_dart_at_c(n_to);
  bool side_over = d.is_over(dm);

  std::set<DartId> dying;
  for (DartId x : {f1, dm, f3}) {
    dying.insert(x);
    dying.insert(d.opp[x]);
  }
  for (DartId dd : d.nodes[n_from].rotation) dying.insert(dd);
  for (DartId dd : d.nodes[n_to].rotation) dying.insert(dd);
  auto marks = outer_marks_after(d, dying);
  require_marks(marks);
  ArcId lab = d.edge_label[dm];

  MapBuilder b(d);
  auto [start, end] = b.delete_strand({f1, dm, f3});
  auto orbit = b.face_orbits();
  int r_start = anchor_region(b, orbit, start);
  int r_end = anchor_region(b, orbit, end);
  std::vector<DartId> route;
  if (r_start < 0 || r_end < 0 ||
      !resolve_route_rec(b, orbit, r_start, {p_away, q_away}, 0, r_end, route))
    fail(errc::pattern_mismatch, "R3: rerouting failed");
  MapBuilder::StrandEnd se;
  se.anchor = end;
  auto ins = b.insert_strand(start, route, se, side_over, lab);
  const std::vector<NodeId>& route_nodes = ins.new_crossings;
  Diagram out = b.finish(marks);
  if (inv) {
    // The flipped triangle is bounded by c's image and the two new crossings.
    NodeId c_new = out.dart_node[b.compact_id(d.nodes[c].rotation[0])];
    std::set<NodeId> fresh;
    for (NodeId nn : route_nodes)
      fresh.insert(out.dart_node[b.compact_id(b.rotation(nn)[0])]);
    DartId site = kNoDart;
    for (const auto& cyc : face_orbit_list(out)) {
      if (cyc.size() != 3) continue;
      std::set<NodeId> nodes;
      for (DartId dd : cyc) nodes.insert(out.dart_node[dd]);
      if (nodes.size() != 3 || !nodes.count(c_new)) continue;
      bool ok = true;
      for (NodeId n : nodes)
        if (n != c_new && !fresh.count(n)) ok = false;
      if (!ok) continue;
      DartId mn = *std::min_element(cyc.begin(), cyc.end());
      if (site == kNoDart || mn < site) site = mn;
    }
    if (site == kNoDart) fail(errc::internal, "R3: flipped triangle not found");
    inv->kind = MoveKind::R3;
    inv->payload = {{"dart", site}};
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

Diagram apply_reidemeister(const Diagram& d, const MoveRecord& r, MoveRecord* inv) {
  Diagram out;
  switch (r.kind) {
    case MoveKind::R1Plus:
      out = do_r1_plus(d, r.payload.at("at").get<int>(), r.payload.at("over_in").get<bool>(),
                       inv);
      break;
    case MoveKind::R1Minus:
      out = do_r1_minus(d, r.payload.at("dart").get<int>(), inv);
      break;
    case MoveKind::R2Plus:
      out = do_r2_plus(d, r.payload.at("push").get<int>(), r.payload.at("target").get<int>(),
                       r.payload.at("over").get<bool>(), inv);
      break;
    case MoveKind::R2Minus:
      out = do_r2_minus(d, r.payload.at("dart").get<int>(), inv);
      break;
    case MoveKind::R3:
      out = do_r3(d, r.payload.at("dart").get<int>(), inv);
      break;
    default:
      fail(errc::pattern_mismatch, "not a Reidemeister record");
  }
  require_valid(out, "apply_reidemeister");
  return out;
}

std::vector<MoveRecord> enumerate_r1_minus(const Diagram& d) {
  std::vector<MoveRecord> out;
  for (const auto& cyc : face_orbit_list(d))
    if (cyc.size() == 1 && d.is_crossing(d.dart_node[cyc[0]]))
      out.push_back({MoveKind::R1Minus, {{"dart", cyc[0]}}});
  return out;
}

std::vector<MoveRecord> enumerate_r2_minus(const Diagram& d) {
  std::vector<MoveRecord> out;
  for (const auto& cyc : face_orbit_list(d)) {
    if (cyc.size() != 2) continue;
    DartId g = std::min(cyc[0], cyc[1]);
    NodeId x1 = d.dart_node[cyc[0]], x2 = d.dart_node[cyc[1]];
    if (x1 == x2 || !d.is_crossing(x1) || !d.is_crossing(x2)) continue;
    if (d.is_over(g) != d.is_over(d.opp[g])) continue;
    out.push_back({MoveKind::R2Minus, {{"dart", g}}});
  }
  return out;
}

std::vector<MoveRecord> enumerate_r3(const Diagram& d) {
  std::vector<MoveRecord> out;
  for (const auto& cyc : face_orbit_list(d)) {
    if (cyc.size() != 3) continue;
    DartId g = *std::min_element(cyc.begin(), cyc.end());
    try {
      TriangleInfo t = triangle_at(d, g);
      DartId dm = t.mover;
      NodeId n_from = d.dart_node[dm], n_to = d.dart_node[d.opp[dm]];
      DartId in_from = d.nodes[n_from].rotation[(d.dart_slot[dm] + 2) % 4];
      DartId f1 = d.opp[in_from];
      DartId f3 = d.nodes[n_to].rotation[(d.dart_slot[d.opp[dm]] + 2) % 4];
      if (d.dart_node[f1] == n_from || d.dart_node[f1] == n_to ||
          d.dart_node[d.opp[f3]] == n_from || d.dart_node[d.opp[f3]] == n_to)
        continue;
      out.push_back({MoveKind::R3, {{"dart", g}}});
    } catch (const error&) {
      continue;
    }
  }
  return out;
}

std::vector<MoveRecord> enumerate_r1_plus(const Diagram& d) {
  std::vector<MoveRecord> out;
  for (DartId t = 0; t < d.dart_count(); ++t)
    for (bool over : {false, true})
      out.push_back({MoveKind::R1Plus, {{"at", t}, {"over_in", over}}});
  return out;
}

std::vector<MoveRecord> enumerate_r2_plus(const Diagram& d) {
  std::vector<MoveRecord> out;
  for (const auto& cyc : face_orbit_list(d)) {
    for (DartId a : cyc)
      for (DartId bd : cyc) {
        if (a == bd || a == d.opp[bd]) continue;
        for (bool over : {false, true})
          out.push_back({MoveKind::R2Plus, {{"push", a}, {"target", bd}, {"over", over}}});
      }
  }
  return out;
}

Diagram detour_reroute(const Diagram& d, const std::vector<DartId>& strand,
                       const std::vector<DartId>& route, Side side, MoveRecord* rec) {
  if (strand.empty()) fail(errc::pattern_mismatch, "detour: empty strand");
  for (std::size_t i = 0; i + 1 < strand.size(); ++i) {
    DartId in = d.opp[strand[i]];
    NodeId n = d.dart_node[in];
    if (!d.is_crossing(n)) fail(errc::pattern_mismatch, "detour: interior node not a crossing");
    if (d.straight_through(in) != strand[i + 1])
      fail(errc::pattern_mismatch, "detour: darts not consecutive");
    bool over = d.is_over(strand[i + 1]);
    if (over != (side == Side::Over))
      fail(errc::side_violation, "detour: strand crossing on the wrong side");
  }
  std::set<DartId> dying;
  for (std::size_t i = 0; i + 1 < strand.size(); ++i) {
    NodeId n = d.dart_node[d.opp[strand[i]]];
    for (DartId dd : d.nodes[n].rotation) dying.insert(dd);
  }
  for (DartId f : strand) {
    dying.insert(f);
    dying.insert(d.opp[f]);
  }
  for (DartId r : route)
    if (dying.count(r) || dying.count(d.opp[r]))
      fail(errc::disconnected_route, "detour: route uses a deleted edge");
  auto marks = outer_marks_after(d, dying);
  require_marks(marks);
  ArcId lab = d.edge_label[strand[0]];

  MapBuilder b(d);
  auto [start, end] = b.delete_strand(strand);
  auto orbit = b.face_orbits();
  int region = anchor_region(b, orbit, start);
  for (DartId r : route) {
    if (region >= 0 && orbit[r] != region)
      fail(errc::disconnected_route, "detour: route dart not on the current face");
    region = orbit[b.opp(r)];
  }
  int r_end = anchor_region(b, orbit, end);
  if (region >= 0 && r_end >= 0 && region != r_end)
    fail(errc::disconnected_route, "detour: route does not reach the strand end");
  MapBuilder::StrandEnd se;
  se.anchor = end;
  b.insert_strand(start, route, se, side == Side::Over, lab);
  Diagram out = b.finish(marks);
  require_valid(out, "detour_reroute");
  if (rec) {
    rec->kind = MoveKind::Detour;
    rec->payload = {{"strand", strand}, {"route", route}, {"side", side == Side::Over ? "over" : "under"}};
  }
  return out;
}

Diagram eliminate_self_crossing(const Diagram& d, ArcId arc, MoveRecord* rec) {
  auto arcs = principal_arcs(d);
  const PrincipalArc* a = find_arc(arcs, arc);
  if (!a) fail(errc::unknown_arc, "arc " + std::to_string(arc));
  if (a->is_looped_edge()) fail(errc::is_loop, "arc " + std::to_string(arc) + " is a looped edge");
  auto sc = self_crossings(d, *a);
  if (sc.empty()) fail(errc::no_self_crossing, "arc has no self-crossing");
  NodeId x = sc.front();

  // Positions of the two passes through x along the arc walk.
  int k1 = -1, k2 = -1;
  for (int k = 0; k < (int)a->darts.size(); ++k) {
    if (d.dart_node[a->darts[k]] == x) {
      if (k1 < 0) k1 = k;
      else k2 = k;
    }
  }
  if (k1 < 0 || k2 < 0) fail(errc::internal, "self-crossing positions not found");

  // Kink degeneracies: the bridge shares an edge with the first pass.
  NodeId u = a->endpoints.front();
  DartId bridge_in = a->darts[k2 - 1];
  DartId bridge_out = a->darts[k2];
  if (d.dart_node[bridge_in] == x || d.dart_node[d.opp[bridge_out]] == x) {
    // A loop edge at x: remove it as a kink.
    DartId loop_dart = d.dart_node[bridge_in] == x ? bridge_in : bridge_out;
    DartId m = d.opp[loop_dart] == d.rot_next(loop_dart) ? loop_dart : d.opp[loop_dart];
    if (d.opp[m] != d.rot_next(m)) fail(errc::internal, "kink without monogon");
    MoveRecord sub{MoveKind::R1Minus, {{"dart", m}}};
    Diagram out = apply_reidemeister(d, sub);
    if (rec) {
      rec->kind = MoveKind::EliminateSelfCrossing;
      rec->payload = {{"arc", arc}, {"mode", "kink"}, {"dart", m}};
    }
    return out;
  }

  // The side the bridge occupies at x.
  bool side_over = d.is_over(bridge_out);
  // Side of T on which the bridge arrives: left-dart at x after the first
  // pass's exit is at slot(exit)+1.
  DartId t_exit = a->darts[k1];
  DartId entry2 = d.opp[bridge_in];
  bool from_left = d.dart_slot[entry2] == (d.dart_slot[t_exit] + 1) % 4;

  // Hug route: transversal edges along T back to u, around u, and forward.
  auto transversal = [&](int t, bool left) {
    DartId exit = a->darts[t];
    NodeId c = d.dart_node[exit];
    int s = d.dart_slot[exit];
    return d.nodes[c].rotation[left ? (s + 1) % 4 : (s + 3) % 4];
  };
  std::vector<DartId> edges;
  for (int t = k1 - 1; t >= 1; --t) edges.push_back(transversal(t, from_left));
  {
    DartId d0 = a->darts[0];
    std::vector<DartId> legs;
    DartId cur = from_left ? d.rot_next(d0) : d.rot_prev(d0);
    while (cur != d0) {
      legs.push_back(cur);
      cur = from_left ? d.rot_next(cur) : d.rot_prev(cur);
    }
    for (DartId l : legs) edges.push_back(l);
  }
  for (int t = 1; t <= k1 - 1; ++t) edges.push_back(transversal(t, !from_left));

  std::set<DartId> dying;
  for (DartId dd : d.nodes[x].rotation) dying.insert(dd);
  for (DartId f : {bridge_in, bridge_out}) {
    dying.insert(f);
    dying.insert(d.opp[f]);
  }
  auto marks = outer_marks_after(d, dying);
  require_marks(marks);

  MapBuilder b(d);
  auto [start, end] = b.delete_strand({bridge_in, bridge_out});
  auto orbit = b.face_orbits();
  int r_start = anchor_region(b, orbit, start);
  int r_end = anchor_region(b, orbit, end);
  std::vector<DartId> route;
  if (!resolve_route_rec(b, orbit, r_start, edges, 0, r_end, route))
    fail(errc::internal, "eliminate: hug route failed to resolve");
  MapBuilder::StrandEnd se;
  se.anchor = end;
  b.insert_strand(start, route, se, side_over, arc);
  Diagram out = b.finish(marks);
  require_valid(out, "eliminate_self_crossing");
  if (rec) {
    rec->kind = MoveKind::EliminateSelfCrossing;
    rec->payload = {{"arc", arc},
                    {"mode", "detour"},
                    {"strand", std::vector<DartId>{bridge_in, bridge_out}},
                    {"route", route},
                    {"side", side_over ? "over" : "under"}};
  }
  (void)u;
  return out;
}

namespace {

Diagram do_relocate(const Diagram& d, NodeId v, const nlohmann::json* recorded,
                    MoveRecord* rec) {
  if (v < 0 || v >= d.node_count() || d.is_crossing(v))
    fail(errc::pattern_mismatch, "relocate: not a vertex");
  if (!d.exceptional.empty())
    fail(errc::knotted_loop_present, "relocate: knotted loops declared");
  if (!is_semi_meander(d)) fail(errc::not_semi_meander, "relocate: input not semi-meander");
  {
    auto faces = trace_faces(d);
    FaceId of = outer_face_id(faces);
    for (DartId dd : d.nodes[v].rotation)
      if (face_of(faces, dd) == of) fail(errc::already_external, "vertex already external");
    // also catch corners: vertex on outer face iff one of its darts is
    for (const Face& f : faces)
      if (f.outer)
        for (const auto& cyc : f.cycles)
          for (DartId dd : cyc)
            if (d.dart_node[dd] == v)
              fail(errc::already_external, "vertex already external");
  }

  // Legs in rotation order starting at the smallest dart.
  std::vector<DartId> legs = d.nodes[v].rotation;
  {
    auto it = std::min_element(legs.begin(), legs.end());
    std::rotate(legs.begin(), it, legs.end());
  }
  std::vector<ArcId> leg_arc;
  for (DartId l : legs) leg_arc.push_back(d.edge_label[l]);

  // Outer mark of v's component (relocation stays within one component).
  DartId comp_outer = kNoDart;
  {
    std::vector<char> in_comp(d.node_count(), 0);
    std::vector<NodeId> stack{v};
    in_comp[v] = 1;
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      for (DartId dd : d.nodes[n].rotation) {
        NodeId m = d.dart_node[d.opp[dd]];
        if (!in_comp[m]) {
          in_comp[m] = 1;
          stack.push_back(m);
        }
      }
    }
    for (DartId od : d.outer_darts)
      if (in_comp[d.dart_node[od]]) comp_outer = od;
    if (comp_outer == kNoDart) fail(errc::internal, "relocate: component has no outer mark");
  }

  // Canonical landing edge on the outer face for the first replacement arc.
  DartId dstar = kNoDart;
  if (!recorded) {
    std::vector<DartId> outer_cycle;
    {
      DartId cur = comp_outer;
      do {
        outer_cycle.push_back(cur);
        cur = d.face_next(cur);
      } while (cur != comp_outer);
    }
    std::sort(outer_cycle.begin(), outer_cycle.end());
    auto pick = [&](auto&& pred) {
      for (DartId dd : outer_cycle)
        if (pred(dd)) return dd;
      return kNoDart;
    };
    dstar = pick([&](DartId dd) {
      return d.edge_label[dd] != leg_arc[0] && d.is_crossing(d.dart_node[dd]) &&
             d.is_crossing(d.dart_node[d.opp[dd]]);
    });
    if (dstar == kNoDart)
      dstar = pick([&](DartId dd) { return d.edge_label[dd] != leg_arc[0]; });
    if (dstar == kNoDart)
      fail(errc::disconnected_route, "relocate: no admissible outer landing edge");
  } else {
    dstar = recorded->at("target").get<int>();
  }

  MapBuilder b(d);
  // Cut each leg just outside v, then remove v and the stubs.
  std::vector<NodeId> cuts;
  std::vector<MapBuilder::Anchor> cut_anchor;
  for (DartId l : legs) {
    NodeId p = b.subdivide_edge(l, NodeKind::Vertex);
    cuts.push_back(p);
  }
  for (std::size_t i = 0; i < legs.size(); ++i) {
    DartId l = legs[i];
    DartId stub = b.opp(l);  // dart at the cut node toward v
    b.remove_dart(l);
    b.remove_dart(stub);
  }
  b.remove_node(v);
  for (NodeId p : cuts) {
    MapBuilder::Anchor a;
    a.node = p;
    a.insert_before = kNoDart;  // append after the remaining dart
    cut_anchor.push_back(a);
  }

  NodeId vnew = -1;
  nlohmann::json rec_legs = nlohmann::json::array();
  for (std::size_t i = 0; i < legs.size(); ++i) {
    auto orbit = b.face_orbits();
    // Current region of the cut point: its single remaining dart's face.
    DartId pd = b.rotation(cuts[i])[0];
    int from = orbit[pd];
    std::vector<DartId> route;
    if (recorded) {
      route = recorded->at("legs").at(i).at("route").get<std::vector<DartId>>();
    } else {
      int nf = 0;
      for (int o : orbit) nf = std::max(nf, o + 1);
      std::vector<char> targets(nf, 0), no_transit(nf, 0);
      if (!b.dart_alive(comp_outer)) fail(errc::internal, "relocate: outer mark died");
      no_transit[orbit[comp_outer]] = 1;
      if (i == 0) {
        // Shortest path to the inner side of the landing edge, then cross it.
        int inner = orbit[b.opp(dstar)];
        targets[inner] = 1;
        if (from == inner) {
          route = {};
        } else {
          auto p = b.route_to(pd, orbit, targets, no_transit, {leg_arc[i]});
          if (!p) fail(errc::disconnected_route, "relocate: no route for first leg");
          route = *p;
        }
        route.push_back(b.opp(dstar));
      } else {
        for (DartId dd : b.rotation(vnew)) targets[orbit[dd]] = 1;
        if (targets[from]) {
          route = {};
        } else {
          auto p = b.route_to(pd, orbit, targets, no_transit, {leg_arc[i]});
          if (!p) fail(errc::disconnected_route, "relocate: no route for leg");
          route = *p;
        }
      }
    }
    MapBuilder::StrandEnd se;
    if (i == 0) {
      se.new_vertex = true;
    } else {
      // Attach at the corner of vnew on the final region.
      int final_region;
      {
        int cur = from;
        for (DartId r : route) cur = orbit[b.opp(r)];
        final_region = cur;
      }
      DartId y = kNoDart;
      for (DartId dd : b.rotation(vnew))
        if (orbit[dd] == final_region && (y == kNoDart || dd < y)) y = dd;
      if (y == kNoDart) fail(errc::disconnected_route, "relocate: leg cannot reach vertex");
      se.anchor.node = vnew;
      se.anchor.insert_before = b.rot_next(y);
    }
    auto res = b.insert_strand(cut_anchor[i], route, se, /*side_over=*/true, leg_arc[i]);
    if (i == 0) vnew = res.end_vertex;
    rec_legs.push_back({{"dart", legs[i]}, {"route", route}});
  }
  // Remove the cut points again.
  for (NodeId p : cuts) b.smooth_valence2(p);

  Diagram out = b.finish(d.outer_darts);
  require_valid(out, "relocate_vertex");
  if (rec) {
    rec->kind = MoveKind::RelocateVertex;
    rec->payload = {{"vertex", v}, {"target", dstar}, {"legs", rec_legs}};
  }
  return out;
}

}  // namespace

Diagram relocate_vertex(const Diagram& d, NodeId v, MoveRecord* rec) {
  return do_relocate(d, v, nullptr, rec);
}

Diagram subdivide_edge_move(const Diagram& d, ArcId arc, DartId at, MoveRecord* rec,
                            NodeId* new_vertex) {
  if (at < 0 || at >= d.dart_count() || d.edge_label[at] != arc)
    fail(errc::dart_not_on_arc, "subdivide: dart not on arc");
  auto arcs = principal_arcs(d);
  const PrincipalArc* a = find_arc(arcs, arc);
  if (!a) fail(errc::unknown_arc, "arc " + std::to_string(arc));

  MapBuilder b(d);
  NodeId w = b.subdivide_edge(at, NodeKind::Vertex);
  if (!a->is_loop()) {
    // Split into two arcs: relabel the half on the far side of the cut.
    ArcId fresh = b.fresh_label();
    DartId cur = b.rotation(w)[1];  // toward the far side
    while (true) {
      b.set_label(cur, fresh);
      b.set_label(b.opp(cur), fresh);
      DartId in = b.opp(cur);
      NodeId n = b.node_of(in);
      if (b.kind(n) != NodeKind::Crossing) break;
      cur = b.straight_through(in);
    }
  }
  Diagram out = b.finish(d.outer_darts);
  require_valid(out, "subdivide_edge");
  if (new_vertex) *new_vertex = out.dart_node[b.compact_id(b.rotation(w)[0])];
  if (rec) {
    rec->kind = MoveKind::Subdivide;
    rec->payload = {{"arc", arc}, {"at", at}};
  }
  return out;
}

Diagram smooth_vertex_move(const Diagram& d, NodeId v, MoveRecord* rec) {
  if (v < 0 || v >= d.node_count() || d.is_crossing(v) || d.valence(v) != 2)
    fail(errc::pattern_mismatch, "smooth: not a valence-2 vertex");
  DartId d0 = d.nodes[v].rotation[0], d1 = d.nodes[v].rotation[1];
  if (d.opp[d0] == d1) fail(errc::pattern_mismatch, "smooth: vertex carries a bare loop");
  std::set<DartId> dying{d0, d1};
  auto marks = outer_marks_after(d, dying);
  require_marks(marks);
  ArcId keep = std::min(d.edge_label[d0], d.edge_label[d1]);
  ArcId drop = std::max(d.edge_label[d0], d.edge_label[d1]);

  MapBuilder b(d);
  b.smooth_valence2(v);
  if (keep != drop)
    for (DartId x = 0; x < b.max_dart_id(); ++x)
      if (b.dart_alive(x) && b.label(x) == drop) b.set_label(x, keep);
  Diagram out = b.finish(marks);
  require_valid(out, "smooth_vertex");
  if (rec) {
    rec->kind = MoveKind::Smooth;
    rec->payload = {{"vertex", v}};
  }
  return out;
}

Diagram replay_flype(const Diagram& d, const MoveRecord& r);  // twobridge.cpp

Diagram replay(const Diagram& d, const MoveRecord& r) {
  switch (r.kind) {
    case MoveKind::R1Plus:
    case MoveKind::R1Minus:
    case MoveKind::R2Plus:
    case MoveKind::R2Minus:
    case MoveKind::R3:
      return apply_reidemeister(d, r);
    case MoveKind::Detour: {
      Side s = r.payload.at("side").get<std::string>() == "over" ? Side::Over : Side::Under;
      return detour_reroute(d, r.payload.at("strand").get<std::vector<int>>(),
                            r.payload.at("route").get<std::vector<int>>(), s);
    }
    case MoveKind::EliminateSelfCrossing:
      return eliminate_self_crossing(d, r.payload.at("arc").get<int>());
    case MoveKind::RelocateVertex: {
      return do_relocate(d, r.payload.at("vertex").get<int>(), &r.payload, nullptr);
    }
    case MoveKind::Subdivide:
      return subdivide_edge_move(d, r.payload.at("arc").get<int>(), r.payload.at("at").get<int>());
    case MoveKind::Smooth:
      return smooth_vertex_move(d, r.payload.at("vertex").get<int>());
    case MoveKind::Flype:
      return replay_flype(d, r);
  }
  fail(errc::internal, "unhandled move kind");
}

Diagram replay(const Diagram& d, const std::vector<MoveRecord>& rs) {
  Diagram cur = d;
  for (const auto& r : rs) cur = replay(cur, r);
  return cur;
}

}  // namespace meanderkit
