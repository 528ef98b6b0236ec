#include "meanderkit/builder.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace meanderkit {

MapBuilder::MapBuilder(const Diagram& d) {
  darts_.resize(d.dart_count());
  for (DartId a = 0; a < d.dart_count(); ++a)
    darts_[a] = {true, d.dart_node[a], d.opp[a], d.edge_label[a]};
  nodes_.resize(d.node_count());
  for (const Node& n : d.nodes)
    nodes_[n.id] = {true, n.kind, n.rotation, n.over};
}

bool MapBuilder::is_over(DartId d) const {
  const BNode& n = nodes_[darts_[d].node];
  return n.over[0] == d || n.over[1] == d;
}

DartId MapBuilder::rot_next(DartId d) const {
  const auto& rot = nodes_[darts_[d].node].rotation;
  auto it = std::find(rot.begin(), rot.end(), d);
  return rot[(it - rot.begin() + 1) % rot.size()];
}

DartId MapBuilder::rot_prev(DartId d) const {
  const auto& rot = nodes_[darts_[d].node].rotation;
  auto it = std::find(rot.begin(), rot.end(), d);
  return rot[(it - rot.begin() + rot.size() - 1) % rot.size()];
}

DartId MapBuilder::straight_through(DartId into) const {
  const auto& rot = nodes_[darts_[into].node].rotation;
  auto it = std::find(rot.begin(), rot.end(), into);
  return rot[(it - rot.begin() + 2) % rot.size()];
}

ArcId MapBuilder::fresh_label() const {
  ArcId m = -1;
  for (const BDart& d : darts_)
    if (d.alive) m = std::max(m, d.label);
  return m + 1;
}

NodeId MapBuilder::add_node(NodeKind kind) {
  nodes_.push_back({true, kind, {}, {kNoDart, kNoDart}});
  return (NodeId)nodes_.size() - 1;
}

void MapBuilder::set_kind(NodeId n, NodeKind kind) {
  nodes_[n].kind = kind;
  if (kind == NodeKind::Vertex) nodes_[n].over = {kNoDart, kNoDart};
}

DartId MapBuilder::add_dart(NodeId n, ArcId label) {
  darts_.push_back({true, n, kNoDart, label});
  DartId d = (DartId)darts_.size() - 1;
  nodes_[n].rotation.push_back(d);
  return d;
}

DartId MapBuilder::add_dart_before(DartId before, ArcId label) {
  NodeId n = darts_[before].node;
  darts_.push_back({true, n, kNoDart, label});
  DartId d = (DartId)darts_.size() - 1;
  auto& rot = nodes_[n].rotation;
  rot.insert(std::find(rot.begin(), rot.end(), before), d);
  return d;
}

void MapBuilder::set_opp(DartId a, DartId b) {
  darts_[a].opp = b;
  darts_[b].opp = a;
}

void MapBuilder::clear_opp(DartId a) { darts_[a].opp = kNoDart; }

void MapBuilder::set_label(DartId d, ArcId arc) { darts_[d].label = arc; }

void MapBuilder::set_over_pair(NodeId n, DartId d1, DartId d2) {
  nodes_[n].over = {d1, d2};
}

void MapBuilder::remove_dart(DartId d) {
  BDart& bd = darts_[d];
  auto& rot = nodes_[bd.node].rotation;
  rot.erase(std::find(rot.begin(), rot.end(), d));
  auto& over = nodes_[bd.node].over;
  if (over[0] == d) over[0] = kNoDart;
  if (over[1] == d) over[1] = kNoDart;
  bd.alive = false;
  bd.opp = kNoDart;
}

void MapBuilder::remove_node(NodeId n) {
  if (!nodes_[n].rotation.empty()) fail(errc::internal, "removing node with darts");
  nodes_[n].alive = false;
}

NodeId MapBuilder::subdivide_edge(DartId d, NodeKind kind) {
  DartId far = opp(d);
  ArcId lab = label(d);
  NodeId m = add_node(kind);
  DartId md = add_dart(m, lab);   // toward node_of(d)
  DartId mf = add_dart(m, lab);   // toward the far side
  set_opp(d, md);
  set_opp(mf, far);
  return m;
}

bool MapBuilder::smooth_valence2(NodeId n) {
  auto& rot = nodes_[n].rotation;
  if (rot.size() != 2) fail(errc::internal, "smooth_valence2 on valence != 2");
  DartId x = rot[0], y = rot[1];
  if (opp(x) == y) {
    set_kind(n, NodeKind::Vertex);
    return false;
  }
  DartId xo = opp(x), yo = opp(y);
  remove_dart(x);
  remove_dart(y);
  set_opp(xo, yo);
  remove_node(n);
  return true;
}

void MapBuilder::delete_edge(DartId d) {
  DartId o = opp(d);
  remove_dart(d);
  remove_dart(o);
}

std::pair<MapBuilder::Anchor, MapBuilder::Anchor> MapBuilder::delete_strand(
    const std::vector<DartId>& fwd) {
  if (fwd.empty()) fail(errc::internal, "empty strand");
  std::set<DartId> dying;
  for (std::size_t i = 0; i + 1 < fwd.size(); ++i) {
    NodeId n = node_of(opp(fwd[i]));
    for (DartId dd : nodes_[n].rotation) dying.insert(dd);
  }
  for (DartId f : fwd) {
    dying.insert(f);
    dying.insert(opp(f));
  }
  auto region_hint = [&](DartId seed) {
    for (DartId s : {seed, opp(seed)}) {
      DartId cur = s;
      do {
        if (!dying.count(cur)) return cur;
        cur = face_next(cur);
      } while (cur != s);
    }
    return kNoDart;
  };
  auto make_anchor = [&](DartId dying_dart) {
    Anchor a;
    a.node = node_of(dying_dart);
    a.was_over = is_over(dying_dart);
    a.insert_before = valence(a.node) > 1 ? rot_next(dying_dart) : kNoDart;
    a.region_hint = region_hint(dying_dart);
    return a;
  };
  Anchor start = make_anchor(fwd.front());
  Anchor end = make_anchor(opp(fwd.back()));

  // Check consecutiveness and collect interior nodes.
  std::vector<NodeId> interior;
  for (size_t i = 0; i + 1 < fwd.size(); ++i) {
    DartId in = opp(fwd[i]);
    NodeId n = node_of(in);
    if (kind(n) != NodeKind::Crossing || valence(n) != 4)
      fail(errc::pattern_mismatch, "strand interior node is not a crossing");
    if (straight_through(in) != fwd[i + 1])
      fail(errc::pattern_mismatch, "strand darts not consecutive");
    interior.push_back(n);
  }

  for (DartId f : fwd) {
    DartId b = opp(f);
    remove_dart(f);
    remove_dart(b);
  }
  // Heal the transversal strand at each interior crossing.
  for (NodeId n : interior) {
    auto rot = nodes_[n].rotation;  // copy; exactly the two transversal darts
    if (rot.size() != 2) fail(errc::internal, "interior crossing not reduced to 2 darts");
    DartId t1 = rot[0], t2 = rot[1];
    DartId q1 = opp(t1), q2 = opp(t2);
    if (q1 == t2) fail(errc::internal, "transversal loop degenerates");
    remove_dart(t1);
    remove_dart(t2);
    set_opp(q1, q2);
    remove_node(n);
  }
  return {start, end};
}

MapBuilder::InsertResult MapBuilder::insert_strand(const Anchor& start,
                                                   const std::vector<DartId>& route,
                                                   const StrandEnd& end, bool side_over,
                                                   ArcId lab) {
  InsertResult res;
  auto attach = [&](const Anchor& a) {
    DartId d = a.insert_before == kNoDart ? add_dart(a.node, lab)
                                          : add_dart_before(a.insert_before, lab);
    if (a.was_over) {
      auto& over = nodes_[a.node].over;
      if (over[0] == kNoDart) over[0] = d;
      else over[1] = d;
    }
    return d;
  };

  DartId tail = attach(start);  // open end of the growing strand
  res.segment_darts.push_back(tail);
  for (DartId a : route) {
    if (!dart_alive(a)) fail(errc::disconnected_route, "route dart is dead");
    DartId afar = opp(a);
    ArcId elab = label(a);
    NodeId c = add_node(NodeKind::Crossing);
    // ccw: [east (continues the crossed edge), north (strand in),
    //       west (back along the crossed edge), south (strand out)]
    DartId ce = add_dart(c, elab);
    DartId cn = add_dart(c, lab);
    DartId cw = add_dart(c, elab);
    DartId cs = add_dart(c, lab);
    set_opp(a, cw);
    set_opp(ce, afar);
    set_opp(tail, cn);
    if (side_over) set_over_pair(c, cn, cs);
    else set_over_pair(c, ce, cw);
    res.new_crossings.push_back(c);
    tail = cs;
    res.segment_darts.push_back(tail);
  }
  if (end.new_vertex) {
    NodeId v = add_node(NodeKind::Vertex);
    DartId vd = add_dart(v, lab);
    set_opp(tail, vd);
    res.end_vertex = v;
  } else {
    DartId ed = attach(end.anchor);
    set_opp(tail, ed);
  }
  return res;
}

void MapBuilder::flip_region(const std::vector<NodeId>& region) {
  for (NodeId n : region) {
    BNode& bn = nodes_[n];
    std::reverse(bn.rotation.begin(), bn.rotation.end());
    if (bn.kind == NodeKind::Crossing) {
      std::array<DartId, 2> under{kNoDart, kNoDart};
      int k = 0;
      for (DartId d : bn.rotation)
        if (d != bn.over[0] && d != bn.over[1]) under[k++ % 2] = d;
      bn.over = under;
    }
  }
}

std::vector<int> MapBuilder::face_orbits(int* count) const {
  std::vector<int> orbit(darts_.size(), -1);
  int next = 0;
  for (DartId s = 0; s < (int)darts_.size(); ++s) {
    if (!darts_[s].alive || orbit[s] >= 0) continue;
    DartId cur = s;
    do {
      orbit[cur] = next;
      if (darts_[cur].opp == kNoDart) fail(errc::internal, "face trace over stub");
      cur = face_next(cur);
    } while (cur != s);
    ++next;
  }
  if (count) *count = next;
  return orbit;
}

std::optional<std::vector<DartId>> MapBuilder::route_to(
    DartId from_face_dart, const std::vector<int>& orbit,
    const std::vector<char>& target_orbits, const std::vector<char>& no_transit_orbits,
    const std::vector<ArcId>& excluded_labels) const {
  // Collect darts per orbit in id order for deterministic expansion.
  int nf = 0;
  for (int o : orbit) nf = std::max(nf, o + 1);
  std::vector<std::vector<DartId>> members(nf);
  for (DartId d = 0; d < (int)darts_.size(); ++d)
    if (darts_[d].alive && orbit[d] >= 0) members[orbit[d]].push_back(d);

  auto excluded = [&](DartId d) {
    for (ArcId l : excluded_labels)
      if (label(d) == l || label(opp(d)) == l) return true;
    return false;
  };

  int start = orbit[from_face_dart];
  std::vector<int> parent_face(nf, -2);
  std::vector<DartId> parent_dart(nf, kNoDart);
  parent_face[start] = -1;
  std::deque<int> queue{start};
  int found = -1;
  if (target_orbits[start]) found = start;
  while (found < 0 && !queue.empty()) {
    int f = queue.front();
    queue.pop_front();
    if (f != start && no_transit_orbits[f]) continue;  // may arrive, not leave
    for (DartId d : members[f]) {
      if (excluded(d)) continue;
      int g = orbit[opp(d)];
      if (parent_face[g] != -2) continue;
      parent_face[g] = f;
      parent_dart[g] = d;
      if (target_orbits[g]) { found = g; break; }
      queue.push_back(g);
    }
  }
  if (found < 0) return std::nullopt;
  std::vector<DartId> path;
  for (int f = found; parent_face[f] != -1; f = parent_face[f])
    path.push_back(parent_dart[f]);
  std::reverse(path.begin(), path.end());
  return path;
}

DartId MapBuilder::compact_id(DartId d) const {
  if (d < 0 || !darts_[d].alive) return kNoDart;
  DartId c = 0;
  for (DartId i = 0; i < d; ++i)
    if (darts_[i].alive) ++c;
  return c;
}

Diagram MapBuilder::finish(std::vector<DartId> outer_marks) const {
  std::vector<DartId> dmap(darts_.size(), kNoDart);
  DartId nd = 0;
  for (DartId i = 0; i < (int)darts_.size(); ++i)
    if (darts_[i].alive) dmap[i] = nd++;
  std::vector<NodeId> nmap(nodes_.size(), -1);
  NodeId nn = 0;
  for (NodeId i = 0; i < (int)nodes_.size(); ++i)
    if (nodes_[i].alive) nmap[i] = nn++;

  Diagram d;
  d.opp.resize(nd);
  d.dart_node.resize(nd);
  d.dart_slot.resize(nd);
  d.edge_label.resize(nd);
  d.nodes.resize(nn);
  for (DartId i = 0; i < (int)darts_.size(); ++i) {
    if (!darts_[i].alive) continue;
    DartId j = dmap[i];
    if (darts_[i].opp == kNoDart || !darts_[darts_[i].opp].alive)
      fail(errc::internal, "finish with dangling dart");
    d.opp[j] = dmap[darts_[i].opp];
    d.dart_node[j] = nmap[darts_[i].node];
    d.edge_label[j] = darts_[i].label;
  }
  for (NodeId i = 0; i < (int)nodes_.size(); ++i) {
    if (!nodes_[i].alive) continue;
    Node& n = d.nodes[nmap[i]];
    n.id = nmap[i];
    n.kind = nodes_[i].kind;
    for (int s = 0; s < (int)nodes_[i].rotation.size(); ++s) {
      DartId dd = dmap[nodes_[i].rotation[s]];
      n.rotation.push_back(dd);
      d.dart_slot[dd] = s;
    }
    if (n.kind == NodeKind::Crossing)
      n.over = {nodes_[i].over[0] == kNoDart ? kNoDart : dmap[nodes_[i].over[0]],
                nodes_[i].over[1] == kNoDart ? kNoDart : dmap[nodes_[i].over[1]]};
  }
  for (DartId m : outer_marks) {
    if (m < 0 || !darts_[m].alive) fail(errc::internal, "dead outer mark");
    d.outer_darts.push_back(dmap[m]);
  }
  std::sort(d.outer_darts.begin(), d.outer_darts.end());
  return d;
}

}  // namespace meanderkit
