#include "meanderkit/diagram.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace meanderkit {

const char* errc_name(errc c) {
  switch (c) {
    case errc::malformed_map: return "MalformedMap";
    case errc::label_incoherence: return "LabelIncoherence";
    case errc::unknown_arc: return "UnknownArc";
    case errc::exceptional_arc_not_loop: return "ExceptionalArcNotLoop";
    case errc::not_semi_meander: return "NotSemiMeander";
    case errc::not_meander: return "NotMeander";
    case errc::syntax_error: return "SyntaxError";
    case errc::non_planar: return "NonPlanar";
    case errc::non_realizable: return "NonRealizable";
    case errc::schema_error: return "SchemaError";
    case errc::layout_failure: return "LayoutFailure";
    case errc::pattern_mismatch: return "PatternMismatch";
    case errc::side_violation: return "SideViolation";
    case errc::disconnected_route: return "DisconnectedRoute";
    case errc::is_loop: return "IsLoop";
    case errc::no_self_crossing: return "NoSelfCrossing";
    case errc::already_external: return "AlreadyExternal";
    case errc::dart_not_on_arc: return "DartNotOnArc";
    case errc::has_loops: return "HasLoops";
    case errc::knotted_loop_present: return "KnottedLoopPresent";
    case errc::not_coprime: return "NotCoprime";
    case errc::even_p: return "EvenP";
    case errc::degenerate_fraction: return "DegenerateFraction";
    case errc::crossing_on_s: return "CrossingOnS";
    case errc::not_special: return "NotSpecial";
    case errc::not_odd_meander: return "NotOddMeander";
    case errc::general_position_failure: return "GeneralPositionFailure";
    case errc::malformed_strips: return "MalformedStrips";
    case errc::has_essential_vertices: return "HasEssentialVertices";
    case errc::not_a_loop: return "NotALoop";
    case errc::too_large: return "TooLarge";
    case errc::internal: return "Internal";
  }
  return "Unknown";
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& v : violations) os << v.rule << ": " << v.detail << "\n";
  return os.str();
}

namespace {

bool structure_ok(const Diagram& d, ValidationReport* rep) {
  bool ok = true;
  auto bad = [&](const std::string& rule, const std::string& detail) {
    if (rep) rep->violations.push_back({rule, detail});
    ok = false;
  };

  const int nd = d.dart_count();
  if (d.nodes.empty()) bad("nonempty", "diagram has no nodes");
  if (static_cast<int>(d.dart_node.size()) != nd ||
      static_cast<int>(d.dart_slot.size()) != nd ||
      static_cast<int>(d.edge_label.size()) != nd) {
    bad("arrays", "dart array sizes disagree");
    return false;
  }
  for (int i = 0; i < d.node_count(); ++i) {
    if (d.nodes[i].id != i) bad("ids", "node ids not dense");
  }
  for (DartId a = 0; a < nd; ++a) {
    DartId b = d.opp[a];
    if (b < 0 || b >= nd || b == a || d.opp[b] != a)
      bad("involution", "dart " + std::to_string(a) + " not properly paired");
  }
  std::vector<char> seen(nd, 0);
  for (const Node& n : d.nodes) {
    if (n.rotation.empty()) bad("valence", "node " + std::to_string(n.id) + " has no darts");
    for (int s = 0; s < static_cast<int>(n.rotation.size()); ++s) {
      DartId dd = n.rotation[s];
      if (dd < 0 || dd >= nd) { bad("rotation", "dart id out of range"); continue; }
      if (seen[dd]) bad("rotation", "dart " + std::to_string(dd) + " listed twice");
      seen[dd] = 1;
      if (d.dart_node[dd] != n.id || d.dart_slot[dd] != s)
        bad("rotation", "dart " + std::to_string(dd) + " has stale node/slot");
    }
  }
  for (DartId a = 0; a < nd; ++a)
    if (!seen[a]) bad("rotation", "dart " + std::to_string(a) + " not in any rotation");
  return ok;
}

}  // namespace

int component_count(const Diagram& d) {
  const int n = d.node_count();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (DartId a = 0; a < d.dart_count(); ++a) {
    int x = find(d.dart_node[a]), y = find(d.dart_node[d.opp[a]]);
    if (x != y) parent[x] = y;
  }
  std::set<int> roots;
  for (int i = 0; i < n; ++i) roots.insert(find(i));
  return static_cast<int>(roots.size());
}

std::vector<Face> trace_faces(const Diagram& d) {
  ValidationReport rep;
  if (!structure_ok(d, &rep)) fail(errc::malformed_map, rep.to_string());

  const int nd = d.dart_count();
  std::vector<int> orbit_of(nd, -1);
  std::vector<std::vector<DartId>> orbits;
  for (DartId start = 0; start < nd; ++start) {
    if (orbit_of[start] >= 0) continue;
    std::vector<DartId> cyc;
    DartId cur = start;
    do {
      if (orbit_of[cur] >= 0) fail(errc::malformed_map, "face orbit collision");
      orbit_of[cur] = static_cast<int>(orbits.size());
      cyc.push_back(cur);
      cur = d.face_next(cur);
    } while (cur != start);
    orbits.push_back(std::move(cyc));
  }

  // Merge the designated outer orbits of all components into one face.
  std::set<int> outer_orbits;
  for (DartId od : d.outer_darts) {
    if (od < 0 || od >= nd) fail(errc::malformed_map, "outer dart out of range");
    outer_orbits.insert(orbit_of[od]);
  }
  if (outer_orbits.empty()) fail(errc::malformed_map, "no outer face designated");

  struct Entry { DartId min_dart; Face face; };
  std::vector<Entry> entries;
  Face outer;
  outer.outer = true;
  DartId outer_min = d.dart_count();
  for (int i = 0; i < static_cast<int>(orbits.size()); ++i) {
    if (outer_orbits.count(i)) {
      outer_min = std::min(outer_min, *std::min_element(orbits[i].begin(), orbits[i].end()));
      outer.cycles.push_back(orbits[i]);
    } else {
      Face f;
      f.cycles.push_back(orbits[i]);
      entries.push_back({*std::min_element(orbits[i].begin(), orbits[i].end()), std::move(f)});
    }
  }
  entries.push_back({outer_min, std::move(outer)});
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.min_dart < b.min_dart; });
  std::vector<Face> out;
  for (int i = 0; i < static_cast<int>(entries.size()); ++i) {
    entries[i].face.id = i;
    out.push_back(std::move(entries[i].face));
  }
  return out;
}

FaceId face_of(const std::vector<Face>& faces, DartId d) {
  for (const Face& f : faces)
    for (const auto& c : f.cycles)
      if (std::find(c.begin(), c.end(), d) != c.end()) return f.id;
  return -1;
}

FaceId outer_face_id(const std::vector<Face>& faces) {
  for (const Face& f : faces)
    if (f.outer) return f.id;
  return -1;
}

std::vector<PrincipalArc> principal_arcs(const Diagram& d) {
  const int nd = d.dart_count();
  std::vector<char> used(nd, 0);  // forward darts consumed by some arc
  std::vector<PrincipalArc> arcs;

  auto walk = [&](DartId start) {
    // Walk forward from `start` (a dart leaving its node) until a Vertex or
    // until the walk closes up.
    PrincipalArc arc;
    arc.id = d.edge_label[start];
    DartId cur = start;
    while (true) {
      arc.darts.push_back(cur);
      used[cur] = 1;
      if (d.edge_label[cur] != arc.id || d.edge_label[d.opp[cur]] != arc.id)
        fail(errc::label_incoherence,
             "edge labels change along arc " + std::to_string(arc.id));
      DartId in = d.opp[cur];
      NodeId n = d.dart_node[in];
      if (!d.is_crossing(n)) {
        arc.endpoints.push_back(n);  // far endpoint
        break;
      }
      cur = d.straight_through(in);
      if (cur == start) break;  // loop closed
    }
    return arc;
  };

  // Arcs with endpoints: start at vertex darts.
  for (const Node& n : d.nodes) {
    if (n.kind != NodeKind::Vertex) continue;
    for (DartId dd : n.rotation) {
      if (used[dd]) continue;
      PrincipalArc arc = walk(dd);
      arc.endpoints.insert(arc.endpoints.begin(), n.id);
      // Mark backward darts of the walk as used too.
      for (DartId fd : arc.darts) used[d.opp[fd]] = 1;
      arcs.push_back(std::move(arc));
    }
  }
  // Remaining strands are vertex-free loops.
  for (DartId s = 0; s < nd; ++s) {
    if (used[s] || used[d.opp[s]]) continue;
    if (!d.is_crossing(d.dart_node[s])) continue;  // vertex darts all consumed above
    PrincipalArc arc = walk(s);
    arc.endpoints.clear();
    for (DartId fd : arc.darts) used[d.opp[fd]] = 1;
    arcs.push_back(std::move(arc));
  }

  for (int a = 0; a < nd; ++a)
    if (!used[a])
      fail(errc::label_incoherence, "dart " + std::to_string(a) + " on no arc");

  // One label per arc, arcs sorted by id.
  std::set<ArcId> ids;
  for (const auto& a : arcs) {
    if (!ids.insert(a.id).second)
      fail(errc::label_incoherence, "label " + std::to_string(a.id) + " used by two arcs");
  }
  std::sort(arcs.begin(), arcs.end(),
            [](const PrincipalArc& x, const PrincipalArc& y) { return x.id < y.id; });
  return arcs;
}

const PrincipalArc* find_arc(const std::vector<PrincipalArc>& arcs, ArcId id) {
  for (const auto& a : arcs)
    if (a.id == id) return &a;
  return nullptr;
}

std::vector<NodeId> self_crossings(const Diagram& d, const PrincipalArc& a) {
  // Each strand pass through a crossing contributes one outgoing dart to the
  // walk, so counting dart origins counts passes.
  std::map<NodeId, std::pair<int, int>> visits;  // crossing -> (count, first index)
  for (int i = 0; i < static_cast<int>(a.darts.size()); ++i) {
    NodeId n = d.dart_node[a.darts[i]];
    if (!d.is_crossing(n)) continue;
    auto [it, fresh] = visits.try_emplace(n, 0, i);
    it->second.first++;
  }
  std::vector<std::pair<int, NodeId>> hits;
  for (const auto& [n, v] : visits)
    if (v.first >= 2) hits.emplace_back(v.second, n);
  std::sort(hits.begin(), hits.end());  // by first visit along the arc
  std::vector<NodeId> order;
  for (auto& [i, n] : hits) order.push_back(n);
  return order;
}

std::vector<NodeId> self_crossings(const Diagram& d, ArcId arc) {
  auto arcs = principal_arcs(d);
  const PrincipalArc* a = find_arc(arcs, arc);
  if (!a) fail(errc::unknown_arc, "arc " + std::to_string(arc));
  return self_crossings(d, *a);
}

bool is_simple_arc(const Diagram& d, const PrincipalArc& a) {
  return self_crossings(d, a).empty();
}

bool is_simple_arc(const Diagram& d, ArcId arc) {
  auto arcs = principal_arcs(d);
  const PrincipalArc* a = find_arc(arcs, arc);
  if (!a) fail(errc::unknown_arc, "arc " + std::to_string(arc));
  return is_simple_arc(d, *a);
}

ValidationReport validate(const Diagram& d) {
  ValidationReport rep;
  if (!structure_ok(d, &rep)) return rep;

  for (const Node& n : d.nodes) {
    if (n.kind == NodeKind::Crossing) {
      if (n.rotation.size() != 4) {
        rep.violations.push_back(
            {"valence", "crossing " + std::to_string(n.id) + " has valence " +
                            std::to_string(n.rotation.size())});
        continue;
      }
      DartId o0 = n.over[0], o1 = n.over[1];
      if (o0 == kNoDart || o1 == kNoDart) {
        rep.violations.push_back({"over", "crossing " + std::to_string(n.id) + " missing over pair"});
      } else {
        int s0 = -1, s1 = -1;
        for (int s = 0; s < 4; ++s) {
          if (n.rotation[s] == o0) s0 = s;
          if (n.rotation[s] == o1) s1 = s;
        }
        if (s0 < 0 || s1 < 0 || (s0 + 2) % 4 != s1 % 4) {
          rep.violations.push_back(
              {"over", "crossing " + std::to_string(n.id) + " over pair not antipodal"});
        }
      }
    } else if (n.rotation.empty()) {
      rep.violations.push_back({"valence", "vertex " + std::to_string(n.id) + " has valence 0"});
    }
  }
  if (!rep.ok()) return rep;

  // Outer darts: exactly one per component, all on distinct components.
  int comps = component_count(d);
  if (static_cast<int>(d.outer_darts.size()) != comps) {
    rep.violations.push_back(
        {"outer", "need one outer dart per component (" + std::to_string(comps) +
                      "), have " + std::to_string(d.outer_darts.size())});
    return rep;
  }

  std::vector<Face> faces;
  try {
    faces = trace_faces(d);
  } catch (const error& e) {
    rep.violations.push_back({"faces", e.what()});
    return rep;
  }
  {
    // Outer darts must lie on distinct face orbits (one per component).
    const Face* outer = nullptr;
    for (const Face& f : faces)
      if (f.outer) outer = &f;
    if (!outer || static_cast<int>(outer->cycles.size()) != comps)
      rep.violations.push_back({"outer", "outer darts do not span all components"});
  }

  int V = d.node_count(), E = d.edge_count(), F = static_cast<int>(faces.size());
  if (V - E + F != 1 + comps) {
    rep.violations.push_back(
        {"euler", "V-E+F = " + std::to_string(V - E + F) + " but 1+C = " +
                      std::to_string(1 + comps)});
  }

  try {
    auto arcs = principal_arcs(d);
    for (const auto& x : d.exceptional) {
      const PrincipalArc* a = find_arc(arcs, x.arc);
      if (!a) {
        rep.violations.push_back({"labels", "exceptional arc " + std::to_string(x.arc) + " unknown"});
        continue;
      }
      if (x.split_dart < 0 || x.split_dart >= d.dart_count() ||
          d.edge_label[x.split_dart] != x.arc)
        rep.violations.push_back(
            {"labels", "split dart not on exceptional arc " + std::to_string(x.arc)});
    }
  } catch (const error& e) {
    rep.violations.push_back({"labels", e.what()});
  }
  return rep;
}

void require_valid(const Diagram& d, const char* who) {
  ValidationReport rep = validate(d);
  if (!rep.ok())
    fail(errc::internal, std::string(who) + " produced an invalid diagram:\n" + rep.to_string());
}

namespace {

// Split a loop-ish arc's dart sequence at the split dart into two halves and
// check each half for self-crossings.
bool exceptional_split_ok(const Diagram& d, const PrincipalArc& a, DartId split) {
  auto pos = std::find(a.darts.begin(), a.darts.end(), split);
  if (pos == a.darts.end()) {
    // The split dart may be the backward dart of an arc edge.
    pos = std::find(a.darts.begin(), a.darts.end(), d.opp[split]);
    if (pos == a.darts.end()) return false;
  }
  std::size_t k = static_cast<std::size_t>(pos - a.darts.begin());
  auto half_simple = [&](std::size_t from, std::size_t to) {  // [from, to)
    std::map<NodeId, int> visits;
    for (std::size_t i = from; i != to; i = (i + 1) % a.darts.size()) {
      NodeId n = d.dart_node[a.darts[i]];
      if (d.is_crossing(n) && ++visits[n] == 2) return false;
      if (a.darts.size() == 1) break;
    }
    return true;
  };
  // Halves: split edge .. around .. back to split edge.
  return half_simple(k, (k + a.darts.size() / 2) % a.darts.size()) &&
         half_simple((k + a.darts.size() / 2) % a.darts.size(), k);
}

// For a vertex-free loop the halves are the two subpaths of the cyclic dart
// sequence delimited by the split edge and the dart-count midpoint.  For an
// arc whose endpoints coincide the halves run endpoint..split and
// split..endpoint.
bool exceptional_ok(const Diagram& d, const PrincipalArc& a, DartId split) {
  if (!a.is_looped_edge()) return false;
  if (a.endpoints.empty()) return exceptional_split_ok(d, a, split);
  // Arc from w to w: halves are endpoint..split and split..endpoint.
  auto pos = std::find(a.darts.begin(), a.darts.end(), split);
  if (pos == a.darts.end())
    pos = std::find(a.darts.begin(), a.darts.end(), d.opp[split]);
  if (pos == a.darts.end()) return false;
  std::size_t k = static_cast<std::size_t>(pos - a.darts.begin());
  auto half_simple = [&](std::size_t from, std::size_t to) {
    std::map<NodeId, int> visits;
    for (std::size_t i = from; i < to; ++i) {
      NodeId n = d.dart_node[a.darts[i]];
      if (d.is_crossing(n) && ++visits[n] == 2) return false;
    }
    return true;
  };
  return half_simple(0, k + 1) && half_simple(k + 1, a.darts.size());
}

}  // namespace

bool is_semi_meander(const Diagram& d) {
  auto arcs = principal_arcs(d);
  std::map<ArcId, DartId> split;
  for (const auto& x : d.exceptional) {
    const PrincipalArc* a = find_arc(arcs, x.arc);
    if (!a) fail(errc::unknown_arc, "exceptional arc " + std::to_string(x.arc));
    if (!a->is_looped_edge())
      fail(errc::exceptional_arc_not_loop,
           "exceptional arc " + std::to_string(x.arc) + " is not a loop");
    split[x.arc] = x.split_dart;
  }
  for (const auto& a : arcs) {
    auto it = split.find(a.id);
    if (it == split.end()) {
      if (!is_simple_arc(d, a)) return false;
    } else {
      if (!exceptional_ok(d, a, it->second)) return false;
    }
  }
  return true;
}

std::vector<NodeId> outer_face_vertices(const Diagram& d) {
  auto faces = trace_faces(d);
  std::set<NodeId> out;
  for (const Face& f : faces) {
    if (!f.outer) continue;
    for (const auto& c : f.cycles)
      for (DartId dd : c)
        if (!d.is_crossing(d.dart_node[dd])) out.insert(d.dart_node[dd]);
  }
  return std::vector<NodeId>(out.begin(), out.end());
}

bool edge_on_outer_face(const Diagram& d, DartId dart) {
  auto faces = trace_faces(d);
  FaceId of = outer_face_id(faces);
  return face_of(faces, dart) == of || face_of(faces, d.opp[dart]) == of;
}

bool is_meander(const Diagram& d) {
  if (!is_semi_meander(d)) fail(errc::not_semi_meander, "diagram is not semi-meander");
  auto faces = trace_faces(d);
  std::set<NodeId> outer_nodes;
  for (const Face& f : faces) {
    if (!f.outer) continue;
    for (const auto& c : f.cycles)
      for (DartId dd : c) outer_nodes.insert(d.dart_node[dd]);
  }
  for (const Node& n : d.nodes)
    if (n.kind == NodeKind::Vertex && !outer_nodes.count(n.id)) return false;
  FaceId of = outer_face_id(faces);
  for (const auto& x : d.exceptional) {
    if (face_of(faces, x.split_dart) != of && face_of(faces, d.opp[x.split_dart]) != of)
      return false;
  }
  return true;
}

}  // namespace meanderkit
