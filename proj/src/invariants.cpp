#include "meanderkit/invariants.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

#include "meanderkit/codec.hpp"

namespace meanderkit {

LaurentPoly LaurentPoly::term(std::int64_t coeff, int exp) {
  LaurentPoly p;
  if (coeff != 0) p.c[exp] = coeff;
  return p;
}

LaurentPoly LaurentPoly::loop_value() {
  LaurentPoly p;
  p.c[2] = -1;
  p.c[-2] = -1;
  return p;
}

LaurentPoly LaurentPoly::operator+(const LaurentPoly& o) const {
  LaurentPoly r = *this;
  for (const auto& [e, k] : o.c) {
    auto it = r.c.find(e);
    if (it == r.c.end()) {
      r.c[e] = k;
    } else {
      it->second += k;
      if (it->second == 0) r.c.erase(it);
    }
  }
  return r;
}

LaurentPoly LaurentPoly::operator-(const LaurentPoly& o) const {
  return *this + o.scaled(-1);
}

LaurentPoly LaurentPoly::operator*(const LaurentPoly& o) const {
  LaurentPoly r;
  for (const auto& [e1, k1] : c)
    for (const auto& [e2, k2] : o.c) {
      auto it = r.c.find(e1 + e2);
      if (it == r.c.end()) {
        if (k1 * k2 != 0) r.c[e1 + e2] = k1 * k2;
      } else {
        it->second += k1 * k2;
        if (it->second == 0) r.c.erase(it);
      }
    }
  return r;
}

LaurentPoly LaurentPoly::shifted(int dexp) const {
  LaurentPoly r;
  for (const auto& [e, k] : c) r.c[e + dexp] = k;
  return r;
}

LaurentPoly LaurentPoly::scaled(std::int64_t s) const {
  LaurentPoly r;
  if (s != 0)
    for (const auto& [e, k] : c) r.c[e] = k * s;
  return r;
}

LaurentPoly LaurentPoly::mirrored() const {
  LaurentPoly r;
  for (const auto& [e, k] : c) r.c[-e] = k;
  return r;
}

LaurentPoly LaurentPoly::divided_by_loop() const {
  // Divide by -A^2 - A^-2, i.e. multiply by -1 and divide by A^2 + A^-2.
  LaurentPoly num = scaled(-1).shifted(2);  // now dividing by A^4 + 1
  LaurentPoly q;
  while (!num.is_zero()) {
    auto it = num.c.begin();  // lowest exponent
    int e = it->first;
    std::int64_t k = it->second;
    q.c[e] = k;
    num = num - (LaurentPoly::term(k, e) * (LaurentPoly::term(1, 4) + LaurentPoly::one()));
  }
  return q;
}

std::string LaurentPoly::to_string() const {
  if (c.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& [e, k] : c) {
    if (!first) os << (k >= 0 ? " + " : " - ");
    else if (k < 0) os << "-";
    std::int64_t a = std::abs(k);
    if (a != 1 || e == 0) os << a;
    if (e != 0) {
      if (a != 1) os << "*";
      os << "A";
      if (e != 1) os << "^" << e;
    }
    first = false;
  }
  return os.str();
}

namespace {

void check_knot_diagram(const Diagram& d) {
  for (const Node& n : d.nodes)
    if (n.kind == NodeKind::Vertex && n.rotation.size() != 2)
      fail(errc::has_essential_vertices,
           "vertex " + std::to_string(n.id) + " has valence " +
               std::to_string(n.rotation.size()));
}

// BFS order over nodes, smallest node first, for a small frontier.
std::vector<NodeId> processing_order(const Diagram& d) {
  std::vector<NodeId> order;
  std::vector<char> seen(d.node_count(), 0);
  for (NodeId r = 0; r < d.node_count(); ++r) {
    if (seen[r]) continue;
    std::deque<NodeId> q{r};
    seen[r] = 1;
    while (!q.empty()) {
      NodeId n = q.front();
      q.pop_front();
      order.push_back(n);
      for (DartId dd : d.nodes[n].rotation) {
        NodeId m = d.dart_node[d.opp[dd]];
        if (!seen[m]) {
          seen[m] = 1;
          q.push_back(m);
        }
      }
    }
  }
  return order;
}

using Pairing = std::vector<std::pair<DartId, DartId>>;  // sorted canonical

struct PairingState {
  std::map<DartId, DartId> partner;
  Pairing canonical() const {
    Pairing p;
    for (const auto& [a, b] : partner)
      if (a < b) p.emplace_back(a, b);
    return p;
  }
};

}  // namespace

LaurentPoly kauffman_bracket(const Diagram& d, std::size_t state_cap) {
  check_knot_diagram(d);
  auto order = processing_order(d);

  // Frontier dynamic programming: states map a pairing of open strand ends
  // (keyed by the unprocessed-side dart of each half-done edge) to a weight.
  std::map<Pairing, LaurentPoly> states;
  states[{}] = LaurentPoly::one();
  std::size_t work = 0;

  for (NodeId n : order) {
    const Node& node = d.nodes[n];
    std::vector<std::pair<LaurentPoly, std::vector<std::pair<DartId, DartId>>>> branches;
    if (node.kind == NodeKind::Vertex) {
      branches.push_back({LaurentPoly::one(), {{node.rotation[0], node.rotation[1]}}});
    } else {
      int so = d.dart_slot[node.over[0]];
      auto rot = [&](int k) { return node.rotation[((so + k) % 4 + 4) % 4]; };
      // A-smoothing joins each over slot with its ccw-next slot.
      branches.push_back({LaurentPoly::term(1, 1), {{rot(0), rot(1)}, {rot(2), rot(3)}}});
      branches.push_back({LaurentPoly::term(1, -1), {{rot(0), rot(3)}, {rot(2), rot(1)}}});
    }

    std::map<Pairing, LaurentPoly> next_states;
    for (const auto& [pairing, weight] : states) {
      for (const auto& [bw, joins] : branches) {
        if (++work > state_cap) fail(errc::too_large, "bracket state budget exceeded");
        PairingState ps;
        for (const auto& [a, b] : pairing) {
          ps.partner[a] = b;
          ps.partner[b] = a;
        }
        // Local links between this node's darts: loop edges at n, and open
        // strands whose both ends return to n.
        std::map<DartId, DartId> link;
        std::map<DartId, DartId> joinm;
        for (const auto& [x, y] : joins) {
          joinm[x] = y;
          joinm[y] = x;
        }
        for (DartId x : node.rotation) {
          DartId ox = d.opp[x];
          if (d.dart_node[ox] == n) {
            link[x] = ox;
          } else {
            auto it = ps.partner.find(x);
            if (it != ps.partner.end() && d.dart_node[it->second] == n)
              link[x] = it->second;
          }
        }

        LaurentPoly w = weight * bw;
        std::set<DartId> visited;
        // Chains: terminal -> ... -> terminal.
        for (DartId x0 : node.rotation) {
          if (visited.count(x0) || link.count(x0)) continue;
          visited.insert(x0);
          DartId y = joinm[x0];
          visited.insert(y);
          while (link.count(y)) {
            DartId y2 = link[y];
            visited.insert(y2);
            y = joinm[y2];
            visited.insert(y);
          }
          auto resolve = [&](DartId t) {
            auto it = ps.partner.find(t);
            if (it == ps.partner.end()) return d.opp[t];  // fresh open end
            DartId z = it->second;
            ps.partner.erase(z);
            ps.partner.erase(it);
            return z;
          };
          DartId ex = resolve(x0);
          DartId ey = resolve(y);
          if (ex == ey) fail(errc::internal, "strand end collision");
          ps.partner[ex] = ey;
          ps.partner[ey] = ex;
        }
        // Cycles: fully local, each closes a loop.
        int closed = 0;
        for (DartId x : node.rotation) {
          if (visited.count(x)) continue;
          DartId cur = x;
          while (!visited.count(cur)) {
            visited.insert(cur);
            DartId y = joinm[cur];
            visited.insert(y);
            auto it = link.find(y);
            if (it == link.end()) fail(errc::internal, "broken local cycle");
            cur = it->second;
          }
          ++closed;
        }
        for (int i = 0; i < closed; ++i) w = w * LaurentPoly::loop_value();

        Pairing key = ps.canonical();
        auto it = next_states.find(key);
        if (it == next_states.end()) next_states[key] = w;
        else it->second = it->second + w;
      }
    }
    states = std::move(next_states);
  }

  LaurentPoly total;
  for (const auto& [pairing, w] : states) {
    if (!pairing.empty()) fail(errc::internal, "open strands at end of bracket sum");
    total = total + w;
  }
  return total.divided_by_loop();
}

LaurentPoly kauffman_bracket_naive(const Diagram& d) {
  check_knot_diagram(d);
  std::vector<NodeId> crossings;
  for (const Node& n : d.nodes)
    if (n.kind == NodeKind::Crossing) crossings.push_back(n.id);
  const int nc = static_cast<int>(crossings.size());
  if (nc > 22) fail(errc::too_large, "naive bracket beyond 22 crossings");

  const int nd = d.dart_count();
  LaurentPoly total;
  for (std::uint32_t mask = 0; mask < (1u << nc); ++mask) {
    std::vector<int> parent(nd);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    auto unite = [&](int a, int b) { parent[find(a)] = find(b); };
    for (DartId a = 0; a < nd; ++a) unite(a, d.opp[a]);
    int exponent = 0;
    for (int i = 0; i < nc; ++i) {
      const Node& n = d.nodes[crossings[i]];
      int so = d.dart_slot[n.over[0]];
      auto rot = [&](int k) { return n.rotation[((so + k) % 4 + 4) % 4]; };
      if (mask & (1u << i)) {  // A-smoothing
        exponent += 1;
        unite(rot(0), rot(1));
        unite(rot(2), rot(3));
      } else {
        exponent -= 1;
        unite(rot(0), rot(3));
        unite(rot(2), rot(1));
      }
    }
    for (const Node& n : d.nodes)
      if (n.kind == NodeKind::Vertex) unite(n.rotation[0], n.rotation[1]);
    std::set<int> roots;
    for (DartId a = 0; a < nd; ++a) roots.insert(find(a));
    int loops = static_cast<int>(roots.size());
    LaurentPoly term = LaurentPoly::term(1, exponent);
    for (int i = 0; i < loops - 1; ++i) term = term * LaurentPoly::loop_value();
    total = total + term;
  }
  return total;
}

namespace {

// Forward darts of each knot-strand component, smallest dart first.
std::vector<char> orient_strands(const Diagram& d) {
  std::vector<char> forward(d.dart_count(), 0);
  std::vector<char> visited(d.dart_count(), 0);
  for (DartId s = 0; s < d.dart_count(); ++s) {
    if (visited[s]) continue;
    DartId cur = s;
    do {
      forward[cur] = 1;
      visited[cur] = 1;
      visited[d.opp[cur]] = 1;
      DartId in = d.opp[cur];
      NodeId n = d.dart_node[in];
      if (d.is_crossing(n)) {
        cur = d.straight_through(in);
      } else {
        const Node& node = d.nodes[n];
        cur = node.rotation[0] == in ? node.rotation[1] : node.rotation[0];
      }
    } while (cur != s && !visited[cur]);
  }
  return forward;
}

}  // namespace

int writhe(const Diagram& d) {
  check_knot_diagram(d);
  auto forward = orient_strands(d);
  int w = 0;
  for (const Node& n : d.nodes) {
    if (n.kind != NodeKind::Crossing) continue;
    DartId over_out = forward[n.over[0]] ? n.over[0] : n.over[1];
    DartId under_out = kNoDart;
    for (DartId dd : n.rotation)
      if (dd != n.over[0] && dd != n.over[1] && forward[dd]) under_out = dd;
    if (under_out == kNoDart) fail(errc::internal, "orientation failure");
    int so = d.dart_slot[over_out], su = d.dart_slot[under_out];
    w += (su == (so + 1) % 4) ? 1 : -1;
  }
  return w;
}

LaurentPoly jones(const Diagram& d, std::size_t state_cap) {
  LaurentPoly b = kauffman_bracket(d, state_cap);
  int w = writhe(d);
  LaurentPoly f = b.shifted(-3 * w);
  if (w % 2 != 0) f = f.scaled(-1);
  return f;
}

const char* knottedness_name(Knottedness k) {
  switch (k) {
    case Knottedness::Unknotted: return "Unknotted";
    case Knottedness::Knotted: return "Knotted";
    case Knottedness::Unknown: return "Unknown";
  }
  return "?";
}

Diagram loop_closure(const Diagram& d, ArcId loop) {
  auto arcs = principal_arcs(d);
  const PrincipalArc* a = find_arc(arcs, loop);
  if (!a) fail(errc::unknown_arc, "arc " + std::to_string(loop));
  if (!a->is_looped_edge()) fail(errc::not_a_loop, "arc " + std::to_string(loop));

  // Keep only the crossings both of whose strands lie on the loop.
  std::set<NodeId> keep;
  {
    auto sc = self_crossings(d, *a);
    keep.insert(sc.begin(), sc.end());
  }
  if (keep.empty()) {
    Diagram u;
    Node v;
    v.id = 0;
    v.kind = NodeKind::Vertex;
    v.rotation = {0, 1};
    u.nodes.push_back(v);
    u.opp = {1, 0};
    u.dart_node = {0, 0};
    u.dart_slot = {0, 1};
    u.edge_label = {0, 0};
    u.outer_darts = {0};
    return u;
  }

  // Walk the loop, recording passes through kept crossings.
  Diagram out;
  std::map<NodeId, NodeId> node_map;
  std::map<DartId, DartId> dart_map;  // old dart at kept crossing -> new dart
  for (NodeId n : keep) {
    Node nn;
    nn.id = static_cast<NodeId>(out.nodes.size());
    nn.kind = NodeKind::Crossing;
    const Node& old = d.nodes[n];
    for (int s = 0; s < 4; ++s) {
      DartId nd = out.dart_count();
      out.opp.push_back(kNoDart);
      out.dart_node.push_back(nn.id);
      out.dart_slot.push_back(s);
      out.edge_label.push_back(0);
      nn.rotation.push_back(nd);
      dart_map[old.rotation[s]] = nd;
    }
    nn.over = {dart_map[old.over[0]], dart_map[old.over[1]]};
    node_map[n] = nn.id;
    out.nodes.push_back(std::move(nn));
  }
  // Forward walk of the whole loop arc; connect consecutive kept passes.
  DartId pending_out = kNoDart;  // new-dart id awaiting its partner
  DartId first_in = kNoDart;
  for (DartId fd : a->darts) {
    NodeId n = d.dart_node[fd];
    if (keep.count(n)) {
      // fd leaves a kept crossing.
      if (first_in == kNoDart) first_in = kNoDart;  // handled via wrap below
      pending_out = pending_out;  // no-op; clarity
    }
    DartId in = d.opp[fd];
    NodeId m = d.dart_node[in];
    if (keep.count(m)) {
      DartId new_in = dart_map[in];
      if (pending_out != kNoDart) {
        out.opp[pending_out] = new_in;
        out.opp[new_in] = pending_out;
        pending_out = kNoDart;
      } else if (first_in == kNoDart) {
        first_in = new_in;
      }
      // The pass continues: its outgoing old dart is straight through.
      DartId out_old = d.straight_through(in);
      pending_out = dart_map[out_old];
    }
  }
  if (pending_out != kNoDart && first_in != kNoDart) {
    out.opp[pending_out] = first_in;
    out.opp[first_in] = pending_out;
  }
  for (DartId a2 = 0; a2 < out.dart_count(); ++a2)
    if (out.opp[a2] == kNoDart) fail(errc::internal, "loop closure left open darts");
  relabel_arcs(out);
  choose_default_outer(out);
  require_valid(out, "loop_closure");
  return out;
}

bool simplifies_to_unknot(const Diagram& d0, const MoveBudget& budget) {
  auto crossing_count = [](const Diagram& d) {
    int k = 0;
    for (const Node& n : d.nodes)
      if (n.kind == NodeKind::Crossing) ++k;
    return k;
  };
  if (crossing_count(d0) == 0) return true;
  std::set<std::string> visited{canonical_pd(d0)};
  std::deque<std::pair<Diagram, int>> frontier{{d0, 0}};
  while (!frontier.empty()) {
    auto [d, depth] = std::move(frontier.front());
    frontier.pop_front();
    if (depth >= budget.max_depth) continue;
    std::vector<MoveRecord> sites;
    auto add = [&](std::vector<MoveRecord> v) {
      for (auto& r : v) sites.push_back(std::move(r));
    };
    add(enumerate_r1_minus(d));
    add(enumerate_r2_minus(d));
    add(enumerate_r3(d));
    if (crossing_count(d) + 2 <= budget.max_crossings) add(enumerate_r2_plus(d));
    for (const MoveRecord& r : sites) {
      Diagram nd = apply_reidemeister(d, r);
      if (crossing_count(nd) == 0) return true;
      std::string key = canonical_pd(nd);
      if (!visited.insert(key).second) continue;
      if (visited.size() > budget.max_states) return false;
      frontier.emplace_back(std::move(nd), depth + 1);
    }
  }
  return false;
}

Knottedness knottedness_of_loop(const Diagram& d, ArcId loop, const MoveBudget& budget) {
  Diagram closure = loop_closure(d, loop);
  int nc = 0;
  for (const Node& n : closure.nodes)
    if (n.kind == NodeKind::Crossing) ++nc;
  if (nc == 0) return Knottedness::Unknotted;
  try {
    if (jones(closure) != LaurentPoly::one()) return Knottedness::Knotted;
  } catch (const error& e) {
    if (e.code() != errc::too_large) throw;
    return Knottedness::Unknown;
  }
  if (simplifies_to_unknot(closure, budget)) return Knottedness::Unknotted;
  return Knottedness::Unknown;
}

EquivalenceResult equivalence_search(const Diagram& d1, const Diagram& d2,
                                     const MoveBudget& budget) {
  EquivalenceResult res;
  auto crossing_count = [](const Diagram& d) {
    int k = 0;
    for (const Node& n : d.nodes)
      if (n.kind == NodeKind::Crossing) ++k;
    return k;
  };
  if (crossing_count(d1) > budget.max_crossings || crossing_count(d2) > budget.max_crossings) {
    res.budget_exceeded = true;
    return res;
  }
  try {
    if (jones(d1) != jones(d2)) res.jones_distinct = true;
  } catch (const error& e) {
    if (e.code() != errc::too_large) throw;
  }

  std::string target = canonical_pd(d2);
  struct State {
    Diagram d;
    std::vector<MoveRecord> path;
    int depth;
  };
  std::string start = canonical_pd(d1);
  if (start == target) {
    res.equivalent = true;
    return res;
  }
  if (res.jones_distinct) return res;

  std::set<std::string> visited{start};
  std::deque<State> frontier;
  frontier.push_back({d1, {}, 0});
  while (!frontier.empty()) {
    State st = std::move(frontier.front());
    frontier.pop_front();
    if (st.depth >= budget.max_depth) continue;
    std::vector<MoveRecord> sites;
    auto add = [&](std::vector<MoveRecord> v) {
      for (auto& r : v) sites.push_back(std::move(r));
    };
    add(enumerate_r1_minus(st.d));
    add(enumerate_r2_minus(st.d));
    add(enumerate_r3(st.d));
    int nc = crossing_count(st.d);
    if (nc + 1 <= budget.max_crossings) add(enumerate_r1_plus(st.d));
    if (nc + 2 <= budget.max_crossings) add(enumerate_r2_plus(st.d));
    for (const MoveRecord& r : sites) {
      Diagram nd = apply_reidemeister(st.d, r);
      std::string key = canonical_pd(nd);
      if (visited.count(key)) continue;
      std::vector<MoveRecord> path = st.path;
      path.push_back(r);
      if (key == target) {
        res.equivalent = true;
        res.path = std::move(path);
        return res;
      }
      visited.insert(key);
      if (visited.size() > budget.max_states) {
        res.budget_exceeded = true;
        return res;
      }
      frontier.push_back({std::move(nd), std::move(path), st.depth + 1});
    }
  }
  return res;
}

}  // namespace meanderkit
