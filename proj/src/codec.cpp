#include "meanderkit/codec.hpp"

#include <algorithm>
#include <cctype>
#include <climits>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

namespace meanderkit {

namespace {

// Arc tracing that ignores edge labels (used to assign them).
struct RawArc {
  std::vector<DartId> darts;
  std::vector<NodeId> endpoints;
};

std::vector<RawArc> trace_arcs_raw(const Diagram& d) {
  const int nd = d.dart_count();
  std::vector<char> used(nd, 0);
  std::vector<RawArc> arcs;
  auto walk = [&](DartId start) {
    RawArc arc;
    DartId cur = start;
    while (true) {
      arc.darts.push_back(cur);
      used[cur] = 1;
      used[d.opp[cur]] = 1;
      DartId in = d.opp[cur];
      NodeId n = d.dart_node[in];
      if (!d.is_crossing(n)) {
        arc.endpoints.push_back(n);
        break;
      }
      cur = d.straight_through(in);
      if (cur == start) break;
    }
    return arc;
  };
  for (const Node& n : d.nodes) {
    if (n.kind != NodeKind::Vertex) continue;
    for (DartId dd : n.rotation) {
      if (used[dd]) continue;
      RawArc arc = walk(dd);
      arc.endpoints.insert(arc.endpoints.begin(), n.id);
      arcs.push_back(std::move(arc));
    }
  }
  for (DartId s = 0; s < nd; ++s) {
    if (used[s]) continue;
    arcs.push_back(walk(s));
  }
  return arcs;
}

int orbit_genus_check(const Diagram& d) {
  // Returns V - E + F_orbits - 2C (zero iff every component is planar with
  // the given rotations).
  const int nd = d.dart_count();
  std::vector<int> orbit(nd, -1);
  int f = 0;
  for (DartId s = 0; s < nd; ++s) {
    if (orbit[s] >= 0) continue;
    DartId cur = s;
    do {
      orbit[cur] = f;
      cur = d.face_next(cur);
    } while (cur != s);
    ++f;
  }
  int c = component_count(d);
  return d.node_count() - d.edge_count() + f - 2 * c;
}

}  // namespace

void relabel_arcs(Diagram& d) {
  auto arcs = trace_arcs_raw(d);
  std::sort(arcs.begin(), arcs.end(), [&](const RawArc& a, const RawArc& b) {
    auto amin = std::min(*std::min_element(a.darts.begin(), a.darts.end()),
                         d.opp[*std::min_element(a.darts.begin(), a.darts.end())]);
    auto bmin = std::min(*std::min_element(b.darts.begin(), b.darts.end()),
                         d.opp[*std::min_element(b.darts.begin(), b.darts.end())]);
    return amin < bmin;
  });
  d.edge_label.assign(d.dart_count(), -1);
  for (int i = 0; i < static_cast<int>(arcs.size()); ++i)
    for (DartId dd : arcs[i].darts) {
      d.edge_label[dd] = i;
      d.edge_label[d.opp[dd]] = i;
    }
}

void choose_default_outer(Diagram& d) {
  const int nd = d.dart_count();
  std::vector<int> orbit(nd, -1);
  std::vector<int> size;
  std::vector<DartId> mindart;
  for (DartId s = 0; s < nd; ++s) {
    if (orbit[s] >= 0) continue;
    int id = static_cast<int>(size.size());
    int k = 0;
    DartId mn = s;
    DartId cur = s;
    do {
      orbit[cur] = id;
      mn = std::min(mn, cur);
      ++k;
      cur = d.face_next(cur);
    } while (cur != s);
    size.push_back(k);
    mindart.push_back(mn);
  }
  // Component of each dart.
  std::vector<int> comp(d.node_count(), -1);
  int nc = 0;
  for (NodeId r = 0; r < d.node_count(); ++r) {
    if (comp[r] >= 0) continue;
    std::deque<NodeId> q{r};
    comp[r] = nc;
    while (!q.empty()) {
      NodeId n = q.front();
      q.pop_front();
      for (DartId dd : d.nodes[n].rotation) {
        NodeId m = d.dart_node[d.opp[dd]];
        if (comp[m] < 0) {
          comp[m] = nc;
          q.push_back(m);
        }
      }
    }
    ++nc;
  }
  std::vector<int> best(nc, -1);  // orbit choice per component
  for (int o = 0; o < static_cast<int>(size.size()); ++o) {
    int c = comp[d.dart_node[mindart[o]]];
    if (best[c] < 0 || size[o] > size[best[c]] ||
        (size[o] == size[best[c]] && mindart[o] < mindart[best[c]]))
      best[c] = o;
  }
  d.outer_darts.clear();
  for (int c = 0; c < nc; ++c) d.outer_darts.push_back(mindart[best[c]]);
  std::sort(d.outer_darts.begin(), d.outer_darts.end());
}

namespace {

struct PdEntry {
  char kind;  // 'X' or 'V'
  std::vector<long> labels;
  std::size_t pos;  // offset in input, for error messages
};

std::vector<PdEntry> tokenize_pd(const std::string& text) {
  std::vector<PdEntry> entries;
  std::size_t i = 0;
  auto syntax = [&](std::size_t at, const std::string& msg) {
    fail(errc::syntax_error, "offset " + std::to_string(at) + ": " + msg);
  };
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',') { ++i; continue; }
    if (text[i] == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    char k = text[i];
    if (k != 'X' && k != 'V') syntax(i, std::string("expected X or V, got '") + k + "'");
    PdEntry e;
    e.kind = k;
    e.pos = i;
    ++i;
    if (i >= text.size() || text[i] != '[') syntax(i, "expected '['");
    ++i;
    while (true) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j == i) syntax(i, "expected segment label");
      e.labels.push_back(std::stol(text.substr(i, j - i)));
      i = j;
      if (i < text.size() && text[i] == ',') { ++i; continue; }
      if (i < text.size() && text[i] == ']') { ++i; break; }
      syntax(i, "expected ',' or ']'");
    }
    if (e.kind == 'X' && e.labels.size() != 4)
      syntax(e.pos, "X entry needs exactly 4 labels");
    if (e.kind == 'V' && e.labels.empty()) syntax(e.pos, "V entry needs labels");
    for (long l : e.labels)
      if (l <= 0) syntax(e.pos, "labels must be positive");
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace

Diagram parse_pd(const std::string& text) {
  auto entries = tokenize_pd(text);
  if (entries.empty()) fail(errc::syntax_error, "empty PD code");

  Diagram d;
  std::map<long, std::vector<DartId>> by_label;
  for (const PdEntry& e : entries) {
    Node n;
    n.id = static_cast<NodeId>(d.nodes.size());
    n.kind = e.kind == 'X' ? NodeKind::Crossing : NodeKind::Vertex;
    for (int s = 0; s < static_cast<int>(e.labels.size()); ++s) {
      DartId dd = d.dart_count();
      d.opp.push_back(kNoDart);
      d.dart_node.push_back(n.id);
      d.dart_slot.push_back(s);
      d.edge_label.push_back(-1);
      n.rotation.push_back(dd);
      by_label[e.labels[s]].push_back(dd);
    }
    if (n.kind == NodeKind::Crossing) n.over = {n.rotation[1], n.rotation[3]};
    d.nodes.push_back(std::move(n));
  }
  for (const auto& [label, ds] : by_label) {
    if (ds.size() != 2)
      fail(errc::syntax_error, "segment label " + std::to_string(label) + " appears " +
                                   std::to_string(ds.size()) + " times (need 2)");
    d.opp[ds[0]] = ds[1];
    d.opp[ds[1]] = ds[0];
  }
  if (orbit_genus_check(d) != 0)
    fail(errc::non_planar, "rotations give a non-planar embedding");
  relabel_arcs(d);
  choose_default_outer(d);
  ValidationReport rep = validate(d);
  if (!rep.ok()) fail(errc::syntax_error, "PD code is not a legal diagram:\n" + rep.to_string());
  return d;
}

namespace {

struct Encoding {
  std::vector<char> kinds;
  std::vector<std::vector<int>> entries;  // edge labels, 1-based within component
  int edge_count = 0;
  bool operator<(const Encoding& o) const {
    return std::tie(kinds, entries) < std::tie(o.kinds, o.entries);
  }
  bool empty() const { return entries.empty(); }
  std::string render(int offset) const {
    std::ostringstream os;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      if (i) os << ' ';
      os << kinds[i] << '[';
      for (std::size_t k = 0; k < entries[i].size(); ++k)
        os << entries[i][k] + offset << (k + 1 == entries[i].size() ? "]" : ",");
    }
    return os.str();
  }
};

// BFS relabeling of the component containing dart s0.
Encoding encode_from(const Diagram& d, DartId s0) {
  std::map<DartId, int> edge_id;  // smaller dart of edge -> label
  int next_label = 1;
  auto label_of = [&](DartId dd) {
    DartId key = std::min(dd, d.opp[dd]);
    auto [it, fresh] = edge_id.try_emplace(key, next_label);
    if (fresh) ++next_label;
    return it->second;
  };

  std::vector<NodeId> order;
  std::map<NodeId, DartId> entry;
  std::set<NodeId> seen;
  std::deque<NodeId> q;
  NodeId n0 = d.dart_node[s0];
  entry[n0] = s0;
  seen.insert(n0);
  q.push_back(n0);
  while (!q.empty()) {
    NodeId n = q.front();
    q.pop_front();
    order.push_back(n);
    const Node& node = d.nodes[n];
    int base = d.dart_slot[entry[n]];
    int val = static_cast<int>(node.rotation.size());
    for (int k = 0; k < val; ++k) {
      DartId dd = node.rotation[(base + k) % val];
      label_of(dd);
      NodeId far = d.dart_node[d.opp[dd]];
      if (seen.insert(far).second) {
        entry[far] = d.opp[dd];
        q.push_back(far);
      }
    }
  }

  Encoding enc;
  enc.edge_count = next_label - 1;
  for (NodeId n : order) {
    const Node& node = d.nodes[n];
    int val = static_cast<int>(node.rotation.size());
    int start = 0;
    if (node.kind == NodeKind::Crossing) {
      // Start at the under-strand dart with the smaller label.
      int s_over0 = d.dart_slot[node.over[0]];
      int u1 = (s_over0 + 1) % 4, u2 = (s_over0 + 3) % 4;
      start = label_of(node.rotation[u1]) <= label_of(node.rotation[u2]) ? u1 : u2;
    } else {
      std::vector<int> best;
      for (int off = 0; off < val; ++off) {
        std::vector<int> t;
        for (int k = 0; k < val; ++k) t.push_back(label_of(node.rotation[(off + k) % val]));
        if (best.empty() || t < best) {
          best = t;
          start = off;
        }
      }
    }
    enc.kinds.push_back(node.kind == NodeKind::Crossing ? 'X' : 'V');
    std::vector<int> row;
    for (int k = 0; k < val; ++k) row.push_back(label_of(node.rotation[(start + k) % val]));
    enc.entries.push_back(std::move(row));
  }
  return enc;
}

std::vector<std::vector<NodeId>> components_of(const Diagram& d) {
  std::vector<int> comp(d.node_count(), -1);
  std::vector<std::vector<NodeId>> out;
  for (NodeId r = 0; r < d.node_count(); ++r) {
    if (comp[r] >= 0) continue;
    std::vector<NodeId> c;
    std::deque<NodeId> q{r};
    comp[r] = static_cast<int>(out.size());
    while (!q.empty()) {
      NodeId n = q.front();
      q.pop_front();
      c.push_back(n);
      for (DartId dd : d.nodes[n].rotation) {
        NodeId m = d.dart_node[d.opp[dd]];
        if (comp[m] < 0) {
          comp[m] = comp[r];
          q.push_back(m);
        }
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::string canonical_pd(const Diagram& d) {
  auto comps = components_of(d);
  std::vector<Encoding> parts;
  for (const auto& comp : comps) {
    int min_val = INT_MAX;
    for (NodeId n : comp) min_val = std::min(min_val, d.valence(n));
    Encoding best;
    for (NodeId n : comp) {
      if (d.valence(n) != min_val) continue;
      for (DartId dd : d.nodes[n].rotation) {
        Encoding e = encode_from(d, dd);
        if (best.empty() || e < best) best = std::move(e);
      }
    }
    parts.push_back(std::move(best));
  }
  std::sort(parts.begin(), parts.end());
  std::string out;
  int offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += " ";
    out += parts[i].render(offset);
    offset += parts[i].edge_count;
  }
  return out;
}

std::string emit_pd(const Diagram& d) { return canonical_pd(d); }

// ---------------------------------------------------------------------------
// Gauss codes (knots only)

Diagram parse_gauss(const std::string& text) {
  struct Token {
    bool over;
    int crossing;
    int sign;
  };
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ',') { ++i; continue; }
    char c = text[i];
    if (c != 'O' && c != 'U' && c != 'o' && c != 'u')
      fail(errc::syntax_error, "expected O or U at offset " + std::to_string(i));
    ++i;
    std::size_t j = i;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
    if (j == i) fail(errc::syntax_error, "expected crossing number at offset " + std::to_string(i));
    int num = std::stoi(text.substr(i, j - i));
    i = j;
    if (i >= text.size() || (text[i] != '+' && text[i] != '-'))
      fail(errc::syntax_error, "expected sign at offset " + std::to_string(i));
    tokens.push_back({c == 'O' || c == 'o', num, text[i] == '+' ? +1 : -1});
    ++i;
  }
  if (tokens.empty()) {
    // 0-crossing unknot.
    Diagram d;
    Node v;
    v.id = 0;
    v.kind = NodeKind::Vertex;
    v.rotation = {0, 1};
    d.nodes.push_back(v);
    d.opp = {1, 0};
    d.dart_node = {0, 0};
    d.dart_slot = {0, 1};
    d.edge_label = {0, 0};
    d.outer_darts = {0};
    return d;
  }

  std::map<int, std::vector<int>> occur;  // crossing -> token indices
  for (int t = 0; t < static_cast<int>(tokens.size()); ++t)
    occur[tokens[t].crossing].push_back(t);
  for (const auto& [num, occ] : occur) {
    if (occ.size() != 2 || tokens[occ[0]].over == tokens[occ[1]].over)
      fail(errc::syntax_error,
           "crossing " + std::to_string(num) + " needs one O and one U visit");
    if (tokens[occ[0]].sign != tokens[occ[1]].sign)
      fail(errc::syntax_error, "crossing " + std::to_string(num) + " has inconsistent signs");
  }

  // Four darts per crossing: slots fixed by the sign.
  //   +:  [over_out, under_out, over_in, under_in]
  //   -:  [over_out, under_in, over_in, under_out]
  Diagram d;
  std::map<int, NodeId> node_of;
  for (const auto& [num, occ] : occur) {
    Node n;
    n.id = static_cast<NodeId>(d.nodes.size());
    n.kind = NodeKind::Crossing;
    for (int s = 0; s < 4; ++s) {
      DartId dd = d.dart_count();
      d.opp.push_back(kNoDart);
      d.dart_node.push_back(n.id);
      d.dart_slot.push_back(s);
      d.edge_label.push_back(0);
      n.rotation.push_back(dd);
    }
    n.over = {n.rotation[0], n.rotation[2]};
    d.nodes.push_back(std::move(n));
    node_of[num] = d.nodes.back().id;
  }
  auto out_dart = [&](const Token& t) {
    const Node& n = d.nodes[node_of.at(t.crossing)];
    if (t.over) return n.rotation[0];
    return t.sign > 0 ? n.rotation[1] : n.rotation[3];
  };
  auto in_dart = [&](const Token& t) {
    const Node& n = d.nodes[node_of.at(t.crossing)];
    if (t.over) return n.rotation[2];
    return t.sign > 0 ? n.rotation[3] : n.rotation[1];
  };
  for (int t = 0; t < static_cast<int>(tokens.size()); ++t) {
    DartId a = out_dart(tokens[t]);
    DartId b = in_dart(tokens[(t + 1) % tokens.size()]);
    if (d.opp[a] != kNoDart || d.opp[b] != kNoDart)
      fail(errc::syntax_error, "gauss code reuses a strand end");
    d.opp[a] = b;
    d.opp[b] = a;
  }
  if (orbit_genus_check(d) != 0)
    fail(errc::non_realizable, "gauss code admits no planar embedding with its signs");
  relabel_arcs(d);
  choose_default_outer(d);
  ValidationReport rep = validate(d);
  if (!rep.ok()) fail(errc::non_realizable, "gauss code invalid:\n" + rep.to_string());
  return d;
}

// ---------------------------------------------------------------------------
// JSON envelope

std::string to_json(const Diagram& d) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const Node& n : d.nodes) {
    nlohmann::json jn;
    jn["id"] = n.id;
    jn["kind"] = n.kind == NodeKind::Crossing ? "crossing" : "vertex";
    jn["rotation"] = n.rotation;
    if (n.kind == NodeKind::Crossing)
      jn["over_pair"] = {d.dart_slot[n.over[0]], d.dart_slot[n.over[1]]};
    j["nodes"].push_back(jn);
  }
  j["edges"] = nlohmann::json::array();
  for (DartId a = 0; a < d.dart_count(); ++a)
    if (a < d.opp[a]) j["edges"].push_back({a, d.opp[a]});
  nlohmann::json labels = nlohmann::json::object();
  for (DartId a = 0; a < d.dart_count(); ++a)
    labels[std::to_string(a)] = d.edge_label[a];
  j["edge_labels"] = labels;
  auto faces = trace_faces(d);
  j["outer_face"] = outer_face_id(faces);
  j["outer_darts"] = d.outer_darts;
  j["exceptional"] = nlohmann::json::array();
  for (const auto& x : d.exceptional)
    j["exceptional"].push_back({{"arc", x.arc}, {"split_dart", x.split_dart}});
  return j.dump(2);
}

Diagram from_json(const std::string& s) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(s);
  } catch (const std::exception& e) {
    fail(errc::schema_error, std::string("bad JSON: ") + e.what());
  }
  Diagram d;
  try {
    int ndarts = 0;
    for (const auto& je : j.at("edges")) {
      ndarts = std::max({ndarts, je.at(0).get<int>() + 1, je.at(1).get<int>() + 1});
    }
    d.opp.assign(ndarts, kNoDart);
    d.dart_node.assign(ndarts, -1);
    d.dart_slot.assign(ndarts, -1);
    d.edge_label.assign(ndarts, -1);
    for (const auto& je : j.at("edges")) {
      int a = je.at(0).get<int>(), b = je.at(1).get<int>();
      d.opp[a] = b;
      d.opp[b] = a;
    }
    for (const auto& jn : j.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<int>();
      std::string k = jn.at("kind").get<std::string>();
      if (k != "crossing" && k != "vertex") fail(errc::schema_error, "bad node kind");
      n.kind = k == "crossing" ? NodeKind::Crossing : NodeKind::Vertex;
      n.rotation = jn.at("rotation").get<std::vector<int>>();
      for (int s = 0; s < static_cast<int>(n.rotation.size()); ++s) {
        DartId dd = n.rotation[s];
        if (dd < 0 || dd >= ndarts) fail(errc::schema_error, "rotation dart out of range");
        d.dart_node[dd] = n.id;
        d.dart_slot[dd] = s;
      }
      if (n.kind == NodeKind::Crossing) {
        auto op = jn.at("over_pair").get<std::vector<int>>();
        if (op.size() != 2 || n.rotation.size() != 4) fail(errc::schema_error, "bad over_pair");
        n.over = {n.rotation[op[0]], n.rotation[op[1]]};
      }
      if (n.id != static_cast<int>(d.nodes.size())) fail(errc::schema_error, "node ids not dense");
      d.nodes.push_back(std::move(n));
    }
    for (const auto& [key, val] : j.at("edge_labels").items())
      d.edge_label.at(std::stoi(key)) = val.get<int>();
    if (j.contains("outer_darts")) {
      d.outer_darts = j.at("outer_darts").get<std::vector<int>>();
    } else {
      // Reconstruct from the face id; only determinate for connected maps.
      if (component_count(d) != 1)
        fail(errc::schema_error, "disconnected diagram needs outer_darts");
      int want = j.at("outer_face").get<int>();
      d.outer_darts = {0};
      auto faces = trace_faces(d);
      bool found = false;
      for (const Face& f : faces) {
        if (f.id != want) continue;
        d.outer_darts = {f.cycles[0][0]};
        found = true;
      }
      if (!found) fail(errc::schema_error, "outer_face id out of range");
    }
    if (j.contains("exceptional"))
      for (const auto& jx : j.at("exceptional"))
        d.exceptional.push_back({jx.at("arc").get<int>(), jx.at("split_dart").get<int>()});
  } catch (const error&) {
    throw;
  } catch (const std::exception& e) {
    fail(errc::schema_error, std::string("schema violation: ") + e.what());
  }
  ValidationReport rep = validate(d);
  if (!rep.ok()) fail(errc::schema_error, "JSON diagram invalid:\n" + rep.to_string());
  return d;
}

}  // namespace meanderkit
