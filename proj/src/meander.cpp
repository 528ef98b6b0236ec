#include "meanderkit/meander.hpp"

#include <algorithm>
#include <map>

namespace meanderkit {

namespace {

bool has_looped_edges(const Diagram& d) {
  for (const auto& a : principal_arcs(d))
    if (a.is_looped_edge()) return true;
  return false;
}

}  // namespace

PipelineResult semimeanderize(const Diagram& d, const ProgressFn& progress) {
  if (!d.exceptional.empty())
    fail(errc::has_loops, "diagram declares exceptional (looped) arcs");
  if (has_looped_edges(d)) fail(errc::has_loops, "diagram has looped edges");

  PipelineResult res{d, {}};
  int step = 0;
  while (true) {
    auto arcs = principal_arcs(res.diagram);
    ArcId next = -1;
    for (const auto& a : arcs) {
      if (!self_crossings(res.diagram, a).empty()) {
        next = a.id;
        break;
      }
    }
    if (next < 0) break;
    MoveRecord rec;
    res.diagram = eliminate_self_crossing(res.diagram, next, &rec);
    res.records.push_back(std::move(rec));
    if (progress) progress(++step);
  }
  return res;
}

PipelineResult meanderize(const Diagram& d, const ProgressFn& progress) {
  if (!d.exceptional.empty())
    fail(errc::knotted_loop_present, "diagram declares knotted loops");
  if (has_looped_edges(d)) fail(errc::knotted_loop_present, "diagram has looped edges");
  if (!is_semi_meander(d)) fail(errc::not_semi_meander, "input is not semi-meander");

  PipelineResult res{d, {}};
  int step = 0;
  while (true) {
    auto outer = outer_face_vertices(res.diagram);
    NodeId interior = -1;
    for (const Node& n : res.diagram.nodes) {
      if (n.kind != NodeKind::Vertex) continue;
      if (std::find(outer.begin(), outer.end(), n.id) == outer.end()) {
        interior = n.id;
        break;
      }
    }
    if (interior < 0) break;
    MoveRecord rec;
    res.diagram = relocate_vertex(res.diagram, interior, &rec);
    res.records.push_back(std::move(rec));
    if (progress) progress(++step);
  }
  return res;
}

PipelineResult to_meander(const Diagram& d, const MoveBudget& loop_budget,
                          const ProgressFn& progress) {
  ValidationReport rep = validate(d);
  if (!rep.ok()) fail(errc::malformed_map, "to_meander: invalid input:\n" + rep.to_string());

  PipelineResult res{d, {}};
  res.diagram.exceptional.clear();

  // Cut every looped edge open; arc labels survive all later moves, so the
  // two half-arcs identify the loop afterwards.
  struct LoopInfo {
    ArcId half_a = -1;  // the label the loop kept
    ArcId half_b = -1;  // the fresh label of the second half
    Knottedness knot = Knottedness::Unknown;
  };
  std::vector<LoopInfo> loops;
  while (true) {
    auto arcs = principal_arcs(res.diagram);
    const PrincipalArc* looped = nullptr;
    for (const auto& a : arcs)
      if (a.is_looped_edge()) {
        looped = &a;
        break;
      }
    if (!looped) break;
    LoopInfo info;
    info.half_a = looped->id;
    info.knot = knottedness_of_loop(res.diagram, looped->id, loop_budget);
    MoveRecord r1;
    res.diagram = subdivide_edge_move(res.diagram, looped->id, looped->darts.front(), &r1);
    res.records.push_back(r1);
    // A vertex-free loop needs a second cut to stop being a looped edge.
    auto arcs2 = principal_arcs(res.diagram);
    const PrincipalArc* still = nullptr;
    for (const auto& a : arcs2)
      if (a.id == info.half_a && a.is_looped_edge()) still = &a;
    if (still) {
      MoveRecord r2;
      res.diagram =
          subdivide_edge_move(res.diagram, still->id, still->darts[still->darts.size() / 2], &r2);
      res.records.push_back(r2);
    }
    ArcId mx = -1;
    for (ArcId l : res.diagram.edge_label) mx = std::max(mx, l);
    info.half_b = mx;  // labels are assigned increasing; the newest is the half
    loops.push_back(info);
  }

  PipelineResult semi = semimeanderize(res.diagram, progress);
  res.diagram = semi.diagram;
  for (auto& r : semi.records) res.records.push_back(std::move(r));
  PipelineResult mea = meanderize(res.diagram, progress);
  res.diagram = mea.diagram;
  for (auto& r : mea.records) res.records.push_back(std::move(r));

  // Undo one helper cut per loop.  The two halves now run between the two
  // helper vertices; smoothing their common endpoint with the larger id
  // merges them back into one looped arc split at that point.
  for (const auto& info : loops) {
    auto arcs = principal_arcs(res.diagram);
    const PrincipalArc* ha = find_arc(arcs, info.half_a);
    const PrincipalArc* hb = find_arc(arcs, info.half_b);
    if (!ha || !hb) fail(errc::internal, "to_meander: loop halves lost");

    // Crossings between the two halves decide whether the merged loop would
    // stay simple.
    int inter = 0;
    {
      std::set<NodeId> on_a;
      for (DartId dd : ha->darts) on_a.insert(res.diagram.dart_node[dd]);
      std::set<NodeId> counted;
      for (DartId dd : hb->darts) {
        NodeId n = res.diagram.dart_node[dd];
        if (res.diagram.is_crossing(n) && on_a.count(n) && counted.insert(n).second) ++inter;
      }
    }
    if (info.knot == Knottedness::Unknotted && inter > 0) {
      // Merging would create a non-simple unknotted loop, which semi-meander
      // forbids; keep both helper vertices (same spatial graph, one extra
      // valence-2 marker).
      continue;
    }

    NodeId smooth_at = -1;
    for (NodeId cand : ha->endpoints)
      if (res.diagram.valence(cand) == 2 &&
          std::find(hb->endpoints.begin(), hb->endpoints.end(), cand) != hb->endpoints.end())
        smooth_at = std::max(smooth_at, cand);
    if (smooth_at < 0) fail(errc::internal, "to_meander: helper vertex lost");
    DartId q1 = res.diagram.opp[res.diagram.nodes[smooth_at].rotation[0]];
    DartId q2 = res.diagram.opp[res.diagram.nodes[smooth_at].rotation[1]];
    std::array<DartId, 2> dead = {res.diagram.nodes[smooth_at].rotation[0],
                                  res.diagram.nodes[smooth_at].rotation[1]};
    MoveRecord r;
    res.diagram = smooth_vertex_move(res.diagram, smooth_at, &r);
    res.records.push_back(r);
    auto compact = [&](DartId q) {
      int shift = 0;
      for (DartId x : dead)
        if (x < q) ++shift;
      return q - shift;
    };
    if (info.knot != Knottedness::Unknotted) {
      DartId split = std::min(compact(q1), compact(q2));
      ArcId merged = std::min(info.half_a, info.half_b);
      res.diagram.exceptional.push_back({merged, split});
    }
  }

  if (!is_meander(res.diagram)) fail(errc::internal, "to_meander: output not meander");
  return res;
}

}  // namespace meanderkit
