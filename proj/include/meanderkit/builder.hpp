#pragma once

// Mutable half-edge editor behind the move engine.  Diagrams are immutable
// values; a move copies one into a MapBuilder, performs dart surgery, and
// compacts back out with finish().  Intermediate states may be invalid as
// diagrams (stub anchors of valence 3, empty nodes); finish() re-checks.

#include <optional>
#include <vector>

#include "meanderkit/diagram.hpp"

namespace meanderkit {

class MapBuilder {
 public:
  MapBuilder() = default;
  explicit MapBuilder(const Diagram& d);

  // --- queries -------------------------------------------------------------
  bool dart_alive(DartId d) const { return d >= 0 && d < (int)darts_.size() && darts_[d].alive; }
  bool node_alive(NodeId n) const { return n >= 0 && n < (int)nodes_.size() && nodes_[n].alive; }
  DartId opp(DartId d) const { return darts_[d].opp; }
  NodeId node_of(DartId d) const { return darts_[d].node; }
  ArcId label(DartId d) const { return darts_[d].label; }
  NodeKind kind(NodeId n) const { return nodes_[n].kind; }
  const std::vector<DartId>& rotation(NodeId n) const { return nodes_[n].rotation; }
  int valence(NodeId n) const { return (int)nodes_[n].rotation.size(); }
  bool is_over(DartId d) const;
  DartId rot_next(DartId d) const;
  DartId rot_prev(DartId d) const;
  DartId face_next(DartId d) const { return rot_prev(opp(d)); }
  DartId straight_through(DartId into) const;
  int max_dart_id() const { return (int)darts_.size(); }
  int max_node_id() const { return (int)nodes_.size(); }
  // Highest principal-arc label in use plus one.
  ArcId fresh_label() const;

  // --- low-level edits -----------------------------------------------------
  NodeId add_node(NodeKind kind);
  void set_kind(NodeId n, NodeKind kind);
  // New dart at n, appended at the end of the rotation.
  DartId add_dart(NodeId n, ArcId label);
  // New dart inserted immediately ccw-before `before` in its node's rotation
  // (i.e. into the face corner whose arrival dart is `before`).
  DartId add_dart_before(DartId before, ArcId label);
  void set_opp(DartId a, DartId b);
  void clear_opp(DartId a);
  void set_label(DartId d, ArcId arc);
  void set_over_pair(NodeId n, DartId d1, DartId d2);
  void remove_dart(DartId d);  // from rotation; dart dies, opp partner keeps a dangling opp
  void remove_node(NodeId n);  // must have empty rotation

  // --- mid-level edits -----------------------------------------------------
  // New valence-2 node of `kind` on the edge of d.  Dart d keeps its end; the
  // far dart keeps the other; returns the new node whose rotation is
  // [toward node_of(d), toward the far side].
  NodeId subdivide_edge(DartId d, NodeKind kind);
  // Remove a valence-2 node, merging its two edges.  The outer darts survive.
  // Degenerate case (the node's two darts are partners): converts the node to
  // a Vertex and leaves the loop; returns false then.
  bool smooth_valence2(NodeId n);
  void delete_edge(DartId d);

  struct Anchor {
    NodeId node = -1;
    DartId insert_before = kNoDart;  // dart the removed one preceded; kNoDart = append
    bool was_over = false;           // strand was the over one at a crossing anchor
    DartId region_hint = kNoDart;    // surviving dart on the face the anchor corner joins
  };
  // Remove a strand given by consecutive forward darts.  Interior nodes must
  // be crossings passed straight through; they are removed and the
  // transversal strands healed.  Anchor darts are removed from their nodes
  // (anchors may be left with deficient valence until reinsertion).
  std::pair<Anchor, Anchor> delete_strand(const std::vector<DartId>& fwd);

  struct StrandEnd {
    // Reattach at an existing node corner:
    Anchor anchor;
    // ...or end at a fresh valence-1 vertex dangling in the final face.
    bool new_vertex = false;
  };
  struct InsertResult {
    std::vector<DartId> segment_darts;  // forward darts of the new strand
    std::vector<NodeId> new_crossings;
    NodeId end_vertex = -1;
  };
  // Insert a strand from `start` across the edges in `route` (each entered
  // from the side of the listed dart) to `end`, with all new crossings having
  // the strand over (side_over) or under.  Labels of crossed edges are kept;
  // strand darts get `label`.
  InsertResult insert_strand(const Anchor& start, const std::vector<DartId>& route,
                             const StrandEnd& end, bool side_over, ArcId label);

  // Reverse the rotation of every node in `region` and swap over/under of its
  // crossings (mirror about an axis in the plane).
  void flip_region(const std::vector<NodeId>& region);

  // --- faces on the current (possibly intermediate) state -------------------
  // Orbit id per dart; dead darts get -1.  Orbits are regions of the current
  // state; no outer merging.
  std::vector<int> face_orbits(int* count = nullptr) const;

  // Deterministic dual-graph BFS from the corner of `from` (the face orbit
  // containing dart `from`) to any orbit in `targets`.  Never crosses an edge
  // whose either dart's label is in `excluded_labels`, never crosses
  // `excluded_darts`, and never leaves an orbit in `no_transit` (arrival
  // there terminates).  Returns the crossed darts in order, or nullopt.
  std::optional<std::vector<DartId>> route_to(
      DartId from_face_dart, const std::vector<int>& face_orbit,
      const std::vector<char>& target_orbits,
      const std::vector<char>& no_transit_orbits,
      const std::vector<ArcId>& excluded_labels) const;

  // Compact to a Diagram.  `outer_marks` lists darts (by current builder id)
  // designating the outer orbit of each component; dead marks are an error.
  Diagram finish(std::vector<DartId> outer_marks) const;

  // Map a builder dart id to the compact id it will get in finish().
  DartId compact_id(DartId d) const;

 private:
  struct BDart {
    bool alive = false;
    NodeId node = -1;
    DartId opp = kNoDart;
    ArcId label = -1;
  };
  struct BNode {
    bool alive = false;
    NodeKind kind = NodeKind::Vertex;
    std::vector<DartId> rotation;
    std::array<DartId, 2> over{kNoDart, kNoDart};
  };
  std::vector<BDart> darts_;
  std::vector<BNode> nodes_;
};

}  // namespace meanderkit
