#pragma once

// Verification engine: Kauffman bracket, Jones (writhe-normalized bracket),
// writhe, knotted-loop detection, and a bounded Reidemeister search oracle.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meanderkit/diagram.hpp"
#include "meanderkit/moves.hpp"

namespace meanderkit {

struct LaurentPoly {
  std::map<int, std::int64_t> c;  // exponent -> coefficient, no zeros stored

  static LaurentPoly zero() { return {}; }
  static LaurentPoly one() { return term(1, 0); }
  static LaurentPoly term(std::int64_t coeff, int exp);
  // delta = -A^2 - A^-2 (the loop value)
  static LaurentPoly loop_value();

  bool is_zero() const { return c.empty(); }
  LaurentPoly operator+(const LaurentPoly& o) const;
  LaurentPoly operator-(const LaurentPoly& o) const;
  LaurentPoly operator*(const LaurentPoly& o) const;
  bool operator==(const LaurentPoly& o) const { return c == o.c; }
  bool operator!=(const LaurentPoly& o) const { return c != o.c; }
  LaurentPoly shifted(int dexp) const;           // * A^dexp
  LaurentPoly scaled(std::int64_t k) const;      // * k
  LaurentPoly mirrored() const;                  // A -> A^-1
  bool palindromic() const { return *this == mirrored(); }
  // Exact division by loop_value(); throws internal if not divisible.
  LaurentPoly divided_by_loop() const;
  std::string to_string() const;  // e.g. "-A^-4 + 1 + A^4"
};

// State-sum bracket via frontier dynamic programming over a BFS node order;
// <0-crossing unknot> = 1.  State work is capped (default 2^20 weighted
// operations); beyond that throws too_large.  Valence-2 vertices are smoothed
// away internally; any other vertex throws has_essential_vertices.
LaurentPoly kauffman_bracket(const Diagram& d, std::size_t state_cap = (1u << 20));

// Independent check implementation: plain enumeration of all 2^n smoothings
// with union-find loop counting.  Kept deliberately simple.
LaurentPoly kauffman_bracket_naive(const Diagram& d);

int writhe(const Diagram& d);

// (-A^3)^(-writhe) * bracket; invariant under all Reidemeister moves.
LaurentPoly jones(const Diagram& d, std::size_t state_cap = (1u << 20));

enum class Knottedness { Unknotted, Knotted, Unknown };
const char* knottedness_name(Knottedness k);

struct MoveBudget {
  int max_depth = 16;
  int max_crossings = 12;
  std::size_t max_states = 20000;
};

// Closure of a loop arc as a standalone knot diagram: self-crossings kept,
// crossings with other arcs resolved by deleting the other arcs.
Diagram loop_closure(const Diagram& d, ArcId loop);

Knottedness knottedness_of_loop(const Diagram& d, ArcId loop,
                                const MoveBudget& budget = {});

struct EquivalenceResult {
  bool equivalent = false;
  std::vector<MoveRecord> path;  // d1 -> d2 when equivalent
  bool budget_exceeded = false;
  bool jones_distinct = false;  // definitive non-equivalence, when computable
};

EquivalenceResult equivalence_search(const Diagram& d1, const Diagram& d2,
                                     const MoveBudget& budget = {});

// Bounded search for a 0-crossing (or crossing-free) state; used by
// knottedness_of_loop.
bool simplifies_to_unknot(const Diagram& d, const MoveBudget& budget);

}  // namespace meanderkit
