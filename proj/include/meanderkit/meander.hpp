#pragma once

// Semi-meanderization and meanderization pipelines.

#include <functional>
#include <vector>

#include "meanderkit/diagram.hpp"
#include "meanderkit/invariants.hpp"
#include "meanderkit/moves.hpp"

namespace meanderkit {

struct PipelineResult {
  Diagram diagram;
  std::vector<MoveRecord> records;
};

using ProgressFn = std::function<void(int step)>;

// Repeated endpoint-nearest self-crossing elimination until every arc is
// simple.  Input must have no looped edges (0-endpoint or endpoint-coincident
// arcs); throws has_loops otherwise.
PipelineResult semimeanderize(const Diagram& d, const ProgressFn& progress = {});

// Repeated relocation of interior vertices until all vertices lie on the
// outer face.  Input must be semi-meander with no exceptional declarations
// and no looped edges.
PipelineResult meanderize(const Diagram& d, const ProgressFn& progress = {});

// Full pipeline: subdivide looped edges (twice), semimeanderize, meanderize,
// then undo the helper subdivisions, declaring exceptional split points for
// loops that are (or may be) knotted.
PipelineResult to_meander(const Diagram& d, const MoveBudget& loop_budget = {},
                          const ProgressFn& progress = {});

}  // namespace meanderkit
