#pragma once

#include "gest/config.hpp"
#include "gest/exec.hpp"
#include "gest/graph.hpp"
#include "gest/identity.hpp"

#include <string>
#include <utility>
#include <vector>

namespace gest {

/// Wall time per stage in milliseconds, in execution order.
using StageTimings = std::vector<std::pair<std::string, double>>;

struct PipelineResult {
    GestGraph graph;
    IdMapping identities;
    std::size_t observations = 0;  // actions after identity mapping
    std::size_t filtered = 0;      // after confidence / top-k
    std::size_t voted = 0;         // after temporal voting
    StageTimings timings;
};

/// Detection records to graph: identities, action filtering and voting, object association,
/// event aggregation and unification, relations. Frames must be sorted by index.
PipelineResult build_gest(const VideoMeta& meta, const std::vector<FrameRecord>& frames, const PipelineConfig& cfg,
                          Exec exec = Exec::parallel);

}  // namespace gest
