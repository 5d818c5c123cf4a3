#pragma once

#include "gest/config.hpp"
#include "gest/exec.hpp"
#include "gest/identity.hpp"
#include "gest/types.hpp"

#include <string>
#include <vector>

namespace gest {

struct ActionObservation {
    int frame_index = 0;
    int person_id = 0;
    std::string label;
    double confidence = 0.0;
    BBox bbox;
    int raw_track_id = 0;

    friend bool operator==(const ActionObservation&, const ActionObservation&) = default;
};

/// Actions of every frame with tracker ids replaced by stable ids. Duplicate (person, label)
/// pairs inside one frame collapse to the most confident one. Sorted by (frame, person, label).
std::vector<ActionObservation> collect_observations(const std::vector<FrameRecord>& frames, const IdMapping& mapping);

/// Single-frame filter: drops confidence < action_min_confidence (strict), then keeps the
/// actions_per_frame most confident, per frame or per person depending on top_k_scope.
/// Ties: higher confidence, then label, then person id. Output sorted by (person, label).
std::vector<ActionObservation> filter_by_confidence(std::vector<ActionObservation> frame_actions,
                                                    const PipelineConfig& cfg);

/// Applies filter_by_confidence frame by frame over a (frame, person, label) sorted stream.
std::vector<ActionObservation> filter_stream(const std::vector<ActionObservation>& stream, const PipelineConfig& cfg);

/// An observation at frame f survives iff its (person, label) occurs in at least vote_min_count frames
/// of [f - vote_radius, f + vote_radius], itself included. One pass over the pre-vote stream;
/// windows are truncated at the video edges. Output preserves input order.
std::vector<ActionObservation> temporal_vote(const std::vector<ActionObservation>& stream, const PipelineConfig& cfg,
                                             Exec exec = Exec::parallel);

}  // namespace gest
