#pragma once

#include "gest/config.hpp"
#include "gest/event_builder.hpp"
#include "gest/exec.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace gest {

enum class RelationKind { space_close, next, same_time, meanwhile };

std::string_view to_string(RelationKind kind);
RelationKind relation_kind_from_string(std::string_view text);

struct Relation {
    int src_event_id = 0;
    int dst_event_id = 0;
    RelationKind kind = RelationKind::next;
    // space_close: fraction of overlapping frames that were close.
    // next: gap in frames. same_time / meanwhile: overlap length in frames.
    double evidence = 0.0;

    friend bool operator==(const Relation&, const Relation&) = default;
};

/// Box of the stored frame nearest to `frame` (earlier wins ties). The event must have at least one box.
const BBox& box_at(const Event& event, int frame);

/// space_close when the centroid distance over the diagonal sum is below spatial_ratio_threshold in
/// more than spatial_min_overlap_fraction of the temporally overlapping frames.
std::optional<Relation> spatial_relation(const Event& a, const Event& b, const PipelineConfig& cfg);

/// Requires a.start_frame <= b.start_frame (std::invalid_argument otherwise).
///   same_time  both endpoints within same_time_tolerance
///   meanwhile  spans share at least one frame
///   next       1 <= b.start - a.end <= next_max_gap
std::optional<Relation> temporal_relation(const Event& a, const Event& b, const PipelineConfig& cfg);

/// Every temporal edge over ordered pairs plus space_close edges between events of different actors.
/// Sorted by (src, dst, kind).
std::vector<Relation> build_relations(const std::vector<Event>& events, const PipelineConfig& cfg,
                                      Exec exec = Exec::parallel);

/// Drops next edges a->c implied by a chain of next edges a->b->...->c.
std::vector<Relation> reduce_next_edges(std::vector<Relation> relations);

}  // namespace gest
