#pragma once

#include "gest/action_filter.hpp"
#include "gest/config.hpp"
#include "gest/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace gest {

struct CandidateObject {
    std::string label;
    double presence = 0.0;  // fraction of the event span in which the object was near the actor

    friend bool operator==(const CandidateObject&, const CandidateObject&) = default;
};

/// One actor performing one action over [start_frame, end_frame].
struct Event {
    int event_id = -1;
    int person_id = 0;
    std::string action_label;
    int start_frame = 0;
    int end_frame = 0;
    std::map<int, BBox> per_frame_bboxes;
    std::vector<CandidateObject> candidate_objects;  // presence descending, then label
    std::map<std::string, std::vector<int>> object_frames;  // sorted frames each object was associated

    int span() const { return end_frame - start_frame + 1; }
    int observed_frames() const { return static_cast<int>(per_frame_bboxes.size()); }

    friend bool operator==(const Event&, const Event&) = default;
};

struct AssociatedObservation {
    ActionObservation observation;
    std::vector<std::string> objects;  // sorted, unique
};

/// Grows the box by `fraction` of its width/height on every side, clamped to the frame.
BBox enlarge(const BBox& box, double fraction, int frame_width, int frame_height);

/// Objects near the actor in this frame: touching the enlarged person box, IoU with the enlarged box
/// >= object_min_iou, and depth within depth_diff_threshold when both depths are known. Person-class
/// objects are skipped. `person` may be null for orphan actions; the action box is used instead.
std::vector<std::string> associate_objects(const ActionObservation& action, const FrameRecord& frame,
                                           const PersonDetection* person, const VideoMeta& meta,
                                           const PipelineConfig& cfg);

/// associate_objects for every observation of a frame-sorted stream.
std::vector<AssociatedObservation> associate_stream(const std::vector<ActionObservation>& stream,
                                                    const std::vector<FrameRecord>& frames, const VideoMeta& meta,
                                                    const PipelineConfig& cfg);

/// Recomputes candidate_objects from object_frames over the current span.
void refresh_candidates(Event& event, const PipelineConfig& cfg);

/// Maximal runs of one (person, label) with frame gaps <= 1. Output ordered by (start, end, person, label).
std::vector<Event> aggregate_events(const std::vector<AssociatedObservation>& observations, const PipelineConfig& cfg);

/// Merges same (person, label) events whose gap start2 - end1 is <= event_unify_max_gap, left to right,
/// until none applies. Presence is recomputed over the merged span with gap frames counted as absent.
std::vector<Event> unify_events(std::vector<Event> events, const PipelineConfig& cfg);

/// Orders by (start, end, person, label) and numbers the events 0..n-1.
void assign_event_ids(std::vector<Event>& events);

}  // namespace gest
