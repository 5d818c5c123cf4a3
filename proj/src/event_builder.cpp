#include "gest/event_builder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

namespace gest {

namespace {

bool is_person_label(const std::string& label)
{
    std::string lower;
    lower.reserve(label.size());
    for (const char c : label) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return lower == "person" || lower == "people" || lower == "human";
}

bool event_order(const Event& a, const Event& b)
{
    return std::tie(a.start_frame, a.end_frame, a.person_id, a.action_label) <
           std::tie(b.start_frame, b.end_frame, b.person_id, b.action_label);
}

}  // namespace

BBox enlarge(const BBox& box, double fraction, int frame_width, int frame_height)
{
    const double dx = box.width() * fraction;
    const double dy = box.height() * fraction;
    return BBox{std::max(0.0, box.x1 - dx), std::max(0.0, box.y1 - dy),
                std::min(static_cast<double>(frame_width), box.x2 + dx),
                std::min(static_cast<double>(frame_height), box.y2 + dy)};
}

std::vector<std::string> associate_objects(const ActionObservation& action, const FrameRecord& frame,
                                           const PersonDetection* person, const VideoMeta& meta,
                                           const PipelineConfig& cfg)
{
    const BBox& base = person != nullptr ? person->bbox : action.bbox;
    const BBox area = enlarge(base, cfg.bbox_enlarge_fraction, meta.width, meta.height);
    const bool has_depth = person != nullptr && person->mean_depth.has_value();
    const double person_depth = has_depth ? *person->mean_depth : 0.0;

    std::vector<std::string> out;
    for (const auto& object : frame.objects) {
        if (is_person_label(object.label) || !touches(object.bbox, area)) {
            continue;
        }
        if (iou(object.bbox, area) < cfg.object_min_iou) {
            continue;
        }
        if (has_depth && object.mean_depth &&
            std::abs(person_depth - *object.mean_depth) > cfg.depth_diff_threshold) {
            continue;
        }
        out.push_back(object.label);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<AssociatedObservation> associate_stream(const std::vector<ActionObservation>& stream,
                                                    const std::vector<FrameRecord>& frames, const VideoMeta& meta,
                                                    const PipelineConfig& cfg)
{
    std::vector<AssociatedObservation> out;
    out.reserve(stream.size());
    auto frame_it = frames.begin();
    for (const auto& obs : stream) {
        frame_it = std::lower_bound(frames.begin(), frames.end(), obs.frame_index,
                                    [](const FrameRecord& f, int idx) { return f.frame_index < idx; });
        if (frame_it == frames.end() || frame_it->frame_index != obs.frame_index) {
            out.push_back({obs, {}});
            continue;
        }
        const auto person = std::find_if(frame_it->persons.begin(), frame_it->persons.end(),
                                         [&](const PersonDetection& p) { return p.track_id == obs.raw_track_id; });
        const PersonDetection* match = person != frame_it->persons.end() ? &*person : nullptr;
        out.push_back({obs, associate_objects(obs, *frame_it, match, meta, cfg)});
    }
    return out;
}

void refresh_candidates(Event& event, const PipelineConfig& cfg)
{
    event.candidate_objects.clear();
    const double span = static_cast<double>(event.span());
    for (const auto& [label, frames] : event.object_frames) {
        const double presence = static_cast<double>(frames.size()) / span;
        if (presence > 0.0 && presence >= cfg.object_min_presence) {
            event.candidate_objects.push_back({label, presence});
        }
    }
    std::sort(event.candidate_objects.begin(), event.candidate_objects.end(),
              [](const CandidateObject& a, const CandidateObject& b) {
                  if (a.presence != b.presence) {
                      return a.presence > b.presence;
                  }
                  return a.label < b.label;
              });
}

std::vector<Event> aggregate_events(const std::vector<AssociatedObservation>& observations, const PipelineConfig& cfg)
{
    std::map<std::pair<int, std::string>, std::vector<const AssociatedObservation*>> groups;
    for (const auto& o : observations) {
        groups[{o.observation.person_id, o.observation.label}].push_back(&o);
    }

    std::vector<Event> events;
    for (auto& [key, members] : groups) {
        std::stable_sort(members.begin(), members.end(), [](const auto* a, const auto* b) {
            return a->observation.frame_index < b->observation.frame_index;
        });
        Event current;
        bool open = false;
        for (const auto* m : members) {
            const int f = m->observation.frame_index;
            if (open && f - current.end_frame > 1) {
                refresh_candidates(current, cfg);
                events.push_back(std::move(current));
                current = Event{};
                open = false;
            }
            if (!open) {
                current.person_id = key.first;
                current.action_label = key.second;
                current.start_frame = f;
                open = true;
            }
            current.end_frame = f;
            current.per_frame_bboxes.try_emplace(f, m->observation.bbox);
            for (const auto& label : m->objects) {
                auto& frames = current.object_frames[label];
                if (frames.empty() || frames.back() != f) {
                    frames.push_back(f);
                }
            }
        }
        if (open) {
            refresh_candidates(current, cfg);
            events.push_back(std::move(current));
        }
    }
    std::sort(events.begin(), events.end(), event_order);
    return events;
}

std::vector<Event> unify_events(std::vector<Event> events, const PipelineConfig& cfg)
{
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
        return std::tie(a.person_id, a.action_label, a.start_frame, a.end_frame) <
               std::tie(b.person_id, b.action_label, b.start_frame, b.end_frame);
    });

    std::vector<Event> out;
    for (auto& e : events) {
        if (!out.empty()) {
            auto& last = out.back();
            if (last.person_id == e.person_id && last.action_label == e.action_label &&
                e.start_frame - last.end_frame <= cfg.event_unify_max_gap) {
                last.end_frame = std::max(last.end_frame, e.end_frame);
                last.per_frame_bboxes.insert(e.per_frame_bboxes.begin(), e.per_frame_bboxes.end());
                for (auto& [label, frames] : e.object_frames) {
                    auto& dst = last.object_frames[label];
                    std::vector<int> merged;
                    std::set_union(dst.begin(), dst.end(), frames.begin(), frames.end(), std::back_inserter(merged));
                    dst = std::move(merged);
                }
                refresh_candidates(last, cfg);
                continue;
            }
        }
        out.push_back(std::move(e));
    }
    std::sort(out.begin(), out.end(), event_order);
    return out;
}

void assign_event_ids(std::vector<Event>& events)
{
    std::sort(events.begin(), events.end(), event_order);
    for (std::size_t i = 0; i < events.size(); ++i) {
        events[i].event_id = static_cast<int>(i);
    }
}

}  // namespace gest
