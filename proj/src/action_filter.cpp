#include "gest/action_filter.hpp"

#include <algorithm>
#include <map>
#include <tuple>

namespace gest {

namespace {

bool more_confident(const ActionObservation& a, const ActionObservation& b)
{
    if (a.confidence != b.confidence) {
        return a.confidence > b.confidence;
    }
    return std::tie(a.label, a.person_id) < std::tie(b.label, b.person_id);
}

bool stream_order(const ActionObservation& a, const ActionObservation& b)
{
    return std::tie(a.frame_index, a.person_id, a.label) < std::tie(b.frame_index, b.person_id, b.label);
}

}  // namespace

std::vector<ActionObservation> collect_observations(const std::vector<FrameRecord>& frames, const IdMapping& mapping)
{
    std::vector<ActionObservation> out;
    for (const auto& f : frames) {
        std::map<std::pair<int, std::string>, ActionObservation> best;
        for (const auto& a : f.actions) {
            const auto it = mapping.find(a.track_id);
            const int person = it != mapping.end() ? it->second : a.track_id;
            ActionObservation obs{f.frame_index, person, a.label, a.confidence, a.bbox, a.track_id};
            auto [slot, inserted] = best.try_emplace({person, a.label}, obs);
            if (!inserted && obs.confidence > slot->second.confidence) {
                slot->second = std::move(obs);
            }
        }
        for (auto& [_, obs] : best) {
            out.push_back(std::move(obs));
        }
    }
    return out;
}

std::vector<ActionObservation> filter_by_confidence(std::vector<ActionObservation> frame_actions,
                                                    const PipelineConfig& cfg)
{
    std::erase_if(frame_actions,
                  [&](const ActionObservation& a) { return a.confidence < cfg.action_min_confidence; });
    std::sort(frame_actions.begin(), frame_actions.end(), more_confident);

    const auto k = static_cast<std::size_t>(cfg.actions_per_frame);
    std::vector<ActionObservation> kept;
    if (cfg.top_k_scope == TopKScope::frame) {
        for (auto& a : frame_actions) {
            if (kept.size() == k) {
                break;
            }
            kept.push_back(std::move(a));
        }
    } else {
        std::map<int, std::size_t> per_person;
        for (auto& a : frame_actions) {
            if (per_person[a.person_id]++ < k) {
                kept.push_back(std::move(a));
            }
        }
    }
    std::sort(kept.begin(), kept.end(), stream_order);
    return kept;
}

std::vector<ActionObservation> filter_stream(const std::vector<ActionObservation>& stream, const PipelineConfig& cfg)
{
    std::vector<ActionObservation> out;
    auto begin = stream.begin();
    while (begin != stream.end()) {
        const int frame = begin->frame_index;
        const auto end = std::find_if(begin, stream.end(), [&](const ActionObservation& a) { return a.frame_index != frame; });
        auto kept = filter_by_confidence({begin, end}, cfg);
        out.insert(out.end(), std::make_move_iterator(kept.begin()), std::make_move_iterator(kept.end()));
        begin = end;
    }
    return out;
}

std::vector<ActionObservation> temporal_vote(const std::vector<ActionObservation>& stream, const PipelineConfig& cfg,
                                             Exec exec)
{
    // Index observations by (person, label); each group is voted independently.
    std::map<std::pair<int, std::string>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        groups[{stream[i].person_id, stream[i].label}].push_back(i);
    }
    std::vector<const std::vector<std::size_t>*> work;
    work.reserve(groups.size());
    for (const auto& [_, members] : groups) {
        work.push_back(&members);
    }

    std::vector<char> survives(stream.size(), 0);
    const auto vote_group = [&](const std::vector<std::size_t>& members) {
        std::vector<int> frames;
        frames.reserve(members.size());
        for (const auto i : members) {
            frames.push_back(stream[i].frame_index);
        }
        std::sort(frames.begin(), frames.end());
        frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
        for (const auto i : members) {
            const int f = stream[i].frame_index;
            const auto lo = std::lower_bound(frames.begin(), frames.end(), f - cfg.vote_radius);
            const auto hi = std::upper_bound(frames.begin(), frames.end(), f + cfg.vote_radius);
            survives[i] = (hi - lo) >= cfg.vote_min_count ? 1 : 0;
        }
    };

    const auto n = static_cast<std::ptrdiff_t>(work.size());
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t g = 0; g < n; ++g) {
            vote_group(*work[static_cast<std::size_t>(g)]);
        }
    } else {
        for (std::ptrdiff_t g = 0; g < n; ++g) {
            vote_group(*work[static_cast<std::size_t>(g)]);
        }
    }

    std::vector<ActionObservation> out;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (survives[i]) {
            out.push_back(stream[i]);
        }
    }
    return out;
}

}  // namespace gest
