#include "gest/identity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace gest {

bool FeatureVector::is_zero() const
{
    return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

bool PersonTrack::coexists_with(const PersonTrack& other) const
{
    auto a = segments.begin();
    auto b = other.segments.begin();
    while (a != segments.end() && b != other.segments.end()) {
        if (a->frame_index == b->frame_index) {
            return true;
        }
        if (a->frame_index < b->frame_index) {
            ++a;
        } else {
            ++b;
        }
    }
    return false;
}

int hsv_bin(const HsvSample& sample, const HsvBins& bins)
{
    const auto bucket = [](double x, int n) { return std::clamp(static_cast<int>(std::floor(x * n)), 0, n - 1); };
    double hue = std::fmod(sample.h, 360.0);
    if (hue < 0.0) {
        hue += 360.0;
    }
    const int hb = bucket(hue / 360.0, bins.hue);
    const int sb = bucket(sample.s, bins.sat);
    const int vb = bucket(sample.v, bins.val);
    return (hb * bins.sat + sb) * bins.val + vb;
}

FeatureVector hsv_feature(std::span<const HsvSample> samples, const HsvBins& bins)
{
    FeatureVector out{std::vector<double>(static_cast<std::size_t>(bins.total()), 0.0)};
    if (samples.empty()) {
        return out;
    }
    for (const auto& s : samples) {
        out.values[static_cast<std::size_t>(hsv_bin(s, bins))] += 1.0;
    }
    const double n = static_cast<double>(samples.size());
    for (auto& v : out.values) {
        v /= n;
    }
    return out;
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b)
{
    if (a.values.size() != b.values.size()) {
        throw std::invalid_argument("cosine_similarity: feature vectors differ in length");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += a.values[i] * b.values[i];
        na += a.values[i] * a.values[i];
        nb += b.values[i] * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

std::vector<HsvSample> capped(const std::vector<HsvSample>& samples, int cap)
{
    const auto n = samples.size();
    const auto limit = static_cast<std::size_t>(cap);
    if (n <= limit) {
        return samples;
    }
    std::vector<HsvSample> out;
    out.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) {
        out.push_back(samples[i * n / limit]);
    }
    return out;
}

// Scan order shared by both unification passes.
std::vector<std::size_t> by_first_appearance(const std::vector<PersonTrack>& tracks)
{
    std::vector<std::size_t> order(tracks.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::pair(tracks[a].first_frame(), tracks[a].person_id) <
               std::pair(tracks[b].first_frame(), tracks[b].person_id);
    });
    return order;
}

}  // namespace

std::vector<PersonTrack> build_tracks(const std::vector<FrameRecord>& frames, const PipelineConfig& cfg, Exec exec)
{
    struct Detection {
        std::size_t track;
        const PersonDetection* person;
    };
    std::map<int, std::size_t> slot;
    std::vector<PersonTrack> tracks;
    std::vector<Detection> detections;

    for (const auto& f : frames) {
        for (const auto& p : f.persons) {
            auto [it, inserted] = slot.try_emplace(p.track_id, tracks.size());
            if (inserted) {
                tracks.push_back(PersonTrack{p.track_id, {}, std::nullopt, 0});
            }
            auto& track = tracks[it->second];
            if (!track.segments.empty() && track.segments.back().frame_index == f.frame_index) {
                continue;  // duplicate id in one frame; validation reports it
            }
            track.segments.push_back({f.frame_index, p.bbox, p.mean_depth});
            if (!p.pixel_samples.empty()) {
                detections.push_back({it->second, &p});
            }
        }
    }

    std::vector<FeatureVector> histograms(detections.size());
    const auto n = static_cast<std::ptrdiff_t>(detections.size());
    const auto compute = [&](std::ptrdiff_t i) {
        const auto samples = capped(detections[static_cast<std::size_t>(i)].person->pixel_samples, cfg.max_pixel_samples);
        histograms[static_cast<std::size_t>(i)] = hsv_feature(samples, cfg.hsv_bins);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            compute(i);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            compute(i);
        }
    }

    for (std::size_t i = 0; i < detections.size(); ++i) {
        auto& track = tracks[detections[i].track];
        if (!track.appearance) {
            track.appearance = FeatureVector{std::vector<double>(histograms[i].values.size(), 0.0)};
        }
        for (std::size_t k = 0; k < histograms[i].values.size(); ++k) {
            track.appearance->values[k] += histograms[i].values[k];
        }
        ++track.appearance_frames;
    }
    for (auto& track : tracks) {
        if (track.appearance) {
            const double total = std::accumulate(track.appearance->values.begin(), track.appearance->values.end(), 0.0);
            if (total > 0.0) {
                for (auto& v : track.appearance->values) {
                    v /= total;
                }
            }
        }
    }
    std::sort(tracks.begin(), tracks.end(),
              [](const PersonTrack& a, const PersonTrack& b) { return a.person_id < b.person_id; });
    return tracks;
}

IdMapping short_term_unify(const std::vector<PersonTrack>& tracks, const PipelineConfig& cfg)
{
    struct Chain {
        int stable_id;
        int last_frame;
        BBox last_box;
    };
    std::vector<Chain> chains;
    IdMapping mapping;

    for (const auto idx : by_first_appearance(tracks)) {
        const auto& track = tracks[idx];
        const BBox& first_box = track.segments.front().bbox;
        Chain* best = nullptr;
        double best_iou = -1.0;
        int best_gap = 0;
        for (auto& chain : chains) {
            const int gap = track.first_frame() - chain.last_frame;
            if (gap < 1 || gap >= cfg.short_term_max_gap) {
                continue;
            }
            const double overlap = iou(chain.last_box, first_box);
            if (!(overlap > cfg.short_term_min_iou)) {
                continue;
            }
            if (best == nullptr || std::tuple(-overlap, gap, chain.stable_id) <
                                       std::tuple(-best_iou, best_gap, best->stable_id)) {
                best = &chain;
                best_iou = overlap;
                best_gap = gap;
            }
        }
        if (best != nullptr) {
            mapping[track.person_id] = best->stable_id;
            best->last_frame = track.last_frame();
            best->last_box = track.segments.back().bbox;
        } else {
            mapping[track.person_id] = track.person_id;
            chains.push_back({track.person_id, track.last_frame(), track.segments.back().bbox});
        }
    }
    return mapping;
}

IdMapping long_term_reidentify(const std::vector<PersonTrack>& tracks, const PipelineConfig& cfg)
{
    IdMapping mapping;
    // Frames currently owned by each stable id, for the coexistence guard.
    std::map<int, PersonTrack> entities;
    std::vector<std::size_t> seen;

    for (const auto idx : by_first_appearance(tracks)) {
        const auto& track = tracks[idx];
        const PersonTrack* best = nullptr;
        double best_sim = -1.0;
        if (track.appearance && !track.appearance->is_zero()) {
            for (const auto prev_idx : seen) {
                const auto& prev = tracks[prev_idx];
                if (!prev.appearance) {
                    continue;
                }
                const double sim = cosine_similarity(*track.appearance, *prev.appearance);
                if (sim < cfg.reid_similarity_threshold || sim <= best_sim) {
                    continue;
                }
                if (entities.at(mapping.at(prev.person_id)).coexists_with(track)) {
                    continue;
                }
                best = &prev;
                best_sim = sim;
            }
        }
        const int stable = best != nullptr ? mapping.at(best->person_id) : track.person_id;
        mapping[track.person_id] = stable;
        auto& entity = entities[stable];
        entity.person_id = stable;
        std::vector<TrackSegment> merged;
        merged.reserve(entity.segments.size() + track.segments.size());
        std::merge(entity.segments.begin(), entity.segments.end(), track.segments.begin(), track.segments.end(),
                   std::back_inserter(merged),
                   [](const TrackSegment& a, const TrackSegment& b) { return a.frame_index < b.frame_index; });
        entity.segments = std::move(merged);
        seen.push_back(idx);
    }
    return mapping;
}

std::vector<PersonTrack> apply_mapping(const std::vector<PersonTrack>& tracks, const IdMapping& mapping)
{
    std::map<int, PersonTrack> merged;
    for (const auto& track : tracks) {
        const auto it = mapping.find(track.person_id);
        const int stable = it != mapping.end() ? it->second : track.person_id;
        auto& out = merged[stable];
        out.person_id = stable;
        out.segments.insert(out.segments.end(), track.segments.begin(), track.segments.end());
        if (track.appearance && track.appearance_frames > 0) {
            if (!out.appearance) {
                out.appearance = FeatureVector{std::vector<double>(track.appearance->values.size(), 0.0)};
            }
            for (std::size_t k = 0; k < track.appearance->values.size(); ++k) {
                out.appearance->values[k] += track.appearance->values[k] * track.appearance_frames;
            }
            out.appearance_frames += track.appearance_frames;
        }
    }
    std::vector<PersonTrack> out;
    out.reserve(merged.size());
    for (auto& [_, track] : merged) {
        std::stable_sort(track.segments.begin(), track.segments.end(),
                         [](const TrackSegment& a, const TrackSegment& b) { return a.frame_index < b.frame_index; });
        track.segments.erase(std::unique(track.segments.begin(), track.segments.end(),
                                         [](const TrackSegment& a, const TrackSegment& b) {
                                             return a.frame_index == b.frame_index;
                                         }),
                             track.segments.end());
        if (track.appearance) {
            const double total = std::accumulate(track.appearance->values.begin(), track.appearance->values.end(), 0.0);
            if (total > 0.0) {
                for (auto& v : track.appearance->values) {
                    v /= total;
                }
            }
        }
        out.push_back(std::move(track));
    }
    return out;
}

IdMapping compose(const IdMapping& first, const IdMapping& second)
{
    IdMapping out;
    for (const auto& [raw, mid] : first) {
        const auto it = second.find(mid);
        out[raw] = it != second.end() ? it->second : mid;
    }
    return out;
}

IdentityResult resolve_identities(const std::vector<FrameRecord>& frames, const PipelineConfig& cfg, Exec exec)
{
    const auto raw = build_tracks(frames, cfg, exec);
    const auto short_term = short_term_unify(raw, cfg);
    const auto bridged = apply_mapping(raw, short_term);
    const auto long_term = long_term_reidentify(bridged, cfg);
    IdentityResult result;
    result.mapping = compose(short_term, long_term);
    result.tracks = apply_mapping(bridged, long_term);
    return result;
}

}  // namespace gest
