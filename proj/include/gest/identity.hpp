#pragma once

#include "gest/config.hpp"
#include "gest/exec.hpp"
#include "gest/types.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace gest {

struct TrackSegment {
    int frame_index = 0;
    BBox bbox;
    std::optional<double> mean_depth;

    friend bool operator==(const TrackSegment&, const TrackSegment&) = default;
};

/// Linearized HSV histogram, row-major over (hue, sat, val).
struct FeatureVector {
    std::vector<double> values;

    bool is_zero() const;
    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct PersonTrack {
    int person_id = 0;
    std::vector<TrackSegment> segments;  // sorted by frame, one per frame
    std::optional<FeatureVector> appearance;
    int appearance_frames = 0;  // frames that contributed a histogram

    int first_frame() const { return segments.front().frame_index; }
    int last_frame() const { return segments.back().frame_index; }
    bool coexists_with(const PersonTrack& other) const;
};

/// Raw tracker id -> stable person id. Total over every observed raw id.
using IdMapping = std::map<int, int>;

/// Bin index of one sample. Hue 360 wraps to 0; saturation and value of 1.0 land in the top bin.
int hsv_bin(const HsvSample& sample, const HsvBins& bins);

/// L1-normalized histogram. No samples gives the all-zero vector.
FeatureVector hsv_feature(std::span<const HsvSample> samples, const HsvBins& bins);

/// dot(a,b) / (|a||b|), 0 when either norm is 0. Length mismatch throws std::invalid_argument.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

/// One track per raw tracker id with its appearance set to the mean per-frame histogram.
std::vector<PersonTrack> build_tracks(const std::vector<FrameRecord>& frames, const PipelineConfig& cfg,
                                      Exec exec = Exec::parallel);

/// Bridges tracker dropouts: a track starting 1..short_term_max_gap-1 frames after another ends, with
/// IoU(last box, first box) > short_term_min_iou, continues that identity. Merges chain transitively.
IdMapping short_term_unify(const std::vector<PersonTrack>& tracks, const PipelineConfig& cfg);

/// Appearance re-identification scanning tracks by first appearance. Never merges tracks that share a frame.
IdMapping long_term_reidentify(const std::vector<PersonTrack>& tracks, const PipelineConfig& cfg);

/// Merges tracks that map to the same stable id. Appearance is the frame-weighted mean.
std::vector<PersonTrack> apply_mapping(const std::vector<PersonTrack>& tracks, const IdMapping& mapping);

/// second ∘ first. Ids missing from `second` map to themselves.
IdMapping compose(const IdMapping& first, const IdMapping& second);

struct IdentityResult {
    IdMapping mapping;
    std::vector<PersonTrack> tracks;
};

IdentityResult resolve_identities(const std::vector<FrameRecord>& frames, const PipelineConfig& cfg,
                                  Exec exec = Exec::parallel);

}  // namespace gest
