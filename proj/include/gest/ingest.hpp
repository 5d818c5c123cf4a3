#pragma once

#include "gest/config.hpp"
#include "gest/types.hpp"

#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gest {

/// A malformed line. `line()` is 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Well-formed records that break stream-level rules (duplicate frame index).
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParseOptions {
    /// Strict: malformed frame lines and unknown fields throw. Lenient: they are skipped or ignored with a warning.
    bool strict = false;
};

struct ParsedVideo {
    VideoMeta meta;
    std::vector<FrameRecord> frames;
    std::vector<std::string> warnings;
};

/// Reads one metadata line followed by newline-delimited frame records. Frames come back sorted by index.
ParsedVideo parse_video_record(std::istream& in, const ParseOptions& options = {});
ParsedVideo parse_video_record(const std::string& text, const ParseOptions& options = {});

/// Inverse of parse_video_record on the documented schema.
std::string serialize_video_record(const VideoMeta& meta, const std::vector<FrameRecord>& frames);

enum class Severity { warn, error };

struct ValidationIssue {
    Severity severity = Severity::warn;
    int frame_index = -1;  // -1 for video-level issues
    std::string code;
    std::string message;

    friend bool operator==(const ValidationIssue&, const ValidationIssue&) = default;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool empty() const { return issues.empty(); }
    bool has_errors() const;
    std::size_t count(Severity severity) const;
    std::string summary() const;

    friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Pure consistency check. Issue codes: orphan_action, confidence_range, bbox_malformed,
/// bbox_out_of_frame, depth_range, pixel_sample_range, empty_label, duplicate_track,
/// frame_order, meta_invalid, too_many_samples.
ValidationReport validate(const VideoMeta& meta, const std::vector<FrameRecord>& frames, const PipelineConfig& cfg);

}  // namespace gest
