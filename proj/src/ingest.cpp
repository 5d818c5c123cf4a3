#include "gest/ingest.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <set>
#include <sstream>

namespace gest {

using nlohmann::json;

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(fmt::format("line {}: {}", line, what)), line_(line)
{
}

namespace {

// Raised inside record decoding, converted to ParseError with the line number by the caller.
struct FieldError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Decoder {
    bool strict;
    std::set<std::string>* unknown;

    void check_fields(const json& obj, std::initializer_list<const char*> allowed, std::string_view where) const
    {
        for (const auto& [key, _] : obj.items()) {
            const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
            if (known) {
                continue;
            }
            if (strict) {
                throw FieldError(fmt::format("unknown field '{}' in {}", key, where));
            }
            unknown->insert(fmt::format("{}.{}", where, key));
        }
    }

    static const json& require(const json& obj, const char* key)
    {
        const auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            throw FieldError(fmt::format("missing field '{}'", key));
        }
        return *it;
    }

    static double number(const json& v, const char* key)
    {
        if (!v.is_number()) {
            throw FieldError(fmt::format("field '{}' must be a number", key));
        }
        return v.get<double>();
    }

    static int integer(const json& v, const char* key)
    {
        if (!v.is_number_integer()) {
            throw FieldError(fmt::format("field '{}' must be an integer", key));
        }
        return v.get<int>();
    }

    static std::string string(const json& v, const char* key)
    {
        if (!v.is_string()) {
            throw FieldError(fmt::format("field '{}' must be a string", key));
        }
        return v.get<std::string>();
    }

    static std::optional<double> optional_number(const json& obj, const char* key)
    {
        const auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            return std::nullopt;
        }
        return number(*it, key);
    }

    static BBox bbox(const json& obj)
    {
        const auto& v = require(obj, "bbox");
        if (!v.is_array() || v.size() != 4) {
            throw FieldError("field 'bbox' must be [x1, y1, x2, y2]");
        }
        return BBox{number(v[0], "bbox"), number(v[1], "bbox"), number(v[2], "bbox"), number(v[3], "bbox")};
    }

    static const json& list(const json& obj, const char* key)
    {
        static const json empty = json::array();
        const auto it = obj.find(key);
        if (it == obj.end() || it->is_null()) {
            return empty;
        }
        if (!it->is_array()) {
            throw FieldError(fmt::format("field '{}' must be an array", key));
        }
        return *it;
    }

    VideoMeta meta(const json& obj) const
    {
        check_fields(obj, {"video_id", "fps", "width", "height", "scene_label"}, "meta");
        VideoMeta m;
        m.video_id = string(require(obj, "video_id"), "video_id");
        m.fps = number(require(obj, "fps"), "fps");
        m.width = integer(require(obj, "width"), "width");
        m.height = integer(require(obj, "height"), "height");
        if (const auto it = obj.find("scene_label"); it != obj.end() && !it->is_null()) {
            m.scene_label = string(*it, "scene_label");
        }
        return m;
    }

    FrameRecord frame(const json& obj) const
    {
        check_fields(obj, {"frame_index", "persons", "actions", "objects"}, "frame");
        FrameRecord f;
        f.frame_index = integer(require(obj, "frame_index"), "frame_index");
        if (f.frame_index < 0) {
            throw FieldError("field 'frame_index' must be non-negative");
        }
        for (const auto& p : list(obj, "persons")) {
            check_fields(p, {"track_id", "bbox", "mean_depth", "pixel_samples"}, "person");
            PersonDetection d;
            d.track_id = integer(require(p, "track_id"), "track_id");
            d.bbox = bbox(p);
            d.mean_depth = optional_number(p, "mean_depth");
            for (const auto& s : list(p, "pixel_samples")) {
                if (!s.is_array() || s.size() != 3) {
                    throw FieldError("pixel sample must be [h, s, v]");
                }
                d.pixel_samples.push_back(
                    {number(s[0], "pixel_samples"), number(s[1], "pixel_samples"), number(s[2], "pixel_samples")});
            }
            f.persons.push_back(std::move(d));
        }
        for (const auto& a : list(obj, "actions")) {
            check_fields(a, {"track_id", "label", "confidence", "bbox"}, "action");
            ActionDetection d;
            d.track_id = integer(require(a, "track_id"), "track_id");
            d.label = string(require(a, "label"), "label");
            d.confidence = number(require(a, "confidence"), "confidence");
            d.bbox = bbox(a);
            f.actions.push_back(std::move(d));
        }
        for (const auto& o : list(obj, "objects")) {
            check_fields(o, {"label", "bbox", "mean_depth", "source"}, "object");
            ObjectDetection d;
            d.label = string(require(o, "label"), "label");
            d.bbox = bbox(o);
            d.mean_depth = optional_number(o, "mean_depth");
            if (const auto it = o.find("source"); it != o.end() && !it->is_null()) {
                const auto src = string(*it, "source");
                if (src == "detector") {
                    d.source = ObjectSource::detector;
                } else if (src == "segmentation") {
                    d.source = ObjectSource::segmentation;
                } else {
                    throw FieldError(fmt::format("field 'source' must be detector|segmentation, got '{}'", src));
                }
            }
            f.objects.push_back(std::move(d));
        }
        return f;
    }
};

json bbox_json(const BBox& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

}  // namespace

ParsedVideo parse_video_record(std::istream& in, const ParseOptions& options)
{
    ParsedVideo out;
    std::set<std::string> unknown;
    const Decoder decoder{options.strict, &unknown};

    std::string line;
    std::size_t line_no = 0;
    bool have_meta = false;
    std::set<int> seen;
    int previous = -1;
    bool out_of_order = false;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json record;
        try {
            record = json::parse(line);
            if (!record.is_object()) {
                throw FieldError("record must be a JSON object");
            }
        } catch (const json::parse_error& e) {
            if (!have_meta || options.strict) {
                throw ParseError(line_no, fmt::format("malformed JSON: {}", e.what()));
            }
            out.warnings.push_back(fmt::format("line {}: skipped malformed JSON", line_no));
            continue;
        } catch (const FieldError& e) {
            if (!have_meta || options.strict) {
                throw ParseError(line_no, e.what());
            }
            out.warnings.push_back(fmt::format("line {}: skipped: {}", line_no, e.what()));
            continue;
        }

        if (!have_meta) {
            try {
                out.meta = decoder.meta(record);
            } catch (const FieldError& e) {
                throw ParseError(line_no, fmt::format("metadata record: {}", e.what()));
            } catch (const json::exception& e) {
                throw ParseError(line_no, fmt::format("metadata record: {}", e.what()));
            }
            have_meta = true;
            continue;
        }

        FrameRecord frame;
        try {
            frame = decoder.frame(record);
        } catch (const std::exception& e) {
            if (options.strict) {
                throw ParseError(line_no, e.what());
            }
            out.warnings.push_back(fmt::format("line {}: skipped: {}", line_no, e.what()));
            continue;
        }
        if (!seen.insert(frame.frame_index).second) {
            throw SchemaError(fmt::format("line {}: duplicate frame_index {}", line_no, frame.frame_index));
        }
        if (frame.frame_index < previous) {
            out_of_order = true;
        }
        previous = frame.frame_index;
        out.frames.push_back(std::move(frame));
    }

    if (!have_meta) {
        throw ParseError(line_no + 1, "missing metadata record");
    }
    if (out_of_order) {
        out.warnings.push_back("frame records were out of order; sorted by frame_index");
        std::sort(out.frames.begin(), out.frames.end(),
                  [](const FrameRecord& a, const FrameRecord& b) { return a.frame_index < b.frame_index; });
    }
    for (const auto& field : unknown) {
        out.warnings.push_back(fmt::format("ignored unknown field '{}'", field));
    }
    return out;
}

ParsedVideo parse_video_record(const std::string& text, const ParseOptions& options)
{
    std::istringstream in(text);
    return parse_video_record(in, options);
}

std::string serialize_video_record(const VideoMeta& meta, const std::vector<FrameRecord>& frames)
{
    std::string out;
    json m = {{"video_id", meta.video_id}, {"fps", meta.fps}, {"width", meta.width}, {"height", meta.height}};
    if (meta.scene_label) {
        m["scene_label"] = *meta.scene_label;
    }
    out += m.dump();
    out += '\n';

    for (const auto& f : frames) {
        json persons = json::array();
        for (const auto& p : f.persons) {
            json j = {{"track_id", p.track_id}, {"bbox", bbox_json(p.bbox)}};
            if (p.mean_depth) {
                j["mean_depth"] = *p.mean_depth;
            }
            if (!p.pixel_samples.empty()) {
                json samples = json::array();
                for (const auto& s : p.pixel_samples) {
                    samples.push_back(json::array({s.h, s.s, s.v}));
                }
                j["pixel_samples"] = std::move(samples);
            }
            persons.push_back(std::move(j));
        }
        json actions = json::array();
        for (const auto& a : f.actions) {
            actions.push_back(
                {{"track_id", a.track_id}, {"label", a.label}, {"confidence", a.confidence}, {"bbox", bbox_json(a.bbox)}});
        }
        json objects = json::array();
        for (const auto& o : f.objects) {
            json j = {{"label", o.label},
                      {"bbox", bbox_json(o.bbox)},
                      {"source", o.source == ObjectSource::detector ? "detector" : "segmentation"}};
            if (o.mean_depth) {
                j["mean_depth"] = *o.mean_depth;
            }
            objects.push_back(std::move(j));
        }
        json record = {{"frame_index", f.frame_index}, {"persons", std::move(persons)},
                       {"actions", std::move(actions)}, {"objects", std::move(objects)}};
        out += record.dump();
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// validation

bool ValidationReport::has_errors() const { return count(Severity::error) > 0; }

std::size_t ValidationReport::count(Severity severity) const
{
    return static_cast<std::size_t>(
        std::count_if(issues.begin(), issues.end(), [&](const ValidationIssue& i) { return i.severity == severity; }));
}

std::string ValidationReport::summary() const
{
    std::string out = fmt::format("{} error(s), {} warning(s)\n", count(Severity::error), count(Severity::warn));
    for (const auto& i : issues) {
        out += fmt::format("  [{}] frame {}: {}: {}\n", i.severity == Severity::error ? "error" : "warn",
                           i.frame_index, i.code, i.message);
    }
    return out;
}

namespace {

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

void check_bbox(const VideoMeta& meta, const BBox& b, int frame, std::string_view what, std::vector<ValidationIssue>& out)
{
    if (!b.well_formed()) {
        out.push_back({Severity::error, frame, "bbox_malformed",
                       fmt::format("{} bbox [{}, {}, {}, {}] is not ordered or has negative coordinates", what, b.x1,
                                   b.y1, b.x2, b.y2)});
        return;
    }
    if (b.x2 > meta.width || b.y2 > meta.height) {
        out.push_back({Severity::warn, frame, "bbox_out_of_frame",
                       fmt::format("{} bbox [{}, {}, {}, {}] exceeds frame {}x{}", what, b.x1, b.y1, b.x2, b.y2,
                                   meta.width, meta.height)});
    }
}

}  // namespace

ValidationReport validate(const VideoMeta& meta, const std::vector<FrameRecord>& frames, const PipelineConfig& cfg)
{
    ValidationReport report;
    auto& out = report.issues;

    if (!(meta.fps > 0.0) || meta.width <= 0 || meta.height <= 0) {
        out.push_back({Severity::error, -1, "meta_invalid",
                       fmt::format("fps, width and height must be positive (fps={}, {}x{})", meta.fps, meta.width,
                                   meta.height)});
    }

    int previous = -1;
    for (const auto& f : frames) {
        const int fi = f.frame_index;
        if (fi <= previous) {
            out.push_back({Severity::error, fi, "frame_order",
                           fmt::format("frame_index {} does not increase after {}", fi, previous)});
        }
        previous = std::max(previous, fi);

        std::set<int> tracks;
        for (const auto& p : f.persons) {
            if (!tracks.insert(p.track_id).second) {
                out.push_back({Severity::error, fi, "duplicate_track",
                               fmt::format("track_id {} appears twice in one frame", p.track_id)});
            }
            check_bbox(meta, p.bbox, fi, fmt::format("person {}", p.track_id), out);
            if (p.mean_depth && !in_unit(*p.mean_depth)) {
                out.push_back({Severity::error, fi, "depth_range",
                               fmt::format("person {} mean_depth {} outside [0,1]", p.track_id, *p.mean_depth)});
            }
            if (std::ssize(p.pixel_samples) > cfg.max_pixel_samples) {
                out.push_back({Severity::warn, fi, "too_many_samples",
                               fmt::format("person {} carries {} pixel samples (cap {})", p.track_id,
                                           p.pixel_samples.size(), cfg.max_pixel_samples)});
            }
            const auto bad = std::find_if(p.pixel_samples.begin(), p.pixel_samples.end(), [](const HsvSample& s) {
                return !(s.h >= 0.0 && s.h <= 360.0) || !in_unit(s.s) || !in_unit(s.v);
            });
            if (bad != p.pixel_samples.end()) {
                out.push_back({Severity::error, fi, "pixel_sample_range",
                               fmt::format("person {} pixel sample ({}, {}, {}) out of range", p.track_id, bad->h,
                                           bad->s, bad->v)});
            }
        }
        for (const auto& a : f.actions) {
            if (a.label.empty()) {
                out.push_back({Severity::error, fi, "empty_label", fmt::format("action of track {} has no label", a.track_id)});
            }
            if (!in_unit(a.confidence)) {
                out.push_back({Severity::error, fi, "confidence_range",
                               fmt::format("action '{}' confidence {} outside [0,1]", a.label, a.confidence)});
            }
            if (!tracks.contains(a.track_id)) {
                out.push_back({Severity::warn, fi, "orphan_action",
                               fmt::format("action '{}' references track_id {} with no person in this frame", a.label,
                                           a.track_id)});
            }
            check_bbox(meta, a.bbox, fi, fmt::format("action '{}'", a.label), out);
        }
        for (const auto& o : f.objects) {
            if (o.label.empty()) {
                out.push_back({Severity::error, fi, "empty_label", "object has no label"});
            }
            check_bbox(meta, o.bbox, fi, fmt::format("object '{}'", o.label), out);
            if (o.mean_depth && !in_unit(*o.mean_depth)) {
                out.push_back({Severity::error, fi, "depth_range",
                               fmt::format("object '{}' mean_depth {} outside [0,1]", o.label, *o.mean_depth)});
            }
        }
    }
    return report;
}

}  // namespace gest
