#include "gest/config.hpp"

#include "gest/hashing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

namespace gest {

namespace {

std::string_view trim(std::string_view s)
{
    const auto* ws = " \t\r\n";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

int parse_int(std::string_view key, std::string_view text)
{
    int value = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError(fmt::format("config key '{}': expected integer, got '{}'", key, text));
    }
    return value;
}

double parse_double(std::string_view key, std::string_view text)
{
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        throw ConfigError(fmt::format("config key '{}': expected number, got '{}'", key, text));
    }
    return value;
}

bool parse_bool(std::string_view key, std::string_view text)
{
    if (text == "true" || text == "1" || text == "yes") {
        return true;
    }
    if (text == "false" || text == "0" || text == "no") {
        return false;
    }
    throw ConfigError(fmt::format("config key '{}': expected boolean, got '{}'", key, text));
}

HsvBins parse_bins(std::string_view key, std::string_view text)
{
    HsvBins bins;
    const auto a = text.find('x');
    const auto b = a == std::string_view::npos ? a : text.find('x', a + 1);
    if (a == std::string_view::npos || b == std::string_view::npos) {
        throw ConfigError(fmt::format("config key '{}': expected HxSxV, got '{}'", key, text));
    }
    bins.hue = parse_int(key, text.substr(0, a));
    bins.sat = parse_int(key, text.substr(a + 1, b - a - 1));
    bins.val = parse_int(key, text.substr(b + 1));
    return bins;
}

struct Key {
    std::string name;
    std::function<std::string(const Settings&)> get;
    std::function<void(Settings&, std::string_view)> set;
};

template <typename T>
Key int_key(std::string name, T Settings::*section, int T::*field)
{
    return Key{name,
               [=](const Settings& s) { return fmt::format("{}", (s.*section).*field); },
               [=](Settings& s, std::string_view v) { (s.*section).*field = parse_int(name, v); }};
}

template <typename T>
Key double_key(std::string name, T Settings::*section, double T::*field)
{
    return Key{name,
               [=](const Settings& s) { return fmt::format("{}", (s.*section).*field); },
               [=](Settings& s, std::string_view v) { (s.*section).*field = parse_double(name, v); }};
}

template <typename T>
Key string_key(std::string name, T Settings::*section, std::string T::*field)
{
    return Key{name,
               [=](const Settings& s) { return (s.*section).*field; },
               [=](Settings& s, std::string_view v) { (s.*section).*field = std::string(v); }};
}

const std::vector<Key>& keys()
{
    using P = PipelineConfig;
    using C = CompletionConfig;
    constexpr auto pl = &Settings::pipeline;
    constexpr auto llm = &Settings::llm;
    static const std::vector<Key> table = {
        int_key("short_term_max_gap", pl, &P::short_term_max_gap),
        double_key("short_term_min_iou", pl, &P::short_term_min_iou),
        double_key("reid_similarity_threshold", pl, &P::reid_similarity_threshold),
        Key{"hsv_bins",
            [](const Settings& s) {
                const auto& b = s.pipeline.hsv_bins;
                return fmt::format("{}x{}x{}", b.hue, b.sat, b.val);
            },
            [](Settings& s, std::string_view v) { s.pipeline.hsv_bins = parse_bins("hsv_bins", v); }},
        int_key("max_pixel_samples", pl, &P::max_pixel_samples),
        double_key("action_min_confidence", pl, &P::action_min_confidence),
        int_key("actions_per_frame", pl, &P::actions_per_frame),
        Key{"top_k_scope",
            [](const Settings& s) {
                return std::string(s.pipeline.top_k_scope == TopKScope::frame ? "frame" : "person");
            },
            [](Settings& s, std::string_view v) {
                if (v == "frame") {
                    s.pipeline.top_k_scope = TopKScope::frame;
                } else if (v == "person") {
                    s.pipeline.top_k_scope = TopKScope::person;
                } else {
                    throw ConfigError(fmt::format("config key 'top_k_scope': expected frame|person, got '{}'", v));
                }
            }},
        int_key("vote_radius", pl, &P::vote_radius),
        int_key("vote_min_count", pl, &P::vote_min_count),
        double_key("bbox_enlarge_fraction", pl, &P::bbox_enlarge_fraction),
        double_key("object_min_iou", pl, &P::object_min_iou),
        double_key("depth_diff_threshold", pl, &P::depth_diff_threshold),
        double_key("object_min_presence", pl, &P::object_min_presence),
        int_key("event_unify_max_gap", pl, &P::event_unify_max_gap),
        double_key("spatial_ratio_threshold", pl, &P::spatial_ratio_threshold),
        double_key("spatial_min_overlap_fraction", pl, &P::spatial_min_overlap_fraction),
        int_key("same_time_tolerance", pl, &P::same_time_tolerance),
        int_key("next_max_gap", pl, &P::next_max_gap),
        Key{"reduce_next_edges",
            [](const Settings& s) { return std::string(s.pipeline.reduce_next_edges ? "true" : "false"); },
            [](Settings& s, std::string_view v) { s.pipeline.reduce_next_edges = parse_bool("reduce_next_edges", v); }},
        string_key("llm.endpoint_url", llm, &C::endpoint_url),
        string_key("llm.model", llm, &C::model_name),
        string_key("llm.api_key_env", llm, &C::api_key_env_name),
        double_key("llm.temperature", llm, &C::temperature),
        int_key("llm.max_output_tokens", llm, &C::max_output_tokens),
        int_key("llm.timeout_ms", llm, &C::timeout_ms),
        int_key("llm.retry_count", llm, &C::retry_count),
        int_key("llm.retry_base_delay_ms", llm, &C::retry_base_delay_ms),
        int_key("llm.max_concurrent_requests", llm, &C::max_concurrent_requests),
        int_key("llm.prompt_token_budget", llm, &C::prompt_token_budget),
        Key{"llm.mode",
            [](const Settings& s) {
                switch (s.llm.mode) {
                case LlmMode::live: return std::string("live");
                case LlmMode::record: return std::string("record");
                case LlmMode::replay: break;
                }
                return std::string("replay");
            },
            [](Settings& s, std::string_view v) {
                if (v == "live") {
                    s.llm.mode = LlmMode::live;
                } else if (v == "replay") {
                    s.llm.mode = LlmMode::replay;
                } else if (v == "record") {
                    s.llm.mode = LlmMode::record;
                } else {
                    throw ConfigError(fmt::format("config key 'llm.mode': expected live|replay|record, got '{}'", v));
                }
            }},
        string_key("llm.fixtures_dir", llm, &C::fixtures_dir),
    };
    return table;
}

void require(bool ok, std::string_view key, std::string_view what)
{
    if (!ok) {
        throw ConfigError(fmt::format("config key '{}': {}", key, what));
    }
}

bool is_fraction(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void validate(const PipelineConfig& c)
{
    require(c.short_term_max_gap >= 0, "short_term_max_gap", "must be >= 0");
    require(is_fraction(c.short_term_min_iou), "short_term_min_iou", "must be in [0,1]");
    require(is_fraction(c.reid_similarity_threshold), "reid_similarity_threshold", "must be in [0,1]");
    require(c.hsv_bins.hue >= 1 && c.hsv_bins.sat >= 1 && c.hsv_bins.val >= 1, "hsv_bins", "every bin count must be >= 1");
    require(c.max_pixel_samples >= 1, "max_pixel_samples", "must be >= 1");
    require(is_fraction(c.action_min_confidence), "action_min_confidence", "must be in [0,1]");
    require(c.actions_per_frame >= 1, "actions_per_frame", "must be >= 1");
    require(c.vote_radius >= 0, "vote_radius", "must be >= 0");
    require(c.vote_min_count >= 0, "vote_min_count", "must be >= 0");
    require(is_fraction(c.bbox_enlarge_fraction), "bbox_enlarge_fraction", "must be in [0,1]");
    require(is_fraction(c.object_min_iou), "object_min_iou", "must be in [0,1]");
    require(is_fraction(c.depth_diff_threshold), "depth_diff_threshold", "must be in [0,1]");
    require(is_fraction(c.object_min_presence), "object_min_presence", "must be in [0,1]");
    require(c.event_unify_max_gap >= 0, "event_unify_max_gap", "must be >= 0");
    require(c.spatial_ratio_threshold >= 0.0, "spatial_ratio_threshold", "must be >= 0");
    require(is_fraction(c.spatial_min_overlap_fraction), "spatial_min_overlap_fraction", "must be in [0,1]");
    require(c.same_time_tolerance >= 0, "same_time_tolerance", "must be >= 0");
    require(c.next_max_gap >= 0, "next_max_gap", "must be >= 0");
}

void validate(const CompletionConfig& c)
{
    require(!c.endpoint_url.empty(), "llm.endpoint_url", "must not be empty");
    require(c.temperature >= 0.0, "llm.temperature", "must be >= 0");
    require(c.max_output_tokens >= 1, "llm.max_output_tokens", "must be >= 1");
    require(c.timeout_ms >= 1, "llm.timeout_ms", "must be >= 1");
    require(c.retry_count >= 0, "llm.retry_count", "must be >= 0");
    require(c.retry_base_delay_ms >= 0, "llm.retry_base_delay_ms", "must be >= 0");
    require(c.max_concurrent_requests >= 1, "llm.max_concurrent_requests", "must be >= 1");
    require(c.prompt_token_budget >= 1, "llm.prompt_token_budget", "must be >= 1");
}

void apply_setting(Settings& settings, std::string_view key, std::string_view value)
{
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) {
        throw ConfigError(fmt::format("unknown config key '{}'", key));
    }
    it->set(settings, value);
}

void apply_override(Settings& settings, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos) {
        throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
    }
    apply_setting(settings, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

Settings parse_settings(std::string_view text)
{
    Settings settings;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(fmt::format("config line {}: expected 'key = value'", line_no));
        }
        try {
            apply_setting(settings, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("config line {}: {}", line_no, e.what()));
        }
    }
    validate(settings.pipeline);
    validate(settings.llm);
    return settings;
}

Settings load_settings(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_settings(buffer.str());
}

std::string to_canonical_string(const Settings& settings)
{
    std::string out;
    for (const auto& key : keys()) {
        out += fmt::format("{} = {}\n", key.name, key.get(settings));
    }
    return out;
}

std::string config_hash(const Settings& settings) { return sha256_hex(to_canonical_string(settings)); }

}  // namespace gest
