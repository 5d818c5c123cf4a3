#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gest {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HsvBins {
    int hue = 8;
    int sat = 4;
    int val = 4;

    int total() const { return hue * sat * val; }
    friend bool operator==(const HsvBins&, const HsvBins&) = default;
};

/// Whether the per-frame top-k action cap applies to the whole frame or to each person.
enum class TopKScope { frame, person };

/// Every numeric threshold of the graph-building pipeline.
struct PipelineConfig {
    // identity
    int short_term_max_gap = 10;
    double short_term_min_iou = 0.4;
    double reid_similarity_threshold = 0.85;
    HsvBins hsv_bins;
    int max_pixel_samples = 2048;

    // action filtering
    double action_min_confidence = 0.75;
    int actions_per_frame = 2;
    TopKScope top_k_scope = TopKScope::frame;
    int vote_radius = 5;
    int vote_min_count = 5;

    // events
    double bbox_enlarge_fraction = 0.10;
    double object_min_iou = 0.05;
    double depth_diff_threshold = 0.10;
    double object_min_presence = 0.10;
    int event_unify_max_gap = 30;

    // relations
    double spatial_ratio_threshold = 0.5;
    double spatial_min_overlap_fraction = 0.75;
    int same_time_tolerance = 10;
    int next_max_gap = 150;
    bool reduce_next_edges = false;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

enum class LlmMode { live, replay, record };

struct CompletionConfig {
    std::string endpoint_url = "http://127.0.0.1:8080/v1/chat/completions";
    std::string model_name = "gpt-4o";
    std::string api_key_env_name = "GEST_LLM_API_KEY";
    double temperature = 0.7;
    int max_output_tokens = 1024;
    int timeout_ms = 60000;
    int retry_count = 3;
    int retry_base_delay_ms = 500;
    int max_concurrent_requests = 4;
    int prompt_token_budget = 8000;
    LlmMode mode = LlmMode::replay;
    std::string fixtures_dir = "fixtures";

    friend bool operator==(const CompletionConfig&, const CompletionConfig&) = default;
};

struct Settings {
    PipelineConfig pipeline;
    CompletionConfig llm;

    friend bool operator==(const Settings&, const Settings&) = default;
};

/// Throws ConfigError naming the first offending key.
void validate(const PipelineConfig& cfg);
void validate(const CompletionConfig& cfg);

/// Applies one `key = value` assignment. Unknown keys and unparsable values throw.
void apply_setting(Settings& settings, std::string_view key, std::string_view value);

/// Accepts "key=value" as given on a command line.
void apply_override(Settings& settings, std::string_view assignment);

/// Parses the line-oriented `key = value` format; `#` starts a comment.
Settings parse_settings(std::string_view text);
Settings load_settings(const std::filesystem::path& path);

/// Every effective key in a fixed order, one `key = value` per line. Re-parses to the same Settings.
std::string to_canonical_string(const Settings& settings);

/// SHA-256 of the canonical form, hex encoded.
std::string config_hash(const Settings& settings);

}  // namespace gest
