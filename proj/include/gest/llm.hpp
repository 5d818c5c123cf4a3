#pragma once

#include "gest/config.hpp"
#include "gest/protolang.hpp"

#include <cstdint>
#include <filesystem>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gest {

struct PromptBundle {
    std::string system_instructions;
    std::string user_content;
    std::vector<std::string> attachments;  // image references, jury prompts only

    friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

class PromptError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Rough token count used for the prompt budget: one token per four bytes, rounded up.
int estimate_tokens(std::string_view text);

/// Instructions to naturalize the proto-language, pick at most one object per menu (or a new one, or none),
/// and rename or drop actions that do not fit. Throws PromptError for an empty document or one over budget.
PromptBundle build_description_prompt(const ProtoDocument& proto, int token_budget = 8000);

/// The fixed scene-classification instruction sent with a single frame.
std::string build_scene_prompt();

inline constexpr std::size_t kJuryFrameCount = 10;

struct JuryPrompt {
    PromptBundle bundle;
    std::vector<std::size_t> permutation;  // permutation[slot] = original candidate index shown under label slot
    std::vector<std::string> labels;       // "A", "B", ...
};

/// Seeded Fisher-Yates over 0..n-1, identical on every platform for a given seed.
std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed);

/// Ranking prompt over anonymized, shuffled candidates. Requires exactly 10 frame references and
/// 2..26 candidates (std::invalid_argument otherwise).
JuryPrompt build_jury_prompt(const std::vector<std::string>& frame_refs, const std::vector<std::string>& candidates,
                             std::uint64_t seed);

struct JuryVerdict {
    std::size_t candidate_index = 0;  // original index, de-permuted
    int rank = 0;
    int score = 0;

    friend bool operator==(const JuryVerdict&, const JuryVerdict&) = default;
};

/// Reads lines of the form "<label>: rank <r>, score <s>". Unknown labels throw PromptError.
/// Output sorted by rank.
std::vector<JuryVerdict> parse_jury_response(std::string_view text, const JuryPrompt& prompt);

// ---------------------------------------------------------------------------
// completion

class LlmError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TimeoutError : public LlmError {
public:
    using LlmError::LlmError;
};

/// Connection refused, reset, DNS failure.
class TransportError : public LlmError {
public:
    using LlmError::LlmError;
};

class HttpStatusError : public LlmError {
public:
    HttpStatusError(int status, const std::string& what) : LlmError(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_;
};

class MissingCredentialError : public LlmError {
public:
    using LlmError::LlmError;
};

class ReplayMissError : public LlmError {
public:
    using LlmError::LlmError;
};

class MalformedResponseError : public LlmError {
public:
    using LlmError::LlmError;
};

/// Chat-completions request body. Never contains credentials.
std::string request_body(const PromptBundle& bundle, const CompletionConfig& cfg);

/// Content hash keying replay fixtures: SHA-256 of the request body.
std::string request_key(const PromptBundle& bundle, const CompletionConfig& cfg);

std::filesystem::path fixture_path(const PromptBundle& bundle, const CompletionConfig& cfg);

/// Writes a replay fixture for `bundle` holding `response`.
void write_fixture(const PromptBundle& bundle, const CompletionConfig& cfg, const std::string& response);

/// Status codes worth retrying: 408, 429, 500, 502, 503, 504.
bool is_transient_status(int status);

/// Completion client. Live mode posts to the endpoint with retries and exponential backoff; replay
/// mode reads the content-hash fixture; record mode does a live call and stores the fixture.
/// At most max_concurrent_requests calls are in flight per client.
class LlmClient {
public:
    explicit LlmClient(CompletionConfig cfg);
    LlmClient(const LlmClient&) = delete;
    LlmClient& operator=(const LlmClient&) = delete;

    std::string complete(const PromptBundle& bundle);
    const CompletionConfig& config() const { return cfg_; }

private:
    std::string complete_live(const PromptBundle& bundle);

    CompletionConfig cfg_;
    std::counting_semaphore<1024> slots_;
};

/// One-shot convenience over LlmClient.
std::string complete(const PromptBundle& bundle, const CompletionConfig& cfg);

}  // namespace gest
