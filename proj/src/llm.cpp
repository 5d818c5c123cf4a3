#include "gest/llm.hpp"

#include "gest/hashing.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <thread>

namespace gest {

using nlohmann::json;

int estimate_tokens(std::string_view text) { return static_cast<int>((text.size() + 3) / 4); }

namespace {

constexpr std::string_view kDescriptionInstructions =
    "You will receive a proto-language description of a video: short, mechanical statements generated from a graph "
    "of events detected in the video. Each statement names a person by number, the action they perform, and when it "
    "happens in seconds. Statements may carry temporal and spatial remarks (at the same time as, meanwhile, after, "
    "before, close to). The first line may name the scene.\n"
    "\n"
    "Rewrite this material as one rich, coherent and natural description of the video.\n"
    "\n"
    "Rules:\n"
    "1. Keep every person distinct and do not invent persons that are not mentioned.\n"
    "2. Some statements end with a list of candidate objects written as \"possibly involving: <a | b | c>\". These "
    "lists are over-complete. For each list, choose at most one object, the one most probable in the given context. "
    "You have the power to pick a new object that is not present in the list or not pick an object at all.\n"
    "3. You may change the name of an action or delete an action and its associated entities entirely if it does "
    "not fit the context.\n"
    "4. Use the scene, when given, to ground actions and objects, but do not describe details that the statements "
    "do not support.\n"
    "5. Preserve the temporal order of events. Do not mention seconds, frame numbers or person numbers; refer to "
    "people naturally (for example \"a person\", \"another person\").\n"
    "6. Answer with the description only, as plain prose.";

constexpr std::string_view kSceneInstruction =
    "In what scene does the action take place? Simply name the scene with no further explanations. Use very few "
    "words, just like a classification task, e.g., classroom, park, football field, mountain trail, living room, "
    "street.";

constexpr std::string_view kJuryInstructions =
    "You are an expert judge of video descriptions. You receive 10 frames sampled uniformly from one video and a set "
    "of candidate descriptions of that video, each under an anonymous label. Rank all candidates from best to worst "
    "based on richness and factual correctness with respect to the frames. Rank 1 is the best and every rank is used "
    "exactly once. Also give each candidate a score between 1 and 10, where 10 is best.\n"
    "\n"
    "Answer with exactly one line per candidate, in this format and nothing else:\n"
    "<label>: rank <rank>, score <score>";

std::string slot_label(std::size_t slot) { return std::string(1, static_cast<char>('A' + slot)); }

}  // namespace

PromptBundle build_description_prompt(const ProtoDocument& proto, int token_budget)
{
    if (proto.statement_count() == 0) {
        throw PromptError("proto-language document has no statements to describe");
    }
    PromptBundle bundle;
    bundle.system_instructions = std::string(kDescriptionInstructions);
    bundle.user_content = proto.text();
    const int tokens = estimate_tokens(bundle.system_instructions) + estimate_tokens(bundle.user_content);
    if (tokens > token_budget) {
        throw PromptError(fmt::format("description prompt needs ~{} tokens, budget is {}", tokens, token_budget));
    }
    return bundle;
}

std::string build_scene_prompt() { return std::string(kSceneInstruction); }

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed)
{
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) {
        perm[i] = i;
    }
    std::mt19937_64 rng(seed);
    const auto below = [&](std::uint64_t bound) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t x = 0;
        do {
            x = rng();
        } while (x >= limit);
        return x % bound;
    };
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(below(i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

JuryPrompt build_jury_prompt(const std::vector<std::string>& frame_refs, const std::vector<std::string>& candidates,
                             std::uint64_t seed)
{
    if (frame_refs.size() != kJuryFrameCount) {
        throw std::invalid_argument(
            fmt::format("jury prompt needs exactly {} frames, got {}", kJuryFrameCount, frame_refs.size()));
    }
    if (candidates.size() < 2 || candidates.size() > 26) {
        throw std::invalid_argument(fmt::format("jury prompt needs 2..26 candidates, got {}", candidates.size()));
    }
    JuryPrompt out;
    out.permutation = seeded_permutation(candidates.size(), seed);
    out.bundle.system_instructions = std::string(kJuryInstructions);
    out.bundle.attachments = frame_refs;
    std::string user = fmt::format("There are {} candidate descriptions.\n", candidates.size());
    for (std::size_t slot = 0; slot < candidates.size(); ++slot) {
        out.labels.push_back(slot_label(slot));
        user += fmt::format("\nCandidate {}:\n{}\n", out.labels.back(), candidates[out.permutation[slot]]);
    }
    out.bundle.user_content = std::move(user);
    return out;
}

std::vector<JuryVerdict> parse_jury_response(std::string_view text, const JuryPrompt& prompt)
{
    static const std::regex line_re(R"(^\s*(?:candidate\s+)?([A-Za-z])\s*[:\-]\s*rank\s*(\d+)\s*,\s*score\s*(\d+))",
                                    std::regex::icase);
    std::vector<JuryVerdict> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::smatch m;
        if (!std::regex_search(line, m, line_re)) {
            continue;
        }
        const char label = static_cast<char>(std::toupper(static_cast<unsigned char>(m[1].str()[0])));
        const auto slot = static_cast<std::size_t>(label - 'A');
        if (slot >= prompt.permutation.size()) {
            throw PromptError(fmt::format("jury response names unknown candidate '{}'", label));
        }
        out.push_back({prompt.permutation[slot], std::stoi(m[2].str()), std::stoi(m[3].str())});
    }
    std::stable_sort(out.begin(), out.end(), [](const JuryVerdict& a, const JuryVerdict& b) { return a.rank < b.rank; });
    return out;
}

// ---------------------------------------------------------------------------
// completion

std::string request_body(const PromptBundle& bundle, const CompletionConfig& cfg)
{
    json user_content;
    if (bundle.attachments.empty()) {
        user_content = bundle.user_content;
    } else {
        user_content = json::array();
        user_content.push_back({{"type", "text"}, {"text", bundle.user_content}});
        for (const auto& ref : bundle.attachments) {
            user_content.push_back({{"type", "image_url"}, {"image_url", {{"url", ref}}}});
        }
    }
    const json body = {
        {"model", cfg.model_name},
        {"temperature", cfg.temperature},
        {"max_tokens", cfg.max_output_tokens},
        {"messages", json::array({{{"role", "system"}, {"content", bundle.system_instructions}},
                                  {{"role", "user"}, {"content", std::move(user_content)}}})},
    };
    return body.dump();
}

std::string request_key(const PromptBundle& bundle, const CompletionConfig& cfg)
{
    return sha256_hex(request_body(bundle, cfg));
}

std::filesystem::path fixture_path(const PromptBundle& bundle, const CompletionConfig& cfg)
{
    return std::filesystem::path(cfg.fixtures_dir) / (request_key(bundle, cfg) + ".json");
}

void write_fixture(const PromptBundle& bundle, const CompletionConfig& cfg, const std::string& response)
{
    const auto path = fixture_path(bundle, cfg);
    std::filesystem::create_directories(path.parent_path());
    const json doc = {{"key", request_key(bundle, cfg)},
                      {"request", json::parse(request_body(bundle, cfg))},
                      {"response", response}};
    std::ofstream out(path);
    if (!out) {
        throw LlmError(fmt::format("cannot write replay fixture '{}'", path.string()));
    }
    out << doc.dump(1) << "\n";
}

bool is_transient_status(int status)
{
    return status == 408 || status == 429 || status == 500 || status == 502 || status == 503 || status == 504;
}

namespace {

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_url(const std::string& url)
{
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw LlmError(fmt::format("endpoint URL '{}' has no scheme", url));
    }
    const auto slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, slash), url.substr(slash)};
}

std::string read_fixture(const std::filesystem::path& path)
{
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return json::parse(buffer.str()).at("response").get<std::string>();
    } catch (const json::exception& e) {
        throw ReplayMissError(fmt::format("replay fixture '{}' is malformed: {}", path.string(), e.what()));
    }
}

std::string extract_content(const std::string& body)
{
    try {
        const auto doc = json::parse(body);
        return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw MalformedResponseError(fmt::format("completion response lacks choices[0].message.content: {}", e.what()));
    }
}

}  // namespace

LlmClient::LlmClient(CompletionConfig cfg)
    : cfg_(std::move(cfg)), slots_(std::clamp(cfg_.max_concurrent_requests, 1, 1024))
{
    validate(cfg_);
}

std::string LlmClient::complete(const PromptBundle& bundle)
{
    if (cfg_.mode == LlmMode::replay) {
        const auto path = fixture_path(bundle, cfg_);
        if (!std::filesystem::exists(path)) {
            throw ReplayMissError(fmt::format("no replay fixture for request {} in '{}'", request_key(bundle, cfg_),
                                              cfg_.fixtures_dir));
        }
        return read_fixture(path);
    }

    slots_.acquire();
    struct Release {
        std::counting_semaphore<1024>& s;
        ~Release() { s.release(); }
    } release{slots_};

    auto text = complete_live(bundle);
    if (cfg_.mode == LlmMode::record) {
        write_fixture(bundle, cfg_, text);
    }
    return text;
}

std::string LlmClient::complete_live(const PromptBundle& bundle)
{
    const char* key = std::getenv(cfg_.api_key_env_name.c_str());
    if (key == nullptr || *key == '\0') {
        throw MissingCredentialError(
            fmt::format("environment variable '{}' with the LLM API key is not set", cfg_.api_key_env_name));
    }
    const auto endpoint = split_url(cfg_.endpoint_url);
    const auto body = request_body(bundle, cfg_);
    const auto timeout = std::chrono::milliseconds(cfg_.timeout_ms);

    for (int attempt = 0;; ++attempt) {
        httplib::Client client(endpoint.origin);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);
        const httplib::Headers headers = {{"Authorization", std::string("Bearer ") + key}};

        const auto started = std::chrono::steady_clock::now();
        const auto result = client.Post(endpoint.path, headers, body, "application/json");
        const auto elapsed = std::chrono::steady_clock::now() - started;
        const bool last = attempt >= cfg_.retry_count;

        if (result) {
            const int status = result->status;
            if (status >= 200 && status < 300) {
                return extract_content(result->body);
            }
            const auto message = fmt::format("LLM endpoint returned HTTP {}", status);
            if (!is_transient_status(status) || last) {
                throw HttpStatusError(status, message);
            }
        } else {
            const auto err = result.error();
            const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                   (err == httplib::Error::Read && elapsed >= timeout * 9 / 10);
            if (last) {
                if (timed_out) {
                    throw TimeoutError(fmt::format("LLM request timed out after {} ms", cfg_.timeout_ms));
                }
                throw TransportError(fmt::format("LLM request failed: {}", httplib::to_string(err)));
            }
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(cfg_.retry_base_delay_ms) * (1LL << std::min(attempt, 20)));
    }
}

std::string complete(const PromptBundle& bundle, const CompletionConfig& cfg)
{
    LlmClient client(cfg);
    return client.complete(bundle);
}

}  // namespace gest
