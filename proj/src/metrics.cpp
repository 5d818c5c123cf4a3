#include "gest/metrics.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace gest {

Tokens tokenize(std::string_view text)
{
    Tokens out;
    std::string current;
    for (const char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        const bool split = std::isspace(c) || (c < 0x80 && std::ispunct(c) && c != '\'');
        if (split) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        current.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, int>;

NgramCounts ngrams(const Tokens& tokens, std::size_t n)
{
    NgramCounts counts;
    if (tokens.size() < n) {
        return counts;
    }
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b)
{
    std::vector<std::size_t> prev(b.size() + 1, 0);
    std::vector<std::size_t> cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

double bleu4(const Tokens& candidate, const std::vector<Tokens>& references)
{
    if (candidate.empty() || references.empty()) {
        return 0.0;
    }
    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cand = ngrams(candidate, n);
        NgramCounts max_ref;
        for (const auto& ref : references) {
            for (const auto& [gram, count] : ngrams(ref, n)) {
                auto& slot = max_ref[gram];
                slot = std::max(slot, count);
            }
        }
        long matched = 0;
        long total = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            if (const auto it = max_ref.find(gram); it != max_ref.end()) {
                matched += std::min(count, it->second);
            }
        }
        double precision = 0.0;
        if (n == 1) {
            if (matched == 0) {
                return 0.0;
            }
            precision = static_cast<double>(matched) / static_cast<double>(total);
        } else if (matched == 0) {
            precision = 1.0 / static_cast<double>(total + 1);
        } else {
            precision = static_cast<double>(matched) / static_cast<double>(total);
        }
        log_sum += std::log(precision);
    }

    const auto c = static_cast<long>(candidate.size());
    long r = 0;
    long best = std::numeric_limits<long>::max();
    for (const auto& ref : references) {
        const auto len = static_cast<long>(ref.size());
        const long diff = std::labs(len - c);
        if (diff < best || (diff == best && len < r)) {
            best = diff;
            r = len;
        }
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return std::clamp(bp * std::exp(log_sum / 4.0), 0.0, 1.0);
}

RougeL rouge_l(const Tokens& candidate, const Tokens& reference)
{
    if (candidate.empty() || reference.empty()) {
        return {};
    }
    const auto lcs = static_cast<double>(lcs_length(candidate, reference));
    RougeL out;
    out.precision = lcs / static_cast<double>(candidate.size());
    out.recall = lcs / static_cast<double>(reference.size());
    if (out.precision + out.recall > 0.0) {
        out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
    }
    return out;
}

RougeL rouge_l(const Tokens& candidate, const std::vector<Tokens>& references)
{
    RougeL best;
    bool first = true;
    for (const auto& ref : references) {
        const auto score = rouge_l(candidate, ref);
        if (first || score.f1 > best.f1) {
            best = score;
            first = false;
        }
    }
    return best;
}

namespace {

void accumulate(MetricMeans& m, const VideoScores& v)
{
    ++m.count;
    m.bleu4 += v.bleu4;
    m.rouge_l_precision += v.rouge.precision;
    m.rouge_l_recall += v.rouge.recall;
    m.rouge_l_f1 += v.rouge.f1;
}

void finish(MetricMeans& m)
{
    if (m.count == 0) {
        return;
    }
    const auto n = static_cast<double>(m.count);
    m.bleu4 /= n;
    m.rouge_l_precision /= n;
    m.rouge_l_recall /= n;
    m.rouge_l_f1 /= n;
}

nlohmann::json means_json(const MetricMeans& m)
{
    return {{"count", m.count},
            {"bleu4", m.bleu4},
            {"rouge_l_precision", m.rouge_l_precision},
            {"rouge_l_recall", m.rouge_l_recall},
            {"rouge_l_f1", m.rouge_l_f1}};
}

}  // namespace

EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs, const std::map<std::string, std::string>& grouping,
                           Exec exec)
{
    EvalReport report;
    report.videos.resize(pairs.size());
    const auto n = static_cast<std::ptrdiff_t>(pairs.size());
    const auto score = [&](std::ptrdiff_t i) {
        const auto& pair = pairs[static_cast<std::size_t>(i)];
        auto& out = report.videos[static_cast<std::size_t>(i)];
        const auto cand = tokenize(pair.candidate);
        std::vector<Tokens> refs;
        refs.reserve(pair.references.size());
        for (const auto& r : pair.references) {
            refs.push_back(tokenize(r));
        }
        out.video_id = pair.video_id;
        const auto g = grouping.find(pair.video_id);
        out.group = g != grouping.end() ? g->second : "all";
        out.bleu4 = bleu4(cand, refs);
        out.rouge = rouge_l(cand, refs);
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            score(i);
        }
    } else {
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            score(i);
        }
    }

    std::stable_sort(report.videos.begin(), report.videos.end(),
                     [](const VideoScores& a, const VideoScores& b) { return a.video_id < b.video_id; });
    for (const auto& v : report.videos) {
        accumulate(report.groups[v.group], v);
        accumulate(report.overall, v);
    }
    for (auto& [_, m] : report.groups) {
        finish(m);
    }
    finish(report.overall);
    return report;
}

std::string EvalReport::to_json() const
{
    nlohmann::json videos_json = nlohmann::json::array();
    for (const auto& v : videos) {
        videos_json.push_back({{"video_id", v.video_id},
                               {"group", v.group},
                               {"bleu4", v.bleu4},
                               {"rouge_l_precision", v.rouge.precision},
                               {"rouge_l_recall", v.rouge.recall},
                               {"rouge_l_f1", v.rouge.f1}});
    }
    nlohmann::json groups_json = nlohmann::json::object();
    for (const auto& [name, m] : groups) {
        groups_json[name] = means_json(m);
    }
    const nlohmann::json doc = {
        {"videos", std::move(videos_json)}, {"groups", std::move(groups_json)}, {"overall", means_json(overall)}};
    return doc.dump(1) + "\n";
}

std::string EvalReport::to_table() const
{
    std::string out = "video_id\tgroup\tbleu4\trouge_l_p\trouge_l_r\trouge_l_f1\n";
    for (const auto& v : videos) {
        out += fmt::format("{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\n", v.video_id, v.group, v.bleu4, v.rouge.precision,
                           v.rouge.recall, v.rouge.f1);
    }
    for (const auto& [name, m] : groups) {
        out += fmt::format("mean:{}\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\n", name, m.count, m.bleu4, m.rouge_l_precision,
                           m.rouge_l_recall, m.rouge_l_f1);
    }
    out += fmt::format("mean:overall\t{}\t{:.6f}\t{:.6f}\t{:.6f}\t{:.6f}\n", overall.count, overall.bleu4,
                       overall.rouge_l_precision, overall.rouge_l_recall, overall.rouge_l_f1);
    return out;
}

}  // namespace gest
