#pragma once

#include "gest/exec.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace gest {

using Tokens = std::vector<std::string>;

/// Lowercases, turns every ASCII punctuation character except the apostrophe into a space, splits on whitespace.
Tokens tokenize(std::string_view text);

/// Sentence BLEU with n = 1..4, uniform weights, brevity penalty against the closest reference length
/// (shorter wins ties), multi-reference clipping by the maximum reference count. Higher orders with no
/// match are smoothed to 1 / (candidate n-grams + 1). Empty candidate or no unigram match gives 0.
double bleu4(const Tokens& candidate, const std::vector<Tokens>& references);

struct RougeL {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// LCS-based precision, recall and F1 (beta = 1). Empty inputs give zeros.
RougeL rouge_l(const Tokens& candidate, const Tokens& reference);

/// Maximum F1 over references.
RougeL rouge_l(const Tokens& candidate, const std::vector<Tokens>& references);

struct EvalPair {
    std::string video_id;
    std::string candidate;
    std::vector<std::string> references;  // non-empty
};

struct VideoScores {
    std::string video_id;
    std::string group;
    double bleu4 = 0.0;
    RougeL rouge;
};

struct MetricMeans {
    std::size_t count = 0;
    double bleu4 = 0.0;
    double rouge_l_precision = 0.0;
    double rouge_l_recall = 0.0;
    double rouge_l_f1 = 0.0;
};

struct EvalReport {
    std::vector<VideoScores> videos;      // sorted by video id
    std::map<std::string, MetricMeans> groups;
    MetricMeans overall;

    std::string to_json() const;
    std::string to_table() const;  // tab separated, one row per video then group and overall means
};

/// Scores every pair and averages per group and overall. `grouping` maps video id to a dataset key;
/// unmapped videos fall in "all".
EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs, const std::map<std::string, std::string>& grouping = {},
                           Exec exec = Exec::parallel);

}  // namespace gest
