#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "bar/domain.hpp"

namespace bar {

// ============================================================================
// Textual plan metrics: positional accuracy, bigram F1, step edit distance.
// All three compare whole steps (verb, item, quantity, tool) and expect
// normalized plans.
// ============================================================================

struct MetricResult {
    double accuracy{0.0};      // percentage [0, 100]
    double f1{0.0};            // percentage [0, 100]
    int edit_distance{0};
};

/// Share of positions where the generated step equals the ground-truth step
/// at the same index, over the longer plan's length. Two empty plans match
/// vacuously.
inline double accuracy(const Plan& gen, const Plan& gt) {
    if (gen.empty() && gt.empty()) return 100.0;
    size_t matches = 0;
    for (size_t i = 0; i < std::min(gen.size(), gt.size()); ++i)
        if (gen[i] == gt[i]) ++matches;
    return 100.0 * static_cast<double>(matches) / static_cast<double>(std::max(gen.size(), gt.size()));
}

/// Bigram F1: a step scores when the (previous, step) pair it forms appears
/// in the ground truth. A START sentinel supplies the first step's pair, so
/// F1 = 100 exactly when the bigram multisets agree.
inline double f1(const Plan& gen, const Plan& gt) {
    if (gen.empty() && gt.empty()) return 100.0;
    if (gen.empty() || gt.empty()) return 0.0;

    auto bigrams = [](const Plan& p) {
        std::map<std::pair<std::string, std::string>, int> bag;
        std::string prev = "<START>";
        for (const auto& s : p) {
            std::string cur = render_step(s);
            ++bag[{prev, cur}];
            prev = cur;
        }
        return bag;
    };
    auto a = bigrams(gen), b = bigrams(gt);
    int matched = 0;
    for (const auto& [bg, n] : a) {
        auto it = b.find(bg);
        if (it != b.end()) matched += std::min(n, it->second);
    }
    double precision = static_cast<double>(matched) / static_cast<double>(gen.size());
    double recall = static_cast<double>(matched) / static_cast<double>(gt.size());
    if (precision + recall == 0.0) return 0.0;
    return 200.0 * precision * recall / (precision + recall);
}

/// Levenshtein distance over whole-step tokens with unit replace/insert/
/// delete costs.
inline int edit_distance(const Plan& gen, const Plan& gt) {
    const size_t n = gen.size(), m = gt.size();
    std::vector<int> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (gen[i - 1] == gt[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

inline MetricResult score_plan(const Plan& gen, const Plan& gt) {
    return {accuracy(gen, gt), f1(gen, gt), edit_distance(gen, gt)};
}

// ============================================================================
// Aggregation
// ============================================================================

struct TaggedResult {
    std::string task_id;
    std::string group;
    int plan_len{0}; // ground-truth length, the per-length bucket key
    MetricResult metrics;
};

struct GroupMeans {
    double accuracy{0.0};
    double f1{0.0};
    double edit_distance{0.0};
    int count{0};
};

/// Arithmetic means per group and per ground-truth plan length.
struct Aggregate {
    std::map<std::string, GroupMeans> by_group;
    std::map<int, GroupMeans> by_length;
    GroupMeans overall;
};

inline Aggregate aggregate(const std::vector<TaggedResult>& results) {
    Aggregate agg;
    auto fold = [](GroupMeans& g, const MetricResult& m) {
        g.accuracy += m.accuracy;
        g.f1 += m.f1;
        g.edit_distance += m.edit_distance;
        ++g.count;
    };
    for (const auto& r : results) {
        fold(agg.by_group[r.group], r.metrics);
        fold(agg.by_length[r.plan_len], r.metrics);
        fold(agg.overall, r.metrics);
    }
    auto finish = [](GroupMeans& g) {
        if (g.count == 0) return;
        g.accuracy /= g.count;
        g.f1 /= g.count;
        g.edit_distance /= g.count;
    };
    for (auto& [_, g] : agg.by_group) finish(g);
    for (auto& [_, g] : agg.by_length) finish(g);
    finish(agg.overall);
    return agg;
}

} // namespace bar
