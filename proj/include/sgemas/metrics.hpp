#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "sgemas/errors.hpp"

namespace sgemas {

struct ScoredItem {
    double score = 0.0;
    bool label = false;  // true = positive (anomalous)
};

// AUC as the Mann-Whitney statistic P(score_pos > score_neg) + 1/2 P(tie),
// computed from average ranks. Rank sums are kept as integers (doubled, so
// tie-averaged half ranks stay exact); the single final division makes the
// result bit-identical to brute-force pair counting.
inline double roc_auc(const std::vector<ScoredItem>& items) {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return items[a].score < items[b].score;
    });

    std::int64_t n_pos = 0;
    for (const ScoredItem& it : items) n_pos += it.label ? 1 : 0;
    const std::int64_t n_neg = static_cast<std::int64_t>(items.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw MetricError("AUC undefined: need at least one positive and one negative label");

    // Twice the rank sum of positives, with ties sharing the average rank.
    std::int64_t twice_rank_sum_pos = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && items[order[j]].score == items[order[i]].score) ++j;
        // Ranks are 1-based: group spans ranks [i+1, j]; doubled average = i+1+j.
        const std::int64_t twice_rank = static_cast<std::int64_t>(i) + 1 + static_cast<std::int64_t>(j);
        for (std::size_t k = i; k < j; ++k)
            if (items[order[k]].label) twice_rank_sum_pos += twice_rank;
        i = j;
    }

    const std::int64_t twice_u = twice_rank_sum_pos - n_pos * (n_pos + 1);
    return static_cast<double>(twice_u) / static_cast<double>(2 * n_pos * n_neg);
}

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;  // score at or above which the item is called positive
};

// ROC curve by threshold sweep, descending score; one point per distinct
// score plus the (0,0) origin. Both coordinates are monotone non-decreasing.
inline std::vector<RocPoint> roc_points(const std::vector<ScoredItem>& items) {
    std::vector<ScoredItem> sorted = items;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScoredItem& a, const ScoredItem& b) { return a.score > b.score; });

    std::int64_t n_pos = 0;
    for (const ScoredItem& it : items) n_pos += it.label ? 1 : 0;
    const std::int64_t n_neg = static_cast<std::int64_t>(items.size()) - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw MetricError("ROC undefined: need at least one positive and one negative label");

    std::vector<RocPoint> points;
    points.push_back(RocPoint{0.0, 0.0, std::numeric_limits<double>::infinity()});
    std::int64_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j].score == sorted[i].score) {
            if (sorted[j].label)
                ++tp;
            else
                ++fp;
            ++j;
        }
        points.push_back(RocPoint{static_cast<double>(fp) / static_cast<double>(n_neg),
                                  static_cast<double>(tp) / static_cast<double>(n_pos),
                                  sorted[i].score});
        i = j;
    }
    return points;
}

struct WilcoxonResult {
    double statistic = 0.0;  // W = min(W+, W-)
    double p_two_sided = 1.0;
    int n_used = 0;          // differences kept after dropping zeros
    bool exact = false;      // exact enumeration vs normal approximation
};

namespace detail {

// Exact null distribution of 2*W+ over all 2^n sign assignments, as a count
// table indexed by the doubled statistic (doubling keeps tie-averaged half
// ranks integral).
inline double wilcoxon_exact_p(const std::vector<std::int64_t>& twice_ranks,
                               std::int64_t twice_w) {
    std::int64_t total = 0;
    for (std::int64_t r : twice_ranks) total += r;
    std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
    count[0] = 1;
    std::int64_t reached = 0;
    for (std::int64_t r : twice_ranks) {
        reached += r;
        for (std::int64_t s = reached; s >= r; --s)
            count[static_cast<std::size_t>(s)] += count[static_cast<std::size_t>(s - r)];
    }
    std::uint64_t at_or_below = 0;
    for (std::int64_t s = 0; s <= std::min(twice_w, total); ++s)
        at_or_below += count[static_cast<std::size_t>(s)];
    const double p = 2.0 * static_cast<double>(at_or_below) /
                     std::ldexp(1.0, static_cast<int>(twice_ranks.size()));
    return std::min(1.0, p);
}

}  // namespace detail

// Wilcoxon signed-rank test on paired differences. Zero differences are
// dropped; |d| ties share average ranks. Exact two-sided p by enumeration for
// n <= exact_max_n (default 20), normal approximation with tie correction and
// continuity correction above. exact_max_n = 0 forces the approximation (for
// cross-checking the branches).
inline WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& paired_diffs,
                                           int exact_max_n = 20) {
    std::vector<double> diffs;
    diffs.reserve(paired_diffs.size());
    for (double d : paired_diffs)
        if (d != 0.0) diffs.push_back(d);
    if (diffs.empty())
        throw MetricError("Wilcoxon undefined: all paired differences are zero");
    if (diffs.size() < 5)
        throw MetricError("Wilcoxon needs at least 5 non-zero differences, got " +
                          std::to_string(diffs.size()));

    const int n = static_cast<int>(diffs.size());
    std::vector<int> order(diffs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(diffs[a]) < std::abs(diffs[b]); });

    // Doubled average ranks, assigned per tie group of |d|.
    std::vector<std::int64_t> twice_rank(diffs.size(), 0);
    std::vector<std::int64_t> tie_sizes;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() &&
               std::abs(diffs[order[j]]) == std::abs(diffs[order[i]]))
            ++j;
        const std::int64_t tr = static_cast<std::int64_t>(i) + 1 + static_cast<std::int64_t>(j);
        for (std::size_t k = i; k < j; ++k) twice_rank[static_cast<std::size_t>(order[k])] = tr;
        tie_sizes.push_back(static_cast<std::int64_t>(j - i));
        i = j;
    }

    std::int64_t twice_w_pos = 0;
    const std::int64_t twice_total = static_cast<std::int64_t>(n) * (n + 1);
    for (std::size_t k = 0; k < diffs.size(); ++k)
        if (diffs[k] > 0.0) twice_w_pos += twice_rank[k];
    const std::int64_t twice_w_neg = twice_total - twice_w_pos;
    const std::int64_t twice_w = std::min(twice_w_pos, twice_w_neg);

    WilcoxonResult result;
    result.statistic = static_cast<double>(twice_w) / 2.0;
    result.n_used = n;

    if (n <= exact_max_n) {
        std::vector<std::int64_t> ranks(twice_rank.begin(), twice_rank.end());
        result.p_two_sided = detail::wilcoxon_exact_p(ranks, twice_w);
        result.exact = true;
    } else {
        const double w = static_cast<double>(twice_w) / 2.0;
        const double mean = static_cast<double>(n) * (n + 1) / 4.0;
        double var = static_cast<double>(n) * (n + 1) * (2 * n + 1) / 24.0;
        for (std::int64_t t : tie_sizes)
            var -= static_cast<double>(t * t * t - t) / 48.0;
        const double num = std::max(0.0, std::abs(w - mean) - 0.5);  // continuity correction
        const double z = (var > 0.0) ? num / std::sqrt(var) : 0.0;
        result.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
        result.exact = false;
    }
    return result;
}

}  // namespace sgemas
