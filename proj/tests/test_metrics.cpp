#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sgemas/metrics.hpp"
#include "sgemas/rng.hpp"

using namespace sgemas;

namespace {

// Brute-force Mann-Whitney pair counting: the independent AUC oracle. Returns
// (2*wins + ties) / (2*n_pos*n_neg) so the rational matches the rank route.
double auc_oracle(const std::vector<ScoredItem>& items) {
    std::int64_t m = 0, n_pos = 0, n_neg = 0;
    for (const ScoredItem& p : items) {
        if (!p.label) continue;
        ++n_pos;
        for (const ScoredItem& q : items) {
            if (q.label) continue;
            if (p.score > q.score)
                m += 2;
            else if (p.score == q.score)
                m += 1;
        }
    }
    for (const ScoredItem& q : items) n_neg += q.label ? 0 : 1;
    return static_cast<double>(m) / static_cast<double>(2 * n_pos * n_neg);
}

// Full 2^n enumeration of the signed-rank null: the independent Wilcoxon
// oracle (bitmask route, distinct from the library's rank-sum table).
double wilcoxon_p_oracle(const std::vector<double>& diffs) {
    std::vector<double> d;
    for (double x : diffs)
        if (x != 0.0) d.push_back(x);
    const int n = static_cast<int>(d.size());
    // Average ranks of |d|, doubled to stay integral.
    std::vector<int> order(d.size());
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return std::abs(d[a]) < std::abs(d[b]); });
    std::vector<std::int64_t> twice_rank(d.size());
    int i = 0;
    while (i < n) {
        int j = i;
        while (j < n && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
        for (int k = i; k < j; ++k) twice_rank[static_cast<std::size_t>(order[k])] = i + 1 + j;
        i = j;
    }
    std::int64_t twice_w_pos = 0, twice_total = 0;
    for (int k = 0; k < n; ++k) {
        twice_total += twice_rank[static_cast<std::size_t>(k)];
        if (d[static_cast<std::size_t>(k)] > 0.0) twice_w_pos += twice_rank[static_cast<std::size_t>(k)];
    }
    const std::int64_t twice_w = std::min(twice_w_pos, twice_total - twice_w_pos);

    std::int64_t at_or_below = 0;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::int64_t w = 0;
        for (int k = 0; k < n; ++k)
            if (mask & (1u << k)) w += twice_rank[static_cast<std::size_t>(k)];
        if (w <= twice_w) ++at_or_below;
    }
    return std::min(1.0, 2.0 * static_cast<double>(at_or_below) /
                             static_cast<double>(1u << n));
}

}  // namespace

TEST_CASE("roc_auc: perfect separation and all-ties") {
    std::vector<ScoredItem> sep = {{0.9, true}, {0.8, true}, {0.2, false}, {0.1, false}};
    CHECK(roc_auc(sep) == 1.0);
    std::vector<ScoredItem> ties = {{0.5, true}, {0.5, false}, {0.5, true}, {0.5, false}};
    CHECK(roc_auc(ties) == 0.5);
}

TEST_CASE("roc_auc: four-item examples") {
    std::vector<ScoredItem> a = {{0.1, false}, {0.4, true}, {0.35, false}, {0.8, true}};
    CHECK(roc_auc(a) == 1.0);
    // One inversion among the four pos-neg pairs.
    std::vector<ScoredItem> b = {{0.1, false}, {0.4, false}, {0.35, true}, {0.8, true}};
    CHECK(roc_auc(b) == 0.75);
}

TEST_CASE("roc_auc: single-class input is an error") {
    std::vector<ScoredItem> pos = {{0.1, true}, {0.2, true}};
    CHECK_THROWS_AS(roc_auc(pos), MetricError);
    std::vector<ScoredItem> neg = {{0.1, false}};
    CHECK_THROWS_AS(roc_auc(neg), MetricError);
}

TEST_CASE("roc_auc: exact equality with the brute-force oracle") {
    Rng rng(101);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform01() * 300);
        std::vector<ScoredItem> items;
        bool any_pos = false, any_neg = false;
        for (int i = 0; i < n; ++i) {
            // Quantized scores force plenty of ties.
            const double s = std::floor(rng.normal() * 4.0) / 4.0;
            const bool label = rng.uniform01() < 0.4;
            items.push_back({s, label});
            (label ? any_pos : any_neg) = true;
        }
        if (!any_pos || !any_neg) continue;
        CHECK(roc_auc(items) == auc_oracle(items));  // bitwise
    }
}

TEST_CASE("roc_auc: invariant under strictly increasing transforms") {
    Rng rng(103);
    std::vector<ScoredItem> items;
    for (int i = 0; i < 200; ++i)
        items.push_back({std::floor(rng.normal() * 3.0) / 3.0, rng.uniform01() < 0.5});
    const double base = roc_auc(items);
    auto transformed = items;
    for (ScoredItem& it : transformed) it.score = std::tanh(it.score) * 2.0 + 1.0;
    CHECK(roc_auc(transformed) == base);
}

TEST_CASE("roc_auc: negating scores flips the AUC") {
    Rng rng(104);
    std::vector<ScoredItem> items;
    for (int i = 0; i < 150; ++i) items.push_back({rng.normal(), rng.uniform01() < 0.3});
    const double base = roc_auc(items);
    for (ScoredItem& it : items) it.score = -it.score;
    CHECK(roc_auc(items) == Catch::Approx(1.0 - base).margin(1e-12));
}

TEST_CASE("roc_points: monotone in both coordinates, ends at (1,1)") {
    Rng rng(105);
    std::vector<ScoredItem> items;
    for (int i = 0; i < 100; ++i)
        items.push_back({std::floor(rng.normal() * 2.0) / 2.0, rng.uniform01() < 0.5});
    const auto pts = roc_points(items);
    REQUIRE(pts.size() >= 2);
    CHECK(pts.front().fpr == 0.0);
    CHECK(pts.front().tpr == 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].fpr >= pts[i - 1].fpr);
        CHECK(pts[i].tpr >= pts[i - 1].tpr);
    }
    CHECK(pts.back().fpr == 1.0);
    CHECK(pts.back().tpr == 1.0);
}

TEST_CASE("wilcoxon: five positive differences give W = 0, p = 0.0625") {
    const auto r = wilcoxon_signed_rank({1.0, 2.0, 3.0, 4.0, 5.0});
    CHECK(r.statistic == 0.0);
    CHECK(r.exact);
    CHECK(r.p_two_sided == Catch::Approx(0.0625).margin(1e-12));
}

TEST_CASE("wilcoxon: antisymmetric differences are maximally insignificant") {
    const auto r = wilcoxon_signed_rank({1.0, -1.0, 2.0, -2.0, 3.0, -3.0});
    // W+ == W-, so the two-sided p saturates at 1.
    CHECK(r.p_two_sided == 1.0);
}

TEST_CASE("wilcoxon: zero diffs are dropped; degenerate inputs error") {
    CHECK_THROWS_AS(wilcoxon_signed_rank({0.0, 0.0, 0.0}), MetricError);
    CHECK_THROWS_AS(wilcoxon_signed_rank({1.0, -1.0, 2.0, 0.0}), MetricError);  // n = 3 < 5
    const auto r = wilcoxon_signed_rank({1.0, 2.0, 3.0, 4.0, 5.0, 0.0, 0.0});
    CHECK(r.n_used == 5);
}

TEST_CASE("wilcoxon: exact branch matches the full 2^n enumeration") {
    Rng rng(107);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 5 + static_cast<int>(rng.uniform01() * 8);  // 5..12
        std::vector<double> diffs;
        for (int i = 0; i < n; ++i) {
            // Coarse values produce tied |d| regularly.
            double d = std::floor(rng.normal() * 3.0) / 2.0;
            if (d == 0.0) d = 0.5;
            diffs.push_back(d);
        }
        const auto r = wilcoxon_signed_rank(diffs);
        REQUIRE(r.exact);
        CHECK(r.p_two_sided == wilcoxon_p_oracle(diffs));  // bitwise: same rationals
    }
}

TEST_CASE("wilcoxon: exact and approximate branches agree at n = 20") {
    Rng rng(109);
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> diffs;
        for (int i = 0; i < 20; ++i) diffs.push_back(rng.normal() + 0.3);
        const auto exact = wilcoxon_signed_rank(diffs);
        const auto approx = wilcoxon_signed_rank(diffs, 0);
        REQUIRE(exact.exact);
        REQUIRE_FALSE(approx.exact);
        CHECK(exact.statistic == approx.statistic);
        CHECK(std::abs(exact.p_two_sided - approx.p_two_sided) < 0.02);
    }
}
