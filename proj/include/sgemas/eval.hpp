#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgemas/engine.hpp"
#include "sgemas/errors.hpp"
#include "sgemas/metrics.hpp"
#include "sgemas/rng.hpp"
#include "sgemas/signal_io.hpp"

namespace sgemas {

struct BaselinePoint {
    double free_energy = 0.0;
    double score = 0.0;  // == free_energy; kept separate for symmetry with engine traces
};

// Naive leaky-integrator baseline: mu <- gamma*mu + (1-gamma)*x per step, no
// agents, no energy. The score is the prediction error against the belief
// held *before* the update, so gamma = 0 yields F_t = |x_t - x_{t-1}|.
inline std::vector<BaselinePoint> leaky_baseline_run(double gamma_naive,
                                                     const std::vector<SignalFrame>& stream) {
    if (gamma_naive < 0.0 || gamma_naive >= 1.0)
        throw ConfigError("baseline_gamma must be in [0,1)");
    std::vector<BaselinePoint> out;
    out.reserve(stream.size());
    double mu = 0.0;
    for (const SignalFrame& f : stream) {
        const double err = std::abs(f.value - mu);
        out.push_back(BaselinePoint{err, err});
        mu = gamma_naive * mu + (1.0 - gamma_naive) * f.value;
    }
    return out;
}

// Collects the labeled samples of a trace as scored items (score = -E_t).
inline std::vector<ScoredItem> per_sample_items(const std::vector<TraceRecord>& trace) {
    std::vector<ScoredItem> items;
    items.reserve(trace.size());
    for (const TraceRecord& r : trace)
        if (r.label) items.push_back(ScoredItem{r.score, *r.label});
    return items;
}

// One sweep cell: a variant run on one stream.
struct AblationCell {
    std::string variant;
    int stream_id = 0;
    double auc = 0.0;
    std::int64_t n_pos = 0;
    std::int64_t n_neg = 0;
    std::string error;  // non-empty when the cell failed; the sweep continues
};

struct VariantSummary {
    std::string variant;
    double mean_auc = 0.0;
    double std_auc = 0.0;
    int n_streams = 0;
};

struct PairedTest {
    std::string variant;      // compared against the first variant in the sweep
    double statistic = 0.0;
    double p_two_sided = 1.0;
    bool exact = false;
    bool degenerate = false;  // all-zero diffs or too few pairs
    std::string note;
};

struct AblationReport {
    std::vector<std::string> variants;
    int n_streams = 0;
    std::uint64_t base_seed = 0;
    std::string mode;  // evaluation granularity, e.g. "per-sample"
    std::vector<AblationCell> cells;
    std::vector<VariantSummary> summaries;
    std::vector<PairedTest> paired_tests;  // each variant vs the first one
};

struct AblationConfig {
    EngineParams engine;       // template; variant and seed are overridden per cell
    SyntheticSpec stream_spec; // template; seed is overridden per stream
    std::vector<Variant> variants;
    int n_streams = 2;
    std::uint64_t base_seed = 0;
};

namespace detail {

// Salt for stream seeds vs engine seeds; engine cells additionally salt with
// the variant index so variants do not share noise.
inline constexpr std::uint64_t kStreamSalt = 0x53545245414d5353ULL;
inline constexpr std::uint64_t kEngineSalt = 0x454e47494e455353ULL;

}  // namespace detail

// Runs every variant on every stream under the shared seed policy: stream i is
// generated once from derive_seed(base, stream_salt, i) and reused across
// variants (paired comparisons), while each (variant, stream) engine gets its
// own sub-seed. Per-cell failures are recorded, not fatal. Per-sample AUC with
// score = -E_t.
inline AblationReport run_ablation(const AblationConfig& cfg) {
    if (cfg.variants.empty()) throw ConfigError("ablation needs at least one variant");
    if (cfg.n_streams < 1) throw ConfigError("ablation needs at least one stream");

    AblationReport report;
    for (Variant v : cfg.variants) report.variants.push_back(to_string(v));
    report.n_streams = cfg.n_streams;
    report.base_seed = cfg.base_seed;
    report.mode = "per-sample";

    std::vector<std::vector<SignalFrame>> streams;
    streams.reserve(static_cast<std::size_t>(cfg.n_streams));
    for (int i = 0; i < cfg.n_streams; ++i) {
        SyntheticSpec spec = cfg.stream_spec;
        spec.seed = derive_seed(cfg.base_seed, detail::kStreamSalt, static_cast<std::uint64_t>(i));
        streams.push_back(generate_synthetic(spec));
    }

    // auc[variant][stream]; NaN marks a failed cell.
    std::vector<std::vector<double>> auc(cfg.variants.size(),
                                         std::vector<double>(static_cast<std::size_t>(cfg.n_streams),
                                                             std::nan("")));
    for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
        for (int si = 0; si < cfg.n_streams; ++si) {
            AblationCell cell;
            cell.variant = to_string(cfg.variants[vi]);
            cell.stream_id = si;
            try {
                EngineParams params = cfg.engine;
                params.variant = cfg.variants[vi];
                params.seed = derive_seed(cfg.base_seed, detail::kEngineSalt + vi,
                                          static_cast<std::uint64_t>(si));
                const auto trace = run_stream(params, streams[static_cast<std::size_t>(si)]);
                const auto items = per_sample_items(trace);
                for (const ScoredItem& it : items) (it.label ? cell.n_pos : cell.n_neg)++;
                cell.auc = roc_auc(items);
                auc[vi][static_cast<std::size_t>(si)] = cell.auc;
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
            report.cells.push_back(cell);
        }
    }

    for (std::size_t vi = 0; vi < cfg.variants.size(); ++vi) {
        VariantSummary s;
        s.variant = to_string(cfg.variants[vi]);
        double sum = 0.0;
        int n = 0;
        for (double a : auc[vi])
            if (!std::isnan(a)) {
                sum += a;
                ++n;
            }
        s.n_streams = n;
        if (n > 0) {
            s.mean_auc = sum / n;
            double ss = 0.0;
            for (double a : auc[vi])
                if (!std::isnan(a)) ss += (a - s.mean_auc) * (a - s.mean_auc);
            s.std_auc = std::sqrt(ss / n);
        }
        report.summaries.push_back(s);
    }

    // Paired tests of every later variant against the first (baseline) one,
    // over streams where both cells succeeded.
    for (std::size_t vi = 1; vi < cfg.variants.size(); ++vi) {
        PairedTest t;
        t.variant = to_string(cfg.variants[vi]);
        std::vector<double> diffs;
        for (int si = 0; si < cfg.n_streams; ++si) {
            const double a = auc[vi][static_cast<std::size_t>(si)];
            const double b = auc[0][static_cast<std::size_t>(si)];
            if (!std::isnan(a) && !std::isnan(b)) diffs.push_back(a - b);
        }
        try {
            const WilcoxonResult w = wilcoxon_signed_rank(diffs);
            t.statistic = w.statistic;
            t.p_two_sided = w.p_two_sided;
            t.exact = w.exact;
        } catch (const MetricError& e) {
            t.degenerate = true;
            t.note = e.what();
        }
        report.paired_tests.push_back(t);
    }
    return report;
}

// Ordered (entropy, energy) projection of a trace for external plotting.
struct PhasePoint {
    std::int64_t step = 0;
    double entropy = 0.0;
    double energy = 0.0;
    std::optional<bool> label;
};

inline std::vector<PhasePoint> phase_trace_export(const std::vector<TraceRecord>& trace) {
    if (trace.empty()) throw ConfigError("phase export needs a non-empty trace");
    std::vector<PhasePoint> points;
    points.reserve(trace.size());
    for (const TraceRecord& r : trace)
        points.push_back(PhasePoint{r.step, r.entropy, r.energy, r.label});
    return points;
}

}  // namespace sgemas
