#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "sgemas/agents.hpp"
#include "sgemas/errors.hpp"
#include "sgemas/rng.hpp"
#include "sgemas/signal_io.hpp"

namespace sgemas {

// Feature ladder. Flags are cumulative; disabling one removes only that term.
//   V3_0  bare inference loop: no jitter, no instability drive, precision == 1
//   V3_1  + Sensor jitter active in the collective action
//   V3_2  + instability drive on the energy gain (first scale only)
//   V3_3  + multi-scale instability + adaptive precision
enum class Variant { V3_0, V3_1, V3_2, V3_3 };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::V3_0: return "v3_0";
        case Variant::V3_1: return "v3_1";
        case Variant::V3_2: return "v3_2";
        case Variant::V3_3: return "v3_3";
    }
    return "?";
}

inline Variant variant_from_string(std::string s) {
    for (char& c : s)
        if (c == '.') c = '_';
    if (s == "v3_0") return Variant::V3_0;
    if (s == "v3_1") return Variant::V3_1;
    if (s == "v3_2") return Variant::V3_2;
    if (s == "v3_3") return Variant::V3_3;
    throw ConfigError("unknown variant '" + s + "' (expected v3_0 .. v3_3)");
}

struct PrecisionParams {
    double eps = 0.05;   // variance floor; caps precision at 1/eps
    double decay = 0.95; // EWMA decay of the squared-deviation estimate
};

struct EntropyParams {
    int window = 64;
    int bins = 16;
};

struct EngineParams {
    double gamma = 0.6;          // belief inertia
    double alpha = 5.0;          // metabolic gain
    double beta = 0.18;          // per-agent maintenance cost
    double alpha_instab = 1.0;   // instability drive coefficient (V3_2+)
    double diffusion_d = 0.0;    // belief noise amplitude, enters as sqrt(2D)
    double e_init = 1.0;
    PrecisionParams precision;
    std::vector<int> instability_scales{2, 8, 32};
    EntropyParams entropy;
    Variant variant = Variant::V3_3;
    PlasticityParams plasticity;
    std::uint64_t seed = 0;

    void validate() const {
        // gamma == 1 is accepted as the frozen-belief edge case.
        if (gamma < 0.0 || gamma > 1.0) throw ConfigError("engine.gamma must be in [0,1]");
        if (alpha < 0.0) throw ConfigError("engine.alpha must be >= 0");
        if (beta < 0.0) throw ConfigError("engine.beta must be >= 0");
        if (diffusion_d < 0.0) throw ConfigError("engine.diffusion_d must be >= 0");
        if (precision.eps <= 0.0) throw ConfigError("engine.precision_eps must be > 0");
        if (precision.decay <= 0.0 || precision.decay >= 1.0)
            throw ConfigError("engine.precision_decay must be in (0,1)");
        if (entropy.window < 1) throw ConfigError("engine.entropy_window must be >= 1");
        if (entropy.bins < 2) throw ConfigError("engine.entropy_bins must be >= 2");
        if (variant >= Variant::V3_2) {
            if (instability_scales.empty())
                throw ConfigError("engine.instability_scales must be non-empty");
            for (std::size_t i = 0; i < instability_scales.size(); ++i) {
                if (instability_scales[i] < 1)
                    throw ConfigError("engine.instability_scales must be >= 1");
                if (i > 0 && instability_scales[i] <= instability_scales[i - 1])
                    throw ConfigError("engine.instability_scales must be strictly increasing");
            }
        }
        plasticity.validate();
    }
};

// Per-step snapshot. `n_agents` is the population size that paid maintenance
// this step, i.e. before this step's births/deaths; `births`/`deaths` are the
// plasticity events of this step. This makes every record satisfy
//   energy[t] - energy[t-1] == alpha*F*Pi + alpha_instab*instability - beta*n_agents
// from its own fields.
struct TraceRecord {
    std::int64_t step = 0;
    double x = 0.0;
    double mu = 0.0;
    double free_energy = 0.0;
    double precision = 1.0;
    double energy = 0.0;
    int n_agents = 1;
    double entropy = 0.0;
    double instability = 0.0;
    double score = 0.0;
    int births = 0;
    int deaths = 0;
    std::int64_t flops_step = 0;

    // In-memory extras, not part of the CSV schema.
    std::optional<bool> label;
    std::vector<PlasticityEvent> events;
};

// Instantaneous surprise.
inline double free_energy(double x, double mu) { return std::abs(x - mu); }

// The energy recurrence, kept in one place so the engine and any trace
// checker round identically.
inline double energy_delta(double alpha, double f, double pi, double drive, double beta,
                           int n_agents) {
    return alpha * f * pi + drive - beta * static_cast<double>(n_agents);
}

// ---------------------------------------------------------------------------
// Per-step cost model. Abstract operation counts, not hardware FLOPs; the
// point is relative accounting across regimes and configs.
//   flops_step = kFlopsFixed                        belief/energy/plasticity
//              + kFlopsPerAgent * N                 collective action
//              + 2*window + 3*bins + 8              entropy histogram
//              + 2*sum(scales) + 3*|scales|         instability (V3_2+ only;
//                                                   V3_2 uses the first scale)
// ---------------------------------------------------------------------------
inline constexpr std::int64_t kFlopsFixed = 24;
inline constexpr std::int64_t kFlopsPerAgent = 12;

inline std::int64_t entropy_flops(const EntropyParams& e) {
    return 2LL * e.window + 3LL * e.bins + 8;
}

inline std::int64_t instability_flops(const EngineParams& p) {
    if (p.variant < Variant::V3_2) return 0;
    std::int64_t sum = 0;
    std::int64_t count = 0;
    if (p.variant == Variant::V3_2) {
        sum = p.instability_scales.front();
        count = 1;
    } else {
        for (int s : p.instability_scales) sum += s;
        count = static_cast<std::int64_t>(p.instability_scales.size());
    }
    return 2 * sum + 3 * count;
}

struct EngineState {
    double mu = 0.0;
    double mu_prev = 0.0;
    double energy = 0.0;
    double var_ewma = 0.0;   // EWMA of squared deviation, feeds precision
    double precision = 1.0;
    double f_ewma = 0.0;     // smoothed free energy, feeds the grad-F estimate
    std::int64_t step = 0;
    AgentPopulation pop = AgentPopulation::initial();
    std::deque<double> entropy_window;
    std::deque<double> instab_window;
    Rng rng;
    std::int64_t flops_total = 0;
};

// Decay of the smoothed free energy used by the grad-F estimator.
inline constexpr double kGradEwmaDecay = 0.9;

// The online inference loop: belief update with inertia, adaptive precision,
// instability and entropy statistics, metabolic energy accounting, structural
// plasticity, anomaly scoring and cost accounting. One instance processes one
// stream strictly sequentially.
class Engine {
public:
    explicit Engine(const EngineParams& params) : p_(params) {
        p_.validate();
        s_.energy = p_.e_init;
        s_.rng.reseed(p_.seed);
    }

    const EngineParams& params() const { return p_; }
    const EngineState& state() const { return s_; }
    EngineState& state() { return s_; }

    TraceRecord step(const SignalFrame& frame) {
        if (!std::isfinite(frame.value))
            throw EngineError("non-finite sample at step " + std::to_string(s_.step));
        const double x = frame.value;

        // 1. Collective action, summed in population order so floating-point
        //    results are reproducible.
        const double dmu = s_.mu - s_.mu_prev;
        double action = 0.0;
        for (const Agent& a : s_.pop.agents) {
            switch (a.kind) {
                case AgentKind::Sensor:
                    if (p_.variant >= Variant::V3_1) action += sensor_transfer(a.sigma, s_.rng);
                    break;
                case AgentKind::Regulator:
                    action += regulator_transfer(s_.mu, dmu, a.k_p, a.k_d);
                    break;
                case AgentKind::Catalyst:
                    action += catalyst_transfer(s_.mu, a.lambda_c, s_.energy,
                                                p_.plasticity.e_thresh);
                    break;
                case AgentKind::Genesis:
                    break;  // low-power sentry, no force
            }
        }

        // 2. Belief update with inertia, plus diffusion noise when enabled.
        double mu_new = p_.gamma * s_.mu + (1.0 - p_.gamma) * (x + action);
        if (p_.diffusion_d > 0.0) mu_new += std::sqrt(2.0 * p_.diffusion_d) * s_.rng.normal();

        // 3. Observables at time t.
        const double f = free_energy(x, mu_new);
        const double pi = update_precision(x, mu_new);
        const double instab = (p_.variant >= Variant::V3_2) ? instability_index(x) : 0.0;
        const double entropy = wave_entropy(x);

        // 4. Energy update; N is the population that pays maintenance now.
        const int n_agents = s_.pop.size();
        const double drive = p_.alpha_instab * instab;
        s_.energy += energy_delta(p_.alpha, f, pi, drive, p_.beta, n_agents);

        // 5. Structural plasticity, driven by the grad-F estimate.
        const double grad_f = f - s_.f_ewma;
        s_.f_ewma = kGradEwmaDecay * s_.f_ewma + (1.0 - kGradEwmaDecay) * f;
        const auto events =
            apply_plasticity(s_.pop, s_.energy, grad_f, p_.plasticity, s_.rng, s_.step);

        // 6..7. Score and cost accounting.
        const std::int64_t flops = kFlopsFixed + kFlopsPerAgent * n_agents +
                                   entropy_flops(p_.entropy) + instability_flops(p_);
        s_.flops_total += flops;

        TraceRecord rec;
        rec.step = s_.step;
        rec.x = x;
        rec.mu = mu_new;
        rec.free_energy = f;
        rec.precision = pi;
        rec.energy = s_.energy;
        rec.n_agents = n_agents;
        rec.entropy = entropy;
        rec.instability = instab;
        rec.score = -s_.energy;
        for (const auto& e : events) {
            if (e.type == PlasticityEvent::Type::Birth)
                ++rec.births;
            else
                ++rec.deaths;
        }
        rec.flops_step = flops;
        rec.label = frame.label;
        rec.events = events;

        s_.mu_prev = s_.mu;
        s_.mu = mu_new;
        ++s_.step;
        return rec;
    }

private:
    // Adaptive precision: inverse of the floored EWMA of squared deviation.
    // Below V3_3 the precision is identically 1 and no estimate is kept.
    double update_precision(double x, double mu_new) {
        if (p_.variant < Variant::V3_3) {
            s_.precision = 1.0;
            return 1.0;
        }
        const double dev = x - mu_new;
        s_.var_ewma = p_.precision.decay * s_.var_ewma + (1.0 - p_.precision.decay) * dev * dev;
        s_.precision = 1.0 / (p_.precision.eps + s_.var_ewma);
        return s_.precision;
    }

    // Mean absolute first difference of the trailing s samples, per scale;
    // V3_2 reads the first scale, V3_3 averages all scales. Zero during
    // warm-up while fewer than two samples are buffered.
    double instability_index(double x) {
        const int max_scale = p_.instability_scales.back();
        s_.instab_window.push_back(x);
        if (static_cast<int>(s_.instab_window.size()) > max_scale) s_.instab_window.pop_front();
        const int have = static_cast<int>(s_.instab_window.size());
        if (have < 2) return 0.0;

        auto scale_value = [&](int scale) {
            const int take = std::min(scale, have);
            if (take < 2) return 0.0;
            double sum = 0.0;
            const std::size_t first = s_.instab_window.size() - static_cast<std::size_t>(take);
            for (std::size_t i = first + 1; i < s_.instab_window.size(); ++i)
                sum += std::abs(s_.instab_window[i] - s_.instab_window[i - 1]);
            return sum / static_cast<double>(take - 1);
        };

        if (p_.variant == Variant::V3_2) return scale_value(p_.instability_scales.front());
        double total = 0.0;
        for (int s : p_.instability_scales) total += scale_value(s);
        return total / static_cast<double>(p_.instability_scales.size());
    }

    // Shannon entropy (base 2) of the trailing-window amplitude histogram,
    // bins spanning the window's [min, max]. Zero for a single-valued window.
    double wave_entropy(double x) {
        s_.entropy_window.push_back(x);
        if (static_cast<int>(s_.entropy_window.size()) > p_.entropy.window)
            s_.entropy_window.pop_front();

        double lo = s_.entropy_window.front();
        double hi = lo;
        for (double v : s_.entropy_window) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi <= lo) return 0.0;

        std::vector<int> counts(static_cast<std::size_t>(p_.entropy.bins), 0);
        const double scale = static_cast<double>(p_.entropy.bins) / (hi - lo);
        for (double v : s_.entropy_window) {
            int b = static_cast<int>((v - lo) * scale);
            b = std::clamp(b, 0, p_.entropy.bins - 1);
            ++counts[static_cast<std::size_t>(b)];
        }
        const double n = static_cast<double>(s_.entropy_window.size());
        double h = 0.0;
        for (int c : counts) {
            if (c == 0) continue;
            const double prob = static_cast<double>(c) / n;
            h -= prob * std::log2(prob);
        }
        return h;
    }

    EngineParams p_;
    EngineState s_;
};

// Runs a fresh engine over the whole stream; one record per frame, labels
// passed through. Step errors are rethrown with the frame index.
inline std::vector<TraceRecord> run_stream(const EngineParams& params,
                                           const std::vector<SignalFrame>& stream) {
    Engine engine(params);
    std::vector<TraceRecord> trace;
    trace.reserve(stream.size());
    for (std::size_t i = 0; i < stream.size(); ++i) {
        try {
            trace.push_back(engine.step(stream[i]));
        } catch (const EngineError&) {
            throw;
        } catch (const std::exception& e) {
            throw EngineError("frame " + std::to_string(i) + ": " + e.what());
        }
    }
    return trace;
}

// Beat-wise scoring: a fresh engine per beat so no state leaks between beats;
// the score is the negated final reservoir, s(b) = -E(b).
inline double score_beat(const EngineParams& params, const Beat& beat) {
    Engine engine(params);
    double energy = params.e_init;
    for (std::size_t i = 0; i < beat.samples.size(); ++i) {
        const TraceRecord rec =
            engine.step(SignalFrame{static_cast<std::int64_t>(i), beat.samples[i], std::nullopt});
        energy = rec.energy;
    }
    return -energy;
}

struct FlopSummary {
    std::int64_t flops_total = 0;
    double flops_per_sample = 0.0;
    std::optional<double> flops_per_beat;
};

// Aggregates the per-step cost accounting of a trace. When beat_len is given,
// also reports the mean cost per (whole) beat.
inline FlopSummary flop_estimate(const std::vector<TraceRecord>& trace,
                                 std::optional<std::int64_t> beat_len = std::nullopt) {
    FlopSummary s;
    for (const TraceRecord& r : trace) s.flops_total += r.flops_step;
    if (!trace.empty())
        s.flops_per_sample = static_cast<double>(s.flops_total) / static_cast<double>(trace.size());
    if (beat_len && *beat_len > 0) {
        const std::int64_t beats = static_cast<std::int64_t>(trace.size()) / *beat_len;
        if (beats > 0)
            s.flops_per_beat = static_cast<double>(s.flops_total) / static_cast<double>(beats);
    }
    return s;
}

}  // namespace sgemas
