#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sgemas/errors.hpp"
#include "sgemas/rng.hpp"

namespace sgemas {

enum class AgentKind { Sensor, Regulator, Catalyst, Genesis };

inline const char* to_string(AgentKind k) {
    switch (k) {
        case AgentKind::Sensor: return "sensor";
        case AgentKind::Regulator: return "regulator";
        case AgentKind::Catalyst: return "catalyst";
        case AgentKind::Genesis: return "genesis";
    }
    return "?";
}

// One agent. Parameters are flat; only the fields of the agent's kind are
// meaningful (Sensor: sigma, Regulator: k_p/k_d, Catalyst: lambda_c). The
// Genesis agent is a zero-force sentry that exists from initialization and is
// never removed.
struct Agent {
    AgentKind kind = AgentKind::Genesis;
    double sigma = 0.0;
    double k_p = 0.0;
    double k_d = 0.0;
    double lambda_c = 0.0;
    std::int64_t birth_step = 0;
};

// Parameters assigned to newly spawned agents.
struct SpawnParams {
    double sensor_sigma = 0.05;
    double regulator_kp = 0.5;
    double regulator_kd = 0.1;
    double catalyst_lambda = 0.1;
};

enum class PlasticityMode { Deterministic, Stochastic };

struct PlasticityParams {
    double e_thresh = 5.0;       // energy birth threshold
    double e_crit = -5.0;        // energy death threshold
    double eta_learning = 0.5;   // global learning pressure, scales birth rate
    double omega = 8.0;          // nucleation threshold for Catalyst spawn
    double tau_grad = 0.5;       // grad-F above this reads as "high error"
    double tau_flat = 0.1;       // |grad-F| below this reads as "flat"
    int n_max = 64;              // population cap
    PlasticityMode mode = PlasticityMode::Deterministic;
    SpawnParams spawn;

    void validate() const {
        if (!(e_crit < e_thresh)) throw ConfigError("plasticity.e_crit must be < e_thresh");
        if (n_max < 1) throw ConfigError("plasticity.n_max must be >= 1");
        if (!(tau_flat < tau_grad)) throw ConfigError("plasticity.tau_flat must be < tau_grad");
        if (eta_learning < 0.0 || eta_learning > 1.0)
            throw ConfigError("plasticity.eta_learning must be in [0,1]");
        if (spawn.sensor_sigma < 0.0) throw ConfigError("plasticity.sensor_sigma must be >= 0");
        if (spawn.regulator_kp < 0.0 || spawn.regulator_kd < 0.0)
            throw ConfigError("plasticity.regulator gains must be >= 0");
        if (spawn.catalyst_lambda < 0.0) throw ConfigError("plasticity.catalyst_lambda must be >= 0");
    }
};

// ---------------------------------------------------------------------------
// Transfer operators (the agent trinity). Pure given inputs and RNG state.
// ---------------------------------------------------------------------------

// Sensor: stochastic exploration. Returns the additive jitter term drawn from
// Normal(0, sigma^2); the pass-through of the belief itself is not part of the
// contribution. sigma == 0 contributes exactly 0 without consuming RNG state.
inline double sensor_transfer(double sigma, Rng& rng) {
    if (sigma <= 0.0) return 0.0;
    return sigma * rng.normal();
}

// Regulator: negative feedback, proportional-derivative damping toward the
// homeostatic origin.
inline double regulator_transfer(double mu, double dmu, double k_p, double k_d) {
    return -k_p * mu - k_d * dmu;
}

// Catalyst: positive feedback, active only while the reservoir is above the
// birth threshold.
inline double catalyst_transfer(double mu, double lambda_c, double energy, double e_thresh) {
    return (energy > e_thresh) ? lambda_c * mu : 0.0;
}

// ---------------------------------------------------------------------------
// Plasticity kernels.
// ---------------------------------------------------------------------------

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Recruitment rate in [0, eta_learning].
inline double birth_rate(double energy, const PlasticityParams& p) {
    return sigmoid(energy - p.e_thresh) * p.eta_learning;
}

// Apoptosis rate in [0, 1); zero at or above e_crit.
inline double death_rate(double energy, const PlasticityParams& p) {
    if (energy >= p.e_crit) return 0.0;
    return 1.0 - std::exp(-(p.e_crit - energy));
}

// Per-agent survival probability, sigmoid in the energy margin above e_crit.
inline double survival_probability(double energy, double e_crit) {
    return sigmoid(energy - e_crit);
}

// Spawn-type rule: high error recruits a Regulator; flat error on a charged
// reservoir recruits a Catalyst; anything else falls back to a Sensor
// (exploration).
inline AgentKind select_spawn_type(double grad_f, double energy, const PlasticityParams& p) {
    if (grad_f > p.tau_grad) return AgentKind::Regulator;
    if (std::abs(grad_f) < p.tau_flat && energy > p.omega) return AgentKind::Catalyst;
    return AgentKind::Sensor;
}

inline Agent make_agent(AgentKind kind, const SpawnParams& spawn, std::int64_t birth_step) {
    Agent a;
    a.kind = kind;
    a.birth_step = birth_step;
    switch (kind) {
        case AgentKind::Sensor: a.sigma = spawn.sensor_sigma; break;
        case AgentKind::Regulator:
            a.k_p = spawn.regulator_kp;
            a.k_d = spawn.regulator_kd;
            break;
        case AgentKind::Catalyst: a.lambda_c = spawn.catalyst_lambda; break;
        case AgentKind::Genesis: break;
    }
    return a;
}

struct PlasticityEvent {
    enum class Type { Birth, Death };
    Type type = Type::Birth;
    AgentKind kind = AgentKind::Sensor;
};

// The living population. Ordered by birth; index 0 is always the Genesis
// agent.
struct AgentPopulation {
    std::vector<Agent> agents;
    int peak_count = 0;

    static AgentPopulation initial() {
        AgentPopulation pop;
        pop.agents.push_back(Agent{});  // Genesis
        pop.peak_count = 1;
        return pop;
    }

    int size() const { return static_cast<int>(agents.size()); }
};

// Applies one plasticity phase to the population and reports the events.
//
// Deterministic mode (canonical): exactly one spawn when energy > e_thresh and
// the cap allows it, else one removal of the oldest non-Genesis agent when
// energy < e_crit. Stochastic mode: one spawn with probability
// birth_rate(energy), then every non-Genesis agent independently dies with
// probability 1 - survival_probability(energy). The Genesis agent is never
// removed and the population never exceeds n_max.
inline std::vector<PlasticityEvent> apply_plasticity(AgentPopulation& pop, double energy,
                                                     double grad_f, const PlasticityParams& p,
                                                     Rng& rng, std::int64_t step) {
    std::vector<PlasticityEvent> events;

    if (p.mode == PlasticityMode::Deterministic) {
        if (energy > p.e_thresh) {
            if (pop.size() < p.n_max) {
                const AgentKind kind = select_spawn_type(grad_f, energy, p);
                pop.agents.push_back(make_agent(kind, p.spawn, step));
                events.push_back({PlasticityEvent::Type::Birth, kind});
            }
        } else if (energy < p.e_crit && pop.size() > 1) {
            // Index 0 is Genesis; index 1 is the oldest removable agent.
            const AgentKind kind = pop.agents[1].kind;
            pop.agents.erase(pop.agents.begin() + 1);
            events.push_back({PlasticityEvent::Type::Death, kind});
        }
    } else {
        if (pop.size() < p.n_max && rng.uniform01() < birth_rate(energy, p)) {
            const AgentKind kind = select_spawn_type(grad_f, energy, p);
            pop.agents.push_back(make_agent(kind, p.spawn, step));
            events.push_back({PlasticityEvent::Type::Birth, kind});
        }
        const double p_surv = survival_probability(energy, p.e_crit);
        for (std::size_t i = 1; i < pop.agents.size();) {
            if (rng.uniform01() > p_surv) {
                events.push_back({PlasticityEvent::Type::Death, pop.agents[i].kind});
                pop.agents.erase(pop.agents.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                ++i;
            }
        }
    }

    pop.peak_count = std::max(pop.peak_count, pop.size());
    return events;
}

}  // namespace sgemas
