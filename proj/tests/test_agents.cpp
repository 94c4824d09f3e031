#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sgemas/agents.hpp"

using namespace sgemas;

TEST_CASE("sensor_transfer: zero sigma contributes exactly zero") {
    Rng rng(1);
    CHECK(sensor_transfer(0.0, rng) == 0.0);
}

TEST_CASE("sensor_transfer: deterministic under a fixed seed") {
    Rng a(42), b(42);
    CHECK(sensor_transfer(1.0, a) == sensor_transfer(1.0, b));
}

TEST_CASE("sensor_transfer: sample std matches the configured sigma") {
    Rng rng(7);
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = sensor_transfer(0.5, rng);
        sum += d;
        sum2 += d * d;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(sd == Catch::Approx(0.5).epsilon(0.02));
}

TEST_CASE("regulator_transfer: proportional-derivative substitution") {
    CHECK(regulator_transfer(1.0, 0.0, 0.5, 0.3) == Catch::Approx(-0.5));
    CHECK(regulator_transfer(0.0, 2.0, 0.5, 0.3) == Catch::Approx(-0.6));
    CHECK(regulator_transfer(0.0, 0.0, 0.5, 0.3) == 0.0);
}

TEST_CASE("catalyst_transfer: energy-gated amplification") {
    CHECK(catalyst_transfer(5.0, 0.1, 4.9, 5.0) == 0.0);
    CHECK(catalyst_transfer(5.0, 0.1, 5.0, 5.0) == 0.0);  // gate is strict
    CHECK(catalyst_transfer(2.0, 0.1, 6.0, 5.0) == Catch::Approx(0.2));
    CHECK(catalyst_transfer(0.0, 0.1, 6.0, 5.0) == 0.0);
}

TEST_CASE("catalyst_transfer: exactly zero for all energies at or below the threshold") {
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const double e = 5.0 - 10.0 * rng.uniform01();
        CHECK(catalyst_transfer(rng.normal(), 0.3, e, 5.0) == 0.0);
    }
}

TEST_CASE("birth_rate: sigmoid midpoint, limits and the ln 3 point") {
    PlasticityParams p;
    p.e_thresh = 5.0;
    p.eta_learning = 0.5;
    CHECK(birth_rate(5.0, p) == Catch::Approx(0.25));  // 0.5 * eta
    CHECK(birth_rate(-1e3, p) == Catch::Approx(0.0).margin(1e-12));
    p.eta_learning = 1.0;
    CHECK(birth_rate(5.0 + std::log(3.0), p) == Catch::Approx(0.75).margin(1e-12));
}

TEST_CASE("death_rate: indicator cutoff and exponential limits") {
    PlasticityParams p;
    p.e_crit = -5.0;
    CHECK(death_rate(-5.0, p) == 0.0);
    CHECK(death_rate(0.0, p) == 0.0);
    CHECK(death_rate(-5.0 - std::log(2.0), p) == Catch::Approx(0.5).margin(1e-12));
    CHECK(death_rate(-1e3, p) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("survival_probability: midpoint, saturation and monotonicity") {
    CHECK(survival_probability(-5.0, -5.0) == Catch::Approx(0.5));
    CHECK(survival_probability(5.0, -5.0) == Catch::Approx(0.99995).margin(1e-4));
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const double e1 = rng.normal() * 10.0;
        const double e2 = e1 + rng.uniform01() * 5.0 + 1e-9;
        CHECK(survival_probability(e1, -5.0) < survival_probability(e2, -5.0));
    }
}

TEST_CASE("rates are monotone in energy") {
    PlasticityParams p;
    Rng rng(13);
    for (int i = 0; i < 200; ++i) {
        const double e1 = rng.normal() * 10.0;
        const double e2 = e1 + rng.uniform01() * 5.0;
        CHECK(birth_rate(e1, p) <= birth_rate(e2, p));
        CHECK(death_rate(e1, p) >= death_rate(e2, p));
    }
}

TEST_CASE("select_spawn_type: the three rules") {
    PlasticityParams p;  // tau_grad 0.5, tau_flat 0.1, omega 8
    CHECK(select_spawn_type(1.0, 0.0, p) == AgentKind::Regulator);
    CHECK(select_spawn_type(0.0, 16.0, p) == AgentKind::Catalyst);
    CHECK(select_spawn_type(0.3, 100.0, p) == AgentKind::Sensor);  // fallback band
    CHECK(select_spawn_type(0.0, 7.9, p) == AgentKind::Sensor);    // flat but low energy
}

TEST_CASE("apply_plasticity: energy between thresholds leaves the population unchanged") {
    PlasticityParams p;
    auto pop = AgentPopulation::initial();
    Rng rng(1);
    const auto events = apply_plasticity(pop, 0.0, 0.0, p, rng, 0);
    CHECK(events.empty());
    CHECK(pop.size() == 1);
}

TEST_CASE("apply_plasticity: deterministic cap blocks spawning") {
    PlasticityParams p;
    p.n_max = 3;
    auto pop = AgentPopulation::initial();
    Rng rng(1);
    for (int step = 0; step < 10; ++step) apply_plasticity(pop, 100.0, 1.0, p, rng, step);
    CHECK(pop.size() == 3);
    CHECK(pop.peak_count == 3);
}

TEST_CASE("apply_plasticity: deterministic death removes the oldest non-Genesis agent") {
    PlasticityParams p;
    auto pop = AgentPopulation::initial();
    Rng rng(1);
    pop.agents.push_back(make_agent(AgentKind::Regulator, p.spawn, 1));
    pop.agents.push_back(make_agent(AgentKind::Sensor, p.spawn, 2));
    const auto events = apply_plasticity(pop, -10.0, 0.0, p, rng, 3);
    REQUIRE(events.size() == 1);
    CHECK(events[0].type == PlasticityEvent::Type::Death);
    CHECK(events[0].kind == AgentKind::Regulator);  // born at step 1, oldest removable
    REQUIRE(pop.size() == 2);
    CHECK(pop.agents[0].kind == AgentKind::Genesis);
    CHECK(pop.agents[1].kind == AgentKind::Sensor);
}

TEST_CASE("apply_plasticity: Genesis is never removed") {
    PlasticityParams p;
    SECTION("deterministic") {
        auto pop = AgentPopulation::initial();
        Rng rng(1);
        for (int step = 0; step < 20; ++step) apply_plasticity(pop, -100.0, 0.0, p, rng, step);
        REQUIRE(pop.size() == 1);
        CHECK(pop.agents[0].kind == AgentKind::Genesis);
    }
    SECTION("stochastic, survival near zero") {
        p.mode = PlasticityMode::Stochastic;
        auto pop = AgentPopulation::initial();
        Rng rng(1);
        pop.agents.push_back(make_agent(AgentKind::Sensor, p.spawn, 0));
        for (int step = 0; step < 50; ++step) apply_plasticity(pop, -100.0, 0.0, p, rng, step);
        REQUIRE(pop.size() >= 1);
        CHECK(pop.agents[0].kind == AgentKind::Genesis);
    }
}

TEST_CASE("apply_plasticity: stochastic mode is deterministic under a fixed seed") {
    PlasticityParams p;
    p.mode = PlasticityMode::Stochastic;
    auto run = [&](std::uint64_t seed) {
        auto pop = AgentPopulation::initial();
        Rng rng(seed);
        std::vector<PlasticityEvent> log;
        Rng energy_rng(99);
        for (int step = 0; step < 300; ++step) {
            const double energy = 12.0 * energy_rng.normal();
            const auto ev = apply_plasticity(pop, energy, 0.0, p, rng, step);
            log.insert(log.end(), ev.begin(), ev.end());
        }
        return std::pair{log, pop.size()};
    };
    const auto [log_a, n_a] = run(5);
    const auto [log_b, n_b] = run(5);
    REQUIRE(log_a.size() == log_b.size());
    CHECK(n_a == n_b);
    for (std::size_t i = 0; i < log_a.size(); ++i) {
        CHECK(log_a[i].type == log_b[i].type);
        CHECK(log_a[i].kind == log_b[i].kind);
    }
    CHECK_FALSE(log_a.empty());
}

TEST_CASE("apply_plasticity: population bounds hold under random driving") {
    PlasticityParams p;
    p.n_max = 8;
    for (PlasticityMode mode : {PlasticityMode::Deterministic, PlasticityMode::Stochastic}) {
        p.mode = mode;
        auto pop = AgentPopulation::initial();
        Rng rng(17);
        Rng drive(23);
        int births_this_step = 0;
        for (int step = 0; step < 2000; ++step) {
            const auto ev = apply_plasticity(pop, 20.0 * drive.normal(), drive.normal(), p, rng, step);
            REQUIRE(pop.size() >= 1);
            REQUIRE(pop.size() <= p.n_max);
            if (mode == PlasticityMode::Deterministic) {
                births_this_step = 0;
                for (const auto& e : ev)
                    if (e.type == PlasticityEvent::Type::Birth) ++births_this_step;
                CHECK(births_this_step <= 1);
                CHECK(ev.size() <= 1);  // at most one birth and one death per step
            }
            int genesis = 0;
            for (const auto& a : pop.agents) genesis += a.kind == AgentKind::Genesis ? 1 : 0;
            REQUIRE(genesis == 1);
        }
    }
}

TEST_CASE("make_agent assigns the spawn parameters of its kind") {
    SpawnParams sp;
    sp.sensor_sigma = 0.07;
    sp.regulator_kp = 0.4;
    sp.regulator_kd = 0.2;
    sp.catalyst_lambda = 0.15;
    CHECK(make_agent(AgentKind::Sensor, sp, 3).sigma == 0.07);
    const Agent r = make_agent(AgentKind::Regulator, sp, 4);
    CHECK(r.k_p == 0.4);
    CHECK(r.k_d == 0.2);
    CHECK(r.birth_step == 4);
    CHECK(make_agent(AgentKind::Catalyst, sp, 5).lambda_c == 0.15);
}
