#include <catch2/catch_amalgamated.hpp>

#include "switchlag/dynamics.hpp"
#include "switchlag/objective.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace switchlag;
using builders::op;
using builders::sw;
using Catch::Approx;

namespace {

double occupied_time(const HybridPath& path, int plant, double T) {
    double acc = 0.0, t = path.start.t;
    int8_t a = path.start.a.comps[plant];
    for (const auto& ev : path.events) {
        if (a == 1) acc += ev.time - t;
        t = ev.time;
        a = ev.a.comps[plant];
    }
    if (a == 1) acc += T - t;
    return acc;
}

IntensityModel tabular_single_rate(const ModeTables& t, double rate) {
    TabularIntensity tab;
    tab.rates[{t.switch_code(sw({1})), t.op_code(op({0})), t.op_code(op({1}))}] = rate;
    return IntensityModel::tabular(std::move(tab), t);
}

}  // namespace

TEST_CASE("theta accrues on operating components and clamps elsewhere") {
    const double T = 1.0;
    REQUIRE(step_theta({0.3}, op({1}), 0.2, T) == std::vector<double>{0.5});
    REQUIRE(step_theta({0.0}, op({0}), 0.5, T) == std::vector<double>{0.0});
    REQUIRE(step_theta({T - 0.1}, op({1}), 0.3, T) == std::vector<double>{1.0});
    REQUIRE_THROWS_AS(step_theta({0.0}, op({1}), -0.1, T), std::invalid_argument);
}

TEST_CASE("activation times follow the switch recursion") {
    REQUIRE(update_activation({0.2}, sw({1}), sw({1}), 0.5) == std::vector<double>{0.2});
    REQUIRE(update_activation({0.0}, sw({0}), sw({1}), 0.5) == std::vector<double>{0.5});
    REQUIRE(update_activation({0.2, 0.0}, sw({1, 0}), sw({0, 1}), 0.7) ==
            std::vector<double>{0.0, 0.7});
    REQUIRE_THROWS_AS(update_activation({0.0}, sw({0}), sw({1, 1}), 0.1),
                      std::invalid_argument);
}

TEST_CASE("holding time at constant rate 1 is exponential") {
    auto tables = ModeTables::build(1);
    auto model = tabular_single_rate(tables, 1.0);
    HybridState start = HybridState::initial(tables);
    start.b = sw({1});

    const size_t n = 100000;
    const double t_probe = std::log(2.0);
    size_t no_jump = 0;
    for (size_t i = 0; i < n; ++i) {
        auto rng = make_path_rng(42, i);
        auto path = simulate_chain(model, tables, start, t_probe, 1.0, rng);
        if (path.events.empty()) ++no_jump;
    }
    double p_hat = double(no_jump) / double(n);
    double sigma = std::sqrt(0.5 * 0.5 / double(n));
    REQUIRE(std::abs(p_hat - 0.5) < 3 * sigma);
}

TEST_CASE("occupation time matches the closed form and quadrature") {
    const double rs = 2.0, rf = 1.0, T = 1.0;
    const double exact = oracles::occupation_closed_form(rs, rf, T);
    REQUIRE(exact == Approx((1 - std::exp(-1.0)) * (1 - std::exp(-1.0))).epsilon(1e-12));
    const double quad = oracles::adaptive_simpson(
        [&](double s) { return oracles::on_probability(rs, rf, s); }, 0.0, T, 1e-10);
    REQUIRE(quad == Approx(exact).epsilon(1e-8));

    auto spec = builders::single_plant(rs, rf, 0.0);
    HybridState start = HybridState::initial(spec.tables);
    start.b = sw({1});

    const size_t n = 100000;
    std::vector<double> occ(n);
    for (size_t i = 0; i < n; ++i) {
        auto rng = make_path_rng(7, i);
        auto path = simulate_chain(spec.intensity, spec.tables, start, T, T, rng);
        occ[i] = occupied_time(path, 0, T);
    }
    double mean = tree_sum(occ) / double(n);
    double var = 0.0;
    for (double v : occ) var += (v - mean) * (v - mean);
    double se = std::sqrt(var / double(n) / double(n - 1));
    REQUIRE(std::abs(mean - exact) < 3 * se);
}

TEST_CASE("absorbing starts never jump") {
    auto spec = builders::single_plant(2.0, 1.0, 0.0);
    HybridState start = HybridState::initial(spec.tables);
    start.a = op({-1});
    start.b = sw({1});
    auto rng = make_path_rng(1, 1);
    auto path = simulate_chain(spec.intensity, spec.tables, start, 1.0, 1.0, rng);
    REQUIRE(path.events.empty());
}

TEST_CASE("controlled paths keep the hybrid-system invariants") {
    auto tables = ModeTables::build(2);
    PerPlantIntensity pp;
    pp.startup = {RateFn::affine_capped(0.5, 3.0, 4.0), RateFn::piecewise({0.0, 0.3}, {1.0, 5.0})};
    pp.fail = {1.5, 0.7};
    auto model = IntensityModel::per_plant(std::move(pp), tables);
    const double T = 1.0;

    Control u = {{0.0, sw({1, 0})}, {0.3, sw({1, 1})}, {0.7, sw({0, 1})}};

    for (uint64_t seed = 0; seed < 200; ++seed) {
        auto rng = make_path_rng(99, seed);
        auto path = apply_control(model, tables, HybridState::initial(tables), u, T, rng);

        int fails = 0;
        OpMode a = path.start.a;
        std::vector<double> z = path.start.z;
        double t = path.start.t;
        for (const auto& ev : path.events) {
            // xi >= alpha and failure permanence
            for (int i = 0; i < 2; ++i) {
                REQUIRE(ev.a.comps[i] <= ev.b.bits[i]);
                if (a.comps[i] == -1) REQUIRE(ev.a.comps[i] == -1);
            }
            int f = 0;
            for (int i = 0; i < 2; ++i) f += ev.a.comps[i] == -1;
            REQUIRE(f >= fails);
            fails = f;

            // theta reconstruction from the previous event
            auto z_rebuilt = clamp_z(step_theta(z, a, ev.time - t, T), ev.a, T);
            for (int i = 0; i < 2; ++i) REQUIRE(std::abs(z_rebuilt[i] - ev.z[i]) < 1e-12);

            a = ev.a;
            z = ev.z;
            t = ev.time;
        }
    }
}

TEST_CASE("identical seeds give bit-identical paths") {
    auto spec = builders::single_plant(2.0, 1.0, 0.0);
    Control u = {{0.25, sw({1})}};
    auto rng1 = make_path_rng(123, 5);
    auto rng2 = make_path_rng(123, 5);
    auto p1 = apply_control(spec.intensity, spec.tables, HybridState::initial(spec.tables), u, 1.0,
                            rng1);
    auto p2 = apply_control(spec.intensity, spec.tables, HybridState::initial(spec.tables), u, 1.0,
                            rng2);
    REQUIRE(p1.events.size() == p2.events.size());
    for (size_t i = 0; i < p1.events.size(); ++i) {
        REQUIRE(p1.events[i].time == p2.events[i].time);
        REQUIRE(p1.events[i].a == p2.events[i].a);
        REQUIRE(p1.events[i].z == p2.events[i].z);
    }
}

TEST_CASE("switching on at time zero matches starting switched on") {
    auto spec = builders::single_plant(2.0, 1.0, 0.0);
    HybridState direct = HybridState::initial(spec.tables);
    direct.b = sw({1});

    const size_t n = 50000;
    double occ_direct = 0.0, occ_control = 0.0;
    for (size_t i = 0; i < n; ++i) {
        auto rng = make_path_rng(1000, i);
        occ_direct +=
            occupied_time(simulate_chain(spec.intensity, spec.tables, direct, 1.0, 1.0, rng), 0, 1.0);
        auto rng2 = make_path_rng(2000, i);
        occ_control += occupied_time(
            apply_control(spec.intensity, spec.tables, HybridState::initial(spec.tables),
                          {{0.0, sw({1})}}, 1.0, rng2),
            0, 1.0);
    }
    REQUIRE(occ_direct / double(n) == Approx(occ_control / double(n)).margin(0.01));
}

TEST_CASE("deterministic instance with zero rates never transitions") {
    auto spec = builders::single_plant(0.0, 0.0, 0.0);
    auto rng = make_path_rng(3, 3);
    auto path = apply_control(spec.intensity, spec.tables, HybridState::initial(spec.tables),
                              {{0.5, sw({1})}}, 1.0, rng);
    REQUIRE(path.events.size() == 1);  // just the switch
    REQUIRE(path.events[0].kind == EventKind::Switch);
    REQUIRE(path.events[0].a == op({0}));
    REQUIRE(path.events[0].z == std::vector<double>{0.0});
}
