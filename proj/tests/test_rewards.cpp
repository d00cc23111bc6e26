#include <catch2/catch_amalgamated.hpp>

#include "switchlag/objective.hpp"
#include "switchlag/rewards.hpp"
#include "support/builders.hpp"
#include "support/oracles.hpp"

using namespace switchlag;
using builders::op;
using builders::sw;
using Catch::Approx;

TEST_CASE("piecewise linear evaluation and exact integral") {
    PiecewiseLinear pw{{0.0, 0.5, 1.0}, {1.0, 3.0, 0.0}};
    REQUIRE(pw(0.25) == Approx(2.0));
    REQUIRE(pw(-1.0) == Approx(1.0));
    REQUIRE(pw(2.0) == Approx(0.0));
    const double quad =
        oracles::adaptive_simpson([&](double t) { return pw(t); }, 0.1, 0.9, 1e-12);
    REQUIRE(pw.integral(0.1, 0.9) == Approx(quad).margin(1e-10));
}

TEST_CASE("reward term integrals agree with quadrature") {
    std::mt19937_64 rng(11);
    const double T = 1.0;
    std::vector<RewardTerm> terms = {
        builders::constant_term(0.7),
        builders::on_indicator(0, 2.0),
        builders::ramp_term(0, 1.5, 0.4),
        builders::ramp_term(1, -0.8, 2.5),  // ramp longer than the horizon
        builders::price_curve(1, {0.0, 0.3, 0.8, 1.0}, {1.0, -2.0, 0.5, 0.5}),
    };
    RewardTerm lin;
    lin.kind = RewardTerm::Kind::LinearInT;
    lin.value = -1.3;
    terms.push_back(lin);
    RewardTerm poly;
    poly.kind = RewardTerm::Kind::PolyInX;
    poly.coeffs = {0.2, -1.0, 0.5};
    terms.push_back(poly);

    for (int trial = 0; trial < 50; ++trial) {
        OpMode a = op({uniform01(rng) < 0.5 ? 1 : 0, uniform01(rng) < 0.5 ? 1 : -1});
        double t0 = uniform01(rng) * 0.8;
        double t1 = t0 + uniform01(rng) * (T - t0);
        double x = 2.0 * uniform01(rng) - 1.0;
        std::vector<double> z0 = {a.comps[0] == 1 ? uniform01(rng) * 0.9 : 0.0,
                                  a.comps[1] == 1 ? uniform01(rng) * 0.9 : 0.0};
        for (const auto& term : terms) {
            auto z_at = [&](double t) {
                std::vector<double> z(2);
                for (int i = 0; i < 2; ++i)
                    z[i] = a.comps[i] == 1 ? std::min(z0[i] + (t - t0), T) : 0.0;
                return z;
            };
            double quad = oracles::adaptive_simpson(
                [&](double t) { return term.eval(a, t, x, z_at(t)); }, t0, t1, 1e-11);
            REQUIRE(term.integrate(a, x, z0, t0, t1, T) == Approx(quad).margin(1e-8));
        }
    }
}

TEST_CASE("no-free-loop accepts constant positive costs") {
    auto tables = ModeTables::build(2);
    auto model = IntensityModel::per_plant(
        {{RateFn::constant(1.0), RateFn::constant(1.0)}, {0.5, 0.5}}, tables);
    RewardSpec rewards;
    rewards.upsilon_terms = {builders::constant_term(0.0)};
    auto costs = SwitchCostSpec::constant(4, 1.0, 1.0);
    ValidationOptions opt;
    auto report = validate_assumptions(tables, model, rewards, costs, opt);
    REQUIRE(report.find("ii.b")->pass);
    REQUIRE(report.find("ii.b")->values.at("min_cycle_cost") == Approx(2.0));
    REQUIRE(report.find("iii")->pass);  // cost 1 at T, upsilon constant
    REQUIRE(report.all_pass);
}

TEST_CASE("negative switching cost fails with a witness") {
    auto tables = ModeTables::build(1);
    auto model = IntensityModel::per_plant({{RateFn::constant(1.0)}, {0.5}}, tables);
    RewardSpec rewards;
    auto costs = SwitchCostSpec::constant(2, 0.5, 0.1);
    costs.cost_fn(tables.switch_index(sw({1})), tables.switch_index(sw({0}))) =
        PiecewiseLinear::constant(-0.5);
    auto report = validate_assumptions(tables, model, rewards, costs, ValidationOptions{});
    const auto* e = report.find("ii.a");
    REQUIRE_FALSE(e->pass);
    REQUIRE(e->witness.find("(1)->(0)") != std::string::npos);
    REQUIRE_FALSE(report.all_pass);
}

TEST_CASE("zero costs break the loop and terminal assumptions") {
    auto tables = ModeTables::build(1);
    auto model = IntensityModel::per_plant({{RateFn::constant(1.0)}, {0.5}}, tables);
    RewardSpec rewards;  // upsilon == 0
    auto costs = SwitchCostSpec::constant(2, 0.0, 0.01);
    auto report = validate_assumptions(tables, model, rewards, costs, ValidationOptions{});
    REQUIRE_FALSE(report.find("ii.b")->pass);
    REQUIRE_FALSE(report.find("iii")->pass);
}

TEST_CASE("declared rate bound below the derived one fails") {
    auto tables = ModeTables::build(1);
    auto model = IntensityModel::per_plant({{RateFn::constant(3.0)}, {0.5}}, tables);
    RewardSpec rewards;
    auto costs = SwitchCostSpec::constant(2, 0.5, 1.0);
    ValidationOptions opt;
    opt.declared_rate_bound = 2.0;
    auto report = validate_assumptions(tables, model, rewards, costs, opt);
    REQUIRE_FALSE(report.find("iv")->pass);
}

TEST_CASE("piecewise-constant startup rates are flagged as not nu-certifiable") {
    auto tables = ModeTables::build(1);
    auto model = IntensityModel::per_plant(
        {{RateFn::piecewise({0.0, 0.5}, {1.0, 4.0})}, {0.5}}, tables);
    RewardSpec rewards;
    auto costs = SwitchCostSpec::constant(2, 0.5, 1.0);
    auto report = validate_assumptions(tables, model, rewards, costs, ValidationOptions{});
    const auto* e = report.find("iv");
    REQUIRE(e->pass);
    REQUIRE_FALSE(e->certified);
}

TEST_CASE("normalization is the identity for non-negative rewards") {
    auto tables = ModeTables::build(1);
    RewardSpec rewards;
    rewards.psi_terms = {builders::on_indicator(0, 1.0)};
    rewards.upsilon_terms = {builders::constant_term(0.5)};
    auto shift = normalize(tables, rewards, NormalizationGrid{1.0});
    REQUIRE(shift.is_identity());
    REQUIRE(shift.constant == 0.0);
}

TEST_CASE("constant negative terminal reward shifts by its minimum") {
    auto tables = ModeTables::build(1);
    RewardSpec rewards;
    rewards.upsilon_terms = {builders::constant_term(-3.0)};
    auto shift = normalize(tables, rewards, NormalizationGrid{1.0});
    REQUIRE(shift.min_upsilon == Approx(-3.0));
    REQUIRE(shift.constant == Approx(-3.0));
    std::vector<double> z{0.0};
    REQUIRE(rewards.upsilon(op({0}), 0.0, z) - shift.min_upsilon == Approx(0.0));
}

TEST_CASE("linear-in-t running reward integrates to -T^2/2") {
    auto tables = ModeTables::build(1);
    RewardSpec rewards;
    RewardTerm lin;
    lin.kind = RewardTerm::Kind::LinearInT;
    lin.value = -1.0;
    rewards.psi_terms = {lin};
    auto shift = normalize(tables, rewards, NormalizationGrid{1.0});
    REQUIRE(shift.constant == Approx(-0.5).margin(1e-12));
    // shifted psi vanishes along the minimum
    std::vector<double> z{0.0};
    for (double t : {0.0, 0.33, 0.7, 1.0})
        REQUIRE(rewards.psi(op({0}), t, 0.0, z) - shift.min_psi(t) == Approx(0.0).margin(1e-12));
}

TEST_CASE("objective of the empty problem is exactly zero") {
    auto spec = builders::single_plant(2.0, 1.0, 0.0);
    spec.rewards.psi_terms.clear();
    auto grid = spec.grid();
    auto est = evaluate_objective(spec, grid, HybridState::initial(spec.tables), {}, 200, 5, 1);
    REQUIRE(est.mean == 0.0);
    REQUIRE(est.std_error == 0.0);
}

TEST_CASE("objective matches the occupation oracle, minus switching costs") {
    auto spec = builders::single_plant(2.0, 1.0, 0.3);
    auto grid = spec.grid();
    const double exact = oracles::occupation_closed_form(2.0, 1.0, 1.0);

    Control u = {{0.0, sw({1})}};
    auto est = evaluate_objective(spec, grid, HybridState::initial(spec.tables), u, 100000, 2024, 2);
    REQUIRE(std::abs(est.mean - (exact - 0.3)) < 3 * est.std_error);

    // and the free version
    spec.costs = SwitchCostSpec::constant(2, 0.0, 0.01);
    auto est2 = evaluate_objective(spec, grid, HybridState::initial(spec.tables), u, 100000, 2024, 2);
    REQUIRE(std::abs(est2.mean - exact) < 3 * est2.std_error);
}

TEST_CASE("deterministic instance reproduces exact quadrature") {
    // all rates zero: the operation mode never changes, so the payoff is a
    // plain integral plus terminal minus the two switch costs
    auto spec = builders::single_plant(0.0, 0.0, 0.125);
    spec.rewards.psi_terms = {builders::constant_term(0.4)};
    RewardTerm lin;
    lin.kind = RewardTerm::Kind::LinearInT;
    lin.value = 2.0;
    spec.rewards.psi_terms.push_back(lin);
    spec.rewards.upsilon_terms = {builders::constant_term(0.75)};
    auto grid = spec.grid();

    Control u = {{0.25, sw({1})}, {0.5, sw({0})}};
    auto est = evaluate_objective(spec, grid, HybridState::initial(spec.tables), u, 3, 1, 1);
    const double expected = 0.4 + 1.0 + 0.75 - 2 * 0.125;
    REQUIRE(est.mean == Approx(expected).margin(1e-8));
    REQUIRE(est.std_error == Approx(0.0).margin(1e-12));
}

TEST_CASE("normalization shifts the objective by a control-independent constant") {
    auto spec = builders::single_plant(2.0, 1.0, 0.1);
    spec.rewards.psi_terms = {builders::on_indicator(0, -2.0)};  // negative running reward
    spec.rewards.upsilon_terms = {builders::constant_term(-1.0)};
    auto grid = spec.grid();
    auto shift = normalize(spec.tables, spec.rewards, spec.normalization_grid());
    REQUIRE(shift.constant == Approx(-2.0 * 1.0 - 1.0));

    ProblemSpec shifted = spec;
    shifted.rewards.psi_terms.push_back(builders::constant_term(-shift.min_psi(0.0)));
    shifted.rewards.upsilon_terms.push_back(builders::constant_term(-shift.min_upsilon));

    Control u1 = {{0.0, sw({1})}};
    Control u2 = {{0.5, sw({1})}};
    const size_t n = 20000;
    auto orig1 = evaluate_objective(spec, grid, HybridState::initial(spec.tables), u1, n, 9, 1);
    auto orig2 = evaluate_objective(spec, grid, HybridState::initial(spec.tables), u2, n, 9, 1);
    auto shif1 = evaluate_objective(shifted, grid, HybridState::initial(spec.tables), u1, n, 9, 1);
    auto shif2 = evaluate_objective(shifted, grid, HybridState::initial(spec.tables), u2, n, 9, 1);

    REQUIRE(orig1.mean == Approx(shif1.mean + shift.constant).margin(1e-10));
    REQUIRE(orig2.mean == Approx(shif2.mean + shift.constant).margin(1e-10));
    REQUIRE(((orig1.mean > orig2.mean) == (shif1.mean > shif2.mean)));
}

TEST_CASE("standard error scales like one over root n") {
    auto spec = builders::single_plant(2.0, 1.0, 0.0);
    auto grid = spec.grid();
    HybridState start = HybridState::initial(spec.tables);
    start.b = sw({1});
    auto e3 = evaluate_objective(spec, grid, start, {}, 1000, 31, 2);
    auto e4 = evaluate_objective(spec, grid, start, {}, 10000, 31, 2);
    auto e5 = evaluate_objective(spec, grid, start, {}, 100000, 31, 2);
    const double root10 = std::sqrt(10.0);
    REQUIRE(e3.std_error / e4.std_error > root10 / 1.5);
    REQUIRE(e3.std_error / e4.std_error < root10 * 1.5);
    REQUIRE(e4.std_error / e5.std_error > root10 / 1.5);
    REQUIRE(e4.std_error / e5.std_error < root10 * 1.5);
}
