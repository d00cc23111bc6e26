#ifndef SWITCHLAG_TESTS_BUILDERS_HPP
#define SWITCHLAG_TESTS_BUILDERS_HPP

// Shorthand constructors for problem instances used across the test suite.

#include <initializer_list>

#include "switchlag/problem.hpp"

namespace builders {

using namespace switchlag;

inline OpMode op(std::initializer_list<int> cs) {
    OpMode m;
    for (int c : cs) m.comps.push_back(int8_t(c));
    return m;
}

inline SwitchMode sw(std::initializer_list<int> bs) {
    SwitchMode m;
    for (int b : bs) m.bits.push_back(int8_t(b));
    return m;
}

inline RewardTerm on_indicator(int plant, double w) {
    RewardTerm t;
    t.kind = RewardTerm::Kind::OnIndicator;
    t.plant = plant;
    t.value = w;
    return t;
}

inline RewardTerm constant_term(double v) {
    RewardTerm t;
    t.kind = RewardTerm::Kind::Constant;
    t.value = v;
    return t;
}

inline RewardTerm ramp_term(int plant, double w, double ramp) {
    RewardTerm t;
    t.kind = RewardTerm::Kind::RampInZ;
    t.plant = plant;
    t.value = w;
    t.ramp = ramp;
    return t;
}

inline RewardTerm price_curve(int plant, std::vector<double> ts, std::vector<double> vs) {
    RewardTerm t;
    t.kind = RewardTerm::Kind::OnPriceCurve;
    t.plant = plant;
    t.curve.ts = std::move(ts);
    t.curve.vs = std::move(vs);
    return t;
}

/// Single plant, constant startup/failure rates, psi = 1{on}, Upsilon = 0.
inline ProblemSpec single_plant(double r_start, double r_fail, double cost, double T = 1.0,
                                int n_t = 100) {
    ProblemSpec s;
    s.name = "single_plant_test";
    s.horizon = T;
    s.n_plants = 1;
    s.tables = ModeTables::build(1);
    PerPlantIntensity pp;
    pp.startup = {RateFn::constant(r_start)};
    pp.fail = {r_fail};
    s.intensity = IntensityModel::per_plant(std::move(pp), s.tables);
    s.rewards.psi_terms = {on_indicator(0, 1.0)};
    s.costs = SwitchCostSpec::constant(2, cost, 2 * cost);
    s.n_t = n_t;
    s.nu_steps = 2;
    s.z_steps = 2;
    return s;
}

}  // namespace builders

#endif  // SWITCHLAG_TESTS_BUILDERS_HPP
