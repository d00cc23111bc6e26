#ifndef SWITCHLAG_PROBLEM_HPP
#define SWITCHLAG_PROBLEM_HPP

/// @file problem.hpp
/// @brief Complete problem instance: horizon, mode tables, intensities,
///        rewards, switching costs, optional factor and run parameters.

#include <cstdint>
#include <optional>
#include <string>

#include "switchlag/dynamics.hpp"
#include "switchlag/grid.hpp"
#include "switchlag/intensity.hpp"
#include "switchlag/modes.hpp"
#include "switchlag/rewards.hpp"

namespace switchlag {

struct FactorConfig {
    std::vector<double> drift_coeffs;
    std::vector<double> vol_coeffs;
    double x_min = -1.0;
    double x_max = 1.0;
    int n_nodes = 3;
    double x0 = 0.0;
};

struct SolverParams {
    double tol = -1.0;  // < 0: use 1e-6 * (1 + sup v0)
    int k_max = -1;     // < 0: use 2^n * n_t
};

struct EvaluationParams {
    int n_paths = 10000;
    double delta_switch = 1e-9;
};

struct ProblemSpec {
    std::string name;
    uint64_t seed = 1;
    double horizon = 1.0;
    int n_plants = 1;
    ModeTables tables = ModeTables::build(1);
    IntensityModel intensity;
    std::optional<double> declared_rate_bound;
    RewardSpec rewards;
    SwitchCostSpec costs;
    std::optional<FactorConfig> factor;

    int n_t = 100;
    int nu_steps = 4;
    int z_steps = 4;
    SolverParams solver;
    EvaluationParams evaluation;
    std::optional<HybridState> start;

    GridSpec grid() const {
        GridSpec g;
        g.horizon = horizon;
        g.n_t = n_t;
        g.nu_steps = nu_steps;
        g.z_steps = z_steps;
        if (factor)
            g.factor = FactorGrid::make(factor->x_min, factor->x_max, factor->n_nodes,
                                        factor->drift_coeffs, factor->vol_coeffs, factor->x0);
        return g;
    }

    HybridState initial_state(const GridSpec& g) const {
        if (start) {
            HybridState s = *start;
            if (g.factor && s.x_node < 0) s.x_node = g.factor->x0_node;
            check_state(s, horizon);
            return s;
        }
        return HybridState::initial(tables, g.factor ? g.factor->x0_node : -1);
    }

    ValidationOptions validation_options() const {
        ValidationOptions opt;
        opt.horizon = horizon;
        opt.seed = seed;
        opt.declared_rate_bound = declared_rate_bound;
        if (factor) {
            opt.x_values.clear();
            auto fg = FactorGrid::make(factor->x_min, factor->x_max, factor->n_nodes,
                                       factor->drift_coeffs, factor->vol_coeffs, factor->x0);
            opt.x_values = fg.nodes;
        }
        return opt;
    }

    NormalizationGrid normalization_grid() const {
        NormalizationGrid g;
        g.horizon = horizon;
        g.t_samples = std::max(busy_t_samples(), 65);
        if (factor) {
            auto fg = FactorGrid::make(factor->x_min, factor->x_max, factor->n_nodes,
                                       factor->drift_coeffs, factor->vol_coeffs, factor->x0);
            g.x_values = fg.nodes;
        }
        return g;
    }

private:
    int busy_t_samples() const {
        // Resolve every reward-curve knot when sampling minima over time.
        int knots = 0;
        for (const auto& term : rewards.psi_terms)
            knots += static_cast<int>(term.curve.ts.size());
        return 2 * knots + 1;
    }
};

}  // namespace switchlag

#endif  // SWITCHLAG_PROBLEM_HPP
