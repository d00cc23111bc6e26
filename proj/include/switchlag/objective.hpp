#ifndef SWITCHLAG_OBJECTIVE_HPP
#define SWITCHLAG_OBJECTIVE_HPP

/**
 * @file objective.hpp
 * @brief Monte Carlo evaluation of the switching objective
 *        J(u) = E[ Upsilon_{a_T}(x_T, z_T) + int psi_{a_s}(s, x_s, z_s) ds
 *                  - sum_j c(b_{j-1}, b_j, tau_j) ].
 *
 * Running rewards integrate in closed form between events. When a factor
 * is present its node steps at grid times (the same chain the solver
 * uses), and path payoffs are evaluated against the piecewise-constant
 * node values.
 */

#include <cmath>
#include <vector>

#include "switchlag/dynamics.hpp"
#include "switchlag/problem.hpp"
#include "switchlag/util.hpp"

namespace switchlag {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    size_t n_paths = 0;
};

/// Simulate one controlled path on [start.t, T]. With a factor, start.t
/// must sit on the time grid; the factor node is piecewise constant per
/// grid step and recorded per slice in path.factor_nodes.
inline HybridPath simulate_controlled_path(const ProblemSpec& spec, const GridSpec& grid,
                                           const HybridState& start, const Control& u,
                                           std::mt19937_64& rng, uint64_t seed,
                                           const std::vector<FactorGrid::KernelRow>* fkernel) {
    const double T = spec.horizon;
    check_state(start, T);
    check_control(u, start.b, T);

    HybridPath path;
    path.start = start;
    path.seed = seed;
    HybridState s = start;

    if (!fkernel) {
        for (const auto& action : u) {
            simulate_chain_into(spec.intensity, spec.tables, s, action.time, T, path.events, rng);
            apply_switch(spec.tables, s, action.target, T, path.events);
        }
        simulate_chain_into(spec.intensity, spec.tables, s, T, T, path.events, rng);
        return path;
    }

    const double dt = grid.dt();
    int slice = static_cast<int>(std::llround(s.t / dt));
    if (std::abs(s.t - slice * dt) > 1e-12 * T)
        throw std::invalid_argument("simulate_controlled_path: factor paths must start on the grid");
    path.factor_nodes.assign(grid.n_t + 1, -1);
    path.factor_nodes[slice] = s.x_node;

    size_t ui = 0;
    for (int i = slice; i < grid.n_t; ++i) {
        const double t_end = (i + 1) * dt;
        const double x = grid.factor->nodes[s.x_node];
        while (ui < u.size() && u[ui].time <= t_end) {
            simulate_chain_into(spec.intensity, spec.tables, s, u[ui].time, T, path.events, rng, x);
            apply_switch(spec.tables, s, u[ui].target, T, path.events);
            ++ui;
        }
        simulate_chain_into(spec.intensity, spec.tables, s, t_end, T, path.events, rng, x);
        const auto& row = (*fkernel)[s.x_node];
        double r = uniform01(rng), acc = 0.0;
        for (int j = 0; j < 3; ++j) {
            acc += row.p[j];
            if (r < acc || j == 2) {
                s.x_node = row.idx[j];
                break;
            }
        }
        path.factor_nodes[i + 1] = s.x_node;
    }
    return path;
}

/// Fill the payoff fields of a completed path (original units).
inline void accumulate_payoffs(const ProblemSpec& spec, const GridSpec& grid, HybridPath& path) {
    const double T = spec.horizon;
    const bool has_factor = !path.factor_nodes.empty();
    const double dt = grid.dt();

    double running = 0.0, cost = 0.0;
    double t = path.start.t;
    OpMode a = path.start.a;
    SwitchMode b = path.start.b;
    std::vector<double> z = path.start.z;
    int x_node = path.start.x_node;

    auto x_at = [&](double time) {
        if (!has_factor) return 0.0;
        int s = std::min(grid.n_t, static_cast<int>(std::floor(time / dt + 1e-12)));
        return grid.factor->nodes[path.factor_nodes[s] >= 0 ? path.factor_nodes[s] : x_node];
    };

    // Integrate one constant-mode stretch, splitting at grid times when the
    // factor makes x piecewise constant.
    auto integrate_to = [&](double t_to) {
        while (t < t_to) {
            double seg_end = t_to;
            if (has_factor) {
                double next_grid = (std::floor(t / dt + 1e-12) + 1.0) * dt;
                seg_end = std::min(seg_end, next_grid);
            }
            running += spec.rewards.psi_integral(a, x_at(t), z, t, seg_end, T);
            z = step_theta(z, a, seg_end - t, T);
            t = seg_end;
        }
    };

    for (const auto& ev : path.events) {
        integrate_to(ev.time);
        if (ev.kind == EventKind::Switch)
            cost += spec.costs(spec.tables.switch_index(b), spec.tables.switch_index(ev.b), ev.time);
        a = ev.a;
        b = ev.b;
        z = ev.z;
    }
    integrate_to(T);

    path.payoff_running = running;
    path.cost_switch = cost;
    path.payoff_terminal = spec.rewards.upsilon(a, x_at(T), z);
}

/// Sample mean and standard error of J(u) over n_paths independent paths.
/// Reduction order is fixed (pairwise tree sum), so results do not depend
/// on the thread count.
inline McEstimate evaluate_objective(const ProblemSpec& spec, const GridSpec& grid,
                                     const HybridState& start, const Control& u, size_t n_paths,
                                     uint64_t base_seed, int threads = 1) {
    std::vector<FactorGrid::KernelRow> fkernel;
    const std::vector<FactorGrid::KernelRow>* fk = nullptr;
    if (grid.factor) {
        fkernel = grid.factor->kernel(grid.dt());
        fk = &fkernel;
    }

    std::vector<double> payoffs(n_paths);
    parallel_for(n_paths, threads, [&](size_t i) {
        auto rng = make_path_rng(base_seed, i);
        HybridPath p = simulate_controlled_path(spec, grid, start, u, rng, base_seed, fk);
        accumulate_payoffs(spec, grid, p);
        payoffs[i] = p.total_payoff();
    });

    McEstimate est;
    est.n_paths = n_paths;
    est.mean = tree_sum(payoffs) / double(n_paths);
    if (n_paths > 1) {
        std::vector<double> sq(n_paths);
        for (size_t i = 0; i < n_paths; ++i) {
            double d = payoffs[i] - est.mean;
            sq[i] = d * d;
        }
        est.std_error = std::sqrt(tree_sum(sq) / (double(n_paths) * double(n_paths - 1)));
    }
    return est;
}

}  // namespace switchlag

#endif  // SWITCHLAG_OBJECTIVE_HPP
