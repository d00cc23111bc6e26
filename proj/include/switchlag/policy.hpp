#ifndef SWITCHLAG_POLICY_HPP
#define SWITCHLAG_POLICY_HPP

/**
 * @file policy.hpp
 * @brief Feedback switching strategy read off a converged value field, and
 *        its closed-loop Monte Carlo evaluation.
 *
 * The rule at state (t,x,nu,z,a,b): intervene when
 *     max_{beta != b} { -c(b,beta,t) + v(t,x,nu',z',(a∧beta,beta)) }
 *        >= v(t,x,nu,z,(a,b)) - delta_switch,
 * choosing the first maximizing beta in enumeration order. The rule is
 * queried at grid times, immediately after chain jumps, and after every
 * applied switch; it never fires at t = T. Interventions per path are
 * hard-capped by the no-free-loop bound ceil(sup v * m / eps) + m.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "switchlag/field.hpp"
#include "switchlag/objective.hpp"
#include "switchlag/problem.hpp"

namespace switchlag {

struct NotConverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct PolicyDecision {
    bool intervene = false;
    SwitchMode target;
    double intervention_value = 0.0;  // best -c + v(post-switch), shifted units
    double stay_value = 0.0;          // v at the current state, shifted units
};

class Policy {
public:
    Policy(const ProblemSpec& spec, const ValueField& field, double delta_switch)
        : spec_(&spec), field_(&field), delta_switch_(delta_switch) {}

    double delta_switch() const { return delta_switch_; }
    const ValueField& field() const { return *field_; }

    PolicyDecision decide(const HybridState& s) const {
        const ModeTables& tables = spec_->tables;
        const double T = spec_->horizon;
        PolicyDecision d;
        const int x = s.x_node < 0 ? 0 : s.x_node;
        d.stay_value = field_->interpolate_time(tables.pair_index(s.a, s.b), s.t, x, s.nu, s.z);
        if (s.t >= T * (1.0 - 1e-12)) return d;  // never at the terminal time

        const int from = tables.switch_index(s.b);
        double best = -std::numeric_limits<double>::infinity();
        const SwitchMode* best_beta = nullptr;
        std::vector<double> nu_post(s.nu.size()), z_post(s.z.size());
        for (const auto& beta : tables.switch_modes()) {
            if (beta == s.b) continue;
            OpMode a_post = post_switch_mode(s.a, beta);
            for (size_t c = 0; c < s.nu.size(); ++c) {
                double fresh = std::max(0, int(beta.bits[c]) - int(s.b.bits[c]));
                nu_post[c] = s.nu[c] * beta.bits[c] + s.t * fresh;
                z_post[c] = a_post.comps[c] == 1 ? std::min(s.z[c], T) : 0.0;
            }
            double v = -spec_->costs(from, tables.switch_index(beta), s.t) +
                       field_->interpolate_time(tables.pair_index(a_post, beta), s.t, x, nu_post,
                                                z_post);
            if (v > best) {
                best = v;
                best_beta = &beta;
            }
        }
        d.intervention_value = best;
        if (best_beta && best >= d.stay_value - delta_switch_) {
            d.intervene = true;
            d.target = *best_beta;
        }
        return d;
    }

private:
    const ProblemSpec* spec_;
    const ValueField* field_;
    double delta_switch_;
};

inline Policy extract_policy(const ProblemSpec& spec, const ValueField& field, double delta_switch,
                             bool force = false) {
    if (!field.converged() && !force)
        throw NotConverged("extract_policy: field not converged (pass force to override)");
    return Policy(spec, field, delta_switch);
}

/// No-free-loop intervention cap ceil(sup v * m / eps) + m in original units.
inline long intervention_cap(const ProblemSpec& spec, const ValueField& field) {
    const double eps = spec.costs.loop_epsilon;
    if (eps <= 0.0) return std::numeric_limits<long>::max() / 2;
    double sup_v = 0.0;
    const auto& off = field.offsets();
    double max_off = 0.0;
    for (size_t i = 0; i < off.size(); ++i) max_off = std::max(max_off, std::abs(off[i]));
    sup_v = field.max_abs() + max_off;
    const double m = double(spec.tables.switch_modes().size());
    return static_cast<long>(std::ceil(sup_v * m / eps)) + static_cast<long>(m);
}

struct EvaluationReport {
    double value_at_root = 0.0;
    double mc_estimate = 0.0;
    double mc_stderr = 0.0;
    double gap = 0.0;
    size_t n_paths = 0;
    uint64_t base_seed = 0;
    double delta_switch = 0.0;
    long intervention_cap = 0;
    long max_interventions = 0;
    bool cap_exceeded = false;
};

/// Simulate one feedback-controlled path. Returns the path; `n_switches`
/// and `wanted_beyond_cap` report intervention counts against `cap`.
inline HybridPath simulate_policy_path(const ProblemSpec& spec, const GridSpec& grid,
                                       const Policy& policy, const HybridState& start,
                                       std::mt19937_64& rng, uint64_t seed, long cap,
                                       const std::vector<FactorGrid::KernelRow>* fkernel,
                                       long* n_switches_out, bool* wanted_beyond_cap) {
    const double T = spec.horizon;
    const double dt = grid.dt();
    check_state(start, T);

    HybridPath path;
    path.start = start;
    path.seed = seed;
    HybridState s = start;

    int slice = static_cast<int>(std::llround(s.t / dt));
    if (std::abs(s.t - slice * dt) > 1e-12 * T)
        throw std::invalid_argument("simulate_policy_path: start time must sit on the grid");
    if (fkernel) {
        path.factor_nodes.assign(grid.n_t + 1, -1);
        path.factor_nodes[slice] = s.x_node;
    }

    long n_switches = 0;
    bool beyond = false;
    auto query = [&]() {
        while (true) {
            PolicyDecision d = policy.decide(s);
            if (!d.intervene) return;
            if (n_switches >= cap) {
                beyond = true;
                return;
            }
            apply_switch(spec.tables, s, d.target, T, path.events);
            ++n_switches;
        }
    };

    for (int i = slice; i < grid.n_t; ++i) {
        const double t_end = (i + 1) * dt;
        const double x = fkernel ? grid.factor->nodes[s.x_node] : 0.0;
        while (s.t < t_end) {
            query();
            auto jump = sample_next_jump(spec.intensity, spec.tables, s.a, s.b, s.nu, x, s.t, t_end,
                                         rng);
            if (!jump) {
                s.z = step_theta(s.z, s.a, t_end - s.t, T);
                s.t = t_end;
                break;
            }
            s.z = step_theta(s.z, s.a, jump->time - s.t, T);
            s.z = clamp_z(s.z, jump->to, T);
            s.a = jump->to;
            s.t = jump->time;
            path.events.push_back({s.t, EventKind::ChainJump, s.a, s.b, s.nu, s.z});
        }
        if (fkernel && i + 1 <= grid.n_t) {
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
    }

    if (n_switches_out) *n_switches_out = n_switches;
    if (wanted_beyond_cap) *wanted_beyond_cap = beyond;
    return path;
}

inline EvaluationReport evaluate_policy(const ProblemSpec& spec, const GridSpec& grid,
                                        const Policy& policy, const HybridState& start,
                                        size_t n_paths, uint64_t base_seed, int threads = 1) {
    std::vector<FactorGrid::KernelRow> fkernel;
    const std::vector<FactorGrid::KernelRow>* fk = nullptr;
    if (grid.factor) {
        fkernel = grid.factor->kernel(grid.dt());
        fk = &fkernel;
    }
    const long cap = intervention_cap(spec, policy.field());

    std::vector<double> payoffs(n_paths);
    std::vector<long> counts(n_paths);
    std::vector<uint8_t> beyond(n_paths, 0);
    parallel_for(n_paths, threads, [&](size_t i) {
        auto rng = make_path_rng(base_seed, i);
        long c = 0;
        bool over = false;
        HybridPath p =
            simulate_policy_path(spec, grid, policy, start, rng, base_seed, cap, fk, &c, &over);
        accumulate_payoffs(spec, grid, p);
        payoffs[i] = p.total_payoff();
        counts[i] = c;
        beyond[i] = over ? 1 : 0;
    });

    EvaluationReport rep;
    rep.n_paths = n_paths;
    rep.base_seed = base_seed;
    rep.delta_switch = policy.delta_switch();
    rep.intervention_cap = cap;
    rep.mc_estimate = tree_sum(payoffs) / double(n_paths);
    if (n_paths > 1) {
        std::vector<double> sq(n_paths);
        for (size_t i = 0; i < n_paths; ++i) {
            double d = payoffs[i] - rep.mc_estimate;
            sq[i] = d * d;
        }
        rep.mc_stderr = std::sqrt(tree_sum(sq) / (double(n_paths) * double(n_paths - 1)));
    }
    for (size_t i = 0; i < n_paths; ++i) {
        rep.max_interventions = std::max(rep.max_interventions, counts[i]);
        rep.cap_exceeded = rep.cap_exceeded || beyond[i];
    }
    const int root_pair = spec.tables.pair_index(start.a, start.b);
    rep.value_at_root = policy.field().original_value(root_pair, start.t,
                                                      start.x_node < 0 ? 0 : start.x_node, start.nu,
                                                      start.z);
    rep.gap = rep.mc_estimate - rep.value_at_root;
    return rep;
}

}  // namespace switchlag

#endif  // SWITCHLAG_POLICY_HPP
