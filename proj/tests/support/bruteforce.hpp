#ifndef SWITCHLAG_TESTS_BRUTEFORCE_HPP
#define SWITCHLAG_TESTS_BRUTEFORCE_HPP

// Exhaustive strategy enumeration on the time grid, written as a direct
// recursion over reachable states with an explicit remaining-switch budget.
// No tensors, no interpolation, no Picard staging: the only shared code
// with the solver is the frozen-rate one-step kernel it is specified to
// share. Exponential in n_t; keep n_t <= 4.

#include <vector>

#include "switchlag/grid.hpp"
#include "switchlag/problem.hpp"

namespace bruteforce {

using namespace switchlag;

struct GridStrategyOracle {
    const ProblemSpec& spec;
    const GridSpec& grid;
    int max_switches;

    double root_value() const {
        HybridState s = HybridState::initial(spec.tables);
        return value(0, s.a, s.b, s.nu, s.z, max_switches);
    }

    double value(int t_idx, const OpMode& a, const SwitchMode& b, const std::vector<double>& nu,
                 const std::vector<double>& z, int switches_left) const {
        const double T = spec.horizon;
        if (t_idx == grid.n_t) return spec.rewards.upsilon(a, 0.0, z);
        const double dt = grid.dt();
        const double t = t_idx * dt;
        const ModeTables& tables = spec.tables;

        auto kernel = chain_kernel_matrix(spec.intensity, tables, b, t, 0.0, nu, dt);
        const auto& space = tables.op_space(b);
        const int k = static_cast<int>(space.size());
        const int row = tables.op_space_index(a, b);

        double cont = spec.rewards.psi(a, t, 0.0, z) * dt;
        std::vector<double> z_next(z.size());
        for (int j = 0; j < k; ++j) {
            const double pj = kernel[size_t(row) * k + j];
            if (pj == 0.0) continue;
            for (size_t c = 0; c < z.size(); ++c) {
                double grown = a.comps[c] == 1 ? std::min(z[c] + dt, T) : z[c];
                z_next[c] = space[j].comps[c] == 1 ? grown : 0.0;
            }
            cont += pj * value(t_idx + 1, space[j], b, nu, z_next, switches_left);
        }

        double best = cont;
        if (switches_left > 0) {
            std::vector<double> nu_post(nu.size()), z_post(z.size());
            for (const auto& beta : tables.switch_modes()) {
                if (beta == b) continue;
                OpMode a_post = post_switch_mode(a, beta);
                for (size_t c = 0; c < nu.size(); ++c) {
                    double fresh = std::max(0, int(beta.bits[c]) - int(b.bits[c]));
                    nu_post[c] = nu[c] * beta.bits[c] + t * fresh;
                    z_post[c] = a_post.comps[c] == 1 ? z[c] : 0.0;
                }
                double mv = -spec.costs(tables.switch_index(b), tables.switch_index(beta), t) +
                            value(t_idx, a_post, beta, nu_post, z_post, switches_left - 1);
                if (mv > best) best = mv;
            }
        }
        return best;
    }
};

}  // namespace bruteforce

#endif  // SWITCHLAG_TESTS_BRUTEFORCE_HPP
