#ifndef SWITCHLAG_SOLVER_HPP
#define SWITCHLAG_SOLVER_HPP

/**
 * @file solver.hpp
 * @brief Value-function computation by backward induction in time nested
 *        in a Picard iteration over the admissible intervention count.
 *
 * Stage k = 0 is the no-intervention expected reward. Stage k improves
 * stage k-1 through the intervention operator
 *     M v(t,x,nu,z,a,b) = max_{beta != b} { -c(b,beta,t)
 *          + v(t, x, nu', z ∧ clamp, (a ∧ beta, beta)) },
 * evaluated against the previous stage (strict Picard), so stage values
 * are pointwise nondecreasing in k. One-step transition laws are exact
 * exponentials of the generator with rates frozen at interval start;
 * interventions are allowed at grid times only.
 *
 * Within a time slice every (pair, x, nu, z) node is independent; slices
 * are computed in parallel across pairs. The previous-stage field is
 * read-only during a step.
 */

#include <cmath>
#include <limits>
#include <vector>

#include "switchlag/field.hpp"
#include "switchlag/grid.hpp"
#include "switchlag/problem.hpp"
#include "switchlag/util.hpp"

namespace switchlag {

struct SolveOptions {
    double tol = -1.0;  // < 0: 1e-6 * (1 + sup v0)
    int k_max = -1;     // < 0: 2^n * n_t
    int threads = 1;
    bool normalize = true;
    int end_index = -1;                        // < 0: grid.n_t
    const ValueField* terminal_from = nullptr;  // pseudo-terminal data at end_index
};

struct SolveDiagnostics {
    int k = 0;
    std::vector<double> deltas;
    bool converged = false;
    bool monotone_deltas = true;
    double sup_v0 = 0.0;
    double tol_used = 0.0;
    int k_max_used = 0;
};

struct SolveResult {
    ValueField field;
    SolveDiagnostics diag;
};

namespace detail {

/// Per-slice cache of chain kernels exp(Q dt) on op_space(b), keyed by
/// (switch mode, factor node, nu multi-index).
struct SliceKernels {
    // kernels[switch_code][x * nu_count + nu_flat] -> row-major |A_b|^2
    std::vector<std::vector<std::vector<double>>> kernels;
    std::vector<size_t> nu_count;  // per switch code

    static SliceKernels build(const ProblemSpec& spec, const GridSpec& grid, double t) {
        const ModeTables& tables = spec.tables;
        const int n = tables.n();
        const int n_x = grid.n_x();
        SliceKernels out;
        const auto& switches = tables.switch_modes();
        out.kernels.resize(switches.size());
        out.nu_count.resize(switches.size());
        for (size_t bc = 0; bc < switches.size(); ++bc) {
            const SwitchMode& b = switches[bc];
            std::vector<int> axes;
            for (int i = 0; i < n; ++i)
                if (b.bits[i] == 1) axes.push_back(i);
            size_t count = 1;
            for (size_t j = 0; j < axes.size(); ++j) count *= size_t(grid.nu_steps + 1);
            out.nu_count[bc] = count;
            out.kernels[bc].resize(size_t(n_x) * count);
            std::vector<double> nu(n, 0.0);
            for (int x = 0; x < n_x; ++x) {
                const double xv = grid.x_value(x);
                for (size_t flat = 0; flat < count; ++flat) {
                    size_t rem = flat;
                    for (size_t j = axes.size(); j-- > 0;) {
                        nu[axes[j]] = grid.nu_value(int(rem % size_t(grid.nu_steps + 1)));
                        rem /= size_t(grid.nu_steps + 1);
                    }
                    out.kernels[bc][size_t(x) * count + flat] =
                        chain_kernel_matrix(spec.intensity, tables, b, t, xv, nu, grid.dt());
                }
            }
        }
        return out;
    }

    const std::vector<double>& row_matrix(int switch_code, int x, size_t nu_flat) const {
        return kernels[switch_code][size_t(x) * nu_count[switch_code] + nu_flat];
    }
};

}  // namespace detail

class Solver {
public:
    Solver(const ProblemSpec& spec, const GridSpec& grid, const SolveOptions& opts)
        : spec_(spec), grid_(grid), opts_(opts), tables_(spec.tables) {
        grid_.check(tables_, spec_.intensity);
        end_ = opts.end_index < 0 ? grid_.n_t : opts.end_index;
        if (end_ < 1 || end_ > grid_.n_t) throw GridError("SolveOptions: end_index out of range");
        if (opts_.normalize)
            shift_ = normalize(tables_, spec_.rewards, spec_.normalization_grid());
        if (grid_.factor) {
            bool clipped = false;
            fkernel_ = grid_.factor->kernel(grid_.dt(), &clipped);
            factor_clipped_ = clipped;
        }
        // Discrete left-rule offsets keep shifted + offset bit-consistent
        // with an unshifted solve.
        offsets_.assign(end_ + 1, shift_.min_upsilon);
        for (int i = end_ - 1; i >= 0; --i)
            offsets_[i] = offsets_[i + 1] + shift_.min_psi(i * grid_.dt()) * grid_.dt();
        if (opts_.terminal_from) offsets_ = opts_.terminal_from->offsets();
    }

    bool factor_clipped() const { return factor_clipped_; }

    /// Stage 0: expected reward with no interventions.
    ValueField solve_k0() {
        ValueField field = blank_field();
        fill_terminal(field);
        for (int i = end_ - 1; i >= 0; --i) backward_slice(field, i, nullptr);
        field.set_picard_index(0);
        return field;
    }

    /// One Picard improvement: intervention values come from `prev`.
    ValueField picard_step(const ValueField& prev) {
        ValueField field = blank_field();
        fill_terminal(field);
        for (int i = end_ - 1; i >= 0; --i) backward_slice(field, i, &prev);
        field.set_picard_index(prev.picard_index() + 1);
        return field;
    }

    SolveResult solve() {
        SolveResult res;
        ValueField prev = solve_k0();
        res.diag.sup_v0 = prev.max_abs();
        res.diag.tol_used = opts_.tol >= 0 ? opts_.tol : 1e-6 * (1.0 + res.diag.sup_v0);
        res.diag.k_max_used =
            opts_.k_max >= 0 ? opts_.k_max : (1 << tables_.n()) * grid_.n_t;

        double prev_delta = std::numeric_limits<double>::infinity();
        for (int k = 1; k <= res.diag.k_max_used; ++k) {
            ValueField cur = picard_step(prev);
            double delta = cur.max_abs_diff(prev);
            res.diag.deltas.push_back(delta);
            if (res.diag.deltas.size() >= 3 && delta > prev_delta)
                res.diag.monotone_deltas = false;
            prev_delta = delta;
            prev = std::move(cur);
            if (delta <= res.diag.tol_used) {
                res.diag.converged = true;
                break;
            }
        }
        res.diag.k = prev.picard_index();
        prev.set_converged(res.diag.converged);
        prev.deltas() = res.diag.deltas;
        res.field = std::move(prev);
        return res;
    }

private:
    ValueField blank_field() const {
        ValueField f(tables_, grid_, end_);
        f.set_offsets(offsets_);
        f.set_shift(shift_);
        return f;
    }

    double shifted_psi(const OpMode& a, double t, double x, const std::vector<double>& z) const {
        return spec_.rewards.psi(a, t, x, z) - shift_.min_psi(t);
    }

    double shifted_upsilon(const OpMode& a, double x, const std::vector<double>& z) const {
        return spec_.rewards.upsilon(a, x, z) - shift_.min_upsilon;
    }

    void fill_terminal(ValueField& field) const {
        if (opts_.terminal_from) {
            const ValueField& src = *opts_.terminal_from;
            for (int p = 0; p < field.n_pairs(); ++p) {
                const auto& l = field.layout(p);
                for (size_t flat = 0; flat < l.per_slice; ++flat)
                    field.at(p, end_, flat) = src.at(p, end_, flat);
            }
            return;
        }
        const int n = tables_.n();
        for (int p = 0; p < field.n_pairs(); ++p) {
            const auto& pair = tables_.pairs()[p];
            const auto& l = field.layout(p);
            std::vector<double> z(n, 0.0);
            for (int x = 0; x < grid_.n_x(); ++x) {
                const double xv = grid_.x_value(x);
                for (size_t zf = 0; zf < l.z_count; ++zf) {
                    size_t rem = zf;
                    for (size_t j = l.z_axes.size(); j-- > 0;) {
                        z[l.z_axes[j]] = grid_.z_value(int(rem % size_t(grid_.z_steps + 1)));
                        rem /= size_t(grid_.z_steps + 1);
                    }
                    double v = shifted_upsilon(pair.a, xv, z);
                    for (size_t nf = 0; nf < l.nu_count; ++nf)
                        field.at(p, end_, field.flat_index(p, x, nf, zf)) = v;
                }
            }
        }
    }

    /// Compute slice i of `field` from slice i+1 (continuation) and, when
    /// `prev` is given, interventions against prev's slice i.
    void backward_slice(ValueField& field, int i, const ValueField* prev) const {
        const double t = i * grid_.dt();
        const double dt = grid_.dt();
        const int n = tables_.n();
        const auto kernels = detail::SliceKernels::build(spec_, grid_, t);

        parallel_for(size_t(field.n_pairs()), opts_.threads, [&](size_t p) {
            const ModePair& pair = tables_.pairs()[p];
            const auto& l = field.layout(int(p));
            const int bc = tables_.switch_code(pair.b);
            const auto& space = tables_.op_space(pair.b);
            const int k_states = static_cast<int>(space.size());
            const int row = tables_.op_space_index(pair.a, pair.b);

            // Pair index and z-shift of every arrival mode.
            std::vector<int> arrival_pair(k_states);
            for (int j = 0; j < k_states; ++j)
                arrival_pair[j] = tables_.pair_index(space[j], pair.b);

            std::vector<double> nu(n, 0.0), z(n, 0.0), z_next(n, 0.0), nu_post(n, 0.0),
                z_post(n, 0.0);

            for (int x = 0; x < grid_.n_x(); ++x) {
                const double xv = grid_.x_value(x);
                const FactorGrid::KernelRow* frow = fkernel_.empty() ? nullptr : &fkernel_[x];
                for (size_t nf = 0; nf < l.nu_count; ++nf) {
                    size_t rem = nf;
                    for (size_t j = l.nu_axes.size(); j-- > 0;) {
                        nu[l.nu_axes[j]] = grid_.nu_value(int(rem % size_t(grid_.nu_steps + 1)));
                        rem /= size_t(grid_.nu_steps + 1);
                    }
                    const auto& K = kernels.row_matrix(bc, x, nf);
                    for (size_t zf = 0; zf < l.z_count; ++zf) {
                        rem = zf;
                        for (size_t j = l.z_axes.size(); j-- > 0;) {
                            z[l.z_axes[j]] = grid_.z_value(int(rem % size_t(grid_.z_steps + 1)));
                            rem /= size_t(grid_.z_steps + 1);
                        }

                        // Continuation: one-step chain/factor expectation.
                        double cont = shifted_psi(pair.a, t, xv, z) * dt;
                        for (int j = 0; j < k_states; ++j) {
                            const double pj = K[size_t(row) * k_states + j];
                            if (pj == 0.0) continue;
                            for (int c = 0; c < n; ++c) {
                                const bool arriving_on = space[j].comps[c] == 1;
                                const double grown =
                                    pair.a.comps[c] == 1 ? std::min(z[c] + dt, grid_.horizon) : z[c];
                                z_next[c] = arriving_on ? grown : 0.0;
                            }
                            double ev;
                            if (frow) {
                                ev = 0.0;
                                for (int fj = 0; fj < 3; ++fj)
                                    if (frow->p[fj] != 0.0)
                                        ev += frow->p[fj] * field.interpolate(arrival_pair[j], i + 1,
                                                                              frow->idx[fj], nu,
                                                                              z_next);
                            } else {
                                ev = field.interpolate(arrival_pair[j], i + 1, 0, nu, z_next);
                            }
                            cont += pj * ev;
                        }

                        double best = cont;
                        if (prev) {
                            for (const auto& beta : tables_.switch_modes()) {
                                if (beta == pair.b) continue;
                                const OpMode a_post = post_switch_mode(pair.a, beta);
                                const int target = tables_.pair_index(a_post, beta);
                                for (int c = 0; c < n; ++c) {
                                    const double fresh =
                                        std::max(0, int(beta.bits[c]) - int(pair.b.bits[c]));
                                    nu_post[c] = nu[c] * beta.bits[c] + t * fresh;
                                    z_post[c] = a_post.comps[c] == 1 ? z[c] : 0.0;
                                }
                                const double cost = spec_.costs(bc, tables_.switch_code(beta), t);
                                const double mv =
                                    -cost + prev->interpolate(target, i, x, nu_post, z_post);
                                if (mv > best) best = mv;
                            }
                        }
                        field.at(int(p), i, field.flat_index(int(p), x, nf, zf)) = best;
                    }
                }
            }
        });
    }

    const ProblemSpec& spec_;
    GridSpec grid_;
    SolveOptions opts_;
    const ModeTables& tables_;
    int end_ = 0;
    NormalizationShift shift_;
    std::vector<double> offsets_;
    std::vector<FactorGrid::KernelRow> fkernel_;
    bool factor_clipped_ = false;
};

inline SolveResult solve(const ProblemSpec& spec, const GridSpec& grid, const SolveOptions& opts) {
    Solver solver(spec, grid, opts);
    return solver.solve();
}

}  // namespace switchlag

#endif  // SWITCHLAG_SOLVER_HPP
