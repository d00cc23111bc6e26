#ifndef SWITCHLAG_REWARDS_HPP
#define SWITCHLAG_REWARDS_HPP

/**
 * @file rewards.hpp
 * @brief Reward and switching-cost data, model-assumption validation and
 *        the non-negativity normalization.
 *
 * Running rewards psi(a,t,x,z) and terminal rewards upsilon(a,x,z) are
 * sums of parametric terms, each of which evaluates pointwise and
 * integrates in closed form over a segment on which the operation mode
 * and factor are constant. Switching costs are piecewise linear in time.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "switchlag/intensity.hpp"
#include "switchlag/modes.hpp"
#include "switchlag/util.hpp"

namespace switchlag {

// ---------------------------------------------------------------------------
// Piecewise-linear scalar function of time (constant extrapolation).

struct PiecewiseLinear {
    std::vector<double> ts;
    std::vector<double> vs;

    static PiecewiseLinear constant(double v) { return {{0.0}, {v}}; }

    double operator()(double t) const {
        if (ts.empty()) return 0.0;
        if (t <= ts.front()) return vs.front();
        if (t >= ts.back()) return vs.back();
        size_t i = 1;
        while (ts[i] < t) ++i;
        double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
        return vs[i - 1] + w * (vs[i] - vs[i - 1]);
    }

    double integral(double t0, double t1) const {
        if (t1 < t0) return -integral(t1, t0);
        if (ts.empty()) return 0.0;
        double acc = 0.0, prev_t = t0, prev_v = (*this)(t0);
        for (size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] <= t0 || ts[i] >= t1) continue;
            acc += 0.5 * (prev_v + vs_at(i)) * (ts[i] - prev_t);
            prev_t = ts[i];
            prev_v = vs_at(i);
        }
        acc += 0.5 * (prev_v + (*this)(t1)) * (t1 - prev_t);
        return acc;
    }

    double min_value() const { return *std::min_element(vs.begin(), vs.end()); }
    double max_value() const { return *std::max_element(vs.begin(), vs.end()); }

    void check() const {
        if (ts.empty() || ts.size() != vs.size())
            throw std::invalid_argument("PiecewiseLinear: need matching, nonempty knots");
        for (size_t i = 1; i < ts.size(); ++i)
            if (ts[i] <= ts[i - 1]) throw std::invalid_argument("PiecewiseLinear: knots not ascending");
    }

private:
    double vs_at(size_t i) const { return vs[i]; }
};

// ---------------------------------------------------------------------------
// Reward terms.

struct RewardTerm {
    enum class Kind {
        Constant,         // value
        OnIndicator,      // value * 1{a_plant = 1}
        PerModeConstant,  // value * 1{a = mode}
        RampInZ,          // value * min(z_plant / ramp, 1) * 1{a_plant = 1}
        PolyInX,          // sum_j coeffs[j] * x^j
        LinearInT,        // value * t                  (running rewards only)
        OnPriceCurve      // curve(t) * 1{a_plant = 1}  (running rewards only)
    };

    Kind kind = Kind::Constant;
    double value = 0.0;
    double ramp = 1.0;
    int plant = 0;
    OpMode mode;
    std::vector<double> coeffs;
    PiecewiseLinear curve;

    double eval(const OpMode& a, double t, double x, const std::vector<double>& z) const {
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::OnIndicator: return a.comps[plant] == 1 ? value : 0.0;
            case Kind::PerModeConstant: return a == mode ? value : 0.0;
            case Kind::RampInZ:
                return a.comps[plant] == 1 ? value * std::min(z[plant] / ramp, 1.0) : 0.0;
            case Kind::PolyInX: {
                double acc = 0.0;
                for (size_t j = coeffs.size(); j-- > 0;) acc = acc * x + coeffs[j];
                return acc;
            }
            case Kind::LinearInT: return value * t;
            case Kind::OnPriceCurve: return a.comps[plant] == 1 ? curve(t) : 0.0;
        }
        return 0.0;
    }

    /// Exact integral over [t0,t1] with a and x fixed and z evolving as
    /// z(t) = min(z0 + (t-t0), horizon) on operating components.
    double integrate(const OpMode& a, double x, const std::vector<double>& z0, double t0, double t1,
                     double horizon) const {
        const double len = t1 - t0;
        switch (kind) {
            case Kind::Constant: return value * len;
            case Kind::OnIndicator: return a.comps[plant] == 1 ? value * len : 0.0;
            case Kind::PerModeConstant: return a == mode ? value * len : 0.0;
            case Kind::PolyInX: {
                double acc = 0.0;
                for (size_t j = coeffs.size(); j-- > 0;) acc = acc * x + coeffs[j];
                return acc * len;
            }
            case Kind::LinearInT: return 0.5 * value * (t1 * t1 - t0 * t0);
            case Kind::OnPriceCurve: return a.comps[plant] == 1 ? curve.integral(t0, t1) : 0.0;
            case Kind::RampInZ: {
                if (a.comps[plant] != 1) return 0.0;
                const double zp = z0[plant];
                const double rise_end = std::max(0.0, std::min(ramp, horizon) - zp);
                const double plateau = std::min(horizon / ramp, 1.0);
                const double l1 = std::min(len, rise_end);
                double acc = (zp * l1 + 0.5 * l1 * l1) / ramp;
                acc += plateau * std::max(0.0, len - rise_end);
                return value * acc;
            }
        }
        return 0.0;
    }

    /// Contribution to the z-Lipschitz constant of component i.
    double z_lipschitz(int i) const {
        return kind == Kind::RampInZ && plant == i ? std::abs(value) / ramp : 0.0;
    }

    bool time_dependent() const { return kind == Kind::LinearInT || kind == Kind::OnPriceCurve; }
};

struct RewardSpec {
    std::vector<RewardTerm> psi_terms;
    std::vector<RewardTerm> upsilon_terms;

    double psi(const OpMode& a, double t, double x, const std::vector<double>& z) const {
        double acc = 0.0;
        for (const auto& term : psi_terms) acc += term.eval(a, t, x, z);
        return acc;
    }

    double upsilon(const OpMode& a, double x, const std::vector<double>& z) const {
        double acc = 0.0;
        for (const auto& term : upsilon_terms) acc += term.eval(a, 0.0, x, z);
        return acc;
    }

    double psi_integral(const OpMode& a, double x, const std::vector<double>& z0, double t0,
                        double t1, double horizon) const {
        double acc = 0.0;
        for (const auto& term : psi_terms) acc += term.integrate(a, x, z0, t0, t1, horizon);
        return acc;
    }

    double k_psi(int n) const { return lipschitz(psi_terms, n); }
    double k_upsilon(int n) const { return lipschitz(upsilon_terms, n); }

private:
    static double lipschitz(const std::vector<RewardTerm>& terms, int n) {
        double sq = 0.0;
        for (int i = 0; i < n; ++i) {
            double li = 0.0;
            for (const auto& term : terms) li += term.z_lipschitz(i);
            sq += li * li;
        }
        return std::sqrt(sq);
    }
};

// ---------------------------------------------------------------------------
// Switching costs.

struct SwitchCostSpec {
    int n_modes = 0;                     // 2^n
    std::vector<PiecewiseLinear> costs;  // n_modes * n_modes, row-major (from, to)
    double loop_epsilon = 0.0;

    static SwitchCostSpec constant(int n_modes, double c, double loop_epsilon) {
        SwitchCostSpec s;
        s.n_modes = n_modes;
        s.costs.assign(size_t(n_modes) * n_modes, PiecewiseLinear::constant(c));
        for (int i = 0; i < n_modes; ++i) s.costs[size_t(i) * n_modes + i] = PiecewiseLinear::constant(0.0);
        s.loop_epsilon = loop_epsilon;
        return s;
    }

    const PiecewiseLinear& cost_fn(int from, int to) const {
        return costs[size_t(from) * n_modes + to];
    }
    PiecewiseLinear& cost_fn(int from, int to) { return costs[size_t(from) * n_modes + to]; }

    double operator()(int from, int to, double t) const { return cost_fn(from, to)(t); }
};

// ---------------------------------------------------------------------------
// Non-negativity normalization.

/// Shift making psi and upsilon non-negative on the evaluation grid while
/// preserving the objective up to the reported additive constant:
///   J_original(u) = J_shifted(u) + constant  for every control u.
struct NormalizationShift {
    double min_upsilon = 0.0;   // subtract from upsilon
    PiecewiseLinear min_psi;    // subtract from psi, as a function of t
    double constant = 0.0;      // min_upsilon + integral of min_psi over [0,T]

    bool is_identity() const {
        return min_upsilon == 0.0 && min_psi.min_value() == 0.0 && min_psi.max_value() == 0.0;
    }
};

struct NormalizationGrid {
    double horizon;
    int t_samples = 65;
    int z_samples = 9;
    std::vector<double> x_values = {0.0};
};

inline NormalizationShift normalize(const ModeTables& tables, const RewardSpec& rewards,
                                    const NormalizationGrid& grid) {
    const int n = tables.n();
    const double T = grid.horizon;

    std::vector<OpMode> all_ops;
    {
        int three_n = 1;
        for (int i = 0; i < n; ++i) three_n *= 3;
        for (int c = 0; c < three_n; ++c) {
            OpMode m;
            m.comps.resize(n);
            int cc = c;
            for (int i = n - 1; i >= 0; --i) { m.comps[i] = int8_t(cc % 3 - 1); cc /= 3; }
            all_ops.push_back(m);
        }
    }

    // Enumerate z over a per-mode corner grid: z_i in {0, T/k, ..., T} where
    // a_i = 1, pinned to 0 elsewhere.
    auto for_each_z = [&](const OpMode& a, auto&& fn) {
        std::vector<int> on;
        for (int i = 0; i < n; ++i)
            if (a.comps[i] == 1) on.push_back(i);
        std::vector<double> z(n, 0.0);
        std::vector<int> idx(on.size(), 0);
        while (true) {
            for (size_t j = 0; j < on.size(); ++j)
                z[on[j]] = T * double(idx[j]) / double(grid.z_samples - 1);
            fn(z);
            size_t j = 0;
            for (; j < on.size(); ++j) {
                if (++idx[j] < grid.z_samples) break;
                idx[j] = 0;
            }
            if (j == on.size()) break;
            if (on.empty()) break;
        }
    };

    double min_ups = 0.0;
    for (const auto& a : all_ops)
        for (double x : grid.x_values)
            for_each_z(a, [&](const std::vector<double>& z) {
                min_ups = std::min(min_ups, rewards.upsilon(a, x, z));
            });

    PiecewiseLinear min_psi;
    min_psi.ts.resize(grid.t_samples);
    min_psi.vs.resize(grid.t_samples);
    for (int k = 0; k < grid.t_samples; ++k) {
        double t = T * double(k) / double(grid.t_samples - 1);
        double m = 0.0;
        for (const auto& a : all_ops)
            for (double x : grid.x_values)
                for_each_z(a, [&](const std::vector<double>& z) {
                    m = std::min(m, rewards.psi(a, t, x, z));
                });
        min_psi.ts[k] = t;
        min_psi.vs[k] = m;
    }

    NormalizationShift shift;
    shift.min_upsilon = min_ups;
    shift.min_psi = min_psi;
    shift.constant = min_ups + min_psi.integral(0.0, T);
    return shift;
}

// ---------------------------------------------------------------------------
// Assumption validation.

struct AssumptionResult {
    std::string id;
    bool pass = true;
    bool certified = true;  // false when the check is only sampled/grid-based
    std::string note;
    std::string witness;
    std::map<std::string, double> values;
};

struct ValidationReport {
    bool all_pass = true;
    std::vector<AssumptionResult> entries;
    std::string grid_description;

    const AssumptionResult* find(const std::string& id) const {
        for (const auto& e : entries)
            if (e.id == id) return &e;
        return nullptr;
    }
};

struct ValidationOptions {
    double horizon = 1.0;
    int time_samples = 33;
    int z_samples = 5;
    std::vector<double> x_values = {0.0};
    int random_cycles = 2000;        // cycle sampling beyond exhaustive range
    int exhaustive_cycle_modes = 8;  // enumerate all simple cycles up to this m
    int lipschitz_samples = 256;
    uint64_t seed = 0x5eedULL;
    std::optional<double> declared_rate_bound;
};

namespace detail {

/// Minimum of sum_j edge_cost_j(t_j) over nondecreasing times drawn from
/// `tgrid`, by a prefix-min dynamic program.
inline double min_cycle_cost_on_grid(const SwitchCostSpec& costs, const std::vector<int>& cycle,
                                     const std::vector<double>& tgrid) {
    const size_t k = cycle.size();
    std::vector<double> f(tgrid.size());
    for (size_t g = 0; g < tgrid.size(); ++g)
        f[g] = costs(cycle[0], cycle[1 % k], tgrid[g]);
    for (size_t j = 1; j < k; ++j) {
        int from = cycle[j], to = cycle[(j + 1) % k];
        double run = std::numeric_limits<double>::infinity();
        std::vector<double> nf(tgrid.size());
        for (size_t g = 0; g < tgrid.size(); ++g) {
            run = std::min(run, f[g]);
            nf[g] = run + costs(from, to, tgrid[g]);
        }
        f = std::move(nf);
    }
    return *std::min_element(f.begin(), f.end());
}

/// Enumerate every directed simple cycle over {0,..,m-1}, each exactly once
/// (the smallest member leads, remaining members permute freely).
inline void all_simple_cycles(int m, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> cycle;
    std::vector<bool> used(m, false);
    int start = 0;
    std::function<void()> extend = [&]() {
        if (cycle.size() >= 2) fn(cycle);
        for (int next = start + 1; next < m; ++next) {
            if (used[next]) continue;
            used[next] = true;
            cycle.push_back(next);
            extend();
            cycle.pop_back();
            used[next] = false;
        }
    };
    for (start = 0; start < m; ++start) {
        std::fill(used.begin(), used.end(), false);
        used[start] = true;
        cycle = {start};
        extend();
    }
}

}  // namespace detail

inline ValidationReport validate_assumptions(const ModeTables& tables, const IntensityModel& model,
                                             const RewardSpec& rewards, const SwitchCostSpec& costs,
                                             const ValidationOptions& opt) {
    ValidationReport report;
    const int n = tables.n();
    const int m = static_cast<int>(tables.switch_modes().size());
    const double T = opt.horizon;
    std::mt19937_64 rng(splitmix64(opt.seed));

    std::vector<double> tgrid;
    for (int k = 0; k < opt.time_samples; ++k) tgrid.push_back(T * double(k) / (opt.time_samples - 1));
    for (const auto& pw : costs.costs)
        for (double t : pw.ts)
            if (t >= 0 && t <= T) tgrid.push_back(t);
    std::sort(tgrid.begin(), tgrid.end());
    tgrid.erase(std::unique(tgrid.begin(), tgrid.end()), tgrid.end());

    report.grid_description = std::to_string(tgrid.size()) + " time samples, " +
                              std::to_string(opt.z_samples) + " z samples/axis, " +
                              std::to_string(opt.x_values.size()) + " factor values";

    std::vector<OpMode> all_ops;
    {
        int three_n = 1;
        for (int i = 0; i < n; ++i) three_n *= 3;
        for (int c = 0; c < three_n; ++c) {
            OpMode mm;
            mm.comps.resize(n);
            int cc = c;
            for (int i = n - 1; i >= 0; --i) { mm.comps[i] = int8_t(cc % 3 - 1); cc /= 3; }
            all_ops.push_back(mm);
        }
    }

    auto random_z = [&](const OpMode& a) {
        std::vector<double> z(n, 0.0);
        for (int i = 0; i < n; ++i)
            if (a.comps[i] == 1) z[i] = T * uniform01(rng);
        return z;
    };

    // (i) square-integrable, Lipschitz-in-z rewards: bounded on the compact
    // grid domain by construction; the declared Lipschitz constants are
    // spot-checked on random pairs.
    {
        AssumptionResult r;
        r.id = "i";
        double psi_bar = 0.0, ups_bar = 0.0;
        for (const auto& a : all_ops)
            for (double x : opt.x_values)
                for (double t : tgrid) {
                    auto z = random_z(a);
                    psi_bar = std::max(psi_bar, std::abs(rewards.psi(a, t, x, z)));
                    ups_bar = std::max(ups_bar, std::abs(rewards.upsilon(a, x, z)));
                }
        const double kp = rewards.k_psi(n), ku = rewards.k_upsilon(n);
        for (int it = 0; it < opt.lipschitz_samples && r.pass; ++it) {
            const OpMode& a = all_ops[size_t(uniform01(rng) * all_ops.size()) % all_ops.size()];
            auto z1 = random_z(a), z2 = random_z(a);
            double d2 = 0.0;
            for (int i = 0; i < n; ++i) d2 += (z1[i] - z2[i]) * (z1[i] - z2[i]);
            double dist = std::sqrt(d2);
            double t = T * uniform01(rng);
            double x = opt.x_values[size_t(uniform01(rng) * opt.x_values.size()) % opt.x_values.size()];
            if (std::abs(rewards.psi(a, t, x, z1) - rewards.psi(a, t, x, z2)) > kp * dist + 1e-9) {
                r.pass = false;
                r.witness = "psi Lipschitz violated at a=" + to_string(a);
            }
            if (std::abs(rewards.upsilon(a, x, z1) - rewards.upsilon(a, x, z2)) > ku * dist + 1e-9) {
                r.pass = false;
                r.witness = "upsilon Lipschitz violated at a=" + to_string(a);
            }
        }
        r.certified = false;
        r.note = "bounds computed on the validation grid; Lipschitz constants spot-checked";
        r.values = {{"psi_bar", psi_bar}, {"upsilon_bar", ups_bar}, {"k_psi", kp}, {"k_upsilon", ku}};
        report.entries.push_back(std::move(r));
    }

    // (ii)a non-negative switching costs.
    {
        AssumptionResult r;
        r.id = "ii.a";
        double worst = std::numeric_limits<double>::infinity();
        for (int from = 0; from < m && r.pass; ++from)
            for (int to = 0; to < m; ++to) {
                if (from == to) continue;
                double mn = costs.cost_fn(from, to).min_value();
                if (mn < worst) worst = mn;
                if (mn < 0.0) {
                    r.pass = false;
                    r.witness = "c(" + to_string(tables.switch_modes()[from]) + "->" +
                                to_string(tables.switch_modes()[to]) + ") reaches " + std::to_string(mn);
                    break;
                }
            }
        r.values = {{"min_cost", worst}};
        report.entries.push_back(std::move(r));
    }

    // (ii)b no free loop: every cycle of switches costs at least epsilon for
    // every nondecreasing time assignment on the validation grid.
    {
        AssumptionResult r;
        r.id = "ii.b";
        r.certified = false;
        double worst = std::numeric_limits<double>::infinity();
        std::vector<int> worst_cycle;
        auto consider = [&](const std::vector<int>& cycle) {
            double c = detail::min_cycle_cost_on_grid(costs, cycle, tgrid);
            if (c < worst) {
                worst = c;
                worst_cycle = cycle;
            }
        };
        if (m <= opt.exhaustive_cycle_modes) {
            detail::all_simple_cycles(m, consider);
            r.note = "exhaustive over simple cycles, min over nondecreasing grid times";
        } else {
            for (int it = 0; it < opt.random_cycles; ++it) {
                int k = 2 + int(uniform01(rng) * 5);
                std::vector<int> pool(m);
                for (int i = 0; i < m; ++i) pool[i] = i;
                for (int j = 0; j < k; ++j)
                    std::swap(pool[j], pool[j + size_t(uniform01(rng) * (m - j)) % size_t(m - j)]);
                pool.resize(k);
                consider(pool);
            }
            r.note = "sampled cycles (mode count above exhaustive cap)";
        }
        r.pass = costs.loop_epsilon > 0.0 && worst >= costs.loop_epsilon - 1e-12;
        if (costs.loop_epsilon <= 0.0) r.witness = "declared loop_epsilon is not positive";
        if (!r.pass && !worst_cycle.empty()) {
            r.witness = "cycle";
            for (int idx : worst_cycle) r.witness += " " + to_string(tables.switch_modes()[idx]);
            r.witness += " costs " + std::to_string(worst);
        }
        r.values = {{"min_cycle_cost", worst}, {"loop_epsilon", costs.loop_epsilon}};
        report.entries.push_back(std::move(r));
    }

    // (iii) never optimal to switch at T: a strict terminal margin is
    // certified on the grid and reported.
    {
        AssumptionResult r;
        r.id = "iii";
        r.certified = false;
        double margin = std::numeric_limits<double>::infinity();
        std::string wit;
        for (const auto& a : all_ops) {
            std::vector<int> on;
            for (int i = 0; i < n; ++i)
                if (a.comps[i] == 1) on.push_back(i);
            std::vector<int> idx(on.size(), 0);
            while (true) {
                std::vector<double> z(n, 0.0);
                for (size_t j = 0; j < on.size(); ++j)
                    z[on[j]] = T * double(idx[j]) / double(opt.z_samples - 1);
                for (double x : opt.x_values) {
                    double lhs = rewards.upsilon(a, x, z);
                    for (int bc = 0; bc < m; ++bc) {
                        const SwitchMode& b = tables.switch_modes()[bc];
                        if (!leq(a, b)) continue;  // b in I_a
                        for (int b2 = 0; b2 < m; ++b2) {
                            if (b2 == bc) continue;
                            const SwitchMode& beta = tables.switch_modes()[b2];
                            OpMode a2 = post_switch_mode(a, beta);
                            auto z2 = clamp_z(z, a2, T);
                            double rhs = rewards.upsilon(a2, x, z2) - costs(bc, b2, T);
                            if (lhs - rhs < margin) {
                                margin = lhs - rhs;
                                wit = "a=" + to_string(a) + " b=" + to_string(b) +
                                      " beta=" + to_string(beta);
                            }
                        }
                    }
                }
                size_t j = 0;
                for (; j < on.size(); ++j) {
                    if (++idx[j] < opt.z_samples) break;
                    idx[j] = 0;
                }
                if (j == on.size() || on.empty()) break;
            }
        }
        r.pass = margin > 0.0;
        r.values = {{"terminal_margin", margin}};
        r.note = "strictness certified as a positive margin on the grid";
        if (!r.pass) r.witness = wit;
        report.entries.push_back(std::move(r));
    }

    // (iv) bounded intensities, Lipschitz in nu.
    {
        AssumptionResult r;
        r.id = "iv";
        double derived = model.rate_bound();
        double declared = opt.declared_rate_bound.value_or(derived);
        r.values = {{"rate_bound_derived", derived}, {"rate_bound_declared", declared}};
        if (derived > declared * (1.0 + 1e-12)) {
            r.pass = false;
            r.witness = "derived bound " + std::to_string(derived) + " exceeds declared " +
                        std::to_string(declared);
        }
        // Sampled double check against the declared bound.
        for (int it = 0; it < opt.lipschitz_samples && r.pass; ++it) {
            const auto& pair = tables.pairs()[size_t(uniform01(rng) * tables.pairs().size()) %
                                              tables.pairs().size()];
            std::vector<double> nu(n, 0.0);
            for (int i = 0; i < n; ++i)
                if (pair.b.bits[i] == 1) nu[i] = T * uniform01(rng);
            double s = T * uniform01(rng);
            for (const auto& to : tables.transitions(pair.a, pair.b)) {
                if (to == pair.a) continue;
                double rate = model.rate(s, 0.0, nu, pair.b, pair.a, to, tables);
                if (rate > declared * (1.0 + 1e-12) || rate < 0.0) {
                    r.pass = false;
                    r.witness = "rate " + std::to_string(rate) + " at s=" + std::to_string(s);
                    break;
                }
            }
        }
        if (auto kl = model.lipschitz_nu()) {
            r.values["k_lambda"] = *kl;
            r.note = "nu-Lipschitz certified with the derived constant";
        } else {
            r.certified = false;
            r.note = "rate bound holds; nu-Lipschitz not certifiable for piecewise-constant "
                     "startup rates";
        }
        report.entries.push_back(std::move(r));
    }

    report.all_pass = true;
    for (const auto& e : report.entries) report.all_pass = report.all_pass && e.pass;
    return report;
}

}  // namespace switchlag

#endif  // SWITCHLAG_REWARDS_HPP
