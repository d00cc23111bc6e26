#ifndef SWITCHLAG_GRID_HPP
#define SWITCHLAG_GRID_HPP

/**
 * @file grid.hpp
 * @brief Discretization of the hybrid state space: time/nu/z axes, the
 *        locally-consistent trinomial factor chain, and one-step chain
 *        kernels from frozen-rate generator exponentials.
 */

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "switchlag/dynamics.hpp"
#include "switchlag/intensity.hpp"
#include "switchlag/modes.hpp"

namespace switchlag {

struct GridError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Exogenous factor: dX = a(t,X)dt + sigma(t,X)dB approximated by a trinomial
// chain on a uniform node grid.

struct FactorGrid {
    std::vector<double> nodes;
    std::vector<double> drift_coeffs;  // polynomial in x
    std::vector<double> vol_coeffs;    // polynomial in x
    int x0_node = 0;

    struct KernelRow {
        std::array<int, 3> idx;
        std::array<double, 3> p;
    };

    static FactorGrid make(double x_min, double x_max, int n_nodes, std::vector<double> drift,
                           std::vector<double> vol, double x0) {
        if (n_nodes < 3) throw GridError("FactorGrid: need at least 3 nodes");
        if (x_max <= x_min) throw GridError("FactorGrid: empty node range");
        FactorGrid g;
        g.nodes.resize(n_nodes);
        for (int i = 0; i < n_nodes; ++i)
            g.nodes[i] = x_min + (x_max - x_min) * double(i) / double(n_nodes - 1);
        g.drift_coeffs = std::move(drift);
        g.vol_coeffs = std::move(vol);
        g.x0_node = 0;
        for (int i = 1; i < n_nodes; ++i)
            if (std::abs(g.nodes[i] - x0) < std::abs(g.nodes[g.x0_node] - x0)) g.x0_node = i;
        return g;
    }

    double drift(double x) const { return horner(drift_coeffs, x); }
    double vol(double x) const { return horner(vol_coeffs, x); }

    double spacing() const { return nodes[1] - nodes[0]; }

    /// Growth constant C with |a(x)| + |sigma(x)| <= C (1 + |x|) over the nodes.
    double growth_bound() const {
        double c = 0.0;
        for (double x : nodes)
            c = std::max(c, (std::abs(drift(x)) + std::abs(vol(x))) / (1.0 + std::abs(x)));
        return c;
    }

    /// One-step transition rows matching conditional mean a*dt and variance
    /// sigma^2*dt to O(dt^2). Interior nodes use a centered stencil, the two
    /// boundary nodes a one-sided stencil. Negative probabilities are
    /// clipped and the row renormalized; `clipped` reports whether that
    /// happened anywhere.
    std::vector<KernelRow> kernel(double dt, bool* clipped = nullptr) const {
        const int nx = static_cast<int>(nodes.size());
        const double h = spacing();
        bool any_clip = false;
        std::vector<KernelRow> rows(nx);
        for (int i = 0; i < nx; ++i) {
            const double mu = drift(nodes[i]) * dt;
            const double var = vol(nodes[i]) * vol(nodes[i]) * dt;
            const double m2 = var + mu * mu;
            KernelRow r;
            if (i == 0) {
                r.idx = {0, 1, 2};
                double p2 = (m2 - mu * h) / (2 * h * h);
                double p1 = (2 * mu * h - m2) / (h * h);
                r.p = {1.0 - p1 - p2, p1, p2};
            } else if (i == nx - 1) {
                r.idx = {nx - 1, nx - 2, nx - 3};
                double p2 = (m2 + mu * h) / (2 * h * h);
                double p1 = (-2 * mu * h - m2) / (h * h);
                r.p = {1.0 - p1 - p2, p1, p2};
            } else {
                r.idx = {i - 1, i, i + 1};
                double pd = (m2 / (h * h) - mu / h) / 2;
                double pu = (m2 / (h * h) + mu / h) / 2;
                r.p = {pd, 1.0 - pd - pu, pu};
            }
            double sum = 0.0;
            for (double& p : r.p) {
                if (p < 0.0) {
                    p = 0.0;
                    any_clip = true;
                }
                sum += p;
            }
            for (double& p : r.p) p /= sum;
            rows[i] = r;
        }
        if (clipped) *clipped = any_clip;
        return rows;
    }

private:
    static double horner(const std::vector<double>& c, double x) {
        double acc = 0.0;
        for (size_t j = c.size(); j-- > 0;) acc = acc * x + c[j];
        return acc;
    }
};

// ---------------------------------------------------------------------------
// Solver grid.

struct GridSpec {
    double horizon = 1.0;
    int n_t = 100;
    int nu_steps = 4;
    int z_steps = 4;
    std::optional<FactorGrid> factor;

    double dt() const { return horizon / n_t; }
    int n_x() const { return factor ? static_cast<int>(factor->nodes.size()) : 1; }
    double x_value(int node) const { return factor ? factor->nodes[node] : 0.0; }

    double nu_value(int j) const { return horizon * double(j) / nu_steps; }
    double z_value(int j) const { return horizon * double(j) / z_steps; }

    void check(const ModeTables& tables, const IntensityModel& model) const {
        if (n_t < 1 || nu_steps < 1 || z_steps < 1)
            throw GridError("GridSpec: n_t, nu_steps, z_steps must be >= 1");
        if (horizon <= 0) throw GridError("GridSpec: horizon must be positive");
        size_t max_set = 0;
        for (size_t p = 0; p < tables.pairs().size(); ++p)
            max_set = std::max(max_set, tables.transitions(int(p)).size());
        double margin = dt() * model.rate_bound() * double(max_set);
        if (margin >= 0.5)
            throw GridError("GridSpec: dt * K_lambda * max|A_(a,b)| = " + std::to_string(margin) +
                            " >= 0.5; refine the time grid");
    }
};

// ---------------------------------------------------------------------------
// Frozen-rate chain kernels.

/// Generator on op_space(b) with every rate frozen at (s, x, nu); row-major.
inline std::vector<double> frozen_generator(const IntensityModel& model, const ModeTables& tables,
                                            const SwitchMode& b, double s, double x,
                                            const std::vector<double>& nu) {
    const auto& space = tables.op_space(b);
    const int k = static_cast<int>(space.size());
    std::vector<double> q(size_t(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        double diag = 0.0;
        for (const auto& to : tables.transitions(space[i], b)) {
            if (to == space[i]) continue;
            int j = tables.op_space_index(to, b);
            double r = model.rate(s, x, nu, b, space[i], to, tables);
            q[size_t(i) * k + j] = r;
            diag += r;
        }
        q[size_t(i) * k + i] = -diag;
    }
    return q;
}

/// exp(Q dt) for a generator matrix by uniformization: probabilities stay
/// non-negative and the series is truncated at tail mass 1e-14.
inline std::vector<double> generator_exponential(const std::vector<double>& q, int k, double dt) {
    std::vector<double> out(size_t(k) * k, 0.0);
    double lambda = 0.0;
    for (int i = 0; i < k; ++i) lambda = std::max(lambda, -q[size_t(i) * k + i]);
    const double a = lambda * dt;
    for (int i = 0; i < k; ++i) out[size_t(i) * k + i] = 1.0;
    if (a <= 0.0) return out;

    // P = I + Q / lambda
    std::vector<double> p(size_t(k) * k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            p[size_t(i) * k + j] = q[size_t(i) * k + j] / lambda + (i == j ? 1.0 : 0.0);

    std::vector<double> term(p);  // P^m
    double w = std::exp(-a);      // Poisson(a) weight at m
    double cum = w;
    for (auto& v : out) v *= w;
    std::vector<double> next(size_t(k) * k);
    for (int m = 1; m <= 100000 && cum < 1.0 - 1e-14; ++m) {
        if (m > 1) {
            // term <- term * P
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) {
                    double acc = 0.0;
                    for (int l = 0; l < k; ++l)
                        acc += term[size_t(i) * k + l] * p[size_t(l) * k + j];
                    next[size_t(i) * k + j] = acc;
                }
            term.swap(next);
        }
        w *= a / m;
        cum += w;
        for (size_t idx = 0; idx < out.size(); ++idx) out[idx] += w * term[idx];
    }
    return out;
}

inline std::vector<double> chain_kernel_matrix(const IntensityModel& model, const ModeTables& tables,
                                               const SwitchMode& b, double s, double x,
                                               const std::vector<double>& nu, double dt) {
    const int k = static_cast<int>(tables.op_space(b).size());
    return generator_exponential(frozen_generator(model, tables, b, s, x, nu), k, dt);
}

/// Row of exp(Q dt) for the current operation mode: the one-step transition
/// law over op_space(b) with rates frozen at interval start.
inline std::vector<double> one_step_chain_kernel(const IntensityModel& model,
                                                 const ModeTables& tables, const HybridState& state,
                                                 double x_value, double dt) {
    const int k = static_cast<int>(tables.op_space(state.b).size());
    auto full = chain_kernel_matrix(model, tables, state.b, state.t, x_value, state.nu, dt);
    int row = tables.op_space_index(state.a, state.b);
    return {full.begin() + size_t(row) * k, full.begin() + size_t(row + 1) * k};
}

}  // namespace switchlag

#endif  // SWITCHLAG_GRID_HPP
