#ifndef SWITCHLAG_TESTS_ORACLES_HPP
#define SWITCHLAG_TESTS_ORACLES_HPP

// Independent reference computations for tests. Nothing here may call into
// the solver paths it is used to check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

/// P(plant operating at time s) for the 0 -> 1 -> -1 chain with constant
/// startup rate rs and failure rate rf, started off at s = 0.
inline double on_probability(double rs, double rf, double s) {
    if (rs <= 0.0) return 0.0;
    if (std::abs(rs - rf) < 1e-12) return rs * s * std::exp(-rs * s);
    return rs * (std::exp(-rf * s) - std::exp(-rs * s)) / (rs - rf);
}

/// Closed-form expected on-time integral_0^T P(on at s) ds.
inline double occupation_closed_form(double rs, double rf, double T) {
    if (rs <= 0.0) return 0.0;
    if (std::abs(rs - rf) < 1e-12) {
        // integral of rs*s*exp(-rs*s): (1 - (1 + rs*T) exp(-rs*T)) / rs
        return (1.0 - (1.0 + rs * T) * std::exp(-rs * T)) / rs;
    }
    auto I = [&](double r) { return (1.0 - std::exp(-r * T)) / r; };
    return rs * (I(rf) - I(rs)) / (rs - rf);
}

/// Adaptive Simpson quadrature to `tol` absolute accuracy.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 24) {
    auto simpson = [&](double lo, double hi) {
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
    };
    std::function<double(double, double, double, int)> rec = [&](double lo, double hi, double whole,
                                                                 int d) -> double {
        double mid = 0.5 * (lo + hi);
        double left = simpson(lo, mid), right = simpson(mid, hi);
        if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol) return left + right;
        return rec(lo, mid, left, d - 1) + rec(mid, hi, right, d - 1);
    };
    return rec(a, b, simpson(a, b), depth);
}

/// Dense matrix exponential by scaling and squaring on a plain Taylor
/// series; reference implementation, O(k^3 log) and deliberately simple.
inline std::vector<double> matrix_exponential_reference(std::vector<double> a, int k) {
    double norm = 0.0;
    for (int i = 0; i < k; ++i) {
        double row = 0.0;
        for (int j = 0; j < k; ++j) row += std::abs(a[size_t(i) * k + j]);
        norm = std::max(norm, row);
    }
    int squarings = 0;
    while (norm > 0.5) {
        norm /= 2;
        ++squarings;
        for (auto& v : a) v /= 2;
    }
    std::vector<double> result(size_t(k) * k, 0.0), term(size_t(k) * k, 0.0),
        next(size_t(k) * k, 0.0);
    for (int i = 0; i < k; ++i) {
        result[size_t(i) * k + i] = 1.0;
        term[size_t(i) * k + i] = 1.0;
    }
    for (int m = 1; m <= 40; ++m) {
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                double acc = 0.0;
                for (int l = 0; l < k; ++l) acc += term[size_t(i) * k + l] * a[size_t(l) * k + j];
                next[size_t(i) * k + j] = acc / m;
            }
        term = next;
        for (size_t idx = 0; idx < result.size(); ++idx) result[idx] += term[idx];
    }
    for (int s = 0; s < squarings; ++s) {
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
                double acc = 0.0;
                for (int l = 0; l < k; ++l)
                    acc += result[size_t(i) * k + l] * result[size_t(l) * k + j];
                next[size_t(i) * k + j] = acc;
            }
        result = next;
    }
    return result;
}

}  // namespace oracles

#endif  // SWITCHLAG_TESTS_ORACLES_HPP
