#ifndef SWITCHLAG_FIELD_HPP
#define SWITCHLAG_FIELD_HPP

/**
 * @file field.hpp
 * @brief Discretized value functions over (t, x, nu, z) per feasible mode
 *        pair.
 *
 * Axes are materialized only where they carry information: a nu axis per
 * plant with b_i = 1 and a z axis per plant with a_i = 1 (elsewhere the
 * coordinate is pinned at 0). Lookups between nodes use multilinear
 * interpolation along the active axes and, optionally, linear
 * interpolation in time.
 */

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "switchlag/grid.hpp"
#include "switchlag/modes.hpp"
#include "switchlag/rewards.hpp"

namespace switchlag {

struct AxisPoint {
    int i0;
    double frac;
};

/// Locate u on a uniform axis {0, h, ..., steps*h}. Positions within
/// 1e-9 steps of a node snap to it so exactly-representable states are
/// read back without interpolation error.
inline AxisPoint locate_on_axis(double u, double h, int steps) {
    double pos = u / h;
    if (pos <= 0.0) return {0, 0.0};
    if (pos >= double(steps)) return {steps - 1, 1.0};
    int i0 = static_cast<int>(std::floor(pos));
    if (i0 >= steps) i0 = steps - 1;
    double frac = pos - double(i0);
    if (frac < 1e-9) frac = 0.0;
    if (frac > 1.0 - 1e-9) frac = 1.0;
    return {i0, frac};
}

struct PairLayout {
    std::vector<int> nu_axes;  // plant indices with b_i = 1, ascending
    std::vector<int> z_axes;   // plant indices with a_i = 1, ascending
    size_t nu_count = 1;       // nu_nodes^|nu_axes|
    size_t z_count = 1;        // z_nodes^|z_axes|
    size_t per_x = 1;          // nu_count * z_count
    size_t per_slice = 1;      // n_x * per_x

    static PairLayout make(const ModePair& pair, const GridSpec& grid) {
        PairLayout l;
        for (int i = 0; i < pair.b.n(); ++i) {
            if (pair.b.bits[i] == 1) l.nu_axes.push_back(i);
            if (pair.a.comps[i] == 1) l.z_axes.push_back(i);
        }
        for (size_t j = 0; j < l.nu_axes.size(); ++j) l.nu_count *= size_t(grid.nu_steps + 1);
        for (size_t j = 0; j < l.z_axes.size(); ++j) l.z_count *= size_t(grid.z_steps + 1);
        l.per_x = l.nu_count * l.z_count;
        l.per_slice = size_t(grid.n_x()) * l.per_x;
        return l;
    }
};

class ValueField {
public:
    ValueField() = default;

    ValueField(const ModeTables& tables, const GridSpec& grid, int end_index = -1)
        : grid_(grid), end_index_(end_index < 0 ? grid.n_t : end_index) {
        layouts_.reserve(tables.pairs().size());
        data_.reserve(tables.pairs().size());
        for (const auto& pair : tables.pairs()) {
            layouts_.push_back(PairLayout::make(pair, grid));
            data_.emplace_back(size_t(end_index_ + 1) * layouts_.back().per_slice, 0.0);
        }
        offsets_.assign(end_index_ + 1, 0.0);
    }

    const GridSpec& grid() const { return grid_; }
    int end_index() const { return end_index_; }
    int n_pairs() const { return static_cast<int>(layouts_.size()); }
    const PairLayout& layout(int pair) const { return layouts_[pair]; }

    double& at(int pair, int t_idx, size_t flat) {
        return data_[pair][size_t(t_idx) * layouts_[pair].per_slice + flat];
    }
    double at(int pair, int t_idx, size_t flat) const {
        return data_[pair][size_t(t_idx) * layouts_[pair].per_slice + flat];
    }

    std::vector<double>& pair_data(int pair) { return data_[pair]; }
    const std::vector<double>& pair_data(int pair) const { return data_[pair]; }

    size_t flat_index(int pair, int x_node, size_t nu_flat, size_t z_flat) const {
        const auto& l = layouts_[pair];
        return (size_t(x_node) * l.nu_count + nu_flat) * l.z_count + z_flat;
    }

    /// Multilinear interpolation along the pair's nu/z axes at a fixed time
    /// slice and factor node. `nu` and `z` are full n-vectors; only active
    /// axes are read.
    double interpolate(int pair, int t_idx, int x_node, const std::vector<double>& nu,
                       const std::vector<double>& z) const {
        const auto& l = layouts_[pair];
        const double h_nu = grid_.horizon / grid_.nu_steps;
        const double h_z = grid_.horizon / grid_.z_steps;
        const size_t n_axes = l.nu_axes.size() + l.z_axes.size();

        AxisPoint pts[16];
        for (size_t j = 0; j < l.nu_axes.size(); ++j)
            pts[j] = locate_on_axis(nu[l.nu_axes[j]], h_nu, grid_.nu_steps);
        for (size_t j = 0; j < l.z_axes.size(); ++j)
            pts[l.nu_axes.size() + j] = locate_on_axis(z[l.z_axes[j]], h_z, grid_.z_steps);

        const double* slice =
            data_[pair].data() + size_t(t_idx) * l.per_slice + size_t(x_node) * l.per_x;
        double acc = 0.0;
        const size_t corners = size_t(1) << n_axes;
        for (size_t mask = 0; mask < corners; ++mask) {
            double w = 1.0;
            size_t nu_flat = 0, z_flat = 0;
            for (size_t j = 0; j < l.nu_axes.size(); ++j) {
                const bool hi = (mask >> j) & 1;
                w *= hi ? pts[j].frac : 1.0 - pts[j].frac;
                nu_flat = nu_flat * size_t(grid_.nu_steps + 1) + size_t(pts[j].i0 + (hi ? 1 : 0));
            }
            for (size_t j = 0; j < l.z_axes.size(); ++j) {
                const auto& pt = pts[l.nu_axes.size() + j];
                const bool hi = (mask >> (l.nu_axes.size() + j)) & 1;
                w *= hi ? pt.frac : 1.0 - pt.frac;
                z_flat = z_flat * size_t(grid_.z_steps + 1) + size_t(pt.i0 + (hi ? 1 : 0));
            }
            if (w != 0.0) acc += w * slice[nu_flat * l.z_count + z_flat];
        }
        return acc;
    }

    /// Linear interpolation in t on top of the spatial interpolation.
    double interpolate_time(int pair, double t, int x_node, const std::vector<double>& nu,
                            const std::vector<double>& z) const {
        AxisPoint pt = locate_on_axis(t, grid_.dt(), end_index_);
        double v0 = interpolate(pair, pt.i0, x_node, nu, z);
        if (pt.frac == 0.0) return v0;
        double v1 = interpolate(pair, pt.i0 + 1, x_node, nu, z);
        return v0 + pt.frac * (v1 - v0);
    }

    // -- normalization bookkeeping -------------------------------------

    /// offset(t_i): added to a stored (shifted) value to recover original
    /// units. Zero when the normalization shift is the identity.
    const std::vector<double>& offsets() const { return offsets_; }
    void set_offsets(std::vector<double> off) { offsets_ = std::move(off); }

    double offset_at(double t) const {
        AxisPoint pt = locate_on_axis(t, grid_.dt(), end_index_);
        double o0 = offsets_[pt.i0];
        if (pt.frac == 0.0) return o0;
        return o0 + pt.frac * (offsets_[pt.i0 + 1] - o0);
    }

    /// Stored-value lookup plus the normalization offset.
    double original_value(int pair, double t, int x_node, const std::vector<double>& nu,
                          const std::vector<double>& z) const {
        return interpolate_time(pair, t, x_node, nu, z) + offset_at(t);
    }

    // -- diagnostics ----------------------------------------------------

    int picard_index() const { return k_; }
    void set_picard_index(int k) { k_ = k; }
    const std::vector<double>& deltas() const { return deltas_; }
    std::vector<double>& deltas() { return deltas_; }
    bool converged() const { return converged_; }
    void set_converged(bool c) { converged_ = c; }
    const NormalizationShift& shift() const { return shift_; }
    void set_shift(NormalizationShift s) { shift_ = std::move(s); }

    double max_abs() const {
        double m = 0.0;
        for (const auto& d : data_)
            for (double v : d) m = std::max(m, std::abs(v));
        return m;
    }

    double max_abs_diff(const ValueField& other) const {
        double m = 0.0;
        for (size_t p = 0; p < data_.size(); ++p)
            for (size_t i = 0; i < data_[p].size(); ++i)
                m = std::max(m, std::abs(data_[p][i] - other.data_[p][i]));
        return m;
    }

private:
    GridSpec grid_;
    int end_index_ = 0;
    std::vector<PairLayout> layouts_;
    std::vector<std::vector<double>> data_;
    std::vector<double> offsets_;
    NormalizationShift shift_;
    int k_ = 0;
    std::vector<double> deltas_;
    bool converged_ = false;
};

}  // namespace switchlag

#endif  // SWITCHLAG_FIELD_HPP
