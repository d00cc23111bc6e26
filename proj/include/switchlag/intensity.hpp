#ifndef SWITCHLAG_INTENSITY_HPP
#define SWITCHLAG_INTENSITY_HPP

/**
 * @file intensity.hpp
 * @brief Transition-intensity models for the operation-mode chain.
 *
 * Two kinds are supported:
 *  - per_plant: independent plants, each with a startup rate (a function
 *    of elapsed time since the plant's activation) and a constant failure
 *    rate while operating;
 *  - tabular: explicit constant rates per (switch mode, from, to) triple,
 *    restricted to allowed transitions.
 *
 * Both expose a uniform rate(s, x, nu, b, a, a') query plus the global
 * rate bound used as a thinning majorant.
 */

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "switchlag/modes.hpp"

namespace switchlag {

/// Scalar rate as a function of elapsed time u >= 0.
struct RateFn {
    enum class Kind { Constant, PiecewiseConstant, AffineCapped };

    Kind kind = Kind::Constant;
    double value = 0.0;                 // Constant
    std::vector<double> breakpoints;    // PiecewiseConstant: ascending, first entry 0
    std::vector<double> values;         // PiecewiseConstant: one per breakpoint
    double intercept = 0.0, slope = 0.0, cap = 0.0;  // AffineCapped: min(intercept + slope*u, cap)

    static RateFn constant(double v) {
        RateFn f;
        f.kind = Kind::Constant;
        f.value = v;
        return f;
    }

    static RateFn piecewise(std::vector<double> bps, std::vector<double> vals) {
        if (bps.empty() || bps.size() != vals.size() || bps.front() != 0.0)
            throw std::invalid_argument("RateFn: piecewise breakpoints must start at 0 and match values");
        for (size_t i = 1; i < bps.size(); ++i)
            if (bps[i] <= bps[i - 1]) throw std::invalid_argument("RateFn: breakpoints not ascending");
        RateFn f;
        f.kind = Kind::PiecewiseConstant;
        f.breakpoints = std::move(bps);
        f.values = std::move(vals);
        return f;
    }

    static RateFn affine_capped(double intercept, double slope, double cap) {
        if (intercept < 0 || slope < 0 || cap < 0)
            throw std::invalid_argument("RateFn: affine_capped requires intercept, slope, cap >= 0");
        RateFn f;
        f.kind = Kind::AffineCapped;
        f.intercept = intercept;
        f.slope = slope;
        f.cap = cap;
        return f;
    }

    double operator()(double u) const {
        u = std::max(u, 0.0);
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::PiecewiseConstant: {
                size_t i = breakpoints.size() - 1;
                while (i > 0 && breakpoints[i] > u) --i;
                return values[i];
            }
            case Kind::AffineCapped: return std::min(intercept + slope * u, cap);
        }
        return 0.0;
    }

    double max_value() const {
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::PiecewiseConstant: {
                double m = 0.0;
                for (double v : values) m = std::max(m, v);
                return m;
            }
            case Kind::AffineCapped: return slope > 0 ? cap : std::min(intercept, cap);
        }
        return 0.0;
    }

    double min_value() const {
        switch (kind) {
            case Kind::Constant: return value;
            case Kind::PiecewiseConstant: {
                double m = values[0];
                for (double v : values) m = std::min(m, v);
                return m;
            }
            case Kind::AffineCapped: return std::min(intercept, cap);
        }
        return 0.0;
    }

    /// Lipschitz constant in the elapsed-time argument, when one exists.
    std::optional<double> lipschitz() const {
        switch (kind) {
            case Kind::Constant: return 0.0;
            case Kind::PiecewiseConstant:
                return values.size() <= 1 ? std::optional<double>(0.0) : std::nullopt;
            case Kind::AffineCapped: return std::abs(slope);
        }
        return std::nullopt;
    }
};

/// Independent-plant model: plant i starts up at rate startup[i](s - nu_i)
/// while commanded on but off, and fails at rate fail[i] while operating.
struct PerPlantIntensity {
    std::vector<RateFn> startup;
    std::vector<double> fail;
};

/// Explicit constant rates keyed by (switch code, from op code, to op code).
struct TabularIntensity {
    std::map<std::tuple<int, int, int>, double> rates;
};

class IntensityModel {
public:
    static IntensityModel per_plant(PerPlantIntensity m, const ModeTables& tables) {
        IntensityModel im;
        im.model_ = std::move(m);
        im.validate_and_bound(tables);
        return im;
    }

    static IntensityModel tabular(TabularIntensity m, const ModeTables& tables) {
        IntensityModel im;
        im.model_ = std::move(m);
        im.validate_and_bound(tables);
        return im;
    }

    bool is_per_plant() const { return std::holds_alternative<PerPlantIntensity>(model_); }
    const PerPlantIntensity& per_plant_model() const { return std::get<PerPlantIntensity>(model_); }

    /// Off-diagonal transition rate a -> to at time s. `nu` holds the
    /// activation times; `x` is the exogenous factor value (unused by the
    /// shipped model kinds). Returns 0 for transitions outside A_{a,b}.
    double rate(double s, double x, const std::vector<double>& nu, const SwitchMode& b,
                const OpMode& a, const OpMode& to, const ModeTables& tables) const {
        (void)x;
        if (const auto* pp = std::get_if<PerPlantIntensity>(&model_)) {
            // Exactly one component differs: 0->1 (startup) or 1->-1 (failure).
            int idx = -1;
            for (int i = 0; i < a.n(); ++i) {
                if (a.comps[i] != to.comps[i]) {
                    if (idx >= 0) return 0.0;
                    idx = i;
                }
            }
            if (idx < 0) return 0.0;
            if (a.comps[idx] == 0 && to.comps[idx] == 1 && b.bits[idx] == 1)
                return pp->startup[idx](s - nu[idx]);
            if (a.comps[idx] == 1 && to.comps[idx] == -1)
                return pp->fail[idx];
            return 0.0;
        }
        const auto& tab = std::get<TabularIntensity>(model_);
        auto it = tab.rates.find({tables.switch_code(b), tables.op_code(a), tables.op_code(to)});
        return it == tab.rates.end() ? 0.0 : it->second;
    }

    /// Total rate out of a and per-target rates over targets = A_{a,b} \ {a}.
    double total_rate(double s, double x, const std::vector<double>& nu, const SwitchMode& b,
                      const OpMode& a, const std::vector<OpMode>& targets,
                      std::vector<double>& per_target, const ModeTables& tables) const {
        per_target.resize(targets.size());
        double tot = 0.0;
        for (size_t j = 0; j < targets.size(); ++j) {
            per_target[j] = rate(s, x, nu, b, a, targets[j], tables);
            tot += per_target[j];
        }
        return tot;
    }

    /// K_lambda: bound on every individual off-diagonal rate.
    double rate_bound() const { return rate_bound_; }

    /// Declared Lipschitz constant in nu, when certifiable for the model kind.
    std::optional<double> lipschitz_nu() const { return lipschitz_nu_; }

private:
    void validate_and_bound(const ModeTables& tables) {
        if (const auto* pp = std::get_if<PerPlantIntensity>(&model_)) {
            if (static_cast<int>(pp->startup.size()) != tables.n() ||
                static_cast<int>(pp->fail.size()) != tables.n())
                throw std::invalid_argument("IntensityModel: per-plant arrays must have one entry per plant");
            double bound = 0.0;
            bool lips_ok = true;
            double lips = 0.0;
            for (int i = 0; i < tables.n(); ++i) {
                if (pp->fail[i] < 0 || pp->startup[i].min_value() < 0)
                    throw std::invalid_argument("IntensityModel: negative rate for plant " + std::to_string(i));
                bound = std::max(bound, std::max(pp->startup[i].max_value(), pp->fail[i]));
                if (auto l = pp->startup[i].lipschitz())
                    lips = std::max(lips, *l);
                else
                    lips_ok = false;
            }
            rate_bound_ = bound;
            lipschitz_nu_ = lips_ok ? std::optional<double>(lips) : std::nullopt;
            return;
        }
        const auto& tab = std::get<TabularIntensity>(model_);
        double bound = 0.0;
        for (const auto& [key, r] : tab.rates) {
            if (r < 0) throw std::invalid_argument("IntensityModel: negative tabular rate");
            auto [bc, fromc, toc] = key;
            if (bc < 0 || bc >= static_cast<int>(tables.switch_modes().size()))
                throw std::invalid_argument("IntensityModel: tabular switch code out of range");
            const SwitchMode& b = tables.switch_modes()[bc];
            bool found_from = false, found_to = false;
            for (const auto& a : tables.op_space(b)) {
                if (tables.op_code(a) == fromc) {
                    found_from = true;
                    for (const auto& t : tables.transitions(a, b))
                        if (tables.op_code(t) == toc && toc != fromc) found_to = true;
                }
            }
            if (!found_from || !found_to)
                throw std::invalid_argument("IntensityModel: tabular rate on disallowed transition");
            bound = std::max(bound, r);
        }
        rate_bound_ = bound;
        lipschitz_nu_ = 0.0;  // constant in nu
    }

    std::variant<PerPlantIntensity, TabularIntensity> model_;
    double rate_bound_ = 0.0;
    std::optional<double> lipschitz_nu_;
};

}  // namespace switchlag

#endif  // SWITCHLAG_INTENSITY_HPP
