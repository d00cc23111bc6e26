#ifndef SWITCHLAG_DYNAMICS_HPP
#define SWITCHLAG_DYNAMICS_HPP

/**
 * @file dynamics.hpp
 * @brief Simulation of the controlled stochastic hybrid system.
 *
 * The operation mode follows a continuous-time chain on A_{a,b} whose
 * intensities may depend on calendar time and the activation times nu.
 * Jumps are sampled exactly by thinning against the majorant
 * K_lambda * |A_{a,b} \ {a}|. Switch interventions recompose the chain:
 * at tau the mode becomes a ∧ beta, activation times update per
 * nu' = nu*beta + tau*(beta - b)^+, and elapsed on-times are clamped to
 * zero on every component that is not operating.
 */

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "switchlag/intensity.hpp"
#include "switchlag/modes.hpp"
#include "switchlag/util.hpp"

namespace switchlag {

// ---------------------------------------------------------------------------
// State, controls, paths.

struct HybridState {
    double t = 0.0;
    OpMode a;
    SwitchMode b;
    std::vector<double> nu;  // activation times, 0 where b_i = 0
    std::vector<double> z;   // elapsed on-time, 0 where a_i <= 0
    int x_node = -1;         // factor-grid node, -1 when no factor

    static HybridState initial(const ModeTables& tables, int x_node = -1) {
        HybridState s;
        s.a.comps.assign(tables.n(), 0);
        s.b.bits.assign(tables.n(), 0);
        s.nu.assign(tables.n(), 0.0);
        s.z.assign(tables.n(), 0.0);
        s.x_node = x_node;
        return s;
    }
};

inline void check_state(const HybridState& s, double horizon) {
    const int n = s.a.n();
    if (s.b.n() != n || int(s.nu.size()) != n || int(s.z.size()) != n)
        throw std::invalid_argument("HybridState: dimension mismatch");
    for (int i = 0; i < n; ++i) {
        if (s.a.comps[i] > s.b.bits[i])
            throw std::invalid_argument("HybridState: operation mode exceeds switch mode");
        if (s.b.bits[i] == 0 && s.nu[i] != 0.0)
            throw std::invalid_argument("HybridState: nu must be 0 where b is 0");
        if (s.a.comps[i] <= 0 && s.z[i] != 0.0)
            throw std::invalid_argument("HybridState: z must be 0 where a <= 0");
        if (s.nu[i] < 0 || s.nu[i] > horizon || s.z[i] < 0 || s.z[i] > horizon)
            throw std::invalid_argument("HybridState: nu/z outside [0,T]");
    }
}

struct ControlAction {
    double time;
    SwitchMode target;
};

/// Open-loop control: nondecreasing times, consecutive targets differ.
using Control = std::vector<ControlAction>;

inline void check_control(const Control& u, const SwitchMode& b0, double horizon) {
    const SwitchMode* prev = &b0;
    double prev_t = 0.0;
    for (const auto& [time, target] : u) {
        if (time < prev_t || time > horizon)
            throw std::invalid_argument("Control: intervention times must be nondecreasing in [0,T]");
        if (target == *prev)
            throw std::invalid_argument("Control: consecutive switch targets must differ");
        prev = &target;
        prev_t = time;
    }
}

enum class EventKind : uint8_t { ChainJump, Switch };

struct PathEvent {
    double time;
    EventKind kind;
    OpMode a;
    SwitchMode b;
    std::vector<double> nu;
    std::vector<double> z;
};

struct HybridPath {
    HybridState start;
    std::vector<PathEvent> events;
    std::vector<int> factor_nodes;  // node per grid slice when a factor is present
    double payoff_running = 0.0;
    double payoff_terminal = 0.0;
    double cost_switch = 0.0;
    uint64_t seed = 0;

    double total_payoff() const { return payoff_running + payoff_terminal - cost_switch; }
};

// ---------------------------------------------------------------------------
// Elementary state updates.

/// Advance elapsed on-times by dt with no chain jump inside: operating
/// components accrue (capped at T), all others stay clamped at zero.
inline std::vector<double> step_theta(const std::vector<double>& z, const OpMode& a, double dt,
                                      double horizon) {
    if (dt < 0) throw std::invalid_argument("step_theta: negative dt");
    std::vector<double> out(z.size());
    for (size_t i = 0; i < z.size(); ++i)
        out[i] = a.comps[i] == 1 ? std::min(z[i] + dt, horizon) : 0.0;
    return out;
}

/// nu' = nu*beta + tau*(beta - b_old)^+ : keep the activation time of a
/// plant that stays commanded on, stamp tau on a fresh off->on command,
/// zero on a commanded-off plant.
inline std::vector<double> update_activation(const std::vector<double>& nu, const SwitchMode& b_old,
                                             const SwitchMode& beta, double tau) {
    if (b_old.n() != beta.n() || int(nu.size()) != b_old.n())
        throw std::invalid_argument("update_activation: dimension mismatch");
    std::vector<double> out(nu.size());
    for (size_t i = 0; i < nu.size(); ++i) {
        double fresh = std::max(0, int(beta.bits[i]) - int(b_old.bits[i]));
        out[i] = nu[i] * beta.bits[i] + tau * fresh;
    }
    return out;
}

/// Clamp z to the domain of operation mode a (zero wherever a_i != 1).
inline std::vector<double> clamp_z(const std::vector<double>& z, const OpMode& a, double horizon) {
    std::vector<double> out(z.size());
    for (size_t i = 0; i < z.size(); ++i)
        out[i] = a.comps[i] == 1 ? std::min(z[i], horizon) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Exact-law jump sampling (thinning).

struct ModelViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct JumpSample {
    double time;
    OpMode to;
};

/// First chain jump in (t_from, t_until], or nullopt. The proposal rate is
/// the declared majorant; any observed total rate above it makes thinning
/// unsound and raises ModelViolation.
inline std::optional<JumpSample> sample_next_jump(const IntensityModel& model, const ModeTables& tables,
                                                  const OpMode& a, const SwitchMode& b,
                                                  const std::vector<double>& nu, double x_value,
                                                  double t_from, double t_until, std::mt19937_64& rng) {
    const auto& all = tables.transitions(a, b);
    const size_t n_targets = all.size() - 1;  // A_{a,b} always contains a
    if (n_targets == 0) return std::nullopt;

    std::vector<OpMode> targets;
    targets.reserve(n_targets);
    for (const auto& m : all)
        if (!(m == a)) targets.push_back(m);

    const double majorant = model.rate_bound() * double(n_targets);
    if (majorant <= 0.0) return std::nullopt;

    std::vector<double> rates;
    double t = t_from;
    while (true) {
        t += sample_exponential(rng, majorant);
        if (t > t_until) return std::nullopt;
        double total = model.total_rate(t, x_value, nu, b, a, targets, rates, tables);
        if (total > majorant * (1.0 + 1e-12))
            throw ModelViolation("intensity above declared bound at t=" + std::to_string(t) +
                                 " (thinning unsound)");
        double u = uniform01(rng) * majorant;
        if (u >= total) continue;  // thinned proposal
        double acc = 0.0;
        for (size_t j = 0; j < targets.size(); ++j) {
            acc += rates[j];
            if (u < acc) return JumpSample{t, targets[j]};
        }
        return JumpSample{t, targets.back()};
    }
}

// ---------------------------------------------------------------------------
// Chain simulation and control composition.

/// Simulate the uncontrolled chain from `start` until `until` (or absorption),
/// mutating `state` in place and appending chain-jump events.
inline void simulate_chain_into(const IntensityModel& model, const ModeTables& tables,
                                HybridState& state, double until, double horizon,
                                std::vector<PathEvent>& events, std::mt19937_64& rng,
                                double x_value = 0.0) {
    while (state.t < until) {
        auto jump = sample_next_jump(model, tables, state.a, state.b, state.nu, x_value, state.t,
                                     until, rng);
        if (!jump) {
            state.z = step_theta(state.z, state.a, until - state.t, horizon);
            state.t = until;
            return;
        }
        state.z = step_theta(state.z, state.a, jump->time - state.t, horizon);
        state.z = clamp_z(state.z, jump->to, horizon);
        state.a = jump->to;
        state.t = jump->time;
        events.push_back({state.t, EventKind::ChainJump, state.a, state.b, state.nu, state.z});
    }
}

inline HybridPath simulate_chain(const IntensityModel& model, const ModeTables& tables,
                                 const HybridState& start, double until, double horizon,
                                 std::mt19937_64& rng, uint64_t seed = 0) {
    if (until > horizon) throw std::invalid_argument("simulate_chain: until > T");
    check_state(start, horizon);
    HybridPath path;
    path.start = start;
    path.seed = seed;
    HybridState s = start;
    simulate_chain_into(model, tables, s, until, horizon, path.events, rng);
    return path;
}

/// Apply a switch at time tau (state.t == tau assumed): operation mode
/// becomes a ∧ beta, activation times and elapsed on-times update, and a
/// switch event is recorded.
inline void apply_switch(const ModeTables& tables, HybridState& state, const SwitchMode& beta,
                         double horizon, std::vector<PathEvent>& events) {
    (void)tables;
    state.a = post_switch_mode(state.a, beta);
    state.nu = update_activation(state.nu, state.b, beta, state.t);
    state.b = beta;
    state.z = clamp_z(state.z, state.a, horizon);
    events.push_back({state.t, EventKind::Switch, state.a, state.b, state.nu, state.z});
}

/// Compose chain segments with the open-loop control u on [start.t, T].
/// A chain jump landing exactly on an intervention time is applied before
/// the switch.
inline HybridPath apply_control(const IntensityModel& model, const ModeTables& tables,
                                const HybridState& start, const Control& u, double horizon,
                                std::mt19937_64& rng, uint64_t seed = 0) {
    check_state(start, horizon);
    check_control(u, start.b, horizon);
    HybridPath path;
    path.start = start;
    path.seed = seed;
    HybridState s = start;
    for (const auto& action : u) {
        if (action.time < s.t)
            throw std::invalid_argument("apply_control: intervention before current time");
        simulate_chain_into(model, tables, s, action.time, horizon, path.events, rng);
        apply_switch(tables, s, action.target, horizon, path.events);
    }
    simulate_chain_into(model, tables, s, horizon, horizon, path.events, rng);
    return path;
}

}  // namespace switchlag

#endif  // SWITCHLAG_DYNAMICS_HPP
