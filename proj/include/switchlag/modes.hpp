#ifndef SWITCHLAG_MODES_HPP
#define SWITCHLAG_MODES_HPP

/**
 * @file modes.hpp
 * @brief Combinatorial mode structure for n-plant switching systems.
 *
 * A plant is commanded on/off through a switch mode b in {0,1}^n and
 * physically sits in an operation mode a in {-1,0,1}^n (-1 failed,
 * 0 off, 1 operating) with a <= b componentwise. ModeTables enumerates
 * the feasible (a,b) pairs, the operation modes each pair may transition
 * to, and the absorbing operation modes per switch mode.
 */

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace switchlag {

using PlantVec = std::vector<int8_t>;

struct SwitchMode {
    PlantVec bits;  // each 0 or 1

    int n() const { return static_cast<int>(bits.size()); }
    bool operator==(const SwitchMode& o) const { return bits == o.bits; }
    bool operator!=(const SwitchMode& o) const { return bits != o.bits; }
};

struct OpMode {
    PlantVec comps;  // each -1, 0 or 1

    int n() const { return static_cast<int>(comps.size()); }
    bool operator==(const OpMode& o) const { return comps == o.comps; }
    bool operator!=(const OpMode& o) const { return comps != o.comps; }
};

struct ModePair {
    OpMode a;
    SwitchMode b;

    bool operator==(const ModePair& o) const { return a == o.a && b == o.b; }
};

inline std::string to_string(const SwitchMode& b) {
    std::string s = "(";
    for (int i = 0; i < b.n(); ++i) s += (i ? "," : "") + std::to_string(int(b.bits[i]));
    return s + ")";
}

inline std::string to_string(const OpMode& a) {
    std::string s = "(";
    for (int i = 0; i < a.n(); ++i) s += (i ? "," : "") + std::to_string(int(a.comps[i]));
    return s + ")";
}

/// Componentwise minimum a ∧ beta: the operation mode right after
/// commanding switch mode beta (turning a plant off acts instantly,
/// turning it on does not).
inline OpMode post_switch_mode(const OpMode& a, const SwitchMode& beta) {
    if (a.n() != beta.n())
        throw std::invalid_argument("post_switch_mode: dimension mismatch (" +
                                    std::to_string(a.n()) + " vs " + std::to_string(beta.n()) + ")");
    OpMode r = a;
    for (int i = 0; i < a.n(); ++i)
        r.comps[i] = std::min<int8_t>(a.comps[i], beta.bits[i]);
    return r;
}

inline bool leq(const OpMode& a, const SwitchMode& b) {
    for (int i = 0; i < a.n(); ++i)
        if (a.comps[i] > b.bits[i]) return false;
    return true;
}

/**
 * @brief Fully enumerated mode tables for an n-plant system.
 *
 * Enumeration order is lexicographic (component 0 most significant,
 * values ordered -1 < 0 < 1 for operation modes, 0 < 1 for switch
 * modes); pairs are ordered switch-mode-major. All indices returned
 * here are stable and used for tensor addressing elsewhere.
 *
 * Immutable after construction; safe for concurrent reads.
 */
class ModeTables {
public:
    static constexpr int kMaxPlants = 8;

    static ModeTables build(int n) {
        if (n < 1 || n > kMaxPlants)
            throw std::invalid_argument(
                "ModeTables: plant count " + std::to_string(n) +
                " outside [1," + std::to_string(kMaxPlants) +
                "]; full tables grow as 6^n and stop being enumerable");
        return ModeTables(n);
    }

    int n() const { return n_; }

    const std::vector<SwitchMode>& switch_modes() const { return switch_modes_; }
    const std::vector<ModePair>& pairs() const { return pairs_; }

    int switch_index(const SwitchMode& b) const { return switch_code(b); }

    int pair_index(const OpMode& a, const SwitchMode& b) const {
        int idx = pair_index_by_code_[op_code(a) * two_n_ + switch_code(b)];
        if (idx < 0)
            throw std::invalid_argument("ModeTables: infeasible pair " + to_string(a) + "," + to_string(b));
        return idx;
    }
    int pair_index(const ModePair& p) const { return pair_index(p.a, p.b); }

    /// All operation modes a' the pair (a,b) may transition to (contains a itself).
    const std::vector<OpMode>& transitions(int pair_idx) const { return transitions_[pair_idx]; }
    const std::vector<OpMode>& transitions(const OpMode& a, const SwitchMode& b) const {
        return transitions_[pair_index(a, b)];
    }

    /// Absorbing operation modes for switch mode b.
    const std::vector<OpMode>& absorbing(const SwitchMode& b) const { return absorbing_[switch_code(b)]; }

    bool is_absorbing(const OpMode& a, const SwitchMode& b) const {
        for (int i = 0; i < n_; ++i)
            if (a.comps[i] != -1 && a.comps[i] != -int8_t(b.bits[i])) return false;
        return true;
    }

    /// I \ {b}: every switch mode the operator may switch to from b.
    std::vector<SwitchMode> allowed_switches(const SwitchMode& b) const {
        std::vector<SwitchMode> out;
        out.reserve(switch_modes_.size() - 1);
        for (const auto& m : switch_modes_)
            if (m != b) out.push_back(m);
        return out;
    }

    /// All operation modes a <= b, lexicographic. The per-b state space
    /// of the operation-mode chain.
    const std::vector<OpMode>& op_space(const SwitchMode& b) const { return op_space_[switch_code(b)]; }

    /// Position of a within op_space(b).
    int op_space_index(const OpMode& a, const SwitchMode& b) const {
        int idx = op_space_index_[switch_code(b)][op_code(a)];
        if (idx < 0)
            throw std::invalid_argument("ModeTables: " + to_string(a) + " not in op space of " + to_string(b));
        return idx;
    }

    int op_code(const OpMode& a) const {
        int c = 0;
        for (int i = 0; i < n_; ++i) c = c * 3 + (a.comps[i] + 1);
        return c;
    }

    int switch_code(const SwitchMode& b) const {
        int c = 0;
        for (int i = 0; i < n_; ++i) c = c * 2 + b.bits[i];
        return c;
    }

private:
    explicit ModeTables(int n) : n_(n) {
        two_n_ = 1;
        for (int i = 0; i < n; ++i) two_n_ *= 2;
        int three_n = 1;
        for (int i = 0; i < n; ++i) three_n *= 3;

        for (int c = 0; c < two_n_; ++c) switch_modes_.push_back(decode_switch(c));

        std::vector<OpMode> all_ops;
        for (int c = 0; c < three_n; ++c) all_ops.push_back(decode_op(c));

        pair_index_by_code_.assign(three_n * two_n_, -1);
        op_space_.resize(two_n_);
        op_space_index_.assign(two_n_, std::vector<int>(three_n, -1));
        absorbing_.resize(two_n_);

        for (int bc = 0; bc < two_n_; ++bc) {
            const SwitchMode& b = switch_modes_[bc];
            for (const auto& a : all_ops) {
                if (!leq(a, b)) continue;
                op_space_index_[bc][op_code(a)] = static_cast<int>(op_space_[bc].size());
                op_space_[bc].push_back(a);
                pair_index_by_code_[op_code(a) * two_n_ + bc] = static_cast<int>(pairs_.size());
                pairs_.push_back({a, b});
                if (is_absorbing(a, b)) absorbing_[bc].push_back(a);
            }
        }

        transitions_.resize(pairs_.size());
        for (size_t p = 0; p < pairs_.size(); ++p) {
            const OpMode& a = pairs_[p].a;
            const SwitchMode& b = pairs_[p].b;
            for (const auto& a2 : op_space_[switch_code(b)]) {
                bool ok = true;
                for (int i = 0; i < n_ && ok; ++i) {
                    if (std::abs(a2.comps[i]) < std::abs(a.comps[i])) ok = false;
                    bool frozen = (a.comps[i] == -1) || (a.comps[i] == -int8_t(b.bits[i]));
                    if (frozen && a2.comps[i] != a.comps[i]) ok = false;
                }
                if (ok) transitions_[p].push_back(a2);
            }
        }
    }

    SwitchMode decode_switch(int c) const {
        SwitchMode m;
        m.bits.resize(n_);
        for (int i = n_ - 1; i >= 0; --i) { m.bits[i] = int8_t(c % 2); c /= 2; }
        return m;
    }

    OpMode decode_op(int c) const {
        OpMode m;
        m.comps.resize(n_);
        for (int i = n_ - 1; i >= 0; --i) { m.comps[i] = int8_t(c % 3 - 1); c /= 3; }
        return m;
    }

    int n_;
    int two_n_;
    std::vector<SwitchMode> switch_modes_;
    std::vector<ModePair> pairs_;
    std::vector<int> pair_index_by_code_;             // op_code * 2^n + switch_code -> pair idx
    std::vector<std::vector<OpMode>> transitions_;    // per pair idx
    std::vector<std::vector<OpMode>> absorbing_;      // per switch code
    std::vector<std::vector<OpMode>> op_space_;       // per switch code
    std::vector<std::vector<int>> op_space_index_;    // per switch code: op_code -> position
};

}  // namespace switchlag

#endif  // SWITCHLAG_MODES_HPP
