#ifndef SWITCHLAG_SPEC_IO_HPP
#define SWITCHLAG_SPEC_IO_HPP

/**
 * @file spec_io.hpp
 * @brief Problem-spec JSON ingestion.
 *
 * See README.md for the document layout. Parsing is strict: unknown reward
 * kinds, wrong vector lengths or out-of-range modes raise ParseError with
 * the offending location.
 */

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "switchlag/problem.hpp"
#include "switchlag/sha256.hpp"

namespace switchlag {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace spec_detail {

using nlohmann::json;

inline const json& need(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ParseError(where + ": missing required key '" + key + "'");
    return *it;
}

inline PlantVec mode_vector(const json& j, int n, int lo, int hi, const std::string& where) {
    if (!j.is_array() || static_cast<int>(j.size()) != n)
        throw ParseError(where + ": expected an array of " + std::to_string(n) + " entries");
    PlantVec v(n);
    for (int i = 0; i < n; ++i) {
        int c = j[i].get<int>();
        if (c < lo || c > hi)
            throw ParseError(where + "[" + std::to_string(i) + "]: value " + std::to_string(c) +
                             " outside [" + std::to_string(lo) + "," + std::to_string(hi) + "]");
        v[i] = static_cast<int8_t>(c);
    }
    return v;
}

inline RateFn rate_fn(const json& j, const std::string& where) {
    std::string kind = need(j, "kind", where).get<std::string>();
    if (kind == "constant") return RateFn::constant(need(j, "value", where).get<double>());
    if (kind == "piecewise_constant")
        return RateFn::piecewise(need(j, "breakpoints", where).get<std::vector<double>>(),
                                 need(j, "values", where).get<std::vector<double>>());
    if (kind == "affine_capped")
        return RateFn::affine_capped(need(j, "intercept", where).get<double>(),
                                     need(j, "slope", where).get<double>(),
                                     need(j, "cap", where).get<double>());
    throw ParseError(where + ": unknown rate kind '" + kind + "'");
}

inline PiecewiseLinear piecewise_linear(const json& j, const std::string& where) {
    PiecewiseLinear pw;
    if (j.is_number()) return PiecewiseLinear::constant(j.get<double>());
    std::string kind = need(j, "kind", where).get<std::string>();
    if (kind == "constant") return PiecewiseLinear::constant(need(j, "value", where).get<double>());
    if (kind != "piecewise_linear") throw ParseError(where + ": unknown cost kind '" + kind + "'");
    pw.ts = need(j, "times", where).get<std::vector<double>>();
    pw.vs = need(j, "values", where).get<std::vector<double>>();
    try {
        pw.check();
    } catch (const std::exception& e) {
        throw ParseError(where + ": " + e.what());
    }
    return pw;
}

inline RewardTerm reward_term(const json& j, int n, bool running, const std::string& where) {
    RewardTerm t;
    std::string kind = need(j, "kind", where).get<std::string>();
    auto plant_of = [&](const json& jj) {
        int p = need(jj, "plant", where).get<int>();
        if (p < 0 || p >= n) throw ParseError(where + ": plant index out of range");
        return p;
    };
    if (kind == "constant") {
        t.kind = RewardTerm::Kind::Constant;
        t.value = need(j, "value", where).get<double>();
    } else if (kind == "on_indicator") {
        t.kind = RewardTerm::Kind::OnIndicator;
        t.plant = plant_of(j);
        t.value = need(j, "weight", where).get<double>();
    } else if (kind == "per_mode_constant") {
        t.kind = RewardTerm::Kind::PerModeConstant;
        t.mode.comps = mode_vector(need(j, "mode", where), n, -1, 1, where + ".mode");
        t.value = need(j, "value", where).get<double>();
    } else if (kind == "ramp_in_z") {
        t.kind = RewardTerm::Kind::RampInZ;
        t.plant = plant_of(j);
        t.value = need(j, "weight", where).get<double>();
        t.ramp = need(j, "ramp_time", where).get<double>();
        if (t.ramp <= 0) throw ParseError(where + ": ramp_time must be positive");
    } else if (kind == "poly_in_x") {
        t.kind = RewardTerm::Kind::PolyInX;
        t.coeffs = need(j, "coeffs", where).get<std::vector<double>>();
    } else if (kind == "linear_in_t") {
        if (!running) throw ParseError(where + ": linear_in_t is a running-reward term");
        t.kind = RewardTerm::Kind::LinearInT;
        t.value = need(j, "slope", where).get<double>();
    } else if (kind == "on_price_curve") {
        if (!running) throw ParseError(where + ": on_price_curve is a running-reward term");
        t.kind = RewardTerm::Kind::OnPriceCurve;
        t.plant = plant_of(j);
        t.curve.ts = need(j, "times", where).get<std::vector<double>>();
        t.curve.vs = need(j, "values", where).get<std::vector<double>>();
        try {
            t.curve.check();
        } catch (const std::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
    } else {
        throw ParseError(where + ": unknown reward kind '" + kind + "'");
    }
    return t;
}

}  // namespace spec_detail

inline ProblemSpec parse_problem(const nlohmann::json& j) {
    using spec_detail::need;
    using nlohmann::json;

    ProblemSpec spec;
    const auto& meta = need(j, "meta", "spec");
    spec.name = need(meta, "name", "meta").get<std::string>();
    spec.seed = meta.value("seed", uint64_t(1));

    spec.horizon = need(j, "horizon", "spec").get<double>();
    if (spec.horizon <= 0) throw ParseError("horizon must be positive");
    spec.n_plants = need(j, "plants", "spec").get<int>();
    try {
        spec.tables = ModeTables::build(spec.n_plants);
    } catch (const std::exception& e) {
        throw ParseError(std::string("plants: ") + e.what());
    }
    const int n = spec.n_plants;

    // intensity
    {
        const auto& ji = need(j, "intensity", "spec");
        std::string kind = need(ji, "kind", "intensity").get<std::string>();
        if (ji.contains("rate_bound")) spec.declared_rate_bound = ji["rate_bound"].get<double>();
        try {
            if (kind == "per_plant") {
                PerPlantIntensity pp;
                const auto& plants = need(ji, "plants", "intensity");
                if (static_cast<int>(plants.size()) != n)
                    throw ParseError("intensity.plants: expected " + std::to_string(n) + " entries");
                for (int i = 0; i < n; ++i) {
                    std::string where = "intensity.plants[" + std::to_string(i) + "]";
                    pp.startup.push_back(spec_detail::rate_fn(need(plants[i], "startup", where), where));
                    pp.fail.push_back(need(plants[i], "fail_rate", where).get<double>());
                }
                spec.intensity = IntensityModel::per_plant(std::move(pp), spec.tables);
            } else if (kind == "tabular") {
                TabularIntensity tab;
                for (const auto& e : need(ji, "rates", "intensity")) {
                    SwitchMode b{spec_detail::mode_vector(need(e, "b", "intensity.rates"), n, 0, 1,
                                                          "intensity.rates.b")};
                    OpMode from{spec_detail::mode_vector(need(e, "from", "intensity.rates"), n, -1, 1,
                                                         "intensity.rates.from")};
                    OpMode to{spec_detail::mode_vector(need(e, "to", "intensity.rates"), n, -1, 1,
                                                       "intensity.rates.to")};
                    tab.rates[{spec.tables.switch_code(b), spec.tables.op_code(from),
                               spec.tables.op_code(to)}] =
                        need(e, "rate", "intensity.rates").get<double>();
                }
                spec.intensity = IntensityModel::tabular(std::move(tab), spec.tables);
            } else {
                throw ParseError("intensity.kind: unknown kind '" + kind + "'");
            }
        } catch (const ParseError&) {
            throw;
        } catch (const std::exception& e) {
            throw ParseError(std::string("intensity: ") + e.what());
        }
    }

    // rewards
    {
        const auto& jr = need(j, "rewards", "spec");
        int idx = 0;
        for (const auto& e : need(jr, "psi", "rewards"))
            spec.rewards.psi_terms.push_back(
                spec_detail::reward_term(e, n, true, "rewards.psi[" + std::to_string(idx++) + "]"));
        idx = 0;
        for (const auto& e : need(jr, "upsilon", "rewards"))
            spec.rewards.upsilon_terms.push_back(spec_detail::reward_term(
                e, n, false, "rewards.upsilon[" + std::to_string(idx++) + "]"));
    }

    // switching costs
    {
        const auto& jc = need(j, "switching_costs", "spec");
        const int m = static_cast<int>(spec.tables.switch_modes().size());
        double def = 0.0;
        PiecewiseLinear def_pw = PiecewiseLinear::constant(def);
        if (jc.contains("default"))
            def_pw = spec_detail::piecewise_linear(jc["default"], "switching_costs.default");
        spec.costs.n_modes = m;
        spec.costs.costs.assign(size_t(m) * m, def_pw);
        for (int i = 0; i < m; ++i)
            spec.costs.cost_fn(i, i) = PiecewiseLinear::constant(0.0);
        if (jc.contains("entries")) {
            int idx = 0;
            for (const auto& e : jc["entries"]) {
                std::string where = "switching_costs.entries[" + std::to_string(idx++) + "]";
                SwitchMode from{spec_detail::mode_vector(need(e, "from", where), n, 0, 1,
                                                         where + ".from")};
                SwitchMode to{spec_detail::mode_vector(need(e, "to", where), n, 0, 1, where + ".to")};
                spec.costs.cost_fn(spec.tables.switch_index(from), spec.tables.switch_index(to)) =
                    spec_detail::piecewise_linear(need(e, "cost", where), where + ".cost");
            }
        }
        spec.costs.loop_epsilon = need(jc, "loop_epsilon", "switching_costs").get<double>();
    }

    // factor (optional)
    if (j.contains("factor") && !j["factor"].is_null()) {
        const auto& jf = j["factor"];
        FactorConfig f;
        f.drift_coeffs = need(jf, "drift", "factor").get<std::vector<double>>();
        f.vol_coeffs = need(jf, "vol", "factor").get<std::vector<double>>();
        f.x_min = need(jf, "x_min", "factor").get<double>();
        f.x_max = need(jf, "x_max", "factor").get<double>();
        f.n_nodes = need(jf, "nodes", "factor").get<int>();
        f.x0 = need(jf, "x0", "factor").get<double>();
        if (f.n_nodes < 3) throw ParseError("factor.nodes: need at least 3");
        if (f.x_max <= f.x_min) throw ParseError("factor: x_max must exceed x_min");
        spec.factor = std::move(f);
    }

    // grid
    {
        const auto& jg = need(j, "grid", "spec");
        spec.n_t = need(jg, "n_t", "grid").get<int>();
        spec.nu_steps = jg.value("nu_steps", 4);
        spec.z_steps = jg.value("z_steps", 4);
        if (spec.n_t < 1 || spec.nu_steps < 1 || spec.z_steps < 1)
            throw ParseError("grid: n_t, nu_steps, z_steps must be >= 1");
    }

    if (j.contains("solver")) {
        spec.solver.tol = j["solver"].value("tol", -1.0);
        spec.solver.k_max = j["solver"].value("k_max", -1);
    }
    if (j.contains("evaluation")) {
        spec.evaluation.n_paths = j["evaluation"].value("n_paths", 10000);
        spec.evaluation.delta_switch = j["evaluation"].value("delta_switch", 1e-9);
        if (spec.evaluation.n_paths < 1) throw ParseError("evaluation.n_paths must be >= 1");
    }

    if (j.contains("start") && !j["start"].is_null()) {
        const auto& js = j["start"];
        HybridState s;
        s.t = js.value("t", 0.0);
        s.a.comps = spec_detail::mode_vector(need(js, "a", "start"), n, -1, 1, "start.a");
        s.b.bits = spec_detail::mode_vector(need(js, "b", "start"), n, 0, 1, "start.b");
        s.nu = js.value("nu", std::vector<double>(n, 0.0));
        s.z = js.value("z", std::vector<double>(n, 0.0));
        try {
            check_state(s, spec.horizon);
        } catch (const std::exception& e) {
            throw ParseError(std::string("start: ") + e.what());
        }
        spec.start = std::move(s);
    }

    return spec;
}

struct LoadedSpec {
    ProblemSpec spec;
    std::string sha256;
    std::string raw;
};

inline LoadedSpec load_problem_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open spec file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    LoadedSpec out;
    out.raw = ss.str();
    out.sha256 = Sha256::hex(out.raw);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(out.raw);
    } catch (const std::exception& e) {
        throw ParseError(std::string("JSON parse failure in ") + path + ": " + e.what());
    }
    out.spec = parse_problem(j);
    return out;
}

}  // namespace switchlag

#endif  // SWITCHLAG_SPEC_IO_HPP
