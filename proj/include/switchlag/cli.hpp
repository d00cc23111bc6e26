#ifndef SWITCHLAG_CLI_HPP
#define SWITCHLAG_CLI_HPP

/**
 * @file cli.hpp
 * @brief Batch pipeline commands behind the CLI verbs.
 *
 * Exit-code contract: 0 ok, 1 assumption failure, 2 parse/schema error,
 * 3 solver not converged, 4 artifact/spec hash mismatch, 70 internal error.
 * Every command writes a manifest.json (command, hashes of inputs/outputs,
 * timing); reports and sidecars themselves contain no timing so reruns are
 * byte-identical.
 */

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "switchlag/artifacts.hpp"
#include "switchlag/objective.hpp"
#include "switchlag/policy.hpp"
#include "switchlag/solver.hpp"
#include "switchlag/spec_io.hpp"

namespace switchlag::cli {

constexpr int kOk = 0;
constexpr int kAssumptionFail = 1;
constexpr int kParseError = 2;
constexpr int kNotConverged = 3;
constexpr int kArtifactMismatch = 4;
constexpr int kInternalError = 70;

struct CommonOptions {
    std::string spec_path;
    std::string out_dir = ".";
    std::optional<uint64_t> seed;
    int threads = 1;
};

struct SolveOptionsCli : CommonOptions {
    std::optional<double> tol;
    std::optional<int> k_max;
    std::string slice;  // e.g. "pair=4,axes=t:z0,x=0"
};

struct EvaluateOptionsCli : CommonOptions {
    std::string field_path;
    int dump_paths = 0;  // per-path event-log CSVs to write
    std::optional<size_t> n_paths;
    std::optional<double> delta_switch;
};

struct SimulateOptionsCli : CommonOptions {
    int paths = 10;
};

namespace detail {

inline std::string file_sha256(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return Sha256::hex(ss.str());
}

class Manifest {
public:
    Manifest(std::string command, const std::string& out_dir, const LoadedSpec& loaded,
             uint64_t seed)
        : out_dir_(out_dir), start_(std::chrono::steady_clock::now()) {
        j_["format"] = "switchlag-manifest";
        j_["toolkit_version"] = kVersion;
        j_["command"] = std::move(command);
        j_["spec_sha256"] = loaded.sha256;
        j_["name"] = loaded.spec.name;
        j_["seed"] = seed;
        j_["outputs"] = nlohmann::json::array();
    }

    void add_output(const std::string& path) {
        j_["outputs"].push_back(
            {{"file", std::filesystem::path(path).filename().string()},
             {"sha256", file_sha256(path)}});
    }

    void write() {
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start_)
                      .count();
        j_["timing_ms"] = ms;
        write_text_file(out_dir_ + "/manifest.json", dump_json(j_));
    }

private:
    std::string out_dir_;
    nlohmann::json j_;
    std::chrono::steady_clock::time_point start_;
};

inline LoadedSpec load_or_exit(const std::string& path, int& code) {
    code = kOk;
    try {
        return load_problem_file(path);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        code = kParseError;
        return {};
    }
}

inline void make_out_dir(const std::string& dir) {
    std::filesystem::create_directories(dir);
}

/// Decode "pair=4,axes=t:z0,x=0,nu0=2" style slice requests.
struct SliceRequest {
    int pair = 0;
    std::string axis_a = "t", axis_b;
    std::map<std::string, int> fixed;
};

inline SliceRequest parse_slice(const std::string& s) {
    SliceRequest req;
    std::stringstream ss(s);
    std::string item;
    bool saw_pair = false;
    while (std::getline(ss, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ParseError("--slice: expected key=value in '" + item + "'");
        std::string key = item.substr(0, eq), val = item.substr(eq + 1);
        if (key == "pair") {
            req.pair = std::stoi(val);
            saw_pair = true;
        } else if (key == "axes") {
            auto colon = val.find(':');
            if (colon == std::string::npos) throw ParseError("--slice: axes needs two names A:B");
            req.axis_a = val.substr(0, colon);
            req.axis_b = val.substr(colon + 1);
        } else {
            req.fixed[key] = std::stoi(val);
        }
    }
    if (!saw_pair) throw ParseError("--slice: missing pair=<index>");
    if (req.axis_b.empty()) throw ParseError("--slice: missing axes=A:B");
    return req;
}

inline std::string slice_csv(const ValueField& field, const ModeTables& tables,
                             const SliceRequest& req) {
    const GridSpec& g = field.grid();
    if (req.pair < 0 || req.pair >= field.n_pairs()) throw ParseError("--slice: pair out of range");
    const auto& l = field.layout(req.pair);

    struct Axis {
        std::string name;
        int count;
    };
    auto axis_count = [&](const std::string& name) -> int {
        if (name == "t") return field.end_index() + 1;
        if (name == "x") return g.n_x();
        if (name.rfind("nu", 0) == 0) return g.nu_steps + 1;
        if (name.rfind('z', 0) == 0) return g.z_steps + 1;
        throw ParseError("--slice: unknown axis '" + name + "'");
    };
    auto axis_pos = [&](const std::string& name, const std::vector<int>& prefix) -> int {
        // position of nu<i>/z<i> in the pair layout
        int plant = std::stoi(name.substr(name[0] == 'n' ? 2 : 1));
        const auto& axes = name[0] == 'n' ? l.nu_axes : l.z_axes;
        for (size_t j = 0; j < axes.size(); ++j)
            if (axes[j] == plant) return int(j);
        (void)prefix;
        throw ParseError("--slice: axis '" + name + "' is inactive for this pair");
    };

    auto index_for = [&](const std::string& name, int val, int t_idx, int& x, std::vector<int>& nu,
                         std::vector<int>& z, int& t_out) {
        if (name == "t")
            t_out = val;
        else if (name == "x")
            x = val;
        else if (name[0] == 'n')
            nu[axis_pos(name, {})] = val;
        else
            z[axis_pos(name, {})] = val;
        (void)t_idx;
    };

    auto coord = [&](const std::string& name, int idx) -> double {
        if (name == "t") return idx * g.dt();
        if (name == "x") return g.x_value(idx);
        if (name[0] == 'n') return g.nu_value(idx);
        return g.z_value(idx);
    };

    std::string out = req.axis_a + "," + req.axis_b + ",value\n";
    const int ca = axis_count(req.axis_a), cb = axis_count(req.axis_b);
    for (int ia = 0; ia < ca; ++ia) {
        for (int ib = 0; ib < cb; ++ib) {
            int t_idx = 0, x = 0;
            std::vector<int> nu(l.nu_axes.size(), 0), z(l.z_axes.size(), 0);
            for (const auto& [k, v] : req.fixed) index_for(k, v, 0, x, nu, z, t_idx);
            index_for(req.axis_a, ia, 0, x, nu, z, t_idx);
            index_for(req.axis_b, ib, 0, x, nu, z, t_idx);
            size_t nf = 0, zf = 0;
            for (size_t j = 0; j < nu.size(); ++j) nf = nf * size_t(g.nu_steps + 1) + size_t(nu[j]);
            for (size_t j = 0; j < z.size(); ++j) zf = zf * size_t(g.z_steps + 1) + size_t(z[j]);
            double v = field.at(req.pair, t_idx, field.flat_index(req.pair, x, nf, zf)) +
                       field.offsets()[t_idx];
            char buf[96];
            std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.17g\n", coord(req.axis_a, ia),
                          coord(req.axis_b, ib), v);
            out += buf;
        }
    }
    (void)tables;
    return out;
}

}  // namespace detail

inline int run_validate(const CommonOptions& opt) {
    int code;
    LoadedSpec loaded = detail::load_or_exit(opt.spec_path, code);
    if (code != kOk) return code;
    try {
        detail::make_out_dir(opt.out_dir);
        detail::Manifest manifest("validate", opt.out_dir, loaded,
                                  opt.seed.value_or(loaded.spec.seed));
        auto report = validate_assumptions(loaded.spec.tables, loaded.spec.intensity,
                                           loaded.spec.rewards, loaded.spec.costs,
                                           loaded.spec.validation_options());
        const std::string path = opt.out_dir + "/validation.json";
        write_text_file(path, dump_json(validation_json(report)));
        manifest.add_output(path);
        manifest.write();
        std::cout << (report.all_pass ? "validation passed" : "validation FAILED") << " ("
                  << path << ")\n";
        return report.all_pass ? kOk : kAssumptionFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternalError;
    }
}

inline int run_solve(const SolveOptionsCli& opt) {
    int code;
    LoadedSpec loaded = detail::load_or_exit(opt.spec_path, code);
    if (code != kOk) return code;
    try {
        detail::make_out_dir(opt.out_dir);
        detail::Manifest manifest("solve", opt.out_dir, loaded,
                                  opt.seed.value_or(loaded.spec.seed));

        auto report = validate_assumptions(loaded.spec.tables, loaded.spec.intensity,
                                           loaded.spec.rewards, loaded.spec.costs,
                                           loaded.spec.validation_options());
        if (!report.all_pass) {
            write_text_file(opt.out_dir + "/validation.json",
                            dump_json(validation_json(report)));
            std::cerr << "assumptions fail; see validation.json\n";
            return kAssumptionFail;
        }

        GridSpec grid = loaded.spec.grid();
        SolveOptions sopt;
        sopt.tol = opt.tol.value_or(loaded.spec.solver.tol);
        sopt.k_max = opt.k_max.value_or(loaded.spec.solver.k_max);
        sopt.threads = opt.threads;
        SolveResult res = solve(loaded.spec, grid, sopt);

        const std::string bin = opt.out_dir + "/field.bin";
        const std::string side = opt.out_dir + "/field.json";
        const std::string conv = opt.out_dir + "/convergence.csv";
        save_field(res.field, bin);
        write_text_file(side, dump_json(sidecar_json(res.field, res.diag, loaded.sha256,
                                                     loaded.spec.name)));
        write_text_file(conv, convergence_csv(res.diag));
        manifest.add_output(bin);
        manifest.add_output(side);
        manifest.add_output(conv);

        if (!opt.slice.empty()) {
            const std::string spath = opt.out_dir + "/slice.csv";
            write_text_file(spath, detail::slice_csv(res.field, loaded.spec.tables,
                                                     detail::parse_slice(opt.slice)));
            manifest.add_output(spath);
        }
        manifest.write();

        const auto& start = loaded.spec.initial_state(grid);
        double root = res.field.original_value(
            loaded.spec.tables.pair_index(start.a, start.b), start.t,
            start.x_node < 0 ? 0 : start.x_node, start.nu, start.z);
        std::cout << "solved k=" << res.diag.k << " converged=" << (res.diag.converged ? "yes" : "no")
                  << " root value=" << root << "\n";
        return res.diag.converged ? kOk : kNotConverged;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternalError;
    }
}

inline int run_evaluate(const EvaluateOptionsCli& opt) {
    int code;
    LoadedSpec loaded = detail::load_or_exit(opt.spec_path, code);
    if (code != kOk) return code;
    try {
        detail::make_out_dir(opt.out_dir);
        const uint64_t seed = opt.seed.value_or(loaded.spec.seed);
        detail::Manifest manifest("evaluate", opt.out_dir, loaded, seed);

        // The field must have been produced from byte-identical spec input.
        const std::string sidecar_path =
            std::filesystem::path(opt.field_path).replace_extension(".json").string();
        std::ifstream side_in(sidecar_path);
        if (!side_in) throw ArtifactError("missing field sidecar: " + sidecar_path);
        nlohmann::json side = nlohmann::json::parse(side_in);
        if (side.value("spec_sha256", "") != loaded.sha256) {
            std::cerr << "artifact mismatch: field was solved from a different spec (hash "
                      << side.value("spec_sha256", "?") << " vs " << loaded.sha256 << ")\n";
            return kArtifactMismatch;
        }

        GridSpec grid = loaded.spec.grid();
        ValueField field = load_field(opt.field_path, loaded.spec.tables, grid);
        const double delta = opt.delta_switch.value_or(loaded.spec.evaluation.delta_switch);
        Policy policy = extract_policy(loaded.spec, field, delta, !field.converged());
        const HybridState start = loaded.spec.initial_state(grid);
        const size_t n_paths = opt.n_paths.value_or(size_t(loaded.spec.evaluation.n_paths));

        EvaluationReport rep =
            evaluate_policy(loaded.spec, grid, policy, start, n_paths, seed, opt.threads);

        const std::string rpath = opt.out_dir + "/report.json";
        const std::string ppath = opt.out_dir + "/policy.json";
        write_text_file(rpath, dump_json(report_json(rep, loaded.sha256, loaded.spec.name)));
        write_text_file(ppath, dump_json(policy_regions_json(loaded.spec, grid, policy)));
        manifest.add_output(rpath);
        manifest.add_output(ppath);

        std::vector<FactorGrid::KernelRow> fkernel;
        const std::vector<FactorGrid::KernelRow>* fk = nullptr;
        if (grid.factor) {
            fkernel = grid.factor->kernel(grid.dt());
            fk = &fkernel;
        }
        const long cap = intervention_cap(loaded.spec, field);
        for (int i = 0; i < opt.dump_paths; ++i) {
            auto rng = make_path_rng(seed, uint64_t(i));
            HybridPath p = simulate_policy_path(loaded.spec, grid, policy, start, rng, seed, cap,
                                                fk, nullptr, nullptr);
            const std::string cpath = opt.out_dir + "/path_" + std::to_string(i) + ".csv";
            write_text_file(cpath, path_csv(p, grid));
            manifest.add_output(cpath);
        }
        manifest.write();

        std::cout << "evaluated " << n_paths << " paths: value=" << rep.value_at_root
                  << " mc=" << rep.mc_estimate << " +- " << rep.mc_stderr << " gap=" << rep.gap
                  << "\n";
        return kOk;
    } catch (const ArtifactError& e) {
        std::cerr << "artifact error: " << e.what() << "\n";
        return kArtifactMismatch;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kParseError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternalError;
    }
}

inline int run_simulate(const SimulateOptionsCli& opt) {
    int code;
    LoadedSpec loaded = detail::load_or_exit(opt.spec_path, code);
    if (code != kOk) return code;
    try {
        detail::make_out_dir(opt.out_dir);
        const uint64_t seed = opt.seed.value_or(loaded.spec.seed);
        detail::Manifest manifest("simulate", opt.out_dir, loaded, seed);
        GridSpec grid = loaded.spec.grid();
        const HybridState start = loaded.spec.initial_state(grid);

        std::vector<FactorGrid::KernelRow> fkernel;
        const std::vector<FactorGrid::KernelRow>* fk = nullptr;
        if (grid.factor) {
            fkernel = grid.factor->kernel(grid.dt());
            fk = &fkernel;
        }

        std::vector<double> payoffs(size_t(opt.paths));
        for (int i = 0; i < opt.paths; ++i) {
            auto rng = make_path_rng(seed, uint64_t(i));
            HybridPath p = simulate_controlled_path(loaded.spec, grid, start, {}, rng, seed, fk);
            accumulate_payoffs(loaded.spec, grid, p);
            payoffs[size_t(i)] = p.total_payoff();
            const std::string cpath = opt.out_dir + "/path_" + std::to_string(i) + ".csv";
            write_text_file(cpath, path_csv(p, grid));
            manifest.add_output(cpath);
        }
        double mean = payoffs.empty() ? 0.0 : tree_sum(payoffs) / double(payoffs.size());
        nlohmann::json summary{{"format", "switchlag-simulation"},
                               {"toolkit_version", kVersion},
                               {"spec_sha256", loaded.sha256},
                               {"n_paths", opt.paths},
                               {"seed", seed},
                               {"mean_payoff_no_control", mean}};
        const std::string spath = opt.out_dir + "/summary.json";
        write_text_file(spath, dump_json(summary));
        manifest.add_output(spath);
        manifest.write();
        std::cout << "simulated " << opt.paths << " uncontrolled paths, mean payoff " << mean
                  << "\n";
        return kOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace switchlag::cli

#endif  // SWITCHLAG_CLI_HPP
