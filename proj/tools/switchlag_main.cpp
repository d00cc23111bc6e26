// Command-line front end: validate / solve / evaluate / simulate.

#include <CLI11.hpp>

#include "switchlag/cli.hpp"
#include "switchlag/version.hpp"

int main(int argc, char** argv) {
    using namespace switchlag;

    CLI::App app{"optimal-switching solver and simulator for lagged multi-plant systems"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    cli::CommonOptions vopt;
    cli::SolveOptionsCli sopt;
    cli::EvaluateOptionsCli eopt;
    cli::SimulateOptionsCli mopt;

    auto add_common = [](CLI::App* cmd, cli::CommonOptions& o) {
        cmd->add_option("--spec", o.spec_path, "problem spec JSON")->required();
        cmd->add_option("--out", o.out_dir, "output directory")->required();
        cmd->add_option("--seed", o.seed, "override the spec seed");
        cmd->add_option("--threads", o.threads, "parallel width")->default_val(1);
    };

    auto* validate = app.add_subcommand("validate", "check model assumptions");
    add_common(validate, vopt);

    auto* solve = app.add_subcommand("solve", "compute the value field");
    add_common(solve, sopt);
    solve->add_option("--tol", sopt.tol, "Picard convergence tolerance");
    solve->add_option("--kmax", sopt.k_max, "Picard iteration cap");
    solve->add_option("--slice", sopt.slice,
                      "value-surface CSV export, e.g. pair=4,axes=t:z0,x=0");

    auto* evaluate = app.add_subcommand("evaluate", "extract and Monte-Carlo a policy");
    add_common(evaluate, eopt);
    evaluate->add_option("--field", eopt.field_path, "field.bin from a solve run")->required();
    evaluate->add_option("--paths", eopt.dump_paths,
                         "number of per-path event-log CSVs to write (0 = none)");
    evaluate->add_option("--npaths", eopt.n_paths, "override evaluation.n_paths");
    evaluate->add_option("--delta", eopt.delta_switch, "override evaluation.delta_switch");

    auto* simulate = app.add_subcommand("simulate", "sample uncontrolled paths");
    add_common(simulate, mopt);
    simulate->add_option("--paths", mopt.paths, "number of paths")->default_val(10);

    CLI11_PARSE(app, argc, argv);

    if (validate->parsed()) return cli::run_validate(vopt);
    if (solve->parsed()) return cli::run_solve(sopt);
    if (evaluate->parsed()) return cli::run_evaluate(eopt);
    if (simulate->parsed()) return cli::run_simulate(mopt);
    return cli::kInternalError;
}
