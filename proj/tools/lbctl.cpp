// Command-line front end: one subcommand per experiment kind.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lbctl/errors.hpp"
#include "lbctl/runner.hpp"

namespace {

struct Args {
    std::string config;
    std::string out;
    unsigned jobs = 1;
    bool dump_fields = false;
    bool resolve_only = false;
};

int run(const std::string& sub, const Args& a) {
    lbctl::ExperimentConfig cfg = lbctl::parse_config(a.config);
    if (lbctl::to_string(cfg.kind) != sub)
        throw lbctl::ConfigError("kind", "config describes '" + std::string(lbctl::to_string(cfg.kind)) +
                                             "' but the subcommand is '" + sub + "'");
    if (a.resolve_only) {
        std::cout << lbctl::emit_config(cfg);
        return 0;
    }
    lbctl::RunOptions opt;
    if (!a.out.empty()) opt.out_dir = a.out;
    if (a.dump_fields) opt.dump_fields = true;
    opt.jobs = a.jobs;
    opt.log = &std::cerr;
    const lbctl::RunOutcome res = lbctl::run_experiment(cfg, opt);
    res.report.write(std::cout);
    std::cerr << "wall time " << res.wall_time_s << " s; artifacts:\n";
    for (const auto& p : res.artifacts) std::cerr << "  " << p.string() << '\n';
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and penalized null control of the Ladyzhenskaya-Boussinesq system"};
    app.require_subcommand(1);
    Args args;
    for (const char* name : {"simulate", "linear-control", "nonlinear-control", "decay", "large-time", "verify"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run a '") + name + "' experiment");
        sub->add_option("--config", args.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory (overrides output.dir)");
        sub->add_option("--jobs", args.jobs, "threads for independent solves")->check(CLI::Range(1u, 256u));
        sub->add_flag("--dump-fields", args.dump_fields, "write full field trajectories and controls");
        sub->add_flag("--resolve", args.resolve_only, "print the resolved config and exit");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        return run(sub, args);
    } catch (const lbctl::Error& e) {
        std::cerr << "lbctl: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "lbctl: unexpected error: " << e.what() << '\n';
        return 70;
    }
}
