// Command-line front end: one subcommand per pipeline, config file plus
// key=value overrides. Exit 0 certified, 1 input error, 2 not converged.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qles/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Quasilinear elliptic system solver and verification toolkit"};
    app.require_subcommand(0, 1);
    bool list_keys = false;
    app.add_flag("--list-keys", list_keys, "Print every config key with its default");

    std::string config_file, out_dir;
    std::vector<std::string> overrides;
    long long seed = -1;
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"solve", "Tau homotopy + damped Picard for the coupled system, with the norm window"},
        {"eigen", "First eigenvalue (plap or coupled) or an embedding constant"},
        {"fibering", "Positive subsolutions and the comparison certificate"},
        {"moser", "Exponent ladder, E_k tracking and the sup-norm bound"},
        {"check", "Sampled checks of the growth and monotonicity hypotheses"},
        {"validate", "Manufactured-solution check of the scalar solver"},
        {"sweep-tau", "Independent Picard runs over a list of tau values"},
    };
    for (const auto& [name, desc] : subs) {
        CLI::App* sc = app.add_subcommand(name, desc);
        sc->add_option("-c,--config", config_file, "Config file of `section.key = value` lines");
        sc->add_option("-s,--set", overrides, "Override, key=value (repeatable)");
        sc->add_option("-o,--out", out_dir, "Output directory (run.out)");
        sc->add_option("--seed", seed, "Seed (run.seed)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        std::cout << '\n' << qles::RunConfig::help_text();
        return qles::exit_certified;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? qles::exit_certified : qles::exit_input_error;
    }
    if (list_keys) {
        std::cout << qles::RunConfig::help_text();
        return qles::exit_certified;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return qles::exit_input_error;
    }

    try {
        qles::RunConfig cfg;
        cfg.subcommand = app.get_subcommands().front()->get_name();
        if (!config_file.empty()) cfg.load_file(config_file);
        for (const auto& o : overrides) cfg.set(o);
        if (!out_dir.empty()) cfg.set("run.out", out_dir);
        if (seed >= 0) cfg.set("run.seed", std::to_string(seed));
        const qles::RunOutcome r = qles::run(cfg);
        std::cout << cfg.subcommand << ": " << r.report["status"].get<std::string>() << " (exit " << r.exit_code
                  << "), report at " << cfg.get("run.out") << "/report.json\n";
        return r.exit_code;
    } catch (const qles::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return qles::exit_input_error;
    } catch (const qles::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return qles::exit_not_converged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return qles::exit_input_error;
    }
}
