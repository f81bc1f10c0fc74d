#include "marangoni/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace marangoni;

int main(int argc, char** argv)
{
    CLI::App app{"Non-isothermal Navier-Stokes-Allen-Cahn simulator with Marangoni forcing"};
    std::string config_path, output_dir, audit_dir;
    long seed = -1;
    bool thresholds_only = false;
    app.add_option("--config", config_path, "flat key = value configuration file");
    app.add_option("--output", output_dir, "output directory (overrides output_dir)");
    app.add_option("--audit", audit_dir, "re-verify a finished run directory and exit");
    app.add_flag("--print-thresholds", thresholds_only, "print Theta1, Theta2 and the constants, then exit");
    app.add_option("--seed", seed, "seed override")->check(CLI::NonNegativeNumber);
    CLI11_PARSE(app, argc, argv);

    if (!audit_dir.empty()) {
        try {
            const AuditReport rep = audit(audit_dir);
            print_audit(std::cout, rep);
            return rep.ok() ? exit_success : exit_invariant;
        } catch (const std::exception& e) {
            std::cerr << "audit: " << e.what() << '\n';
            return exit_io;
        }
    }

    if (config_path.empty()) {
        std::cerr << "--config is required (or --audit <dir>)\n";
        return exit_config;
    }
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << e.what() << '\n';
        return exit_io;
    }
    if (seed >= 0)
        cfg.seed = static_cast<std::uint64_t>(seed);
    if (!output_dir.empty())
        cfg.output_dir = output_dir;

    if (thresholds_only) {
        try {
            print_thresholds(std::cout, cfg);
            return exit_success;
        } catch (const std::exception& e) {
            std::cerr << e.what() << '\n';
            return exit_config;
        }
    }
    const int code = run(cfg, std::cerr);
    if (code == exit_success)
        std::cout << "run complete: " << cfg.output_dir << '\n';
    return code;
}
