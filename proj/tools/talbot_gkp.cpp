#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tfgkp/parallel.hpp>
#include <tfgkp/scenario.hpp>

namespace {

unsigned thread_count(int flag) {
    if (flag > 0)
        return static_cast<unsigned>(flag);
    if (const char* env = std::getenv("TALBOT_GKP_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0)
                return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring TALBOT_GKP_THREADS='" << env << "'\n";
    }
    return tfgkp::default_thread_count();
}

std::string describe(const tfgkp::cli::Scenario& s) {
    std::string out;
    for (auto& p : s.params) {
        out += "  " + p.key + (p.required ? " (required)" : " = " + p.fallback.dump()) + "  " + p.help + "\n";
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    using namespace tfgkp::cli;

    CLI::App app{"Time-frequency GKP codes: Talbot carpets, gate fidelities, error maps and HOM signatures"};
    app.set_version_flag("--version", tool_version);
    std::string scenario, config_path, out_dir;
    std::vector<std::string> overrides;
    int threads = 0;
    bool dry_run = false, list_keys = false;
    app.add_option("scenario", scenario, "one of: " + scenario_names())->required();
    app.add_option("-c,--config", config_path, "JSON file of parameters");
    app.add_option("-o,--out", out_dir, "output directory (default: out)");
    app.add_option("-j,--threads", threads, "worker threads (default: TALBOT_GKP_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("-s,--set", overrides, "override a parameter, key=value")->allow_extra_args(false);
    app.add_flag("--dry-run", dry_run, "validate the configuration and print it resolved");
    app.add_flag("--keys", list_keys, "list the scenario's parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    try {
        const Scenario* sc = find_scenario(scenario);
        if (list_keys) {
            if (!sc)
                throw tfgkp::ConfigError("unknown scenario '" + scenario + "' (expected one of: " + scenario_names() + ")");
            std::cout << describe(*sc);
            return exit_ok;
        }
        RunConfig cfg;
        cfg.scenario = scenario;
        if (!config_path.empty())
            cfg = load_config(config_path, scenario);
        for (auto& o : overrides)
            apply_override(cfg, o);
        if (!out_dir.empty())
            cfg.output = out_dir;

        if (dry_run) {
            const auto diags = validate(cfg);
            for (auto& d : diags)
                std::cerr << (d.severity == Diagnostic::error ? "error: " : "warning: ") << d.message << '\n';
            if (has_errors(diags))
                return exit_config;
            std::cout << resolve(cfg).dump(2) << '\n';
            return exit_ok;
        }
        return run(cfg, thread_count(threads), std::cerr);
    } catch (const tfgkp::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const tfgkp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
}
