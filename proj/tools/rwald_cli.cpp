// rwald: Monte Carlo simulator for the robust single-snapshot Wald detector.
//
//   rwald run --preset scenario1 --trials 10000 --out s1.csv
//   rwald run --config experiment.json
//   rwald psd --preset scenario2 --out psd2.csv
//   rwald check

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "checks.hpp"
#include "rwald/config.hpp"

namespace {

rwald::RunConfig resolve(const std::string& config_path, const std::string& preset) {
    return config_path.empty() ? rwald::load_preset(preset) : rwald::load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust Wald detector for single-snapshot massive MIMO radar"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::vector<std::size_t> n_grid;
    std::vector<double> snr_list;
    std::size_t workers = 0;

    auto* run = app.add_subcommand("run", "Run a Monte Carlo sweep and write CSV + JSON summary");
    auto* cfg_opt = run->add_option("--config", config_path, "JSON run configuration")
                        ->check(CLI::ExistingFile);
    auto* preset_opt = run->add_option("--preset", preset, "Built-in configuration");
    cfg_opt->excludes(preset_opt);
    run->add_option("--trials", trials, "Override trials per cell");
    run->add_option("--seed", seed, "Override experiment seed");
    run->add_option("--out", out_path, "Override CSV output path");
    run->add_option("--n-grid", n_grid, "Override the ascending grid of N");
    run->add_option("--snr", snr_list, "Override SNR list in dB (H1 sweep)");
    run->add_option("--workers", workers, "Worker threads (0 = all cores)");

    std::string psd_preset;
    std::string psd_config;
    std::string psd_out;
    std::size_t psd_points = 1024;
    auto* psd = app.add_subcommand("psd", "Export the normalized clutter PSD");
    auto* psd_cfg = psd->add_option("--config", psd_config, "JSON run configuration")
                        ->check(CLI::ExistingFile);
    auto* psd_pre = psd->add_option("--preset", psd_preset, "Built-in configuration");
    psd_cfg->excludes(psd_pre);
    psd->add_option("--out", psd_out, "Output CSV path")->required();
    psd->add_option("--points", psd_points, "Frequency grid size")->check(CLI::PositiveNumber);

    auto* check = app.add_subcommand("check", "Run the fast invariant suite");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            if (config_path.empty() && preset.empty()) {
                std::cerr << "run: one of --config or --preset is required\n";
                return 1;
            }
            auto cfg = resolve(config_path, preset);
            if (trials) cfg.trials = *trials;
            if (seed) cfg.seed = *seed;
            if (!out_path.empty()) cfg.output_path = out_path;
            if (!n_grid.empty()) cfg.n_grid = n_grid;
            if (!snr_list.empty()) cfg.snr_db_list = snr_list;
            cfg.validate();
            const int code = rwald::run_command(cfg, std::cerr, workers);
            if (code != 1) {
                std::cout << "wrote " << cfg.output_path << "\n";
            }
            return code;
        }
        if (psd->parsed()) {
            if (psd_config.empty() && psd_preset.empty()) {
                std::cerr << "psd: one of --config or --preset is required\n";
                return 1;
            }
            const auto cfg = resolve(psd_config, psd_preset);
            std::ofstream out(psd_out, std::ios::binary);
            out << rwald::psd_csv(cfg.scenario, psd_points);
            if (!out.flush()) {
                std::cerr << "error: cannot write " << psd_out << "\n";
                return 1;
            }
            return 0;
        }
        if (check->parsed()) {
            return rwald::tools::run_checks(std::cout);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
