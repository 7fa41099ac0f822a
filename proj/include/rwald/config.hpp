#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "rwald/montecarlo.hpp"

namespace rwald {

// Raised for malformed or invalid configuration; the message names the
// offending line/column or JSON field path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Published parameter vectors of the two heavy-tailed AR scenarios,
//   scenario 1: [0.5, 0.3 e^{-j 2 pi 0.1}, 0.4 e^{j 2 pi 0.01}]
//   scenario 2: [0.5 e^{-j 2 pi 0.4}, 0.6 e^{-j 2 pi 0.2}, 0.7, 0.4 e^{j 2 pi 0.1},
//                0.5 e^{j 2 pi 0.3}, 0.6 e^{j 2 pi 0.35}]
// The presets place the AR poles at these points. Taken as recursion
// coefficients instead, scenario 1 is explosive (root modulus 1.077).
std::vector<Complex> scenario1_published_rho();
std::vector<Complex> scenario2_published_rho();

struct RunConfig {
    Scenario scenario;
    nlohmann::json scenario_json;  // canonical scenario description, echoed in summaries
    std::vector<std::size_t> n_grid;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    double pfa_nominal = 1e-2;
    std::vector<double> snr_db_list;  // empty: H0 run
    std::string output_path;
    bool emit_theory_curve = false;

    void validate() const;
    nlohmann::json to_json() const;
};

inline constexpr double kDegenerateRateWarning = 1e-3;

std::vector<std::string> preset_names();

RunConfig load_preset(std::string_view name);

// Parses a JSON run configuration. `origin` labels diagnostics.
RunConfig parse_config(std::string_view text, std::string_view origin = "<config>");

// A path to an existing JSON file, or a preset name.
RunConfig load_config(std::string_view path_or_preset);

// Scenario object from its JSON description; `path` prefixes field errors.
Scenario parse_scenario(const nlohmann::json& j, const std::string& path = "/scenario");

inline constexpr const char* kCsvHeader =
    "scenario,n,nu,snr_db,trials,detections,degenerates,p_hat,ci_low,ci_high,ks_chi2,pd_theory,"
    "seed";

// Runs every (snr, n) cell, writes the CSV to cfg.output_path and a JSON
// summary next to it (extension replaced by .json). Returns 0 on success,
// 2 when some cell's degenerate rate exceeds kDegenerateRateWarning, 1 on a
// hard error (reported on `log`).
int run_command(const RunConfig& cfg, std::ostream& log, std::size_t workers = 0);

// Normalized clutter PSD on `points` frequencies nu = -0.5 + k / points.
std::string psd_csv(const Scenario& scenario, std::size_t points = 1024);

}  // namespace rwald
