#include "rwald/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rwald {

using nlohmann::json;

namespace {

Complex polar_cycles(double magnitude, double cycles) {
    return std::polar(magnitude, kTwoPi * cycles);
}

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
    throw ConfigError("field " + path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) {
        field_error(path, "expected an object");
    }
    const auto it = obj.find(key);
    if (it == obj.end()) {
        field_error(path + "/" + key, "missing");
    }
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) {
        field_error(path, "expected a number");
    }
    return j.get<double>();
}

std::uint64_t as_unsigned(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) {
        return j.get<std::uint64_t>();
    }
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    field_error(path, "expected a nonnegative integer");
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) {
        field_error(path, "expected true or false");
    }
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) {
        field_error(path, "expected a string");
    }
    return j.get<std::string>();
}

// A coefficient is a number, [re, im], {"re", "im"} or {"mag", "cycles"}
// (mag * exp(j 2 pi cycles)).
Complex parse_coefficient(const json& j, const std::string& path) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_array()) {
        if (j.size() != 2) {
            field_error(path, "expected [re, im]");
        }
        return {as_number(j[0], path + "/0"), as_number(j[1], path + "/1")};
    }
    if (j.is_object()) {
        if (j.contains("mag")) {
            return polar_cycles(as_number(j["mag"], path + "/mag"),
                                as_number(require(j, "cycles", path), path + "/cycles"));
        }
        return {as_number(require(j, "re", path), path + "/re"),
                as_number(require(j, "im", path), path + "/im")};
    }
    field_error(path, "expected a complex coefficient");
}

std::vector<Complex> parse_coefficients(const json& j, const std::string& path) {
    if (!j.is_array()) {
        field_error(path, "expected an array of coefficients");
    }
    std::vector<Complex> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(parse_coefficient(j[i], path + "/" + std::to_string(i)));
    }
    return out;
}

CMatrix parse_matrix(const json& j, std::size_t dim, const std::string& path) {
    if (!j.is_array() || j.size() != dim) {
        field_error(path, "expected " + std::to_string(dim) + " rows");
    }
    CMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        const auto row_path = path + "/" + std::to_string(r);
        const auto row = parse_coefficients(j[r], row_path);
        if (row.size() != dim) {
            field_error(row_path, "expected " + std::to_string(dim) + " entries");
        }
        for (std::size_t c = 0; c < dim; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
    }
    return m;
}

InnovationSpec parse_innovation(const json& j, const std::string& path) {
    InnovationSpec spec;
    const auto kind = as_string(require(j, "kind", path), path + "/kind");
    if (kind == "complex_gaussian") {
        spec.kind = InnovationKind::complex_gaussian;
    } else if (kind == "complex_t") {
        spec.kind = InnovationKind::complex_t;
        spec.shape_lambda = as_number(require(j, "shape_lambda", path), path + "/shape_lambda");
    } else {
        field_error(path + "/kind", "unknown innovation kind '" + kind + "'");
    }
    if (j.contains("sigma_w2")) {
        spec.sigma_w2 = as_number(j["sigma_w2"], path + "/sigma_w2");
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        field_error(path, e.what());
    }
    return spec;
}

// AR parameters come either as recursion coefficients ("rho", or
// "speckle_rho" for cg) or as characteristic roots ("poles").
std::vector<Complex> parse_ar_parameters(const json& j, const char* rho_key,
                                         const std::string& path) {
    const bool has_rho = j.contains(rho_key);
    const bool has_poles = j.contains("poles");
    if (has_rho == has_poles) {
        field_error(path, std::string("exactly one of '") + rho_key + "' or 'poles' is required");
    }
    if (has_poles) {
        return ar_from_poles(parse_coefficients(j["poles"], path + "/poles"));
    }
    return parse_coefficients(j[rho_key], path + "/" + rho_key);
}

ClutterSpec parse_clutter(const json& j, const std::string& path) {
    const auto model = as_string(require(j, "model", path), path + "/model");
    const bool normalize =
        j.contains("normalize_unit_power") ? as_bool(j["normalize_unit_power"],
                                                     path + "/normalize_unit_power")
                                           : true;
    auto rho = parse_ar_parameters(j, model == "cg" ? "speckle_rho" : "rho", path);
    try {
        if (model == "ar") {
            return ArSpec(std::move(rho),
                          parse_innovation(require(j, "innovation", path), path + "/innovation"),
                          normalize);
        }
        if (model == "cg") {
            const auto tpath = path + "/texture";
            const auto& texture = require(j, "texture", path);
            const auto kind = as_string(require(texture, "kind", tpath), tpath + "/kind");
            if (kind == "degenerate") {
                return CgSpec(std::move(rho), TextureKind::degenerate, 0.0, normalize);
            }
            if (kind == "inverse_gamma") {
                return CgSpec(std::move(rho), TextureKind::inverse_gamma,
                              as_number(require(texture, "shape", tpath), tpath + "/shape"),
                              normalize);
            }
            field_error(tpath + "/kind", "unknown texture kind '" + kind + "'");
        }
    } catch (const std::invalid_argument& e) {
        field_error(path, e.what());
    }
    field_error(path + "/model", "expected 'ar' or 'cg'");
}

DetectorConfig parse_detector(const json& j, const std::string& path) {
    DetectorConfig cfg;
    if (j.is_null()) {
        return cfg;
    }
    if (j.contains("truncation_lag")) {
        const auto& lag = j["truncation_lag"];
        if (lag.is_string()) {
            if (lag.get<std::string>() != "auto") {
                field_error(path + "/truncation_lag", "expected 'auto' or an integer");
            }
        } else {
            cfg.truncation_lag = as_unsigned(lag, path + "/truncation_lag");
        }
    }
    if (j.contains("pfa_nominal")) {
        cfg.pfa_nominal = as_number(j["pfa_nominal"], path + "/pfa_nominal");
    }
    if (j.contains("degenerate_policy")) {
        const auto policy = as_string(j["degenerate_policy"], path + "/degenerate_policy");
        if (policy == "error") {
            cfg.degenerate_policy = DegeneratePolicy::error;
        } else if (policy == "count_as_reject") {
            cfg.degenerate_policy = DegeneratePolicy::count_as_reject;
        } else {
            field_error(path + "/degenerate_policy", "expected 'error' or 'count_as_reject'");
        }
    }
    return cfg;
}

json coefficients_json(const std::vector<Complex>& rho) {
    json out = json::array();
    for (const auto& r : rho) {
        out.push_back({{"re", r.real()}, {"im", r.imag()}});
    }
    return out;
}

json scenario1_json() {
    return {
        {"name", "scenario1"},
        {"clutter",
         {{"model", "ar"},
          {"poles", coefficients_json(scenario1_published_rho())},
          {"innovation", {{"kind", "complex_t"}, {"shape_lambda", 2.0}, {"sigma_w2", 1.0}}},
          {"normalize_unit_power", true}}},
        {"nu", 0.0},
        {"detector", {{"truncation_lag", "auto"}, {"degenerate_policy", "count_as_reject"}}},
    };
}

json scenario2_json() {
    json j = scenario1_json();
    j["name"] = "scenario2";
    j["clutter"]["poles"] = coefficients_json(scenario2_published_rho());
    return j;
}

json white_json() {
    json j = scenario1_json();
    j["name"] = "white-gaussian";
    j["clutter"].erase("poles");
    j["clutter"]["rho"] = json::array();
    j["clutter"]["innovation"] = {{"kind", "complex_gaussian"}, {"sigma_w2", 1.0}};
    return j;
}

json cg_json() {
    json j = scenario1_json();
    j["name"] = "cg";
    j["clutter"] = {{"model", "cg"},
                    {"poles", coefficients_json(scenario1_published_rho())},
                    {"texture", {{"kind", "inverse_gamma"}, {"shape", 3.0}}},
                    {"normalize_unit_power", true}};
    return j;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

std::size_t line_of(std::string_view text, std::size_t byte, std::size_t& column) {
    std::size_t line = 1;
    column = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return line;
}

}  // namespace

std::vector<Complex> scenario1_published_rho() {
    return {polar_cycles(0.5, 0.0), polar_cycles(0.3, -0.1), polar_cycles(0.4, 0.01)};
}

std::vector<Complex> scenario2_published_rho() {
    return {polar_cycles(0.5, -0.4), polar_cycles(0.6, -0.2), polar_cycles(0.7, 0.0),
            polar_cycles(0.4, 0.1),  polar_cycles(0.5, 0.3),  polar_cycles(0.6, 0.35)};
}

Scenario parse_scenario(const json& j, const std::string& path) {
    if (!j.is_object()) {
        field_error(path, "expected an object or preset name");
    }
    Scenario s;
    s.name = j.contains("name") ? as_string(j["name"], path + "/name") : "custom";
    s.clutter = parse_clutter(require(j, "clutter", path), path + "/clutter");
    if (j.contains("nu")) {
        s.nu = as_number(j["nu"], path + "/nu");
        if (!(s.nu >= -0.5 && s.nu < 0.5)) {
            field_error(path + "/nu", "spatial frequency must lie in [-0.5, 0.5)");
        }
    }
    if (j.contains("array")) {
        const auto apath = path + "/array";
        const auto& a = j["array"];
        const auto m_t = static_cast<std::size_t>(as_unsigned(require(a, "m_t", apath), apath + "/m_t"));
        const auto m_r = static_cast<std::size_t>(as_unsigned(require(a, "m_r", apath), apath + "/m_r"));
        if (m_t < 1 || m_r < 1) {
            field_error(apath, "m_t and m_r must be >= 1");
        }
        ArrayConfig cfg = ArrayConfig::identity(m_t, m_r);
        if (a.contains("w")) {
            cfg.w = parse_matrix(a["w"], m_t, apath + "/w");
        }
        if (a.contains("s")) {
            cfg.s = parse_matrix(a["s"], m_t, apath + "/s");
        }
        s.array = cfg;
    }
    if (j.contains("snr_db")) {
        s.snr_db = as_number(j["snr_db"], path + "/snr_db");
    }
    s.detector = parse_detector(j.contains("detector") ? j["detector"] : json(), path + "/detector");
    return s;
}

void RunConfig::validate() const {
    if (n_grid.empty()) {
        field_error("/n_grid", "must not be empty");
    }
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 2) {
            field_error("/n_grid/" + std::to_string(i), "n must be >= 2");
        }
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
            field_error("/n_grid/" + std::to_string(i), "grid must be strictly ascending");
        }
    }
    if (trials < 1) {
        field_error("/trials", "must be >= 1");
    }
    if (!(pfa_nominal > 0.0 && pfa_nominal < 1.0)) {
        field_error("/pfa_nominal", "must lie in (0, 1)");
    }
    for (const auto n : n_grid) {
        try {
            scenario.detector.resolve_lag(n);
            if (scenario.array && !scenario.array->is_identity()) {
                scenario.steering(n);
            }
        } catch (const std::invalid_argument& e) {
            field_error("/scenario", e.what());
        }
    }
    if (output_path.empty()) {
        field_error("/output_path", "must not be empty");
    }
}

json RunConfig::to_json() const {
    return {{"scenario", scenario_json},
            {"n_grid", n_grid},
            {"trials", trials},
            {"seed", seed},
            {"pfa_nominal", pfa_nominal},
            {"snr_db_list", snr_db_list},
            {"output_path", output_path},
            {"emit_theory_curve", emit_theory_curve}};
}

std::vector<std::string> preset_names() {
    return {"scenario1", "scenario2", "scenario1-full", "scenario2-full", "white-gaussian", "cg"};
}

RunConfig load_preset(std::string_view name) {
    json scenario;
    bool full_scale = false;
    if (name == "scenario1" || name == "scenario1-full") {
        scenario = scenario1_json();
        full_scale = name.ends_with("-full");
    } else if (name == "scenario2" || name == "scenario2-full") {
        scenario = scenario2_json();
        full_scale = name.ends_with("-full");
    } else if (name == "white-gaussian") {
        scenario = white_json();
    } else if (name == "cg") {
        scenario = cg_json();
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "'");
    }
    json cfg = {{"scenario", scenario},
                {"n_grid", {100, 1000, 10000}},
                {"trials", 100000},
                {"seed", 1},
                {"pfa_nominal", 1e-2},
                {"snr_db_list", json::array()},
                {"output_path", std::string(name) + ".csv"},
                {"emit_theory_curve", true}};
    if (full_scale) {
        cfg["n_grid"] = {100, 1000, 10000, 100000};
        cfg["trials"] = 1000000;
        cfg["pfa_nominal"] = 1e-4;
    }
    return parse_config(cfg.dump(), name);
}

RunConfig parse_config(std::string_view text, std::string_view origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t column = 0;
        const std::size_t line = line_of(text, e.byte > 0 ? e.byte - 1 : 0, column);
        throw ConfigError(std::string(origin) + ":" + std::to_string(line) + ":" +
                          std::to_string(column) + ": JSON parse error: " + e.what());
    }
    try {
        if (!j.is_object()) {
            field_error("/", "expected a JSON object");
        }
        RunConfig cfg;
        const auto& sc = require(j, "scenario", "");
        if (sc.is_string()) {
            cfg.scenario_json = load_preset(sc.get<std::string>()).scenario_json;
        } else {
            cfg.scenario_json = sc;
        }
        cfg.scenario = parse_scenario(cfg.scenario_json);

        const auto& grid = require(j, "n_grid", "");
        if (!grid.is_array()) {
            field_error("/n_grid", "expected an array of integers");
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
            cfg.n_grid.push_back(
                static_cast<std::size_t>(as_unsigned(grid[i], "/n_grid/" + std::to_string(i))));
        }
        cfg.trials = static_cast<std::size_t>(as_unsigned(require(j, "trials", ""), "/trials"));
        cfg.seed = j.contains("seed") ? as_unsigned(j["seed"], "/seed") : 0;
        cfg.pfa_nominal = j.contains("pfa_nominal") ? as_number(j["pfa_nominal"], "/pfa_nominal")
                                                    : cfg.scenario.detector.pfa_nominal;
        cfg.scenario.detector.pfa_nominal = cfg.pfa_nominal;
        if (j.contains("snr_db_list")) {
            const auto& snr = j["snr_db_list"];
            if (!snr.is_array()) {
                field_error("/snr_db_list", "expected an array of numbers");
            }
            for (std::size_t i = 0; i < snr.size(); ++i) {
                cfg.snr_db_list.push_back(as_number(snr[i], "/snr_db_list/" + std::to_string(i)));
            }
        }
        cfg.output_path = j.contains("output_path") ? as_string(j["output_path"], "/output_path")
                                                    : "results.csv";
        cfg.emit_theory_curve =
            j.contains("emit_theory_curve") ? as_bool(j["emit_theory_curve"], "/emit_theory_curve")
                                            : false;
        cfg.validate();
        return cfg;
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    }
}

RunConfig load_config(std::string_view path_or_preset) {
    const std::filesystem::path path{std::string(path_or_preset)};
    std::error_code ec;
    if (std::filesystem::is_regular_file(path, ec)) {
        std::ifstream in(path);
        if (!in) {
            throw ConfigError("cannot open " + path.string());
        }
        std::stringstream buf;
        buf << in.rdbuf();
        return parse_config(buf.str(), path.string());
    }
    const auto names = preset_names();
    if (std::find(names.begin(), names.end(), path_or_preset) != names.end()) {
        return load_preset(path_or_preset);
    }
    throw ConfigError("'" + std::string(path_or_preset) + "' is neither a readable file nor a preset");
}

int run_command(const RunConfig& cfg, std::ostream& log, std::size_t workers) {
    try {
        cfg.validate();
        for (const auto n : cfg.n_grid) {
            const auto lag = cfg.scenario.detector.resolve_lag(n);
            if (cfg.scenario.detector.truncation_lag && lag_exceeds_consistency_bound(lag, n)) {
                log << "warning: truncation lag " << lag << " exceeds n^(1/3) at n = " << n << "\n";
            }
        }

        std::vector<std::optional<double>> snrs;
        if (cfg.snr_db_list.empty()) {
            snrs.emplace_back();
        } else {
            snrs.assign(cfg.snr_db_list.begin(), cfg.snr_db_list.end());
        }

        RunOptions options;
        options.workers = workers;
        std::ostringstream csv;
        csv << kCsvHeader << "\n";
        json results = json::array();
        bool degenerate_warning = false;

        for (std::size_t k = 0; k < snrs.size(); ++k) {
            Scenario scenario = cfg.scenario;
            scenario.snr_db = snrs[k];
            scenario.detector.pfa_nominal = cfg.pfa_nominal;
            options.retain_statistics = !scenario.snr_db.has_value();
            const auto cells =
                sweep(scenario, cfg.n_grid, cfg.trials, derive_seed(cfg.seed, k), options);
            for (const auto& r : cells) {
                const double rate =
                    static_cast<double>(r.degenerates) / static_cast<double>(r.trials);
                if (rate > kDegenerateRateWarning) {
                    degenerate_warning = true;
                    log << "warning: degenerate rate " << rate << " at n = " << r.n << "\n";
                }
                const std::string snr_field = snrs[k] ? format_double(*snrs[k]) : "";
                const std::string ks_field = r.ks_to_chi2 ? format_double(*r.ks_to_chi2) : "";
                const std::string pd_field =
                    cfg.emit_theory_curve && r.predicted ? format_double(r.predicted->pd) : "";
                csv << scenario.name << ',' << r.n << ',' << format_double(scenario.nu) << ','
                    << snr_field << ',' << r.trials << ',' << r.detections << ','
                    << r.degenerates << ',' << format_double(r.p_hat) << ','
                    << format_double(r.ci_low) << ',' << format_double(r.ci_high) << ','
                    << ks_field << ',' << pd_field << ',' << r.seed << "\n";

                json row = {{"n", r.n},
                            {"snr_db", snrs[k] ? json(*snrs[k]) : json()},
                            {"trials", r.trials},
                            {"detections", r.detections},
                            {"degenerates", r.degenerates},
                            {"p_hat", r.p_hat},
                            {"ci", {r.ci_low, r.ci_high}},
                            {"ks_chi2", r.ks_to_chi2 ? json(*r.ks_to_chi2) : json()},
                            {"seed", r.seed}};
                if (r.predicted) {
                    row["predicted"] = {{"pfa", r.predicted->pfa},
                                        {"pd", r.predicted->pd},
                                        {"varsigma", r.predicted->varsigma},
                                        {"threshold", r.predicted->threshold}};
                }
                results.push_back(std::move(row));
            }
        }

        std::ofstream out(cfg.output_path, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write " + cfg.output_path);
        }
        out << csv.str();
        if (!out.flush()) {
            throw std::runtime_error("write failed for " + cfg.output_path);
        }

        std::filesystem::path summary_path(cfg.output_path);
        summary_path.replace_extension(".json");
        if (summary_path == std::filesystem::path(cfg.output_path)) {
            summary_path += ".summary.json";
        }
        const json summary = {{"config", cfg.to_json()},
                              {"csv_header", kCsvHeader},
                              {"results", results},
                              {"degenerate_rate_warning", degenerate_warning}};
        std::ofstream sout(summary_path, std::ios::binary);
        if (!sout) {
            throw std::runtime_error("cannot write " + summary_path.string());
        }
        sout << summary.dump(2) << "\n";
        if (!sout.flush()) {
            throw std::runtime_error("write failed for " + summary_path.string());
        }
        return degenerate_warning ? 2 : 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

std::string psd_csv(const Scenario& scenario, std::size_t points) {
    std::ostringstream out;
    out << "nu,psd\n";
    for (std::size_t k = 0; k < points; ++k) {
        const double nu = -0.5 + static_cast<double>(k) / static_cast<double>(points);
        out << format_double(nu) << ',' << format_double(clutter_psd(scenario.clutter, nu)) << "\n";
    }
    return out.str();
}

}  // namespace rwald
