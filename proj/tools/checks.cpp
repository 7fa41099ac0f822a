#include "checks.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <ostream>
#include <string>
#include <vector>

#include "rwald/config.hpp"
#include "rwald/detector.hpp"
#include "rwald/disturbance.hpp"
#include "rwald/geometry.hpp"
#include "rwald/montecarlo.hpp"
#include "rwald/theory.hpp"

namespace rwald::tools {
namespace {

struct Check {
    std::string name;
    std::function<bool()> run;
};

CVector random_vector(std::size_t n, RandomStream& rng) {
    std::normal_distribution<double> g;
    CVector v(static_cast<Eigen::Index>(n));
    for (auto& x : v) {
        x = {g(rng), g(rng)};
    }
    return v;
}

double dense_band_form(const CVector& v, const CVector& c, std::size_t lag) {
    const auto n = v.size();
    CMatrix band = CMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (static_cast<std::size_t>(std::abs(i - j)) <= lag) {
                band(i, j) = c[i] * std::conj(c[j]);
            }
        }
    }
    return v.dot(band * v).real();
}

}  // namespace

int run_checks(std::ostream& out) {
    const std::vector<Check> checks = {
        {"threshold and chi2 tail are inverse",
         [] {
             for (double p : {1e-1, 1e-2, 1e-4}) {
                 if (std::abs(chi2_2_sf(threshold_for_pfa(p)) - p) > 1e-12) {
                     return false;
                 }
             }
             return true;
         }},
        {"banded quadratic form matches dense matrix",
         [] {
             RandomStream rng(11);
             for (int k = 0; k < 200; ++k) {
                 const std::size_t n = 2 + static_cast<std::size_t>(rng() % 15);
                 const std::size_t lag = static_cast<std::size_t>(rng() % n);
                 const CVector v = random_vector(n, rng);
                 const CVector c = random_vector(n, rng);
                 const double dense = dense_band_form(v, c, lag);
                 if (std::abs(hac_quadratic_form(v, c, lag) - dense) >
                     1e-10 * std::max(1.0, std::abs(dense))) {
                     return false;
                 }
             }
             return true;
         }},
        {"virtual steering equals Kronecker construction",
         [] {
             const auto cfg = ArrayConfig::identity(4, 2);
             for (double nu = -0.5; nu < 0.5; nu += 0.01) {
                 const auto v = build_virtual_vector(cfg, ula_steering(nu, 4, 2), ula_steering(nu, 2, 1));
                 if ((v.values - virtual_steering(nu, cfg).values).cwiseAbs().maxCoeff() > 1e-12) {
                     return false;
                 }
             }
             return true;
         }},
        {"PSD integrates to r[0] for both AR presets",
         [] {
             for (const auto* name : {"scenario1", "scenario2"}) {
                 const auto cfg = load_preset(name);
                 double sum = 0.0;
                 for (int k = 0; k < 2048; ++k) {
                     sum += clutter_psd(cfg.scenario.clutter, k / 2048.0);
                 }
                 const double r0 = clutter_autocovariance(cfg.scenario.clutter, 0).power();
                 if (std::abs(sum / 2048.0 - r0) > 1e-6 * r0) {
                     return false;
                 }
             }
             return true;
         }},
        {"AR(1) autocovariance closed form",
         [] {
             const ArSpec spec({0.5}, InnovationSpec::gaussian(1.0), false);
             const auto r = ar_autocovariance(spec, 20);
             for (std::size_t m = 0; m <= 20; ++m) {
                 if (std::abs(r.values[m] - (4.0 / 3.0) * std::pow(0.5, m)) > 1e-12) {
                     return false;
                 }
             }
             return true;
         }},
        {"Marcum Q1 boundary values",
         [] {
             return std::abs(marcum_q1(0.0, 2.0) - std::exp(-2.0)) < 1e-14 &&
                    marcum_q1(3.0, 0.0) == 1.0 && marcum_q1(2.0, 3.0) > marcum_q1(1.0, 3.0);
         }},
        {"white Gaussian false-alarm rate near nominal",
         [] {
             Scenario s{.name = "white", .clutter = ArSpec()};
             s.detector.truncation_lag = 0;
             const auto r = run_trials(s, 1024, 4000, 3);
             return std::abs(r.p_hat - 0.01) < 4.0 * std::sqrt(0.01 * 0.99 / 4000.0);
         }},
        {"trial streams are reproducible",
         [] {
             const auto cfg = load_preset("scenario1");
             const auto a = run_trials(cfg.scenario, 256, 200, 7, {.workers = 1});
             const auto b = run_trials(cfg.scenario, 256, 200, 7, {.workers = 3});
             return a.detections == b.detections && a.statistics == b.statistics;
         }},
    };

    int failures = 0;
    for (const auto& c : checks) {
        bool ok = false;
        try {
            ok = c.run();
        } catch (const std::exception& e) {
            out << "  exception: " << e.what() << "\n";
        }
        out << (ok ? "[ok]   " : "[FAIL] ") << c.name << "\n";
        failures += ok ? 0 : 1;
    }
    out << (failures == 0 ? "all checks passed" : std::to_string(failures) + " check(s) failed")
        << "\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace rwald::tools
