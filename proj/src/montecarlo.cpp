#include "rwald/montecarlo.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

#include <boost/math/special_functions/erf.hpp>

namespace rwald {

double Scenario::alpha_magnitude() const {
    return snr_db ? std::pow(10.0, *snr_db / 20.0) : 0.0;
}

SteeringVector Scenario::steering(std::size_t n) const {
    if (array && !array->is_identity()) {
        if (array->channels() != n) {
            throw std::invalid_argument("Scenario: n must equal m_t * m_r for a shaped array");
        }
        const CVector a_t = ula_steering(nu, array->m_t, array->m_r);
        const CVector a_r = ula_steering(nu, array->m_r, 1);
        return build_virtual_vector(*array, a_t, a_r, nu);
    }
    return virtual_steering(nu, n);
}

TrialContext::TrialContext(const Scenario& s, std::size_t n_)
    : scenario(&s), n(n_), v(s.steering(n_)), alpha(s.alpha_magnitude()) {
    if (n < 2) {
        throw std::invalid_argument("run_trials: n must be >= 2");
    }
    s.detector.validate();
    s.detector.resolve_lag(n);
}

CVector TrialContext::draw(RandomStream& rng) const {
    CVector x = generate_clutter(scenario->clutter, n, rng);
    if (alpha != 0.0) {
        x += alpha * v.values;
    }
    return x;
}

DetectionOutcome TrialContext::run(std::uint64_t seed, std::uint64_t trial) const {
    auto rng = make_stream(seed, trial);
    return wald_statistic(draw(rng), v.values, scenario->detector);
}

std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

namespace {

// (priority, trial, statistic). Keeping the cap smallest priorities is a
// uniform sample without replacement that does not depend on visit order.
using Retained = std::tuple<std::uint64_t, std::uint64_t, double>;

struct Tally {
    std::size_t detections = 0;
    std::size_t degenerates = 0;
    std::vector<Retained> retained;  // max-heap on (priority, trial)
};

void keep_smallest(std::vector<Retained>& heap, std::size_t cap) {
    while (heap.size() > cap) {
        std::pop_heap(heap.begin(), heap.end());
        heap.pop_back();
    }
}

constexpr std::uint64_t kPriorityKey = 0xD1B54A32D192ED03ULL;

}  // namespace

AsymptoticPrediction predict_scenario(const Scenario& scenario, std::size_t n) {
    const double pfa = scenario.detector.pfa_nominal;
    const double alpha = scenario.alpha_magnitude();
    if (alpha == 0.0) {
        return predict(pfa, 0.0);
    }
    Autocovariance gamma = clutter_autocovariance(scenario.clutter, n - 1);
    // Drop the exponentially small tail so the quadratic form stays O(n L).
    const double r0 = gamma.power();
    std::size_t last = gamma.max_lag();
    while (last > 0 && std::abs(gamma.values[last]) < 1e-18 * r0) {
        --last;
    }
    gamma.values.resize(last + 1);
    return predict(pfa, noncentrality(alpha, scenario.steering(n).values, gamma));
}

ExperimentResult run_trials(const Scenario& scenario, std::size_t n, std::size_t trials,
                            std::uint64_t seed, const RunOptions& options) {
    if (trials < 1) {
        throw std::invalid_argument("run_trials: trials must be >= 1");
    }
    const TrialContext ctx(scenario, n);
    const bool retain = options.retain_statistics && options.retain_cap > 0;
    const std::size_t cap = options.retain_cap;

    auto body = [&](std::size_t t, Tally& local) {
        const auto outcome = ctx.run(seed, t);
        if (outcome.degenerate) {
            ++local.degenerates;
            return;
        }
        local.detections += outcome.decide_h1 ? 1 : 0;
        if (retain) {
            const std::uint64_t priority = mix64(derive_seed(seed, t) ^ kPriorityKey);
            local.retained.emplace_back(priority, t, outcome.statistic);
            std::push_heap(local.retained.begin(), local.retained.end());
            keep_smallest(local.retained, cap);
        }
    };
    auto merge = [cap](Tally& into, Tally& from) {
        into.detections += from.detections;
        into.degenerates += from.degenerates;
        for (auto& r : from.retained) {
            into.retained.push_back(r);
            std::push_heap(into.retained.begin(), into.retained.end());
        }
        keep_smallest(into.retained, cap);
    };
    Tally tally = parallel_trials<Tally>(trials, options.workers, body, merge);

    ExperimentResult out;
    out.n = n;
    out.trials = trials;
    out.seed = seed;
    out.detections = tally.detections;
    out.degenerates = tally.degenerates;
    out.p_hat = static_cast<double>(tally.detections) / static_cast<double>(trials);
    const auto ci = wilson_interval(tally.detections, trials);
    out.ci_low = ci.low;
    out.ci_high = ci.high;

    std::sort(tally.retained.begin(), tally.retained.end(),
              [](const Retained& a, const Retained& b) { return std::get<1>(a) < std::get<1>(b); });
    out.statistics.reserve(tally.retained.size());
    for (const auto& r : tally.retained) {
        out.statistics.push_back(std::get<2>(r));
    }
    if (!scenario.snr_db && !out.statistics.empty()) {
        out.ks_to_chi2 = ks_distance(out.statistics, [](double t) { return 1.0 - chi2_2_sf(t); });
    }
    out.predicted = predict_scenario(scenario, n);
    return out;
}

std::vector<ExperimentResult> sweep(const Scenario& scenario, std::span<const std::size_t> n_grid,
                                    std::size_t trials, std::uint64_t seed,
                                    const RunOptions& options) {
    if (n_grid.empty()) {
        throw std::invalid_argument("sweep: empty grid");
    }
    if (!std::is_sorted(n_grid.begin(), n_grid.end())) {
        throw std::invalid_argument("sweep: grid must be ascending");
    }
    std::vector<ExperimentResult> results;
    results.reserve(n_grid.size());
    for (const std::size_t n : n_grid) {
        results.push_back(run_trials(scenario, n, trials, derive_seed(seed, n), options));
    }
    return results;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) {
        throw std::invalid_argument("ks_distance: empty sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto m = static_cast<double>(sorted.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const auto k = static_cast<double>(i);
        worst = std::max({worst, (k + 1.0) / m - f, f - k / m});
    }
    return worst;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence) {
    if (trials < 1 || successes > trials) {
        throw std::invalid_argument("wilson_interval: need 0 <= successes <= trials, trials >= 1");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw std::invalid_argument("wilson_interval: confidence must lie in (0, 1)");
    }
    const double z = std::sqrt(2.0) * boost::math::erfc_inv(1.0 - confidence);
    const auto n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
    Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
    if (successes == 0) {
        ci.low = 0.0;
    }
    if (successes == trials) {
        ci.high = 1.0;
    }
    return ci;
}

}  // namespace rwald
