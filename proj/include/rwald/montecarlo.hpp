#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "rwald/detector.hpp"
#include "rwald/disturbance.hpp"
#include "rwald/geometry.hpp"
#include "rwald/random.hpp"
#include "rwald/theory.hpp"

namespace rwald {

// One detection experiment: H0 when snr_db is empty, otherwise H1 with a
// real positive amplitude |alpha| = 10^{snr_db / 20} against unit-power
// clutter.
struct Scenario {
    std::string name;
    ClutterSpec clutter;
    double nu = 0.0;
    // Optional physical array. Without one (or with W = S = I) the steering
    // vector is the length-n equivalent phased array; a non-identity array
    // pins n to m_t * m_r.
    std::optional<ArrayConfig> array;
    std::optional<double> snr_db;
    DetectorConfig detector;

    double alpha_magnitude() const;
    SteeringVector steering(std::size_t n) const;
};

struct ExperimentResult {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t detections = 0;
    std::size_t degenerates = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::optional<double> ks_to_chi2;
    std::optional<AsymptoticPrediction> predicted;
    std::uint64_t seed = 0;
    // Non-degenerate statistic samples (at most RunOptions::retain_cap),
    // ordered by trial index.
    std::vector<double> statistics;
};

struct RunOptions {
    std::size_t workers = 0;  // 0 = std::thread::hardware_concurrency()
    bool retain_statistics = true;
    std::size_t retain_cap = 100000;
};

// Everything a single trial needs, prepared once per (scenario, n).
struct TrialContext {
    const Scenario* scenario = nullptr;
    std::size_t n = 0;
    SteeringVector v;
    Complex alpha = 0.0;

    TrialContext(const Scenario& s, std::size_t n);

    // x = c (H0) or alpha v + c (H1), with c drawn from `rng`.
    CVector draw(RandomStream& rng) const;
    DetectionOutcome run(std::uint64_t seed, std::uint64_t trial) const;
};

std::size_t resolve_workers(std::size_t requested);

// Calls body(trial, local) for every trial in [0, trials) across `workers`
// threads, each with its own Local accumulator, then folds the accumulators
// with merge(into, from). The fold must be associative and commutative for
// the result to be independent of scheduling.
template <class Local, class Body, class Merge>
Local parallel_trials(std::size_t trials, std::size_t workers, Body body, Merge merge) {
    workers = std::min(resolve_workers(workers), std::max<std::size_t>(trials, 1));
    constexpr std::size_t kChunk = 64;
    std::atomic<std::size_t> next{0};
    std::vector<Local> locals(workers);
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto work = [&](std::size_t w) {
        try {
            for (;;) {
                const std::size_t begin = next.fetch_add(kChunk);
                if (begin >= trials) {
                    return;
                }
                const std::size_t end = std::min(trials, begin + kChunk);
                for (std::size_t t = begin; t < end; ++t) {
                    body(t, locals[w]);
                }
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
            next.store(trials);
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    Local total = std::move(locals.front());
    for (std::size_t w = 1; w < workers; ++w) {
        merge(total, locals[w]);
    }
    return total;
}

ExperimentResult run_trials(const Scenario& scenario, std::size_t n, std::size_t trials,
                            std::uint64_t seed, const RunOptions& options = {});

// One run_trials per grid point, seeded with derive_seed(seed, n).
std::vector<ExperimentResult> sweep(const Scenario& scenario, std::span<const std::size_t> n_grid,
                                    std::size_t trials, std::uint64_t seed,
                                    const RunOptions& options = {});

// sup_x |F_m(x) - F(x)| for the empirical CDF F_m of `samples`.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double confidence = 0.95);

// Asymptotic prediction for a scenario at size n, using the analytic clutter
// autocovariance for Gamma.
AsymptoticPrediction predict_scenario(const Scenario& scenario, std::size_t n);

}  // namespace rwald
