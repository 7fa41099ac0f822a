#include "rwald/detector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rwald {
namespace {

void require_same_length(const CVector& x, const CVector& v, const char* who) {
    if (x.size() != v.size()) {
        throw std::invalid_argument(std::string(who) + ": length mismatch");
    }
}

}  // namespace

void DetectorConfig::validate() const {
    if (!(pfa_nominal > 0.0 && pfa_nominal < 1.0)) {
        throw std::invalid_argument("DetectorConfig: pfa_nominal must lie in (0, 1)");
    }
}

std::size_t DetectorConfig::resolve_lag(std::size_t n) const {
    const std::size_t lag = truncation_lag.value_or(default_truncation_lag(n));
    if (lag >= n) {
        throw std::invalid_argument("DetectorConfig: truncation lag must be < N");
    }
    return lag;
}

Complex ls_estimate(const CVector& x, const CVector& v) {
    require_same_length(x, v, "ls_estimate");
    const double energy = v.squaredNorm();
    if (!(energy > 0.0)) {
        throw std::invalid_argument("ls_estimate: zero steering vector");
    }
    return v.dot(x) / energy;  // Eigen's dot conjugates the left operand
}

CVector residuals(const CVector& x, const CVector& v, Complex alpha_hat) {
    require_same_length(x, v, "residuals");
    return x - alpha_hat * v;
}

double hac_quadratic_form(const CVector& v, const CVector& c_hat, std::size_t lag) {
    require_same_length(v, c_hat, "hac_quadratic_form");
    const auto n = static_cast<std::size_t>(v.size());
    if (lag >= n) {
        throw std::invalid_argument("hac_quadratic_form: lag must be < N");
    }
    // Real and imaginary parts interleaved, as std::complex guarantees.
    const double* vp = reinterpret_cast<const double*>(v.data());
    const double* cp = reinterpret_cast<const double*>(c_hat.data());

    // u_k = v_k^* c_k, recomputed per lag so no O(N) scratch is needed.
    auto u_re = [&](std::size_t k) { return vp[2 * k] * cp[2 * k] + vp[2 * k + 1] * cp[2 * k + 1]; };
    auto u_im = [&](std::size_t k) { return vp[2 * k] * cp[2 * k + 1] - vp[2 * k + 1] * cp[2 * k]; };

    double diag = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double re = u_re(k);
        const double im = u_im(k);
        diag += re * re + im * im;
    }
    // Re{v_n^* v_{n-m} c_n c_{n-m}^*} = Re{u_n conj(u_{n-m})}.
    double off = 0.0;
    for (std::size_t m = 1; m <= lag; ++m) {
        // Independent partial sums keep the adds off one dependency chain.
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        std::size_t k = m;
        for (; k + 2 <= n; k += 2) {
            a0 += u_re(k) * u_re(k - m);
            a1 += u_im(k) * u_im(k - m);
            a2 += u_re(k + 1) * u_re(k + 1 - m);
            a3 += u_im(k + 1) * u_im(k + 1 - m);
        }
        for (; k < n; ++k) {
            a0 += u_re(k) * u_re(k - m);
            a1 += u_im(k) * u_im(k - m);
        }
        off += (a0 + a1) + (a2 + a3);
    }
    return diag + 2.0 * off;
}

std::size_t default_truncation_lag(std::size_t n) {
    if (n < 1) {
        throw std::invalid_argument("default_truncation_lag: n must be >= 1");
    }
    auto l = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), 0.25)));
    auto fourth = [](std::size_t k) { return k * k * k * k; };
    while (l > 0 && fourth(l) > n) {
        --l;
    }
    while (fourth(l + 1) <= n) {
        ++l;
    }
    return std::min(l, n - 1);
}

bool lag_exceeds_consistency_bound(std::size_t lag, std::size_t n) {
    return static_cast<double>(lag) > std::cbrt(static_cast<double>(n));
}

double threshold_for_pfa(double pfa) {
    if (!(pfa > 0.0 && pfa < 1.0)) {
        throw std::invalid_argument("threshold_for_pfa: pfa must lie in (0, 1)");
    }
    return -2.0 * std::log(pfa);
}

DetectionOutcome wald_statistic(const CVector& x, const CVector& v, const DetectorConfig& cfg) {
    require_same_length(x, v, "wald_statistic");
    cfg.validate();
    const auto n = static_cast<std::size_t>(x.size());

    DetectionOutcome out;
    out.threshold = threshold_for_pfa(cfg.pfa_nominal);
    out.truncation_lag = cfg.resolve_lag(n);

    const double energy = v.squaredNorm();
    if (!(energy > 0.0)) {
        throw std::invalid_argument("wald_statistic: zero steering vector");
    }
    const Complex projection = v.dot(x);
    out.alpha_hat = projection / energy;
    out.denominator = hac_quadratic_form(v, x - out.alpha_hat * v, out.truncation_lag);

    const double floor = kDegenerateFloor * energy * (x.squaredNorm() / static_cast<double>(n));
    if (!(out.denominator > floor)) {
        out.degenerate = true;
        if (cfg.degenerate_policy == DegeneratePolicy::error) {
            throw DegenerateStatistic("wald_statistic: covariance quadratic form is degenerate");
        }
        return out;
    }
    out.statistic = 2.0 * std::norm(projection) / out.denominator;
    out.decide_h1 = out.statistic > out.threshold;
    return out;
}

}  // namespace rwald
