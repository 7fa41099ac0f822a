#include "rwald/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rwald {
namespace {

double poisson_pmf(double k, double mean) {
    if (mean == 0.0) {
        return k == 0.0 ? 1.0 : 0.0;
    }
    return std::exp(-mean + k * std::log(mean) - std::lgamma(k + 1.0));
}

// P(L <= k) for L ~ Poisson(mean). The smaller tail is summed directly.
double poisson_cdf(double k, double mean) {
    if (mean == 0.0) {
        return 1.0;
    }
    constexpr double kRel = 1e-18;
    double term = poisson_pmf(k, mean);
    if (k < mean) {
        double sum = 0.0;
        for (double i = k; i >= 0.0; i -= 1.0) {
            sum += term;
            term *= i / mean;
            if (term <= kRel * sum) {
                break;
            }
        }
        return std::min(sum, 1.0);
    }
    double tail = 0.0;
    for (double i = k + 1.0;; i += 1.0) {
        term *= mean / i;
        tail += term;
        if (term <= kRel * std::max(tail, 1e-300) || term == 0.0) {
            break;
        }
    }
    return std::max(0.0, 1.0 - tail);
}

}  // namespace

double chi2_2_sf(double t) {
    if (!(t >= 0.0)) {
        throw std::invalid_argument("chi2_2_sf: t must be >= 0");
    }
    return std::exp(-0.5 * t);
}

// Q_1(a, b) = sum_k Pois(k; a^2/2) P(Pois(b^2/2) <= k). The sum runs outward
// from the mode of the first Poisson law until its weights drop below 1e-18.
double marcum_q1(double a, double b) {
    if (!(a >= 0.0) || !(b >= 0.0)) {
        throw std::invalid_argument("marcum_q1: arguments must be >= 0");
    }
    if (b == 0.0) {
        return 1.0;
    }
    const double y = 0.5 * b * b;
    if (a == 0.0) {
        return std::exp(-y);
    }
    const double mu = 0.5 * a * a;
    constexpr double kNegligible = 1e-18;

    const double k0 = std::floor(mu);
    const double q0 = poisson_cdf(k0, y);
    double sum = poisson_pmf(k0, mu) * q0;

    double q = q0;
    for (double k = k0 + 1.0;; k += 1.0) {
        q = std::min(1.0, q + poisson_pmf(k, y));
        const double w = poisson_pmf(k, mu);
        sum += w * q;
        if (w < kNegligible) {
            break;
        }
    }
    q = q0;
    for (double k = k0 - 1.0; k >= 0.0; k -= 1.0) {
        q = std::max(0.0, q - poisson_pmf(k + 1.0, y));
        const double w = poisson_pmf(k, mu);
        sum += w * q;
        if (w < kNegligible) {
            break;
        }
    }
    return std::clamp(sum, 0.0, 1.0);
}

double toeplitz_quadratic_form(const CVector& v, const Autocovariance& r) {
    if (r.values.empty()) {
        throw std::invalid_argument("toeplitz_quadratic_form: empty autocovariance");
    }
    const auto n = static_cast<std::size_t>(v.size());
    const std::size_t lags = std::min(r.max_lag(), n == 0 ? 0 : n - 1);
    double total = r.values[0].real() * v.squaredNorm();
    for (std::size_t m = 1; m <= lags; ++m) {
        Complex acc = 0.0;
        for (std::size_t k = m; k < n; ++k) {
            acc += std::conj(v[static_cast<Eigen::Index>(k)]) * v[static_cast<Eigen::Index>(k - m)];
        }
        total += 2.0 * (r.values[m] * acc).real();
    }
    return total;
}

namespace {

double noncentrality_from_form(Complex alpha, const CVector& v, double form) {
    if (!(form > 0.0)) {
        throw std::domain_error("noncentrality: v^H Gamma v must be > 0");
    }
    const double energy = v.squaredNorm();
    return 2.0 * std::norm(alpha) * energy * energy / form;
}

}  // namespace

double noncentrality(Complex alpha, const CVector& v, const Autocovariance& gamma) {
    return noncentrality_from_form(alpha, v, toeplitz_quadratic_form(v, gamma));
}

double noncentrality(Complex alpha, const CVector& v, const CMatrix& gamma) {
    if (gamma.rows() != v.size() || gamma.cols() != v.size()) {
        throw std::invalid_argument("noncentrality: covariance dimension mismatch");
    }
    return noncentrality_from_form(alpha, v, v.dot(gamma * v).real());
}

double asymptotic_pd(double varsigma, double threshold) {
    if (!(varsigma >= 0.0) || !(threshold >= 0.0)) {
        throw std::invalid_argument("asymptotic_pd: arguments must be >= 0");
    }
    return marcum_q1(std::sqrt(varsigma), std::sqrt(threshold));
}

AsymptoticPrediction predict(double pfa_nominal, double varsigma) {
    if (!(pfa_nominal > 0.0 && pfa_nominal < 1.0)) {
        throw std::invalid_argument("predict: pfa must lie in (0, 1)");
    }
    AsymptoticPrediction out;
    out.threshold = -2.0 * std::log(pfa_nominal);
    out.pfa = chi2_2_sf(out.threshold);
    out.varsigma = varsigma;
    out.pd = asymptotic_pd(varsigma, out.threshold);
    return out;
}

double varsigma_for_pd(double pd, double threshold) {
    if (!(pd < 1.0) || pd < chi2_2_sf(threshold)) {
        throw std::invalid_argument("varsigma_for_pd: pd must lie in [pfa, 1)");
    }
    double lo = 0.0;
    double hi = 1.0;
    while (asymptotic_pd(hi, threshold) < pd) {
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (asymptotic_pd(mid, threshold) < pd ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace rwald
