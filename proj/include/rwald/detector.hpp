#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>

#include "rwald/geometry.hpp"
#include "rwald/types.hpp"

namespace rwald {

enum class DegeneratePolicy { error, count_as_reject };

// Relative floor below which the covariance quadratic form is declared
// degenerate: denominator <= kDegenerateFloor * ||v||^2 * ||x||^2 / N.
inline constexpr double kDegenerateFloor = 1e-12;

struct DetectorConfig {
    std::optional<std::size_t> truncation_lag;  // empty = floor(N^{1/4})
    double pfa_nominal = 1e-2;
    DegeneratePolicy degenerate_policy = DegeneratePolicy::count_as_reject;

    void validate() const;
    std::size_t resolve_lag(std::size_t n) const;
};

struct DetectionOutcome {
    double statistic = 0.0;    // 2 |v^H x|^2 / (v^H Gamma_l v)
    Complex alpha_hat = 0.0;   // v^H x / ||v||^2
    double denominator = 0.0;  // v^H Gamma_l v
    double threshold = 0.0;
    std::size_t truncation_lag = 0;
    bool decide_h1 = false;
    bool degenerate = false;
};

// Thrown by wald_statistic under DegeneratePolicy::error.
class DegenerateStatistic : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

Complex ls_estimate(const CVector& x, const CVector& v);

CVector residuals(const CVector& x, const CVector& v, Complex alpha_hat);

// v^H Gamma_l v for the banded residual covariance [Gamma_l]_{ij} = c_i c_j^*,
// |i - j| <= l, evaluated in O(N l) without forming the matrix:
//   sum_n |v_n|^2 |c_n|^2 + 2 sum_{m=1}^{l} sum_{n=m}^{N-1} Re{v_n^* v_{n-m} c_n c_{n-m}^*}.
double hac_quadratic_form(const CVector& v, const CVector& c_hat, std::size_t lag);

// floor(n^{1/4}), clamped below n.
std::size_t default_truncation_lag(std::size_t n);

// True when lag exceeds n^{1/3}, outside the consistency regime of the
// covariance estimate. Callers may warn; the lag is still honored.
bool lag_exceeds_consistency_bound(std::size_t lag, std::size_t n);

// -2 ln(pfa).
double threshold_for_pfa(double pfa);

DetectionOutcome wald_statistic(const CVector& x, const CVector& v, const DetectorConfig& cfg);

inline DetectionOutcome wald_statistic(const CVector& x, const SteeringVector& v,
                                       const DetectorConfig& cfg) {
    return wald_statistic(x, v.values, cfg);
}

}  // namespace rwald
