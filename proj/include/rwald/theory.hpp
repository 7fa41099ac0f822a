#pragma once

#include "rwald/disturbance.hpp"
#include "rwald/geometry.hpp"
#include "rwald/types.hpp"

namespace rwald {

// Asymptotic operating point of the robust Wald test: the statistic is
// chi^2_2(0) under H0 and chi^2_2(varsigma) under H1.
struct AsymptoticPrediction {
    double pfa = 1.0;
    double pd = 1.0;
    double varsigma = 0.0;
    double threshold = 0.0;
};

// Survival function of a central chi-square with two degrees of freedom.
double chi2_2_sf(double t);

// Marcum Q function of order one, Q_1(a, b) = P(|a + z|^2 > b^2) with z a
// zero-mean complex Gaussian of unit variance per real dimension. Accurate
// to about 1e-12 absolute.
double marcum_q1(double a, double b);

// v^H Gamma v with [Gamma]_{ij} = r[i - j]; lags beyond r.max_lag() count as
// zero. O(N L).
double toeplitz_quadratic_form(const CVector& v, const Autocovariance& r);

// 2 |alpha|^2 ||v||^4 / (v^H Gamma v).
double noncentrality(Complex alpha, const CVector& v, const Autocovariance& gamma);
double noncentrality(Complex alpha, const CVector& v, const CMatrix& gamma);

// Q_1(sqrt(varsigma), sqrt(threshold)).
double asymptotic_pd(double varsigma, double threshold);

AsymptoticPrediction predict(double pfa_nominal, double varsigma);

// Inverse of asymptotic_pd in its first argument, by bisection. Requires
// chi2_2_sf(threshold) <= pd < 1.
double varsigma_for_pd(double pd, double threshold);

}  // namespace rwald
