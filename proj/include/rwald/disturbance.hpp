#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "rwald/random.hpp"
#include "rwald/types.hpp"

namespace rwald {

// Roots closer than this to the unit circle are treated as unstable.
inline constexpr double kStabilityMargin = 1e-9;

enum class InnovationKind { complex_gaussian, complex_t };

// Circular i.i.d. innovations with E|w|^2 = sigma_w2.
//
// complex_t draws w = sqrt(V) g with g ~ CN(0, 1) and V inverse-gamma with
// shape lambda and scale sigma_w2 (lambda - 1), so that |w|^2 has the Lomax
// law P(|w|^2 > u) = (b / (b + u))^lambda, b = sigma_w2 (lambda - 1).
struct InnovationSpec {
    InnovationKind kind = InnovationKind::complex_gaussian;
    double sigma_w2 = 1.0;
    double shape_lambda = 2.0;  // complex_t only

    static InnovationSpec gaussian(double sigma_w2 = 1.0) {
        return {InnovationKind::complex_gaussian, sigma_w2, 2.0};
    }
    static InnovationSpec complex_t(double shape_lambda, double sigma_w2 = 1.0) {
        return {InnovationKind::complex_t, sigma_w2, shape_lambda};
    }

    void validate() const;
};

struct StabilityReport {
    bool stable = true;
    std::vector<double> root_moduli;  // sorted, largest first
    double max_modulus = 0.0;
};

// Roots of z^p - rho_1 z^{p-1} - ... - rho_p, i.e. of P(z) = 1 - sum rho_i z^{-i}.
std::vector<Complex> ar_roots(std::span<const Complex> rho);

// Stable iff every root modulus is below 1 - kStabilityMargin. p = 0 is stable.
StabilityReport check_stability(std::span<const Complex> rho);

// AR coefficients whose characteristic roots are `poles`:
// z^p - rho_1 z^{p-1} - ... - rho_p = prod_k (z - pole_k).
std::vector<Complex> ar_from_poles(std::span<const Complex> poles);

// Lags r[0..L] of a stationary process, r[m] = E{c_n c*_{n-m}}.
struct Autocovariance {
    std::vector<Complex> values;

    std::size_t max_lag() const noexcept { return values.empty() ? 0 : values.size() - 1; }
    double power() const { return values.at(0).real(); }

    // r[-m] = conj(r[m]); lags beyond max_lag are zero.
    Complex at(std::ptrdiff_t lag) const;
};

// Stable AR(p): c_n = sum_i rho_i c_{n-i} + w_n. Stability is checked on
// construction.
class ArSpec {
public:
    // White unit-power complex Gaussian clutter.
    ArSpec() : ArSpec({}, InnovationSpec::gaussian(1.0), false) {}
    ArSpec(std::vector<Complex> rho, InnovationSpec innovation, bool normalize_unit_power);

    const std::vector<Complex>& rho() const noexcept { return rho_; }
    const InnovationSpec& innovation() const noexcept { return innovation_; }
    bool normalize_unit_power() const noexcept { return normalize_; }
    std::size_t order() const noexcept { return rho_.size(); }
    double max_root_modulus() const noexcept { return max_root_modulus_; }

    // r_C[0] of the unnormalized recursion.
    double raw_power() const noexcept { return raw_power_; }

    // Multiplier applied to generated samples: 1 / sqrt(raw_power) when
    // normalizing, 1 otherwise.
    double output_scale() const noexcept;

    // Transient discarded before output: max(1000, ceil(10 p / (1 - max root
    // modulus))); zero for white innovations.
    std::size_t burn_in() const noexcept;

private:
    std::vector<Complex> rho_;
    InnovationSpec innovation_;
    bool normalize_ = false;
    double max_root_modulus_ = 0.0;
    double raw_power_ = 0.0;
};

enum class TextureKind { degenerate, inverse_gamma };

// Compound-Gaussian clutter c = sqrt(tau) s with Gaussian AR speckle s
// (CN(0, 1) innovations) and unit-mean texture tau, drawn once per vector.
class CgSpec {
public:
    CgSpec(std::vector<Complex> speckle_rho, TextureKind texture, double texture_shape,
           bool normalize_unit_power);

    const ArSpec& speckle() const noexcept { return speckle_; }
    TextureKind texture() const noexcept { return texture_; }
    double texture_shape() const noexcept { return texture_shape_; }

private:
    ArSpec speckle_;
    TextureKind texture_ = TextureKind::degenerate;
    double texture_shape_ = 0.0;
};

using ClutterSpec = std::variant<ArSpec, CgSpec>;

// sigma_w2 |1 - sum rho_n e^{-j 2 pi n nu}|^{-2}, divided by raw_power when
// normalize_unit_power is set.
double ar_psd(const ArSpec& spec, double nu);

// Exact autocovariance via the Yule-Walker equations (lags 0..p) and the AR
// recursion beyond. Normalized specs report r[0] = 1. Throws
// std::domain_error when the system is singular.
Autocovariance ar_autocovariance(const ArSpec& spec, std::size_t max_lag);

// Unit-mean texture leaves the second-order statistics of the speckle intact.
Autocovariance clutter_autocovariance(const ClutterSpec& spec, std::size_t max_lag);
double clutter_psd(const ClutterSpec& spec, double nu);

// Gamma(shape, 1) variates for shape >= 1 (Marsaglia-Tsang squeeze on
// ziggurat normals).
class GammaSampler {
public:
    explicit GammaSampler(double shape);
    double operator()(RandomStream& rng);

private:
    double d_ = 0.0;
    double c_ = 0.0;
    boost::random::normal_distribution<double> normal_;
};

class InnovationSampler {
public:
    explicit InnovationSampler(const InnovationSpec& spec);
    Complex operator()(RandomStream& rng);

private:
    InnovationSpec spec_;
    double half_sigma_ = 0.0;  // sqrt(sigma_w2 / 2)
    double t_scale_ = 0.0;     // sigma_w2 (lambda - 1)
    boost::random::normal_distribution<double> normal_;
    GammaSampler gamma_;
};

CVector sample_innovations(const InnovationSpec& spec, std::size_t n, RandomStream& rng);

// Runs the recursion from a zero state through burn_in() samples and
// returns the next n. Normalized specs are scaled by output_scale().
CVector generate_ar(const ArSpec& spec, std::size_t n, RandomStream& rng);

CVector generate_cg(const CgSpec& spec, std::size_t n, RandomStream& rng);

CVector generate_clutter(const ClutterSpec& spec, std::size_t n, RandomStream& rng);

}  // namespace rwald
