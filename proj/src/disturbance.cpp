#include "rwald/disturbance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

namespace rwald {

void InnovationSpec::validate() const {
    if (!(sigma_w2 > 0.0) || !std::isfinite(sigma_w2)) {
        throw std::invalid_argument("InnovationSpec: sigma_w2 must be > 0");
    }
    if (kind == InnovationKind::complex_t && !(shape_lambda > 1.0)) {
        throw std::invalid_argument("InnovationSpec: complex_t shape_lambda must be > 1");
    }
}

std::vector<Complex> ar_roots(std::span<const Complex> rho) {
    const auto p = static_cast<Eigen::Index>(rho.size());
    if (p == 0) {
        return {};
    }
    // Companion matrix of z^p - rho_1 z^{p-1} - ... - rho_p.
    CMatrix companion = CMatrix::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i) {
        companion(0, i) = rho[static_cast<std::size_t>(i)];
    }
    for (Eigen::Index i = 1; i < p; ++i) {
        companion(i, i - 1) = 1.0;
    }
    Eigen::ComplexEigenSolver<CMatrix> solver(companion, false);
    if (solver.info() != Eigen::Success) {
        throw std::domain_error("ar_roots: eigenvalue iteration did not converge");
    }
    const auto& ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

StabilityReport check_stability(std::span<const Complex> rho) {
    StabilityReport report;
    for (const auto& z : ar_roots(rho)) {
        report.root_moduli.push_back(std::abs(z));
    }
    std::sort(report.root_moduli.begin(), report.root_moduli.end(), std::greater<>());
    report.max_modulus = report.root_moduli.empty() ? 0.0 : report.root_moduli.front();
    report.stable = report.max_modulus < 1.0 - kStabilityMargin;
    return report;
}

std::vector<Complex> ar_from_poles(std::span<const Complex> poles) {
    // Expand prod_k (z - z_k) = z^p + a_1 z^{p-1} + ... + a_p; rho_i = -a_i.
    std::vector<Complex> poly{1.0};
    for (const auto& z : poles) {
        std::vector<Complex> next(poly.size() + 1, 0.0);
        for (std::size_t i = 0; i < poly.size(); ++i) {
            next[i] += poly[i];
            next[i + 1] -= z * poly[i];
        }
        poly = std::move(next);
    }
    std::vector<Complex> out(poles.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = -poly[i + 1];
    }
    return out;
}

Complex Autocovariance::at(std::ptrdiff_t lag) const {
    const auto mag = static_cast<std::size_t>(lag < 0 ? -lag : lag);
    if (mag >= values.size()) {
        return 0.0;
    }
    return lag < 0 ? std::conj(values[mag]) : values[mag];
}

namespace {

// Lags 0..p of the unnormalized process. Unknowns are the real and
// imaginary parts of r[0..p]; row pairs encode
//   r[m] - sum_i rho_i r[m - i] = sigma_w2 delta_m,  m = 0..p,
// with r[-k] = conj(r[k]).
std::vector<Complex> yule_walker_lags(const std::vector<Complex>& rho, double sigma_w2) {
    const std::size_t p = rho.size();
    const auto dim = static_cast<Eigen::Index>(2 * (p + 1));
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
    auto re = [](std::size_t k) { return static_cast<Eigen::Index>(2 * k); };
    auto im = [](std::size_t k) { return static_cast<Eigen::Index>(2 * k + 1); };

    for (std::size_t m = 0; m <= p; ++m) {
        const Eigen::Index row_re = re(m);
        const Eigen::Index row_im = im(m);
        a(row_re, re(m)) += 1.0;
        a(row_im, im(m)) += 1.0;
        for (std::size_t i = 1; i <= p; ++i) {
            const double pr = rho[i - 1].real();
            const double pi = rho[i - 1].imag();
            const auto d = static_cast<std::ptrdiff_t>(m) - static_cast<std::ptrdiff_t>(i);
            const auto k = static_cast<std::size_t>(d < 0 ? -d : d);
            // conj applies to r[d] for negative d.
            const double sign = d < 0 ? -1.0 : 1.0;
            a(row_re, re(k)) -= pr;
            a(row_re, im(k)) -= -pi * sign;
            a(row_im, re(k)) -= pi;
            a(row_im, im(k)) -= pr * sign;
        }
    }
    b[re(0)] = sigma_w2;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) {
        throw std::domain_error("ar_autocovariance: singular Yule-Walker system");
    }
    const Eigen::VectorXd x = lu.solve(b);
    if (!x.allFinite() || (a * x - b).norm() > 1e-8 * (1.0 + x.norm())) {
        throw std::domain_error("ar_autocovariance: ill-conditioned Yule-Walker system");
    }
    std::vector<Complex> r(p + 1);
    for (std::size_t k = 0; k <= p; ++k) {
        r[k] = {x[re(k)], x[im(k)]};
    }
    r[0] = r[0].real();
    if (!(r[0].real() > 0.0)) {
        throw std::domain_error("ar_autocovariance: nonpositive variance");
    }
    return r;
}

}  // namespace

ArSpec::ArSpec(std::vector<Complex> rho, InnovationSpec innovation, bool normalize_unit_power)
    : rho_(std::move(rho)), innovation_(innovation), normalize_(normalize_unit_power) {
    innovation_.validate();
    const auto report = check_stability(rho_);
    if (!report.stable) {
        throw std::invalid_argument("ArSpec: AR polynomial has a root of modulus " +
                                    std::to_string(report.max_modulus) +
                                    " (must lie strictly inside the unit disk)");
    }
    max_root_modulus_ = report.max_modulus;
    raw_power_ = yule_walker_lags(rho_, innovation_.sigma_w2).front().real();
}

double ArSpec::output_scale() const noexcept {
    return normalize_ ? 1.0 / std::sqrt(raw_power_) : 1.0;
}

std::size_t ArSpec::burn_in() const noexcept {
    if (rho_.empty()) {
        return 0;
    }
    const double transient =
        std::ceil(10.0 * static_cast<double>(rho_.size()) / (1.0 - max_root_modulus_));
    return std::max<std::size_t>(1000, static_cast<std::size_t>(transient));
}

CgSpec::CgSpec(std::vector<Complex> speckle_rho, TextureKind texture, double texture_shape,
               bool normalize_unit_power)
    : speckle_(std::move(speckle_rho), InnovationSpec::gaussian(1.0), normalize_unit_power),
      texture_(texture),
      texture_shape_(texture_shape) {
    if (texture_ == TextureKind::inverse_gamma && !(texture_shape_ > 1.0)) {
        throw std::invalid_argument("CgSpec: inverse-gamma texture shape must be > 1");
    }
}

double ar_psd(const ArSpec& spec, double nu) {
    Complex denom = 1.0;
    const auto& rho = spec.rho();
    for (std::size_t n = 1; n <= rho.size(); ++n) {
        denom -= rho[n - 1] * std::polar(1.0, -kTwoPi * static_cast<double>(n) * nu);
    }
    const double psd = spec.innovation().sigma_w2 / std::norm(denom);
    return spec.normalize_unit_power() ? psd / spec.raw_power() : psd;
}

Autocovariance ar_autocovariance(const ArSpec& spec, std::size_t max_lag) {
    const auto& rho = spec.rho();
    const std::size_t p = rho.size();
    auto head = yule_walker_lags(rho, spec.innovation().sigma_w2);

    Autocovariance out;
    out.values.resize(max_lag + 1);
    for (std::size_t m = 0; m <= max_lag; ++m) {
        if (m <= p) {
            out.values[m] = head[m];
            continue;
        }
        Complex acc = 0.0;
        for (std::size_t i = 1; i <= p; ++i) {
            acc += rho[i - 1] * out.values[m - i];
        }
        out.values[m] = acc;
    }
    if (spec.normalize_unit_power()) {
        const double r0 = head[0].real();
        for (auto& r : out.values) {
            r /= r0;
        }
    }
    return out;
}

Autocovariance clutter_autocovariance(const ClutterSpec& spec, std::size_t max_lag) {
    return std::visit(
        [max_lag](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ArSpec>) {
                return ar_autocovariance(s, max_lag);
            } else {
                return ar_autocovariance(s.speckle(), max_lag);
            }
        },
        spec);
}

double clutter_psd(const ClutterSpec& spec, double nu) {
    return std::visit(
        [nu](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ArSpec>) {
                return ar_psd(s, nu);
            } else {
                return ar_psd(s.speckle(), nu);
            }
        },
        spec);
}

GammaSampler::GammaSampler(double shape) : d_(shape - 1.0 / 3.0), c_(1.0 / std::sqrt(9.0 * d_)) {
    if (!(shape >= 1.0)) {
        throw std::invalid_argument("GammaSampler: shape must be >= 1");
    }
}

double GammaSampler::operator()(RandomStream& rng) {
    for (;;) {
        const double x = normal_(rng);
        double v = 1.0 + c_ * x;
        if (v <= 0.0) {
            continue;
        }
        v = v * v * v;
        const double u = rng.uniform_open();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2 ||
            std::log(u) < 0.5 * x2 + d_ * (1.0 - v + std::log(v))) {
            return d_ * v;
        }
    }
}

InnovationSampler::InnovationSampler(const InnovationSpec& spec)
    : spec_(spec),
      half_sigma_(std::sqrt(spec.sigma_w2 / 2.0)),
      t_scale_(spec.sigma_w2 * (spec.shape_lambda - 1.0)),
      gamma_(spec.kind == InnovationKind::complex_t ? spec.shape_lambda : 1.0) {
    spec_.validate();
}

Complex InnovationSampler::operator()(RandomStream& rng) {
    const double re = normal_(rng);
    const double im = normal_(rng);
    if (spec_.kind == InnovationKind::complex_gaussian) {
        return {half_sigma_ * re, half_sigma_ * im};
    }
    const double mixing = t_scale_ / gamma_(rng);
    const double scale = std::sqrt(mixing / 2.0);
    return {scale * re, scale * im};
}

CVector sample_innovations(const InnovationSpec& spec, std::size_t n, RandomStream& rng) {
    InnovationSampler draw(spec);
    CVector w(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        w[i] = draw(rng);
    }
    return w;
}

CVector generate_ar(const ArSpec& spec, std::size_t n, RandomStream& rng) {
    if (n < 1) {
        throw std::invalid_argument("generate_ar: n must be >= 1");
    }
    InnovationSampler draw(spec.innovation());
    const auto& rho = spec.rho();
    const std::size_t p = rho.size();
    const std::size_t burn = spec.burn_in();

    // history[0] is the newest sample.
    std::vector<Complex> history(p, 0.0);
    auto step = [&]() {
        Complex c = draw(rng);
        for (std::size_t i = 0; i < p; ++i) {
            c += rho[i] * history[i];
        }
        if (p > 0) {
            std::copy_backward(history.begin(), history.end() - 1, history.end());
            history[0] = c;
        }
        return c;
    };

    for (std::size_t k = 0; k < burn; ++k) {
        step();
    }
    const double scale = spec.output_scale();
    CVector out(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        out[k] = scale * step();
    }
    return out;
}

CVector generate_cg(const CgSpec& spec, std::size_t n, RandomStream& rng) {
    double tau = 1.0;
    if (spec.texture() == TextureKind::inverse_gamma) {
        const double shape = spec.texture_shape();
        GammaSampler gamma(shape);
        tau = (shape - 1.0) / gamma(rng);
    }
    return std::sqrt(tau) * generate_ar(spec.speckle(), n, rng);
}

CVector generate_clutter(const ClutterSpec& spec, std::size_t n, RandomStream& rng) {
    return std::visit(
        [n, &rng](const auto& s) {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, ArSpec>) {
                return generate_ar(s, n, rng);
            } else {
                return generate_cg(s, n, rng);
            }
        },
        spec);
}

}  // namespace rwald
