#include "rwald/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rwald {
namespace {

// exp(j 2 pi cycles), with the integer part of the phase removed first so
// large element indices do not lose precision.
Complex unit_phasor(double cycles) {
    const double frac = std::remainder(cycles, 1.0);
    return {std::cos(kTwoPi * frac), std::sin(kTwoPi * frac)};
}

void require_square(const CMatrix& m, std::size_t dim, const char* name) {
    if (static_cast<std::size_t>(m.rows()) != dim || static_cast<std::size_t>(m.cols()) != dim) {
        throw std::invalid_argument(std::string("ArrayConfig: ") + name + " must be " +
                                    std::to_string(dim) + "x" + std::to_string(dim));
    }
}

}  // namespace

ArrayConfig ArrayConfig::identity(std::size_t m_t, std::size_t m_r) {
    ArrayConfig cfg;
    cfg.m_t = m_t;
    cfg.m_r = m_r;
    cfg.w = CMatrix::Identity(static_cast<Eigen::Index>(m_t), static_cast<Eigen::Index>(m_t));
    cfg.s = cfg.w;
    cfg.validate();
    return cfg;
}

bool ArrayConfig::is_identity(double tol) const {
    const auto eye = CMatrix::Identity(w.rows(), w.cols());
    return (w - eye).cwiseAbs().maxCoeff() <= tol && (s - eye).cwiseAbs().maxCoeff() <= tol;
}

void ArrayConfig::validate() const {
    if (m_t < 1 || m_r < 1) {
        throw std::invalid_argument("ArrayConfig: m_t and m_r must be >= 1");
    }
    require_square(w, m_t, "w");
    require_square(s, m_t, "s");
}

CVector ula_steering(double nu, std::size_t count, std::size_t spacing_multiplier) {
    if (count < 1) {
        throw std::invalid_argument("ula_steering: count must be >= 1");
    }
    if (spacing_multiplier < 1) {
        throw std::invalid_argument("ula_steering: spacing_multiplier must be >= 1");
    }
    CVector a(static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
        a[static_cast<Eigen::Index>(i)] =
            unit_phasor(static_cast<double>(i * spacing_multiplier) * nu);
    }
    return a;
}

SteeringVector build_virtual_vector(const ArrayConfig& cfg, const CVector& a_t, const CVector& a_r,
                                    double nu) {
    cfg.validate();
    if (static_cast<std::size_t>(a_t.size()) != cfg.m_t ||
        static_cast<std::size_t>(a_r.size()) != cfg.m_r) {
        throw std::invalid_argument("build_virtual_vector: steering lengths do not match array");
    }
    // (S^T kron I)(b kron a_r) = (S^T b) kron a_r, with b = W^T a_t.
    const CVector tx = cfg.s.transpose() * (cfg.w.transpose() * a_t);
    const auto mr = static_cast<Eigen::Index>(cfg.m_r);
    SteeringVector v;
    v.nu = nu;
    v.values.resize(tx.size() * mr);
    for (Eigen::Index t = 0; t < tx.size(); ++t) {
        v.values.segment(t * mr, mr) = tx[t] * a_r;
    }
    return v;
}

SteeringVector virtual_steering(double nu, const ArrayConfig& cfg) {
    cfg.validate();
    if (!cfg.is_identity()) {
        throw std::invalid_argument("virtual_steering: closed form requires W = S = I");
    }
    return virtual_steering(nu, cfg.channels());
}

SteeringVector virtual_steering(double nu, std::size_t channels) {
    return {ula_steering(nu, channels, 1), nu};
}

double beampattern(const CMatrix& w, const CVector& a_t) {
    if (w.rows() != w.cols() || w.cols() != a_t.size()) {
        throw std::invalid_argument("beampattern: dimension mismatch");
    }
    return (w.transpose() * a_t).squaredNorm();
}

}  // namespace rwald
