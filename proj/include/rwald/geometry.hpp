#pragma once

#include <cstddef>

#include "rwald/types.hpp"

namespace rwald {

// Colocated MIMO array. The virtual array has N = m_t * m_r channels.
//
// Data convention: the matched-filter output X (m_r x m_t) is vectorized by
// stacking columns, so virtual channel index k = t * m_r + r pairs transmit
// element t with receive element r.
struct ArrayConfig {
    std::size_t m_t = 1;
    std::size_t m_r = 1;
    CMatrix w;  // waveform weighting, m_t x m_t
    CMatrix s;  // waveform cross-correlation (straddling), m_t x m_t

    // Orthonormal waveforms, uniform transmit power (W = S = I).
    static ArrayConfig identity(std::size_t m_t, std::size_t m_r);

    std::size_t channels() const noexcept { return m_t * m_r; }
    bool is_identity(double tol = 1e-12) const;

    // Throws std::invalid_argument on a broken invariant.
    void validate() const;
};

struct SteeringVector {
    CVector values;
    double nu = 0.0;  // spatial frequency, cycles per virtual element

    std::size_t size() const noexcept { return static_cast<std::size_t>(values.size()); }
};

// Uniform linear array response: entry i is exp(j 2 pi i * spacing_multiplier * nu).
// The receive array of the identifiable geometry uses multiplier 1, the
// transmit array uses multiplier m_r.
CVector ula_steering(double nu, std::size_t count, std::size_t spacing_multiplier = 1);

// v = (S^T kron I_{m_r}) (W^T a_t kron a_r).
SteeringVector build_virtual_vector(const ArrayConfig& cfg, const CVector& a_t, const CVector& a_r,
                                    double nu = 0.0);

// Closed form of build_virtual_vector for the identifiable geometry (transmit
// spacing m_r * d, receive spacing d) with W = S = I: entry i is exp(j 2 pi i nu).
SteeringVector virtual_steering(double nu, const ArrayConfig& cfg);
SteeringVector virtual_steering(double nu, std::size_t channels);

// Transmit beampattern P = a_t^H W^* W^T a_t = ||W^T a_t||^2.
double beampattern(const CMatrix& w, const CVector& a_t);

}  // namespace rwald
