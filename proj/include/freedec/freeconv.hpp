#pragma once

#include "freedec/measures.hpp"

namespace freedec {

inline constexpr int kDefaultMomentOrder = 8;
inline constexpr int kMaxMomentOrder = 32;

/// Moments -> free cumulants (triangular solve of the moment-cumulant relation).
CumulantSequence moments_to_cumulants(const MomentSequence& m);

/// Free cumulants -> moments.
MomentSequence cumulants_to_moments(const CumulantSequence& a);

/// Additive free convolution: cumulants add coordinatewise.
MomentSequence additive_free_convolve(const MomentSequence& m1, const MomentSequence& m2);

/// Exact inverse of additive_free_convolve. The result is a formal moment
/// sequence; it need not correspond to a positive measure.
MomentSequence additive_free_deconvolve(const MomentSequence& m, const MomentSequence& m2);

/// Moments of a + s*I: m'_j = sum_k C(j,k) s^k m_{j-k}.
MomentSequence shift_moments(const MomentSequence& m, double s);

/// Removes a scalar s2 >= 0 from the spectrum; equals additive free
/// deconvolution against the point mass at s2.
MomentSequence shift_deconvolve(const MomentSequence& m, double s2);

/// Multiplicative free convolution with the Marchenko-Pastur law mu_c:
/// scale moments by c, run cumulant->moment, divide by c.
MomentSequence mult_mp_convolve(const MomentSequence& m, double c);

/// Multiplicative free deconvolution with mu_c; requires m_1 != 0.
MomentSequence mult_mp_deconvolve(const MomentSequence& m, double c);

/// Moments of fraction*mu + (1-fraction)*delta_0; fraction in (0, 1].
MomentSequence scale_and_pad(const MomentSequence& m, double fraction);

/// Inverse of scale_and_pad.
MomentSequence unpad_zero_atom(const MomentSequence& m, double fraction);

/// Advisory positive-definiteness check: true when the Hankel matrices of
/// (1, m_1, ...) and (m_1, m_2, ...) are PSD within tolerance, i.e. the
/// sequence is consistent with some nonnegative measure on [0, inf).
/// Deconvolution outputs may legitimately fail this; callers decide.
bool hankel_psd_advisory(const MomentSequence& m, double tol = 1e-9);

}  // namespace freedec
