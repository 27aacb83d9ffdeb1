#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace qcflow {

/// A point (or vector) of the plane with complex arithmetic.
using ComplexPoint = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Euclidean inner product of two plane vectors, Re(a * conj(b)).
inline double inner(ComplexPoint a, ComplexPoint b) {
    return a.real() * b.real() + a.imag() * b.imag();
}

inline ComplexPoint unit_phasor(double angle) { return std::polar(1.0, angle); }

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double a) {
    double w = std::remainder(a, 2.0 * kPi);
    if (w <= -kPi) w += 2.0 * kPi;
    return w;
}

inline bool is_finite(ComplexPoint z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace qcflow
