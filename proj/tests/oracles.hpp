#pragma once

// Closed-form reference values used by the tests. Nothing here calls the library's
// solvers; each function is an independent derivation for one specific field.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using C = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

/// Example 1 branches z(t) = (24 +- 7i) t^2 and their time derivatives.
inline C branch(double t, int sign) { return C(24.0, 7.0 * sign) * t * t; }
inline C branch_velocity(double t, int sign) { return C(24.0, 7.0 * sign) * 2.0 * t; }

/// Wirtinger derivatives of 10 z |z|^{-1/2}.
inline C example1_fz(C z) { return C(7.5 * std::pow(std::abs(z), -0.5), 0.0); }
inline C example1_fzbar(C z) { return -2.5 * z * z * std::pow(std::abs(z), -2.5); }
inline C example1_mu(C z) { return -(1.0 / 3.0) * z / std::conj(z); }

/// Example 2 below the axis, expanded: 3z - conj z = 2x + 4iy.
inline C example2_lower(C z) { return C(2.0 * z.real(), 4.0 * z.imag()); }

/// Flow of (lambda + i omega) z.
inline C linear_flow(C z0, double lambda, double omega, double t) {
    return z0 * std::exp(C(lambda, omega) * t);
}

/// Quasipolar angle for (1 + 2i) z: the unit-circle hit is at t = -ln rho.
inline double spiral_theta(C z) { return std::arg(z) - 2.0 * std::log(std::abs(z)); }

/// Gradient of arg z - 2 ln|z|.
inline C spiral_grad(C z) {
    const double x = z.real(), y = z.imag(), r2 = std::norm(z);
    return C((-y - 2.0 * x) / r2, (x - 2.0 * y) / r2);
}

/// Point at radius rho on the parabola y = c x^2 (x > 0), the lower-half trajectory of
/// the rescaled Example 2 field: solve x^2 + c^2 x^4 = rho^2 for x^2.
inline C parabola_at_radius(double c, double rho) {
    const double u = c == 0.0 ? rho * rho : (-1.0 + std::sqrt(1.0 + 4.0 * c * c * rho * rho)) / (2.0 * c * c);
    const double x = std::sqrt(u);
    return C(x, c * x * x);
}

/// Lower-half flow of the rescaled Example 2 field: x' = x, y' = 2y.
inline C example2_lower_flow(C z0, double t) {
    return C(z0.real() * std::exp(t), z0.imag() * std::exp(2.0 * t));
}

/// Seeded uniform draws shared by tests (53-bit mantissa mapping, platform independent).
class Draw {
public:
    explicit Draw(std::uint64_t seed) : rng_(seed) {}
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * unit(); }
    /// Uniform by area in the annulus r <= |z| <= R.
    C annulus(double r, double R) {
        const double rad = std::sqrt(r * r + unit() * (R * R - r * r));
        return std::polar(rad, 2.0 * pi * unit());
    }

private:
    std::mt19937_64 rng_;
};

/// Every partition of indices 0..n-1 (shared end points) by brute force over interior cut sets.
inline double exhaustive_p_variation(const std::vector<C>& y, double p) {
    const std::size_t n = y.size();
    auto diam = [&](std::size_t a, std::size_t b) {
        double d = 0.0;
        for (std::size_t i = a; i <= b; ++i)
            for (std::size_t j = i + 1; j <= b; ++j) d = std::max(d, std::abs(y[i] - y[j]));
        return d;
    };
    double best = 0.0;
    const std::size_t interior = n - 2;
    std::vector<std::size_t> cuts;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << interior); ++mask) {
        cuts.assign(1, 0);
        for (std::size_t i = 1; i < n; ++i)
            if (i == n - 1 || ((mask >> (i - 1)) & 1u)) cuts.push_back(i);
        // Sum from the last piece so ties with the library are bit-exact.
        double sum = 0.0;
        for (std::size_t j = cuts.size() - 1; j > 0; --j) sum = std::pow(diam(cuts[j - 1], cuts[j]), p) + sum;
        best = std::max(best, sum);
    }
    return std::pow(best, 1.0 / p);
}

/// Forward O(n^3) dynamic program over prefixes, for inputs too long to enumerate.
inline double forward_dp_p_variation(const std::vector<C>& y, double p) {
    const std::size_t n = y.size();
    std::vector<double> best(n, 0.0);
    for (std::size_t b = 1; b < n; ++b) {
        double d = 0.0, top = 0.0;
        for (std::size_t a = b; a-- > 0;) {
            for (std::size_t j = a + 1; j <= b; ++j) d = std::max(d, std::abs(y[a] - y[j]));
            top = std::max(top, best[a] + std::pow(d, p));
        }
        best[b] = top;
    }
    return std::pow(best[n - 1], 1.0 / p);
}

}  // namespace oracle
