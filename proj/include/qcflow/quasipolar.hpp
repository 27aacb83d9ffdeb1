#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qcflow/flow.hpp"

namespace qcflow {

/// Polar distance and quasipolar angle: z lies on the trajectory through e^{i theta}.
struct QuasipolarPoint {
    double rho = 1.0;
    double theta = 0.0;
};

/// Quasipolar coordinates of z. The angle is the argument of the unit-circle hit
/// point, unwrapped continuously along the trajectory starting from arg z.
/// Throws OriginTooClose for |z| < 1e-6 and NoConvergence if the circle is not reached.
QuasipolarPoint theta(const FieldDescriptor& field, ComplexPoint z, double tolerance = 1e-10);

/// Rectifying map: Phi(z) = |z| e^{i theta(z)}. Fixes the unit circle, preserves |z|.
ComplexPoint phi_map(const FieldDescriptor& field, ComplexPoint z, double tolerance = 1e-10);

/// Inverse of Phi: the point at distance rho on the trajectory through e^{i theta}.
ComplexPoint psi_map(const FieldDescriptor& field, const QuasipolarPoint& q, double tolerance = 1e-10);

struct BilipschitzReport {
    double min_ratio = 0.0;
    double max_ratio = 0.0;
    std::size_t pairs = 0;
};

/// Extreme ratios |Phi(z1) - Phi(z2)| / |z1 - z2| over seeded random pairs in the window.
BilipschitzReport bilipschitz_sample(const FieldDescriptor& field, const AnnulusWindow& window, std::size_t n_pairs,
                                     std::uint64_t seed, double tolerance = 1e-10);

/// Right-hand side of the angle equation d phi / d rho = Im(e^{-i phi} f) / (rho Re(e^{-i phi} f)),
/// f evaluated at rho e^{i phi}. Throws ZeroRadialComponent when the denominator vanishes.
double polar_rhs(const FieldDescriptor& field, double rho, double phi);

struct PolarCurve {
    std::vector<double> rho;
    std::vector<double> phi;
};

/// Solves the angle equation with phi(1) = theta0 over rho_span (which may straddle 1).
/// When `output_radii` is given, samples are taken exactly there; otherwise at every step.
PolarCurve integrate_polar(const FieldDescriptor& field, double theta0, std::pair<double, double> rho_span,
                           double tolerance = 1e-10, std::span<const double> output_radii = {});

/// Gradient of the quasipolar angle by central differences of theta with branch unwrapping.
/// Throws BranchAmbiguity if stencil values differ by more than pi/2.
ComplexPoint grad_theta(const FieldDescriptor& field, ComplexPoint z, double step = 1e-5, double tolerance = 1e-12);

struct FactorSample {
    ComplexPoint at;
    double lambda_factor = 0.0;
    ComplexPoint grad_theta;
    /// Angle in [0, pi] between i f(z) and grad theta.
    double orthogonality_residual = 0.0;
};

/// Integrating factor lambda = |f| / |grad theta| of the factorization i f = lambda grad theta.
FactorSample integrating_factor(const FieldDescriptor& field, ComplexPoint z, double step = 1e-5,
                                double tolerance = 1e-12);

/// Integrates the orthogonal system w' = i f(w).
Trajectory orthogonal_trajectory(const FieldDescriptor& field, ComplexPoint w0, std::pair<double, double> t_span,
                                 const SolverOptions& options = {});

struct CurvatureReport {
    double min_arg_slope = 0.0;
    /// Unwrapped arg w'(t_j) at every sample.
    std::vector<double> arg_velocity;
    /// (d/dt arg w') / |w'| at each interval midpoint.
    std::vector<double> curvature;
    bool pass = false;
};

/// Checks t -> arg w'(t) is nondecreasing along an orthogonal trajectory (slack 1e-8).
CurvatureReport curvature_check(const Trajectory& orth_traj, double slack = 1e-8);

struct QuasipolarGridRow {
    ComplexPoint z;
    double rho = 0.0;
    double theta = 0.0;
    double lambda_factor = 0.0;
};

/// n x n polar grid over the window: n radii and n angles offset half a cell from the real axis.
std::vector<QuasipolarGridRow> quasipolar_grid(const FieldDescriptor& field, const AnnulusWindow& window,
                                               std::size_t n, double tolerance = 1e-10);

}  // namespace qcflow
