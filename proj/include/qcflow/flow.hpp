#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qcflow/dopri.hpp"
#include "qcflow/field.hpp"
#include "qcflow/moduli.hpp"

namespace qcflow {

using TrajectorySample = ode::Sample<ComplexPoint>;

struct SolverEvent {
    std::string name;
    double t = 0.0;
};

struct SolverMeta {
    double tolerance = 1e-10;
    double max_step = 0.0;
    std::vector<SolverEvent> events;
};

/// Time-stamped solution of x' = f(x) (or of w' = i f(w) when `orthogonal`).
/// Samples are ordered by increasing time and carry the velocity used for
/// cubic Hermite dense output.
struct Trajectory {
    std::vector<TrajectorySample> samples;
    FieldDescriptor field;
    SolverMeta solver_meta;
    bool orthogonal = false;

    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }
    std::size_t size() const { return samples.size(); }

    /// Dense output by cubic Hermite interpolation; clamps outside the sampled span.
    ComplexPoint at(double t) const;
    ComplexPoint velocity_at(double t) const;

    std::vector<double> times() const;
    std::vector<ComplexPoint> points() const;
    std::optional<double> event_time(std::string_view name) const;
};

struct SolverOptions {
    double tolerance = 1e-10;
    /// 0 means 0.1 * |time span|.
    double max_step = 0.0;
    double fixed_step = 0.0;
    /// Backward runs stop with "origin_limit" once |x| < r_min.
    double r_min = 1e-6;
    double escape_radius = 1e9;
    double critical_speed = 1e-12;
    std::size_t max_steps = 5'000'000;
    /// If non-empty, samples are taken exactly at these (sorted) times.
    std::vector<double> output_times;
};

/// Default tolerance, honouring the QCFLOW_TOL environment variable.
double default_tolerance();

/// Adaptive integration of x' = f(x) over t_span (backward when t_span.second < t_span.first).
/// Early stops are recorded as events "critical_point", "escape" or "origin_limit".
/// Throws StepUnderflow (carrying the last state) if the controller collapses.
Trajectory integrate(const FieldDescriptor& field, ComplexPoint x0, std::pair<double, double> t_span,
                     const SolverOptions& options = {});

/// Samples the solution through x0 (at time 0) exactly at the given sorted times,
/// which may lie on both sides of 0.
Trajectory integrate_on_grid(const FieldDescriptor& field, ComplexPoint x0, std::span<const double> times,
                             double tolerance, bool orthogonal = false);

struct AnnulusWindow {
    double r = 0.5;
    double R = 2.0;

    AnnulusWindow() = default;
    AnnulusWindow(double r_, double R_);
    bool contains(ComplexPoint z, double slack = 0.0) const;
};

struct RadiusHit {
    ComplexPoint point;
    /// Continuous argument of `point`, unwrapped along the trajectory from the seed angle.
    double angle = 0.0;
    /// Signed flow time from the start to the hit.
    double time = 0.0;
};

/// Follows the trajectory through `start` (forward if the target radius is larger,
/// backward otherwise) until |x| = radius. Throws NoConvergence if the circle is never reached.
RadiusHit trace_to_radius(const FieldDescriptor& field, ComplexPoint start, double seed_angle, double radius,
                          double tolerance, double max_step = 0.05);

struct AnnulusTransit {
    Trajectory trajectory;
    double t_inner = 0.0;
    double t_outer = 0.0;
    /// (t_outer - t_inner) * m_K(r) / (R - r); at most 1 when the moduli are exact.
    double time_bound_ratio = 0.0;
};

/// Extends the solution through x0 (time 0) backward to |x| = r and forward to |x| = R.
AnnulusTransit extend_to_annulus(const FieldDescriptor& field, ComplexPoint x0, const AnnulusWindow& window,
                                 double tolerance, const QCParams& params = {});

struct RadialIdentityReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t checked = 0;
};

/// Compares centered differences of |x(t)| with Delta_f(x(t), 0) at interior samples.
RadialIdentityReport radial_identity_check(const FieldDescriptor& field, const Trajectory& traj);

struct LipschitzReport {
    double A_est = 0.0;
    double B_est = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
};

/// Empirical constants of |x(t) - y(s)| <= A |t - s| + B |x0 - y0| over the span where both
/// solutions stay inside the window (capped at +-t_cap when they never leave).
LipschitzReport lipschitz_dependence(const FieldDescriptor& field, ComplexPoint x0, ComplexPoint y0,
                                     const AnnulusWindow& window, double tolerance, std::size_t n_grid = 201,
                                     double t_cap = 2.0 * kPi);

struct SlopeReport {
    double min_slope = 0.0;
    bool pass = false;
};

/// Minimum finite-difference slope of t -> |x(t) - y(t)| over a shared time grid.
SlopeReport backward_distance_check(const FieldDescriptor& field, const Trajectory& x_traj,
                                    const Trajectory& y_traj, double slack = 1e-9);

/// Checks t -> |f(x(t))| is nondecreasing; min_slope is the smallest increment.
SlopeReport speed_monotone_check(const FieldDescriptor& field, const Trajectory& traj, double slack = 1e-9);

/// max |x_i - x_j| / ||x_i| - |x_j|| over sample pairs of one trajectory.
double reverse_triangle_ratio(const Trajectory& traj);

namespace detail {
/// Shared driver for x' = f(x) and, with `orthogonal`, w' = i f(w).
Trajectory run_flow(const FieldDescriptor& field, bool orthogonal, ComplexPoint x0, std::pair<double, double> t_span,
                    const SolverOptions& opts);
}  // namespace detail

}  // namespace qcflow
