#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "qcflow/flow.hpp"
#include "qcflow/moduli.hpp"

namespace qcflow {

/// Dense polyline samples of a C^1 arc, optionally with a strictly increasing parameter.
struct SampledArc {
    std::vector<ComplexPoint> points;
    std::optional<std::vector<double>> arclength_params;

    /// Attaches cumulative polyline length as the parameter.
    static SampledArc with_arclength(std::vector<ComplexPoint> points);
    static SampledArc from_trajectory(const Trajectory& traj, bool with_arclength = false);

    /// Throws InvalidArgument on repeated consecutive points or a non-increasing parameter.
    void validate() const;
};

struct VariationEstimate {
    double p = 1.0;
    double value = 0.0;
    /// Breakpoints 0 = i_0 < ... < i_m = N-1; piece j covers samples i_{j-1}..i_j.
    std::vector<std::size_t> optimal_partition;
};

/// Largest pairwise distance among the points.
double diameter(std::span<const ComplexPoint> pts);

/// (sum over pieces of diam^p)^{1/p} for the given breakpoints, summed from the last piece backwards.
double partition_value(std::span<const ComplexPoint> images, std::span<const std::size_t> breakpoints, double p);

/// p-variation of already mapped samples. p = 1 sums consecutive distances; p > 1 is the exact
/// optimum over all partitions of the index set, found by dynamic programming.
VariationEstimate p_variation_of(std::span<const ComplexPoint> images, double p);

/// p-variation of the field along the arc (images y_j = f(x_j)). Throws TooFewSamples below 2 samples.
VariationEstimate p_variation(const FieldDescriptor& field, const SampledArc& arc, double p);

struct QuadraticBoundReport {
    double variation2 = 0.0;
    double diam_image = 0.0;
    double ratio = 0.0;
    /// Same ratio on every other sample, and its relative change against `ratio`.
    double coarse_ratio = 0.0;
    double refinement_change = 0.0;
};

/// Ratio of quadratic variation to image diameter for an arc inside the window.
QuadraticBoundReport quadratic_bound_report(const FieldDescriptor& field, const SampledArc& arc,
                                            const AnnulusWindow& window);

/// Lambda(tau): largest unit-tangent difference over sample pairs at most tau apart in arclength.
/// Throws MissingParametrization when the arc has no arclength parameters.
double c1_modulus(const SampledArc& arc, double tau);

/// A curve known as a function of time on [t_min, t_max].
struct TimeCurve {
    std::function<ComplexPoint(double)> position;
    /// May be empty; required by partition_comparison_bound.
    std::function<ComplexPoint(double)> velocity;
    double t_min = 0.0;
    double t_max = 0.0;

    /// Exact-to-tolerance evaluation: one Runge-Kutta step from the nearest earlier sample.
    static TimeCurve from_trajectory(const Trajectory& traj);
};

enum class PartitionTerminal { converged_to_meet, budget_exhausted, domain_exhausted };

std::string_view to_string(PartitionTerminal t);

struct PartitionSequence {
    /// t_0 > t_1 > ... > t_N.
    std::vector<double> times;
    /// gaps[k] is the realized inter-curve distance over [t_{k+1}, t_k].
    std::vector<double> gaps;
    PartitionTerminal terminal = PartitionTerminal::budget_exhausted;
};

struct PartitionOptions {
    /// Bisection stops once the bracket is below this width.
    double root_tol = 1e-13;
    double meet_tol = 1e-9;
    /// Initial polyline segments per curve inside each search window; refined up to
    /// max_resolution until the chord sag of both curves is below sag_tol.
    std::size_t resolution = 24;
    std::size_t max_resolution = 4096;
    double sag_tol = 1e-10;
};

/// Builds t_0 > t_1 > ... with inf{|x(t) - y(s)| : t_{k+1} <= t, s <= t_k} = t_k - t_{k+1}, starting
/// from t_0 = end of the shared domain. Throws CurvesCoincideAtEnd when x(t_0) = y(t_0).
PartitionSequence partition_sequence(const TimeCurve& x, const TimeCurve& y, std::size_t budget,
                                     const PartitionOptions& opts = {});

/// Brute-force inf{|x(t) - y(s)| : a <= t, s <= b}: point-to-polyline distances both ways at `res` segments.
double inter_curve_distance(const TimeCurve& x, const TimeCurve& y, double a, double b, std::size_t res = 256);

struct ComparisonBound {
    std::size_t k = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double C = 0.0;
    bool holds = false;
};

/// |x(t_k) - y(t_k)| <= (1 + sup_{[tau, t_k]}(|x'| + |y'|)) |x(tau) - y(tau)| for the k with
/// t_{k+1} <= tau <= t_k.
ComparisonBound partition_comparison_bound(const TimeCurve& x, const TimeCurve& y, const PartitionSequence& seq,
                                           double tau);

struct CertificateReport {
    PartitionSequence partition;
    std::vector<double> log_ratios;
    std::vector<double> bound_terms;
    double total_lhs = 0.0;
    double total_rhs_shape = 0.0;
    double implied_constant = 0.0;
};

/// Telescoping uniqueness certificate for two trajectories that end (at their common last time)
/// at distinct points. Requires re f(1) > 0 and both trajectories inside the window.
CertificateReport uniqueness_certificate(const FieldDescriptor& field, const Trajectory& x_traj,
                                         const Trajectory& y_traj, const AnnulusWindow& window,
                                         std::size_t budget = 200, const PartitionOptions& opts = {});

struct CertificateStability {
    std::vector<double> separations;
    std::vector<double> implied_constants;
    /// max_i |c_i - c_0| / |c_0|.
    double drift = 0.0;
};

/// Runs the certificate for end points x_end and x_end + sep * direction over each separation,
/// with trajectories integrated backward from time 0 for at most `span` (less if they leave the window).
CertificateStability certificate_stability(const FieldDescriptor& field, ComplexPoint x_end, ComplexPoint direction,
                                           const AnnulusWindow& window, std::span<const double> separations,
                                           double span = 1.0, double tolerance = 1e-12, std::size_t budget = 200);

struct InnerProductBound {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = false;
};

/// <A - B, Z> <= |A| - |B| + |B - lam Z|^2 / (2 lam). Throws NonUnitZ unless |Z| = 1 (+-1e-12).
InnerProductBound inner_product_bound(ComplexPoint A, ComplexPoint B, ComplexPoint Z, double lam);

struct ArcPairReport {
    double realized_distance = 0.0;
    /// max over sampled (x, y) of Delta_f(x, y) / Delta_f(x_beta, x_alpha).
    double delta_ratio_max = 0.0;
    /// Delta_f(x_beta, x_alpha) and the two upper bounds for it.
    double delta_end = 0.0;
    double chord_bound = 0.0;
    double diameter_bound = 0.0;
    double slack = 0.0;
    bool diameter_bound_holds = false;
    /// log(|x_beta - y_beta| / |x_alpha - y_alpha|) and its ratio to delta_end.
    double log_ratio = 0.0;
    double log_ratio_over_delta = 0.0;
};

/// Estimates on two integral arcs x[alpha, beta], y[alpha, beta] whose distance equals beta - alpha.
/// m_K is taken with the given params. Throws DistanceMismatch if the distance is off by more than 1e-6.
ArcPairReport arc_pair_estimates(const FieldDescriptor& field, const TimeCurve& x, const TimeCurve& y, double alpha,
                                 double beta, const AnnulusWindow& window, const QCParams& params = {},
                                 std::size_t samples = 17);

/// Smallest delta_f over all sample pairs of the arc with distinct images.
double sampled_delta(const FieldDescriptor& field, const SampledArc& arc);

struct RectificationReport {
    std::vector<double> params_s;
    double lipschitz_ratio = 0.0;
    double bound = 0.0;
    double direction_spread = 0.0;
    bool pass = false;
};

/// Reparametrizes f(arc) by s = <f(x) - f(x_0), u>, u the initial unit tangent, and measures the
/// Lipschitz ratio of s -> f(x). Throws ArcTooLong if a chord direction leaves the delta/2 ball
/// around u, NotDeltaMonotoneOnArc if delta_est <= 0 or s is not strictly increasing.
RectificationReport rectify_image(const FieldDescriptor& field, const SampledArc& arc, double delta_est);

}  // namespace qcflow
