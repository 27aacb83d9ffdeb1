#include "qcflow/quasipolar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "qcflow/error.hpp"

namespace qcflow {

namespace {

constexpr double kMinRadius = 1e-6;
constexpr double kMaxRadius = 1e6;

void require_positive_baseline(const FieldDescriptor& field) {
    if (!(field(1.0).real() > 0.0))
        throw QcError(ErrorCode::NotNormalizable, field.label() + " has re f(1) <= 0; quasipolar angle undefined");
}

/// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

QuasipolarPoint theta(const FieldDescriptor& field, ComplexPoint z, double tolerance) {
    const double rho = std::abs(z);
    if (rho < kMinRadius) throw QcError(ErrorCode::OriginTooClose, "|z| < 1e-6 has no usable quasipolar angle");
    require_positive_baseline(field);
    const RadiusHit hit = trace_to_radius(field, z, std::arg(z), 1.0, tolerance);
    return {rho, hit.angle};
}

ComplexPoint phi_map(const FieldDescriptor& field, ComplexPoint z, double tolerance) {
    const QuasipolarPoint q = theta(field, z, tolerance);
    return std::polar(q.rho, q.theta);
}

ComplexPoint psi_map(const FieldDescriptor& field, const QuasipolarPoint& q, double tolerance) {
    if (q.rho < kMinRadius) throw QcError(ErrorCode::OriginTooClose, "rho below 1e-6");
    if (!(q.rho <= kMaxRadius) || !std::isfinite(q.theta))
        throw QcError(ErrorCode::InvalidArgument, "quasipolar point out of range");
    require_positive_baseline(field);
    return trace_to_radius(field, unit_phasor(q.theta), q.theta, q.rho, tolerance).point;
}

BilipschitzReport bilipschitz_sample(const FieldDescriptor& field, const AnnulusWindow& window, std::size_t n_pairs,
                                     std::uint64_t seed, double tolerance) {
    if (n_pairs == 0) throw QcError(ErrorCode::InvalidArgument, "n_pairs must be at least 1");
    std::mt19937_64 rng(seed);
    auto draw = [&] {
        const double r2 = window.r * window.r, R2 = window.R * window.R;
        const double rad = std::sqrt(r2 + unit_draw(rng) * (R2 - r2));
        return std::polar(rad, 2.0 * kPi * unit_draw(rng));
    };
    BilipschitzReport rep;
    rep.min_ratio = std::numeric_limits<double>::infinity();
    while (rep.pairs < n_pairs) {
        const ComplexPoint z1 = draw(), z2 = draw();
        if (z1 == z2) continue;
        const double ratio = std::abs(phi_map(field, z1, tolerance) - phi_map(field, z2, tolerance)) / std::abs(z1 - z2);
        rep.min_ratio = std::min(rep.min_ratio, ratio);
        rep.max_ratio = std::max(rep.max_ratio, ratio);
        ++rep.pairs;
    }
    return rep;
}

double polar_rhs(const FieldDescriptor& field, double rho, double phi) {
    const ComplexPoint w = std::conj(unit_phasor(phi)) * field(std::polar(rho, phi));
    if (w.real() == 0.0 || std::abs(w.real()) < 1e-15 * std::abs(w))
        throw QcError(ErrorCode::ZeroRadialComponent, "radial component of f vanishes", rho, ComplexPoint(phi, 0.0));
    return w.imag() / (rho * w.real());
}

PolarCurve integrate_polar(const FieldDescriptor& field, double theta0, std::pair<double, double> rho_span,
                           double tolerance, std::span<const double> output_radii) {
    const double lo = std::min(rho_span.first, rho_span.second);
    const double hi = std::max(rho_span.first, rho_span.second);
    if (lo < kMinRadius) throw QcError(ErrorCode::OriginTooClose, "rho span reaches below 1e-6");
    if (!(hi <= kMaxRadius) || !(hi > lo)) throw QcError(ErrorCode::InvalidArgument, "rho span out of range");
    if (!(tolerance > 0.0)) throw QcError(ErrorCode::InvalidArgument, "tolerance must be positive");

    auto rhs = [&field](double rho, double phi) { return polar_rhs(field, rho, phi); };
    auto never = [](double, double, double) -> std::optional<std::string> { return std::nullopt; };
    auto no_event = [](double) { return 1.0; };

    std::vector<double> radii(output_radii.begin(), output_radii.end());
    std::sort(radii.begin(), radii.end());
    for (double r : radii)
        if (r < lo || r > hi) throw QcError(ErrorCode::InvalidArgument, "output radius outside the rho span");

    // Both legs start at rho = 1 where phi = theta0.
    auto leg = [&](double end, std::vector<double> outs) {
        ode::StepControl ctl;
        ctl.atol = tolerance;
        ctl.rtol = tolerance;
        ctl.max_step = 0.1 * std::abs(end - 1.0);
        const auto dp = ode::make_dopri<double>(rhs, ctl);
        return dp.run(theta0, 1.0, end, outs, never, no_event).samples;
    };

    const bool dense = !radii.empty();
    std::vector<double> below, above;
    for (double r : radii) (r < 1.0 ? below : above).push_back(r);
    std::reverse(below.begin(), below.end());

    std::vector<std::pair<double, double>> pts;
    if (lo < 1.0 && (!dense || !below.empty()))
        for (const auto& s : leg(lo, below)) pts.emplace_back(s.t, s.x);
    if (hi > 1.0 && (!dense || !above.empty()))
        for (const auto& s : leg(hi, above)) pts.emplace_back(s.t, s.x);
    if (dense && std::binary_search(radii.begin(), radii.end(), 1.0)) pts.emplace_back(1.0, theta0);
    // Without requested radii the span may not contain 1; keep only what lies inside it.
    if (!dense) std::erase_if(pts, [&](const auto& p) { return p.first < lo || p.first > hi; });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first == b.first; }),
              pts.end());

    PolarCurve curve;
    for (const auto& [r, p] : pts) {
        curve.rho.push_back(r);
        curve.phi.push_back(p);
    }
    return curve;
}

ComplexPoint grad_theta(const FieldDescriptor& field, ComplexPoint z, double step, double tolerance) {
    if (z == 0.0) throw QcError(ErrorCode::OriginTooClose, "gradient of theta undefined at the origin");
    if (!(step > 0.0)) throw QcError(ErrorCode::InvalidArgument, "step must be positive");
    const ComplexPoint I(0.0, 1.0);
    const double xp = theta(field, z + step, tolerance).theta;
    double vals[4] = {xp, theta(field, z - step, tolerance).theta, theta(field, z + I * step, tolerance).theta,
                      theta(field, z - I * step, tolerance).theta};
    // Put every stencil value on the branch of the first one.
    for (double& v : vals) v = xp + wrap_angle(v - xp);
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
            if (std::abs(vals[a] - vals[b]) > kPi / 2)
                throw QcError(ErrorCode::BranchAmbiguity, "theta stencil spans more than pi/2; reduce the step");
    return {(vals[0] - vals[1]) / (2.0 * step), (vals[2] - vals[3]) / (2.0 * step)};
}

FactorSample integrating_factor(const FieldDescriptor& field, ComplexPoint z, double step, double tolerance) {
    FactorSample s;
    s.at = z;
    s.grad_theta = grad_theta(field, z, step, tolerance);
    const double g = std::abs(s.grad_theta);
    if (g < 1e-12) throw QcError(ErrorCode::ZeroGradient, "|grad theta| below 1e-12");
    const ComplexPoint f = field(z);
    s.lambda_factor = std::abs(f) / g;
    const ComplexPoint v = ComplexPoint(0.0, 1.0) * f;
    s.orthogonality_residual = std::abs(std::arg(v * std::conj(s.grad_theta)));
    return s;
}

Trajectory orthogonal_trajectory(const FieldDescriptor& field, ComplexPoint w0, std::pair<double, double> t_span,
                                 const SolverOptions& options) {
    if (w0 == 0.0) throw QcError(ErrorCode::InvalidArgument, "orthogonal trajectory needs w0 != 0");
    return detail::run_flow(field, true, w0, t_span, options);
}

CurvatureReport curvature_check(const Trajectory& orth_traj, double slack) {
    const auto& s = orth_traj.samples;
    if (s.size() < 2) throw QcError(ErrorCode::InvalidArgument, "trajectory needs >= 2 samples");
    CurvatureReport rep;
    rep.min_arg_slope = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (std::abs(s[j].dx) < 1e-12)
            throw QcError(ErrorCode::ZeroVelocity, "velocity vanishes along the trajectory", s[j].t, s[j].x);
        if (j == 0) {
            rep.arg_velocity.push_back(std::arg(s[j].dx));
        } else {
            rep.arg_velocity.push_back(rep.arg_velocity.back() + std::arg(s[j].dx / s[j - 1].dx));
            const double dt = s[j].t - s[j - 1].t;
            const double slope = (rep.arg_velocity[j] - rep.arg_velocity[j - 1]) / dt;
            rep.min_arg_slope = std::min(rep.min_arg_slope, slope);
            rep.curvature.push_back(slope / (0.5 * (std::abs(s[j].dx) + std::abs(s[j - 1].dx))));
        }
    }
    rep.pass = rep.min_arg_slope >= -slack;
    return rep;
}

std::vector<QuasipolarGridRow> quasipolar_grid(const FieldDescriptor& field, const AnnulusWindow& window,
                                               std::size_t n, double tolerance) {
    if (n == 0) throw QcError(ErrorCode::InvalidArgument, "grid size must be positive");
    if (window.r < kMinRadius) throw QcError(ErrorCode::OriginTooClose, "grid reaches below radius 1e-6");
    if (window.R > kMaxRadius) throw QcError(ErrorCode::InvalidArgument, "grid reaches beyond radius 1e6");
    std::vector<QuasipolarGridRow> rows;
    rows.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double rad = n == 1 ? 0.5 * (window.r + window.R)
                                  : window.r + (window.R - window.r) * static_cast<double>(i) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            const double ang = 2.0 * kPi * (static_cast<double>(j) + 0.5) / static_cast<double>(n);
            QuasipolarGridRow row;
            row.z = std::polar(rad, ang);
            const QuasipolarPoint q = theta(field, row.z, tolerance);
            row.rho = q.rho;
            row.theta = q.theta;
            row.lambda_factor = integrating_factor(field, row.z, 1e-5, tolerance).lambda_factor;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace qcflow
