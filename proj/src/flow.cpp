#include "qcflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "qcflow/error.hpp"

namespace qcflow {

namespace {

using Guard = std::optional<std::string>;

struct FlowRhs {
    const FieldDescriptor* field;
    bool orthogonal;
    ComplexPoint operator()(double, ComplexPoint x) const {
        const ComplexPoint f = (*field)(x);
        return orthogonal ? ComplexPoint(-f.imag(), f.real()) : f;
    }
};

ode::StepControl control_for(double tolerance, double max_step, double fixed_step, std::size_t max_steps) {
    if (!(tolerance > 0.0)) throw QcError(ErrorCode::InvalidArgument, "tolerance must be positive");
    ode::StepControl ctl;
    ctl.atol = tolerance;
    ctl.rtol = tolerance;
    ctl.max_step = max_step;
    ctl.fixed_step = fixed_step;
    ctl.max_steps = max_steps;
    return ctl;
}

auto no_event = [](const ComplexPoint&) { return 1.0; };

struct FlowGuard {
    const SolverOptions* opts;
    bool backward;
    Guard operator()(double, ComplexPoint x, ComplexPoint dx) const {
        if (std::abs(dx) < opts->critical_speed) return "critical_point";
        if (std::abs(x) > opts->escape_radius) return "escape";
        if (backward && std::abs(x) < opts->r_min) return "origin_limit";
        return std::nullopt;
    }
};

}  // namespace

Trajectory detail::run_flow(const FieldDescriptor& field, bool orthogonal, ComplexPoint x0,
                            std::pair<double, double> t_span, const SolverOptions& opts) {
    const double span = std::abs(t_span.second - t_span.first);
    if (!(span > 0.0)) throw QcError(ErrorCode::InvalidArgument, "time span must be nondegenerate");
    if (!is_finite(x0)) throw QcError(ErrorCode::InvalidArgument, "initial point must be finite");
    const double max_step = opts.max_step > 0.0 ? opts.max_step : 0.1 * span;
    const auto ctl = control_for(opts.tolerance, max_step, opts.fixed_step, opts.max_steps);
    const bool backward = t_span.second < t_span.first;

    std::vector<double> outputs = opts.output_times;
    std::sort(outputs.begin(), outputs.end());
    if (backward) std::reverse(outputs.begin(), outputs.end());

    const auto dp = ode::make_dopri<ComplexPoint>(FlowRhs{&field, orthogonal}, ctl);
    auto res = dp.run(x0, t_span.first, t_span.second, outputs, FlowGuard{&opts, backward}, no_event);

    Trajectory traj;
    traj.field = field;
    traj.orthogonal = orthogonal;
    traj.solver_meta.tolerance = opts.tolerance;
    traj.solver_meta.max_step = max_step;
    traj.samples = std::move(res.samples);
    if (res.stop == ode::Stop::guard) traj.solver_meta.events.push_back({res.guard_name, traj.samples.back().t});
    if (backward) std::reverse(traj.samples.begin(), traj.samples.end());
    return traj;
}

namespace {

struct RadiusRun {
    std::vector<TrajectorySample> samples;  ///< in integration order
    bool hit = false;
};

/// Runs from x0 towards the circle |x| = radius for at most |horizon| time units.
RadiusRun run_to_radius(const FieldDescriptor& field, ComplexPoint x0, double radius, double tolerance,
                        double max_step, double horizon) {
    RadiusRun out;
    const double r0 = std::abs(x0);
    if (r0 == radius) {
        out.samples.push_back({0.0, x0, field(x0)});
        out.hit = true;
        return out;
    }
    const double dir = radius > r0 ? 1.0 : -1.0;
    const auto ctl = control_for(tolerance, max_step, 0.0, 2'000'000);
    const auto dp = ode::make_dopri<ComplexPoint>(FlowRhs{&field, false}, ctl);
    auto guard = [](double, ComplexPoint, ComplexPoint dx) -> Guard {
        if (std::abs(dx) < 1e-12) return "critical_point";
        return std::nullopt;
    };
    auto event = [radius](const ComplexPoint& x) { return std::abs(x) - radius; };
    auto res = dp.run(x0, 0.0, dir * std::abs(horizon), {}, guard, event);
    out.samples = std::move(res.samples);
    out.hit = res.stop == ode::Stop::event;
    return out;
}

double unwrapped_angle(std::span<const TrajectorySample> samples, double seed) {
    double angle = seed;
    for (std::size_t j = 1; j < samples.size(); ++j) angle += std::arg(samples[j].x / samples[j - 1].x);
    return angle;
}

}  // namespace

// --- Trajectory --------------------------------------------------------------

ComplexPoint Trajectory::at(double t) const {
    if (samples.empty()) throw QcError(ErrorCode::InvalidArgument, "empty trajectory");
    if (t <= samples.front().t) return samples.front().x;
    if (t >= samples.back().t) return samples.back().x;
    const auto it = std::upper_bound(samples.begin(), samples.end(), t,
                                     [](double v, const TrajectorySample& s) { return v < s.t; });
    const auto& b = *it;
    const auto& a = *(it - 1);
    return ode::hermite(a, b, t);
}

ComplexPoint Trajectory::velocity_at(double t) const {
    const ComplexPoint f = field(at(t));
    return orthogonal ? ComplexPoint(-f.imag(), f.real()) : f;
}

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.t);
    return out;
}

std::vector<ComplexPoint> Trajectory::points() const {
    std::vector<ComplexPoint> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.x);
    return out;
}

std::optional<double> Trajectory::event_time(std::string_view name) const {
    for (const auto& e : solver_meta.events)
        if (e.name == name) return e.t;
    return std::nullopt;
}

// --- integration -------------------------------------------------------------

double default_tolerance() {
    if (const char* env = std::getenv("QCFLOW_TOL")) {
        char* end = nullptr;
        const double v = std::strtod(env, &end);
        if (end != env && *end == '\0' && v > 0.0) return v;
    }
    return 1e-10;
}

Trajectory integrate(const FieldDescriptor& field, ComplexPoint x0, std::pair<double, double> t_span,
                     const SolverOptions& options) {
    return detail::run_flow(field, false, x0, t_span, options);
}

Trajectory integrate_on_grid(const FieldDescriptor& field, ComplexPoint x0, std::span<const double> times,
                             double tolerance, bool orthogonal) {
    if (times.empty()) throw QcError(ErrorCode::InvalidArgument, "empty time grid");
    if (!std::is_sorted(times.begin(), times.end()))
        throw QcError(ErrorCode::InvalidArgument, "time grid must be sorted");
    SolverOptions opts;
    opts.tolerance = tolerance;
    Trajectory out;
    out.field = field;
    out.orthogonal = orthogonal;
    out.solver_meta.tolerance = tolerance;

    std::vector<double> back, fwd;
    for (double t : times) (t < 0.0 ? back : fwd).push_back(t);
    if (!back.empty()) {
        opts.output_times = back;
        Trajectory b = detail::run_flow(field, orthogonal, x0, {0.0, back.front()}, opts);
        out.samples = std::move(b.samples);
        out.solver_meta.events = std::move(b.solver_meta.events);
    }
    if (!fwd.empty() && fwd.back() > 0.0) {
        opts.output_times = fwd;
        Trajectory f = detail::run_flow(field, orthogonal, x0, {0.0, fwd.back()}, opts);
        out.samples.insert(out.samples.end(), f.samples.begin(), f.samples.end());
        for (auto& e : f.solver_meta.events) out.solver_meta.events.push_back(e);
    } else if (!fwd.empty()) {
        out.samples.push_back({0.0, x0, FlowRhs{&field, orthogonal}(0.0, x0)});
    }
    return out;
}

AnnulusWindow::AnnulusWindow(double r_, double R_) : r(r_), R(R_) {
    if (!(r > 0.0 && R > r && std::isfinite(R)))
        throw QcError(ErrorCode::InvalidArgument, "annulus window needs 0 < r < R < inf");
}

bool AnnulusWindow::contains(ComplexPoint z, double slack) const {
    const double a = std::abs(z);
    return a >= r - slack && a <= R + slack;
}

RadiusHit trace_to_radius(const FieldDescriptor& field, ComplexPoint start, double seed_angle, double radius,
                          double tolerance, double max_step) {
    if (!(radius > 0.0)) throw QcError(ErrorCode::InvalidArgument, "target radius must be positive");
    if (start == 0.0) throw QcError(ErrorCode::OriginTooClose, "trajectory through the critical point");
    const RadiusRun run = run_to_radius(field, start, radius, tolerance, max_step, 1e7);
    if (!run.hit) {
        throw QcError(ErrorCode::NoConvergence, "circle |x| = " + std::to_string(radius) + " not reached",
                      run.samples.back().t, run.samples.back().x);
    }
    RadiusHit hit;
    hit.point = run.samples.back().x;
    hit.time = run.samples.back().t;
    hit.angle = unwrapped_angle(run.samples, seed_angle);
    return hit;
}

AnnulusTransit extend_to_annulus(const FieldDescriptor& field, ComplexPoint x0, const AnnulusWindow& window,
                                 double tolerance, const QCParams& params) {
    if (!window.contains(x0)) throw QcError(ErrorCode::NotInAnnulus, "x0 lies outside the window");
    const double re_f1 = field(1.0).real();
    if (!(re_f1 > 0.0) || std::abs(re_f1 - 1.0) > 1e-9 || std::abs(field(0.0)) > 1e-12) {
        throw QcError(ErrorCode::NotNormalizable, field.label() + " is not normalized (f(0) = 0, re f(1) = 1)");
    }
    constexpr double horizon = 1e7;
    const RadiusRun back = run_to_radius(field, x0, window.r, tolerance, 0.05, horizon);
    const RadiusRun fwd = run_to_radius(field, x0, window.R, tolerance, 0.05, horizon);
    if (!back.hit || !fwd.hit) throw QcError(ErrorCode::NoConvergence, "annulus boundary not reached");

    AnnulusTransit out;
    Trajectory& traj = out.trajectory;
    traj.field = field;
    traj.solver_meta.tolerance = tolerance;
    traj.solver_meta.max_step = 0.05;
    traj.samples.assign(back.samples.rbegin(), back.samples.rend());
    traj.samples.insert(traj.samples.end(), fwd.samples.begin() + 1, fwd.samples.end());
    out.t_inner = back.samples.back().t;
    out.t_outer = fwd.samples.back().t;
    traj.solver_meta.events.push_back({"hit_inner", out.t_inner});
    traj.solver_meta.events.push_back({"hit_outer", out.t_outer});

    for (std::size_t j = 1; j < traj.samples.size(); ++j) {
        const double prev = std::abs(traj.samples[j - 1].x);
        if (std::abs(traj.samples[j].x) < prev - 10.0 * tolerance * std::max(1.0, prev)) {
            throw QcError(ErrorCode::MonotonicityViolation, "|x(t)| decreases along the trajectory",
                          traj.samples[j].t, traj.samples[j].x);
        }
    }
    out.time_bound_ratio = (out.t_outer - out.t_inner) * quasisymmetry_m(params, window.r) / (window.R - window.r);
    return out;
}

// --- runtime checks ----------------------------------------------------------

RadialIdentityReport radial_identity_check(const FieldDescriptor& field, const Trajectory& traj) {
    RadialIdentityReport rep;
    const auto& s = traj.samples;
    for (std::size_t j = 1; j + 1 < s.size(); ++j) {
        if (s[j].x == 0.0) continue;
        const double hm = s[j].t - s[j - 1].t;
        const double hp = s[j + 1].t - s[j].t;
        const double rm = std::abs(s[j - 1].x), r0 = std::abs(s[j].x), rp = std::abs(s[j + 1].x);
        // Second-order centered difference on a nonuniform grid.
        const double fd = (hm * hm * rp - hp * hp * rm + (hp * hp - hm * hm) * r0) / (hm * hp * (hm + hp));
        const ComplexPoint fx = field(s[j].x);
        const double delta = inner(fx, s[j].x / r0);
        const double err = std::abs(fd - delta);
        rep.max_abs_error = std::max(rep.max_abs_error, err);
        if (std::abs(delta) > 1e-12 * std::abs(fx)) rep.max_rel_error = std::max(rep.max_rel_error, err / std::abs(delta));
        ++rep.checked;
    }
    return rep;
}

LipschitzReport lipschitz_dependence(const FieldDescriptor& field, ComplexPoint x0, ComplexPoint y0,
                                     const AnnulusWindow& window, double tolerance, std::size_t n_grid,
                                     double t_cap) {
    if (x0 == y0) throw QcError(ErrorCode::CoincidentPoints, "lipschitz_dependence needs x0 != y0");
    if (!window.contains(x0) || !window.contains(y0))
        throw QcError(ErrorCode::WindowExit, "initial points must lie in the window");
    if (n_grid < 2) throw QcError(ErrorCode::InvalidArgument, "grid needs at least two points");

    auto exit_time = [&](ComplexPoint z, double radius, double sign) {
        const RadiusRun run = run_to_radius(field, z, radius, tolerance, 0.05, t_cap);
        const double t = run.samples.back().t;
        if (!run.hit) return sign * t_cap;
        return t;
    };
    LipschitzReport rep;
    rep.t_hi = std::min(exit_time(x0, window.R, 1.0), exit_time(y0, window.R, 1.0));
    rep.t_lo = std::max(exit_time(x0, window.r, -1.0), exit_time(y0, window.r, -1.0));
    if (!(rep.t_hi > rep.t_lo)) throw QcError(ErrorCode::WindowExit, "empty comparison span");

    std::vector<double> grid(n_grid);
    for (std::size_t i = 0; i < n_grid; ++i)
        grid[i] = rep.t_lo + (rep.t_hi - rep.t_lo) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    grid.push_back(0.0);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const Trajectory xt = integrate_on_grid(field, x0, grid, tolerance);
    const Trajectory yt = integrate_on_grid(field, y0, grid, tolerance);
    if (xt.size() != grid.size() || yt.size() != grid.size())
        throw QcError(ErrorCode::WindowExit, "a trajectory stopped before the comparison span ended");

    const double sep = std::abs(x0 - y0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        rep.B_est = std::max(rep.B_est, std::abs(xt.samples[i].x - yt.samples[i].x) / sep);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            if (i == j) continue;
            const double num = std::abs(xt.samples[i].x - yt.samples[j].x) - rep.B_est * sep;
            rep.A_est = std::max(rep.A_est, num / std::abs(grid[i] - grid[j]));
        }
    }
    return rep;
}

SlopeReport backward_distance_check(const FieldDescriptor& field, const Trajectory& x_traj,
                                    const Trajectory& y_traj, double slack) {
    const auto& xs = x_traj.samples;
    const auto& ys = y_traj.samples;
    if (xs.size() != ys.size() || xs.size() < 2)
        throw QcError(ErrorCode::InvalidArgument, "trajectories must share a time grid of >= 2 samples");
    SlopeReport rep;
    rep.min_slope = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < xs.size(); ++j) {
        if (std::abs(xs[j].t - ys[j].t) > 1e-12 * std::max(1.0, std::abs(xs[j].t)))
            throw QcError(ErrorCode::InvalidArgument, "trajectories must share a time grid");
        const double d0 = std::abs(xs[j].x - ys[j].x);
        const double d1 = std::abs(xs[j + 1].x - ys[j + 1].x);
        rep.min_slope = std::min(rep.min_slope, (d1 - d0) / (xs[j + 1].t - xs[j].t));
    }
    (void)field;
    rep.pass = rep.min_slope >= -slack;
    return rep;
}

SlopeReport speed_monotone_check(const FieldDescriptor& field, const Trajectory& traj, double slack) {
    if (traj.size() < 2) throw QcError(ErrorCode::InvalidArgument, "trajectory needs >= 2 samples");
    SlopeReport rep;
    rep.min_slope = std::numeric_limits<double>::infinity();
    double prev = std::abs(field(traj.samples.front().x));
    for (std::size_t j = 1; j < traj.size(); ++j) {
        const double cur = std::abs(field(traj.samples[j].x));
        rep.min_slope = std::min(rep.min_slope, cur - prev);
        prev = cur;
    }
    rep.pass = rep.min_slope >= -slack;
    return rep;
}

double reverse_triangle_ratio(const Trajectory& traj) {
    double worst = 0.0;
    const auto& s = traj.samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t j = i + 1; j < s.size(); ++j) {
            const double radial = std::abs(std::abs(s[i].x) - std::abs(s[j].x));
            if (radial <= 1e-14) continue;
            worst = std::max(worst, std::abs(s[i].x - s[j].x) / radial);
        }
    }
    return worst;
}

}  // namespace qcflow
