#include "qcflow/variation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "qcflow/diagnostics.hpp"
#include "qcflow/error.hpp"

namespace qcflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double point_segment(ComplexPoint p, ComplexPoint a, ComplexPoint b) {
    const ComplexPoint ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    const double s = std::clamp(inner(p - a, ab) / len2, 0.0, 1.0);
    return std::abs(p - (a + s * ab));
}

double cross(ComplexPoint a, ComplexPoint b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(ComplexPoint p0, ComplexPoint p1, ComplexPoint q0, ComplexPoint q1) {
    const double d1 = cross(p1 - p0, q0 - p0), d2 = cross(p1 - p0, q1 - p0);
    const double d3 = cross(q1 - q0, p0 - q0), d4 = cross(q1 - q0, p1 - q0);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

double segment_segment(ComplexPoint p0, ComplexPoint p1, ComplexPoint q0, ComplexPoint q1) {
    if (segments_cross(p0, p1, q0, q1)) return 0.0;
    return std::min({point_segment(p0, q0, q1), point_segment(p1, q0, q1), point_segment(q0, p0, p1),
                     point_segment(q1, p0, p1)});
}

std::vector<double> cumulative_length(std::span<const ComplexPoint> pts) {
    std::vector<double> s(pts.size(), 0.0);
    for (std::size_t j = 1; j < pts.size(); ++j) s[j] = s[j - 1] + std::abs(pts[j] - pts[j - 1]);
    return s;
}

/// Unit tangents by second-order differences in the parameter s (one-sided at the ends).
std::vector<ComplexPoint> unit_tangents(std::span<const ComplexPoint> x, std::span<const double> s) {
    const std::size_t n = x.size();
    std::vector<ComplexPoint> t(n);
    if (n == 2) {
        t[0] = t[1] = (x[1] - x[0]) / std::abs(x[1] - x[0]);
        return t;
    }
    auto three_point = [&](std::size_t a, std::size_t b, std::size_t c, double at) {
        // Derivative at `at` of the quadratic through (s_a, x_a), (s_b, x_b), (s_c, x_c).
        const double sa = s[a], sb = s[b], sc = s[c];
        const double wa = (2 * at - sb - sc) / ((sa - sb) * (sa - sc));
        const double wb = (2 * at - sa - sc) / ((sb - sa) * (sb - sc));
        const double wc = (2 * at - sa - sb) / ((sc - sa) * (sc - sb));
        return wa * x[a] + wb * x[b] + wc * x[c];
    };
    for (std::size_t j = 0; j < n; ++j) {
        ComplexPoint d;
        if (j == 0)
            d = three_point(0, 1, 2, s[0]);
        else if (j + 1 == n)
            d = three_point(n - 3, n - 2, n - 1, s[n - 1]);
        else
            d = three_point(j - 1, j, j + 1, s[j]);
        t[j] = d / std::abs(d);
    }
    return t;
}

std::vector<ComplexPoint> images_of(const FieldDescriptor& field, std::span<const ComplexPoint> pts) {
    std::vector<ComplexPoint> y;
    y.reserve(pts.size());
    for (ComplexPoint z : pts) y.push_back(field(z));
    return y;
}

std::pair<double, double> shared_domain(const TimeCurve& x, const TimeCurve& y) {
    const double lo = std::max(x.t_min, y.t_min);
    const double hi = std::min(x.t_max, y.t_max);
    if (!(hi > lo)) throw QcError(ErrorCode::InvalidArgument, "curves do not share a time interval");
    return {lo, hi};
}

/// Polyline model of both curves on [lo, hi] answering D(tau) = inf over [tau, hi]^2 in O(segments).
/// The segment count grows from `m0` until the chord sag of both curves is below `sag_tol`.
class SearchWindow {
public:
    SearchWindow(const TimeCurve& x, const TimeCurve& y, double lo, double hi, std::size_t m0, std::size_t m_max,
                 double sag_tol)
        : x_(x), y_(y) {
        sample(lo, hi, m0);
        const double sag = max_sag(lo, hi);
        if (sag > sag_tol && m0 < m_max) {
            // Sag falls with the square of the segment count.
            const double want = static_cast<double>(m0) * std::sqrt(sag / sag_tol) * 1.1;
            sample(lo, hi, static_cast<std::size_t>(std::min(static_cast<double>(m_max), std::ceil(want))));
        }
        build_suffix();
    }

    std::size_t segments() const { return m_; }

    double distance_from(double tau) const {
        const auto it = std::lower_bound(t_.begin(), t_.end(), tau);
        const std::size_t i0 = static_cast<std::size_t>(it - t_.begin());
        if (i0 < m_ + 1 && t_[i0] == tau) return suffix_[i0];
        const ComplexPoint px = x_.position(tau), py = y_.position(tau);
        double best = std::min(suffix_[i0], segment_segment(px, xs_[i0], py, ys_[i0]));
        for (std::size_t b = i0; b < m_; ++b) best = std::min(best, segment_segment(px, xs_[i0], ys_[b], ys_[b + 1]));
        for (std::size_t a = i0; a < m_; ++a) best = std::min(best, segment_segment(xs_[a], xs_[a + 1], py, ys_[i0]));
        return best;
    }

private:
    void sample(double lo, double hi, std::size_t m) {
        m_ = m;
        t_.resize(m + 1);
        xs_.resize(m + 1);
        ys_.resize(m + 1);
        for (std::size_t i = 0; i <= m; ++i) {
            t_[i] = i == m ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(m);
            xs_[i] = x_.position(t_[i]);
            ys_[i] = y_.position(t_[i]);
        }
    }

    double max_sag(double lo, double hi) const {
        double sag = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double mid = 0.5 * (t_[i] + t_[i + 1]);
            if (!(mid > lo && mid < hi)) continue;
            sag = std::max(sag, std::abs(x_.position(mid) - 0.5 * (xs_[i] + xs_[i + 1])));
            sag = std::max(sag, std::abs(y_.position(mid) - 0.5 * (ys_[i] + ys_[i + 1])));
        }
        return sag;
    }

    /// suffix_[i] = min distance between segments a, b >= i (and the end points).
    void build_suffix() {
        std::vector<ComplexPoint> cx(m_), cy(m_);
        std::vector<double> rx(m_), ry(m_);
        for (std::size_t i = 0; i < m_; ++i) {
            cx[i] = 0.5 * (xs_[i] + xs_[i + 1]);
            cy[i] = 0.5 * (ys_[i] + ys_[i + 1]);
            rx[i] = 0.5 * std::abs(xs_[i + 1] - xs_[i]);
            ry[i] = 0.5 * std::abs(ys_[i + 1] - ys_[i]);
        }
        // Two segments are no closer than their midpoints minus both half lengths.
        auto pair = [&](std::size_t a, std::size_t b, double best) {
            if (std::abs(cx[a] - cy[b]) - rx[a] - ry[b] >= best) return best;
            return std::min(best, segment_segment(xs_[a], xs_[a + 1], ys_[b], ys_[b + 1]));
        };
        suffix_.assign(m_ + 1, kInf);
        suffix_[m_] = std::abs(xs_[m_] - ys_[m_]);
        for (std::size_t i = m_; i-- > 0;) {
            double best = suffix_[i + 1];
            for (std::size_t b = i; b < m_; ++b) best = pair(i, b, best);
            for (std::size_t a = i + 1; a < m_; ++a) best = pair(a, i, best);
            suffix_[i] = best;
        }
    }

    const TimeCurve& x_;
    const TimeCurve& y_;
    std::size_t m_ = 0;
    std::vector<double> t_;
    std::vector<ComplexPoint> xs_, ys_;
    std::vector<double> suffix_;
};

double sampled_diameter_sq(const TimeCurve& c, const FieldDescriptor& field, double a, double b, std::size_t n) {
    std::vector<ComplexPoint> img;
    for (std::size_t i = 0; i < n; ++i)
        img.push_back(field(c.position(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1))));
    const double d = diameter(img);
    return d * d;
}

}  // namespace

// --- arcs and p-variation ----------------------------------------------------

SampledArc SampledArc::with_arclength(std::vector<ComplexPoint> points) {
    SampledArc arc;
    arc.arclength_params = cumulative_length(points);
    arc.points = std::move(points);
    return arc;
}

SampledArc SampledArc::from_trajectory(const Trajectory& traj, bool with_arclength) {
    std::vector<ComplexPoint> pts = traj.points();
    if (with_arclength) return SampledArc::with_arclength(std::move(pts));
    SampledArc arc;
    arc.points = std::move(pts);
    return arc;
}

void SampledArc::validate() const {
    for (std::size_t j = 1; j < points.size(); ++j)
        if (points[j] == points[j - 1]) throw QcError(ErrorCode::InvalidArgument, "consecutive arc samples coincide");
    if (arclength_params) {
        if (arclength_params->size() != points.size())
            throw QcError(ErrorCode::InvalidArgument, "one parameter per sample required");
        for (std::size_t j = 1; j < points.size(); ++j)
            if (!((*arclength_params)[j] > (*arclength_params)[j - 1]))
                throw QcError(ErrorCode::InvalidArgument, "arc parameters must increase strictly");
    }
}

double diameter(std::span<const ComplexPoint> pts) {
    double d = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, std::abs(pts[i] - pts[j]));
    return d;
}

double partition_value(std::span<const ComplexPoint> images, std::span<const std::size_t> breakpoints, double p) {
    if (breakpoints.size() < 2 || breakpoints.front() != 0 || breakpoints.back() + 1 != images.size())
        throw QcError(ErrorCode::InvalidArgument, "breakpoints must run from 0 to N-1");
    double sum = 0.0;
    for (std::size_t j = breakpoints.size() - 1; j > 0; --j) {
        const std::size_t a = breakpoints[j - 1], b = breakpoints[j];
        if (!(b > a)) throw QcError(ErrorCode::InvalidArgument, "breakpoints must increase");
        sum = std::pow(diameter(images.subspan(a, b - a + 1)), p) + sum;
    }
    return std::pow(sum, 1.0 / p);
}

VariationEstimate p_variation_of(std::span<const ComplexPoint> images, double p) {
    if (!(p >= 1.0)) throw QcError(ErrorCode::InvalidArgument, "p must be at least 1");
    const std::size_t n = images.size();
    if (n < 2) throw QcError(ErrorCode::TooFewSamples, "p-variation needs at least 2 samples");
    VariationEstimate est;
    est.p = p;
    if (p == 1.0) {
        // Refining never lowers a sum of diameters, so the finest partition is optimal.
        est.optimal_partition.resize(n);
        for (std::size_t j = 0; j < n; ++j) est.optimal_partition[j] = j;
        est.value = partition_value(images, est.optimal_partition, 1.0);
        return est;
    }
    // best[a]: optimum for samples a..n-1; rows of the diameter table D[a][b] are built from D[a+1][.].
    std::vector<double> best(n, 0.0), prev(n, 0.0), cur(n, 0.0);
    std::vector<std::size_t> next(n, n - 1);
    for (std::size_t a = n - 1; a-- > 0;) {
        cur[a] = 0.0;
        double top = -kInf;
        for (std::size_t b = a + 1; b < n; ++b) {
            cur[b] = std::max({cur[b - 1], b > a + 1 ? prev[b] : 0.0, std::abs(images[a] - images[b])});
            const double v = std::pow(cur[b], p) + best[b];
            if (v > top) {
                top = v;
                next[a] = b;
            }
        }
        best[a] = top;
        std::swap(prev, cur);
    }
    for (std::size_t a = 0;; a = next[a]) {
        est.optimal_partition.push_back(a);
        if (a == n - 1) break;
    }
    est.value = std::pow(best[0], 1.0 / p);
    return est;
}

VariationEstimate p_variation(const FieldDescriptor& field, const SampledArc& arc, double p) {
    if (arc.points.size() < 2) throw QcError(ErrorCode::TooFewSamples, "p-variation needs at least 2 samples");
    arc.validate();
    const auto y = images_of(field, arc.points);
    return p_variation_of(y, p);
}

QuadraticBoundReport quadratic_bound_report(const FieldDescriptor& field, const SampledArc& arc,
                                            const AnnulusWindow& window) {
    if (arc.points.size() < 3) throw QcError(ErrorCode::TooFewSamples, "quadratic bound needs at least 3 samples");
    for (ComplexPoint z : arc.points)
        if (!window.contains(z)) throw QcError(ErrorCode::NotInAnnulus, "arc leaves the window");
    arc.validate();
    const auto y = images_of(field, arc.points);
    QuadraticBoundReport rep;
    rep.variation2 = p_variation_of(y, 2.0).value;
    rep.diam_image = diameter(y);
    if (!(rep.diam_image > 0.0)) throw QcError(ErrorCode::CoincidentPoints, "image of the arc is a point");
    rep.ratio = rep.variation2 / rep.diam_image;

    std::vector<ComplexPoint> coarse;
    for (std::size_t j = 0; j < y.size(); j += 2) coarse.push_back(y[j]);
    if ((y.size() - 1) % 2 != 0) coarse.push_back(y.back());
    rep.coarse_ratio = p_variation_of(coarse, 2.0).value / diameter(coarse);
    rep.refinement_change = std::abs(rep.ratio - rep.coarse_ratio) / rep.ratio;
    return rep;
}

double c1_modulus(const SampledArc& arc, double tau) {
    if (!arc.arclength_params) throw QcError(ErrorCode::MissingParametrization, "c1_modulus needs arclength parameters");
    arc.validate();
    if (arc.points.size() < 2) throw QcError(ErrorCode::TooFewSamples, "arc needs at least 2 samples");
    const auto& s = *arc.arclength_params;
    const double total = s.back() - s.front();
    if (!(tau > 0.0) || tau > total * (1.0 + 1e-12))
        throw QcError(ErrorCode::InvalidArgument, "tau must lie in (0, total length]");
    const auto t = unit_tangents(arc.points, s);
    const double reach = tau + 1e-12 * total;
    double lam = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = i + 1; j < t.size() && s[j] - s[i] <= reach; ++j) lam = std::max(lam, std::abs(t[i] - t[j]));
    return lam;
}

// --- two-curve machinery -----------------------------------------------------

TimeCurve TimeCurve::from_trajectory(const Trajectory& traj) {
    if (traj.samples.empty()) throw QcError(ErrorCode::InvalidArgument, "empty trajectory");
    struct Shared {
        std::vector<TrajectorySample> samples;
        FieldDescriptor field;
        bool orthogonal;
        ComplexPoint rhs(ComplexPoint z) const {
            const ComplexPoint f = field(z);
            return orthogonal ? ComplexPoint(-f.imag(), f.real()) : f;
        }
    };
    auto sh = std::make_shared<const Shared>(Shared{traj.samples, traj.field, traj.orthogonal});
    TimeCurve c;
    c.t_min = traj.t_begin();
    c.t_max = traj.t_end();
    c.position = [sh](double t) {
        const auto& s = sh->samples;
        if (t <= s.front().t) return s.front().x;
        if (t >= s.back().t) return s.back().x;
        auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const TrajectorySample& q) { return v < q.t; });
        const TrajectorySample& a = *(it - 1);
        if (a.t == t) return a.x;
        auto rhs = [&sh](double, ComplexPoint z) { return sh->rhs(z); };
        const auto dp = ode::make_dopri<ComplexPoint>(rhs, ode::StepControl{});
        return dp.step(a.t, a.x, a.dx, t - a.t).x;
    };
    c.velocity = [sh, pos = c.position](double t) { return sh->rhs(pos(t)); };
    return c;
}

std::string_view to_string(PartitionTerminal t) {
    switch (t) {
        case PartitionTerminal::converged_to_meet: return "converged_to_meet";
        case PartitionTerminal::budget_exhausted: return "budget_exhausted";
        case PartitionTerminal::domain_exhausted: return "domain_exhausted";
    }
    return "unknown";
}

PartitionSequence partition_sequence(const TimeCurve& x, const TimeCurve& y, std::size_t budget,
                                     const PartitionOptions& opts) {
    const auto [t_min, t0] = shared_domain(x, y);
    if (x.position(t0) == y.position(t0))
        throw QcError(ErrorCode::CurvesCoincideAtEnd, "curves coincide at the end of their domain");
    if (opts.resolution < 2) throw QcError(ErrorCode::InvalidArgument, "resolution must be at least 2");

    PartitionSequence seq;
    seq.times.push_back(t0);
    double tk = t0;
    for (;;) {
        const double dk = std::abs(x.position(tk) - y.position(tk));
        if (dk < opts.meet_tol) {
            seq.terminal = PartitionTerminal::converged_to_meet;
            break;
        }
        if (seq.gaps.size() >= budget) {
            seq.terminal = PartitionTerminal::budget_exhausted;
            break;
        }
        // The root lies in [tk - dk, tk] because the inner infimum never exceeds dk.
        const double lo = std::max(t_min, tk - dk);
        if (!(lo < tk)) {
            seq.terminal = PartitionTerminal::domain_exhausted;
            break;
        }
        const SearchWindow win(x, y, lo, tk, opts.resolution, opts.max_resolution, opts.sag_tol);
        auto phi = [&](double tau) { return tau + win.distance_from(tau) - tk; };
        // phi(tk - dk) <= 0 holds exactly; only a clamped bracket can miss the root.
        if (lo == t_min && phi(lo) > 0.0) {
            seq.terminal = PartitionTerminal::domain_exhausted;
            break;
        }
        double a = lo, b = tk;
        for (int it = 0; it < 200 && b - a > opts.root_tol; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            (phi(mid) > 0.0 ? b : a) = mid;
        }
        const double next = 0.5 * (a + b);
        seq.gaps.push_back(win.distance_from(next));
        seq.times.push_back(next);
        tk = next;
    }
    return seq;
}

double inter_curve_distance(const TimeCurve& x, const TimeCurve& y, double a, double b, std::size_t res) {
    if (!(b > a)) throw QcError(ErrorCode::InvalidArgument, "interval must be nondegenerate");
    if (res < 1) throw QcError(ErrorCode::InvalidArgument, "resolution must be positive");
    std::vector<ComplexPoint> xs(res + 1), ys(res + 1);
    for (std::size_t i = 0; i <= res; ++i) {
        const double t = i == res ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(res);
        xs[i] = x.position(t);
        ys[i] = y.position(t);
    }
    double best = kInf;
    for (std::size_t i = 0; i <= res; ++i) {
        for (std::size_t j = 0; j < res; ++j) {
            best = std::min(best, point_segment(xs[i], ys[j], ys[j + 1]));
            best = std::min(best, point_segment(ys[i], xs[j], xs[j + 1]));
        }
    }
    return best;
}

ComparisonBound partition_comparison_bound(const TimeCurve& x, const TimeCurve& y, const PartitionSequence& seq,
                                           double tau) {
    if (!x.velocity || !y.velocity) throw QcError(ErrorCode::InvalidArgument, "curves need velocities");
    if (seq.times.size() < 2) throw QcError(ErrorCode::InvalidArgument, "partition has no steps");
    if (tau > seq.times.front() || tau < seq.times.back())
        throw QcError(ErrorCode::InvalidArgument, "tau outside the partitioned span");
    ComparisonBound out;
    while (out.k + 2 < seq.times.size() && tau < seq.times[out.k + 1]) ++out.k;
    const double tk = seq.times[out.k];
    constexpr int n = 200;
    for (int i = 0; i <= n; ++i) {
        const double t = tau + (tk - tau) * i / n;
        out.C = std::max(out.C, std::abs(x.velocity(t)) + std::abs(y.velocity(t)));
    }
    out.lhs = std::abs(x.position(tk) - y.position(tk));
    out.rhs = (1.0 + out.C) * std::abs(x.position(tau) - y.position(tau));
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

CertificateReport uniqueness_certificate(const FieldDescriptor& field, const Trajectory& x_traj,
                                         const Trajectory& y_traj, const AnnulusWindow& window, std::size_t budget,
                                         const PartitionOptions& opts) {
    family_membership(field, QCParams{});
    for (const Trajectory* tr : {&x_traj, &y_traj})
        for (const auto& s : tr->samples)
            if (!window.contains(s.x, 1e-12)) throw QcError(ErrorCode::WindowExit, "trajectory leaves the window", s.t, s.x);

    const TimeCurve x = TimeCurve::from_trajectory(x_traj);
    const TimeCurve y = TimeCurve::from_trajectory(y_traj);
    CertificateReport rep;
    rep.partition = partition_sequence(x, y, budget, opts);
    const auto& t = rep.partition.times;
    if (t.size() < 2) throw QcError(ErrorCode::NoConvergence, "partition produced no steps");

    double diam_sum = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
        const ComplexPoint xk = x.position(t[k]), yk = y.position(t[k]);
        const ComplexPoint xn = x.position(t[k + 1]), yn = y.position(t[k + 1]);
        rep.log_ratios.push_back(std::log(std::abs(xk - yk) / std::abs(xn - yn)));
        const double d2 = sampled_diameter_sq(x, field, t[k + 1], t[k], 9);
        diam_sum += d2;
        rep.bound_terms.push_back(std::abs(field(xk)) - std::abs(field(xn)) + d2);
        rep.total_lhs += rep.log_ratios.back();
    }
    rep.total_rhs_shape = std::abs(field(x.position(t.front()))) - std::abs(field(x.position(t.back()))) + diam_sum;
    rep.implied_constant = rep.total_lhs / rep.total_rhs_shape;
    return rep;
}

CertificateStability certificate_stability(const FieldDescriptor& field, ComplexPoint x_end, ComplexPoint direction,
                                           const AnnulusWindow& window, std::span<const double> separations,
                                           double span, double tolerance, std::size_t budget) {
    if (separations.empty()) throw QcError(ErrorCode::InvalidArgument, "no separations given");
    if (std::abs(std::abs(direction) - 1.0) > 1e-12) throw QcError(ErrorCode::NonUnitZ, "direction must be a unit vector");
    CertificateStability out;
    auto back_time = [&](ComplexPoint z) {
        if (!window.contains(z)) throw QcError(ErrorCode::WindowExit, "end point outside the window");
        const RadiusHit hit = trace_to_radius(field, z, std::arg(z), window.r, tolerance);
        return std::min(span, 0.99 * std::abs(hit.time));
    };
    for (double sep : separations) {
        if (!(sep > 0.0)) throw QcError(ErrorCode::InvalidArgument, "separations must be positive");
        const ComplexPoint y_end = x_end + sep * direction;
        const double T = std::min(back_time(x_end), back_time(y_end));
        SolverOptions so;
        so.tolerance = tolerance;
        so.max_step = 0.05;
        const Trajectory xt = integrate(field, x_end, {0.0, -T}, so);
        const Trajectory yt = integrate(field, y_end, {0.0, -T}, so);
        const CertificateReport rep = uniqueness_certificate(field, xt, yt, window, budget);
        out.separations.push_back(sep);
        out.implied_constants.push_back(rep.implied_constant);
    }
    const double c0 = out.implied_constants.front();
    for (double c : out.implied_constants) out.drift = std::max(out.drift, std::abs(c - c0) / std::abs(c0));
    return out;
}

// --- pointwise lemmas and arc estimates -------------------------------------

InnerProductBound inner_product_bound(ComplexPoint A, ComplexPoint B, ComplexPoint Z, double lam) {
    if (std::abs(std::abs(Z) - 1.0) > 1e-12) throw QcError(ErrorCode::NonUnitZ, "Z must have unit length");
    if (!(lam > 0.0)) throw QcError(ErrorCode::InvalidArgument, "lam must be positive");
    InnerProductBound b;
    b.lhs = inner(A - B, Z);
    b.rhs = std::abs(A) - std::abs(B) + std::norm(B - lam * Z) / (2.0 * lam);
    b.holds = b.lhs <= b.rhs + 1e-12;
    return b;
}

ArcPairReport arc_pair_estimates(const FieldDescriptor& field, const TimeCurve& x, const TimeCurve& y, double alpha,
                                 double beta, const AnnulusWindow& window, const QCParams& params,
                                 std::size_t samples) {
    const auto [lo, hi] = shared_domain(x, y);
    if (!(beta > alpha) || alpha < lo || beta > hi)
        throw QcError(ErrorCode::InvalidArgument, "[alpha, beta] must be a nondegenerate subinterval of the domain");
    if (samples < 2) throw QcError(ErrorCode::TooFewSamples, "need at least 2 samples per arc");

    std::vector<ComplexPoint> xs(samples), ys(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = alpha + (beta - alpha) * static_cast<double>(i) / static_cast<double>(samples - 1);
        xs[i] = x.position(t);
        ys[i] = y.position(t);
        if (!window.contains(xs[i]) || !window.contains(ys[i]))
            throw QcError(ErrorCode::WindowExit, "arcs leave the window", t, window.contains(xs[i]) ? ys[i] : xs[i]);
    }
    ArcPairReport rep;
    rep.realized_distance = inter_curve_distance(x, y, alpha, beta);
    if (std::abs(rep.realized_distance - (beta - alpha)) > 1e-6)
        throw QcError(ErrorCode::DistanceMismatch, "arc distance differs from the time-length");

    const ComplexPoint xa = xs.front(), xb = xs.back();
    rep.delta_end = monotonicity(field, xb, xa).Delta;
    const ComplexPoint fb = field(xb), fa = field(xa);
    const ComplexPoint v = (xb - xa) / (beta - alpha);
    rep.chord_bound = std::abs(fb) - std::abs(fa) + std::norm(fb - v) / (2.0 * std::abs(v));

    std::vector<ComplexPoint> img;
    constexpr std::size_t dense = 65;
    for (std::size_t i = 0; i < dense; ++i)
        img.push_back(field(x.position(alpha + (beta - alpha) * static_cast<double>(i) / (dense - 1))));
    const double d = diameter(img);
    rep.diameter_bound = std::abs(fb) - std::abs(fa) + d * d / (2.0 * quasisymmetry_m(params, window.r));
    rep.slack = rep.diameter_bound - rep.delta_end;
    rep.diameter_bound_holds = rep.delta_end <= rep.diameter_bound + 1e-12;

    for (ComplexPoint p : xs) {
        for (ComplexPoint q : ys) {
            if (p == q) continue;
            rep.delta_ratio_max = std::max(rep.delta_ratio_max, monotonicity(field, p, q).Delta / rep.delta_end);
        }
    }
    rep.log_ratio = std::log(std::abs(xb - ys.back()) / std::abs(xa - ys.front()));
    rep.log_ratio_over_delta = rep.log_ratio / rep.delta_end;
    return rep;
}

double sampled_delta(const FieldDescriptor& field, const SampledArc& arc) {
    if (arc.points.size() < 2) throw QcError(ErrorCode::TooFewSamples, "arc needs at least 2 samples");
    double best = kInf;
    for (std::size_t i = 0; i < arc.points.size(); ++i) {
        for (std::size_t j = i + 1; j < arc.points.size(); ++j) {
            const MonotonicityReport m = monotonicity(field, arc.points[j], arc.points[i]);
            if (m.delta) best = std::min(best, *m.delta);
        }
    }
    if (best == kInf) throw QcError(ErrorCode::NotDeltaMonotoneOnArc, "all images coincide");
    return best;
}

RectificationReport rectify_image(const FieldDescriptor& field, const SampledArc& arc, double delta_est) {
    if (arc.points.size() < 2) throw QcError(ErrorCode::TooFewSamples, "arc needs at least 2 samples");
    arc.validate();
    if (!(delta_est > 0.0)) throw QcError(ErrorCode::NotDeltaMonotoneOnArc, "delta estimate must be positive");
    const auto& x = arc.points;
    const std::vector<double> s = arc.arclength_params ? *arc.arclength_params : cumulative_length(x);
    const ComplexPoint u = unit_tangents(x, s).front();

    RectificationReport rep;
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            const ComplexPoint chord = x[j] - x[i];
            rep.direction_spread = std::max(rep.direction_spread, std::abs(chord / std::abs(chord) - u));
        }
    }
    if (rep.direction_spread > delta_est / 2)
        throw QcError(ErrorCode::ArcTooLong, "chord directions spread beyond delta/2; subdivide the arc");

    const auto y = images_of(field, x);
    const double phi0 = inner(y.front(), u);
    for (std::size_t j = 0; j < y.size(); ++j) {
        rep.params_s.push_back(inner(y[j], u) - phi0);
        if (j > 0 && !(rep.params_s[j] > rep.params_s[j - 1]))
            throw QcError(ErrorCode::NotDeltaMonotoneOnArc, "projection of the image is not strictly increasing");
    }
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = i + 1; j < y.size(); ++j)
            rep.lipschitz_ratio =
                std::max(rep.lipschitz_ratio, std::abs(y[j] - y[i]) / (rep.params_s[j] - rep.params_s[i]));
    rep.bound = 2.0 / delta_est * 1.05;
    rep.pass = rep.lipschitz_ratio <= rep.bound;
    return rep;
}

}  // namespace qcflow
