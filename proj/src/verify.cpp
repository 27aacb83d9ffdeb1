#include "qcflow/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "qcflow/diagnostics.hpp"
#include "qcflow/error.hpp"
#include "qcflow/flow.hpp"
#include "qcflow/quasipolar.hpp"
#include "qcflow/variation.hpp"

namespace qcflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}
    double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * unit(); }
    ComplexPoint annulus(const AnnulusWindow& w) {
        const double rad = std::sqrt(w.r * w.r + unit() * (w.R * w.R - w.r * w.r));
        return std::polar(rad, 2.0 * kPi * unit());
    }
    /// Annulus point at least `gap` away from the real axis.
    ComplexPoint off_seam(const AnnulusWindow& w, double gap = 1e-3) {
        for (;;) {
            const ComplexPoint z = annulus(w);
            if (std::abs(z.imag()) > gap) return z;
        }
    }

private:
    std::mt19937_64 rng_;
};

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return v;
}

struct Outcome {
    bool pass;
    double metric;
    std::string detail = {};
    /// Diagnostic only: reported, never counted as a failure.
    bool info = false;
};

class Suite {
public:
    Suite(std::string label, VerifyReport& report) : label_(std::move(label)), report_(report) {}

    /// Runs one check; a thrown QcError becomes a failed entry carrying the message.
    void check(const std::string& name, const std::function<Outcome()>& body) {
        CheckEntry e{label_, name, "fail", std::nullopt, {}};
        try {
            const Outcome o = body();
            e.status = o.info ? "info" : o.pass ? "pass" : "fail";
            if (std::isfinite(o.metric)) e.metric = o.metric;
            e.detail = o.detail;
        } catch (const QcError& err) {
            e.detail = err.what();
        }
        report_.entries.push_back(std::move(e));
    }

    void add(CheckEntry e) {
        e.field = label_;
        report_.entries.push_back(std::move(e));
    }

private:
    std::string label_;
    VerifyReport& report_;
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::size_t VerifyReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.status == "fail"; }));
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : entries) {
        nlohmann::json j{{"field", e.field}, {"name", e.name}, {"status", e.status}};
        j["metric"] = e.metric ? nlohmann::json(*e.metric) : nlohmann::json(nullptr);
        if (!e.detail.empty()) j["detail"] = e.detail;
        list.push_back(std::move(j));
    }
    return {{"entries", list},
            {"summary", {{"entries", entries.size()}, {"failed", failures()}, {"ok", ok()}}}};
}

std::optional<QCParams> known_params(const FieldDescriptor& field) {
    if (field == field::linear(1, 0)) return QCParams(1.0, 1.0);
    if (field == field::linear(1, 2)) return QCParams(1.0, std::sqrt(5.0));
    if (field == field::rescaled(field::example1(), 0.1)) return QCParams(2.0, 1.0);
    if (field == field::rescaled(field::example2(), 0.5)) return QCParams(2.0, 1.0);
    return std::nullopt;
}

std::vector<FieldDescriptor> builtin_fields() {
    return {field::linear(1, 0), field::linear(1, 2), field::rescaled(field::example1(), 0.1),
            field::rescaled(field::example2(), 0.5), field::degenerate(1)};
}

void verify_common(std::uint64_t seed, VerifyReport& report) {
    Suite suite("-", report);
    suite.check("inner_product_lemma", [&] {
        Sampler s(seed);
        double worst = -kInf;
        for (int i = 0; i < 1000; ++i) {
            const ComplexPoint A(s.uniform(-5, 5), s.uniform(-5, 5)), B(s.uniform(-5, 5), s.uniform(-5, 5));
            const ComplexPoint Z = unit_phasor(s.uniform(-kPi, kPi));
            const auto b = inner_product_bound(A, B, Z, 10.0 * (1.0 - s.unit()));
            worst = std::max(worst, b.lhs - b.rhs);
        }
        return Outcome{worst <= 1e-12, worst, "max lhs - rhs over 1000 seeded triples"};
    });
}

void verify_field(const FieldDescriptor& raw, std::uint64_t seed, double tol, VerifyReport& report) {
    Suite suite(raw.label(), report);
    const double re_f1 = raw(1.0).real();
    if (std::abs(re_f1) < 1e-12) {
        suite.add({"", "family_membership", "excluded", re_f1,
                   "NotNormalizable: re f(1) = 0, the field has no quasipolar structure; dynamic checks skipped"});
        return;
    }
    if (re_f1 < 0.0) {
        suite.add({"", "family_membership", "fail", re_f1, "NotNormalizable: re f(1) = " + fmt(re_f1) + " < 0"});
        return;
    }
    const FieldDescriptor f = re_f1 == 1.0 ? raw : field::normalized(raw);
    const AnnulusWindow window(0.5, 2.0);
    Sampler sampler(seed);

    std::vector<ComplexPoint> pts(100);
    for (auto& z : pts) z = sampler.off_seam(window);

    QCParams params;
    std::string params_source = "known";
    if (auto k = known_params(f)) {
        params = *k;
    } else {
        const double k_est = reduced_qc_report(f, pts, QCParams{}, 1e-5, kInf).max_ratio;
        params_source = "inferred";
        params = k_est < 1.0 ? QCParams::from_k(k_est, std::max(1.0, std::abs(f(1.0)))) : QCParams{};
    }
    const std::string params_note = params_source + " K=" + fmt(params.K) + " d=" + fmt(params.d);

    suite.check("family_membership", [&] {
        const auto m = family_membership(f, params);
        return Outcome{m.pass, m.abs_f1, params_note};
    });
    suite.check("reduced_qc", [&] {
        const auto r = reduced_qc_report(f, pts, params);
        return Outcome{r.violations.empty(), r.max_ratio, "k=" + fmt(params.k())};
    });
    suite.check("strict_monotonicity", [&] {
        double min_delta = kInf;
        for (int i = 0; i < 500; ++i) {
            const ComplexPoint a = sampler.annulus(AnnulusWindow(0.01, 3.0));
            const ComplexPoint b = i % 2 ? sampler.annulus(AnnulusWindow(0.01, 3.0))
                                         : a + ComplexPoint(sampler.uniform(-1e-3, 1e-3), sampler.uniform(-1e-3, 1e-3));
            if (a == b) continue;
            min_delta = std::min(min_delta, monotonicity(f, a, b).Delta);
        }
        return Outcome{min_delta > 0.0, min_delta, "min Delta_f over 500 pairs"};
    });
    suite.check("growth_bounds", [&] {
        const auto g = growth_bounds_check(f, params, pts);
        if (!g.asserted)
            return Outcome{true, static_cast<double>(g.flagged), "diagnostic only, moduli not exact", true};
        return Outcome{g.pass, static_cast<double>(g.flagged), "samples outside the moduli envelopes"};
    });

    suite.check("radial_identity", [&] {
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            const auto tr = integrate_on_grid(f, sampler.annulus(AnnulusWindow(0.7, 1.2)), linspace(0.0, 0.25, 52), tol);
            worst = std::max(worst, radial_identity_check(f, tr).max_rel_error);
        }
        return Outcome{worst < 1e-4, worst, "max relative error of d|x|/dt against Delta_f(x, 0)"};
    });
    suite.check("radial_monotonicity", [&] {
        double min_step = kInf;
        for (int i = 0; i < 20; ++i) {
            SolverOptions o;
            o.tolerance = tol;
            const auto tr = integrate(f, sampler.annulus(window), {0.0, 1.0}, o);
            for (std::size_t j = 1; j < tr.size(); ++j)
                min_step = std::min(min_step, std::abs(tr.samples[j].x) - std::abs(tr.samples[j - 1].x));
        }
        return Outcome{min_step > 0.0, min_step, "smallest increase of |x| between samples"};
    });
    suite.check("annulus_time_bound", [&] {
        const auto t = extend_to_annulus(f, sampler.annulus(window), window, tol, params);
        if (!(params.K == 1.0 && params.C_K == 1.0))
            return Outcome{true, t.time_bound_ratio, "diagnostic only, moduli not exact", true};
        return Outcome{t.time_bound_ratio <= 1.0 + 1e-9, t.time_bound_ratio, "transit time * m_K(r) / (R - r)"};
    });

    const auto grid = linspace(0.0, 1.0, 101);
    suite.check("backward_distance", [&] {
        const auto a = integrate_on_grid(f, sampler.annulus(window), grid, tol);
        const auto b = integrate_on_grid(f, sampler.annulus(window), grid, tol);
        const auto r = backward_distance_check(f, a, b);
        return Outcome{r.pass, r.min_slope, "min slope of |x(t) - y(t)|"};
    });
    suite.check("speed_monotone", [&] {
        const auto a = integrate_on_grid(f, sampler.annulus(window), grid, tol);
        const auto r = speed_monotone_check(f, a);
        return Outcome{r.pass, r.min_slope, "min increment of |f(x(t))|"};
    });
    suite.check("reverse_triangle", [&] {
        const ComplexPoint z = sampler.annulus(AnnulusWindow(0.5, 0.8));
        const double c = reverse_triangle_ratio(integrate_on_grid(f, z, linspace(0.0, 0.8, 101), tol));
        const double d = reverse_triangle_ratio(integrate_on_grid(f, z, linspace(0.0, 0.8, 201), tol));
        const double change = std::abs(d / c - 1.0);
        return Outcome{std::isfinite(c) && change < 0.05, c, "refinement change " + fmt(change)};
    });
    suite.check("lipschitz_stability", [&] {
        const ComplexPoint x0 = sampler.off_seam(AnnulusWindow(0.8, 1.2), 0.05);
        const ComplexPoint dir = unit_phasor(sampler.uniform(-kPi, kPi));
        double lo = kInf, hi = 0.0;
        for (double eps : {1e-3, 1e-4, 1e-5}) {
            const double b = lipschitz_dependence(f, x0, x0 + eps * dir, window, 1e-12).B_est;
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
        const double spread = hi / lo - 1.0;
        return Outcome{spread < 0.1, spread, "relative spread of B_est over separations 1e-3..1e-5"};
    });
    suite.check("phi_preserves_circles", [&] {
        double worst = 0.0;
        for (int i = 0; i < 20; ++i) {
            const ComplexPoint z = pts[static_cast<std::size_t>(i)];
            worst = std::max(worst, std::abs(std::abs(phi_map(f, z, tol)) - std::abs(z)));
        }
        return Outcome{worst < 1e-6, worst, "max | |Phi(z)| - |z| |"};
    });
    suite.check("coordinate_roundtrip", [&] {
        double worst = 0.0;
        for (int i = 20; i < 40; ++i) {
            const ComplexPoint z = pts[static_cast<std::size_t>(i)];
            worst = std::max(worst, std::abs(psi_map(f, theta(f, z, tol), tol) - z));
        }
        return Outcome{worst < 1e-6, worst, "max |Psi(Theta(z)) - z|"};
    });
    suite.check("polar_time_agreement", [&] {
        const double th0 = sampler.uniform(-kPi, kPi);
        const auto radii = linspace(0.5, 2.0, 10);
        const auto curve = integrate_polar(f, th0, {0.5, 2.0}, std::min(tol, 1e-12), radii);
        double worst = 0.0;
        for (std::size_t i = 0; i < radii.size(); ++i) {
            const auto hit = trace_to_radius(f, unit_phasor(th0), th0, radii[i], std::min(tol, 1e-12));
            worst = std::max(worst, std::abs(curve.phi[i] - hit.angle));
        }
        return Outcome{worst < 1e-6, worst, "max angle difference at 10 radii"};
    });
    suite.check("factorization_residual", [&] {
        double worst = 0.0, min_lambda = kInf;
        for (int i = 40; i < 60; ++i) {
            const auto s = integrating_factor(f, pts[static_cast<std::size_t>(i)]);
            worst = std::max(worst, s.orthogonality_residual);
            min_lambda = std::min(min_lambda, s.lambda_factor);
        }
        return Outcome{worst < 1e-3 && min_lambda > 0.0, worst,
                       "max angle between i f and grad Theta; min lambda " + fmt(min_lambda)};
    });
    suite.check("orthogonal_curvature", [&] {
        double worst = kInf;
        for (int i = 0; i < 2; ++i) {
            SolverOptions o;
            o.tolerance = tol;
            const auto tr = orthogonal_trajectory(f, sampler.annulus(window), {0.0, 1.0}, o);
            worst = std::min(worst, curvature_check(tr).min_arg_slope);
        }
        return Outcome{worst >= -1e-8, worst, "min slope of arg w'(t)"};
    });
    suite.check("bilipschitz", [&] {
        const auto b = bilipschitz_sample(f, window, 200, seed, tol);
        return Outcome{b.min_ratio > 0.0 && std::isfinite(b.max_ratio), b.min_ratio, "max ratio " + fmt(b.max_ratio)};
    });
    suite.check("partition_validity", [&] {
        const ComplexPoint end = sampler.off_seam(AnnulusWindow(0.9, 1.1), 0.05);
        const auto ts = linspace(-0.3, 0.0, 31);
        const auto x = TimeCurve::from_trajectory(integrate_on_grid(f, end, ts, 1e-12));
        const auto y = TimeCurve::from_trajectory(integrate_on_grid(f, end * ComplexPoint(1.0, 0.01), ts, 1e-12));
        const auto seq = partition_sequence(x, y, 20);
        double worst = 0.0;
        for (std::size_t k = 0; k + 1 < seq.times.size(); ++k) {
            const double a = seq.times[k + 1], b = seq.times[k];
            worst = std::max(worst, std::abs(inter_curve_distance(x, y, a, b, 512) - (b - a)));
        }
        return Outcome{worst < 1e-8, worst, "max |dist over [t_k+1, t_k] - (t_k - t_k+1)|"};
    });
    suite.check("certificate_stability", [&] {
        const double seps[] = {1e-3, 1e-4, 1e-5};
        const auto c = certificate_stability(f, ComplexPoint(1.0, 1e-6), ComplexPoint(0.0, -1.0), window, seps);
        return Outcome{c.drift < 0.25, c.drift, "implied constant at 1e-3 " + fmt(c.implied_constants.front())};
    });
    suite.check("variation_ordering", [&] {
        const auto tr = integrate_on_grid(f, sampler.annulus(AnnulusWindow(0.5, 0.8)), linspace(0.0, 0.6, 61), tol);
        const auto arc = SampledArc::from_trajectory(tr);
        const double v1 = p_variation(f, arc, 1.0).value, v2 = p_variation(f, arc, 2.0).value;
        return Outcome{v2 <= v1 + 1e-12, v2 / v1, "|f(arc)|_2 / |f(arc)|_1"};
    });
    suite.check("quadratic_bound", [&] {
        const ComplexPoint x0 = sampler.annulus(AnnulusWindow(0.6, 0.8));
        // Stop short of the outer circle so that every field keeps the arc inside the window.
        const double t_out = extend_to_annulus(f, x0, AnnulusWindow(0.55, 0.95 * window.R), tol).t_outer;
        const auto tr = integrate_on_grid(f, x0, linspace(0.0, std::min(0.6, t_out), 201), tol);
        const auto r = quadratic_bound_report(f, SampledArc::from_trajectory(tr), window);
        return Outcome{std::isfinite(r.ratio) && r.refinement_change < 0.05, r.ratio,
                       "refinement change " + fmt(r.refinement_change)};
    });
    suite.check("rectification", [&] {
        const ComplexPoint a = sampler.off_seam(AnnulusWindow(0.8, 1.2), 0.1);
        const ComplexPoint dir = unit_phasor(sampler.uniform(-kPi, kPi));
        std::vector<ComplexPoint> seg;
        for (double s : linspace(0.0, 0.05, 21)) seg.push_back(a + s * dir);
        const auto arc = SampledArc::with_arclength(seg);
        const double d = sampled_delta(f, arc);
        const auto r = rectify_image(f, arc, d);
        return Outcome{r.pass, r.lipschitz_ratio, "bound 2/delta*1.05 = " + fmt(r.bound)};
    });
}

}  // namespace qcflow
