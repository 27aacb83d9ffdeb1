#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "qcflow/diagnostics.hpp"
#include "qcflow/error.hpp"
#include "qcflow/variation.hpp"

using namespace qcflow;
using oracle::C;
using oracle::pi;

namespace {

FieldDescriptor e2_half() { return field::rescaled(field::example2(), 0.5); }

std::vector<C> segment(C a, C b, std::size_t n) {
    std::vector<C> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
    return pts;
}

std::vector<C> circle_arc(double r, double a, double b, std::size_t n) {
    std::vector<C> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(std::polar(r, a + (b - a) * static_cast<double>(i) / (n - 1)));
    return pts;
}

TimeCurve line_curve(C origin, C velocity, double t_min, double t_max) {
    TimeCurve c;
    c.position = [=](double t) { return origin + velocity * t; };
    c.velocity = [=](double) { return velocity; };
    c.t_min = t_min;
    c.t_max = t_max;
    return c;
}

/// Independent inf |x(t) - y(s)| over [a, b]^2 for straight-line curves: both point-to-segment directions.
double line_pair_distance(const TimeCurve& x, const TimeCurve& y, double a, double b) {
    auto pt_seg = [](C p, C u, C v) {
        const C d = v - u;
        const double s = std::clamp(((p - u) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
        return std::abs(p - (u + s * d));
    };
    const C xa = x.position(a), xb = x.position(b), ya = y.position(a), yb = y.position(b);
    return std::min({pt_seg(xa, ya, yb), pt_seg(xb, ya, yb), pt_seg(ya, xa, xb), pt_seg(yb, xa, xb)});
}

Trajectory trajectory_on(const FieldDescriptor& f, C x0, double a, double b, std::size_t n) {
    std::vector<double> ts;
    for (std::size_t i = 0; i < n; ++i) ts.push_back(a + (b - a) * static_cast<double>(i) / (n - 1));
    return integrate_on_grid(f, x0, ts, 1e-12);
}

}  // namespace

TEST_CASE("sampled arcs") {
    const auto arc = SampledArc::with_arclength(segment(0.0, C(3, 4), 6));
    REQUIRE(arc.arclength_params);
    CHECK(arc.arclength_params->back() == doctest::Approx(5.0));
    CHECK_NOTHROW(arc.validate());
    SampledArc bad{{0.0, 0.0, 1.0}, std::nullopt};
    CHECK_THROWS_AS(bad.validate(), QcError);
    SampledArc bad_params{{0.0, 1.0}, std::vector<double>{1.0, 1.0}};
    CHECK_THROWS_AS(bad_params.validate(), QcError);
}

TEST_CASE("p-variation") {
    const auto id = field::linear(1, 0);
    SUBCASE("straight segment") {
        const SampledArc arc{segment(0.0, 1.0, 50), std::nullopt};
        const auto v2 = p_variation(id, arc, 2.0);
        CHECK(v2.value == 1.0);
        CHECK(v2.optimal_partition == std::vector<std::size_t>{0, 49});
        CHECK(p_variation(id, arc, 1.0).value == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("quarter circle: the coarsest partition wins") {
        const SampledArc arc{circle_arc(1.0, 0.0, pi / 2, 200), std::nullopt};
        const auto v = p_variation(id, arc, 2.0);
        CHECK(v.value == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
        CHECK(v.optimal_partition.size() == 2);
        CHECK(std::abs(v.value - oracle::forward_dp_p_variation(arc.points, 2.0)) < 1e-12);
    }
    SUBCASE("dynamic program equals exhaustive enumeration") {
        oracle::Draw draw(3);
        for (std::size_t n = 2; n <= 12; ++n) {
            for (int rep = 0; rep < 4; ++rep) {
                std::vector<C> y;
                for (std::size_t i = 0; i < n; ++i) y.emplace_back(draw.uniform(-1, 1), draw.uniform(-1, 1));
                for (double p : {1.0, 1.5, 2.0, 3.0}) {
                    const auto est = p_variation_of(y, p);
                    CHECK(est.value == oracle::exhaustive_p_variation(y, p));
                    CHECK(partition_value(y, est.optimal_partition, p) == est.value);
                }
            }
        }
    }
    SUBCASE("ordering and refinement") {
        oracle::Draw draw(5);
        for (int rep = 0; rep < 10; ++rep) {
            const C start = draw.annulus(0.5, 1.0);
            const auto coarse = trajectory_on(e2_half(), start, 0.0, 0.6, 41);
            const auto fine = trajectory_on(e2_half(), start, 0.0, 0.6, 81);
            const auto ac = SampledArc::from_trajectory(coarse), af = SampledArc::from_trajectory(fine);
            const double v1 = p_variation(e2_half(), ac, 1.0).value, v2 = p_variation(e2_half(), ac, 2.0).value;
            CHECK(v2 <= v1 + 1e-12);
            CHECK(p_variation(e2_half(), af, 1.0).value >= v1 - 1e-12);
            CHECK(p_variation(e2_half(), af, 2.0).value >= v2 - 1e-12);
        }
    }
    CHECK_THROWS_AS(p_variation(id, SampledArc{{1.0}, std::nullopt}, 2.0), QcError);
    CHECK_THROWS_AS(p_variation_of(std::vector<C>{0.0, 1.0}, 0.5), QcError);
    CHECK_THROWS_AS(partition_value(std::vector<C>{0.0, 1.0, 2.0}, std::vector<std::size_t>{0, 1}, 2.0), QcError);
}

TEST_CASE("quadratic bound report") {
    const AnnulusWindow w(0.5, 2.0);
    const auto seg = quadratic_bound_report(field::linear(1, 0), SampledArc{segment(0.6, C(1.2, 0.9), 41), {}}, w);
    CHECK(seg.ratio == doctest::Approx(1.0));
    for (const auto& f : {e2_half(), field::linear(1, 2)}) {
        const auto tr = extend_to_annulus(f, C(0.7, -0.7), w, 1e-11);
        const auto arc = trajectory_on(f, C(0.7, -0.7), tr.t_inner * 0.9, tr.t_outer * 0.9, 201);
        const auto rep = quadratic_bound_report(f, SampledArc::from_trajectory(arc), w);
        CHECK(std::isfinite(rep.ratio));
        CHECK(rep.ratio >= 1.0);
        CHECK(rep.refinement_change < 0.05);
    }
    CHECK_THROWS_AS(quadratic_bound_report(field::linear(1, 0), SampledArc{segment(0.1, 1.0, 10), {}}, w), QcError);
}

TEST_CASE("C1 modulus") {
    const auto line = SampledArc::with_arclength(segment(0.0, C(1, 1), 100));
    for (double tau : {0.01, 0.5, 1.4}) CHECK(c1_modulus(line, tau) < 1e-12);

    const auto arc = SampledArc::with_arclength(circle_arc(1.0, 0.0, pi / 2, 1000));
    double prev = 0.0;
    for (int i = 1; i <= 10; ++i) {
        const double tau = 0.15 * i;
        const double v = c1_modulus(arc, tau);
        CHECK(std::abs(v - 2 * std::sin(tau / 2)) < 2e-3);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK_THROWS_AS(c1_modulus(SampledArc{circle_arc(1.0, 0, 1, 10), {}}, 0.1), QcError);
}

TEST_CASE("partition sequence") {
    SUBCASE("parallel lines") {
        const auto x = line_curve(0.0, 1.0, -10, 0), y = line_curve(C(0, 0.1), 1.0, -10, 0);
        const auto seq = partition_sequence(x, y, 50);
        CHECK(seq.terminal == PartitionTerminal::budget_exhausted);
        REQUIRE(seq.times.size() == 51);
        for (std::size_t k = 0; k + 1 < seq.times.size(); ++k) {
            CHECK(std::abs(seq.times[k] - seq.times[k + 1] - 0.1) < 1e-9);
            CHECK(std::abs(line_pair_distance(x, y, seq.times[k + 1], seq.times[k]) - 0.1) < 1e-12);
        }
        const auto all = partition_sequence(x, y, 1000);
        CHECK(all.terminal == PartitionTerminal::domain_exhausted);
        CHECK(all.times.size() >= 100);
    }
    SUBCASE("converging lines against a brute-force oracle") {
        const auto x = line_curve(0.0, 1.0, -2, 0), y = line_curve(C(0, 0.1), C(1, 0.05), -2, 0);
        const auto seq = partition_sequence(x, y, 60);
        REQUIRE(seq.times.size() == 61);
        for (std::size_t k = 0; k + 1 < seq.times.size(); ++k) {
            const double a = seq.times[k + 1], b = seq.times[k];
            CHECK(b > a);
            CHECK(std::abs(line_pair_distance(x, y, a, b) - (b - a)) < 1e-8);
            CHECK(std::abs(inter_curve_distance(x, y, a, b) - (b - a)) < 1e-8);
            CHECK(std::abs(seq.gaps[k] - (b - a)) < 1e-8);
        }
    }
    SUBCASE("meeting curves") {
        const auto x = line_curve(0.0, 1.0, -2, 0), y = line_curve(C(0, 0.1), C(1, 0.1), -2, 0);
        const auto seq = partition_sequence(x, y, 100000);
        CHECK(seq.terminal == PartitionTerminal::converged_to_meet);
        CHECK(std::abs(seq.times.back() + 1.0) < 1e-6);
    }
    SUBCASE("trajectories") {
        const auto xt = trajectory_on(e2_half(), C(1.0, 0.05), -0.5, 0.0, 11);
        const auto yt = trajectory_on(e2_half(), C(1.0, -0.05), -0.5, 0.0, 11);
        const auto x = TimeCurve::from_trajectory(xt), y = TimeCurve::from_trajectory(yt);
        CHECK(std::abs(x.position(-0.25) - C(std::exp(-0.25), 0.05 * std::exp(-0.25))) < 1e-9);
        CHECK(std::abs(y.position(-0.25) - oracle::example2_lower_flow(C(1.0, -0.05), -0.25)) < 1e-9);
        const auto seq = partition_sequence(x, y, 40);
        for (std::size_t k = 0; k + 1 < seq.times.size(); ++k) {
            const double a = seq.times[k + 1], b = seq.times[k];
            CHECK(std::abs(inter_curve_distance(x, y, a, b, 512) - (b - a)) < 1e-8);
        }
        oracle::Draw draw(8);
        for (int i = 0; i < 20; ++i) {
            const double tau = draw.uniform(seq.times.back(), seq.times.front());
            CHECK(partition_comparison_bound(x, y, seq, tau).holds);
        }
    }
    SUBCASE("curved spiral pair needs a refined window") {
        auto spiral = [](C start) {
            TimeCurve c;
            c.position = [=](double t) { return oracle::linear_flow(start, 1.0, 2.0, t); };
            c.velocity = [=](double t) { return C(1, 2) * oracle::linear_flow(start, 1.0, 2.0, t); };
            c.t_min = -0.3;
            c.t_max = 0.0;
            return c;
        };
        const auto x = spiral(1.0), y = spiral(std::polar(1.0, 0.01));
        auto worst = [&](const PartitionSequence& seq) {
            double w = 0.0;
            for (std::size_t k = 0; k + 1 < seq.times.size(); ++k) {
                const double a = seq.times[k + 1], b = seq.times[k];
                w = std::max(w, std::abs(inter_curve_distance(x, y, a, b, 1024) - (b - a)));
            }
            return w;
        };
        CHECK(worst(partition_sequence(x, y, 20)) < 1e-8);
        PartitionOptions coarse;
        coarse.max_resolution = coarse.resolution;
        CHECK(worst(partition_sequence(x, y, 20, coarse)) > 1e-8);
    }
    SUBCASE("comparison bound on parallel lines") {
        const auto x = line_curve(0.0, 1.0, -10, 0), y = line_curve(C(0, 0.1), 1.0, -10, 0);
        const auto seq = partition_sequence(x, y, 5);
        const auto b = partition_comparison_bound(x, y, seq, -0.23);
        CHECK(b.k == 2);
        CHECK(b.lhs == doctest::Approx(0.1));
        CHECK(b.C == doctest::Approx(2.0));
        CHECK(b.rhs == doctest::Approx(0.3));
        CHECK(b.lhs == doctest::Approx(b.rhs / (1 + b.C)));
        CHECK(b.holds);
    }
    CHECK_THROWS_AS(partition_sequence(line_curve(0.0, 1.0, -1, 0), line_curve(0.0, 2.0, -1, 0), 5), QcError);
}

TEST_CASE("uniqueness certificate") {
    const AnnulusWindow w(0.5, 2.0);
    const double seps[] = {1e-3, 1e-4, 1e-5};
    SUBCASE("identity field on one ray") {
        const auto st = certificate_stability(field::linear(1, 0), 1.0, 1.0, w, seps);
        REQUIRE(st.implied_constants.size() == 3);
        for (double c : st.implied_constants) CHECK(std::isfinite(c));
        CHECK(st.drift < 0.25);
    }
    SUBCASE("log ratios for the identity field") {
        const auto xt = trajectory_on(field::linear(1, 0), 1.0, -0.5, 0.0, 51);
        const auto yt = trajectory_on(field::linear(1, 0), 1.0 + 1e-4, -0.5, 0.0, 51);
        const auto rep = uniqueness_certificate(field::linear(1, 0), xt, yt, w, 50);
        // |x - y| = 1e-4 e^t, so each log ratio equals its time step.
        for (std::size_t k = 0; k < rep.log_ratios.size(); ++k)
            CHECK(rep.log_ratios[k] == doctest::Approx(rep.partition.times[k] - rep.partition.times[k + 1]).epsilon(1e-6));
        CHECK(rep.implied_constant > 0.0);
    }
    SUBCASE("rescaled example2 across the seam") {
        const auto st = certificate_stability(e2_half(), C(1.0, 1e-6), C(0, -1), w, seps);
        for (double c : st.implied_constants) CHECK(std::isfinite(c));
        CHECK(st.drift < 0.25);
    }
    SUBCASE("preconditions") {
        const auto xt = trajectory_on(field::degenerate(1), 1.0, -0.5, 0.0, 11);
        const auto yt = trajectory_on(field::degenerate(1), 1.1, -0.5, 0.0, 11);
        try {
            uniqueness_certificate(field::degenerate(1), xt, yt, w);
            FAIL("expected NotNormalizable");
        } catch (const QcError& e) {
            CHECK(e.code() == ErrorCode::NotNormalizable);
        }
        const auto same = trajectory_on(field::linear(1, 0), 1.0, -0.5, 0.0, 11);
        try {
            uniqueness_certificate(field::linear(1, 0), same, same, w);
            FAIL("expected CurvesCoincideAtEnd");
        } catch (const QcError& e) {
            CHECK(e.code() == ErrorCode::CurvesCoincideAtEnd);
        }
        const auto far = trajectory_on(field::linear(1, 0), 1.9, -0.5, 0.5, 11);
        CHECK_THROWS_AS(uniqueness_certificate(field::linear(1, 0), far, far, w), QcError);
    }
}

TEST_CASE("inner product bound") {
    const auto eq = inner_product_bound(1.0, 1.0, 1.0, 1.0);
    CHECK(eq.lhs == 0.0);
    CHECK(eq.rhs == 0.0);
    const auto b = inner_product_bound(2.0, 1.0, 1.0, 1.0);
    CHECK(b.lhs == 1.0);
    CHECK(b.rhs == 1.0);
    CHECK(b.holds);
    oracle::Draw draw(44);
    for (int i = 0; i < 1000; ++i) {
        const C A(draw.uniform(-5, 5), draw.uniform(-5, 5)), B(draw.uniform(-5, 5), draw.uniform(-5, 5));
        const C Z = std::polar(1.0, draw.uniform(-pi, pi));
        const double lam = 10.0 * (1.0 - draw.unit());
        CHECK(inner_product_bound(A, B, Z, lam).holds);
    }
    try {
        inner_product_bound(1.0, 1.0, 1.1, 1.0);
        FAIL("expected NonUnitZ");
    } catch (const QcError& e) {
        CHECK(e.code() == ErrorCode::NonUnitZ);
    }
}

TEST_CASE("arc pair estimates") {
    const AnnulusWindow w(0.5, 2.0);
    SUBCASE("identity field in closed form") {
        const C x0 = 1.0, y0 = std::polar(1.0, 0.02);
        const auto xt = trajectory_on(field::linear(1, 0), x0, -0.4, 0.0, 41);
        const auto yt = trajectory_on(field::linear(1, 0), y0, -0.4, 0.0, 41);
        const auto x = TimeCurve::from_trajectory(xt), y = TimeCurve::from_trajectory(yt);
        const auto seq = partition_sequence(x, y, 3);
        const double alpha = seq.times[2], beta = seq.times[1];
        const auto rep = arc_pair_estimates(field::linear(1, 0), x, y, alpha, beta, w);
        CHECK(std::abs(rep.realized_distance - (beta - alpha)) < 1e-6);
        // Delta_f(a, b) = |a - b| for the identity.
        const double end = std::exp(beta) - std::exp(alpha);
        CHECK(rep.delta_end == doctest::Approx(end).epsilon(1e-8));
        double worst = 0.0;
        for (int i = 0; i < 17; ++i)
            for (int j = 0; j < 17; ++j) {
                const C p = oracle::linear_flow(x0, 1, 0, alpha + (beta - alpha) * i / 16.0);
                const C q = oracle::linear_flow(y0, 1, 0, alpha + (beta - alpha) * j / 16.0);
                worst = std::max(worst, std::abs(p - q) / end);
            }
        CHECK(rep.delta_ratio_max == doctest::Approx(worst).epsilon(1e-6));
        CHECK(rep.diameter_bound_holds);
        CHECK(rep.log_ratio == doctest::Approx(beta - alpha).epsilon(1e-6));
        CHECK_THROWS_AS(arc_pair_estimates(field::linear(1, 0), x, y, alpha - 0.05, beta, w), QcError);
    }
    SUBCASE("example2 ratios are finite and stable") {
        const auto xt = trajectory_on(e2_half(), C(1.0, 0.02), -0.4, 0.0, 41);
        const auto yt = trajectory_on(e2_half(), C(1.0, -0.02), -0.4, 0.0, 41);
        const auto x = TimeCurve::from_trajectory(xt), y = TimeCurve::from_trajectory(yt);
        const auto seq = partition_sequence(x, y, 4);
        const double alpha = seq.times[3], beta = seq.times[2];
        const auto a = arc_pair_estimates(e2_half(), x, y, alpha, beta, w, QCParams(2, 1), 17);
        const auto b = arc_pair_estimates(e2_half(), x, y, alpha, beta, w, QCParams(2, 1), 33);
        CHECK(std::isfinite(a.delta_ratio_max));
        CHECK(std::abs(b.delta_ratio_max / a.delta_ratio_max - 1.0) < 0.05);
        CHECK(a.diameter_bound_holds);
    }
}

TEST_CASE("rectification") {
    SUBCASE("identity on a segment") {
        const auto arc = SampledArc::with_arclength(segment(0.5, C(0.9, 0.3), 30));
        const double d = sampled_delta(field::linear(1, 0), arc);
        CHECK(d == doctest::Approx(1.0));
        const auto rep = rectify_image(field::linear(1, 0), arc, d);
        CHECK(rep.lipschitz_ratio == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(rep.pass);
    }
    SUBCASE("spiral field") {
        const auto arc = SampledArc::with_arclength(segment(C(1, 0.2), C(1.1, 0.35), 30));
        const double d = sampled_delta(field::linear(1, 2), arc);
        CHECK(std::abs(d - 1 / std::sqrt(5.0)) < 1e-12);
        const auto rep = rectify_image(field::linear(1, 2), arc, d);
        CHECK(rep.lipschitz_ratio == doctest::Approx(std::sqrt(5.0)).epsilon(1e-9));
        CHECK(rep.bound == doctest::Approx(2 * std::sqrt(5.0) * 1.05));
        CHECK(rep.pass);
        for (std::size_t j = 1; j < rep.params_s.size(); ++j) CHECK(rep.params_s[j] > rep.params_s[j - 1]);
    }
    SUBCASE("example1 near the ray through 1") {
        for (const auto& pts : {segment(1.0, 1.1, 30), circle_arc(1.0, 0.0, 0.05, 30)}) {
            const auto arc = SampledArc::with_arclength(pts);
            const double d = sampled_delta(field::example1(), arc);
            CHECK(d > 0.0);
            const auto rep = rectify_image(field::example1(), arc, d);
            CHECK(rep.lipschitz_ratio <= 2.0 / d * 1.05);
            CHECK(rep.pass);
        }
    }
    SUBCASE("rejections") {
        const auto half = SampledArc::with_arclength(circle_arc(1.0, 0.0, pi, 40));
        try {
            rectify_image(field::linear(1, 0), half, 1.0);
            FAIL("expected ArcTooLong");
        } catch (const QcError& e) {
            CHECK(e.code() == ErrorCode::ArcTooLong);
        }
        const auto seg = SampledArc::with_arclength(segment(1.0, 1.1, 5));
        CHECK_THROWS_AS(rectify_image(field::linear(1, 0), seg, 0.0), QcError);
        try {
            rectify_image(field::linear(-1, 0), seg, 1.0);
            FAIL("expected NotDeltaMonotoneOnArc");
        } catch (const QcError& e) {
            CHECK(e.code() == ErrorCode::NotDeltaMonotoneOnArc);
        }
    }
}
