#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "qcflow/diagnostics.hpp"
#include "qcflow/error.hpp"
#include "qcflow/flow.hpp"

using namespace qcflow;
using oracle::C;

namespace {

SolverOptions on_grid(double a, double b, std::size_t n, double tol = 1e-10) {
    SolverOptions o;
    o.tolerance = tol;
    for (std::size_t i = 0; i < n; ++i) o.output_times.push_back(a + (b - a) * static_cast<double>(i) / (n - 1));
    return o;
}

FieldDescriptor e2_half() { return field::rescaled(field::example2(), 0.5); }

}  // namespace

TEST_CASE("integrate") {
    SUBCASE("exponential growth") {
        const auto tr = integrate(field::linear(1, 0), 1.0, {0.0, 1.0});
        CHECK(std::abs(tr.samples.back().x - std::exp(1.0)) < 1e-8);
        CHECK(tr.t_end() == 1.0);
        for (std::size_t j = 1; j < tr.size(); ++j) CHECK(tr.samples[j].t > tr.samples[j - 1].t);
    }
    SUBCASE("circular orbit closes") {
        const auto tr = integrate(field::degenerate(1), 1.0, {0.0, 2 * oracle::pi});
        CHECK(std::abs(tr.samples.back().x - 1.0) < 1e-6);
        for (const auto& s : tr.samples) CHECK(std::abs(std::abs(s.x) - 1.0) < 1e-8);
    }
    SUBCASE("critical point stays put") {
        const auto tr = integrate(field::example1(), 0.0, {0.0, 1.0});
        CHECK(tr.samples.back().x == C(0, 0));
        CHECK(tr.event_time("critical_point").has_value());
    }
    SUBCASE("example1 branches are exact solutions") {
        for (int sign : {1, -1}) {
            double worst = 0.0;
            for (int i = 0; i <= 200; ++i) {
                const double t = 0.01 + 0.99 * i / 200.0;
                worst = std::max(worst, std::abs(oracle::branch_velocity(t, sign) -
                                                 eval(field::example1(), oracle::branch(t, sign))));
            }
            CHECK(worst < 1e-8);
            const auto tr = integrate(field::example1(), oracle::branch(0.1, sign), {0.1, 1.0});
            CHECK(std::abs(tr.samples.back().x - oracle::branch(1.0, sign)) < 1e-7);
        }
    }
    SUBCASE("backward run stops at the origin limit") {
        const auto tr = integrate(field::linear(1, 0), 1.0, {0.0, -30.0});
        REQUIRE(tr.event_time("origin_limit").has_value());
        CHECK(std::abs(tr.samples.front().x) < 1e-6);
        CHECK(tr.t_end() == 0.0);
    }
    SUBCASE("escape") {
        const auto tr = integrate(field::linear(1, 0), 1.0, {0.0, 40.0});
        CHECK(tr.event_time("escape").has_value());
    }
    SUBCASE("samples at requested times") {
        const auto tr = integrate(field::linear(1, 2), 1.0, {0.0, 2.0}, on_grid(0, 2, 21));
        REQUIRE(tr.size() == 21);
        for (const auto& s : tr.samples) CHECK(std::abs(s.x - oracle::linear_flow(1.0, 1, 2, s.t)) < 1e-8);
        CHECK(std::abs(tr.at(1.234) - oracle::linear_flow(1.0, 1, 2, 1.234)) < 1e-4);
    }
    SUBCASE("bad arguments") {
        CHECK_THROWS_AS(integrate(field::linear(1, 0), 1.0, {1.0, 1.0}), QcError);
        SolverOptions o;
        o.tolerance = 0;
        CHECK_THROWS_AS(integrate(field::linear(1, 0), 1.0, {0.0, 1.0}, o), QcError);
    }
    SUBCASE("tolerance controls the endpoint error") {
        double prev = 1.0;
        for (double tol : {1e-4, 1e-6, 1e-8, 1e-10}) {
            SolverOptions o;
            o.tolerance = tol;
            o.max_step = 1.0;
            const double err = std::abs(integrate(field::linear(1, 0), 1.0, {0.0, 1.0}, o).samples.back().x - std::exp(1.0));
            CHECK(err <= prev);
            CHECK(err < 10 * tol);
            prev = err;
        }
    }
    SUBCASE("dense output residual") {
        const auto tr = integrate(field::linear(1, 2), 1.0, {0.0, 1.0});
        for (std::size_t j = 0; j + 1 < tr.size(); ++j) {
            const double mid = 0.5 * (tr.samples[j].t + tr.samples[j + 1].t);
            CHECK(std::abs(tr.at(mid) - oracle::linear_flow(1.0, 1, 2, mid)) < 1e-6);
        }
    }
}

TEST_CASE("integrate_on_grid spans both directions") {
    const std::vector<double> ts{-1.0, -0.5, 0.0, 0.25, 1.0};
    const auto tr = integrate_on_grid(field::linear(1, 2), C(0.3, 0.4), ts, 1e-11);
    REQUIRE(tr.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        CHECK(tr.samples[i].t == ts[i]);
        CHECK(std::abs(tr.samples[i].x - oracle::linear_flow(C(0.3, 0.4), 1, 2, ts[i])) < 1e-9);
    }
}

TEST_CASE("extend_to_annulus") {
    const AnnulusWindow w(0.5, 2.0);
    for (const auto& f : {field::linear(1, 0), field::linear(1, 2)}) {
        const auto tr = extend_to_annulus(f, 1.0, w, 1e-10);
        CHECK(std::abs(tr.t_inner - std::log(0.5)) < 1e-8);
        CHECK(std::abs(tr.t_outer - std::log(2.0)) < 1e-8);
        CHECK(tr.time_bound_ratio <= 1.0);
        CHECK(tr.trajectory.event_time("hit_outer") == tr.t_outer);
    }
    const auto e2 = extend_to_annulus(e2_half(), C(0, 1), w, 1e-10);
    CHECK(std::abs(e2.t_inner - std::log(0.5)) < 1e-8);
    CHECK(std::abs(e2.t_outer - std::log(2.0)) < 1e-8);
    CHECK(std::abs(e2.trajectory.samples.back().x - C(0, 2)) < 1e-8);

    SUBCASE("bit-identical reruns") {
        const auto a = extend_to_annulus(e2_half(), C(0.3, -0.9), w, 1e-10);
        const auto b = extend_to_annulus(e2_half(), C(0.3, -0.9), w, 1e-10);
        CHECK(a.t_inner == b.t_inner);
        CHECK(a.t_outer == b.t_outer);
    }
    SUBCASE("lower-half transit matches the closed-form parabola flow") {
        const C z0(0.6, -0.7);
        const auto tr = extend_to_annulus(e2_half(), z0, w, 1e-11);
        CHECK(std::abs(std::abs(oracle::example2_lower_flow(z0, tr.t_outer)) - 2.0) < 1e-8);
        CHECK(std::abs(std::abs(oracle::example2_lower_flow(z0, tr.t_inner)) - 0.5) < 1e-8);
    }
    CHECK_THROWS_AS(extend_to_annulus(field::linear(1, 0), 3.0, w, 1e-10), QcError);
    CHECK_THROWS_AS(extend_to_annulus(field::example2(), 1.0, w, 1e-10), QcError);
}

TEST_CASE("radial monotonicity of family fields") {
    const FieldDescriptor fields[] = {field::linear(1, 0), field::linear(1, 2), field::rescaled(field::example1(), 0.1),
                                      e2_half()};
    oracle::Draw draw(99);
    for (const auto& f : fields) {
        for (int i = 0; i < 20; ++i) {
            const auto tr = integrate(f, draw.annulus(0.5, 2.0), {0.0, 1.0});
            for (std::size_t j = 1; j < tr.size(); ++j) CHECK(std::abs(tr.samples[j].x) > std::abs(tr.samples[j - 1].x));
        }
    }
}

TEST_CASE("radial identity") {
    SUBCASE("spiral") {
        const auto tr = integrate(field::linear(1, 2), 1.0, {0.0, 1.0}, on_grid(0, 1, 52));
        const auto rep = radial_identity_check(field::linear(1, 2), tr);
        CHECK(rep.checked == 50);
        CHECK(rep.max_rel_error < 1e-4);
        // Centered differences are second order, so a 4x finer grid is 16x tighter.
        const auto fine = integrate(field::linear(1, 2), 1.0, {0.0, 0.25}, on_grid(0, 0.25, 52));
        const auto rep_fine = radial_identity_check(field::linear(1, 2), fine);
        CHECK(rep_fine.max_rel_error < 1e-5);
        CHECK(rep.max_rel_error / rep_fine.max_rel_error == doctest::Approx(16.0).epsilon(0.05));
    }
    SUBCASE("circles") {
        const auto tr = integrate(field::degenerate(1), 1.0, {0.0, 1.0}, on_grid(0, 1, 52));
        CHECK(radial_identity_check(field::degenerate(1), tr).max_abs_error < 1e-8);
    }
    SUBCASE("example1 branch") {
        const auto tr = integrate(field::example1(), oracle::branch(0.2, 1), {0.2, 1.0}, on_grid(0.2, 1, 52));
        CHECK(radial_identity_check(field::example1(), tr).max_rel_error < 1e-4);
        for (const auto& s : tr.samples)
            CHECK(monotonicity(field::example1(), s.x, 0.0).Delta == doctest::Approx(50 * s.t).epsilon(1e-7));
    }
}

TEST_CASE("lipschitz dependence") {
    const AnnulusWindow w(0.5, 2.0);
    SUBCASE("linear") {
        const auto rep = lipschitz_dependence(field::linear(1, 0), 1.0, 1.001, w, 1e-11);
        CHECK(rep.B_est == doctest::Approx(2.0 / 1.001).epsilon(1e-7));
        CHECK(rep.t_hi == doctest::Approx(std::log(2.0 / 1.001)));
    }
    SUBCASE("rotation is an isometry") {
        const auto rep = lipschitz_dependence(field::degenerate(1), 1.0, C(1.0, 1e-3), w, 1e-11, 101, 3.0);
        CHECK(rep.B_est == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("example2 ratio is scale-stable") {
        std::vector<double> bs;
        for (double eps : {1e-3, 1e-4, 1e-5}) {
            bs.push_back(lipschitz_dependence(e2_half(), C(1.0, 0.0), C(1.0, 0.0) + C(0, -eps), w, 1e-12).B_est);
        }
        for (double b : bs) CHECK(std::abs(b / bs[0] - 1.0) < 0.1);
    }
    CHECK_THROWS_AS(lipschitz_dependence(field::linear(1, 0), 1.0, 1.0, w, 1e-10), QcError);
    CHECK_THROWS_AS(lipschitz_dependence(field::linear(1, 0), 1.0, 3.0, w, 1e-10), QcError);
}

TEST_CASE("backward distance and speed monotonicity") {
    SUBCASE("example2 lower half") {
        const auto o = on_grid(0, 1, 101);
        const auto a = integrate(field::example2(), C(0.4, -0.5), {0, 1}, o);
        const auto b = integrate(field::example2(), C(0.6, -0.3), {0, 1}, o);
        CHECK(backward_distance_check(field::example2(), a, b).pass);
        CHECK(speed_monotone_check(field::example2(), a).pass);
    }
    SUBCASE("rotation preserves distance") {
        const auto o = on_grid(0, 3, 101);
        const auto a = integrate(field::degenerate(1), 1.0, {0, 3}, o);
        const auto b = integrate(field::degenerate(1), C(0, 0.5), {0, 3}, o);
        const auto rep = backward_distance_check(field::degenerate(1), a, b);
        CHECK(std::abs(rep.min_slope) < 1e-8);
        CHECK(std::abs(speed_monotone_check(field::degenerate(1), a).min_slope) < 1e-9);
    }
    SUBCASE("example1") {
        const auto o = on_grid(0, 1, 101);
        const auto a = integrate(field::example1(), C(0.5, 0.1), {0, 1}, o);
        const auto b = integrate(field::example1(), C(-0.2, 0.9), {0, 1}, o);
        CHECK(backward_distance_check(field::example1(), a, b).pass);
        const auto br = integrate(field::example1(), oracle::branch(0.1, 1), {0.1, 1.0}, on_grid(0.1, 1, 50));
        CHECK(speed_monotone_check(field::example1(), br).pass);
        for (const auto& s : br.samples)
            CHECK(std::abs(eval(field::example1(), s.x)) == doctest::Approx(50 * s.t).epsilon(1e-7));
    }
    SUBCASE("mismatched grids") {
        const auto a = integrate(field::linear(1, 0), 1.0, {0, 1}, on_grid(0, 1, 11));
        const auto b = integrate(field::linear(1, 0), 2.0, {0, 1}, on_grid(0, 1, 12));
        CHECK_THROWS_AS(backward_distance_check(field::linear(1, 0), a, b), QcError);
    }
}

TEST_CASE("reverse triangle ratio is refinement-stable") {
    const auto f = e2_half();
    const auto coarse = integrate(f, C(0.4, -0.4), {0.0, 1.0}, on_grid(0, 1, 101));
    const auto fine = integrate(f, C(0.4, -0.4), {0.0, 1.0}, on_grid(0, 1, 201));
    const double a = reverse_triangle_ratio(coarse), b = reverse_triangle_ratio(fine);
    CHECK(std::isfinite(a));
    CHECK(a >= 1.0);
    CHECK(std::abs(b / a - 1.0) < 0.05);
    // Rays: |x_i - x_j| equals the radial difference.
    const auto ray = integrate(field::linear(1, 0), C(0.6, 0.8), {0, 1}, on_grid(0, 1, 51));
    CHECK(reverse_triangle_ratio(ray) == doctest::Approx(1.0).epsilon(1e-9));
}
