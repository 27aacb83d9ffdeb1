#pragma once

// Embedded Dormand-Prince 5(4) pair with FSAL, step clipping onto requested
// output times, a stop guard and bisection event location. Templated on the
// state so the same controller drives planar flows (std::complex<double>) and
// scalar ODEs such as the angle equation phi'(rho).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcflow/complex.hpp"
#include "qcflow/error.hpp"

namespace qcflow::ode {

struct StepControl {
    double atol = 1e-10;
    double rtol = 1e-10;
    double max_step = 0.1;
    /// Nonzero disables adaptivity and uses this step (clipped onto outputs).
    double fixed_step = 0.0;
    double min_step = 1e-14;
    std::size_t max_steps = 5'000'000;
    /// Event bisection stops once the bracket is shorter than this (absolute, in the independent variable).
    double event_tol = 1e-13;
};

template <class State>
struct Sample {
    double t;
    State x;
    State dx;
};

enum class Stop { reached_end, event, guard };

template <class State>
struct RunResult {
    std::vector<Sample<State>> samples;
    Stop stop = Stop::reached_end;
    std::string guard_name;
    std::size_t steps = 0;
};

inline ComplexPoint as_point(double x) { return {x, 0.0}; }
inline ComplexPoint as_point(ComplexPoint x) { return x; }

template <class State, class Rhs>
class DormandPrince {
public:
    DormandPrince(Rhs rhs, StepControl ctl) : rhs_(std::move(rhs)), ctl_(ctl) {}

    struct Step {
        State x;
        State k7;
        double err;  ///< scaled error norm; <= 1 means acceptable
    };

    /// One step of signed size h from (t, x) with k1 = f(t, x).
    Step step(double t, const State& x, const State& k1, double h) const {
        static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
        static constexpr double a21 = 1.0 / 5;
        static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
        static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
        static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                                a54 = -212.0 / 729;
        static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                                a65 = -5103.0 / 18656;
        static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                                b6 = 11.0 / 84;
        static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                                e6 = 22.0 / 525, e7 = -1.0 / 40;

        const State k2 = rhs_(t + c2 * h, x + h * (a21 * k1));
        const State k3 = rhs_(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
        const State k4 = rhs_(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const State k5 = rhs_(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const State k6 = rhs_(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const State xn = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = rhs_(t + h, xn);
        const State e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double scale = ctl_.atol + ctl_.rtol * std::max(std::abs(x), std::abs(xn));
        return {xn, k7, std::abs(e) / scale};
    }

    /// Integrates from t0 towards t1. With `outputs` non-empty only those times
    /// (plus a terminal event/guard sample) are recorded; otherwise every accepted step is.
    /// `guard(t, x, dx)` may stop the run by returning a name. `event(x)` stops the run at
    /// its first sign change, located by bisection on re-stepped states.
    template <class Guard, class Event>
    RunResult<State> run(State x0, double t0, double t1, std::span<const double> outputs, Guard guard,
                         Event event) const {
        RunResult<State> out;
        const double dir = t1 >= t0 ? 1.0 : -1.0;
        const double span = std::abs(t1 - t0);
        const bool dense_outputs = !outputs.empty();
        std::size_t next_out = 0;
        while (next_out < outputs.size() && dir * (outputs[next_out] - t0) < 0.0) ++next_out;

        double t = t0;
        State x = x0;
        State k1 = rhs_(t, x);
        auto record = [&](double tt, const State& xx, const State& dd) { out.samples.push_back({tt, xx, dd}); };

        if (!dense_outputs) {
            record(t, x, k1);
        } else if (next_out < outputs.size() && outputs[next_out] == t0) {
            record(t, x, k1);
            ++next_out;
        }
        if (auto name = guard(t, x, k1)) {
            if (dense_outputs && (out.samples.empty() || out.samples.back().t != t)) record(t, x, k1);
            out.stop = Stop::guard;
            out.guard_name = *name;
            return out;
        }
        if (span == 0.0) return out;

        double h = ctl_.fixed_step > 0.0 ? ctl_.fixed_step : std::min(ctl_.max_step, 1e-2 * std::max(span, 1e-3));
        double g_prev = event(x);

        while (dir * (t1 - t) > 0.0) {
            if (out.steps >= ctl_.max_steps) {
                throw QcError(ErrorCode::NoConvergence, "step budget exhausted", t, as_point(x));
            }
            double target = t1;
            if (next_out < outputs.size() && dir * (outputs[next_out] - target) < 0.0) target = outputs[next_out];
            const double remaining = std::abs(target - t);
            const bool clipped = h >= remaining;
            const double h_try = clipped ? remaining : h;

            const Step s = step(t, x, k1, dir * h_try);
            if (ctl_.fixed_step == 0.0 && s.err > 1.0) {
                h = h_try * std::max(0.2, 0.9 * std::pow(s.err, -0.2));
                if (h < ctl_.min_step) {
                    throw QcError(ErrorCode::StepUnderflow, "step size fell below the minimum", t, as_point(x));
                }
                continue;
            }
            ++out.steps;
            const double t_new = clipped ? target : t + dir * h_try;

            const double g_new = event(s.x);
            if (g_prev != 0.0 && g_prev * g_new <= 0.0) {
                // Bisection on the step length; the state at any sub-step comes from re-stepping.
                double lo = 0.0, hi = h_try;
                State x_hi = s.x, k_hi = s.k7;
                while (hi - lo > ctl_.event_tol) {
                    const double mid = 0.5 * (lo + hi);
                    if (mid <= lo || mid >= hi) break;
                    const Step sm = step(t, x, k1, dir * mid);
                    const double gm = event(sm.x);
                    if (g_prev * gm <= 0.0) {
                        hi = mid;
                        x_hi = sm.x;
                        k_hi = sm.k7;
                    } else {
                        lo = mid;
                    }
                }
                record(t + dir * hi, x_hi, k_hi);
                out.stop = Stop::event;
                return out;
            }
            g_prev = g_new;

            t = t_new;
            x = s.x;
            k1 = s.k7;
            const bool at_output = dense_outputs && next_out < outputs.size() && t == outputs[next_out];
            if (!dense_outputs || at_output) record(t, x, k1);
            if (at_output) ++next_out;

            if (auto name = guard(t, x, k1)) {
                if (dense_outputs && !at_output) record(t, x, k1);
                out.stop = Stop::guard;
                out.guard_name = *name;
                return out;
            }
            if (ctl_.fixed_step == 0.0) {
                const double grow = s.err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(s.err, -0.2)));
                // A clipped step says nothing about the admissible size; keep the larger proposal.
                h = std::min(ctl_.max_step, clipped ? std::max(h, h_try * grow) : h_try * grow);
            } else {
                h = ctl_.fixed_step;
            }
        }
        return out;
    }

private:
    Rhs rhs_;
    StepControl ctl_;
};

template <class State, class Rhs>
DormandPrince<State, Rhs> make_dopri(Rhs rhs, StepControl ctl) {
    return DormandPrince<State, Rhs>(std::move(rhs), ctl);
}

/// Cubic Hermite interpolation between two samples.
template <class State>
State hermite(const Sample<State>& a, const Sample<State>& b, double t) {
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    return h00 * a.x + (h10 * h) * a.dx + h01 * b.x + (h11 * h) * b.dx;
}

/// Derivative of the cubic Hermite interpolant.
template <class State>
State hermite_derivative(const Sample<State>& a, const Sample<State>& b, double t) {
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s;
    const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
    return (d00 / h) * a.x + d10 * a.dx + (d01 / h) * b.x + d11 * b.dx;
}

}  // namespace qcflow::ode
