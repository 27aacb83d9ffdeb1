#include "qcflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "qcflow/error.hpp"

namespace qcflow {

WirtingerSample wirtinger(const FieldDescriptor& field, ComplexPoint z, double step) {
    if (!(step > 0.0)) throw QcError(ErrorCode::InvalidArgument, "wirtinger step must be positive");
    const bool radial = field.contains<kinds::RadialPower>() || field.contains<kinds::Example1>();
    if (radial && std::abs(z) <= step) {
        throw QcError(ErrorCode::SingularPoint, "stencil reaches the origin of a radial-power field");
    }
    const ComplexPoint I(0.0, 1.0);
    const ComplexPoint dx = field(z + step) - field(z - step);
    const ComplexPoint dy = field(z + I * step) - field(z - I * step);
    WirtingerSample s;
    s.f_z = (dx - I * dy) / (4.0 * step);
    s.f_zbar = (dx + I * dy) / (4.0 * step);
    s.at = z;
    s.step = step;
    s.seam = field.contains<kinds::Example2>() && std::abs(z.imag()) < step;
    return s;
}

ReducedQcReport reduced_qc_report(const FieldDescriptor& field, std::span<const ComplexPoint> samples,
                                  const QCParams& params, double step, double slack) {
    ReducedQcReport report;
    const double k = params.k();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const WirtingerSample w = wirtinger(field, samples[i], step);
        if (w.seam) report.seam_samples.push_back(i);
        const double re = w.f_z.real();
        if (std::abs(re) < 1e-12) {
            report.degenerate_denominators.push_back(i);
            continue;
        }
        const double ratio = std::abs(w.f_zbar) / re;
        if (re <= 0.0 || ratio > k + slack) report.violations.push_back({i, samples[i], ratio, re});
        if (re > 0.0) report.max_ratio = std::max(report.max_ratio, ratio);
    }
    return report;
}

MonotonicityReport monotonicity(const FieldDescriptor& field, ComplexPoint a, ComplexPoint b) {
    if (a == b) throw QcError(ErrorCode::CoincidentPoints, "monotonicity needs a != b");
    const ComplexPoint df = field(a) - field(b);
    const ComplexPoint dz = a - b;
    MonotonicityReport r;
    r.a = a;
    r.b = b;
    r.Delta = inner(df, dz / std::abs(dz));
    const double norm = std::abs(df);
    if (norm > 0.0) r.delta = std::clamp(r.Delta / norm, -1.0, 1.0);
    return r;
}

FamilyReport family_membership(const FieldDescriptor& field, const QCParams& params) {
    FamilyReport r;
    r.f0 = field(0.0);
    const ComplexPoint f1 = field(1.0);
    r.re_f1 = f1.real();
    r.abs_f1 = std::abs(f1);
    if (!(r.re_f1 > 0.0)) {
        throw QcError(ErrorCode::NotNormalizable, field.label() + " has re f(1) <= 0");
    }
    constexpr double tol = 1e-9;
    r.pass = std::abs(r.f0) <= tol && std::abs(r.re_f1 - 1.0) <= tol && r.abs_f1 >= 1.0 - tol &&
             r.abs_f1 <= params.d + tol;
    return r;
}

GrowthReport growth_bounds_check(const FieldDescriptor& field, const QCParams& params,
                                 std::span<const ComplexPoint> samples) {
    GrowthReport report;
    report.asserted = params.K == 1.0 && params.C_K == 1.0;
    constexpr double rel = 1e-12;
    for (const ComplexPoint x : samples) {
        if (x == 0.0) throw QcError(ErrorCode::InvalidArgument, "growth bounds need nonzero samples");
        GrowthSample g;
        g.x = x;
        const double r = std::abs(x);
        g.m_K = quasisymmetry_m(params, r);
        g.M_K = quasisymmetry_M(params, r);
        g.d_M_K = params.d * g.M_K;
        const ComplexPoint fx = field(x);
        g.Delta = inner(fx, x / r);
        g.abs_f = std::abs(fx);
        g.delta = g.abs_f > 0.0 ? g.Delta / g.abs_f : 0.0;
        g.delta_lower = g.m_K / g.d_M_K;
        g.delta_ok = g.Delta >= g.m_K * (1.0 - rel) && g.Delta <= g.M_K * (1.0 + rel);
        g.abs_ok = g.abs_f >= g.m_K * (1.0 - rel) && g.abs_f <= g.d_M_K * (1.0 + rel);
        g.ratio_ok = g.delta >= g.delta_lower * (1.0 - rel);
        if (!(g.delta_ok && g.abs_ok && g.ratio_ok)) ++report.flagged;
        report.samples.push_back(g);
    }
    report.pass = !report.asserted || report.flagged == 0;
    return report;
}

}  // namespace qcflow
