#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qcflow/field.hpp"
#include "qcflow/moduli.hpp"

namespace qcflow {

struct WirtingerSample {
    ComplexPoint f_z;
    ComplexPoint f_zbar;
    ComplexPoint at;
    double step = 0.0;
    /// The stencil straddles the seam Im z = 0 of a piecewise field.
    bool seam = false;
};

/// Central-difference Wirtinger derivatives with the 4-point stencil z +- h, z +- ih.
/// Throws SingularPoint when a radial-power component is evaluated within `step` of 0.
WirtingerSample wirtinger(const FieldDescriptor& field, ComplexPoint z, double step = 1e-5);

struct QcViolation {
    std::size_t index;
    ComplexPoint at;
    double ratio;
    double re_f_z;
};

struct ReducedQcReport {
    double max_ratio = 0.0;
    std::vector<QcViolation> violations;
    /// Sample indices where |re f_z| < 1e-12.
    std::vector<std::size_t> degenerate_denominators;
    std::vector<std::size_t> seam_samples;
};

/// Samples |f_zbar| / re f_z against k. A ratio above k + slack, or re f_z <= 0, is a violation.
ReducedQcReport reduced_qc_report(const FieldDescriptor& field, std::span<const ComplexPoint> samples,
                                  const QCParams& params, double step = 1e-5, double slack = 1e-6);

struct MonotonicityReport {
    double Delta = 0.0;
    /// Unset when f(a) = f(b).
    std::optional<double> delta;
    ComplexPoint a;
    ComplexPoint b;
};

/// Delta_f(a,b) = <f(a) - f(b), (a - b)/|a - b|> and its normalization by |f(a) - f(b)|.
MonotonicityReport monotonicity(const FieldDescriptor& field, ComplexPoint a, ComplexPoint b);

struct FamilyReport {
    ComplexPoint f0;
    double re_f1 = 0.0;
    double abs_f1 = 0.0;
    bool pass = false;
};

/// Checks f(0) = 0, re f(1) = 1 and 1 <= |f(1)| <= d. Throws NotNormalizable if re f(1) <= 0.
FamilyReport family_membership(const FieldDescriptor& field, const QCParams& params);

struct GrowthSample {
    ComplexPoint x;
    double m_K = 0.0;
    double Delta = 0.0;
    double M_K = 0.0;
    double abs_f = 0.0;
    double d_M_K = 0.0;
    double delta = 0.0;
    double delta_lower = 0.0;
    bool delta_ok = false;  ///< m_K(|x|) <= Delta_f(x,0) <= M_K(|x|)
    bool abs_ok = false;    ///< m_K(|x|) <= |f(x)| <= d M_K(|x|)
    bool ratio_ok = false;  ///< delta_f(x,0) >= m_K / (d M_K)
};

struct GrowthReport {
    std::vector<GrowthSample> samples;
    /// Pass/fail is meaningful only when the moduli are exact (K = 1, C_K = 1).
    bool asserted = false;
    std::size_t flagged = 0;
    bool pass = true;
};

GrowthReport growth_bounds_check(const FieldDescriptor& field, const QCParams& params,
                                 std::span<const ComplexPoint> samples);

}  // namespace qcflow
