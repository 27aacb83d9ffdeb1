#pragma once

namespace qcflow {

/// Distortion and normalization constants of the family F_K(d).
/// C_K is the (unknown in general) quasisymmetry constant; it defaults to 1
/// and every bound depending on it is reported as a ratio.
struct QCParams {
    double K = 1.0;
    double d = 1.0;
    double C_K = 1.0;

    QCParams() = default;
    QCParams(double K_, double d_, double C_K_ = 1.0);

    /// Beltrami bound k = (K - 1) / (K + 1).
    double k() const noexcept { return (K - 1.0) / (K + 1.0); }

    /// Distortion K recovered from a Beltrami bound k in [0, 1).
    static QCParams from_k(double k, double d = 1.0, double C_K = 1.0);
};

/// M_K(t) = C_K max(t^K, t^(1/K)), t >= 0.
double quasisymmetry_M(const QCParams& params, double t);

/// m_K(t) = 1 / M_K(1/t) = C_K^-1 min(t^K, t^(1/K)); m_K(0) = 0.
double quasisymmetry_m(const QCParams& params, double t);

}  // namespace qcflow
