#include "qcflow/moduli.hpp"

#include <algorithm>
#include <cmath>

#include "qcflow/error.hpp"

namespace qcflow {

QCParams::QCParams(double K_, double d_, double C_K_) : K(K_), d(d_), C_K(C_K_) {
    if (!(K >= 1.0) || !(d >= 1.0) || !(C_K > 0.0)) {
        throw QcError(ErrorCode::InvalidArgument, "QCParams needs K >= 1, d >= 1, C_K > 0");
    }
}

QCParams QCParams::from_k(double k, double d, double C_K) {
    if (!(k >= 0.0 && k < 1.0)) throw QcError(ErrorCode::InvalidArgument, "k must lie in [0, 1)");
    return QCParams((1.0 + k) / (1.0 - k), d, C_K);
}

double quasisymmetry_M(const QCParams& params, double t) {
    if (!(t >= 0.0)) throw QcError(ErrorCode::InvalidArgument, "quasisymmetry_M needs t >= 0");
    return params.C_K * std::max(std::pow(t, params.K), std::pow(t, 1.0 / params.K));
}

double quasisymmetry_m(const QCParams& params, double t) {
    if (!(t >= 0.0)) throw QcError(ErrorCode::InvalidArgument, "quasisymmetry_m needs t >= 0");
    if (t == 0.0) return 0.0;
    return std::min(std::pow(t, params.K), std::pow(t, 1.0 / params.K)) / params.C_K;
}

}  // namespace qcflow
