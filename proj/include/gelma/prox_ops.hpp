#pragma once

#include <cmath>

#include "gelma/numeric_core.hpp"

namespace gelma {

/// Regularization width ε of the smoothed sign and absolute value.
class EpsParam {
public:
    explicit EpsParam(double eps) : eps_(eps) {
        if (!(eps > 0.0) || !std::isfinite(eps)) throw PreconditionError("eps must be positive");
    }
    double value() const noexcept { return eps_; }

private:
    double eps_;
};

/// Shrinkage-thresholding η_a(v). |v| = a maps to exactly 0.
inline double soft_threshold(double v, double a) {
    if (v > a) return v - a;
    if (v < -a) return v + a;
    return 0.0;
}

inline Vector soft_threshold(const Vector& v, double a) {
    if (!(a >= 0.0)) throw PreconditionError("soft_threshold: threshold must be nonnegative");
    Vector out(v.size());
    for (Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], a);
    return out;
}

/// G_ε: the sign function with a linear ramp on [−ε, ε].
inline double g_eps(double s, EpsParam eps) {
    const double e = eps.value();
    if (s > e) return 1.0;
    if (s < -e) return -1.0;
    return s / e;
}

inline Vector g_eps(const Vector& x, EpsParam eps) {
    return x.unaryExpr([eps](double s) { return g_eps(s, eps); });
}

/// Huber function r_ε; its derivative is G_ε.
inline double huber(double s, EpsParam eps) {
    const double e = eps.value();
    const double a = std::abs(s);
    return a >= e ? a : s * s / (2.0 * e) + e / 2.0;
}

/// Σ r_ε(x_j). Lies between ‖x‖₁ and ‖x‖₁ + nε/2; not a norm.
inline double l1_eps(const Vector& x, EpsParam eps) {
    double sum = 0.0;
    for (Index i = 0; i < x.size(); ++i) sum += huber(x[i], eps);
    return sum;
}

/// Componentwise membership ξ ∈ ∂‖x‖₁ with tolerance.
inline bool in_subdifferential(const Vector& xi, const Vector& x, double tol) {
    detail::require_dims(xi.size() == x.size(), "in_subdifferential: length mismatch");
    for (Index i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) > tol) {
            const double sgn = x[i] > 0.0 ? 1.0 : -1.0;
            if (std::abs(xi[i] - sgn) > tol) return false;
        } else if (std::abs(xi[i]) > 1.0 + tol) {
            return false;
        }
    }
    return true;
}

} // namespace gelma
