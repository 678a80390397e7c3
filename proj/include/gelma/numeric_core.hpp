#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "gelma/errors.hpp"

namespace gelma {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

inline void require_dims(bool ok, const std::string& what) {
    if (!ok) throw DimensionError(what);
}

template <class Derived>
bool all_finite(const Eigen::DenseBase<Derived>& v) {
    return v.allFinite();
}

} // namespace detail

// ---------------------------------------------------------------------------
// Spectral norm
// ---------------------------------------------------------------------------

struct SpectralNormOptions {
    double tol = 1e-12;
    std::size_t max_iter = 100000;
};

/// Largest singular value of A by power iteration on AᵀA.
///
/// The seed is the normalized all-ones vector, so the result is bit-reproducible.
/// Convergence is declared when the Rayleigh residual ‖AᵀAv − λv‖ falls below
/// tol·λ. If the all-ones seed lies in the null space of A, the unit vectors
/// e_0, e_1, ... are tried in order.
inline double spectral_norm(const RealMatrix& A, const SpectralNormOptions& opt = {}) {
    if (A.rows() < 1 || A.cols() < 1) throw DimensionError("spectral_norm: empty matrix");
    if (!(opt.tol > 0.0)) throw PreconditionError("spectral_norm: tol must be positive");
    if (A.cwiseAbs().maxCoeff() == 0.0) throw PreconditionError("spectral_norm: zero matrix");

    const Index n = A.cols();
    Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
    Vector w = A.transpose() * (A * v);
    for (Index j = 0; w.norm() == 0.0 && j < n; ++j) {
        v = Vector::Unit(n, j);
        w = A.transpose() * (A * v);
    }

    double lambda = v.dot(w);
    double residual = (w - lambda * v).norm();
    for (std::size_t it = 0; it < opt.max_iter; ++it) {
        if (residual <= opt.tol * lambda) return std::sqrt(lambda);
        v = w / w.norm();
        w = A.transpose() * (A * v);
        lambda = v.dot(w);
        residual = (w - lambda * v).norm();
    }
    if (residual <= opt.tol * lambda) return std::sqrt(lambda);
    throw ConvergenceError("spectral_norm: power iteration did not converge", std::sqrt(lambda),
                           residual);
}

// ---------------------------------------------------------------------------
// Complex-to-real embedding
// ---------------------------------------------------------------------------

struct RealSystem {
    RealMatrix A;
    Vector y;
};

/// Stacks Re over Im: A_r = [Re Ac; Im Ac], y_r = [Re bc; Im bc].
///
/// For real x, ‖A_r x − y_r‖² = ‖Ac x − bc‖², and A_rᵀ y_r = Re(Ac* bc).
inline RealSystem realify(const ComplexMatrix& Ac, const ComplexVector& bc) {
    detail::require_dims(Ac.rows() == bc.size(), "realify: data length must equal matrix rows");
    const Index N = Ac.rows();
    const Index K = Ac.cols();
    RealSystem out{RealMatrix(2 * N, K), Vector(2 * N)};
    out.A.topRows(N) = Ac.real();
    out.A.bottomRows(N) = Ac.imag();
    out.y.head(N) = bc.real();
    out.y.tail(N) = bc.imag();
    return out;
}

/// ‖Aᵀy‖_∞, the natural scale of the ℓ1 weight τ.
inline double tau_scale(const RealMatrix& A, const Vector& y) {
    detail::require_dims(A.rows() == y.size(), "tau_scale: y length must equal rows of A");
    const Vector g = A.transpose() * y;
    return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Problem container
// ---------------------------------------------------------------------------

/// Minimize ‖x‖₁ subject to Ax = y, with solver weight τ and step Δt.
struct ProblemInstance {
    RealMatrix A;
    Vector y;
    double tau = 1.0;
    double dt = 1.0;
    std::optional<Vector> reference_x;

    Index m() const { return A.rows(); }
    Index n() const { return A.cols(); }
};

/// Checks shapes, finiteness and positivity; m ≤ n is required.
inline void validate(const ProblemInstance& p) {
    if (p.A.rows() < 1 || p.A.cols() < 1) throw DimensionError("problem: A must be non-empty");
    detail::require_dims(p.y.size() == p.A.rows(), "problem: y length must equal rows of A");
    if (p.A.rows() > p.A.cols())
        throw DimensionError("problem: system must be underdetermined or square (m <= n)");
    if (p.reference_x)
        detail::require_dims(p.reference_x->size() == p.A.cols(),
                             "problem: reference_x length must equal columns of A");
    if (!detail::all_finite(p.A) || !detail::all_finite(p.y))
        throw PreconditionError("problem: non-finite entries");
    if (p.reference_x && !detail::all_finite(*p.reference_x))
        throw PreconditionError("problem: non-finite reference_x");
    if (!(p.tau > 0.0) || !std::isfinite(p.tau)) throw PreconditionError("problem: tau must be positive");
    if (!(p.dt > 0.0) || !std::isfinite(p.dt)) throw PreconditionError("problem: dt must be positive");
}

/// Numerical full-row-rank test: λ_min(AAᵀ) > rel_threshold · λ_max(AAᵀ).
inline bool has_full_row_rank(const RealMatrix& A, double rel_threshold = 1e-10) {
    if (A.rows() > A.cols()) return false;
    const Eigen::MatrixXd gram = A * A.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const double lmax = ev.maxCoeff();
    return lmax > 0.0 && ev.minCoeff() > rel_threshold * lmax;
}

inline void require_full_row_rank(const RealMatrix& A, double rel_threshold = 1e-10) {
    if (!has_full_row_rank(A, rel_threshold))
        throw PreconditionError("A does not have full row rank");
}

/// Default GeLMA step: 0.9 / max(1, ‖A‖²).
///
/// Always satisfies Δt·‖A‖ < 1. The extra caps (Δt < 1, Δt‖A‖² < 2) are the
/// stability conditions of the linearized multiplier iteration.
inline double default_gelma_step(double norm_A) { return 0.9 / std::max(1.0, norm_A * norm_A); }

/// Default gradient step 1/‖A‖² for ISTA and FISTA.
inline double default_gradient_step(double norm_A) { return 1.0 / (norm_A * norm_A); }

inline double l1_norm(const Vector& x) { return x.cwiseAbs().sum(); }

} // namespace gelma
