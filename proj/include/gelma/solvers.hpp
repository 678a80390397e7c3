#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gelma/numeric_core.hpp"
#include "gelma/prox_ops.hpp"

namespace gelma {

/// Stop when max_iter steps are taken, or when both the successive change
/// ‖x_{k+1} − x_k‖ and the residual ‖y − Ax_{k+1}‖ are within tolerance.
struct StopRule {
    std::size_t max_iter = 10000;
    double tol_change = 1e-12;
    double tol_residual = 1e-10;
    std::size_t record_every = 1;
};

struct HistoryRow {
    std::size_t k = 0;
    double objective = 0.0;  // τ‖x‖₁ + ½‖y − Ax‖²
    double residual = 0.0;   // ‖y − Ax‖
    std::optional<double> err_vs_ref;
    double l1_norm = 0.0;
};

enum class StopReason { max_iter, tolerance };

inline const char* to_string(StopReason r) {
    return r == StopReason::max_iter ? "max_iter" : "tolerance";
}

struct SolverRun {
    Vector x;
    std::optional<Vector> z;  // multiplier, absent for ISTA/FISTA
    std::vector<HistoryRow> history;
    StopReason stop_reason = StopReason::max_iter;
    std::size_t iterations = 0;
};

/// Optional warm start and cached ‖A‖ shared by all solvers.
struct SolveOptions {
    std::optional<Vector> x0;
    std::optional<Vector> z0;
    std::optional<double> norm_A;
};

/// Relaxed objective τ‖x‖₁ + ½‖y − Ax‖².
inline double relaxed_objective(const RealMatrix& A, const Vector& y, double tau, const Vector& x) {
    return tau * l1_norm(x) + 0.5 * (y - A * x).squaredNorm();
}

namespace detail {

inline void validate_stop(const StopRule& stop) {
    if (stop.max_iter < 1) throw PreconditionError("stop rule: max_iter must be >= 1");
    if (stop.record_every < 1) throw PreconditionError("stop rule: record_every must be >= 1");
    if (!(stop.tol_change >= 0.0) || !(stop.tol_residual >= 0.0))
        throw PreconditionError("stop rule: tolerances must be nonnegative");
}

inline HistoryRow make_row(const ProblemInstance& p, std::size_t k, const Vector& x) {
    HistoryRow row;
    row.k = k;
    row.residual = (p.y - p.A * x).norm();
    row.l1_norm = l1_norm(x);
    row.objective = p.tau * row.l1_norm + 0.5 * row.residual * row.residual;
    if (p.reference_x) row.err_vs_ref = (x - *p.reference_x).norm();
    return row;
}

inline double norm_of(const ProblemInstance& p, const SolveOptions& opt) {
    return opt.norm_A ? *opt.norm_A : spectral_norm(p.A);
}

inline Vector start_x(const ProblemInstance& p, const SolveOptions& opt) {
    if (!opt.x0) return Vector::Zero(p.n());
    require_dims(opt.x0->size() == p.n(), "warm start x0 has wrong length");
    return *opt.x0;
}

inline Vector start_z(const ProblemInstance& p, const SolveOptions& opt) {
    if (!opt.z0) return Vector::Zero(p.m());
    require_dims(opt.z0->size() == p.m(), "warm start z0 has wrong length");
    return *opt.z0;
}

// Drives a one-step map until the stop rule fires, recording history.
// `step` advances the state and returns the new primal iterate.
template <class Step>
SolverRun run_loop(const ProblemInstance& p, const StopRule& stop, Vector x, Step&& step,
                   const char* name) {
    SolverRun run;
    run.history.push_back(make_row(p, 0, x));
    std::size_t k = 0;
    while (k < stop.max_iter) {
        Vector next = step(x, k);
        if (!next.allFinite())
            throw DivergenceError(std::string(name) + ": non-finite iterate at step " +
                                      std::to_string(k + 1),
                                  k);
        const double change = (next - x).norm();
        x = std::move(next);
        ++k;
        const double residual = (p.y - p.A * x).norm();
        const bool done = change <= stop.tol_change && residual <= stop.tol_residual;
        if (k % stop.record_every == 0 || done || k == stop.max_iter)
            run.history.push_back(make_row(p, k, x));
        if (done) {
            run.stop_reason = StopReason::tolerance;
            break;
        }
    }
    run.x = std::move(x);
    run.iterations = k;
    return run;
}

} // namespace detail

// ---------------------------------------------------------------------------
// GeLMA
// ---------------------------------------------------------------------------

/// Generalized Lagrangian multiplier algorithm:
///
///   x_{k+1} = η_{τΔt}(x_k + Δt·Aᵀ(z_k + y − Ax_k))
///   z_{k+1} = z_k + Δt·(y − Ax_k)
///
/// Requires Δt·‖A‖ < 1. The limit solves min ‖x‖₁ s.t. Ax = y for every τ > 0.
inline SolverRun gelma_solve(const ProblemInstance& p, const StopRule& stop,
                             const SolveOptions& opt = {}) {
    validate(p);
    detail::validate_stop(stop);
    const double norm_A = detail::norm_of(p, opt);
    if (!(p.dt * norm_A < 1.0))
        throw StepSizeError("gelma: step violates dt * ||A|| < 1 (||A|| = " +
                                std::to_string(norm_A) + ", dt = " + std::to_string(p.dt) + ")",
                            norm_A);

    Vector z = detail::start_z(p, opt);
    const double threshold = p.tau * p.dt;
    auto step = [&](const Vector& x, std::size_t k) {
        const Vector r = p.y - p.A * x;
        Vector next = soft_threshold(x + p.dt * (p.A.transpose() * (z + r)), threshold);
        z += p.dt * r;
        if (!z.allFinite())
            throw DivergenceError("gelma: non-finite multiplier at step " + std::to_string(k + 1), k);
        return next;
    };
    SolverRun run = detail::run_loop(p, stop, detail::start_x(p, opt), step, "gelma");
    run.z = std::move(z);
    return run;
}

// ---------------------------------------------------------------------------
// Fully implicit scheme
// ---------------------------------------------------------------------------

struct ImplicitStep {
    Vector x;
    Vector z;
    Vector xi;  // element of ∂‖x‖₁ realizing the step
    std::size_t inner_iterations = 0;
    double inclusion_residual = 0.0;
};

namespace detail {

// Componentwise distance of ξ to the sign set of x (support = exact nonzeros).
inline double sign_set_distance(const Vector& xi, const Vector& x) {
    double worst = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        const double d = x[i] != 0.0 ? std::abs(xi[i] - (x[i] > 0.0 ? 1.0 : -1.0))
                                     : std::max(0.0, std::abs(xi[i]) - 1.0);
        worst = std::max(worst, d);
    }
    return worst;
}

} // namespace detail

/// One step of the implicit scheme
///
///   (x⁺ − x)/Δt = −τξ⁺ + Aᵀ(z⁺ + y − Ax⁺),   ξ⁺ ∈ ∂‖x⁺‖₁
///   (z⁺ − z)/Δt = y − Ax⁺.
///
/// Eliminating z⁺ leaves the strongly convex problem
///   min τΔt‖u‖₁ + ½‖u − x − ΔtAᵀz‖² + ½Δt(1+Δt)‖y − Au‖²,
/// solved by accelerated proximal gradient (modulus 1, constant momentum)
/// warm-started at x. Stops when ξ⁺ is within tol_inner of the sign set.
inline ImplicitStep implicit_step(const ProblemInstance& p, const Vector& x, const Vector& z,
                                  double norm_A, double tol_inner, std::size_t max_inner) {
    const double dt = p.dt;
    const double beta = dt * (1.0 + dt);
    const double weight = p.tau * dt;
    const double lipschitz = 1.0 + beta * norm_A * norm_A;
    const double momentum = (std::sqrt(lipschitz) - 1.0) / (std::sqrt(lipschitz) + 1.0);
    const Vector center = x + dt * (p.A.transpose() * z);

    auto smooth_grad = [&](const Vector& u) -> Vector {
        return (u - center) - beta * (p.A.transpose() * (p.y - p.A * u));
    };

    Vector u = x;
    Vector u_prev = x;
    ImplicitStep out;
    for (std::size_t it = 1; it <= max_inner; ++it) {
        const Vector w = u + momentum * (u - u_prev);
        Vector next = soft_threshold(w - smooth_grad(w) / lipschitz, weight / lipschitz);
        u_prev = std::move(u);
        u = std::move(next);
        if (!u.allFinite()) throw DivergenceError("implicit step: non-finite inner iterate", it);

        Vector xi = -smooth_grad(u) / weight;
        const double dist = detail::sign_set_distance(xi, u);
        if (dist <= tol_inner) {
            out.x = u;
            out.z = z + dt * (p.y - p.A * u);
            out.xi = std::move(xi);
            out.inner_iterations = it;
            out.inclusion_residual = dist;
            return out;
        }
    }
    throw ConvergenceError("implicit step: inner solve did not converge within max_inner",
                           l1_norm(u), detail::sign_set_distance(-smooth_grad(u) / weight, u));
}

/// Fully implicit scheme; unconditionally stable for any Δt > 0.
inline SolverRun implicit_gelma_solve(const ProblemInstance& p, const StopRule& stop,
                                      double tol_inner = 1e-10, std::size_t max_inner = 10000,
                                      const SolveOptions& opt = {}) {
    validate(p);
    detail::validate_stop(stop);
    if (!(tol_inner > 0.0)) throw PreconditionError("implicit: tol_inner must be positive");
    if (max_inner < 1) throw PreconditionError("implicit: max_inner must be >= 1");
    const double norm_A = detail::norm_of(p, opt);

    Vector z = detail::start_z(p, opt);
    auto step = [&](const Vector& x, std::size_t) {
        ImplicitStep s = implicit_step(p, x, z, norm_A, tol_inner, max_inner);
        z = std::move(s.z);
        return std::move(s.x);
    };
    SolverRun run = detail::run_loop(p, stop, detail::start_x(p, opt), step, "implicit");
    run.z = std::move(z);
    return run;
}

/// Implicit step for the scalar toy flow ṙ = −ξ, ξ ∈ sgn(r):
/// r⁺ = r − Δt·ξ⁺ with ξ⁺ = r/Δt inside the band |r| ≤ Δt and sign(r) outside.
inline double scalar_implicit_step(double r, double dt) {
    if (!(dt > 0.0)) throw PreconditionError("scalar_implicit_step: dt must be positive");
    if (std::abs(r) <= dt) return 0.0;  // ξ⁺ = r/Δt lies in [−1, 1] and cancels r exactly
    const double xi = r > 0.0 ? 1.0 : -1.0;
    return r > 0.0 ? r - dt * xi : r + dt * -xi;
}

// ---------------------------------------------------------------------------
// ISTA / FISTA
// ---------------------------------------------------------------------------

/// x_{k+1} = η_{τh}(x_k − h·Aᵀ(Ax_k − y)); requires h‖A‖² < 2.
inline SolverRun ista_solve(const ProblemInstance& p, const StopRule& stop,
                            std::optional<double> h = std::nullopt, const SolveOptions& opt = {}) {
    validate(p);
    detail::validate_stop(stop);
    const double norm_A = detail::norm_of(p, opt);
    const double step = h ? *h : default_gradient_step(norm_A);
    if (!(step > 0.0) || !(step * norm_A * norm_A < 2.0))
        throw StepSizeError("ista: step violates h * ||A||^2 < 2", norm_A);

    const double threshold = p.tau * step;
    auto iterate = [&](const Vector& x, std::size_t) {
        const Vector grad = p.A.transpose() * (p.A * x - p.y);
        return soft_threshold(x - step * grad, threshold);
    };
    return detail::run_loop(p, stop, detail::start_x(p, opt), iterate, "ista");
}

/// Momentum recursion t_{k+1} = (1 + √(1 + 4t_k²))/2.
inline double fista_momentum(double t) { return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0; }

/// Accelerated proximal gradient with fixed step h (h‖A‖² ≤ 1) and t₁ = 1:
///
///   x_k     = η_{τh}(ξ_k − h∇f(ξ_k))
///   ξ_{k+1} = x_k + ((t_k − 1)/t_{k+1})(x_k − x_{k−1})
inline SolverRun fista_solve(const ProblemInstance& p, const StopRule& stop,
                             std::optional<double> h = std::nullopt, const SolveOptions& opt = {}) {
    validate(p);
    detail::validate_stop(stop);
    const double norm_A = detail::norm_of(p, opt);
    const double step = h ? *h : default_gradient_step(norm_A);
    if (!(step > 0.0) || !(step * norm_A * norm_A <= 1.0 + 1e-12))
        throw StepSizeError("fista: step violates h * ||A||^2 <= 1", norm_A);

    const double threshold = p.tau * step;
    Vector extrapolated = detail::start_x(p, opt);
    double t = 1.0;
    auto iterate = [&](const Vector& x_prev, std::size_t) {
        const Vector grad = p.A.transpose() * (p.A * extrapolated - p.y);
        Vector x = soft_threshold(extrapolated - step * grad, threshold);
        const double t_next = fista_momentum(t);
        extrapolated = x + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
        return x;
    };
    return detail::run_loop(p, stop, detail::start_x(p, opt), iterate, "fista");
}

// ---------------------------------------------------------------------------
// Optimality certificate
// ---------------------------------------------------------------------------

struct CertificateViolation {
    Index index = 0;
    double value = 0.0;  // |[Aᵀz]_i − τ·sign(x_i)|
};

struct CertificateReport {
    std::vector<CertificateViolation> on_support_violations;
    double off_support_max = 0.0;  // max |[Aᵀz]_i| off the support
    bool pass = false;
};

/// Checks [Aᵀz]_i = τ·sign(x_i) on the support of x and |[Aᵀz]_i| ≤ τ off it,
/// both to within tol. The support is {i : |x_i| > tol}.
inline CertificateReport certificate_check(const RealMatrix& A, const Vector& x, const Vector& z,
                                           double tau, double tol) {
    detail::require_dims(x.size() == A.cols(), "certificate: x length must equal columns of A");
    detail::require_dims(z.size() == A.rows(), "certificate: z length must equal rows of A");
    const Vector corr = A.transpose() * z;
    CertificateReport report;
    for (Index i = 0; i < x.size(); ++i) {
        if (std::abs(x[i]) > tol) {
            const double dev = std::abs(corr[i] - tau * (x[i] > 0.0 ? 1.0 : -1.0));
            if (dev > tol) report.on_support_violations.push_back({i, dev});
        } else {
            report.off_support_max = std::max(report.off_support_max, std::abs(corr[i]));
        }
    }
    report.pass = report.on_support_violations.empty() && report.off_support_max <= tau + tol;
    return report;
}

} // namespace gelma
