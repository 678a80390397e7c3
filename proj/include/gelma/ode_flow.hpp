#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>

#include "gelma/numeric_core.hpp"
#include "gelma/prox_ops.hpp"

namespace gelma {

struct OdeState {
    Vector x;
    Vector z;
    double t = 0.0;
};

struct OdeConfig {
    double eps = 1e-3;
    double dt_ode = 0.0;  // 0 selects half the stability cap
    double t_final = 1.0;
    std::size_t observe_every = 1;
};

struct OdeRhs {
    Vector dx;
    Vector dz;
};

/// Right side of the regularized flow
///   ẋ = −τ·G_ε(x) + Aᵀ(z + y − Ax),   ż = y − Ax.
inline OdeRhs ode_rhs(const OdeState& s, const ProblemInstance& p, EpsParam eps) {
    detail::require_dims(s.x.size() == p.n() && s.z.size() == p.m(),
                         "ode_rhs: state dimensions do not match the problem");
    const Vector r = p.y - p.A * s.x;
    OdeRhs out;
    out.dx = -p.tau * g_eps(s.x, eps) + p.A.transpose() * (s.z + r);
    out.dz = r;
    return out;
}

/// Explicit-Euler stability cap 0.5·min(ε/τ, 1/(1 + ‖A‖²)).
inline double ode_stability_cap(double eps, double tau, double norm_A) {
    return 0.5 * std::min(eps / tau, 1.0 / (1.0 + norm_A * norm_A));
}

struct OdeTrajectory {
    OdeState final_state;
    std::size_t steps = 0;
    std::size_t observations = 0;
    double dt_ode = 0.0;
};

using OdeObserver = std::function<void(const OdeState&)>;

/// Fixed-step explicit Euler from (x₀, 0). The observer sees t = 0, every
/// observe_every-th step, and the final state. A final partial step lands
/// exactly on t_final.
inline OdeTrajectory integrate(const ProblemInstance& p, const OdeConfig& cfg,
                               const OdeObserver& observer = {},
                               std::optional<Vector> x0 = std::nullopt,
                               std::optional<double> norm_A = std::nullopt) {
    validate(p);
    const EpsParam eps(cfg.eps);
    if (!(cfg.t_final >= 0.0) || !std::isfinite(cfg.t_final))
        throw PreconditionError("integrate: t_final must be nonnegative");
    if (cfg.observe_every < 1) throw PreconditionError("integrate: observe_every must be >= 1");
    const double norm = norm_A ? *norm_A : spectral_norm(p.A);
    const double cap = ode_stability_cap(cfg.eps, p.tau, norm);
    const double h = cfg.dt_ode > 0.0 ? cfg.dt_ode : 0.5 * cap;
    if (h > cap * (1.0 + 1e-12))
        throw StepSizeError("integrate: dt_ode exceeds the explicit stability cap " +
                                std::to_string(cap),
                            norm);

    OdeState s;
    if (x0) {
        detail::require_dims(x0->size() == p.n(), "integrate: x0 has wrong length");
        s.x = *x0;
    } else {
        s.x = Vector::Zero(p.n());
    }
    s.z = Vector::Zero(p.m());

    OdeTrajectory out;
    out.dt_ode = h;
    auto observe = [&] {
        if (observer) observer(s);
        ++out.observations;
    };
    observe();

    const auto full_steps = static_cast<std::size_t>(std::floor(cfg.t_final / h));
    const double remainder = cfg.t_final - static_cast<double>(full_steps) * h;
    const std::size_t total = full_steps + (remainder > 1e-12 * h ? 1 : 0);
    for (std::size_t k = 1; k <= total; ++k) {
        const double step = k <= full_steps ? h : remainder;
        const OdeRhs f = ode_rhs(s, p, eps);
        s.x += step * f.dx;
        s.z += step * f.dz;
        s.t = k <= full_steps ? static_cast<double>(k) * h : cfg.t_final;
        if (!s.x.allFinite() || !s.z.allFinite())
            throw DivergenceError("integrate: non-finite state at t = " + std::to_string(s.t), k - 1);
        if (k % cfg.observe_every == 0 || k == total) observe();
    }
    out.steps = total;
    out.final_state = std::move(s);
    return out;
}

/// E = ‖ẋ‖² + ‖A(x − x̄)‖², with ẋ from the regularized right side.
/// Non-increasing along exact trajectories.
inline double lyapunov_energy(const OdeState& s, const ProblemInstance& p, const Vector& xbar,
                              EpsParam eps) {
    detail::require_dims(xbar.size() == p.n(), "lyapunov_energy: xbar has wrong length");
    if ((p.A * xbar - p.y).norm() > 1e-8)
        throw PreconditionError("lyapunov_energy: xbar is not feasible");
    const OdeRhs f = ode_rhs(s, p, eps);
    return f.dx.squaredNorm() + (p.A * (s.x - xbar)).squaredNorm();
}

/// F(x, z) = τ‖x‖₁ + ½‖Ax − y‖² + ⟨z, y − Ax⟩.
inline double minmax_F(const Vector& x, const Vector& z, const ProblemInstance& p) {
    detail::require_dims(x.size() == p.n() && z.size() == p.m(),
                         "minmax_F: dimensions do not match the problem");
    const Vector r = p.y - p.A * x;
    return p.tau * l1_norm(x) + 0.5 * r.squaredNorm() + z.dot(r);
}

} // namespace gelma
