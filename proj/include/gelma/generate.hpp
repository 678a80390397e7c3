#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gelma/numeric_core.hpp"

namespace gelma {

/// Seeded random instance: A with i.i.d. N(0, 1) entries and a k-sparse
/// planted x̄ (uniform random support, magnitudes U[0.5, 1.5], random signs),
/// y = Ax̄. τ is set to ‖Aᵀy‖_∞ (1 when y = 0) and Δt to the default GeLMA step.
inline ProblemInstance generate_random_problem(Index m, Index n, Index k, std::uint64_t seed) {
    if (m < 1 || n < 1 || k < 0 || k > m || m > n)
        throw PreconditionError("generate: require 0 <= k <= m <= n and m >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(0.5, 1.5);
    std::bernoulli_distribution coin(0.5);

    ProblemInstance p;
    p.A.resize(m, n);
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < n; ++c) p.A(r, c) = normal(rng);

    // Partial Fisher-Yates for the support.
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < k; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
    }
    Vector xbar = Vector::Zero(n);
    for (Index i = 0; i < k; ++i) {
        const double mag = magnitude(rng);
        xbar[order[static_cast<std::size_t>(i)]] = coin(rng) ? mag : -mag;
    }

    p.y = p.A * xbar;
    p.reference_x = xbar;
    const double scale = tau_scale(p.A, p.y);
    p.tau = scale > 0.0 ? scale : 1.0;
    p.dt = default_gelma_step(spectral_norm(p.A));
    return p;
}

} // namespace gelma
