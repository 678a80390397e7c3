#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gelma/numeric_core.hpp"

namespace gelma {

struct OracleWitness {
    std::vector<Index> support;
    Vector x;
};

struct OracleResult {
    Vector x_star;
    double value = 0.0;  // ‖x_star‖₁
    bool unique = false;
    std::vector<OracleWitness> witnesses;
};

struct OracleLimits {
    Index max_n = 24;
    Index max_m = 6;
};

/// Exact minimizer of ‖x‖₁ subject to Ax = y by support enumeration.
///
/// Every subset S of columns with |S| ≤ m is tried; A_S u = y is solved by
/// least squares and kept when the residual is within 1e-9·(1 + ‖y‖). Basic
/// feasible solutions of the equivalent linear program have at most m
/// nonzeros, so the minimum over kept candidates is the global minimum.
/// Subsets are visited in a fixed order, so ties resolve deterministically.
inline OracleResult brute_force_l1(const RealMatrix& A, const Vector& y, double tie_tol = 1e-7,
                                   const OracleLimits& limits = {}) {
    detail::require_dims(A.rows() == y.size(), "oracle: y length must equal rows of A");
    if (!(tie_tol > 0.0)) throw PreconditionError("oracle: tie_tol must be positive");
    const Index m = A.rows();
    const Index n = A.cols();
    if (n > limits.max_n || m > limits.max_m)
        throw BudgetError("oracle: instance exceeds the enumeration budget (n <= " +
                          std::to_string(limits.max_n) + ", m <= " + std::to_string(limits.max_m) +
                          ")");
    require_full_row_rank(A);

    const double accept = 1e-9 * (1.0 + y.norm());
    std::vector<OracleWitness> feasible;
    double best = std::numeric_limits<double>::infinity();

    auto consider = [&](const std::vector<Index>& support) {
        Vector x = Vector::Zero(n);
        if (!support.empty()) {
            Eigen::MatrixXd sub(m, static_cast<Index>(support.size()));
            for (std::size_t c = 0; c < support.size(); ++c) sub.col(static_cast<Index>(c)) = A.col(support[c]);
            const Vector u = sub.completeOrthogonalDecomposition().solve(y);
            for (std::size_t c = 0; c < support.size(); ++c) x[support[c]] = u[static_cast<Index>(c)];
        }
        if ((A * x - y).norm() > accept) return;
        const double value = l1_norm(x);
        if (value > best + tie_tol) return;
        best = std::min(best, value);
        feasible.push_back({support, std::move(x)});
    };

    // Lexicographic enumeration of all subsets of size 0..m.
    std::vector<Index> subset;
    consider(subset);
    for (Index size = 1; size <= std::min(m, n); ++size) {
        subset.resize(static_cast<std::size_t>(size));
        for (Index i = 0; i < size; ++i) subset[static_cast<std::size_t>(i)] = i;
        while (true) {
            consider(subset);
            Index pos = size - 1;
            while (pos >= 0 && subset[static_cast<std::size_t>(pos)] == n - size + pos) --pos;
            if (pos < 0) break;
            ++subset[static_cast<std::size_t>(pos)];
            for (Index j = pos + 1; j < size; ++j)
                subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j - 1)] + 1;
        }
    }

    if (feasible.empty()) throw InfeasibleError("oracle: no feasible candidate found");

    OracleResult result;
    result.value = best;
    for (auto& w : feasible)
        if (l1_norm(w.x) <= best + tie_tol) result.witnesses.push_back(std::move(w));

    // First witness attaining the minimum is the representative.
    for (const auto& w : result.witnesses)
        if (l1_norm(w.x) == best) {
            result.x_star = w.x;
            break;
        }

    result.unique = true;
    for (const auto& w : result.witnesses)
        if ((w.x - result.x_star).cwiseAbs().maxCoeff() > 1e-7) result.unique = false;
    return result;
}

struct ComparisonReport {
    double l2_err = 0.0;
    double linf_err = 0.0;
    double support_precision = 0.0;
    double support_recall = 0.0;
    bool pass = false;
};

/// Error of x against the oracle minimizer. Passing requires a unique oracle
/// minimizer and ‖x − x_star‖₂ ≤ tol; supports use threshold tol.
inline ComparisonReport compare_solutions(const Vector& x, const OracleResult& oracle, double tol) {
    detail::require_dims(x.size() == oracle.x_star.size(), "compare_solutions: length mismatch");
    ComparisonReport r;
    const Vector d = x - oracle.x_star;
    r.l2_err = d.norm();
    r.linf_err = d.size() ? d.cwiseAbs().maxCoeff() : 0.0;

    std::size_t found = 0, truth = 0, hits = 0;
    for (Index i = 0; i < x.size(); ++i) {
        const bool in_x = std::abs(x[i]) > tol;
        const bool in_star = std::abs(oracle.x_star[i]) > tol;
        found += in_x;
        truth += in_star;
        hits += in_x && in_star;
    }
    r.support_precision = found ? static_cast<double>(hits) / static_cast<double>(found) : 1.0;
    r.support_recall = truth ? static_cast<double>(hits) / static_cast<double>(truth) : 1.0;
    r.pass = oracle.unique && r.l2_err <= tol;
    return r;
}

} // namespace gelma
