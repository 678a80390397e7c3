#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "gelma/numeric_core.hpp"
#include "test_support.hpp"

using namespace gelma;
using gelma::fixtures::random_matrix;
using gelma::fixtures::random_vector;

namespace {

// Largest singular value of a 2×2 matrix from the characteristic polynomial of AᵀA.
double closed_form_sigma_max(const RealMatrix& A) {
    const double fro2 = A.squaredNorm();
    const double det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    return std::sqrt((fro2 + std::sqrt(fro2 * fro2 - 4.0 * det * det)) / 2.0);
}

ComplexMatrix random_complex(Index rows, Index cols, std::uint64_t seed) {
    const RealMatrix re = random_matrix(rows, cols, seed);
    const RealMatrix im = random_matrix(rows, cols, seed + 1000);
    ComplexMatrix out(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) out(r, c) = {re(r, c), im(r, c)};
    return out;
}

ComplexVector random_complex_vector(Index n, std::uint64_t seed) {
    const Vector re = random_vector(n, seed);
    const Vector im = random_vector(n, seed + 1000);
    ComplexVector out(n);
    for (Index i = 0; i < n; ++i) out[i] = {re[i], im[i]};
    return out;
}

// ‖Ac x − bc‖² with explicit complex arithmetic.
double complex_residual_sq(const ComplexMatrix& Ac, const ComplexVector& bc, const Vector& x) {
    double sum = 0.0;
    for (Index r = 0; r < Ac.rows(); ++r) {
        std::complex<double> acc = 0.0;
        for (Index c = 0; c < Ac.cols(); ++c) acc += Ac(r, c) * x[c];
        sum += std::norm(acc - bc[r]);
    }
    return sum;
}

} // namespace

TEST(SpectralNorm, Identity) {
    EXPECT_NEAR(spectral_norm(RealMatrix::Identity(3, 3)), 1.0, 1e-12);
}

TEST(SpectralNorm, Diagonal) {
    RealMatrix A = RealMatrix::Zero(2, 2);
    A(0, 0) = 3.0;
    A(1, 1) = 4.0;
    EXPECT_NEAR(spectral_norm(A), 4.0, 1e-10);
}

TEST(SpectralNorm, MatchesClosedForm2x2) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const RealMatrix A = random_matrix(2, 2, seed);
        EXPECT_NEAR(spectral_norm(A), closed_form_sigma_max(A), 1e-10) << "seed " << seed;
    }
}

TEST(SpectralNorm, AgreesWithSvd) {
    const RealMatrix A = random_matrix(20, 50, 3);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    EXPECT_NEAR(spectral_norm(A), svd.singularValues()[0], 1e-9 * svd.singularValues()[0]);
}

TEST(SpectralNorm, OnesSeedInNullSpace) {
    RealMatrix A(1, 2);
    A << 1.0, -1.0;
    EXPECT_NEAR(spectral_norm(A), std::sqrt(2.0), 1e-12);
}

TEST(SpectralNorm, Homogeneous) {
    const RealMatrix A = random_matrix(5, 9, 11);
    const double s = spectral_norm(A);
    for (double c : {-3.0, 0.25, 7.5}) {
        const RealMatrix cA = c * A;
        EXPECT_NEAR(spectral_norm(cA), std::abs(c) * s, 1e-10 * std::abs(c) * s);
    }
}

TEST(SpectralNorm, BoundsEveryProbe) {
    const RealMatrix A = random_matrix(6, 10, 5);
    const double s = spectral_norm(A);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Vector v = random_vector(10, 100 + seed);
        EXPECT_LE((A * v).norm() / v.norm(), s * (1.0 + 1e-12));
    }
}

TEST(SpectralNorm, Deterministic) {
    const RealMatrix A = random_matrix(7, 13, 21);
    EXPECT_EQ(spectral_norm(A), spectral_norm(A));
}

TEST(SpectralNorm, Errors) {
    EXPECT_THROW(spectral_norm(RealMatrix::Zero(2, 2)), PreconditionError);
    SpectralNormOptions opt;
    opt.max_iter = 1;
    opt.tol = 1e-15;
    try {
        spectral_norm(random_matrix(30, 40, 9), opt);
        FAIL() << "expected non-convergence";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.last_estimate(), 0.0);
        EXPECT_GT(e.residual(), 0.0);
    }
}

TEST(Realify, PureReal) {
    ComplexMatrix Ac(1, 1);
    Ac(0, 0) = {1.0, 0.0};
    ComplexVector bc(1);
    bc[0] = {1.0, 0.0};
    const auto sys = realify(Ac, bc);
    ASSERT_EQ(sys.A.rows(), 2);
    ASSERT_EQ(sys.A.cols(), 1);
    EXPECT_EQ(sys.A(0, 0), 1.0);
    EXPECT_EQ(sys.A(1, 0), 0.0);
    EXPECT_EQ(sys.y[0], 1.0);
    EXPECT_EQ(sys.y[1], 0.0);
}

TEST(Realify, PureImaginary) {
    ComplexMatrix Ac(1, 1);
    Ac(0, 0) = {0.0, 1.0};
    ComplexVector bc(1);
    bc[0] = {0.0, 1.0};
    const auto sys = realify(Ac, bc);
    EXPECT_EQ(sys.A(0, 0), 0.0);
    EXPECT_EQ(sys.A(1, 0), 1.0);
    EXPECT_EQ(sys.y[0], 0.0);
    EXPECT_EQ(sys.y[1], 1.0);
}

TEST(Realify, PreservesResidualNorm) {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        const ComplexMatrix Ac = random_complex(2, 3, seed);
        const ComplexVector bc = random_complex_vector(2, seed + 50);
        const Vector x = random_vector(3, seed + 77);
        const auto sys = realify(Ac, bc);
        const double real_sq = (sys.A * x - sys.y).squaredNorm();
        const double complex_sq = complex_residual_sq(Ac, bc, x);
        EXPECT_NEAR(real_sq, complex_sq, 1e-12 * (1.0 + bc.squaredNorm()));
    }
}

TEST(Realify, TransposeMatchesConjugateProduct) {
    const ComplexMatrix Ac = random_complex(4, 6, 8);
    const ComplexVector bc = random_complex_vector(4, 9);
    const auto sys = realify(Ac, bc);
    const Vector lhs = sys.A.transpose() * sys.y;
    const ComplexVector rhs = Ac.adjoint() * bc;
    for (Index i = 0; i < 6; ++i) EXPECT_NEAR(lhs[i], rhs[i].real(), 1e-12);
}

TEST(Realify, DimensionMismatch) {
    EXPECT_THROW(realify(ComplexMatrix::Zero(2, 3), ComplexVector::Zero(3)), DimensionError);
}

TEST(TauScale, Examples) {
    Vector y(2);
    y << 3.0, -5.0;
    EXPECT_EQ(tau_scale(RealMatrix::Identity(2, 2), y), 5.0);
    EXPECT_EQ(tau_scale(RealMatrix::Identity(2, 2), Vector::Zero(2)), 0.0);

    RealMatrix A(1, 2);
    A << 1.0, 2.0;
    Vector y1(1);
    y1 << 2.0;
    EXPECT_EQ(tau_scale(A, y1), 4.0);
    EXPECT_THROW(tau_scale(A, Vector::Zero(2)), DimensionError);
}

TEST(ProblemInstance, Validation) {
    ProblemInstance p;
    p.A = random_matrix(3, 5, 1);
    p.y = Vector::Zero(3);
    p.tau = 1.0;
    p.dt = 0.1;
    EXPECT_NO_THROW(validate(p));

    auto bad = p;
    bad.y = Vector::Zero(4);
    EXPECT_THROW(validate(bad), DimensionError);
    bad = p;
    bad.tau = 0.0;
    EXPECT_THROW(validate(bad), PreconditionError);
    bad = p;
    bad.A(0, 0) = std::nan("");
    EXPECT_THROW(validate(bad), PreconditionError);
    bad = p;
    bad.A = random_matrix(6, 5, 2);
    bad.y = Vector::Zero(6);
    EXPECT_THROW(validate(bad), DimensionError);
    bad = p;
    bad.reference_x = Vector::Zero(4);
    EXPECT_THROW(validate(bad), DimensionError);
}

TEST(ProblemInstance, FullRowRank) {
    EXPECT_TRUE(has_full_row_rank(random_matrix(4, 8, 3)));
    RealMatrix A = random_matrix(3, 6, 4);
    A.row(2) = 2.0 * A.row(0);
    EXPECT_FALSE(has_full_row_rank(A));
    EXPECT_THROW(require_full_row_rank(A), PreconditionError);
}

TEST(DefaultStep, SatisfiesStepCondition) {
    for (double norm : {0.01, 0.5, 1.0, 3.0, 10.0, 1e4}) {
        const double dt = default_gelma_step(norm);
        EXPECT_LT(dt * norm, 1.0);
        EXPECT_LT(dt, 1.0);
        EXPECT_LT(dt * norm * norm, 2.0);
    }
}
