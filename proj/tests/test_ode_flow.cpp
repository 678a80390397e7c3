#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gelma/generate.hpp"
#include "gelma/ode_flow.hpp"
#include "gelma/oracle.hpp"
#include "gelma/solvers.hpp"
#include "test_support.hpp"

using namespace gelma;
using gelma::fixtures::make_problem;

namespace {

// Small instance with a unique minimizer, used for the trajectory checks.
struct Fixture {
    ProblemInstance p;
    Vector xbar;
};

Fixture small_instance() {
    auto p = generate_random_problem(4, 8, 2, 12);
    p.tau = 0.5 * tau_scale(p.A, p.y);
    const auto oracle = brute_force_l1(p.A, p.y);
    EXPECT_TRUE(oracle.unique);
    return {p, oracle.x_star};
}

} // namespace

TEST(OdeRhs, AtOrigin) {
    auto p = generate_random_problem(3, 6, 2, 1);
    OdeState s{Vector::Zero(6), Vector::Zero(3), 0.0};
    const auto f = ode_rhs(s, p, EpsParam(1e-2));
    EXPECT_LE((f.dx - p.A.transpose() * p.y).norm(), 1e-14);
    EXPECT_EQ(f.dz, p.y);
}

TEST(OdeRhs, HandValue) {
    RealMatrix A(1, 1);
    A << 1.0;
    Vector y(1);
    y << 1.0;
    const auto p = make_problem(A, y, 1.0, 0.1);
    OdeState s{Vector::Constant(1, 0.25), Vector::Zero(1), 0.0};
    const auto f = ode_rhs(s, p, EpsParam(0.5));
    EXPECT_DOUBLE_EQ(f.dx[0], 0.25);
    EXPECT_DOUBLE_EQ(f.dz[0], 0.75);
}

TEST(OdeRhs, StationaryAtCertifiedOptimum) {
    // x̄ = (0, 1) for A = [1 2], y = 2; z with Aᵀz = τ·sign on the support.
    RealMatrix A(1, 2);
    A << 1.0, 2.0;
    Vector y(1);
    y << 2.0;
    const auto p = make_problem(A, y, 1.0, 0.1);
    OdeState s{Vector::Zero(2), Vector::Constant(1, 0.5), 0.0};
    s.x << 0.0, 1.0;
    const auto f = ode_rhs(s, p, EpsParam(0.1));
    // G_ε(0) = 0 gives dx₀ = [Aᵀz]₀ = 0.5; choose x̄ on the support only.
    EXPECT_DOUBLE_EQ(f.dx[1], 0.0);
    EXPECT_DOUBLE_EQ(f.dz[0], 0.0);

    RealMatrix I = RealMatrix::Identity(2, 2);
    Vector y2(2);
    y2 << 1.0, -2.0;
    const auto q = make_problem(I, y2, 0.5, 0.1);
    OdeState t{y2, Vector::Zero(2), 0.0};
    t.z << 0.5, -0.5;
    const auto g = ode_rhs(t, q, EpsParam(0.1));
    EXPECT_EQ(g.dx, Vector::Zero(2));
    EXPECT_EQ(g.dz, Vector::Zero(2));
}

TEST(Integrate, ZeroDataStaysZero) {
    auto p = make_problem(fixtures::random_matrix(3, 6, 4), Vector::Zero(3), 1.0, 0.1);
    OdeConfig cfg;
    cfg.eps = 1e-2;
    cfg.t_final = 1.0;
    const auto traj = integrate(p, cfg);
    EXPECT_EQ(traj.final_state.x, Vector::Zero(6));
    EXPECT_EQ(traj.final_state.z, Vector::Zero(3));
    EXPECT_DOUBLE_EQ(traj.final_state.t, 1.0);
}

TEST(Integrate, ObserverCadence) {
    auto p = generate_random_problem(3, 6, 1, 2);
    OdeConfig cfg;
    cfg.eps = 1e-1;
    cfg.dt_ode = 1e-3;
    cfg.t_final = 0.1005;
    cfg.observe_every = 10;
    std::vector<double> times;
    const auto traj = integrate(p, cfg, [&](const OdeState& s) { times.push_back(s.t); });
    EXPECT_EQ(traj.steps, 101u);
    ASSERT_EQ(times.size(), 12u);  // t = 0, ten full blocks, final partial step
    EXPECT_EQ(times.front(), 0.0);
    EXPECT_DOUBLE_EQ(times.back(), 0.1005);
    for (std::size_t i = 1; i < times.size(); ++i) EXPECT_GT(times[i], times[i - 1]);
}

TEST(Integrate, ZeroHorizonObservesOnce) {
    auto p = generate_random_problem(3, 6, 1, 2);
    OdeConfig cfg;
    cfg.t_final = 0.0;
    int calls = 0;
    const auto traj = integrate(p, cfg, [&](const OdeState&) { ++calls; });
    EXPECT_EQ(calls, 1);
    EXPECT_EQ(traj.steps, 0u);
}

TEST(Integrate, RejectsStepAboveCap) {
    auto p = generate_random_problem(3, 6, 1, 2);
    OdeConfig cfg;
    cfg.eps = 1e-3;
    cfg.dt_ode = 1.0;
    EXPECT_THROW(integrate(p, cfg), StepSizeError);
}

TEST(Integrate, ApproachesMinimizer) {
    const auto f = small_instance();
    OdeConfig cfg;
    cfg.eps = 1e-3;
    cfg.t_final = 300.0;
    cfg.observe_every = 1000000;
    const auto traj = integrate(f.p, cfg);
    EXPECT_LE((traj.final_state.x - f.xbar).norm(), 1e-2);
}

TEST(Integrate, FirstOrderInStep) {
    // Smooth regime: ε large enough that G_ε stays linear along the path.
    const auto f = small_instance();
    auto p = f.p;
    p.tau = 0.5;
    OdeConfig cfg;
    cfg.eps = 50.0;
    cfg.t_final = 2.0;
    cfg.dt_ode = 2e-3;
    cfg.observe_every = 1000000;
    const Vector coarse = integrate(p, cfg).final_state.x;
    cfg.dt_ode = 1e-3;
    const Vector mid = integrate(p, cfg).final_state.x;
    cfg.dt_ode = 5e-4;
    const Vector fine = integrate(p, cfg).final_state.x;
    const double d1 = (coarse - mid).norm();
    const double d2 = (mid - fine).norm();
    EXPECT_LE(d2, 0.6 * d1);
    EXPECT_GE(d2, 0.4 * d1);
}

TEST(LyapunovEnergy, ZeroAtStationaryOptimum) {
    RealMatrix I = RealMatrix::Identity(2, 2);
    Vector y(2);
    y << 1.0, -2.0;
    const auto p = make_problem(I, y, 0.5, 0.1);
    OdeState s{y, Vector::Zero(2), 0.0};
    s.z << 0.5, -0.5;
    EXPECT_EQ(lyapunov_energy(s, p, y, EpsParam(0.1)), 0.0);
}

TEST(LyapunovEnergy, DegenerateDirection) {
    // q in the null space of A with ẋ = 0 gives E = 0.
    RealMatrix A(1, 2);
    A << 1.0, 1.0;
    Vector y(1);
    y << 2.0;
    const auto p = make_problem(A, y, 1.0, 0.1);
    Vector xbar(2);
    xbar << 1.0, 1.0;
    OdeState s{Vector::Zero(2), Vector::Constant(1, 1.0), 0.0};
    s.x << 1.5, 0.5;  // x̄ + (0.5, −0.5); both components outside the band
    EXPECT_EQ(lyapunov_energy(s, p, xbar, EpsParam(0.1)), 0.0);
}

TEST(LyapunovEnergy, RejectsInfeasibleReference) {
    auto p = generate_random_problem(3, 6, 1, 2);
    OdeState s{Vector::Zero(6), Vector::Zero(3), 0.0};
    EXPECT_THROW(lyapunov_energy(s, p, Vector::Ones(6), EpsParam(0.1)), PreconditionError);
}

TEST(LyapunovEnergy, DissipatesAlongTrajectory) {
    const auto f = small_instance();
    const EpsParam eps(1e-3);
    OdeConfig cfg;
    cfg.eps = eps.value();
    cfg.t_final = 10.0;
    cfg.observe_every = 50;
    std::vector<double> energy;
    integrate(f.p, cfg, [&](const OdeState& s) { energy.push_back(lyapunov_energy(s, f.p, f.xbar, eps)); });
    ASSERT_GT(energy.size(), 10u);
    for (std::size_t i = 1; i < energy.size(); ++i)
        EXPECT_LE(energy[i], energy[i - 1] + 1e-8 * (1.0 + energy.front())) << "record " << i;
}

TEST(Integrate, SmallerEpsTightensGap) {
    const auto f = small_instance();
    std::vector<double> gaps;
    for (double e : {1e-1, 1e-2, 1e-3}) {
        OdeConfig cfg;
        cfg.eps = e;
        cfg.t_final = 300.0;
        cfg.observe_every = 100000000;
        gaps.push_back((integrate(f.p, cfg).final_state.x - f.xbar).norm());
    }
    EXPECT_GT(gaps[0], gaps[1]);
    EXPECT_GT(gaps[1], gaps[2]);
}

TEST(MinmaxF, Values) {
    RealMatrix A(1, 2);
    A << 1.0, 2.0;
    Vector y(1);
    y << 2.0;
    const auto p = make_problem(A, y, 1.0, 0.1);
    Vector x(2);
    x << 0.0, 1.0;
    EXPECT_DOUBLE_EQ(minmax_F(x, Vector::Constant(1, 3.0), p), 1.0);
    EXPECT_DOUBLE_EQ(minmax_F(Vector::Zero(2), Vector::Zero(1), p), 2.0);
}

TEST(MinmaxF, FeasiblePointIgnoresMultiplier) {
    const auto f = small_instance();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Vector z = fixtures::random_vector(4, seed);
        EXPECT_NEAR(minmax_F(f.xbar, z, f.p), f.p.tau * l1_norm(f.xbar),
                    1e-10 * (1.0 + f.p.tau * l1_norm(f.xbar)));
    }
}

TEST(MinmaxF, SaddleInequality) {
    auto f = small_instance();
    auto p = f.p;
    StopRule s;
    s.max_iter = 200000;
    s.tol_change = 1e-14;
    s.tol_residual = 1e-12;
    const auto run = gelma_solve(p, s);
    ASSERT_TRUE(certificate_check(p.A, run.x, *run.z, p.tau, 1e-6).pass);
    const double base = minmax_F(f.xbar, *run.z, p);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const Vector x = f.xbar + 0.5 * fixtures::random_vector(8, 1000 + seed);
        EXPECT_GE(minmax_F(x, *run.z, p), base - 1e-9);
    }
}
