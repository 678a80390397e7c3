#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "gelma/numeric_core.hpp"
#include "gelma/solvers.hpp"

namespace gelma::imaging {

using Point = Eigen::Vector2d;

/// Wavenumber for unit wavelength; all lengths are in wavelengths.
inline constexpr double kUnitWavenumber = 2.0 * std::numbers::pi;

/// Linear array on the x-axis, centred at the origin, with uniform pitch.
struct ArrayGeometry {
    Index num_transducers = 100;
    double pitch = 1.0;
    Index source_index = 49;  // 0-based; the central element ⌈N/2⌉ in 1-based terms

    static ArrayGeometry centred(Index n, double pitch = 1.0) {
        return {n, pitch, (n + 1) / 2 - 1};
    }

    Point transducer(Index p) const {
        const double offset = static_cast<double>(p) - static_cast<double>(num_transducers - 1) / 2.0;
        return {offset * pitch, 0.0};
    }
    Point source() const { return transducer(source_index); }

    void validate() const {
        if (num_transducers < 1) throw PreconditionError("geometry: need at least one transducer");
        if (!(pitch > 0.0)) throw PreconditionError("geometry: pitch must be positive");
        if (source_index < 0 || source_index >= num_transducers)
            throw PreconditionError("geometry: source_index out of range");
    }
};

/// Rectangular pixel grid centred at (center_x, range + center_y). Pixel j is
/// (ix, iy) with j = iy·nx + ix.
struct ImageWindow {
    double range = 120.0;
    Index nx = 41;
    Index ny = 41;
    double pixel_pitch = 1.0;
    double center_x = 0.0;
    double center_y = 0.0;

    Index size() const { return nx * ny; }
    Index index(Index ix, Index iy) const { return iy * nx + ix; }

    Point pixel(Index j) const {
        const Index ix = j % nx;
        const Index iy = j / nx;
        const double ox = (static_cast<double>(ix) - static_cast<double>(nx - 1) / 2.0) * pixel_pitch;
        const double oy = (static_cast<double>(iy) - static_cast<double>(ny - 1) / 2.0) * pixel_pitch;
        return {center_x + ox, range + center_y + oy};
    }

    void validate() const {
        if (nx < 1 || ny < 1) throw PreconditionError("window: grid counts must be positive");
        if (!(range > 0.0)) throw PreconditionError("window: range must be positive");
        if (!(pixel_pitch > 0.0)) throw PreconditionError("window: pixel pitch must be positive");
    }
};

struct ScattererSet {
    std::vector<Index> grid_indices;
    std::vector<double> reflectivities;

    std::size_t size() const { return grid_indices.size(); }

    void validate(Index num_pixels) const {
        if (grid_indices.size() != reflectivities.size())
            throw DimensionError("scatterers: index and reflectivity counts differ");
        std::set<Index> seen;
        for (std::size_t i = 0; i < grid_indices.size(); ++i) {
            if (grid_indices[i] < 0 || grid_indices[i] >= num_pixels)
                throw PreconditionError("scatterers: grid index out of range");
            if (!seen.insert(grid_indices[i]).second)
                throw PreconditionError("scatterers: duplicate grid index");
            if (!(reflectivities[i] > 0.0))
                throw PreconditionError("scatterers: reflectivities must be positive");
        }
    }

    /// Dense K-vector ρ₀.
    Vector dense(Index num_pixels) const {
        Vector rho = Vector::Zero(num_pixels);
        for (std::size_t i = 0; i < grid_indices.size(); ++i) rho[grid_indices[i]] = reflectivities[i];
        return rho;
    }
};

struct SceneData {
    ComplexVector b;
    double wavenumber = kUnitWavenumber;
};

/// Free-space Green function exp(−iκ|x − y|)/(4π|x − y|).
inline std::complex<double> green0(const Point& xa, const Point& ya, double kappa) {
    const double d = (xa - ya).norm();
    if (!(d > 0.0)) throw PreconditionError("green0: coincident points");
    return std::polar(1.0 / (4.0 * std::numbers::pi * d), -kappa * d);
}

/// N×K sensing matrix; column j is G(y_j, x_s)·[G(x_1, y_j) … G(x_N, y_j)]ᵀ.
inline ComplexMatrix build_matrix(const ArrayGeometry& geom, const ImageWindow& iw, double kappa) {
    geom.validate();
    iw.validate();
    const Index N = geom.num_transducers;
    const Index K = iw.size();
    const Point xs = geom.source();
    ComplexMatrix A(N, K);
    for (Index j = 0; j < K; ++j) {
        const Point yj = iw.pixel(j);
        const std::complex<double> illumination = green0(yj, xs, kappa);
        for (Index r = 0; r < N; ++r) A(r, j) = green0(geom.transducer(r), yj, kappa) * illumination;
    }
    return A;
}

/// Born data b_r = Σ_j ρ_j G(x_r, y_{n_j}) G(y_{n_j}, x_s), summed directly.
inline SceneData synthesize(const ArrayGeometry& geom, const ImageWindow& iw,
                            const ScattererSet& scat, double kappa) {
    geom.validate();
    iw.validate();
    scat.validate(iw.size());
    const Point xs = geom.source();
    SceneData data{ComplexVector::Zero(geom.num_transducers), kappa};
    for (Index r = 0; r < geom.num_transducers; ++r) {
        const Point xr = geom.transducer(r);
        std::complex<double> sum = 0.0;
        for (std::size_t i = 0; i < scat.size(); ++i) {
            const Point y = iw.pixel(scat.grid_indices[i]);
            sum += scat.reflectivities[i] * green0(xr, y, kappa) * green0(y, xs, kappa);
        }
        data.b[r] = sum;
    }
    return data;
}

/// b + e, with Re e and Im e i.i.d. N(0, σ²), σ = β‖b‖/√(2N), so E‖e‖² = β²‖b‖².
inline ComplexVector add_noise(const ComplexVector& b, double beta, std::uint64_t seed) {
    if (!(beta >= 0.0)) throw PreconditionError("add_noise: beta must be nonnegative");
    if (beta == 0.0 || b.size() == 0) return b;
    const double sigma = beta * b.norm() / std::sqrt(2.0 * static_cast<double>(b.size()));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    ComplexVector out = b;
    for (Index i = 0; i < b.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        out[i] += std::complex<double>(sigma * re, sigma * im);
    }
    return out;
}

struct RecoverOptions {
    std::size_t iterations = 300;
    double dt_factor = 0.9;  // Δt = dt_factor / ‖A‖ after normalization
};

struct RecoveredImage {
    Vector grid;  // K pixels, row-major nx × ny
    Index nx = 0;
    Index ny = 0;
    double tau = 0.0;
    double dt = 0.0;
    double scale = 1.0;  // factor applied to the real system before solving
    std::size_t iterations = 0;
    std::optional<SolverRun> run;
};

/// Reflectivity image by GeLMA on the real-stacked system.
///
/// The stacked system (A_r, y_r) is rescaled jointly so the mean column norm
/// of A_r is one; this leaves the ℓ1 minimizer unchanged. Then
/// τ = α·‖A_rᵀy_r‖_∞ and Δt = dt_factor/‖A_r‖.
inline RecoveredImage recover(const ArrayGeometry& geom, const ImageWindow& iw,
                              const SceneData& data, double alpha, const RecoverOptions& opt = {}) {
    if (!(alpha > 0.0)) throw PreconditionError("recover: alpha must be positive");
    if (data.b.size() != geom.num_transducers)
        throw DimensionError("recover: data length must equal the number of transducers");
    if (!(opt.dt_factor > 0.0) || !(opt.dt_factor < 1.0))
        throw PreconditionError("recover: dt_factor must lie in (0, 1)");

    RecoveredImage image;
    image.nx = iw.nx;
    image.ny = iw.ny;
    image.grid = Vector::Zero(iw.size());
    if (data.b.cwiseAbs().maxCoeff() == 0.0) return image;

    RealSystem sys = realify(build_matrix(geom, iw, data.wavenumber), data.b);
    image.scale = 1.0 / sys.A.colwise().norm().mean();
    sys.A *= image.scale;
    sys.y *= image.scale;

    const double norm_A = spectral_norm(sys.A);
    ProblemInstance p;
    p.A = std::move(sys.A);
    p.y = std::move(sys.y);
    p.tau = alpha * tau_scale(p.A, p.y);
    p.dt = opt.dt_factor / norm_A;

    StopRule stop;
    stop.max_iter = opt.iterations;
    stop.tol_change = 0.0;
    stop.tol_residual = 0.0;
    stop.record_every = opt.iterations;
    SolveOptions so;
    so.norm_A = norm_A;
    SolverRun run = gelma_solve(p, stop, so);

    image.grid = run.x;
    image.tau = p.tau;
    image.dt = p.dt;
    image.iterations = run.iterations;
    image.run = std::move(run);
    return image;
}

struct ImageMetrics {
    double support_precision = 0.0;
    double support_recall = 0.0;
    double max_reflectivity_error = 0.0;
    double l2_error = 0.0;
};

/// Detection is |pixel| > threshold. Reflectivity error is measured on the
/// true support; the ℓ2 error over the whole grid.
inline ImageMetrics image_metrics(const Vector& recovered, const ScattererSet& truth,
                                  double threshold) {
    if (!(threshold > 0.0)) throw PreconditionError("image_metrics: threshold must be positive");
    for (Index j : truth.grid_indices)
        if (j < 0 || j >= recovered.size())
            throw DimensionError("image_metrics: truth index outside the grid");
    const Vector rho = truth.dense(recovered.size());

    ImageMetrics m;
    std::size_t detected = 0, hits = 0;
    for (Index j = 0; j < recovered.size(); ++j) {
        const bool found = std::abs(recovered[j]) > threshold;
        detected += found;
        hits += found && rho[j] > 0.0;
    }
    m.support_precision = detected ? static_cast<double>(hits) / static_cast<double>(detected) : 1.0;
    m.support_recall = truth.size() ? static_cast<double>(hits) / static_cast<double>(truth.size()) : 1.0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        m.max_reflectivity_error = std::max(
            m.max_reflectivity_error,
            std::abs(recovered[truth.grid_indices[i]] - truth.reflectivities[i]));
    m.l2_error = (recovered - rho).norm();
    return m;
}

} // namespace gelma::imaging
