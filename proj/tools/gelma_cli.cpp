// gelma_cli: file-based front end for instance generation, solvers, the
// regularized flow, the brute-force oracle and synthetic array imaging.
//
// Exit codes: 0 success, 1 usage, 2 solver precondition, 3 I/O, 4 budget.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "gelma/gelma.hpp"
#include "gelma/io.hpp"

using namespace gelma;
using gelma::io::json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kPrecondition = 2, kIo = 3, kBudget = 4 };

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr))
        throw IoError("sha256 failed");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

// Collects what one run did and writes it next to the primary output.
class Manifest {
public:
    explicit Manifest(std::string command) : command_(std::move(command)), start_(Clock::now()) {}

    void param(const std::string& key, json value) { params_[key] = std::move(value); }
    void seed(std::uint64_t s) { seed_ = s; }

    std::string input(const std::string& path) {
        std::string bytes = io::read_file(path);
        inputs_[path] = sha256_hex(bytes);
        return bytes;
    }

    void artifact(const std::string& path, const std::string& content) {
        io::write_file(path, content);
        artifacts_.push_back(path);
    }

    void write(const std::string& path) const {
        const double secs = std::chrono::duration<double>(Clock::now() - start_).count();
        json j = {{"command", command_},
                  {"parameters", params_},
                  {"input_hashes", inputs_},
                  {"seed", seed_ ? json(*seed_) : json(nullptr)},
                  {"artifacts", artifacts_},
                  {"duration_seconds", secs}};
        io::write_file(path, j.dump(2) + "\n");
    }

private:
    using Clock = std::chrono::steady_clock;
    std::string command_;
    Clock::time_point start_;
    json params_ = json::object();
    json inputs_ = json::object();
    std::optional<std::uint64_t> seed_;
    std::vector<std::string> artifacts_;
};

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------

struct GenArgs {
    Index m = 20, n = 50, k = 3;
    std::uint64_t seed = 0;
    std::string out;
};

void run_gen(const GenArgs& a) {
    Manifest mf("gen-random");
    mf.param("m", a.m);
    mf.param("n", a.n);
    mf.param("k", a.k);
    mf.seed(a.seed);
    const auto p = generate_random_problem(a.m, a.n, a.k, a.seed);
    mf.artifact(a.out, io::problem_to_json(p).dump() + "\n");
    mf.write(manifest_path(a.out));
    std::cout << "wrote " << a.m << "x" << a.n << " instance to " << a.out << "\n";
}

struct SolveArgs {
    std::string problem;
    std::string solver = "gelma";
    double alpha = 20.0;
    std::optional<double> dt;
    std::size_t max_iter = 10000;
    double tol_change = 1e-12;
    double tol_residual = 1e-10;
    std::size_t record_every = 1;
    double tol_inner = 1e-10;
    double cert_tol = 1e-6;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_solve(const SolveArgs& a) {
    Manifest mf("solve");
    if (a.seed) mf.seed(*a.seed);
    ProblemInstance p = io::problem_from_json(io::parse_json(mf.input(a.problem), a.problem));
    const double scale = tau_scale(p.A, p.y);
    if (!(a.alpha > 0.0)) throw PreconditionError("alpha must be positive");
    if (scale == 0.0) throw PreconditionError("tau_scale is zero (y = 0); choose a nonzero instance");
    p.tau = a.alpha * scale;
    if (a.dt) p.dt = *a.dt;

    StopRule stop;
    stop.max_iter = a.max_iter;
    stop.tol_change = a.tol_change;
    stop.tol_residual = a.tol_residual;
    stop.record_every = a.record_every;

    SolverRun run;
    if (a.solver == "gelma")
        run = gelma_solve(p, stop);
    else if (a.solver == "gelma-implicit")
        run = implicit_gelma_solve(p, stop, a.tol_inner);
    else if (a.solver == "ista")
        run = ista_solve(p, stop, a.dt);
    else
        run = fista_solve(p, stop, a.dt);

    mf.param("solver", a.solver);
    mf.param("alpha", a.alpha);
    mf.param("tau", p.tau);
    const bool gradient = a.solver == "ista" || a.solver == "fista";
    mf.param("dt", gradient && !a.dt ? json(nullptr) : json(p.dt));
    mf.param("max_iter", a.max_iter);
    mf.param("tol_change", a.tol_change);
    mf.param("tol_residual", a.tol_residual);
    mf.param("record_every", a.record_every);
    if (a.solver == "gelma-implicit") mf.param("tol_inner", a.tol_inner);

    std::ostringstream csv;
    io::write_history_csv(csv, run.history);
    mf.artifact(a.out, csv.str());

    json summary = {{"solver", a.solver},
                    {"iterations", run.iterations},
                    {"stop_reason", to_string(run.stop_reason)},
                    {"tau", p.tau},
                    {"final_err", p.reference_x ? json((run.x - *p.reference_x).norm()) : json(nullptr)},
                    {"residual", (p.A * run.x - p.y).norm()},
                    {"x", io::vector_to_json(run.x)}};
    if (run.z) {
        mf.param("cert_tol", a.cert_tol);
        const auto cert = certificate_check(p.A, run.x, *run.z, p.tau, a.cert_tol);
        summary["certificate_pass"] = cert.pass;
        summary["certificate"] = io::certificate_to_json(cert);
    }
    const std::string summary_path = a.out + ".summary.json";
    mf.artifact(summary_path, summary.dump(2) + "\n");
    mf.write(manifest_path(a.out));
    std::cout << a.solver << ": " << run.iterations << " iterations (" << to_string(run.stop_reason) << ")";
    if (p.reference_x) std::cout << ", final_err " << io::format_real(summary["final_err"].get<double>());
    std::cout << "\n";
}

struct OdeArgs {
    std::string problem;
    double alpha = 2.0;
    double eps = 1e-3;
    double t_final = 1.0;
    double dt_ode = 0.0;
    std::size_t observe_every = 1;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_ode(const OdeArgs& a) {
    Manifest mf("ode");
    if (a.seed) mf.seed(*a.seed);
    ProblemInstance p = io::problem_from_json(io::parse_json(mf.input(a.problem), a.problem));
    if (!(a.alpha > 0.0)) throw PreconditionError("alpha must be positive");
    const double scale = tau_scale(p.A, p.y);
    p.tau = a.alpha * (scale > 0.0 ? scale : 1.0);

    OdeConfig cfg;
    cfg.eps = a.eps;
    cfg.dt_ode = a.dt_ode;
    cfg.t_final = a.t_final;
    cfg.observe_every = a.observe_every;
    const EpsParam eps(a.eps);

    std::vector<io::TrajectoryRow> rows;
    const auto traj = integrate(p, cfg, [&](const OdeState& s) {
        io::TrajectoryRow r;
        r.t = s.t;
        r.residual = (p.A * s.x - p.y).norm();
        r.z_norm = s.z.norm();
        if (p.reference_x) {
            r.energy = lyapunov_energy(s, p, *p.reference_x, eps);
            r.err_vs_ref = (s.x - *p.reference_x).norm();
        }
        rows.push_back(r);
    });

    mf.param("alpha", a.alpha);
    mf.param("tau", p.tau);
    mf.param("eps", a.eps);
    mf.param("t_final", a.t_final);
    mf.param("dt_ode", traj.dt_ode);
    mf.param("observe_every", a.observe_every);
    std::ostringstream csv;
    io::write_trajectory_csv(csv, rows);
    mf.artifact(a.out, csv.str());
    mf.write(manifest_path(a.out));
    std::cout << "ode: " << traj.steps << " steps of " << io::format_real(traj.dt_ode) << ", "
              << rows.size() << " rows\n";
}

struct OracleArgs {
    std::string problem;
    double tie_tol = 1e-7;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_oracle(const OracleArgs& a) {
    Manifest mf("oracle");
    if (a.seed) mf.seed(*a.seed);
    const ProblemInstance p = io::problem_from_json(io::parse_json(mf.input(a.problem), a.problem));
    mf.param("tie_tol", a.tie_tol);
    const auto r = brute_force_l1(p.A, p.y, a.tie_tol);
    json j = io::oracle_to_json(r);
    if (p.reference_x) {
        const double d = (*p.reference_x - r.x_star).norm();
        j["reference_distance"] = d;
        j["reference_matches"] = d <= 1e-6;
    }
    mf.artifact(a.out, j.dump(2) + "\n");
    mf.write(manifest_path(a.out));
    std::cout << "oracle: value " << io::format_real(r.value) << (r.unique ? ", unique" : ", not unique") << "\n";
}

struct ImageArgs {
    std::string scene;
    double alpha = 20.0;
    std::size_t iterations = 300;
    double dt_factor = 0.9;
    std::optional<double> threshold;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void run_image(const ImageArgs& a) {
    Manifest mf("image");
    io::SceneConfig sc = io::scene_from_json(io::parse_json(mf.input(a.scene), a.scene));
    if (a.seed) sc.seed = *a.seed;
    mf.seed(sc.seed);

    const auto clean = imaging::synthesize(sc.geometry, sc.window, sc.scatterers, imaging::kUnitWavenumber);
    const imaging::SceneData data{imaging::add_noise(clean.b, sc.beta, sc.seed), clean.wavenumber};
    imaging::RecoverOptions opt;
    opt.iterations = a.iterations;
    opt.dt_factor = a.dt_factor;
    const auto img = imaging::recover(sc.geometry, sc.window, data, a.alpha, opt);

    double threshold = 0.0;
    if (a.threshold) {
        threshold = *a.threshold;
    } else {
        // Default: a fifth of the weakest true reflectivity.
        double weakest = std::numeric_limits<double>::infinity();
        for (double r : sc.scatterers.reflectivities) weakest = std::min(weakest, r);
        threshold = sc.scatterers.size() ? 0.2 * weakest : 1e-3;
    }
    const auto metrics = imaging::image_metrics(img.grid, sc.scatterers, threshold);

    mf.param("alpha", a.alpha);
    mf.param("iterations", a.iterations);
    mf.param("dt_factor", a.dt_factor);
    mf.param("beta", sc.beta);
    mf.param("threshold", threshold);
    mf.param("tau", img.tau);
    mf.param("dt", img.dt);
    mf.param("scale", img.scale);

    const auto pgm = io::grid_to_pgm(img.grid, img.nx, img.ny);
    mf.artifact(a.out + ".grid.csv", io::grid_to_csv(img.grid, img.nx, img.ny));
    mf.artifact(a.out + ".pgm", pgm.text);
    mf.artifact(a.out + ".pgm.json", json({{"scale", pgm.scale}}).dump(2) + "\n");
    json mj = io::metrics_to_json(metrics);
    mj["threshold"] = threshold;
    mf.artifact(a.out + ".metrics.json", mj.dump(2) + "\n");
    mf.write(manifest_path(a.out));
    std::cout << "image: precision " << metrics.support_precision << ", recall " << metrics.support_recall
              << ", max reflectivity error " << metrics.max_reflectivity_error << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GeLMA sparse recovery experiments"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* g = app.add_subcommand("gen-random", "Generate a seeded sparse recovery instance (JSON)");
    g->add_option("--m", gen.m, "Number of measurements")->capture_default_str();
    g->add_option("--n", gen.n, "Number of unknowns")->capture_default_str();
    g->add_option("--k", gen.k, "Sparsity of the planted vector")->capture_default_str();
    g->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
    g->add_option("--out", gen.out, "Output problem JSON")->required();

    SolveArgs sol;
    auto* s = app.add_subcommand("solve", "Run a solver; writes history CSV and <out>.summary.json");
    s->add_option("--problem", sol.problem, "Problem JSON")->required();
    s->add_option("--solver", sol.solver, "Solver")
        ->check(CLI::IsMember({"gelma", "gelma-implicit", "ista", "fista"}))
        ->capture_default_str();
    s->add_option("--alpha", sol.alpha, "tau = alpha * ||A^T y||_inf")->capture_default_str();
    s->add_option("--dt", sol.dt, "Step override (GeLMA: dt; ISTA/FISTA: h; default from file or 1/||A||^2)");
    s->add_option("--max-iter", sol.max_iter)->capture_default_str();
    s->add_option("--tol-change", sol.tol_change)->capture_default_str();
    s->add_option("--tol-residual", sol.tol_residual)->capture_default_str();
    s->add_option("--record-every", sol.record_every)->capture_default_str();
    s->add_option("--tol-inner", sol.tol_inner, "Inner tolerance for gelma-implicit")->capture_default_str();
    s->add_option("--cert-tol", sol.cert_tol, "Certificate tolerance")->capture_default_str();
    s->add_option("--seed", sol.seed, "Recorded in the manifest; solvers are deterministic");
    s->add_option("--out", sol.out, "Output history CSV")->required();

    OdeArgs ode;
    auto* o = app.add_subcommand("ode", "Integrate the regularized flow; writes a trajectory CSV");
    o->add_option("--problem", ode.problem, "Problem JSON")->required();
    o->add_option("--alpha", ode.alpha, "tau = alpha * ||A^T y||_inf")->capture_default_str();
    o->add_option("--eps", ode.eps, "Regularization width")->capture_default_str();
    o->add_option("--t-final", ode.t_final)->capture_default_str();
    o->add_option("--dt-ode", ode.dt_ode, "Euler step; 0 picks half the stability cap")->capture_default_str();
    o->add_option("--observe-every", ode.observe_every, "Row cadence in steps")->capture_default_str();
    o->add_option("--seed", ode.seed, "Recorded in the manifest");
    o->add_option("--out", ode.out, "Output trajectory CSV")->required();

    OracleArgs orc;
    auto* b = app.add_subcommand("oracle", "Exact l1 minimizer by support enumeration (n <= 24, m <= 6)");
    b->add_option("--problem", orc.problem, "Problem JSON")->required();
    b->add_option("--tie-tol", orc.tie_tol)->capture_default_str();
    b->add_option("--seed", orc.seed, "Recorded in the manifest");
    b->add_option("--out", orc.out, "Output JSON")->required();

    ImageArgs im;
    auto* i = app.add_subcommand("image", "Synthetic array imaging; writes <out>.grid.csv, .pgm, .metrics.json");
    i->add_option("--scene", im.scene, "Scene JSON")->required();
    i->add_option("--alpha", im.alpha, "tau = alpha * ||A^T b||_inf")->capture_default_str();
    i->add_option("--iterations", im.iterations)->capture_default_str();
    i->add_option("--dt-factor", im.dt_factor, "dt = factor / ||A|| after normalization")->capture_default_str();
    i->add_option("--threshold", im.threshold, "Detection threshold (default 0.2 * min reflectivity)");
    i->add_option("--seed", im.seed, "Noise seed (overrides the scene file)");
    i->add_option("--out", im.out, "Output prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*g) run_gen(gen);
        else if (*s) run_solve(sol);
        else if (*o) run_ode(ode);
        else if (*b) run_oracle(orc);
        else if (*i) run_image(im);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const BudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBudget;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kPrecondition;
    }
    return kOk;
}
