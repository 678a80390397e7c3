#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gelma/imaging.hpp"
#include "gelma/numeric_core.hpp"
#include "gelma/oracle.hpp"
#include "gelma/solvers.hpp"

namespace gelma::io {

using nlohmann::json;

/// Decimal with enough digits to round-trip the double.
inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(what + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Problem instances
// ---------------------------------------------------------------------------

inline json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

inline Vector json_to_vector(const json& arr, Index expected, const char* field) {
    if (!arr.is_array() || static_cast<Index>(arr.size()) != expected)
        throw IoError(std::string("field '") + field + "' must be an array of " +
                      std::to_string(expected) + " numbers");
    Vector v(expected);
    for (Index i = 0; i < expected; ++i) {
        if (!arr[static_cast<std::size_t>(i)].is_number())
            throw IoError(std::string("field '") + field + "' contains a non-number");
        v[i] = arr[static_cast<std::size_t>(i)].get<double>();
    }
    return v;
}

inline json problem_to_json(const ProblemInstance& p) {
    json j;
    j["m"] = p.m();
    j["n"] = p.n();
    json a = json::array();
    for (Index r = 0; r < p.m(); ++r)
        for (Index c = 0; c < p.n(); ++c) a.push_back(p.A(r, c));
    j["A"] = std::move(a);
    j["y"] = vector_to_json(p.y);
    j["tau"] = p.tau;
    j["dt"] = p.dt;
    if (p.reference_x) j["reference_x"] = vector_to_json(*p.reference_x);
    return j;
}

inline ProblemInstance problem_from_json(const json& j) {
    try {
        const Index m = j.at("m").get<Index>();
        const Index n = j.at("n").get<Index>();
        if (m < 1 || n < 1) throw IoError("problem: m and n must be positive");
        ProblemInstance p;
        const Vector flat = json_to_vector(j.at("A"), m * n, "A");
        p.A = Eigen::Map<const RealMatrix>(flat.data(), m, n);
        p.y = json_to_vector(j.at("y"), m, "y");
        p.tau = j.at("tau").get<double>();
        p.dt = j.at("dt").get<double>();
        if (j.contains("reference_x") && !j["reference_x"].is_null())
            p.reference_x = json_to_vector(j["reference_x"], n, "reference_x");
        validate(p);
        return p;
    } catch (const json::exception& e) {
        throw IoError(std::string("problem: ") + e.what());
    } catch (const DimensionError& e) {
        throw IoError(e.what());
    } catch (const PreconditionError& e) {
        throw IoError(e.what());
    }
}

inline ProblemInstance load_problem(const std::string& path) {
    return problem_from_json(parse_json(read_file(path), path));
}

/// One row per line, comma-separated decimals.
inline RealMatrix parse_csv_matrix(const std::string& text) {
    std::vector<std::vector<double>> rows;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw IoError("csv: invalid number '" + cell + "'");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError("csv: ragged rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty()) throw IoError("csv: empty matrix");
    RealMatrix A(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            A(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
    if (!A.allFinite()) throw IoError("csv: non-finite entry");
    return A;
}

inline RealMatrix load_csv_matrix(const std::string& path) { return parse_csv_matrix(read_file(path)); }

// ---------------------------------------------------------------------------
// Solver outputs
// ---------------------------------------------------------------------------

inline void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows) {
    out << "k,objective,residual,err_vs_ref,l1_norm\n";
    for (const auto& r : rows) {
        out << r.k << ',' << format_real(r.objective) << ',' << format_real(r.residual) << ',';
        if (r.err_vs_ref) out << format_real(*r.err_vs_ref);
        out << ',' << format_real(r.l1_norm) << '\n';
    }
}

inline json certificate_to_json(const CertificateReport& c) {
    json v = json::array();
    for (const auto& e : c.on_support_violations) v.push_back({{"index", e.index}, {"value", e.value}});
    return {{"pass", c.pass}, {"off_support_max", c.off_support_max}, {"on_support_violations", v}};
}

inline json oracle_to_json(const OracleResult& r) {
    return {{"x_star", vector_to_json(r.x_star)},
            {"value", r.value},
            {"unique", r.unique},
            {"num_witnesses", r.witnesses.size()}};
}

struct TrajectoryRow {
    double t = 0.0;
    std::optional<double> energy;
    double residual = 0.0;
    std::optional<double> err_vs_ref;
    double z_norm = 0.0;
};

inline void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
    out << "t,energy,residual,err_vs_ref,z_norm\n";
    for (const auto& r : rows) {
        out << format_real(r.t) << ',';
        if (r.energy) out << format_real(*r.energy);
        out << ',' << format_real(r.residual) << ',';
        if (r.err_vs_ref) out << format_real(*r.err_vs_ref);
        out << ',' << format_real(r.z_norm) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Imaging
// ---------------------------------------------------------------------------

struct SceneConfig {
    imaging::ArrayGeometry geometry;
    imaging::ImageWindow window;
    imaging::ScattererSet scatterers;
    double beta = 0.0;
    std::uint64_t seed = 0;
};

/// {"N", "pitch", "source_index" (0-based, optional), "L", "nx", "ny",
///  "pixel_pitch", "scatterers": [{"ix", "iy", "rho"}], "beta", "seed"}
inline SceneConfig scene_from_json(const json& j) {
    try {
        SceneConfig s;
        const Index n = j.at("N").get<Index>();
        s.geometry = imaging::ArrayGeometry::centred(n, j.value("pitch", 1.0));
        if (j.contains("source_index")) s.geometry.source_index = j["source_index"].get<Index>();
        s.window.range = j.at("L").get<double>();
        s.window.nx = j.at("nx").get<Index>();
        s.window.ny = j.at("ny").get<Index>();
        s.window.pixel_pitch = j.value("pixel_pitch", 1.0);
        for (const auto& sc : j.at("scatterers")) {
            const Index ix = sc.at("ix").get<Index>();
            const Index iy = sc.at("iy").get<Index>();
            if (ix < 0 || ix >= s.window.nx || iy < 0 || iy >= s.window.ny)
                throw IoError("scene: scatterer outside the window");
            s.scatterers.grid_indices.push_back(s.window.index(ix, iy));
            s.scatterers.reflectivities.push_back(sc.at("rho").get<double>());
        }
        s.beta = j.value("beta", 0.0);
        s.seed = j.value("seed", std::uint64_t{0});
        s.geometry.validate();
        s.window.validate();
        s.scatterers.validate(s.window.size());
        if (!(s.beta >= 0.0)) throw IoError("scene: beta must be nonnegative");
        return s;
    } catch (const json::exception& e) {
        throw IoError(std::string("scene: ") + e.what());
    } catch (const PreconditionError& e) {
        throw IoError(std::string("scene: ") + e.what());
    } catch (const DimensionError& e) {
        throw IoError(std::string("scene: ") + e.what());
    }
}

/// ny lines of nx comma-separated values.
inline std::string grid_to_csv(const Vector& grid, Index nx, Index ny) {
    std::ostringstream out;
    for (Index iy = 0; iy < ny; ++iy) {
        for (Index ix = 0; ix < nx; ++ix) {
            if (ix) out << ',';
            out << format_real(grid[iy * nx + ix]);
        }
        out << '\n';
    }
    return out.str();
}

struct PgmImage {
    std::string text;
    double scale = 0.0;  // grey = round(clamp(value·scale, 0, 255))
};

/// ASCII P2 greymap; values are scaled so the maximum maps to 255 and
/// negative values clamp to 0.
inline PgmImage grid_to_pgm(const Vector& grid, Index nx, Index ny) {
    const double peak = grid.size() ? grid.maxCoeff() : 0.0;
    PgmImage img;
    img.scale = peak > 0.0 ? 255.0 / peak : 0.0;
    std::ostringstream out;
    out << "P2\n" << nx << ' ' << ny << "\n255\n";
    for (Index iy = 0; iy < ny; ++iy) {
        for (Index ix = 0; ix < nx; ++ix) {
            const double v = std::clamp(grid[iy * nx + ix] * img.scale, 0.0, 255.0);
            if (ix) out << ' ';
            out << static_cast<int>(std::lround(v));
        }
        out << '\n';
    }
    img.text = out.str();
    return img;
}

inline json metrics_to_json(const imaging::ImageMetrics& m) {
    return {{"support_precision", m.support_precision},
            {"support_recall", m.support_recall},
            {"max_reflectivity_error", m.max_reflectivity_error},
            {"l2_error", m.l2_error}};
}

} // namespace gelma::io
