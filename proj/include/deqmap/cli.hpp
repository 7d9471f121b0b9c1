#pragma once

// Command-line front end: population and landmark parsing, pipeline
// orchestration, report/plot-data emission, and the texture/remesh
// application utilities. Kept header-only so the commands are testable
// without spawning processes.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "driver.hpp"
#include "obj_io.hpp"
#include "remesh.hpp"

namespace deqmap::cli {

using json = nlohmann::ordered_json;

struct FlattenOptions {
    std::string input;
    std::string population;  // inline JSON or file path; empty = 3D areas
    std::string landmarks;   // JSON file path; empty = unconstrained
    std::string out = "out";
    SolverConfig solver;
};

struct TextureOptions {
    std::string input;  // source surface OBJ
    std::string flat;   // flattened OBJ (planar positions)
    std::string out = "out";
};

struct RemeshOptions {
    std::string input;
    std::string flat;
    std::string out = "out";
    double spacing = 0.05;
    double snap_tol = -1.0;  // negative = 0.3 * spacing
};

struct MetricsOptions {
    std::string input;
    std::string flat;
    std::string population;
    std::string landmarks;
    std::string report;  // optional report.json for the timing column
    std::string out = "out";
};

// ---------- input parsing ----------

[[nodiscard]] inline std::vector<double> population_from_json(const json& j,
                                                              const TriangleMesh& m) {
    const std::string mode = j.value("mode", std::string());
    auto centroid = [&](size_t f) {
        const auto& [i, jj, k] = m.faces[f];
        return Vec2((m.vertices[i].x() + m.vertices[jj].x() + m.vertices[k].x()) / 3.0,
                    (m.vertices[i].y() + m.vertices[jj].y() + m.vertices[k].y()) / 3.0);
    };
    if (mode == "uniform") return std::vector<double>(m.faces.size(), 1.0);
    if (mode == "area3d") return face_areas_3d(m);
    if (mode == "explicit") {
        auto v = j.at("values").get<std::vector<double>>();
        if (v.size() != m.faces.size())
            throw DeqError("population: explicit values count does not match the face count");
        return v;
    }
    if (mode == "scaled") {
        // 3D areas scaled inside disk regions of the source's xy coordinates
        std::vector<double> pop = face_areas_3d(m);
        for (const auto& r : j.at("regions")) {
            const double cx = r.at("cx").get<double>(), cy = r.at("cy").get<double>();
            const double rad = r.at("r").get<double>();
            const double factor = r.at("factor").get<double>();
            if (!(factor > 0.0)) throw DeqError("population: factors must be positive");
            for (size_t f = 0; f < m.faces.size(); ++f) {
                const Vec2 c = centroid(f);
                if (std::hypot(c.x() - cx, c.y() - cy) < rad) pop[f] *= factor;
            }
        }
        return pop;
    }
    if (mode == "quadrant") {
        // 3D areas scaled by the xy quadrant of the face centroid
        auto factors = j.at("factors").get<std::vector<double>>();
        if (factors.size() != 4) throw DeqError("population: quadrant needs 4 factors");
        std::vector<double> pop = face_areas_3d(m);
        for (size_t f = 0; f < m.faces.size(); ++f) {
            const Vec2 c = centroid(f);
            double a = std::atan2(c.y(), c.x());
            if (a < 0.0) a += 2.0 * std::numbers::pi;
            const int q = std::min(3, static_cast<int>(a / (std::numbers::pi / 2.0)));
            pop[f] *= factors[static_cast<size_t>(q)];
        }
        return pop;
    }
    throw DeqError("population: unknown mode '" + mode + "'");
}

// Inline JSON (leading '{'), a JSON file, or a plain file of per-face values.
[[nodiscard]] inline std::vector<double> resolve_population(const std::string& spec,
                                                            const TriangleMesh& m) {
    if (spec.empty()) return face_areas_3d(m);
    const size_t first = spec.find_first_not_of(" \t\n");
    if (first != std::string::npos && spec[first] == '{')
        return population_from_json(json::parse(spec), m);
    std::ifstream in(spec);
    if (!in) throw DeqError("population: cannot open '" + spec + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const size_t head = text.find_first_not_of(" \t\n\r");
    if (head != std::string::npos && text[head] == '{')
        return population_from_json(json::parse(text), m);
    std::vector<double> values;
    std::istringstream toks(text);
    double x = 0.0;
    while (toks >> x) values.push_back(x);
    if (values.size() != m.faces.size())
        throw DeqError("population: '" + spec + "' holds " + std::to_string(values.size()) +
                       " values for " + std::to_string(m.faces.size()) + " faces");
    return values;
}

[[nodiscard]] inline LandmarkSet load_landmarks(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DeqError("landmarks: cannot open '" + path + "'");
    const json j = json::parse(in);
    if (!j.is_array()) throw DeqError("landmarks: expected a JSON array");
    LandmarkSet out;
    for (const auto& item : j) {
        Landmark lm;
        lm.vertex = item.at("vertex").get<int>();
        const auto& t = item.at("target");
        lm.target = cplx(t.at(0).get<double>(), t.at(1).get<double>());
        out.push_back(lm);
    }
    return out;
}

// ---------- shared emission helpers ----------

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DeqError("cannot write '" + path.string() + "'");
    out << text;
}

[[nodiscard]] inline json domain_json(const CircularDomainSpec& d) {
    json holes = json::array();
    for (int h = 0; h < d.hole_count(); ++h)
        holes.push_back({{"center", {d.centers[h].real(), d.centers[h].imag()}},
                         {"radius", d.radii[h]}});
    return holes;
}

[[nodiscard]] inline json metrics_json(const MapMetrics& mm) {
    return {{"density_var", mm.density_var},
            {"mean_abs_mu", mm.mean_abs_mu_surface},
            {"sup_abs_mu", mm.sup_abs_mu_surface},
            {"mean_abs_mu_planar", mm.mean_abs_mu_planar},
            {"sup_abs_mu_planar", mm.sup_abs_mu_planar},
            {"flips", mm.flips},
            {"landmark_residual", mm.landmark_residual}};
}

[[nodiscard]] inline json history_json(const std::vector<IterationReport>& hist) {
    json out = json::array();
    for (const IterationReport& r : hist)
        out.push_back({{"iteration", r.iteration},
                       {"density", r.energy.density},
                       {"qc", r.energy.qc},
                       {"smooth", r.energy.smooth},
                       {"total", r.total},
                       {"var", r.energy.var},
                       {"mean_abs_nu", r.mean_abs_nu},
                       {"sup_abs_nu", r.sup_abs_nu},
                       {"flips", r.flips},
                       {"dt_used", r.dt_used},
                       {"landmark_residual", r.landmark_residual}});
    return out;
}

[[nodiscard]] inline PlanarEmbedding embedding_of(const TriangleMesh& flat) {
    return embedding_from_mesh_xy(flat);
}

// Source mesh and its flattened copy must share the vertex and face lists.
inline void check_pair(const TriangleMesh& m, const TriangleMesh& flat) {
    if (m.vertex_count() != flat.vertex_count() || m.faces != flat.faces)
        throw DeqError("source and flattened meshes do not match");
}

// Circular domain recovered from a flattened state: one fitted circle per
// interior boundary loop.
[[nodiscard]] inline CircularDomainSpec domain_of(const TriangleMesh& m,
                                                  const PlanarEmbedding& e) {
    const MeshTopology topo = build_topology(m);
    const int outer = outer_loop_index(topo, e);
    CircularDomainSpec domain;
    for (size_t l = 0; l < topo.boundary_loops.size(); ++l) {
        if (static_cast<int>(l) == outer) continue;
        std::vector<cplx> pts;
        for (int v : topo.boundary_loops[l]) pts.push_back(e[v]);
        const CircleFit fit = fit_circle(pts);
        domain.centers.push_back(fit.center);
        domain.radii.push_back(fit.radius);
    }
    return domain;
}

}  // namespace detail

// ---------- commands ----------

// Runs the solver and writes flattened.obj (planar coordinates as both
// positions and UVs), report.json, and histograms.csv. Exit 0 on
// convergence, 2 when stopped by the iteration cap (outputs still written).
inline int cmd_flatten(const FlattenOptions& opt) try {
    const auto t0 = std::chrono::steady_clock::now();
    const TriangleMesh m = load_obj(opt.input);
    const std::vector<double> pop = resolve_population(opt.population, m);
    LandmarkSet lms;
    if (!opt.landmarks.empty()) lms = load_landmarks(opt.landmarks);

    const DeqResult res =
        lms.empty() ? run_deq(m, pop, opt.solver) : run_ldeq(m, pop, lms, opt.solver);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::filesystem::create_directories(opt.out);
    const std::filesystem::path out(opt.out);

    TriangleMesh flat = planar_to_mesh(res.embedding, m.faces);
    flat.uvs.reserve(flat.vertices.size());
    for (const cplx& z : res.embedding.pos) flat.uvs.emplace_back(z.real(), z.imag());
    save_obj((out / "flattened.obj").string(), flat);

    const MapMetrics mm = map_metrics(m, res.embedding, res.initial, pop, lms);
    json rep = {{"input", opt.input},
                {"mesh", {{"vertices", m.vertex_count()}, {"faces", m.face_count()}}},
                {"config",
                 {{"alpha", opt.solver.alpha},
                  {"beta", opt.solver.beta},
                  {"eta", opt.solver.eta},
                  {"dt", opt.solver.dt},
                  {"delta", opt.solver.delta},
                  {"epsilon", opt.solver.epsilon},
                  {"max_iter", opt.solver.max_iter},
                  {"shape_preserving", !opt.solver.enable_gm},
                  {"landmarks", static_cast<int>(lms.size())}}},
                {"velocity_sign", "v = -grad(rho)/rho"},
                {"flatten",
                 {{"residual", res.flatten_residual}, {"converged", res.flatten_converged}}},
                {"domain", detail::domain_json(res.domain)},
                {"converged", res.converged},
                {"iterations", res.iterations},
                {"seconds", seconds},
                {"metrics", detail::metrics_json(mm)},
                {"history", detail::history_json(res.history)}};
    detail::write_text(out / "report.json", rep.dump(2) + "\n");

    // raw per-face values of the final state for external plotting
    const std::vector<double> ap = face_areas_planar(m, res.embedding);
    Eigen::VectorXd rho(static_cast<Eigen::Index>(m.faces.size()));
    for (size_t f = 0; f < m.faces.size(); ++f)
        rho[static_cast<Eigen::Index>(f)] = pop[f] / ap[f];
    const Eigen::VectorXd tilde = rho / rho.mean();
    const BeltramiField mu = beltrami_from_charts(m, charts_from_surface(m), res.embedding);
    std::string csv = "face,rho,rho_tilde,abs_mu\n";
    char line[128];
    for (size_t f = 0; f < m.faces.size(); ++f) {
        std::snprintf(line, sizeof(line), "%zu,%.17g,%.17g,%.17g\n", f,
                      rho[static_cast<Eigen::Index>(f)], tilde[static_cast<Eigen::Index>(f)],
                      std::abs(mu[f]));
        csv += line;
    }
    detail::write_text(out / "histograms.csv", csv);

    std::printf("flatten: %d faces, %d iterations, converged=%d, var=%.6g, mean|mu|=%.6g\n",
                m.face_count(), res.iterations, res.converged ? 1 : 0, mm.density_var,
                mm.mean_abs_mu_surface);
    return res.converged ? 0 : 2;
} catch (const std::exception& err) {
    std::fprintf(stderr, "deqmap flatten: %s\n", err.what());
    return 1;
}

// Writes textured.obj (source geometry, UVs from the flattening mapped to
// [0,1]^2), the per-face UV/3D area ratios as CSV, and the distortion
// variance as JSON.
inline int cmd_texture(const TextureOptions& opt) try {
    const TriangleMesh m = load_obj(opt.input);
    const TriangleMesh flat = load_obj(opt.flat);
    detail::check_pair(m, flat);
    const PlanarEmbedding e = detail::embedding_of(flat);
    if (count_flips(m, e) != 0) throw DeqError("texture: flattening has flipped faces");

    const TextureStats st = texture_stats(m, e);
    TriangleMesh textured = m;
    textured.uvs = uv_from_planar(e.pos);

    std::filesystem::create_directories(opt.out);
    const std::filesystem::path out(opt.out);
    save_obj((out / "textured.obj").string(), textured);

    std::string csv = "face,uv_over_3d\n";
    char line[64];
    for (size_t f = 0; f < st.uv_over_3d.size(); ++f) {
        std::snprintf(line, sizeof(line), "%zu,%.17g\n", f, st.uv_over_3d[f]);
        csv += line;
    }
    detail::write_text(out / "uv_ratio.csv", csv);
    const json rep = {{"faces", m.face_count()}, {"density_var", st.density_var}};
    detail::write_text(out / "texture_stats.json", rep.dump(2) + "\n");

    std::printf("texture: %d faces, area density var=%.6g\n", m.face_count(), st.density_var);
    return 0;
} catch (const std::exception& err) {
    std::fprintf(stderr, "deqmap texture: %s\n", err.what());
    return 1;
}

// Resamples the circular domain and maps the samples back through the
// inverse of the flattening; writes remeshed.obj plus a summary JSON.
inline int cmd_remesh(const RemeshOptions& opt) try {
    const TriangleMesh m = load_obj(opt.input);
    const TriangleMesh flat = load_obj(opt.flat);
    detail::check_pair(m, flat);
    const PlanarEmbedding e = detail::embedding_of(flat);
    if (count_flips(m, e) != 0) throw DeqError("remesh: flattening has flipped faces");

    const CircularDomainSpec domain = detail::domain_of(m, e);
    const RemeshResult rm = remesh_circular_domain(m, e, domain, opt.spacing, opt.snap_tol);

    std::filesystem::create_directories(opt.out);
    const std::filesystem::path out(opt.out);
    save_obj((out / "remeshed.obj").string(), rm.surface);
    const json rep = {{"vertices", rm.surface.vertex_count()},
                      {"faces", rm.surface.face_count()},
                      {"holes", domain.hole_count()},
                      {"dropped_samples", rm.dropped}};
    detail::write_text(out / "remesh_stats.json", rep.dump(2) + "\n");

    std::printf("remesh: %d vertices, %d faces, %d holes, %d dropped\n",
                rm.surface.vertex_count(), rm.surface.face_count(), domain.hole_count(),
                rm.dropped);
    return 0;
} catch (const std::exception& err) {
    std::fprintf(stderr, "deqmap remesh: %s\n", err.what());
    return 1;
}

// Recomputes the summary row from saved artifacts: faces, time (from the
// report when given), density variance, mean |mu|, flips.
inline int cmd_metrics(const MetricsOptions& opt) try {
    const TriangleMesh m = load_obj(opt.input);
    const TriangleMesh flat = load_obj(opt.flat);
    detail::check_pair(m, flat);
    const PlanarEmbedding e = detail::embedding_of(flat);
    const std::vector<double> pop = resolve_population(opt.population, m);
    LandmarkSet lms;
    if (!opt.landmarks.empty()) lms = load_landmarks(opt.landmarks);

    const MapMetrics mm = map_metrics(m, e, e, pop, lms);
    double seconds = 0.0;
    if (!opt.report.empty()) {
        std::ifstream in(opt.report);
        if (!in) throw DeqError("metrics: cannot open '" + opt.report + "'");
        seconds = json::parse(in).value("seconds", 0.0);
    }

    char row[256];
    std::snprintf(row, sizeof(row), "faces,time_s,density_var,mean_abs_mu,flips\n%d,%.3f,%.17g,%.17g,%d\n",
                  m.face_count(), seconds, mm.density_var, mm.mean_abs_mu_surface, mm.flips);
    std::filesystem::create_directories(opt.out);
    detail::write_text(std::filesystem::path(opt.out) / "metrics.csv", row);
    std::fputs(row, stdout);
    return 0;
} catch (const std::exception& err) {
    std::fprintf(stderr, "deqmap metrics: %s\n", err.what());
    return 1;
}

}  // namespace deqmap::cli
