#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "bded.hpp"
#include "flatten.hpp"
#include "geometry_mod.hpp"

namespace deqmap {

struct SolverConfig {
    double alpha = 0.1;     // weight of the quasiconformality term
    double beta = 0.05;     // weight of the field smoothness term
    double eta = 10.0;      // landmark penalty weight (landmark solver only)
    double dt = 0.1;
    double delta = 0.1;     // cap margin handed to chop
    double epsilon = 1e-2;  // stop when |E_n - E_{n-1}| drops below this
    int max_iter = 200;
    int max_halvings = 5;   // dt retries per iteration before declaring a no-op
    double slack = 1e-8;    // admissible energy increase, relative to E_0
    double koebe_tol = 1e-3;
    int koebe_rounds = 20;
    int conformal_rounds = 5;
    bool enable_gm = true;  // false fixes the initial domain (ablation mode)
};

struct EnergyBreakdown {
    double density = 0.0;  // |grad of normalized density|^2 over the current embedding
    double qc = 0.0;       // |nu|^2 over the source domain
    double smooth = 0.0;   // Dirichlet energy of nu over the source domain
    double var = 0.0;      // variance of the normalized face density

    [[nodiscard]] double total(double alpha, double beta) const {
        return density + alpha * qc + beta * smooth;
    }
};

// The objective driving the iteration. The density term lives where the
// density does (the current embedding); the two field terms use the source
// operators, matching the reconstruction machinery.
[[nodiscard]] inline EnergyBreakdown evaluate_energy(const TriangleMesh& m,
                                                     const PlanarEmbedding& e,
                                                     const BeltramiField& nu,
                                                     const std::vector<double>& population,
                                                     const FEOperators& ops) {
    const TriangleMesh cur = planar_to_mesh(e, m.faces);
    const std::vector<FaceChart> cur_charts = charts_from_embedding(m, e);
    const FEOperators cur_ops = build_fe_operators(cur, cur_charts);
    const DensityField rho = density_field(population, cur, cur_ops);

    EnergyBreakdown out;
    out.var = normalized_density(rho.face).second;
    const Eigen::VectorXd tilde_vertex = rho.vertex / rho.face.mean();
    const std::vector<Vec2> grad = face_gradient(tilde_vertex, m, cur_charts);
    for (size_t f = 0; f < grad.size(); ++f)
        out.density += cur_ops.face_area[f] * grad[f].squaredNorm();
    const auto [e2, e3] = qc_energies(nu, ops);
    out.qc = e2;
    out.smooth = e3;
    return out;
}

struct IterationReport {
    int iteration = 0;
    EnergyBreakdown energy;
    double total = 0.0;
    double mean_abs_nu = 0.0;
    double sup_abs_nu = 0.0;
    int flips = 0;
    double dt_used = 0.0;
    double landmark_residual = 0.0;
};

struct DeqResult {
    PlanarEmbedding embedding;      // final vertex positions in the circular domain
    PlanarEmbedding initial;        // conformal flattening (the source domain)
    BeltramiField nu;               // Beltrami coefficient of the final map
    CircularDomainSpec domain;
    DomainBoundary boundary;
    std::vector<FaceChart> charts;  // source charts shared by every reconstruction
    FEOperators ops;                // source-domain operators
    std::vector<IterationReport> history;
    bool converged = false;
    int iterations = 0;
    double flatten_residual = 0.0;  // worst hole circularity of the initial map
    bool flatten_converged = true;
};

namespace detail {

struct InitialDomain {
    PlanarEmbedding embedding;
    CircularDomainSpec domain;
    DomainBoundary boundary;
    double residual = 0.0;
    bool converged = true;
};

[[nodiscard]] inline InitialDomain initial_flattening(const TriangleMesh& m,
                                                      const SolverConfig& cfg) {
    const MeshTopology topo = build_topology(m);
    InitialDomain out;
    if (topo.boundary_loops.size() == 1) {
        out.embedding = disk_conformal(m, nullptr, cfg.conformal_rounds);
        out.boundary.outer = topo.boundary_loops[0];
    } else {
        KoebeResult k = koebe_circular_domain(m, cfg.koebe_tol, cfg.koebe_rounds);
        out.embedding = std::move(k.embedding);
        out.domain = std::move(k.domain);
        out.boundary = std::move(k.boundary);
        out.residual = k.residual;
        out.converged = k.converged;
    }
    return out;
}

[[nodiscard]] inline IterationReport snapshot(int iter, const EnergyBreakdown& eb,
                                              const SolverConfig& cfg, const TriangleMesh& m,
                                              const PlanarEmbedding& e, const BeltramiField& nu,
                                              double dt_used) {
    IterationReport r;
    r.iteration = iter;
    r.energy = eb;
    r.total = eb.total(cfg.alpha, cfg.beta);
    r.mean_abs_nu = mean_abs(nu);
    r.sup_abs_nu = sup_abs(nu);
    r.flips = count_flips(m, e);
    r.dt_used = dt_used;
    return r;
}

[[nodiscard]] inline DeqResult start_from_flattening(const TriangleMesh& m,
                                                     const SolverConfig& cfg) {
    InitialDomain init = initial_flattening(m, cfg);
    DeqResult res;
    res.initial = init.embedding;
    res.embedding = std::move(init.embedding);
    res.domain = std::move(init.domain);
    res.boundary = std::move(init.boundary);
    res.flatten_residual = init.residual;
    res.flatten_converged = init.converged;
    res.charts = charts_from_embedding(m, res.initial);
    res.ops = build_fe_operators(m, res.charts);
    res.nu = beltrami_from_charts(m, res.charts, res.embedding);
    return res;
}

}  // namespace detail

// Alternates geometry modification and the density-equalizing descent until
// the energy settles. An iteration is accepted only when the rebuilt map is
// flip-free with sup|nu| < 1 and the energy does not grow beyond the slack;
// otherwise dt is halved and the whole iteration redone. When no admissible
// step exists the state is stationary and the run stops.
[[nodiscard]] inline DeqResult run_deq(const TriangleMesh& m,
                                       const std::vector<double>& population,
                                       const SolverConfig& cfg) {
    DeqResult res = detail::start_from_flattening(m, cfg);

    EnergyBreakdown eb = evaluate_energy(m, res.embedding, res.nu, population, res.ops);
    const double e0 = eb.total(cfg.alpha, cfg.beta);
    double e_prev = e0;
    res.history.push_back(detail::snapshot(0, eb, cfg, m, res.embedding, res.nu, 0.0));

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        bool accepted = false;
        PlanarEmbedding next_e;
        BeltramiField next_nu;
        CircularDomainSpec next_domain;
        EnergyBreakdown next_eb;
        double next_total = 0.0;
        double dt_used = 0.0;

        for (int attempt = 0; attempt <= cfg.max_halvings && !accepted; ++attempt) {
            const double dt = cfg.dt / static_cast<double>(1 << attempt);
            try {
                GmConfig gmc;
                gmc.alpha = cfg.alpha;
                gmc.beta = cfg.beta;
                gmc.dt = dt;
                gmc.delta = cfg.delta;
                GmResult gm;
                if (cfg.enable_gm) {
                    gm = gm_step(m, res.charts, res.embedding, res.nu, population, res.domain,
                                 res.boundary, res.ops, gmc);
                } else {
                    gm.embedding = res.embedding;
                    gm.nu = res.nu;
                    gm.domain = res.domain;
                }
                if (count_flips(m, gm.embedding) != 0 || !(sup_abs(gm.nu) < 1.0)) continue;
                BdedConfig bdc;
                bdc.alpha = cfg.alpha;
                bdc.beta = cfg.beta;
                bdc.dt = dt;
                bdc.delta = cfg.delta;
                bdc.max_halvings = 0;  // the driver owns the retry schedule
                const BdedResult bd = bded_step(m, res.charts, gm.embedding, gm.nu, population,
                                                gm.domain, res.boundary, res.ops, bdc);
                if (!bd.stepped) continue;
                if (count_flips(m, bd.embedding) != 0 || !(sup_abs(bd.nu) < 1.0)) continue;
                const EnergyBreakdown cand =
                    evaluate_energy(m, bd.embedding, bd.nu, population, res.ops);
                const double tot = cand.total(cfg.alpha, cfg.beta);
                if (tot <= e_prev + cfg.slack * e0) {
                    accepted = true;
                    next_e = bd.embedding;
                    next_nu = bd.nu;
                    next_domain = gm.domain;
                    next_eb = cand;
                    next_total = tot;
                    dt_used = dt;
                }
            } catch (const DeqError&) {
                // A throw marks the trial step as inadmissible, same as a flip.
                continue;
            }
        }
        if (!accepted) {
            res.converged = true;
            break;
        }
        res.embedding = std::move(next_e);
        res.nu = std::move(next_nu);
        res.domain = next_domain;
        res.iterations = iter;
        res.history.push_back(
            detail::snapshot(iter, next_eb, cfg, m, res.embedding, res.nu, dt_used));
        if (std::abs(next_total - e_prev) < cfg.epsilon) {
            res.converged = true;
            break;
        }
        e_prev = next_total;
    }
    return res;
}

// Solves ((alpha + eta) A - beta L) x = eta A mu_vertex on vertices and
// carries the result back to faces by corner averaging. This is the screened
// smoothing that pulls the field variable toward the map's coefficient.
[[nodiscard]] inline BeltramiField penalty_smooth_field(const BeltramiField& mu,
                                                        const TriangleMesh& m,
                                                        const FEOperators& ops, double alpha,
                                                        double beta, double eta) {
    const int nv = static_cast<int>(ops.vertex_area.size());
    Eigen::SparseMatrix<double> A(nv, nv);
    std::vector<Eigen::Triplet<double>> at;
    at.reserve(static_cast<size_t>(nv));
    for (int v = 0; v < nv; ++v) at.emplace_back(v, v, ops.vertex_area[v]);
    A.setFromTriplets(at.begin(), at.end());
    const Eigen::SparseMatrix<double> M = (alpha + eta) * A - beta * ops.L;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
    if (solver.info() != Eigen::Success)
        throw DeqError("penalty smoothing: factorization failed");

    const std::vector<cplx> mu_v = vertex_beltrami(mu, ops);
    Eigen::VectorXd re(nv), im(nv);
    for (int v = 0; v < nv; ++v) {
        re[v] = eta * ops.vertex_area[v] * mu_v[v].real();
        im[v] = eta * ops.vertex_area[v] * mu_v[v].imag();
    }
    const Eigen::VectorXd xr = solver.solve(re);
    const Eigen::VectorXd xi = solver.solve(im);

    BeltramiField out(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        cplx s(0.0, 0.0);
        for (int v : m.faces[f]) s += cplx(xr[v], xi[v]);
        out[f] = s / 3.0;
    }
    return out;
}

// Landmark-constrained variant. The splitting keeps two face fields: mu
// follows the density flow and is repeatedly projected onto maps satisfying
// the landmarks, nu is its screened smoothing. Both reconstructions pin the
// landmark vertices, so accepted iterates satisfy the constraints to solver
// precision. An empty landmark set reduces the model to the unconstrained
// one, so the call is forwarded verbatim.
[[nodiscard]] inline DeqResult run_ldeq(const TriangleMesh& m,
                                        const std::vector<double>& population,
                                        const LandmarkSet& landmarks, const SolverConfig& cfg) {
    if (landmarks.empty()) return run_deq(m, population, cfg);

    DeqResult res = detail::start_from_flattening(m, cfg);
    validate_landmarks(landmarks, res.domain, m.vertex_count());
    {
        std::vector<bool> on_boundary(static_cast<size_t>(m.vertex_count()), false);
        for (int v : res.boundary.outer) on_boundary[static_cast<size_t>(v)] = true;
        for (const auto& loop : res.boundary.holes)
            for (int v : loop) on_boundary[static_cast<size_t>(v)] = true;
        for (const Landmark& lm : landmarks)
            if (on_boundary[static_cast<size_t>(lm.vertex)])
                throw DeqError("ldeq: landmark on a boundary vertex");
    }

    BeltramiField mu(m.faces.size(), cplx(0.0, 0.0));
    BeltramiField nu_field(m.faces.size(), cplx(0.0, 0.0));

    auto residual_of = [&](const PlanarEmbedding& e) {
        double r = 0.0;
        for (const Landmark& lm : landmarks) r = std::max(r, std::abs(e[lm.vertex] - lm.target));
        return r;
    };

    EnergyBreakdown eb = evaluate_energy(m, res.embedding, nu_field, population, res.ops);
    const double e0 = eb.total(cfg.alpha, cfg.beta);
    double e_prev = e0;
    {
        IterationReport r0 = detail::snapshot(0, eb, cfg, m, res.embedding, nu_field, 0.0);
        r0.landmark_residual = residual_of(res.embedding);
        res.history.push_back(r0);
    }

    for (int iter = 1; iter <= cfg.max_iter; ++iter) {
        bool accepted = false;
        PlanarEmbedding next_e;
        BeltramiField next_mu, next_nu;
        CircularDomainSpec next_domain;
        double dt_used = 0.0;

        for (int attempt = 0; attempt <= cfg.max_halvings && !accepted; ++attempt) {
            const double dt = cfg.dt / static_cast<double>(1 << attempt);
            try {
                // Geometry modification with the true coefficient of the map.
                const BeltramiField map_nu = beltrami_from_charts(m, res.charts, res.embedding);
                if (!(sup_abs(map_nu) < 1.0)) break;
                GmConfig gmc;
                gmc.alpha = cfg.alpha;
                gmc.beta = cfg.beta;
                gmc.dt = dt;
                gmc.delta = cfg.delta;
                const GmResult gm = gm_step(m, res.charts, res.embedding, map_nu, population,
                                            res.domain, res.boundary, res.ops, gmc);
                if (count_flips(m, gm.embedding) != 0) continue;

                // Density flow on the fixed new boundary shape.
                const TriangleMesh cur = planar_to_mesh(gm.embedding, m.faces);
                const std::vector<FaceChart> cur_charts = charts_from_embedding(m, gm.embedding);
                const FEOperators cur_ops = build_fe_operators(cur, cur_charts);
                const DensityField rho = density_field(population, cur, cur_ops);
                const Eigen::VectorXd smoothed = diffusion_step(rho.vertex, cur_ops, dt);
                const std::vector<Vec2> vel = velocity_field(smoothed, m, cur_charts, cur_ops,
                                                             gm.embedding, gm.domain,
                                                             res.boundary, true);
                const BeltramiField inc =
                    beltrami_increment(m, res.charts, gm.embedding, vel, gm.nu, dt);

                BeltramiField mu_cand = mu;
                for (size_t f = 0; f < mu_cand.size(); ++f)
                    mu_cand[f] += inc[f] + 2.0 * dt * cfg.eta * (nu_field[f] - mu[f]);
                chop(mu_cand, cfg.delta);

                Constraints bc;
                for (int v : res.boundary.outer) bc.add(v, gm.embedding[v]);
                for (const auto& loop : res.boundary.holes)
                    for (int v : loop) bc.add(v, gm.embedding[v]);
                for (const Landmark& lm : landmarks) bc.add(lm.vertex, lm.target);

                const PlanarEmbedding gstar = lbs_reconstruct(m, res.charts, mu_cand, bc);
                mu_cand = beltrami_from_charts(m, res.charts, gstar);
                chop(mu_cand, cfg.delta);

                BeltramiField nu_cand =
                    penalty_smooth_field(mu_cand, m, res.ops, cfg.alpha, cfg.beta, cfg.eta);
                chop(nu_cand, cfg.delta);

                const PlanarEmbedding g = lbs_reconstruct(m, res.charts, nu_cand, bc);
                const BeltramiField g_mu = beltrami_from_charts(m, res.charts, g);
                for (size_t f = 0; f < nu_cand.size(); ++f)
                    nu_cand[f] += dt * (g_mu[f] - nu_cand[f]);
                chop(nu_cand, cfg.delta);

                if (count_flips(m, g) != 0) continue;
                accepted = true;
                next_e = g;
                next_mu = std::move(mu_cand);
                next_nu = std::move(nu_cand);
                next_domain = gm.domain;
                dt_used = dt;
            } catch (const DeqError&) {
                // A throw marks the trial step as inadmissible, same as a flip.
                continue;
            }
        }
        if (!accepted) break;

        res.embedding = std::move(next_e);
        res.domain = next_domain;
        mu = std::move(next_mu);
        nu_field = std::move(next_nu);
        res.iterations = iter;

        eb = evaluate_energy(m, res.embedding, nu_field, population, res.ops);
        const double total = eb.total(cfg.alpha, cfg.beta);
        IterationReport rep = detail::snapshot(iter, eb, cfg, m, res.embedding, nu_field, dt_used);
        rep.landmark_residual = residual_of(res.embedding);
        res.history.push_back(rep);
        if (std::abs(total - e_prev) < cfg.epsilon) {
            res.converged = true;
            break;
        }
        e_prev = total;
    }

    res.nu = beltrami_from_charts(m, res.charts, res.embedding);
    return res;
}

struct MapMetrics {
    double density_var = 0.0;
    double mean_abs_mu_surface = 0.0;  // surface-to-plane distortion
    double sup_abs_mu_surface = 0.0;
    double mean_abs_mu_planar = 0.0;   // source-domain-to-target composite
    double sup_abs_mu_planar = 0.0;
    int flips = 0;
    double landmark_residual = 0.0;
};

// Quality summary of a finished map. The density variance needs positive
// face areas, so it is reported as NaN when the embedding has flips.
[[nodiscard]] inline MapMetrics map_metrics(const TriangleMesh& m, const PlanarEmbedding& final_e,
                                            const PlanarEmbedding& source_e,
                                            const std::vector<double>& population,
                                            const LandmarkSet& landmarks = {}) {
    MapMetrics out;
    out.flips = count_flips(m, final_e);

    const BeltramiField mu_s = beltrami_from_charts(m, charts_from_surface(m), final_e);
    out.mean_abs_mu_surface = detail::mean_abs(mu_s);
    out.sup_abs_mu_surface = sup_abs(mu_s);
    const BeltramiField mu_p =
        beltrami_from_charts(m, charts_from_embedding(m, source_e), final_e);
    out.mean_abs_mu_planar = detail::mean_abs(mu_p);
    out.sup_abs_mu_planar = sup_abs(mu_p);

    if (out.flips == 0) {
        const TriangleMesh cur = planar_to_mesh(final_e, m.faces);
        const std::vector<FaceChart> cur_charts = charts_from_embedding(m, final_e);
        const FEOperators cur_ops = build_fe_operators(cur, cur_charts);
        out.density_var = normalized_density(density_field(population, cur, cur_ops).face).second;
    } else {
        out.density_var = std::numeric_limits<double>::quiet_NaN();
    }
    for (const Landmark& lm : landmarks)
        out.landmark_residual = std::max(out.landmark_residual,
                                         std::abs(final_e[lm.vertex] - lm.target));
    return out;
}

}  // namespace deqmap
