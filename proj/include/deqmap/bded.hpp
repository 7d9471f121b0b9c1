#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "beltrami.hpp"
#include "density.hpp"
#include "domain.hpp"
#include "lbs.hpp"

namespace deqmap {

// Exact per-face Beltrami increment caused by displacing the map e by
// dt * velocity. The velocity enters through its own affine coefficients on
// the source charts, so nu + increment matches the Beltrami coefficient of
// the displaced embedding identically, not only to first order in dt.
[[nodiscard]] inline BeltramiField beltrami_increment(const TriangleMesh& m,
                                                      const std::vector<FaceChart>& charts,
                                                      const PlanarEmbedding& e,
                                                      const std::vector<Vec2>& velocity,
                                                      const BeltramiField& nu, double dt) {
    if (velocity.size() != e.pos.size())
        throw DeqError("beltrami increment: velocity/embedding size mismatch");
    if (nu.size() != m.faces.size())
        throw DeqError("beltrami increment: field/face count mismatch");
    PlanarEmbedding vfield;
    vfield.pos.resize(velocity.size());
    for (size_t v = 0; v < velocity.size(); ++v) vfield.pos[v] = to_cplx(velocity[v]);

    BeltramiField out(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const AffineCoeffs cg = affine_coeffs(charts[f], m.faces[f], e);
        const AffineCoeffs cv = affine_coeffs(charts[f], m.faces[f], vfield);
        const cplx den = cg.dz() + dt * cv.dz();
        if (!(std::abs(den) > 0.0))
            throw DeqError("beltrami increment: degenerate displaced face");
        out[f] = dt * (cv.dzbar() - nu[f] * cv.dz()) / den;
    }
    return out;
}

struct BdedConfig {
    double alpha = 0.1;  // shrink weight on the field itself
    double beta = 0.05;  // smoothing weight on the field Laplacian
    double dt = 0.1;
    double delta = 0.1;     // cap margin handed to chop
    int max_halvings = 5;   // dt retries when the rebuilt map folds
};

struct BdedResult {
    PlanarEmbedding embedding;
    BeltramiField nu;
    double dt_used = 0.0;
    bool stepped = false;
};

// One density-equalizing descent step on the Beltrami coefficient. Boundary
// vertices slide along their carrying circles (Neumann velocity plus circle
// projection), the interior follows the reconstruction of the updated field
// from the source domain. When every retry folds, the input state comes back
// with stepped = false.
[[nodiscard]] inline BdedResult bded_step(const TriangleMesh& m,
                                          const std::vector<FaceChart>& charts,
                                          const PlanarEmbedding& e, const BeltramiField& nu,
                                          const std::vector<double>& population,
                                          const CircularDomainSpec& domain,
                                          const DomainBoundary& boundary, const FEOperators& ops,
                                          const BdedConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw DeqError("bded: dt must be positive");
    if (!(sup_abs(nu) < 1.0)) throw DeqError("bded: sup|nu| >= 1");

    const TriangleMesh cur = planar_to_mesh(e, m.faces);
    const std::vector<FaceChart> cur_charts = charts_from_embedding(m, e);
    const FEOperators cur_ops = build_fe_operators(cur, cur_charts);
    const DensityField rho = density_field(population, cur, cur_ops);
    const Eigen::VectorXd smoothed = diffusion_step(rho.vertex, cur_ops, cfg.dt);
    const std::vector<Vec2> vel =
        velocity_field(smoothed, m, cur_charts, cur_ops, e, domain, boundary, true);

    BeltramiField lap;
    if (cfg.beta != 0.0) lap = beltrami_laplacian(nu, m, ops);

    for (int attempt = 0; attempt <= cfg.max_halvings; ++attempt) {
        const double dt = cfg.dt / static_cast<double>(1 << attempt);

        BeltramiField target = beltrami_increment(m, charts, e, vel, nu, dt);
        for (size_t f = 0; f < target.size(); ++f) {
            target[f] += nu[f] - dt * cfg.alpha * nu[f];
            if (cfg.beta != 0.0) target[f] += dt * cfg.beta * lap[f];
        }
        chop(target, cfg.delta);

        PlanarEmbedding adv = e;
        for (int v : boundary.outer) adv[v] += dt * to_cplx(vel[v]);
        for (const auto& loop : boundary.holes)
            for (int v : loop) adv[v] += dt * to_cplx(vel[v]);
        project_boundary(adv, domain, boundary);

        Constraints bc;
        for (int v : boundary.outer) bc.add(v, adv[v]);
        for (const auto& loop : boundary.holes)
            for (int v : loop) bc.add(v, adv[v]);

        const PlanarEmbedding g = lbs_reconstruct(m, charts, target, bc);
        if (count_flips(m, g) == 0) {
            BdedResult out;
            out.nu = beltrami_from_charts(m, charts, g);
            out.embedding = g;
            out.dt_used = dt;
            out.stepped = true;
            return out;
        }
    }

    BdedResult out;
    out.embedding = e;
    out.nu = nu;
    return out;
}

}  // namespace deqmap
