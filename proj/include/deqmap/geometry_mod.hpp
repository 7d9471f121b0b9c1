#pragma once

// Geometry modification of a circular domain: the inner circles move along a
// combined density / quasiconformality descent while the outer boundary stays
// put, then the map is rebuilt onto the updated domain. Hole parameters
// (center, radius, per-vertex angles) are updated directly, so the circles
// stay exactly circular.

#include <unordered_map>

#include "beltrami.hpp"
#include "density.hpp"
#include "lbs.hpp"

namespace deqmap {

// Polar frame of one hole: per boundary vertex the angular coordinate, the
// unit outward radial direction, and the unit tangential direction (90
// degrees counterclockwise from radial).
struct HoleFrame {
    cplx center{0.0, 0.0};
    double radius = 0.0;
    std::vector<double> theta;
    std::vector<cplx> rhat;
    std::vector<cplx> that;
};

[[nodiscard]] inline std::vector<HoleFrame> hole_frames(const PlanarEmbedding& e,
                                                        const CircularDomainSpec& domain,
                                                        const DomainBoundary& boundary) {
    if (static_cast<int>(boundary.holes.size()) != domain.hole_count())
        throw DeqError("hole_frames: boundary/domain hole count mismatch");
    std::vector<HoleFrame> frames(boundary.holes.size());
    for (size_t h = 0; h < frames.size(); ++h) {
        HoleFrame& fr = frames[h];
        fr.center = domain.centers[h];
        fr.radius = domain.radii[h];
        for (int v : boundary.holes[h]) {
            const cplx d = e[v] - fr.center;
            if (!(std::abs(d) > 0.0)) throw DeqError("hole_frames: vertex at circle center");
            const double th = std::arg(d);
            fr.theta.push_back(th);
            fr.rhat.push_back(cplx(std::cos(th), std::sin(th)));
            fr.that.push_back(cplx(0.0, 1.0) * fr.rhat.back());
        }
    }
    return frames;
}

// Rates of the rigid motions of one hole: translation, radial inflation, and
// tangential rotation, expressed as displacement rates at the boundary.
struct RigidRates {
    cplx translation{0.0, 0.0};
    double radial = 0.0;
    double tangential = 0.0;
};

// Least-squares fit of a vertex velocity field by the hole's rigid motions:
// the translation is the plain mean, the radial and tangential rates are the
// mean projections of the remaining part onto the frame directions.
[[nodiscard]] inline RigidRates rigid_components(const std::vector<Vec2>& velocity,
                                                 const std::vector<int>& loop,
                                                 const HoleFrame& frame) {
    const size_t n = loop.size();
    if (n < 3) throw DeqError("rigid_components: hole needs at least 3 vertices");
    if (frame.theta.size() != n) throw DeqError("rigid_components: frame/loop size mismatch");
    RigidRates out;
    for (size_t j = 0; j < n; ++j) {
        const Vec2& v = velocity[static_cast<size_t>(loop[j])];
        out.translation += cplx(v.x(), v.y());
    }
    out.translation /= static_cast<double>(n);
    for (size_t j = 0; j < n; ++j) {
        const Vec2& v = velocity[static_cast<size_t>(loop[j])];
        const cplx w = cplx(v.x(), v.y()) - out.translation;
        out.radial += (std::conj(frame.rhat[j]) * w).real();
        out.tangential += (std::conj(frame.that[j]) * w).real();
    }
    out.radial /= static_cast<double>(n);
    out.tangential /= static_cast<double>(n);
    return out;
}

// Derivative of the face Beltrami coefficient with respect to the target
// position of one corner. The coefficient is holomorphic in each target
// vertex, so a single complex number per corner captures the derivative:
// a displacement delta changes mu by derivative * delta.
[[nodiscard]] inline cplx face_mu_derivative(const FaceChart& ch, const std::array<int, 3>& face,
                                             const PlanarEmbedding& e, int corner) {
    cplx N(0.0, 0.0), D(0.0, 0.0);
    for (int c = 0; c < 3; ++c) {
        const cplx u(ch.grad[c].x(), ch.grad[c].y());
        N += u * e[face[c]];
        D += std::conj(u) * e[face[c]];
    }
    if (!(std::abs(D) > 0.0)) throw DeqError("boundary descent: degenerate face map");
    const cplx u(ch.grad[corner].x(), ch.grad[corner].y());
    return (u * D - N * std::conj(u)) / (D * D);
}

namespace detail {

// Cotangent of the source angle at a corner, recovered from the hat-gradient
// identity grad_a . grad_b = -cot(angle at c) / (2 area).
[[nodiscard]] inline double chart_cot(const FaceChart& ch, int corner) {
    const int a = (corner + 1) % 3, b = (corner + 2) % 3;
    return -2.0 * ch.area * ch.grad[a].dot(ch.grad[b]);
}

}  // namespace detail

// Boundary quasiconformal energies of one hole: the source-area-weighted
// |nu|^2 over the hole's 1-ring faces, and the cotangent smoothness energy of
// the vertex-averaged field over the same faces. Used by the descent below
// and by its finite-difference checks.
[[nodiscard]] inline std::pair<double, double> boundary_qc_energies(
    const BeltramiField& nu, const TriangleMesh& m, const std::vector<FaceChart>& charts,
    const FEOperators& ops, const std::vector<int>& loop) {
    std::vector<char> on_loop(static_cast<size_t>(m.vertex_count()), 0);
    for (int v : loop) on_loop[static_cast<size_t>(v)] = 1;
    const std::vector<cplx> nv = vertex_beltrami(nu, ops);
    double e2 = 0.0, e3 = 0.0;
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& fc = m.faces[f];
        if (!(on_loop[fc[0]] || on_loop[fc[1]] || on_loop[fc[2]])) continue;
        e2 += charts[f].area * std::norm(nu[f]);
        for (int c = 0; c < 3; ++c) {
            const cplx diff = nv[fc[(c + 1) % 3]] - nv[fc[(c + 2) % 3]];
            e3 += 0.5 * detail::chart_cot(charts[f], c) * std::norm(diff);
        }
    }
    return {e2, e3};
}

// Descent rates (negative projected gradients, averaged over the hole) of the
// two boundary quasiconformal energies for every hole. The |nu|^2 term pairs
// each face coefficient with its position derivative; the smoothness term
// chains through the area-weighted vertex averages. All source quantities
// (areas, cotangents, averaging weights) are held fixed.
[[nodiscard]] inline std::pair<std::vector<RigidRates>, std::vector<RigidRates>>
boundary_qc_descent(const BeltramiField& nu, const TriangleMesh& m,
                    const std::vector<FaceChart>& charts, const PlanarEmbedding& e,
                    const FEOperators& ops, const DomainBoundary& boundary,
                    const std::vector<HoleFrame>& frames) {
    if (boundary.holes.size() != frames.size())
        throw DeqError("boundary_qc_descent: boundary/frames size mismatch");
    const std::vector<cplx> nv = vertex_beltrami(nu, ops);
    std::vector<std::vector<int>> vertex_faces(static_cast<size_t>(m.vertex_count()));
    for (size_t f = 0; f < m.faces.size(); ++f)
        for (int c = 0; c < 3; ++c) vertex_faces[m.faces[f][c]].push_back(static_cast<int>(f));

    std::vector<RigidRates> qc(frames.size()), smooth(frames.size());
    for (size_t h = 0; h < frames.size(); ++h) {
        const std::vector<int>& loop = boundary.holes[h];
        const size_t n = loop.size();
        std::unordered_map<int, int> loop_pos;
        for (size_t j = 0; j < n; ++j) loop_pos[loop[j]] = static_cast<int>(j);

        // 1-ring face set and, per face, its corners lying on the hole.
        std::vector<int> ring;
        {
            std::vector<char> seen(m.faces.size(), 0);
            for (int v : loop)
                for (int f : vertex_faces[static_cast<size_t>(v)])
                    if (!seen[static_cast<size_t>(f)]) {
                        seen[static_cast<size_t>(f)] = 1;
                        ring.push_back(f);
                    }
        }

        // d(vertex value)/d(loop vertex position): both endpoints share a
        // face, so assembly runs over ring faces only.
        std::unordered_map<long long, cplx> dvert;
        auto key = [&n](int vertex, int j) {
            return static_cast<long long>(vertex) * static_cast<long long>(n) + j;
        };
        std::vector<cplx> grad(n, cplx(0.0, 0.0));  // energy gradient per loop vertex
        for (int f : ring) {
            const auto& fc = m.faces[static_cast<size_t>(f)];
            for (int c = 0; c < 3; ++c) {
                const auto it = loop_pos.find(fc[c]);
                if (it == loop_pos.end()) continue;
                const int j = it->second;
                const cplx dmu = face_mu_derivative(charts[static_cast<size_t>(f)], fc, e, c);
                // |nu|^2 term: d(area |mu|^2) = 2 area Re(conj(mu) dmu dz).
                grad[static_cast<size_t>(j)] +=
                    2.0 * charts[static_cast<size_t>(f)].area * nu[static_cast<size_t>(f)] * std::conj(dmu);
                for (int c2 = 0; c2 < 3; ++c2)
                    dvert[key(fc[c2], j)] += ops.W.coeff(fc[c2], f) * dmu;
            }
        }
        qc[h].translation = cplx(0.0, 0.0);
        for (size_t j = 0; j < n; ++j) {
            qc[h].translation += grad[j];
            qc[h].radial += (std::conj(grad[j]) * frames[h].rhat[j]).real();
            qc[h].tangential += (std::conj(grad[j]) * frames[h].that[j]).real();
        }

        // Smoothness term: cot-weighted edge differences of vertex values.
        std::vector<cplx> grad3(n, cplx(0.0, 0.0));
        auto dv = [&](int vertex, int j) {
            const auto it = dvert.find(key(vertex, j));
            return it == dvert.end() ? cplx(0.0, 0.0) : it->second;
        };
        for (int f : ring) {
            const auto& fc = m.faces[static_cast<size_t>(f)];
            for (int c = 0; c < 3; ++c) {
                const int a = fc[(c + 1) % 3], b = fc[(c + 2) % 3];
                const cplx diff = nv[a] - nv[b];
                const double cot = detail::chart_cot(charts[static_cast<size_t>(f)], c);
                for (size_t j = 0; j < n; ++j) {
                    const cplx dd = dv(a, static_cast<int>(j)) - dv(b, static_cast<int>(j));
                    if (dd == cplx(0.0, 0.0)) continue;
                    grad3[j] += cot * diff * std::conj(dd);
                }
            }
        }
        for (size_t j = 0; j < n; ++j) {
            smooth[h].translation += grad3[j];
            smooth[h].radial += (std::conj(grad3[j]) * frames[h].rhat[j]).real();
            smooth[h].tangential += (std::conj(grad3[j]) * frames[h].that[j]).real();
        }
        const double inv = -1.0 / static_cast<double>(n);
        qc[h].translation *= inv;
        qc[h].radial *= inv;
        qc[h].tangential *= inv;
        smooth[h].translation *= inv;
        smooth[h].radial *= inv;
        smooth[h].tangential *= inv;
    }
    return {qc, smooth};
}

// Updated hole parameters after one descent step. A rejected update (no valid
// domain within the halving budget) keeps the input and sets skipped.
struct DomainUpdate {
    CircularDomainSpec domain;
    std::vector<std::vector<double>> theta;
    double dt_used = 0.0;
    bool skipped = false;
};

// Applies dt * rates to (center, radius, per-vertex angle) per hole, halving
// dt up to 10 times until the resulting spec keeps the holes disjoint and
// strictly inside the unit disk.
[[nodiscard]] inline DomainUpdate update_domain(const CircularDomainSpec& domain,
                                                const std::vector<HoleFrame>& frames,
                                                const std::vector<RigidRates>& rates, double dt) {
    if (!(dt > 0.0)) throw DeqError("update_domain: dt must be positive");
    if (static_cast<int>(rates.size()) != domain.hole_count() ||
        static_cast<int>(frames.size()) != domain.hole_count())
        throw DeqError("update_domain: rates/frames size mismatch");
    for (const RigidRates& r : rates)
        if (!std::isfinite(r.translation.real()) || !std::isfinite(r.translation.imag()) ||
            !std::isfinite(r.radial) || !std::isfinite(r.tangential))
            throw DeqError("update_domain: non-finite descent rates");

    DomainUpdate out;
    for (int attempt = 0; attempt <= 10; ++attempt) {
        CircularDomainSpec cand;
        std::vector<std::vector<double>> theta(frames.size());
        for (size_t h = 0; h < frames.size(); ++h) {
            cand.centers.push_back(domain.centers[h] + dt * rates[h].translation);
            cand.radii.push_back(domain.radii[h] + dt * rates[h].radial);
            theta[h] = frames[h].theta;
            const double dth = dt * rates[h].tangential / domain.radii[h];
            for (double& t : theta[h]) t += dth;
        }
        if (cand.is_valid() || cand.hole_count() == 0) {
            out.domain = std::move(cand);
            out.theta = std::move(theta);
            out.dt_used = dt;
            return out;
        }
        dt *= 0.5;
    }
    out.domain = domain;
    out.theta.resize(frames.size());
    for (size_t h = 0; h < frames.size(); ++h) out.theta[h] = frames[h].theta;
    out.skipped = true;
    return out;
}

// Target Beltrami field for the reconstruction: one descent step that shrinks
// the coefficient and smooths it, then the magnitude cutoff.
[[nodiscard]] inline BeltramiField modification_target(const BeltramiField& nu,
                                                       const TriangleMesh& m,
                                                       const FEOperators& ops, double alpha,
                                                       double beta, double dt,
                                                       double delta = 0.1) {
    BeltramiField out(nu.size());
    if (beta != 0.0) {
        const BeltramiField lap = beltrami_laplacian(nu, m, ops);
        for (size_t f = 0; f < nu.size(); ++f)
            out[f] = nu[f] + dt * (-alpha * nu[f] + beta * lap[f]);
    } else {
        for (size_t f = 0; f < nu.size(); ++f) out[f] = nu[f] * (1.0 - dt * alpha);
    }
    chop(out, delta);
    return out;
}

// Rebuilds the map onto the updated boundary: the target field drives a
// generalized Laplace solve with the new boundary as Dirichlet data. Returns
// the map and its Beltrami field recomputed from the map.
[[nodiscard]] inline std::pair<PlanarEmbedding, BeltramiField> domain_reconstruct(
    const TriangleMesh& m, const std::vector<FaceChart>& charts, const BeltramiField& nu,
    const Constraints& new_boundary, const FEOperators& ops, double alpha, double beta, double dt,
    double delta = 0.1) {
    if (!(sup_abs(nu) < 1.0)) throw DeqError("domain_reconstruct: sup|nu| >= 1");
    const BeltramiField target = modification_target(nu, m, ops, alpha, beta, dt, delta);
    PlanarEmbedding g = lbs_reconstruct(m, charts, target, new_boundary);
    return {std::move(g), beltrami_from_charts(m, charts, g)};
}

struct GmConfig {
    double alpha = 0.1;
    double beta = 0.05;
    double dt = 0.1;
    double delta = 0.1;
};

struct GmResult {
    PlanarEmbedding embedding;
    BeltramiField nu;
    CircularDomainSpec domain;
    std::vector<std::vector<double>> theta;
    double dt_used = 0.0;
    bool domain_updated = false;
};

// One full geometry-modification step. The density velocity (full, no normal
// projection here) is fitted by rigid motions per hole, the quasiconformal
// descents are weighted in, the hole parameters move with dt halving on
// collision, and the map is rebuilt from the source domain. When the update
// is rejected the input state is returned unchanged.
[[nodiscard]] inline GmResult gm_step(const TriangleMesh& m, const std::vector<FaceChart>& charts,
                                      const PlanarEmbedding& e, const BeltramiField& nu,
                                      const std::vector<double>& population,
                                      const CircularDomainSpec& domain,
                                      const DomainBoundary& boundary, const FEOperators& ops,
                                      const GmConfig& cfg) {
    const std::vector<HoleFrame> frames = hole_frames(e, domain, boundary);

    // Density and its velocity live on the current embedding.
    const TriangleMesh cur = planar_to_mesh(e, m.faces);
    const std::vector<FaceChart> cur_charts = charts_from_embedding(m, e);
    const FEOperators cur_ops = build_fe_operators(cur, cur_charts);
    const DensityField rho = density_field(population, cur, cur_ops);
    const Eigen::VectorXd smoothed = diffusion_step(rho.vertex, cur_ops, cfg.dt);
    const std::vector<Vec2> vel =
        velocity_field(smoothed, m, cur_charts, cur_ops, e, domain, boundary, false);

    auto [qc, smooth] = boundary_qc_descent(nu, m, charts, e, ops, boundary, frames);
    std::vector<RigidRates> combined(frames.size());
    for (size_t h = 0; h < frames.size(); ++h) {
        const RigidRates fit = rigid_components(vel, boundary.holes[h], frames[h]);
        combined[h].translation = fit.translation + cfg.alpha * qc[h].translation +
                                  cfg.beta * smooth[h].translation;
        combined[h].radial = fit.radial + cfg.alpha * qc[h].radial + cfg.beta * smooth[h].radial;
        combined[h].tangential =
            fit.tangential + cfg.alpha * qc[h].tangential + cfg.beta * smooth[h].tangential;
    }

    const DomainUpdate upd = update_domain(domain, frames, combined, cfg.dt);
    GmResult out;
    if (upd.skipped) {
        out.embedding = e;
        out.nu = nu;
        out.domain = domain;
        out.theta = upd.theta;
        return out;
    }

    Constraints bc;
    for (int v : boundary.outer) bc.add(v, e[v]);
    for (size_t h = 0; h < boundary.holes.size(); ++h)
        for (size_t j = 0; j < boundary.holes[h].size(); ++j) {
            const double th = upd.theta[h][j];
            bc.add(boundary.holes[h][j],
                   upd.domain.centers[h] + upd.domain.radii[h] * cplx(std::cos(th), std::sin(th)));
        }
    auto [g, gnu] = domain_reconstruct(m, charts, nu, bc, ops, cfg.alpha, cfg.beta, cfg.dt, cfg.delta);
    out.embedding = std::move(g);
    out.nu = std::move(gnu);
    out.domain = upd.domain;
    out.theta = upd.theta;
    out.dt_used = upd.dt_used;
    out.domain_updated = true;
    return out;
}

}  // namespace deqmap
