#pragma once

// Initial flattening onto circular domains. Simply-connected meshes go
// through a harmonic map to the unit disk followed by Beltrami-correction
// rounds; multiply-connected meshes cycle hole-by-hole through inversion,
// hole filling, and the disk path until every hole is circular.

#include <limits>
#include <numbers>
#include <unordered_map>

#include "beltrami.hpp"
#include "charts.hpp"
#include "domain.hpp"
#include "lbs.hpp"

namespace deqmap {

namespace detail {

// Boundary targets on the unit circle, spaced proportionally to the loop's
// embedded edge lengths.
[[nodiscard]] inline Constraints circle_constraints(const TriangleMesh& m,
                                                    const std::vector<int>& loop) {
    const size_t n = loop.size();
    std::vector<double> cum(n + 1, 0.0);
    for (size_t t = 0; t < n; ++t)
        cum[t + 1] = cum[t] + (m.vertices[loop[(t + 1) % n]] - m.vertices[loop[t]]).norm();
    if (!(cum[n] > 0.0)) throw DeqError("disk_conformal: boundary loop has zero length");
    Constraints bc;
    for (size_t t = 0; t < n; ++t) {
        const double a = 2.0 * std::numbers::pi * cum[t] / cum[n];
        bc.add(loop[t], cplx(std::cos(a), std::sin(a)));
    }
    return bc;
}

[[nodiscard]] inline double mean_abs(const BeltramiField& nu) {
    double s = 0.0;
    for (const cplx& v : nu) s += std::abs(v);
    return nu.empty() ? 0.0 : s / static_cast<double>(nu.size());
}

// Closes the given boundary loops with a centroid fan each. The fan faces
// twin the existing boundary edges, keeping the orientation consistent.
[[nodiscard]] inline TriangleMesh fill_loops(const std::vector<Vec3>& positions,
                                             const std::vector<std::array<int, 3>>& faces,
                                             const MeshTopology& topo,
                                             const std::vector<int>& loop_ids) {
    TriangleMesh filled;
    filled.vertices = positions;
    filled.faces = faces;
    for (int l : loop_ids) {
        const std::vector<int>& loop = topo.boundary_loops[static_cast<size_t>(l)];
        Vec3 c = Vec3::Zero();
        for (int v : loop) c += positions[static_cast<size_t>(v)];
        c /= static_cast<double>(loop.size());
        const int ci = filled.vertex_count();
        filled.vertices.push_back(c);
        const size_t n = loop.size();
        for (size_t t = 0; t < n; ++t)
            filled.faces.push_back({loop[(t + 1) % n], loop[t], ci});
    }
    return filled;
}

[[nodiscard]] inline PlanarEmbedding strip_fill(const PlanarEmbedding& full, int orig_vertices) {
    PlanarEmbedding e;
    e.pos.assign(full.pos.begin(), full.pos.begin() + orig_vertices);
    return e;
}

}  // namespace detail

struct DiskConformalReport {
    int correction_rounds = 0;
    double mean_abs_mu = 0.0;
    bool fell_back = false;  // a correction flipped; earlier iterate returned
};

// Flattens a simply-connected open mesh onto the unit disk: arc-length
// boundary correspondence, harmonic interior, then Beltrami correction
// rounds, keeping the flip-free iterate with the lowest mean |mu|. Each
// round also respaces the boundary targets by the current map's conformal
// stretch |f_z| along the boundary, since a pinned correspondence caps how
// conformal the interior can become.
[[nodiscard]] inline PlanarEmbedding disk_conformal(const TriangleMesh& m,
                                                    DiskConformalReport* report = nullptr,
                                                    int max_rounds = 5) {
    const MeshTopology topo = build_topology(m);
    if (topo.boundary_loops.size() != 1)
        throw DeqError("disk_conformal: mesh must have exactly one boundary loop");
    const std::vector<FaceChart> charts = charts_from_surface(m);
    const std::vector<int>& loop = topo.boundary_loops[0];
    const size_t nb = loop.size();
    Constraints bc = detail::circle_constraints(m, loop);
    const BeltramiField zero(m.faces.size(), cplx(0.0, 0.0));

    // Face carrying each boundary edge (the loop runs along face edges).
    std::vector<int> edge_face(nb, -1);
    {
        std::unordered_map<long long, int> lookup;
        for (size_t f = 0; f < m.faces.size(); ++f)
            for (int c = 0; c < 3; ++c)
                lookup[static_cast<long long>(m.faces[f][c]) * m.vertex_count() +
                       m.faces[f][(c + 1) % 3]] = static_cast<int>(f);
        for (size_t t = 0; t < nb; ++t)
            edge_face[t] = lookup.at(static_cast<long long>(loop[t]) * m.vertex_count() +
                                     loop[(t + 1) % nb]);
    }

    PlanarEmbedding cur = lbs_reconstruct(m, charts, zero, bc);
    PlanarEmbedding best = cur;
    double best_mu = std::numeric_limits<double>::infinity();
    double cur_mu = best_mu;
    if (count_flips(m, cur) == 0) best_mu = cur_mu = detail::mean_abs(beltrami_from_charts(m, charts, cur));

    int rounds = 0;
    bool fell_back = false;
    for (int r = 0; r < max_rounds && count_flips(m, cur) == 0; ++r) {
        // The correction lives on the image: a map with Beltrami coefficient
        // -mu * f_z / conj(f_z) composed with cur cancels cur's distortion.
        BeltramiField corr(m.faces.size());
        std::vector<cplx> fzs(m.faces.size());
        for (size_t f = 0; f < m.faces.size(); ++f) {
            const AffineCoeffs co = affine_coeffs(charts[f], m.faces[f], cur);
            const cplx fz = co.dz();
            fzs[f] = fz;
            corr[f] = std::abs(fz) > 0.0 ? cplx(-co.mu() * fz / std::conj(fz)) : cplx(0.0, 0.0);
        }
        chop(corr, 0.1);
        // Conformal boundary correspondence: angular gaps proportional to
        // source length times the current conformal stretch.
        std::vector<double> w(nb);
        double total = 0.0;
        for (size_t t = 0; t < nb; ++t) {
            const double len =
                (m.vertices[loop[(t + 1) % nb]] - m.vertices[loop[t]]).norm();
            const double s = std::abs(fzs[static_cast<size_t>(edge_face[t])]);
            w[t] = len * (s > 0.0 ? s : 1.0);
            total += w[t];
        }
        double angle = std::arg(cur[loop[0]]);
        for (size_t t = 0; t < nb; ++t) {
            bc.val[t] = cplx(std::cos(angle), std::sin(angle));
            angle += 2.0 * std::numbers::pi * w[t] / total;
        }
        const PlanarEmbedding g = lbs_reconstruct(m, charts_from_embedding(m, cur), corr, bc);
        ++rounds;
        if (count_flips(m, g) > 0) {
            fell_back = true;
            break;
        }
        const double gmu = detail::mean_abs(beltrami_from_charts(m, charts, g));
        if (gmu < best_mu) {
            best = g;
            best_mu = gmu;
        }
        const bool improved = cur_mu - gmu > 1e-3;
        cur = g;
        cur_mu = gmu;
        if (!improved) break;
    }
    if (report) {
        report->correction_rounds = rounds;
        report->mean_abs_mu = std::isfinite(best_mu)
                                  ? best_mu
                                  : detail::mean_abs(beltrami_from_charts(m, charts, best));
        report->fell_back = fell_back;
    }
    return best;
}

struct KoebeResult {
    PlanarEmbedding embedding;
    CircularDomainSpec domain;
    DomainBoundary boundary;
    bool converged = false;
    double residual = std::numeric_limits<double>::infinity();
    int rounds = 0;
    int flips = 0;
};

// Flattens a mesh with k >= 1 holes onto the unit disk with k circular holes.
// Each cycle makes one loop the outer boundary via the inversion
// 1 / (z - pole), closes the other loops with centroid fans, reflattens with
// disk_conformal, and removes the fans again; the original outer loop is
// processed last so every cycle ends in the standard configuration. Stops
// when the worst relative circularity residual of the hole loops drops to
// tol, then snaps hole vertices onto their fitted circles.
[[nodiscard]] inline KoebeResult koebe_circular_domain(const TriangleMesh& m, double tol = 1e-3,
                                                       int max_rounds = 20) {
    const MeshTopology topo = build_topology(m);
    const int n_loops = static_cast<int>(topo.boundary_loops.size());
    if (n_loops < 2)
        throw DeqError("koebe_circular_domain: single boundary loop; use disk_conformal");
    const int nv = m.vertex_count();
    const int outer = longest_loop_index(m, topo);
    std::vector<int> hole_ids;
    for (int l = 0; l < n_loops; ++l)
        if (l != outer) hole_ids.push_back(l);

    // Bootstrap: close every hole of the 3D surface and flatten once.
    PlanarEmbedding e = detail::strip_fill(
        disk_conformal(detail::fill_loops(m.vertices, m.faces, topo, hole_ids)), nv);

    KoebeResult result;
    result.boundary.outer = topo.boundary_loops[static_cast<size_t>(outer)];
    for (int h : hole_ids) result.boundary.holes.push_back(topo.boundary_loops[static_cast<size_t>(h)]);

    // A measurement is sane only when every fitted hole circle sits inside
    // the unit disk; huge fits through near-degenerate loops would otherwise
    // win the residual comparison and wreck the snapping step.
    struct Measurement {
        CircularDomainSpec spec;
        double rel = 0.0;
        bool sane = true;
    };
    auto measure = [&](const PlanarEmbedding& cand) {
        Measurement out;
        for (const std::vector<int>& loop : result.boundary.holes) {
            std::vector<cplx> pts;
            pts.reserve(loop.size());
            for (int v : loop) pts.push_back(cand[v]);
            const CircleFit fit = fit_circle(pts);
            out.spec.centers.push_back(fit.center);
            out.spec.radii.push_back(fit.radius);
            out.rel = std::max(out.rel, fit.relative_residual);
            if (!(fit.radius > 0.0) || std::abs(fit.center) + fit.radius >= 1.0) out.sane = false;
        }
        return out;
    };

    const Measurement m0 = measure(e);
    result.embedding = e;
    result.domain = m0.spec;
    result.residual = m0.sane ? m0.rel : std::numeric_limits<double>::infinity();
    result.converged = result.residual <= tol;

    for (int round = 0; round < max_rounds && !result.converged; ++round) {
        // Holes first, original outer loop last.
        std::vector<int> order = hole_ids;
        order.push_back(outer);
        for (int target : order) {
            const std::vector<int>& loop = topo.boundary_loops[static_cast<size_t>(target)];
            cplx pole(0.0, 0.0);
            for (int v : loop) pole += e[v];
            pole /= static_cast<double>(loop.size());
            std::vector<Vec3> inverted(static_cast<size_t>(nv));
            for (int v = 0; v < nv; ++v) {
                const cplx d = e[v] - pole;
                if (!(std::abs(d) > 0.0))
                    throw DeqError("koebe_circular_domain: vertex coincides with inversion pole");
                const cplx w = 1.0 / d;
                inverted[static_cast<size_t>(v)] = Vec3(w.real(), w.imag(), 0.0);
            }
            std::vector<int> fill;
            for (int l = 0; l < n_loops; ++l)
                if (l != target) fill.push_back(l);
            e = detail::strip_fill(
                disk_conformal(detail::fill_loops(inverted, m.faces, topo, fill)), nv);
        }
        result.rounds = round + 1;
        const Measurement mr = measure(e);
        if (mr.sane && mr.rel < result.residual && count_flips(m, e) == 0) {
            result.embedding = e;
            result.domain = mr.spec;
            result.residual = mr.rel;
        }
        result.converged = result.residual <= tol;
    }

    // Snap hole loops onto the fitted circles. When the direct snap folds a
    // triangle, walk the boundary toward the circles in sub-steps instead,
    // each rebuilt with the current map's own coefficient so the previous
    // iterate is reproduced exactly at zero step. Gives an exact snap in the
    // benign case and a flip-free near-snap otherwise.
    const PlanarEmbedding pre = result.embedding;
    PlanarEmbedding snapped = result.embedding;
    (void)project_boundary(snapped, result.domain, result.boundary);
    if (count_flips(m, snapped) == 0 || count_flips(m, pre) != 0) {
        result.embedding = snapped;
    } else {
        const std::vector<FaceChart> pre_charts = charts_from_embedding(m, pre);
        std::vector<int> bdry = result.boundary.outer;
        for (const std::vector<int>& loop : result.boundary.holes)
            bdry.insert(bdry.end(), loop.begin(), loop.end());
        PlanarEmbedding cur = pre;
        double frac = 1.0;
        for (int sub = 0; sub < 400; ++sub) {
            double gap = 0.0;
            for (int v : bdry) gap = std::max(gap, std::abs(cur[v] - snapped[v]));
            if (gap < 1e-12) break;
            Constraints bc;
            for (int v : bdry) bc.add(v, cur[v] + frac * (snapped[v] - cur[v]));
            const BeltramiField mu = beltrami_from_charts(m, pre_charts, cur);
            const PlanarEmbedding g = lbs_reconstruct(m, pre_charts, mu, bc);
            if (count_flips(m, g) == 0) {
                cur = g;
                frac = std::min(1.0, 2.0 * frac);
            } else {
                frac *= 0.5;
                if (frac < 1e-5) break;
            }
        }
        result.embedding = cur;
    }
    result.flips = count_flips(m, result.embedding);
    result.converged = result.converged && result.flips == 0 && result.domain.is_valid();
    return result;
}

// Rescales everything so the outer boundary is exactly the unit circle and
// updates the hole circles accordingly.
inline void normalize_domain(PlanarEmbedding& e, CircularDomainSpec& domain,
                             const DomainBoundary& boundary) {
    std::vector<cplx> pts;
    pts.reserve(boundary.outer.size());
    for (int v : boundary.outer) pts.push_back(e[v]);
    const CircleFit fit = fit_circle(pts);
    for (cplx& z : e.pos) z = (z - fit.center) / fit.radius;
    for (size_t h = 0; h < domain.centers.size(); ++h) {
        domain.centers[h] = (domain.centers[h] - fit.center) / fit.radius;
        domain.radii[h] /= fit.radius;
    }
    for (int v : boundary.outer) {
        const double len = std::abs(e[v]);
        if (!(len > 0.0)) throw DeqError("normalize_domain: outer vertex at the center");
        e[v] /= len;
    }
    domain.validate();
}

}  // namespace deqmap
