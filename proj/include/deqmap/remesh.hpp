#pragma once

// Applications of a finished flattening: UV export, area-distortion
// statistics, and inverse-map remeshing of the circular domain.

#include "density.hpp"
#include "domain.hpp"
#include "locate.hpp"
#include "meshgen.hpp"

namespace deqmap {

// Texture coordinates in [0, 1]^2 from planar positions in the closed unit
// disk: uv = (z + 1 + i) / 2.
[[nodiscard]] inline std::vector<Vec2> uv_from_planar(const std::vector<cplx>& pos) {
    std::vector<Vec2> uv;
    uv.reserve(pos.size());
    for (const cplx& z : pos) uv.emplace_back(0.5 * (z.real() + 1.0), 0.5 * (z.imag() + 1.0));
    return uv;
}

struct TextureStats {
    std::vector<double> uv_over_3d;  // per-face planar area / surface area
    double density_var = 0.0;        // variance of the normalized surface density
};

// Area distortion of a flattening. The variance is taken over the normalized
// density rho = 3D area / planar area, so a flattening that equalizes the
// area population has density_var equal to its reported Var value.
[[nodiscard]] inline TextureStats texture_stats(const TriangleMesh& m, const PlanarEmbedding& e) {
    const std::vector<double> a3 = face_areas_3d(m);
    const std::vector<double> ap = face_areas_planar(m, e);
    TextureStats out;
    out.uv_over_3d.resize(m.faces.size());
    Eigen::VectorXd rho(static_cast<Eigen::Index>(m.faces.size()));
    for (size_t f = 0; f < m.faces.size(); ++f) {
        if (!(ap[f] > 0.0)) throw DeqError("texture: flipped or degenerate planar face");
        out.uv_over_3d[f] = ap[f] / a3[f];
        rho[static_cast<Eigen::Index>(f)] = a3[f] / ap[f];
    }
    out.density_var = normalized_density(rho).second;
    return out;
}

struct RemeshResult {
    TriangleMesh surface;  // planar samples carried back through the map
    int dropped = 0;       // samples with no containing or nearby face
};

// Resamples the flattened surface on a fresh isotropic triangulation of the
// circular domain and maps every sample back through the inverse of the
// flattening. Samples on the unit circle or the hole rims land just outside
// the source boundary chords; those are snapped to the nearest face within
// snap_tol. The returned surface keeps its planar coordinates as UVs.
[[nodiscard]] inline RemeshResult remesh_circular_domain(const TriangleMesh& m,
                                                         const PlanarEmbedding& e,
                                                         const CircularDomainSpec& domain,
                                                         double spacing, double snap_tol = -1.0) {
    if (!(spacing > 0.0)) throw DeqError("remesh: spacing must be positive");
    if (snap_tol < 0.0) snap_tol = 0.3 * spacing;
    std::vector<DiskRegion> holes;
    for (int h = 0; h < domain.hole_count(); ++h)
        holes.push_back({domain.centers[h].real(), domain.centers[h].imag(), domain.radii[h]});
    const TriangleMesh samples = delaunay_disk(1.0, spacing, holes);

    const PointLocator locator(m, e);
    RemeshResult out;
    std::vector<int> remap(samples.vertices.size(), -1);
    std::vector<Vec3> mapped(samples.vertices.size());
    std::vector<cplx> planar(samples.vertices.size());
    std::vector<char> ok(samples.vertices.size(), 0);
    for (size_t v = 0; v < samples.vertices.size(); ++v) {
        const cplx z(samples.vertices[v].x(), samples.vertices[v].y());
        auto hit = locator.locate(z);
        if (!hit) hit = locator.locate_clamped(z, snap_tol);
        if (!hit) {
            ++out.dropped;
            continue;
        }
        ok[v] = 1;
        mapped[v] = interpolate_3d(m, *hit);
        planar[v] = z;
    }
    for (const auto& f : samples.faces) {
        if (!(ok[f[0]] && ok[f[1]] && ok[f[2]])) continue;
        std::array<int, 3> g{};
        for (int c = 0; c < 3; ++c) {
            int& r = remap[f[c]];
            if (r < 0) {
                r = out.surface.vertex_count();
                out.surface.vertices.push_back(mapped[f[c]]);
                out.surface.uvs.emplace_back(0.5 * (planar[f[c]].real() + 1.0),
                                             0.5 * (planar[f[c]].imag() + 1.0));
            }
            g[c] = r;
        }
        out.surface.faces.push_back(g);
    }
    if (out.surface.faces.empty()) throw DeqError("remesh: nothing mapped");
    return out;
}

}  // namespace deqmap
