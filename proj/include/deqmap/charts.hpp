#pragma once

// Per-face linear-element data: hat-function gradients and areas, taken either
// from a planar embedding or from the intrinsic geometry of a 3D surface.
// Everything downstream (Beltrami coefficients, generalized Laplace solves,
// cotangent operators) consumes these charts, so surface and planar sources
// share one code path.

#include <vector>

#include "mesh.hpp"

namespace deqmap {

struct FaceChart {
    // grad[c] is the source-plane gradient of the hat function of corner c.
    std::array<Vec2, 3> grad;
    double area = 0.0;
};

namespace detail {

[[nodiscard]] inline FaceChart chart_from_2d(const Vec2& q0, const Vec2& q1, const Vec2& q2) {
    const double a2 = (q1 - q0).x() * (q2 - q0).y() - (q1 - q0).y() * (q2 - q0).x();
    if (!(a2 > 0.0)) throw DeqError("chart: degenerate or flipped source face");
    FaceChart ch;
    ch.area = 0.5 * a2;
    // grad phi_c = rot90(opposite edge) / (2 * area), edge taken counterclockwise.
    ch.grad[0] = rot90(q2 - q1) / a2;
    ch.grad[1] = rot90(q0 - q2) / a2;
    ch.grad[2] = rot90(q1 - q0) / a2;
    return ch;
}

}  // namespace detail

[[nodiscard]] inline std::vector<FaceChart> charts_from_embedding(const TriangleMesh& m,
                                                                  const PlanarEmbedding& e) {
    std::vector<FaceChart> charts(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& [i, j, k] = m.faces[f];
        charts[f] = detail::chart_from_2d(to_vec(e[i]), to_vec(e[j]), to_vec(e[k]));
    }
    return charts;
}

// Isometric per-face flattening of a 3D mesh. The in-plane frame is the
// projection of a global axis onto the face plane (whichever of x or y
// projects better), so faces lying flat in the z = 0 plane chart to their own
// xy coordinates and the surface path reduces to the planar one there.
[[nodiscard]] inline std::vector<FaceChart> charts_from_surface(const TriangleMesh& m) {
    std::vector<FaceChart> charts(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& [i, j, k] = m.faces[f];
        const Vec3 e1 = m.vertices[j] - m.vertices[i];
        const Vec3 e2 = m.vertices[k] - m.vertices[i];
        Vec3 n = e1.cross(e2);
        if (!(n.norm() > 0.0)) throw DeqError("chart: degenerate surface face");
        n.normalize();
        const Vec3 px = Vec3::UnitX() - n.x() * n;
        const Vec3 py = Vec3::UnitY() - n.y() * n;
        const Vec3 u = (px.squaredNorm() >= py.squaredNorm() ? px : py).normalized();
        const Vec3 v = n.cross(u);
        auto q = [&](const Vec3& e) { return Vec2(e.dot(u), e.dot(v)); };
        charts[f] = detail::chart_from_2d({0.0, 0.0}, q(e1), q(e2));
    }
    return charts;
}

}  // namespace deqmap
