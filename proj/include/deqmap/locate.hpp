#pragma once

// Point location in a planar embedding via a uniform grid over face bounding
// boxes, plus barycentric interpolation back to the 3D surface.

#include <optional>

#include "mesh.hpp"

namespace deqmap {

struct Located {
    int face = -1;
    std::array<double, 3> weights{0.0, 0.0, 0.0};
};

class PointLocator {
public:
    PointLocator(const TriangleMesh& m, const PlanarEmbedding& e) : mesh_(&m), emb_(&e) {
        min_ = Vec2(1e300, 1e300);
        max_ = Vec2(-1e300, -1e300);
        for (const cplx& z : e.pos) {
            min_ = min_.cwiseMin(to_vec(z));
            max_ = max_.cwiseMax(to_vec(z));
        }
        const double span = std::max(max_.x() - min_.x(), max_.y() - min_.y());
        if (!(span > 0.0)) throw DeqError("locator: degenerate embedding extent");
        nx_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(m.face_count()))));
        cell_ = span / nx_;
        cells_.assign(static_cast<size_t>(nx_) * nx_, {});
        for (int f = 0; f < m.face_count(); ++f) {
            Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
            for (int v : m.faces[f]) {
                lo = lo.cwiseMin(to_vec(e[v]));
                hi = hi.cwiseMax(to_vec(e[v]));
            }
            const auto [i0, j0] = cell_of(lo);
            const auto [i1, j1] = cell_of(hi);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) cells_[static_cast<size_t>(j) * nx_ + i].push_back(f);
        }
    }

    // Containing face with nonnegative convex weights reproducing the query
    // point; nullopt if the point is outside the embedding.
    [[nodiscard]] std::optional<Located> locate(const cplx& z, double tol = 1e-12) const {
        const Vec2 p = to_vec(z);
        if (p.x() < min_.x() - tol || p.y() < min_.y() - tol || p.x() > max_.x() + tol ||
            p.y() > max_.y() + tol)
            return std::nullopt;
        const auto [ci, cj] = cell_of(p);
        for (int f : cells_[static_cast<size_t>(cj) * nx_ + ci]) {
            auto hit = test_face(f, z, tol);
            if (hit) return hit;
        }
        return std::nullopt;
    }

    // Nearest point on the embedding within max_dist; for samples that fall
    // just outside boundary chords. Weights describe the snapped point.
    [[nodiscard]] std::optional<Located> locate_clamped(const cplx& z, double max_dist) const {
        if (auto hit = locate(z)) return hit;
        const Vec2 p = to_vec(z);
        const auto [ci, cj] = cell_of(p);
        const int ring = std::max(1, static_cast<int>(std::ceil(max_dist / cell_)));
        double best = max_dist;
        std::optional<Located> out;
        for (int j = std::max(0, cj - ring); j <= std::min(nx_ - 1, cj + ring); ++j)
            for (int i = std::max(0, ci - ring); i <= std::min(nx_ - 1, ci + ring); ++i)
                for (int f : cells_[static_cast<size_t>(j) * nx_ + i]) {
                    Located cand;
                    const double d = closest_on_face(f, z, cand);
                    if (d <= best) {
                        best = d;
                        out = cand;
                    }
                }
        return out;
    }

private:
    [[nodiscard]] std::pair<int, int> cell_of(const Vec2& p) const {
        auto clampi = [this](double t) {
            return std::min(nx_ - 1, std::max(0, static_cast<int>(t)));
        };
        return {clampi((p.x() - min_.x()) / cell_), clampi((p.y() - min_.y()) / cell_)};
    }

    [[nodiscard]] std::optional<Located> test_face(int f, const cplx& z, double tol) const {
        const auto& [i, j, k] = mesh_->faces[f];
        const cplx z0 = (*emb_)[i], z1 = (*emb_)[j], z2 = (*emb_)[k];
        const double a = signed_area2(z0, z1, z2);
        if (!(a > 0.0)) return std::nullopt;
        double w0 = signed_area2(z, z1, z2) / a;
        double w1 = signed_area2(z0, z, z2) / a;
        double w2 = signed_area2(z0, z1, z) / a;
        if (w0 < -tol || w1 < -tol || w2 < -tol) return std::nullopt;
        w0 = std::max(w0, 0.0);
        w1 = std::max(w1, 0.0);
        w2 = std::max(w2, 0.0);
        const double s = w0 + w1 + w2;
        return Located{f, {w0 / s, w1 / s, w2 / s}};
    }

    [[nodiscard]] double closest_on_face(int f, const cplx& z, Located& out) const {
        const auto& [i, j, k] = mesh_->faces[f];
        const std::array<cplx, 3> q{(*emb_)[i], (*emb_)[j], (*emb_)[k]};
        double best = 1e300;
        // Closest point on each edge segment; interior hits are caught by locate().
        for (int e = 0; e < 3; ++e) {
            const cplx a = q[e], b = q[(e + 1) % 3];
            const cplx ab = b - a;
            const double len2 = std::norm(ab);
            double t = len2 > 0.0 ? std::clamp(((z - a) * std::conj(ab)).real() / len2, 0.0, 1.0)
                                  : 0.0;
            const cplx proj = a + t * ab;
            const double d = std::abs(z - proj);
            if (d < best) {
                best = d;
                out.face = f;
                out.weights = {0.0, 0.0, 0.0};
                out.weights[static_cast<size_t>(e)] = 1.0 - t;
                out.weights[static_cast<size_t>((e + 1) % 3)] = t;
            }
        }
        return best;
    }

    const TriangleMesh* mesh_;
    const PlanarEmbedding* emb_;
    Vec2 min_, max_;
    int nx_ = 1;
    double cell_ = 1.0;
    std::vector<std::vector<int>> cells_;
};

[[nodiscard]] inline Vec3 interpolate_3d(const TriangleMesh& m, const Located& at) {
    const auto& [i, j, k] = m.faces[at.face];
    return at.weights[0] * m.vertices[i] + at.weights[1] * m.vertices[j] +
           at.weights[2] * m.vertices[k];
}

}  // namespace deqmap
