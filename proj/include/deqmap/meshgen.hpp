#pragma once

// Deterministic synthetic mesh generators for demos and tests.

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <set>

#include "mesh.hpp"

namespace deqmap {

// Structured triangulation of a disk from a hexagonal lattice: ring k of n
// carries 6k vertices, giving 6n^2 well-shaped faces and a regular 6n-gon
// boundary inscribed in the circle.
[[nodiscard]] inline TriangleMesh hex_disk(int n, double radius = 1.0) {
    if (n < 1) throw DeqError("hex_disk: n must be positive");
    TriangleMesh m;
    m.vertices.emplace_back(0.0, 0.0, 0.0);
    std::vector<int> ring_start(n + 1, 0);
    for (int k = 1; k <= n; ++k) {
        ring_start[k] = m.vertex_count();
        const double r = radius * k / n;
        for (int t = 0; t < 6 * k; ++t) {
            const double a = 2.0 * std::numbers::pi * t / (6.0 * k);
            m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
        }
    }
    auto idx = [&](int k, int t) {
        if (k == 0) return 0;
        const int c = 6 * k;
        return ring_start[k] + ((t % c) + c) % c;
    };
    for (int s = 0; s < 6; ++s) m.faces.push_back({idx(1, s), idx(1, s + 1), 0});
    for (int k = 1; k < n; ++k)
        for (int s = 0; s < 6; ++s)
            for (int i = 0; i <= k; ++i) {
                const int o0 = idx(k + 1, s * (k + 1) + i);
                const int o1 = idx(k + 1, s * (k + 1) + i + 1);
                const int in0 = idx(k, s * k + i);
                m.faces.push_back({o0, o1, in0});
                if (i < k) m.faces.push_back({o1, idx(k, s * k + i + 1), in0});
            }
    return m;
}

// Structured annulus: n_r + 1 concentric rings of n_t vertices each,
// 2 * n_r * n_t faces.
[[nodiscard]] inline TriangleMesh polar_annulus(double r0, double r1, int n_r, int n_t) {
    if (!(r0 > 0.0 && r1 > r0) || n_r < 1 || n_t < 3)
        throw DeqError("polar_annulus: invalid parameters");
    TriangleMesh m;
    for (int i = 0; i <= n_r; ++i) {
        const double r = r0 + (r1 - r0) * i / n_r;
        for (int j = 0; j < n_t; ++j) {
            const double a = 2.0 * std::numbers::pi * j / n_t;
            m.vertices.emplace_back(r * std::cos(a), r * std::sin(a), 0.0);
        }
    }
    auto idx = [&](int i, int j) { return i * n_t + ((j % n_t) + n_t) % n_t; };
    for (int i = 0; i < n_r; ++i)
        for (int j = 0; j < n_t; ++j) {
            const int a = idx(i, j), b = idx(i + 1, j);
            const int c = idx(i + 1, j + 1), d = idx(i, j + 1);
            if ((i + j) % 2 == 0) {
                m.faces.push_back({a, b, c});
                m.faces.push_back({a, c, d});
            } else {
                m.faces.push_back({a, b, d});
                m.faces.push_back({b, c, d});
            }
        }
    return m;
}

// Triangulated axis-aligned rectangle with alternating diagonals.
[[nodiscard]] inline TriangleMesh grid_rect(double x0, double y0, double x1, double y1, int nx,
                                            int ny) {
    if (!(x1 > x0 && y1 > y0) || nx < 1 || ny < 1) throw DeqError("grid_rect: invalid parameters");
    TriangleMesh m;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            m.vertices.emplace_back(x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny, 0.0);
    auto idx = [&](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int a = idx(i, j), b = idx(i + 1, j);
            const int c = idx(i + 1, j + 1), d = idx(i, j + 1);
            if ((i + j) % 2 == 0) {
                m.faces.push_back({a, b, c});
                m.faces.push_back({a, c, d});
            } else {
                m.faces.push_back({a, b, d});
                m.faces.push_back({b, c, d});
            }
        }
    return m;
}

struct DiskRegion {
    double cx = 0.0, cy = 0.0, r = 0.0;
};

// Removes every face with a vertex strictly inside one of the given disks and
// compacts the vertex array. Used to punch holes into flat meshes.
[[nodiscard]] inline TriangleMesh remove_disk_regions(const TriangleMesh& m,
                                                      const std::vector<DiskRegion>& holes) {
    auto inside = [&](const Vec3& p) {
        for (const DiskRegion& h : holes)
            if (sqr(p.x() - h.cx) + sqr(p.y() - h.cy) < sqr(h.r)) return true;
        return false;
    };
    std::vector<int> remap(m.vertices.size(), -1);
    TriangleMesh out;
    for (const auto& f : m.faces) {
        if (inside(m.vertices[f[0]]) || inside(m.vertices[f[1]]) || inside(m.vertices[f[2]]))
            continue;
        std::array<int, 3> g{};
        for (int c = 0; c < 3; ++c) {
            int& r = remap[f[c]];
            if (r < 0) {
                r = out.vertex_count();
                out.vertices.push_back(m.vertices[f[c]]);
            }
            g[c] = r;
        }
        out.faces.push_back(g);
    }
    if (out.faces.empty()) throw DeqError("remove_disk_regions: nothing left");
    return out;
}

namespace detail {

struct CircumTri {
    int a = 0, b = 0, c = 0;
    double ccx = 0.0, ccy = 0.0, rr = 0.0;  // circumcircle center, squared radius
};

[[nodiscard]] inline CircumTri circum_tri(const std::vector<Vec2>& p, int ia, int ib, int ic) {
    const double bx = p[ib].x() - p[ia].x(), by = p[ib].y() - p[ia].y();
    const double cx = p[ic].x() - p[ia].x(), cy = p[ic].y() - p[ia].y();
    const double d = 2.0 * (bx * cy - by * cx);
    if (d == 0.0) throw DeqError("triangulation: collinear points");
    const double nb = bx * bx + by * by, nc = cx * cx + cy * cy;
    const double ux = (cy * nb - by * nc) / d;
    const double uy = (bx * nc - cx * nb) / d;
    return {ia, ib, ic, p[ia].x() + ux, p[ia].y() + uy, ux * ux + uy * uy};
}

// Incremental Delaunay triangulation of the full point set. Faces come out
// counterclockwise; exact ties must be broken by the caller (jitter).
[[nodiscard]] inline std::vector<std::array<int, 3>> bowyer_watson(std::vector<Vec2> p) {
    const int n = static_cast<int>(p.size());
    if (n < 3) throw DeqError("triangulation: need at least three points");
    double xmin = p[0].x(), xmax = xmin, ymin = p[0].y(), ymax = ymin;
    for (const Vec2& q : p) {
        xmin = std::min(xmin, q.x());
        xmax = std::max(xmax, q.x());
        ymin = std::min(ymin, q.y());
        ymax = std::max(ymax, q.y());
    }
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    const double s = std::max({xmax - xmin, ymax - ymin, 1e-9});
    p.emplace_back(cx - 30.0 * s, cy - 20.0 * s);
    p.emplace_back(cx + 30.0 * s, cy - 20.0 * s);
    p.emplace_back(cx, cy + 30.0 * s);
    std::vector<CircumTri> tris{circum_tri(p, n, n + 1, n + 2)};

    std::vector<CircumTri> next;
    for (int i = 0; i < n; ++i) {
        std::vector<std::array<int, 2>> edges;
        next.clear();
        for (const CircumTri& t : tris) {
            const double dx = p[i].x() - t.ccx, dy = p[i].y() - t.ccy;
            if (dx * dx + dy * dy < t.rr) {
                edges.push_back({t.a, t.b});
                edges.push_back({t.b, t.c});
                edges.push_back({t.c, t.a});
            } else {
                next.push_back(t);
            }
        }
        if (edges.empty()) throw DeqError("triangulation: insertion cavity is empty");
        std::set<std::pair<int, int>> directed;
        for (const auto& e : edges) directed.insert({e[0], e[1]});
        // cavity boundary = directed edges whose reverse is not in the cavity
        for (const auto& e : edges)
            if (!directed.count({e[1], e[0]})) next.push_back(circum_tri(p, e[0], e[1], i));
        tris.swap(next);
    }
    std::vector<std::array<int, 3>> out;
    for (const CircumTri& t : tris)
        if (t.a < n && t.b < n && t.c < n) out.push_back({t.a, t.b, t.c});
    return out;
}

[[nodiscard]] inline bool point_in_polygon(const std::vector<Vec2>& poly, double x, double y) {
    bool in = false;
    for (size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        if ((poly[i].y() > y) == (poly[j].y() > y)) continue;
        const double t = (y - poly[j].y()) / (poly[i].y() - poly[j].y());
        if (x < poly[j].x() + t * (poly[i].x() - poly[j].x())) in = !in;
    }
    return in;
}

}  // namespace detail

// Isotropic unstructured triangulation of a convex region with round holes.
// boundary is one counterclockwise sample loop of the outer curve at spacing
// about h; each hole rim gets vertices exactly on its circle. The interior is
// a jittered hexagonal lattice, so target edge length is h throughout. Fixed
// points carry an invisible symmetry-breaking jitter during triangulation and
// are restored verbatim afterwards; boundary slivers born collinear from that
// restoration are dropped.
[[nodiscard]] inline TriangleMesh delaunay_region(const std::vector<Vec2>& boundary, double h,
                                                  const std::vector<DiskRegion>& holes = {},
                                                  unsigned seed = 1) {
    if (boundary.size() < 3) throw DeqError("delaunay_region: boundary needs three samples");
    if (!(h > 0.0)) throw DeqError("delaunay_region: spacing must be positive");

    std::vector<Vec2> exact = boundary;
    for (const DiskRegion& hole : holes) {
        if (!(hole.r > 0.0)) throw DeqError("delaunay_region: hole radius must be positive");
        const int nh = std::max(12, static_cast<int>(std::lround(
                                        2.0 * std::numbers::pi * hole.r / h)));
        for (int k = 0; k < nh; ++k) {
            const double a = 2.0 * std::numbers::pi * k / nh;
            exact.emplace_back(hole.cx + hole.r * std::cos(a), hole.cy + hole.r * std::sin(a));
        }
    }
    const int n_fixed = static_cast<int>(exact.size());

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec2> pts = exact;
    for (Vec2& q : pts) q += Vec2(1e-7 * h * u(rng), 1e-7 * h * u(rng));

    double xmin = boundary[0].x(), xmax = xmin, ymin = boundary[0].y(), ymax = ymin;
    for (const Vec2& q : boundary) {
        xmin = std::min(xmin, q.x());
        xmax = std::max(xmax, q.x());
        ymin = std::min(ymin, q.y());
        ymax = std::max(ymax, q.y());
    }
    const double row_h = h * std::numbers::sqrt3 / 2.0;
    for (int row = 0;; ++row) {
        const double y = ymin + row_h * (row + 0.5);
        if (y >= ymax) break;
        for (int col = 0;; ++col) {
            const double x = xmin + h * (col + (row % 2 ? 0.75 : 0.25));
            if (x >= xmax) break;
            const Vec2 q(x + 0.06 * h * u(rng), y + 0.06 * h * u(rng));
            if (!detail::point_in_polygon(boundary, q.x(), q.y())) continue;
            bool clear = true;
            for (int i = 0; i < n_fixed && clear; ++i)
                clear = (q - exact[static_cast<size_t>(i)]).squaredNorm() >= sqr(0.7 * h);
            for (const DiskRegion& hole : holes)
                clear = clear && std::hypot(q.x() - hole.cx, q.y() - hole.cy) >= hole.r + 0.7 * h;
            if (clear) pts.push_back(q);
        }
    }

    const std::vector<std::array<int, 3>> faces = detail::bowyer_watson(pts);
    for (int i = 0; i < n_fixed; ++i) pts[static_cast<size_t>(i)] = exact[static_cast<size_t>(i)];

    std::vector<int> remap(pts.size(), -1);
    TriangleMesh out;
    for (const auto& f : faces) {
        const Vec2 a = pts[static_cast<size_t>(f[0])], b = pts[static_cast<size_t>(f[1])],
                   c = pts[static_cast<size_t>(f[2])];
        const Vec2 ctr = (a + b + c) / 3.0;
        bool keep = detail::point_in_polygon(boundary, ctr.x(), ctr.y());
        for (const DiskRegion& hole : holes)
            keep = keep && std::hypot(ctr.x() - hole.cx, ctr.y() - hole.cy) >= hole.r;
        if (!keep) continue;
        const double area2 = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
        if (std::abs(area2) <= 1e-9 * h * h) continue;  // collinear boundary sliver
        if (area2 < 0.0) throw DeqError("delaunay_region: flipped face");
        std::array<int, 3> g{};
        for (int k = 0; k < 3; ++k) {
            int& r = remap[static_cast<size_t>(f[k])];
            if (r < 0) {
                r = out.vertex_count();
                out.vertices.emplace_back(pts[static_cast<size_t>(f[k])].x(),
                                          pts[static_cast<size_t>(f[k])].y(), 0.0);
            }
            g[static_cast<size_t>(k)] = r;
        }
        out.faces.push_back(g);
    }
    if (out.faces.empty()) throw DeqError("delaunay_region: nothing left");
    return out;
}

// Rectangle sampled counterclockwise with optional rounded corners of radius
// rc; straight runs and arcs are both sampled at spacing about h.
[[nodiscard]] inline std::vector<Vec2> rect_boundary(double x0, double y0, double x1, double y1,
                                                     double h, double rc = 0.0) {
    if (!(x1 > x0 && y1 > y0) || !(h > 0.0) || rc < 0.0 ||
        2.0 * rc >= std::min(x1 - x0, y1 - y0))
        throw DeqError("rect_boundary: invalid parameters");
    std::vector<Vec2> out;
    auto seg = [&](const Vec2& a, const Vec2& b) {
        const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / h)));
        for (int k = 0; k < n; ++k)
            out.push_back(a + (b - a) * (static_cast<double>(k) / n));
    };
    auto arc = [&](double cx, double cy, double a0) {
        const int n = std::max(1, static_cast<int>(std::ceil(rc * std::numbers::pi / 2.0 / h)));
        for (int k = 0; k < n; ++k) {
            const double a = a0 + std::numbers::pi / 2.0 * k / n;
            out.emplace_back(cx + rc * std::cos(a), cy + rc * std::sin(a));
        }
    };
    seg({x0 + rc, y0}, {x1 - rc, y0});
    arc(x1 - rc, y0 + rc, -std::numbers::pi / 2.0);
    seg({x1, y0 + rc}, {x1, y1 - rc});
    arc(x1 - rc, y1 - rc, 0.0);
    seg({x1 - rc, y1}, {x0 + rc, y1});
    arc(x0 + rc, y1 - rc, std::numbers::pi / 2.0);
    seg({x0, y1 - rc}, {x0, y0 + rc});
    arc(x0 + rc, y0 + rc, std::numbers::pi);
    return out;
}

[[nodiscard]] inline TriangleMesh delaunay_rect(double x0, double y0, double x1, double y1,
                                                double h,
                                                const std::vector<DiskRegion>& holes = {},
                                                double corner_radius = 0.0, unsigned seed = 1) {
    return delaunay_region(rect_boundary(x0, y0, x1, y1, h, corner_radius), h, holes, seed);
}

[[nodiscard]] inline TriangleMesh delaunay_disk(double radius, double h,
                                                const std::vector<DiskRegion>& holes = {},
                                                unsigned seed = 1) {
    if (!(radius > 0.0) || !(h > 0.0)) throw DeqError("delaunay_disk: invalid parameters");
    const int n = std::max(12, static_cast<int>(std::lround(2.0 * std::numbers::pi * radius / h)));
    std::vector<Vec2> boundary;
    boundary.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * k / n;
        boundary.emplace_back(radius * std::cos(a), radius * std::sin(a));
    }
    return delaunay_region(boundary, h, holes, seed);
}

// Applies a height function z = f(x, y) to a flat mesh.
[[nodiscard]] inline TriangleMesh lift(TriangleMesh m, const std::function<double(double, double)>& f) {
    for (Vec3& p : m.vertices) p.z() = f(p.x(), p.y());
    return m;
}

[[nodiscard]] inline TriangleMesh gaussian_bump_disk(int n, double height, double sigma) {
    return lift(hex_disk(n), [=](double x, double y) {
        return height * std::exp(-(x * x + y * y) / (sigma * sigma));
    });
}

// Unit upper hemisphere triangulated via the azimuthal-equidistant projection
// of a hex disk; boundary is the equator.
[[nodiscard]] inline TriangleMesh hemisphere(int n) {
    TriangleMesh m = hex_disk(n);
    for (Vec3& p : m.vertices) {
        const double r = std::hypot(p.x(), p.y());
        const double phi = r * std::numbers::pi / 2.0;
        const double s = r > 0.0 ? std::sin(phi) / r : 0.0;
        p = Vec3(s * p.x(), s * p.y(), std::cos(phi));
    }
    return m;
}

// Section of a cylinder of radius R: the isometric development of the
// rectangle [0, R*sweep] x [0, h].
[[nodiscard]] inline TriangleMesh cylinder_section(double R, double sweep, double h, int nx, int ny) {
    TriangleMesh m = grid_rect(0.0, 0.0, R * sweep, h, nx, ny);
    for (Vec3& p : m.vertices) {
        const double a = p.x() / R;
        p = Vec3(R * std::cos(a), R * std::sin(a), p.y());
    }
    return m;
}

}  // namespace deqmap
