#pragma once

// Triangle mesh core: storage, validation, adjacency, boundary loops.
//
// Conventions:
//   - faces are counterclockwise w.r.t. the outward normal / planar orientation
//   - boundary loops are oriented so the surface lies to their left
//   - meshes must be manifold, connected, genus-0, with at least one boundary

#include <algorithm>
#include <array>
#include <map>
#include <queue>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace deqmap {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    // Optional per-vertex texture coordinates; empty or one per vertex.
    std::vector<Vec2> uvs;

    [[nodiscard]] int vertex_count() const { return static_cast<int>(vertices.size()); }
    [[nodiscard]] int face_count() const { return static_cast<int>(faces.size()); }
};

// Planar positions for every vertex of a mesh (an image of the mesh in C).
struct PlanarEmbedding {
    std::vector<cplx> pos;

    [[nodiscard]] int size() const { return static_cast<int>(pos.size()); }
    [[nodiscard]] cplx operator[](int i) const { return pos[static_cast<size_t>(i)]; }
    [[nodiscard]] cplx& operator[](int i) { return pos[static_cast<size_t>(i)]; }
};

[[nodiscard]] inline TriangleMesh planar_to_mesh(const PlanarEmbedding& e,
                                                 const std::vector<std::array<int, 3>>& faces) {
    TriangleMesh m;
    m.vertices.reserve(e.pos.size());
    for (const cplx& z : e.pos) m.vertices.emplace_back(z.real(), z.imag(), 0.0);
    m.faces = faces;
    return m;
}

[[nodiscard]] inline PlanarEmbedding embedding_from_mesh_xy(const TriangleMesh& m) {
    PlanarEmbedding e;
    e.pos.reserve(m.vertices.size());
    for (const Vec3& p : m.vertices) e.pos.emplace_back(p.x(), p.y());
    return e;
}

// ---------- Areas and orientation ----------

[[nodiscard]] inline std::vector<double> face_areas_3d(const TriangleMesh& m) {
    std::vector<double> areas(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& [i, j, k] = m.faces[f];
        areas[f] = triangle_area_3d(m.vertices[i], m.vertices[j], m.vertices[k]);
    }
    return areas;
}

[[nodiscard]] inline std::vector<double> face_areas_planar(const TriangleMesh& m,
                                                           const PlanarEmbedding& e) {
    std::vector<double> areas(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& [i, j, k] = m.faces[f];
        areas[f] = signed_area(e[i], e[j], e[k]);
    }
    return areas;
}

// Faces whose planar image is degenerate or reversed (signed area <= 0).
[[nodiscard]] inline int count_flips(const TriangleMesh& m, const PlanarEmbedding& e) {
    int flips = 0;
    for (const auto& [i, j, k] : m.faces)
        if (signed_area(e[i], e[j], e[k]) <= 0.0) ++flips;
    return flips;
}

// ---------- Topology ----------

struct MeshTopology {
    // Undirected edges as ordered pairs (a < b).
    std::vector<std::pair<int, int>> edges;
    // Faces incident to each vertex.
    std::vector<std::vector<int>> vertex_faces;
    // Boundary loops as ordered vertex cycles; the surface lies to the left of
    // the traversal direction.
    std::vector<std::vector<int>> boundary_loops;
    std::vector<bool> is_boundary_vertex;
    int euler_characteristic = 0;
};

namespace detail {

// Directed edge key for orientation bookkeeping.
[[nodiscard]] inline long long dir_edge_key(int a, int b, int n) {
    return static_cast<long long>(a) * n + b;
}

}  // namespace detail

// Validates the mesh contract and builds adjacency. Throws DeqError on:
// indices out of range, repeated vertices in a face, duplicated or
// inconsistently oriented directed edges, non-manifold edges, disconnected
// meshes, closed surfaces (no boundary), and positive genus.
[[nodiscard]] inline MeshTopology build_topology(const TriangleMesh& m) {
    const int nv = m.vertex_count();
    const int nf = m.face_count();
    if (nv < 3 || nf < 1) throw DeqError("mesh: empty or too small");

    MeshTopology topo;
    topo.vertex_faces.assign(nv, {});
    topo.is_boundary_vertex.assign(nv, false);

    std::map<long long, int> dir_edge_count;        // directed edge -> occurrences
    std::map<std::pair<int, int>, int> edge_count;  // undirected edge -> face count
    for (int f = 0; f < nf; ++f) {
        const auto& [i, j, k] = m.faces[f];
        for (int v : {i, j, k})
            if (v < 0 || v >= nv) throw DeqError("mesh: face vertex index out of range");
        if (i == j || j == k || k == i) throw DeqError("mesh: face repeats a vertex");
        topo.vertex_faces[i].push_back(f);
        topo.vertex_faces[j].push_back(f);
        topo.vertex_faces[k].push_back(f);
        const std::array<std::pair<int, int>, 3> dir{{{i, j}, {j, k}, {k, i}}};
        for (auto [a, b] : dir) {
            if (++dir_edge_count[detail::dir_edge_key(a, b, nv)] > 1)
                throw DeqError("mesh: duplicated directed edge (inconsistent orientation or doubled face)");
            ++edge_count[{std::min(a, b), std::max(a, b)}];
        }
    }
    for (const auto& [e, c] : edge_count) {
        if (c > 2) throw DeqError("mesh: non-manifold edge");
        topo.edges.push_back(e);
    }

    // Boundary loops: directed edges without a reverse twin, chained tip-to-tail.
    std::map<int, int> next_on_boundary;  // from-vertex -> to-vertex
    for (int f = 0; f < nf; ++f) {
        const auto& [i, j, k] = m.faces[f];
        const std::array<std::pair<int, int>, 3> dir{{{i, j}, {j, k}, {k, i}}};
        for (auto [a, b] : dir) {
            if (dir_edge_count.find(detail::dir_edge_key(b, a, nv)) == dir_edge_count.end()) {
                if (next_on_boundary.count(a))
                    throw DeqError("mesh: non-manifold boundary vertex");
                next_on_boundary[a] = b;
                topo.is_boundary_vertex[a] = true;
                topo.is_boundary_vertex[b] = true;
            }
        }
    }
    if (next_on_boundary.empty()) throw DeqError("mesh: closed surface (no boundary)");
    std::map<int, bool> visited;
    for (const auto& [start, _] : next_on_boundary) {
        if (visited[start]) continue;
        std::vector<int> loop;
        int v = start;
        do {
            loop.push_back(v);
            visited[v] = true;
            auto it = next_on_boundary.find(v);
            if (it == next_on_boundary.end()) throw DeqError("mesh: open boundary chain");
            v = it->second;
        } while (v != start);
        topo.boundary_loops.push_back(std::move(loop));
    }

    // Connectivity over faces (edge-adjacent BFS through shared vertices).
    std::vector<char> seen(nf, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        const int f = q.front();
        q.pop();
        for (int v : m.faces[f])
            for (int g : topo.vertex_faces[v])
                if (!seen[g]) {
                    seen[g] = 1;
                    ++reached;
                    q.push(g);
                }
    }
    if (reached != nf) throw DeqError("mesh: disconnected");

    const int ne = static_cast<int>(topo.edges.size());
    topo.euler_characteristic = nv - ne + nf;
    // chi = 2 - 2g - b for genus g with b boundary loops.
    const int b = static_cast<int>(topo.boundary_loops.size());
    const int genus2 = 2 - b - topo.euler_characteristic;
    if (genus2 != 0) throw DeqError("mesh: positive genus not supported");
    return topo;
}

// Index of the loop enclosing the largest absolute signed area in the given
// planar embedding; used to classify outer vs. inner boundaries.
[[nodiscard]] inline int outer_loop_index(const MeshTopology& topo, const PlanarEmbedding& e) {
    int best = -1;
    double best_area = -1.0;
    for (size_t l = 0; l < topo.boundary_loops.size(); ++l) {
        const auto& loop = topo.boundary_loops[l];
        double a2 = 0.0;
        for (size_t i = 0; i < loop.size(); ++i) {
            const cplx z0 = e[loop[i]];
            const cplx z1 = e[loop[(i + 1) % loop.size()]];
            a2 += z0.real() * z1.imag() - z0.imag() * z1.real();
        }
        const double a = std::abs(0.5 * a2);
        if (a > best_area) {
            best_area = a;
            best = static_cast<int>(l);
        }
    }
    return best;
}

// Largest total 3D edge length; provisional outer pick before any embedding exists.
[[nodiscard]] inline int longest_loop_index(const TriangleMesh& m, const MeshTopology& topo) {
    int best = -1;
    double best_len = -1.0;
    for (size_t l = 0; l < topo.boundary_loops.size(); ++l) {
        const auto& loop = topo.boundary_loops[l];
        double len = 0.0;
        for (size_t i = 0; i < loop.size(); ++i)
            len += (m.vertices[loop[(i + 1) % loop.size()]] - m.vertices[loop[i]]).norm();
        if (len > best_len) {
            best_len = len;
            best = static_cast<int>(l);
        }
    }
    return best;
}

}  // namespace deqmap
