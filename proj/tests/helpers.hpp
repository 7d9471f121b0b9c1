#pragma once

// Shared fixtures for the test suite: deterministic RNG, scratch files, and
// small mesh builders.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>
#include <string>

#include <deqmap/beltrami.hpp>
#include <deqmap/density.hpp>
#include <deqmap/lbs.hpp>
#include <deqmap/locate.hpp>
#include <deqmap/meshgen.hpp>
#include <deqmap/obj_io.hpp>

namespace th {

using namespace deqmap;

inline std::mt19937& rng() {
    static std::mt19937 gen(20260823u);
    return gen;
}

inline double urand(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng());
}

// Unique scratch path removed by the destructor.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("deqmap_test_" + std::to_string(rng()()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    [[nodiscard]] std::string file(const std::string& name) const { return (path / name).string(); }
};

// Planar embedding taken from a flat mesh's xy coordinates.
inline PlanarEmbedding identity_embedding(const TriangleMesh& m) {
    return embedding_from_mesh_xy(m);
}

// Applies w = z + c * conj(z) to every vertex.
inline PlanarEmbedding stretch_embedding(const PlanarEmbedding& e, cplx c) {
    PlanarEmbedding out = e;
    for (cplx& z : out.pos) z = z + c * std::conj(z);
    return out;
}

// Interior vertex mask (complement of boundary vertices).
inline std::vector<char> interior_mask(const MeshTopology& topo) {
    std::vector<char> mask(topo.is_boundary_vertex.size());
    for (size_t v = 0; v < mask.size(); ++v) mask[v] = topo.is_boundary_vertex[v] ? 0 : 1;
    return mask;
}

// Brute-force point location oracle.
inline std::optional<Located> brute_locate(const TriangleMesh& m, const PlanarEmbedding& e,
                                           const cplx& z, double tol = 1e-12) {
    for (int f = 0; f < m.face_count(); ++f) {
        const auto& [i, j, k] = m.faces[f];
        const double a = signed_area2(e[i], e[j], e[k]);
        if (!(a > 0.0)) continue;
        const double w0 = signed_area2(z, e[j], e[k]) / a;
        const double w1 = signed_area2(e[i], z, e[k]) / a;
        const double w2 = signed_area2(e[i], e[j], z) / a;
        if (w0 >= -tol && w1 >= -tol && w2 >= -tol)
            return Located{f, {std::max(w0, 0.0), std::max(w1, 0.0), std::max(w2, 0.0)}};
    }
    return std::nullopt;
}

// Dirichlet constraints pinning every boundary vertex to a map of the flat
// input positions.
template <typename Fn>
inline Constraints boundary_constraints(const TriangleMesh& m, const MeshTopology& topo, Fn&& f) {
    Constraints c;
    for (const auto& loop : topo.boundary_loops)
        for (int v : loop) c.add(v, f(cplx(m.vertices[v].x(), m.vertices[v].y())));
    return c;
}

}  // namespace th
