#pragma once

// Discrete differential operators on a triangle mesh with a given source
// geometry (planar embedding or intrinsic surface charts):
//   L  cotangent Laplacian (row sums zero, negative semidefinite)
//   A  lumped mass: one third of the incident face area per vertex
//   W  face-to-vertex transfer, area-weighted and row-stochastic

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "charts.hpp"

namespace deqmap {

struct FEOperators {
    Eigen::SparseMatrix<double> L;  // |V| x |V|
    Eigen::VectorXd vertex_area;    // |V|
    Eigen::SparseMatrix<double> W;  // |V| x |F|
    std::vector<double> face_area;  // |F|
};

[[nodiscard]] inline FEOperators build_fe_operators(const TriangleMesh& m,
                                                    const std::vector<FaceChart>& charts) {
    const int nv = m.vertex_count();
    const int nf = m.face_count();
    FEOperators ops;
    ops.face_area.resize(nf);
    ops.vertex_area = Eigen::VectorXd::Zero(nv);

    std::vector<Eigen::Triplet<double>> lt, wt;
    lt.reserve(static_cast<size_t>(nf) * 9);
    wt.reserve(static_cast<size_t>(nf) * 3);
    Eigen::VectorXd ring_area = Eigen::VectorXd::Zero(nv);
    for (int f = 0; f < nf; ++f) {
        const FaceChart& ch = charts[f];
        ops.face_area[f] = ch.area;
        const auto& vs = m.faces[f];
        for (int a = 0; a < 3; ++a) {
            ops.vertex_area[vs[a]] += ch.area / 3.0;
            ring_area[vs[a]] += ch.area;
            for (int b = 0; b < 3; ++b)
                lt.emplace_back(vs[a], vs[b], -ch.area * ch.grad[a].dot(ch.grad[b]));
        }
    }
    ops.L.resize(nv, nv);
    ops.L.setFromTriplets(lt.begin(), lt.end());
    for (int f = 0; f < nf; ++f)
        for (int v : m.faces[f]) wt.emplace_back(v, f, charts[f].area / ring_area[v]);
    ops.W.resize(nv, nf);
    ops.W.setFromTriplets(wt.begin(), wt.end());
    return ops;
}

// One backward Euler step of vertex-based diffusion: (A - dt L) x = A rho.
// Conserves the lumped integral 1' A rho exactly.
[[nodiscard]] inline Eigen::VectorXd diffusion_step(const Eigen::VectorXd& rho,
                                                    const FEOperators& ops, double dt) {
    if (!(dt > 0.0)) throw DeqError("diffusion_step: dt must be positive");
    const int nv = static_cast<int>(ops.vertex_area.size());
    Eigen::SparseMatrix<double> D(nv, nv);
    std::vector<Eigen::Triplet<double>> dt_entries;
    dt_entries.reserve(nv);
    for (int v = 0; v < nv; ++v) dt_entries.emplace_back(v, v, ops.vertex_area[v]);
    D.setFromTriplets(dt_entries.begin(), dt_entries.end());
    const Eigen::SparseMatrix<double> M = D - dt * ops.L;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
    if (solver.info() != Eigen::Success) throw DeqError("diffusion_step: factorization failed");
    const Eigen::VectorXd rhs = ops.vertex_area.cwiseProduct(rho);
    return solver.solve(rhs);
}

// Per-face gradient of a vertex scalar field in the chart source plane.
[[nodiscard]] inline std::vector<Vec2> face_gradient(const Eigen::VectorXd& vals,
                                                     const TriangleMesh& m,
                                                     const std::vector<FaceChart>& charts) {
    std::vector<Vec2> g(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& [i, j, k] = m.faces[f];
        g[f] = vals[i] * charts[f].grad[0] + vals[j] * charts[f].grad[1] +
               vals[k] * charts[f].grad[2];
    }
    return g;
}

// Area-weighted one-ring average of per-face vectors (W applied per component).
[[nodiscard]] inline std::vector<Vec2> vertex_average(const std::vector<Vec2>& face_vals,
                                                      const FEOperators& ops) {
    const int nf = static_cast<int>(face_vals.size());
    Eigen::VectorXd fx(nf), fy(nf);
    for (int f = 0; f < nf; ++f) {
        fx[f] = face_vals[f].x();
        fy[f] = face_vals[f].y();
    }
    const Eigen::VectorXd vx = ops.W * fx;
    const Eigen::VectorXd vy = ops.W * fy;
    std::vector<Vec2> out(static_cast<size_t>(ops.W.rows()));
    for (size_t v = 0; v < out.size(); ++v) out[v] = Vec2(vx[v], vy[v]);
    return out;
}

[[nodiscard]] inline Eigen::VectorXd faces_to_vertices(const Eigen::VectorXd& face_vals,
                                                       const FEOperators& ops) {
    return ops.W * face_vals;
}

}  // namespace deqmap
