#pragma once

// Linear Beltrami Solver: reconstructs a planar map with prescribed per-face
// Beltrami coefficient by solving two generalized Laplace equations
// div(A(nu) grad u) = 0, div(A(nu) grad v) = 0 with Dirichlet rows for
// boundary vertices and landmarks. A(nu) is symmetric with unit determinant
// and positive definite for |nu| < 1, so the reduced system is SPD.

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "beltrami.hpp"

namespace deqmap {

// Dirichlet constraints: target positions for a set of vertices.
struct Constraints {
    std::vector<int> idx;
    std::vector<cplx> val;

    void add(int vertex, const cplx& target) {
        idx.push_back(vertex);
        val.push_back(target);
    }
    [[nodiscard]] size_t size() const { return idx.size(); }
};

// Coefficient matrix of the Beltrami-adjusted metric on one face.
[[nodiscard]] inline Eigen::Matrix2d lbs_face_matrix(const cplx& nu) {
    const double rho = nu.real(), tau = nu.imag();
    const double denom = 1.0 - rho * rho - tau * tau;
    if (!(denom > 0.0)) throw DeqError("lbs: |nu| >= 1 on a face");
    Eigen::Matrix2d A;
    A(0, 0) = (sqr(rho - 1.0) + sqr(tau)) / denom;
    A(0, 1) = A(1, 0) = -2.0 * tau / denom;
    A(1, 1) = (1.0 + 2.0 * rho + sqr(rho) + sqr(tau)) / denom;
    return A;
}

// Full (unconstrained) stiffness matrix sum_T area_T G_T' A(nu_T) G_T;
// symmetric positive semidefinite with constants in its kernel.
[[nodiscard]] inline Eigen::SparseMatrix<double> lbs_stiffness(const TriangleMesh& m,
                                                               const std::vector<FaceChart>& charts,
                                                               const BeltramiField& nu) {
    const int nv = m.vertex_count();
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.faces.size() * 9);
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const Eigen::Matrix2d A = lbs_face_matrix(nu[f]);
        const FaceChart& ch = charts[f];
        const auto& vs = m.faces[f];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                trip.emplace_back(vs[a], vs[b], ch.area * ch.grad[a].dot(A * ch.grad[b]));
    }
    Eigen::SparseMatrix<double> K(nv, nv);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

// Solves for the planar map with Beltrami coefficient nu and the given
// Dirichlet data. Requires sup|nu| < 1 and a nonempty constraint set.
[[nodiscard]] inline PlanarEmbedding lbs_reconstruct(const TriangleMesh& m,
                                                     const std::vector<FaceChart>& charts,
                                                     const BeltramiField& nu,
                                                     const Constraints& constraints) {
    const int nv = m.vertex_count();
    if (constraints.size() == 0) throw DeqError("lbs: no constraints");

    std::vector<int> free_id(nv, -1);
    std::vector<cplx> fixed_val(nv);
    std::vector<char> fixed(nv, 0);
    for (size_t c = 0; c < constraints.size(); ++c) {
        const int v = constraints.idx[c];
        if (v < 0 || v >= nv) throw DeqError("lbs: constraint index out of range");
        fixed[v] = 1;
        fixed_val[v] = constraints.val[c];
    }
    int n_free = 0;
    for (int v = 0; v < nv; ++v)
        if (!fixed[v]) free_id[v] = n_free++;

    PlanarEmbedding out;
    out.pos.resize(nv);
    for (int v = 0; v < nv; ++v)
        if (fixed[v]) out.pos[v] = fixed_val[v];
    if (n_free == 0) return out;

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(m.faces.size() * 9);
    Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(n_free, 2);
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const Eigen::Matrix2d A = lbs_face_matrix(nu[f]);
        const FaceChart& ch = charts[f];
        const auto& vs = m.faces[f];
        for (int a = 0; a < 3; ++a) {
            if (fixed[vs[a]]) continue;
            const int ra = free_id[vs[a]];
            for (int b = 0; b < 3; ++b) {
                const double w = ch.area * ch.grad[a].dot(A * ch.grad[b]);
                if (fixed[vs[b]]) {
                    rhs(ra, 0) -= w * fixed_val[vs[b]].real();
                    rhs(ra, 1) -= w * fixed_val[vs[b]].imag();
                } else {
                    trip.emplace_back(ra, free_id[vs[b]], w);
                }
            }
        }
    }
    Eigen::SparseMatrix<double> K(n_free, n_free);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(K);
    if (solver.info() != Eigen::Success) throw DeqError("lbs: factorization failed");
    const Eigen::MatrixX2d sol = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw DeqError("lbs: solve failed");
    for (int v = 0; v < nv; ++v)
        if (!fixed[v]) out.pos[v] = cplx(sol(free_id[v], 0), sol(free_id[v], 1));
    return out;
}

}  // namespace deqmap
