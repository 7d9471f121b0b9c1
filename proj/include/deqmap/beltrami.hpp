#pragma once

// Per-face Beltrami coefficients of piecewise-linear maps, and the associated
// fields: Wirtinger derivatives, vertex transfers, a vertex-based Laplacian,
// the sup-norm cutoff, and quasiconformal energies.

#include "operators.hpp"

namespace deqmap {

// One complex coefficient per face.
using BeltramiField = std::vector<cplx>;

// Affine map coefficients on one face: u_x, u_y, v_x, v_y of the linear map
// sending the chart source to the planar target (u + iv).
struct AffineCoeffs {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    [[nodiscard]] cplx mu() const { return cplx(a - d, c + b) / cplx(a + d, c - b); }
    [[nodiscard]] cplx dz() const { return 0.5 * cplx(a + d, c - b); }
    [[nodiscard]] cplx dzbar() const { return 0.5 * cplx(a - d, c + b); }
};

[[nodiscard]] inline AffineCoeffs affine_coeffs(const FaceChart& ch, const std::array<int, 3>& face,
                                                const PlanarEmbedding& target) {
    AffineCoeffs co;
    for (int c = 0; c < 3; ++c) {
        const cplx w = target[face[c]];
        co.a += ch.grad[c].x() * w.real();
        co.b += ch.grad[c].y() * w.real();
        co.c += ch.grad[c].x() * w.imag();
        co.d += ch.grad[c].y() * w.imag();
    }
    return co;
}

[[nodiscard]] inline BeltramiField beltrami_from_charts(const TriangleMesh& m,
                                                        const std::vector<FaceChart>& charts,
                                                        const PlanarEmbedding& target) {
    BeltramiField nu(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f)
        nu[f] = affine_coeffs(charts[f], m.faces[f], target).mu();
    return nu;
}

// Beltrami coefficient of a planar-to-planar map.
[[nodiscard]] inline BeltramiField beltrami_from_planar_map(const TriangleMesh& m,
                                                            const PlanarEmbedding& source,
                                                            const PlanarEmbedding& target) {
    return beltrami_from_charts(m, charts_from_embedding(m, source), target);
}

// Beltrami coefficient of a surface-to-plane map via intrinsic face charts.
[[nodiscard]] inline BeltramiField beltrami_from_surface_map(const TriangleMesh& m,
                                                             const PlanarEmbedding& target) {
    return beltrami_from_charts(m, charts_from_surface(m), target);
}

[[nodiscard]] inline double sup_abs(const BeltramiField& nu) {
    double s = 0.0;
    for (const cplx& v : nu) s = std::max(s, std::abs(v));
    return s;
}

// Repeatedly scales coefficients by (1 - delta) while |nu| >= 1. Returns the
// number of faces touched.
inline int chop(BeltramiField& nu, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw DeqError("chop: delta must be in (0, 1)");
    int touched = 0;
    for (cplx& v : nu) {
        if (std::abs(v) >= 1.0) ++touched;
        while (std::abs(v) >= 1.0) v *= (1.0 - delta);
    }
    return touched;
}

// Maximal quasiconformal dilation K = (1 + sup|nu|) / (1 - sup|nu|).
[[nodiscard]] inline double dilation(const BeltramiField& nu) {
    const double s = sup_abs(nu);
    if (s >= 1.0) throw DeqError("dilation: sup|nu| >= 1");
    return (1.0 + s) / (1.0 - s);
}

// Area-weighted one-ring average onto vertices (W rows of the given operators).
[[nodiscard]] inline std::vector<cplx> vertex_beltrami(const BeltramiField& nu,
                                                       const FEOperators& ops) {
    const int nf = static_cast<int>(nu.size());
    Eigen::VectorXd re(nf), im(nf);
    for (int f = 0; f < nf; ++f) {
        re[f] = nu[f].real();
        im[f] = nu[f].imag();
    }
    const Eigen::VectorXd vr = ops.W * re;
    const Eigen::VectorXd vi = ops.W * im;
    std::vector<cplx> out(static_cast<size_t>(ops.W.rows()));
    for (size_t v = 0; v < out.size(); ++v) out[v] = cplx(vr[v], vi[v]);
    return out;
}

// Face-based Laplacian of a Beltrami field: transfer to vertices with W, apply
// A^{-1} L per component, return to faces by the unweighted corner mean.
[[nodiscard]] inline BeltramiField beltrami_laplacian(const BeltramiField& nu,
                                                      const TriangleMesh& m,
                                                      const FEOperators& ops) {
    const std::vector<cplx> vb = vertex_beltrami(nu, ops);
    const int nv = static_cast<int>(vb.size());
    Eigen::VectorXd re(nv), im(nv);
    for (int v = 0; v < nv; ++v) {
        re[v] = vb[v].real();
        im[v] = vb[v].imag();
    }
    const Eigen::VectorXd lr = (ops.L * re).cwiseQuotient(ops.vertex_area);
    const Eigen::VectorXd li = (ops.L * im).cwiseQuotient(ops.vertex_area);
    BeltramiField out(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& [i, j, k] = m.faces[f];
        out[f] = cplx(lr[i] + lr[j] + lr[k], li[i] + li[j] + li[k]) / 3.0;
    }
    return out;
}

// (E2, E3): the area-weighted squared magnitude of nu and the cotangent
// Dirichlet energy of its vertex-averaged field.
[[nodiscard]] inline std::pair<double, double> qc_energies(const BeltramiField& nu,
                                                           const FEOperators& ops) {
    double e2 = 0.0;
    for (size_t f = 0; f < nu.size(); ++f) e2 += ops.face_area[f] * std::norm(nu[f]);
    const std::vector<cplx> vb = vertex_beltrami(nu, ops);
    const int nv = static_cast<int>(vb.size());
    Eigen::VectorXd re(nv), im(nv);
    for (int v = 0; v < nv; ++v) {
        re[v] = vb[v].real();
        im[v] = vb[v].imag();
    }
    const double e3 = -re.dot(ops.L * re) - im.dot(ops.L * im);
    return {e2, e3};
}

}  // namespace deqmap
