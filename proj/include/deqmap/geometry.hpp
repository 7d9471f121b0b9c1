#pragma once

// Small planar/3D geometry utilities shared across the library.

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace deqmap {

using cplx = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

// Library-wide error type. Thrown on contract violations (bad input meshes,
// invalid domains, solver failures).
struct DeqError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------- Planar primitives ----------

[[nodiscard]] inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

[[nodiscard]] inline Vec2 to_vec(const cplx& z) { return {z.real(), z.imag()}; }
[[nodiscard]] inline cplx to_cplx(const Vec2& v) { return {v.x(), v.y()}; }

// Twice the signed area of the planar triangle (z0, z1, z2); positive for
// counterclockwise orientation.
[[nodiscard]] inline double signed_area2(const cplx& z0, const cplx& z1, const cplx& z2) {
    const cplx u = z1 - z0;
    const cplx w = z2 - z0;
    return u.real() * w.imag() - u.imag() * w.real();
}

[[nodiscard]] inline double signed_area(const cplx& z0, const cplx& z1, const cplx& z2) {
    return 0.5 * signed_area2(z0, z1, z2);
}

[[nodiscard]] inline double triangle_area_3d(const Vec3& p0, const Vec3& p1, const Vec3& p2) {
    return 0.5 * (p1 - p0).cross(p2 - p0).norm();
}

// ---------- Circle fitting ----------

struct CircleFit {
    cplx center{0.0, 0.0};
    double radius = 0.0;
    // max_j | |z_j - center| - radius | / radius
    double relative_residual = 0.0;
};

// Algebraic least-squares circle fit (Kasa): linear in (2cx, 2cy, r^2-|c|^2).
[[nodiscard]] inline CircleFit fit_circle(const std::vector<cplx>& pts) {
    if (pts.size() < 3) throw DeqError("fit_circle: need at least 3 points");
    Eigen::Matrix3d AtA = Eigen::Matrix3d::Zero();
    Eigen::Vector3d Atb = Eigen::Vector3d::Zero();
    for (const cplx& z : pts) {
        const Eigen::Vector3d row(z.real(), z.imag(), 1.0);
        AtA += row * row.transpose();
        Atb += row * std::norm(z);
    }
    const Eigen::Vector3d sol = AtA.ldlt().solve(Atb);
    CircleFit fit;
    fit.center = cplx(0.5 * sol.x(), 0.5 * sol.y());
    const double r2 = sol.z() + std::norm(fit.center);
    if (!(r2 > 0.0)) throw DeqError("fit_circle: degenerate point set");
    fit.radius = std::sqrt(r2);
    double worst = 0.0;
    for (const cplx& z : pts)
        worst = std::max(worst, std::abs(std::abs(z - fit.center) - fit.radius));
    fit.relative_residual = worst / fit.radius;
    return fit;
}

// ---------- Misc ----------

[[nodiscard]] inline double sqr(double x) { return x * x; }

// Unweighted mean and population variance of a sample.
[[nodiscard]] inline std::pair<double, double> mean_variance(const std::vector<double>& xs) {
    if (xs.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += sqr(x - mean);
    var /= static_cast<double>(xs.size());
    return {mean, var};
}

}  // namespace deqmap
