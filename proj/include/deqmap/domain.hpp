#pragma once

// Circular planar domains: the unit disk minus k disjoint circular holes,
// plus the bookkeeping tying mesh boundary loops to the circles, and
// landmark constraints.

#include "mesh.hpp"

namespace deqmap {

struct CircularDomainSpec {
    std::vector<cplx> centers;
    std::vector<double> radii;

    [[nodiscard]] int hole_count() const { return static_cast<int>(centers.size()); }

    // Containment and disjointness are strict: |c_i| + r_i < 1 and
    // |c_i - c_j| > r_i + r_j.
    [[nodiscard]] bool is_valid() const {
        if (centers.size() != radii.size()) return false;
        for (size_t i = 0; i < centers.size(); ++i) {
            if (!(radii[i] > 0.0)) return false;
            if (!(std::abs(centers[i]) + radii[i] < 1.0)) return false;
            for (size_t j = i + 1; j < centers.size(); ++j)
                if (!(std::abs(centers[i] - centers[j]) > radii[i] + radii[j])) return false;
        }
        return true;
    }
    void validate() const {
        if (!is_valid()) throw DeqError("domain: holes must be disjoint and strictly inside the unit disk");
    }
};

// Ordered boundary loops of a mesh, split into the outer loop (on the unit
// circle) and hole loops aligned with CircularDomainSpec indices.
struct DomainBoundary {
    std::vector<int> outer;
    std::vector<std::vector<int>> holes;
};

struct Landmark {
    int vertex = -1;
    cplx target{0.0, 0.0};
};
using LandmarkSet = std::vector<Landmark>;

// Landmarks must reference distinct vertices with targets in the closed
// domain (inside or on the unit circle, outside every open hole).
inline void validate_landmarks(const LandmarkSet& lms, const CircularDomainSpec& domain,
                               int vertex_count) {
    std::vector<int> seen;
    for (const Landmark& lm : lms) {
        if (lm.vertex < 0 || lm.vertex >= vertex_count)
            throw DeqError("landmarks: vertex index out of range");
        for (int s : seen)
            if (s == lm.vertex) throw DeqError("landmarks: repeated vertex");
        seen.push_back(lm.vertex);
        if (std::abs(lm.target) > 1.0 + 1e-12)
            throw DeqError("landmarks: target outside the unit disk");
        for (int h = 0; h < domain.hole_count(); ++h)
            if (std::abs(lm.target - domain.centers[h]) < domain.radii[h] - 1e-12)
                throw DeqError("landmarks: target inside a hole");
    }
}

// Snaps boundary vertices onto their circles; returns the largest distance
// moved. Errors when a hole vertex coincides with its center (no radial
// direction) or an outer vertex with the origin.
inline double project_boundary(PlanarEmbedding& e, const CircularDomainSpec& domain,
                               const DomainBoundary& boundary) {
    double moved = 0.0;
    auto snap = [&moved](cplx& z, const cplx& c, double r) {
        const cplx d = z - c;
        const double len = std::abs(d);
        if (!(len > 0.0)) throw DeqError("project_boundary: boundary vertex at circle center");
        const cplx target = c + d * (r / len);
        moved = std::max(moved, std::abs(target - z));
        z = target;
    };
    for (int v : boundary.outer) snap(e[v], cplx(0.0, 0.0), 1.0);
    for (int h = 0; h < domain.hole_count(); ++h)
        for (int v : boundary.holes[h]) snap(e[v], domain.centers[h], domain.radii[h]);
    return moved;
}

}  // namespace deqmap
