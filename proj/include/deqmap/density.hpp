#pragma once

// Population handling and density fields. A population assigns a positive
// mass to every face; the density is mass per current planar area. The
// equalizing velocity is v = -grad(rho)/rho, optionally with its normal
// component removed at boundary vertices (homogeneous Neumann behaviour).

#include "domain.hpp"
#include "operators.hpp"

namespace deqmap {

struct PopulationRegion {
    std::vector<int> faces;
    double factor = 1.0;
};

struct PopulationSpec {
    enum class Mode { explicit_values, uniform, area3d, scaled };
    Mode mode = Mode::area3d;
    std::vector<double> values;             // explicit_values
    std::vector<PopulationRegion> regions;  // scaled: factors applied to 3D areas

    [[nodiscard]] static PopulationSpec uniform() { return {Mode::uniform, {}, {}}; }
    [[nodiscard]] static PopulationSpec area3d() { return {Mode::area3d, {}, {}}; }
    [[nodiscard]] static PopulationSpec explicit_values(std::vector<double> v) {
        return {Mode::explicit_values, std::move(v), {}};
    }
    [[nodiscard]] static PopulationSpec scaled(std::vector<PopulationRegion> r) {
        return {Mode::scaled, {}, std::move(r)};
    }
};

// Resolves a population spec against a mesh. Throws on length mismatches,
// non-positive masses, and out-of-range region faces.
[[nodiscard]] inline std::vector<double> compute_population(const TriangleMesh& m,
                                                            const PopulationSpec& spec) {
    const size_t nf = m.faces.size();
    std::vector<double> pop;
    switch (spec.mode) {
        case PopulationSpec::Mode::explicit_values:
            if (spec.values.size() != nf)
                throw DeqError("population: value count does not match face count");
            pop = spec.values;
            break;
        case PopulationSpec::Mode::uniform:
            pop.assign(nf, 1.0);
            break;
        case PopulationSpec::Mode::area3d:
            pop = face_areas_3d(m);
            break;
        case PopulationSpec::Mode::scaled: {
            pop = face_areas_3d(m);
            for (const PopulationRegion& reg : spec.regions) {
                if (!(reg.factor > 0.0)) throw DeqError("population: region factor must be positive");
                for (int f : reg.faces) {
                    if (f < 0 || static_cast<size_t>(f) >= nf)
                        throw DeqError("population: region face index out of range");
                    pop[static_cast<size_t>(f)] *= reg.factor;
                }
            }
            break;
        }
    }
    for (double p : pop)
        if (!(p > 0.0)) throw DeqError("population: masses must be positive");
    return pop;
}

struct DensityField {
    Eigen::VectorXd face;    // mass / planar area
    Eigen::VectorXd vertex;  // area-weighted one-ring average
};

// Density of the population on the given planar embedding. The face areas
// must all be positive (flip-free embedding).
[[nodiscard]] inline DensityField density_field(const std::vector<double>& population,
                                                const TriangleMesh& m, const FEOperators& ops) {
    const int nf = m.face_count();
    if (static_cast<int>(population.size()) != nf)
        throw DeqError("density: population size mismatch");
    DensityField d;
    d.face.resize(nf);
    for (int f = 0; f < nf; ++f) {
        if (!(ops.face_area[f] > 0.0)) throw DeqError("density: non-positive face area");
        d.face[f] = population[f] / ops.face_area[f];
    }
    d.vertex = ops.W * d.face;
    return d;
}

// Density normalized to unit (unweighted) face mean, and its variance.
[[nodiscard]] inline std::pair<Eigen::VectorXd, double> normalized_density(
    const Eigen::VectorXd& face_density) {
    const double mean = face_density.mean();
    if (!(mean > 0.0)) throw DeqError("density: non-positive mean");
    const Eigen::VectorXd tilde = face_density / mean;
    const double var = (tilde.array() - 1.0).square().sum() / tilde.size();
    return {tilde, var};
}

// Equalizing velocity at every vertex. In Neumann mode the component normal
// to the carrying circle is removed at boundary vertices; otherwise the full
// velocity is kept there. Radial directions come from the current positions.
[[nodiscard]] inline std::vector<Vec2> velocity_field(const Eigen::VectorXd& rho_vertex,
                                                      const TriangleMesh& m,
                                                      const std::vector<FaceChart>& charts,
                                                      const FEOperators& ops,
                                                      const PlanarEmbedding& e,
                                                      const CircularDomainSpec& domain,
                                                      const DomainBoundary& boundary,
                                                      bool neumann) {
    for (int v = 0; v < rho_vertex.size(); ++v)
        if (!(rho_vertex[v] > 0.0)) throw DeqError("velocity: non-positive vertex density");
    const std::vector<Vec2> grad_v = vertex_average(face_gradient(rho_vertex, m, charts), ops);
    std::vector<Vec2> vel(grad_v.size());
    for (size_t v = 0; v < vel.size(); ++v) vel[v] = -grad_v[v] / rho_vertex[static_cast<int>(v)];
    if (neumann) {
        auto drop_normal = [&](int v, const cplx& center) {
            const cplx d = e[v] - center;
            const double len = std::abs(d);
            if (!(len > 0.0)) throw DeqError("velocity: boundary vertex at circle center");
            const Vec2 rhat = to_vec(d / len);
            vel[v] -= vel[v].dot(rhat) * rhat;
        };
        for (int v : boundary.outer) drop_normal(v, cplx(0.0, 0.0));
        for (int h = 0; h < domain.hole_count(); ++h)
            for (int v : boundary.holes[h]) drop_normal(v, domain.centers[h]);
    }
    return vel;
}

}  // namespace deqmap
