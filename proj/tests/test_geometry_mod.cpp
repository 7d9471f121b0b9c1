#include "helpers.hpp"

#include <deqmap/geometry_mod.hpp>

#include <chrono>
#include <cmath>
#include <numbers>

using namespace deqmap;

namespace {

constexpr double pi = std::numbers::pi;

// Annulus test rig: flat ring meshed between the hole circle and the unit
// circle, identity map, hole vertices parametrized by angle so specific
// configurations can be rebuilt from (center, radius, rotation).
struct AnnulusRig {
    TriangleMesh mesh;
    MeshTopology topo;
    CircularDomainSpec domain;
    DomainBoundary boundary;
    std::vector<FaceChart> charts;
    FEOperators ops;
    PlanarEmbedding base;
    std::vector<double> base_theta;  // hole vertex angles in the base embedding

    explicit AnnulusRig(double hole_r = 0.35, int n_r = 3, int n_t = 12)
        : mesh(polar_annulus(hole_r, 1.0, n_r, n_t)), topo(build_topology(mesh)) {
        domain.centers = {cplx(0.0, 0.0)};
        domain.radii = {hole_r};
        const int outer = outer_loop_index(topo, th::identity_embedding(mesh));
        boundary.outer = topo.boundary_loops[static_cast<size_t>(outer)];
        boundary.holes = {topo.boundary_loops[static_cast<size_t>(1 - outer)]};
        base = th::identity_embedding(mesh);
        charts = charts_from_embedding(mesh, base);
        ops = build_fe_operators(mesh, charts);
        for (int v : boundary.holes[0]) base_theta.push_back(std::arg(base[v]));
    }

    // Embedding with the hole ring placed at c + r e^{i(theta + phi)} and the
    // other vertices taken from the given field.
    [[nodiscard]] PlanarEmbedding place_hole(const PlanarEmbedding& other, const cplx& c, double r,
                                             double phi) const {
        PlanarEmbedding e = other;
        for (size_t j = 0; j < boundary.holes[0].size(); ++j) {
            const double th = base_theta[j] + phi;
            e[boundary.holes[0][j]] = c + r * cplx(std::cos(th), std::sin(th));
        }
        return e;
    }
};

// Random flip-free perturbation: interior and outer vertices jitter freely,
// hole vertices stay on the hole circle with jittered angles.
PlanarEmbedding random_config(const AnnulusRig& rig) {
    PlanarEmbedding e = rig.base;
    for (int v = 0; v < rig.mesh.vertex_count(); ++v)
        if (!rig.topo.is_boundary_vertex[v])
            e[v] += cplx(th::urand(-0.02, 0.02), th::urand(-0.02, 0.02));
    for (int v : rig.boundary.outer) e[v] *= std::exp(cplx(0.0, th::urand(-0.05, 0.05)));
    for (size_t j = 0; j < rig.boundary.holes[0].size(); ++j) {
        const double th = rig.base_theta[j] + th::urand(-0.08, 0.08);
        e[rig.boundary.holes[0][j]] = rig.domain.centers[0] +
                                      rig.domain.radii[0] * cplx(std::cos(th), std::sin(th));
    }
    REQUIRE(count_flips(rig.mesh, e) == 0);
    return e;
}

// Boundary energies of the deformed configuration as a function of the hole
// placement, everything else frozen.
std::pair<double, double> energies_at(const AnnulusRig& rig, const PlanarEmbedding& free_part,
                                      const cplx& c, double r, double phi) {
    const PlanarEmbedding e = rig.place_hole(free_part, c, r, phi);
    const BeltramiField nu = beltrami_from_charts(rig.mesh, rig.charts, e);
    return boundary_qc_energies(nu, rig.mesh, rig.charts, rig.ops, rig.boundary.holes[0]);
}

}  // namespace

TEST_CASE("hole frames carry an orthonormal polar basis") {
    PlanarEmbedding e;
    const cplx c(0.2, -0.1);
    const double r = 0.3;
    const int n = 8;
    std::vector<int> loop;
    for (int j = 0; j < n; ++j) {
        const double th = 2.0 * pi * j / n + 0.3;
        e.pos.push_back(c + r * cplx(std::cos(th), std::sin(th)));
        loop.push_back(j);
    }
    CircularDomainSpec domain{{c}, {r}};
    DomainBoundary boundary;
    boundary.holes = {loop};

    const std::vector<HoleFrame> frames = hole_frames(e, domain, boundary);
    REQUIRE(frames.size() == 1);
    const HoleFrame& fr = frames[0];
    for (int j = 0; j < n; ++j) {
        CHECK(std::abs(fr.rhat[j]) == Catch::Approx(1.0).margin(1e-14));
        CHECK(std::abs(fr.that[j]) == Catch::Approx(1.0).margin(1e-14));
        CHECK((std::conj(fr.rhat[j]) * fr.that[j]).real() == Catch::Approx(0.0).margin(1e-14));
        const cplx rebuilt = c + r * cplx(std::cos(fr.theta[j]), std::sin(fr.theta[j]));
        CHECK(std::abs(rebuilt - e[j]) < 1e-13);
    }
}

TEST_CASE("rigid components split pure translation, inflation, and rotation") {
    PlanarEmbedding e;
    const cplx c(0.0, 0.0);
    const double r = 0.25;
    const int n = 8;
    std::vector<int> loop;
    for (int j = 0; j < n; ++j) {
        const double th = 2.0 * pi * j / n;
        e.pos.push_back(c + r * cplx(std::cos(th), std::sin(th)));
        loop.push_back(j);
    }
    CircularDomainSpec domain{{c}, {r}};
    DomainBoundary boundary;
    boundary.holes = {loop};
    const HoleFrame fr = hole_frames(e, domain, boundary)[0];

    SECTION("uniform velocity is all translation") {
        const std::vector<Vec2> v(n, Vec2(0.3, 0.0));
        const RigidRates rr = rigid_components(v, loop, fr);
        CHECK(rr.translation.real() == Catch::Approx(0.3).margin(1e-15));
        CHECK(rr.translation.imag() == Catch::Approx(0.0).margin(1e-15));
        CHECK(rr.radial == Catch::Approx(0.0).margin(1e-15));
        CHECK(rr.tangential == Catch::Approx(0.0).margin(1e-15));
    }
    SECTION("radial velocity is pure inflation") {
        std::vector<Vec2> v(n);
        for (int j = 0; j < n; ++j) v[j] = 0.1 * to_vec(fr.rhat[j]);
        const RigidRates rr = rigid_components(v, loop, fr);
        CHECK(std::abs(rr.translation) < 1e-15);
        CHECK(rr.radial == Catch::Approx(0.1).margin(1e-14));
        CHECK(rr.tangential == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("tangential velocity is pure rotation") {
        std::vector<Vec2> v(n);
        for (int j = 0; j < n; ++j) v[j] = 0.2 * to_vec(fr.that[j]);
        const RigidRates rr = rigid_components(v, loop, fr);
        CHECK(std::abs(rr.translation) < 1e-15);
        CHECK(rr.radial == Catch::Approx(0.0).margin(1e-14));
        CHECK(rr.tangential == Catch::Approx(0.2).margin(1e-14));
    }
    SECTION("tiny loops are rejected") {
        HoleFrame small;
        small.theta = {0.0, 1.0};
        CHECK_THROWS_AS(rigid_components({Vec2(0, 0), Vec2(0, 0)}, {0, 1}, small), DeqError);
    }
}

TEST_CASE("face Beltrami derivative is holomorphic in each target vertex") {
    const AnnulusRig rig;
    PlanarEmbedding e = random_config(rig);
    const double h = 1e-7;
    for (int trial = 0; trial < 20; ++trial) {
        const size_t f = static_cast<size_t>(th::rng()() % rig.mesh.faces.size());
        const int corner = static_cast<int>(th::rng()() % 3);
        const int v = rig.mesh.faces[f][corner];
        const cplx dmu = face_mu_derivative(rig.charts[f], rig.mesh.faces[f], e, corner);

        auto mu_at = [&](const cplx& shift) {
            PlanarEmbedding p = e;
            p[v] += shift;
            return affine_coeffs(rig.charts[f], rig.mesh.faces[f], p).mu();
        };
        const cplx fd_x = (mu_at(cplx(h, 0.0)) - mu_at(cplx(-h, 0.0))) / (2.0 * h);
        const cplx fd_y = (mu_at(cplx(0.0, h)) - mu_at(cplx(0.0, -h))) / (2.0 * h);
        CHECK(std::abs(fd_x - dmu) < 1e-6 * std::max(1.0, std::abs(dmu)));
        CHECK(std::abs(fd_y - cplx(0.0, 1.0) * dmu) < 1e-6 * std::max(1.0, std::abs(dmu)));
    }
}

TEST_CASE("corner derivatives cancel under rigid translation of a face") {
    const AnnulusRig rig;
    const PlanarEmbedding e = random_config(rig);
    for (size_t f = 0; f < rig.mesh.faces.size(); f += 7) {
        cplx sum(0.0, 0.0);
        double scale = 0.0;
        for (int c = 0; c < 3; ++c) {
            const cplx d = face_mu_derivative(rig.charts[f], rig.mesh.faces[f], e, c);
            sum += d;
            scale = std::max(scale, std::abs(d));
        }
        CHECK(std::abs(sum) <= 1e-12 * std::max(scale, 1.0));
    }
}

TEST_CASE("boundary descent rates vanish for conformal and constant fields") {
    const AnnulusRig rig;

    SECTION("zero field gives exactly zero rates") {
        const BeltramiField nu(rig.mesh.faces.size(), cplx(0.0, 0.0));
        const auto frames = hole_frames(rig.base, rig.domain, rig.boundary);
        const auto [qc, smooth] =
            boundary_qc_descent(nu, rig.mesh, rig.charts, rig.base, rig.ops, rig.boundary, frames);
        CHECK(std::abs(qc[0].translation) == 0.0);
        CHECK(qc[0].radial == 0.0);
        CHECK(qc[0].tangential == 0.0);
        CHECK(std::abs(smooth[0].translation) == 0.0);
        CHECK(smooth[0].radial == 0.0);
        CHECK(smooth[0].tangential == 0.0);
    }
    SECTION("constant field kills the smoothness rates but not the area term") {
        const PlanarEmbedding e = th::stretch_embedding(rig.base, cplx(0.2, 0.05));
        REQUIRE(count_flips(rig.mesh, e) == 0);
        const BeltramiField nu = beltrami_from_charts(rig.mesh, rig.charts, e);
        for (const cplx& v : nu) REQUIRE(std::abs(v - cplx(0.2, 0.05)) < 1e-12);
        const auto frames = hole_frames(e, rig.domain, rig.boundary);
        const auto [qc, smooth] =
            boundary_qc_descent(nu, rig.mesh, rig.charts, e, rig.ops, rig.boundary, frames);
        CHECK(std::abs(smooth[0].translation) < 1e-12);
        CHECK(std::abs(smooth[0].radial) < 1e-12);
        CHECK(std::abs(smooth[0].tangential) < 1e-12);
        const double qc_size = std::abs(qc[0].translation) + std::abs(qc[0].radial) +
                               std::abs(qc[0].tangential);
        CHECK(qc_size > 1e-6);
    }
}

TEST_CASE("boundary descent rates match finite differences of the energies") {
    const AnnulusRig rig;
    const double h = 1e-6;
    const double n = static_cast<double>(rig.boundary.holes[0].size());
    const double r0 = rig.domain.radii[0];
    int checked = 0;

    const auto t0 = std::chrono::steady_clock::now();
    for (int config = 0; config < 100; ++config) {
        const PlanarEmbedding e = random_config(rig);
        const BeltramiField nu = beltrami_from_charts(rig.mesh, rig.charts, e);
        const auto frames = hole_frames(e, rig.domain, rig.boundary);
        const auto [qc, smooth] =
            boundary_qc_descent(nu, rig.mesh, rig.charts, e, rig.ops, rig.boundary, frames);

        // Reparametrize the hole placement around the current configuration.
        PlanarEmbedding free_part = e;
        AnnulusRig reparam = rig;
        reparam.base_theta = frames[0].theta;
        const cplx c0 = rig.domain.centers[0];

        auto check_pair = [&](double fd2, double fd3, double an2, double an3) {
            CHECK(std::abs(fd2 - an2) <= 1e-5 * std::max({std::abs(fd2), std::abs(an2), 1e-8}));
            CHECK(std::abs(fd3 - an3) <= 1e-5 * std::max({std::abs(fd3), std::abs(an3), 1e-8}));
            checked += 2;
        };

        {  // radius
            const auto [p2, p3] = energies_at(reparam, free_part, c0, r0 + h, 0.0);
            const auto [m2, m3] = energies_at(reparam, free_part, c0, r0 - h, 0.0);
            check_pair((p2 - m2) / (2.0 * h), (p3 - m3) / (2.0 * h), -n * qc[0].radial,
                       -n * smooth[0].radial);
        }
        {  // rotation: angle derivative scales the tangential rate by r
            const auto [p2, p3] = energies_at(reparam, free_part, c0, r0, h);
            const auto [m2, m3] = energies_at(reparam, free_part, c0, r0, -h);
            check_pair((p2 - m2) / (2.0 * h), (p3 - m3) / (2.0 * h), -n * r0 * qc[0].tangential,
                       -n * r0 * smooth[0].tangential);
        }
        {  // center x
            const auto [p2, p3] = energies_at(reparam, free_part, c0 + cplx(h, 0.0), r0, 0.0);
            const auto [m2, m3] = energies_at(reparam, free_part, c0 - cplx(h, 0.0), r0, 0.0);
            check_pair((p2 - m2) / (2.0 * h), (p3 - m3) / (2.0 * h),
                       -n * qc[0].translation.real(), -n * smooth[0].translation.real());
        }
        {  // center y
            const auto [p2, p3] = energies_at(reparam, free_part, c0 + cplx(0.0, h), r0, 0.0);
            const auto [m2, m3] = energies_at(reparam, free_part, c0 - cplx(0.0, h), r0, 0.0);
            check_pair((p2 - m2) / (2.0 * h), (p3 - m3) / (2.0 * h),
                       -n * qc[0].translation.imag(), -n * smooth[0].translation.imag());
        }
    }
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
    CHECK(checked == 800);
    CHECK(elapsed.count() < 5.0);
}

TEST_CASE("boundary descent decreases the boundary energies") {
    const AnnulusRig rig;
    for (int trial = 0; trial < 5; ++trial) {
        const PlanarEmbedding e = random_config(rig);
        const BeltramiField nu = beltrami_from_charts(rig.mesh, rig.charts, e);
        const auto frames = hole_frames(e, rig.domain, rig.boundary);
        const auto [qc, smooth] =
            boundary_qc_descent(nu, rig.mesh, rig.charts, e, rig.ops, rig.boundary, frames);

        AnnulusRig reparam = rig;
        reparam.base_theta = frames[0].theta;
        const cplx c0 = rig.domain.centers[0];
        const double r0 = rig.domain.radii[0];
        const double dt = 1e-4;

        auto after = [&](const RigidRates& rr) {
            return energies_at(reparam, e, c0 + dt * rr.translation, r0 + dt * rr.radial,
                               dt * rr.tangential / r0);
        };
        const auto [e2_0, e3_0] = energies_at(reparam, e, c0, r0, 0.0);
        CHECK(after(qc[0]).first < e2_0);
        CHECK(after(smooth[0]).second < e3_0);

        // Combined weighted motion decreases the weighted sum.
        const double alpha = 0.1, beta = 0.05;
        RigidRates mixed;
        mixed.translation = alpha * qc[0].translation + beta * smooth[0].translation;
        mixed.radial = alpha * qc[0].radial + beta * smooth[0].radial;
        mixed.tangential = alpha * qc[0].tangential + beta * smooth[0].tangential;
        const auto [e2_1, e3_1] = after(mixed);
        CHECK(alpha * e2_1 + beta * e3_1 < alpha * e2_0 + beta * e3_0);
    }
}

TEST_CASE("domain updates keep the spec valid and halve the step on trouble") {
    SECTION("zero rates leave the domain untouched") {
        CircularDomainSpec d{{cplx(0.2, 0.0)}, {0.25}};
        HoleFrame fr;
        fr.theta = {0.0, 2.0, 4.0};
        const DomainUpdate upd = update_domain(d, {fr}, {RigidRates{}}, 0.1);
        CHECK_FALSE(upd.skipped);
        CHECK(upd.domain.centers[0] == d.centers[0]);
        CHECK(upd.domain.radii[0] == d.radii[0]);
        CHECK(upd.theta[0] == fr.theta);
        CHECK(upd.dt_used == 0.1);
    }
    SECTION("radial rate 0.1 at dt 0.1 grows the radius to 0.21") {
        CircularDomainSpec d{{cplx(0.0, 0.0)}, {0.2}};
        HoleFrame fr;
        fr.theta = {0.0, 1.0, 2.0, 3.0};
        RigidRates rr;
        rr.radial = 0.1;
        rr.tangential = 0.3;
        const DomainUpdate upd = update_domain(d, {fr}, {rr}, 0.1);
        CHECK(upd.domain.radii[0] == Catch::Approx(0.21).margin(1e-15));
        for (size_t j = 0; j < fr.theta.size(); ++j)
            CHECK(upd.theta[0][j] == Catch::Approx(fr.theta[j] + 0.1 * 0.3 / 0.2).margin(1e-15));
    }
    SECTION("colliding holes engage the halving") {
        CircularDomainSpec d{{cplx(-0.3, 0.0), cplx(0.3, 0.0)}, {0.12, 0.12}};
        std::vector<HoleFrame> frames(2);
        frames[0].theta = frames[1].theta = {0.0, 1.0, 2.0};
        std::vector<RigidRates> rates(2);
        rates[0].translation = cplx(0.25, 0.0);
        rates[1].translation = cplx(-0.25, 0.0);
        const DomainUpdate upd = update_domain(d, frames, rates, 1.0);
        CHECK_FALSE(upd.skipped);
        CHECK(upd.dt_used < 1.0);
        CHECK(upd.domain.is_valid());
    }
    SECTION("a hole pushed out of the disk is pulled back by halving") {
        CircularDomainSpec d{{cplx(0.7, 0.0)}, {0.2}};
        HoleFrame fr;
        fr.theta = {0.0, 1.0, 2.0};
        RigidRates rr;
        rr.translation = cplx(1.0, 0.0);
        const DomainUpdate upd = update_domain(d, {fr}, {rr}, 1.0);
        CHECK_FALSE(upd.skipped);
        CHECK(upd.domain.is_valid());
        CHECK(std::abs(upd.domain.centers[0]) + upd.domain.radii[0] < 1.0);
    }
    SECTION("a hopeless rate gives up after ten halvings") {
        CircularDomainSpec d{{cplx(0.0, 0.0)}, {0.2}};
        HoleFrame fr;
        fr.theta = {0.0, 1.0, 2.0};
        RigidRates rr;
        rr.radial = 1e9;
        const DomainUpdate upd = update_domain(d, {fr}, {rr}, 0.1);
        CHECK(upd.skipped);
        CHECK(upd.dt_used == 0.0);
        CHECK(upd.domain.centers[0] == d.centers[0]);
        CHECK(upd.domain.radii[0] == d.radii[0]);
    }
}

TEST_CASE("reconstruction target shrinks constant fields by one descent step") {
    const AnnulusRig rig;
    const cplx c(0.3, -0.2);
    const BeltramiField nu(rig.mesh.faces.size(), c);
    const BeltramiField out = modification_target(nu, rig.mesh, rig.ops, 0.1, 0.05, 0.1);
    const cplx expected = c * (1.0 - 0.1 * 0.1);
    for (const cplx& v : out) CHECK(std::abs(v - expected) < 1e-12);

    BeltramiField big(rig.mesh.faces.size(), cplx(0.95, 0.4));
    const BeltramiField capped = modification_target(big, rig.mesh, rig.ops, 0.1, 0.0, 0.1);
    CHECK(sup_abs(capped) < 1.0);
}

TEST_CASE("reconstruction with zero field and fixed boundary is the identity") {
    const AnnulusRig rig;
    Constraints bc;
    for (int v : rig.boundary.outer) bc.add(v, rig.base[v]);
    for (int v : rig.boundary.holes[0]) bc.add(v, rig.base[v]);
    const BeltramiField zero(rig.mesh.faces.size(), cplx(0.0, 0.0));
    const auto [g, gnu] = domain_reconstruct(rig.mesh, rig.charts, zero, bc, rig.ops, 0.1, 0.05, 0.1);
    for (int v = 0; v < rig.mesh.vertex_count(); ++v)
        CHECK(std::abs(g[v] - rig.base[v]) < 1e-11);
    CHECK(sup_abs(gnu) < 1e-10);
}

TEST_CASE("geometry modification is a no-op under uniform density") {
    const AnnulusRig rig;
    GmConfig cfg;
    cfg.alpha = 0.0;
    cfg.beta = 0.0;

    SECTION("from the identity configuration") {
        const std::vector<double> pop = face_areas_planar(rig.mesh, rig.base);
        const BeltramiField nu = beltrami_from_charts(rig.mesh, rig.charts, rig.base);
        const GmResult res = gm_step(rig.mesh, rig.charts, rig.base, nu, pop, rig.domain,
                                     rig.boundary, rig.ops, cfg);
        REQUIRE(res.domain_updated);
        CHECK(std::abs(res.domain.centers[0] - rig.domain.centers[0]) < 1e-13);
        CHECK(res.domain.radii[0] == Catch::Approx(rig.domain.radii[0]).margin(1e-13));
        for (int v = 0; v < rig.mesh.vertex_count(); ++v)
            CHECK(std::abs(res.embedding[v] - rig.base[v]) < 1e-10);
    }
    SECTION("from a deformed flip-free state") {
        PlanarEmbedding e = rig.base;
        for (size_t j = 0; j < rig.boundary.holes[0].size(); ++j) {
            const double th = rig.base_theta[j] + 0.15;
            e[rig.boundary.holes[0][j]] = rig.domain.radii[0] * cplx(std::cos(th), std::sin(th));
        }
        REQUIRE(count_flips(rig.mesh, e) == 0);
        const std::vector<double> pop = face_areas_planar(rig.mesh, e);
        const BeltramiField nu = beltrami_from_charts(rig.mesh, rig.charts, e);
        const GmResult res =
            gm_step(rig.mesh, rig.charts, e, nu, pop, rig.domain, rig.boundary, rig.ops, cfg);
        REQUIRE(res.domain_updated);
        CHECK(std::abs(res.domain.centers[0] - rig.domain.centers[0]) < 1e-13);
        CHECK(res.domain.radii[0] == Catch::Approx(rig.domain.radii[0]).margin(1e-13));
        for (int v = 0; v < rig.mesh.vertex_count(); ++v)
            CHECK(std::abs(res.embedding[v] - e[v]) < 1e-10);
    }
}

TEST_CASE("uneven population moves the hole and keeps the map folded-free") {
    const AnnulusRig rig(0.3, 4, 24);
    std::vector<double> pop = face_areas_planar(rig.mesh, rig.base);
    for (size_t f = 0; f < rig.mesh.faces.size(); ++f) {
        const auto& [i, j, k] = rig.mesh.faces[f];
        const cplx cen = (rig.base[i] + rig.base[j] + rig.base[k]) / 3.0;
        if (cen.real() > 0.0) pop[f] *= 4.0;
    }
    const BeltramiField nu = beltrami_from_charts(rig.mesh, rig.charts, rig.base);
    const GmResult res = gm_step(rig.mesh, rig.charts, rig.base, nu, pop, rig.domain, rig.boundary,
                                 rig.ops, GmConfig{});
    REQUIRE(res.domain_updated);
    CHECK(res.domain.is_valid());
    CHECK(std::abs(res.domain.centers[0] - rig.domain.centers[0]) > 1e-4);
    CHECK(count_flips(rig.mesh, res.embedding) == 0);
    // Hole vertices land exactly on the updated circle.
    for (size_t j = 0; j < rig.boundary.holes[0].size(); ++j) {
        const cplx d = res.embedding[rig.boundary.holes[0][j]] - res.domain.centers[0];
        CHECK(std::abs(std::abs(d) - res.domain.radii[0]) < 1e-12);
    }
}
