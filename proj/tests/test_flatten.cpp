#include "helpers.hpp"

#include <deqmap/flatten.hpp>

using namespace deqmap;

namespace {

// Best-fit rotation aligning out to ref, as a unit complex factor.
cplx align_rotation(const PlanarEmbedding& out, const PlanarEmbedding& ref) {
    cplx s(0.0, 0.0);
    for (size_t v = 0; v < out.pos.size(); ++v) s += ref.pos[v] * std::conj(out.pos[v]);
    const double len = std::abs(s);
    return len > 0.0 ? s / len : cplx(1.0, 0.0);
}

}  // namespace

TEST_CASE("disk flattening of an already-flat disk is a rotation") {
    const TriangleMesh m = hex_disk(12);
    DiskConformalReport report;
    const PlanarEmbedding g = disk_conformal(m, &report);
    REQUIRE(count_flips(m, g) == 0);
    REQUIRE(report.mean_abs_mu <= 1e-6);
    const PlanarEmbedding ref = th::identity_embedding(m);
    const cplx rot = align_rotation(g, ref);
    for (int v = 0; v < m.vertex_count(); ++v)
        REQUIRE(std::abs(rot * g[v] - ref[v]) <= 1e-8);
}

TEST_CASE("disk flattening of a square sends the boundary to the unit circle") {
    const TriangleMesh m = grid_rect(-1.0, -1.0, 1.0, 1.0, 12, 12);
    const MeshTopology topo = build_topology(m);
    const PlanarEmbedding g = disk_conformal(m);
    REQUIRE(count_flips(m, g) == 0);
    for (int v : topo.boundary_loops[0]) REQUIRE(std::abs(std::abs(g[v]) - 1.0) <= 1e-12);
}

TEST_CASE("disk flattening of a hemisphere is flip-free and near-conformal") {
    const TriangleMesh m = hemisphere(16);
    DiskConformalReport report;
    const PlanarEmbedding g = disk_conformal(m, &report);
    REQUIRE(count_flips(m, g) == 0);
    REQUIRE_FALSE(report.fell_back);
    REQUIRE(detail::mean_abs(beltrami_from_surface_map(m, g)) <= 0.1);
    const MeshTopology topo = build_topology(m);
    for (int v : topo.boundary_loops[0]) REQUIRE(std::abs(std::abs(g[v]) - 1.0) <= 1e-12);
}

TEST_CASE("disk flattening rejects multiply-connected input") {
    REQUIRE_THROWS_AS(disk_conformal(polar_annulus(0.5, 1.0, 4, 24)), DeqError);
}

TEST_CASE("multi-hole flattening rejects simply-connected input") {
    REQUIRE_THROWS_WITH(koebe_circular_domain(hex_disk(4)),
                        Catch::Matchers::ContainsSubstring("disk_conformal"));
}

TEST_CASE("circular-domain flattening of a flat annulus") {
    const TriangleMesh m = polar_annulus(0.5, 1.0, 8, 64);
    KoebeResult res = koebe_circular_domain(m);
    REQUIRE(res.converged);
    REQUIRE(res.residual <= 1e-3);
    REQUIRE(res.flips == 0);
    REQUIRE(res.domain.hole_count() == 1);
    normalize_domain(res.embedding, res.domain, res.boundary);
    // The circular annulus is (up to rotation) its own circular-domain image:
    // the hole stays centered and keeps its conformal modulus.
    REQUIRE(std::abs(res.domain.centers[0]) <= 0.05);
    REQUIRE(res.domain.radii[0] == Catch::Approx(0.5).margin(0.05));
    for (int v = 0; v < m.vertex_count(); ++v) {
        const double r_in = std::hypot(m.vertices[v].x(), m.vertices[v].y());
        REQUIRE(std::abs(std::abs(res.embedding[v]) - r_in) <= 0.1);
    }
    for (int v : res.boundary.outer) REQUIRE(std::abs(std::abs(res.embedding[v]) - 1.0) <= 1e-12);
    for (int v : res.boundary.holes[0])
        REQUIRE(std::abs(std::abs(res.embedding[v] - res.domain.centers[0]) -
                         res.domain.radii[0]) <= 1e-9);
}

TEST_CASE("circular-domain flattening of a curved one-hole surface") {
    const TriangleMesh m =
        lift(polar_annulus(0.4, 1.0, 8, 48), [](double x, double y) { return 0.25 * (x * x - y * y); });
    KoebeResult res = koebe_circular_domain(m);
    REQUIRE(res.converged);
    REQUIRE(res.flips == 0);
    REQUIRE(res.domain.hole_count() == 1);
    normalize_domain(res.embedding, res.domain, res.boundary);
    REQUIRE(res.domain.is_valid());
}

TEST_CASE("circular-domain flattening of a two-hole disk") {
    const TriangleMesh m = remove_disk_regions(
        hex_disk(14), {DiskRegion{-0.45, 0.0, 0.22}, DiskRegion{0.45, 0.0, 0.22}});
    REQUIRE(build_topology(m).boundary_loops.size() == 3);
    KoebeResult res = koebe_circular_domain(m);
    REQUIRE(res.converged);
    REQUIRE(res.flips == 0);
    REQUIRE(res.domain.hole_count() == 2);
    normalize_domain(res.embedding, res.domain, res.boundary);
    REQUIRE(res.domain.is_valid());
    REQUIRE(count_flips(m, res.embedding) == 0);
}

TEST_CASE("domain normalization") {
    const TriangleMesh m = hex_disk(6);
    const MeshTopology topo = build_topology(m);
    DomainBoundary boundary;
    boundary.outer = topo.boundary_loops[0];
    SECTION("pure scaling is undone exactly") {
        PlanarEmbedding e = th::identity_embedding(m);
        for (cplx& z : e.pos) z *= 2.0;
        CircularDomainSpec domain;
        domain.centers = {cplx(0.5, 0.0)};
        domain.radii = {0.2};
        normalize_domain(e, domain, boundary);
        const PlanarEmbedding ref = th::identity_embedding(m);
        for (int v = 0; v < m.vertex_count(); ++v) REQUIRE(std::abs(e[v] - ref[v]) <= 1e-13);
        REQUIRE(std::abs(domain.centers[0] - cplx(0.25, 0.0)) <= 1e-13);
        REQUIRE(domain.radii[0] == Catch::Approx(0.1).margin(1e-13));
    }
    SECTION("translation is undone exactly") {
        PlanarEmbedding e = th::identity_embedding(m);
        for (cplx& z : e.pos) z += cplx(1.0, 0.0);
        CircularDomainSpec domain;
        normalize_domain(e, domain, boundary);
        const PlanarEmbedding ref = th::identity_embedding(m);
        for (int v = 0; v < m.vertex_count(); ++v) REQUIRE(std::abs(e[v] - ref[v]) <= 1e-13);
    }
    SECTION("idempotent") {
        PlanarEmbedding e = th::identity_embedding(m);
        for (cplx& z : e.pos) z = 1.7 * z + cplx(0.3, -0.4);
        CircularDomainSpec domain;
        normalize_domain(e, domain, boundary);
        PlanarEmbedding once = e;
        normalize_domain(e, domain, boundary);
        for (int v = 0; v < m.vertex_count(); ++v) REQUIRE(std::abs(e[v] - once[v]) <= 1e-14);
    }
    SECTION("outer boundary lands exactly on the unit circle") {
        PlanarEmbedding e = th::identity_embedding(m);
        for (cplx& z : e.pos) z = z * 3.0 + cplx(0.2, 0.1);
        CircularDomainSpec domain;
        normalize_domain(e, domain, boundary);
        for (int v : boundary.outer) REQUIRE(std::abs(std::abs(e[v]) - 1.0) <= 1e-12);
    }
}
