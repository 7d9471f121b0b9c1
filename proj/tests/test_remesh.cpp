#include "helpers.hpp"

#include <deqmap/driver.hpp>
#include <deqmap/remesh.hpp>

using namespace deqmap;

namespace {

double area_cv(const TriangleMesh& m) {
    const std::vector<double> a = face_areas_3d(m);
    double mean = 0.0;
    for (double x : a) mean += x;
    mean /= static_cast<double>(a.size());
    double var = 0.0;
    for (double x : a) var += (x - mean) * (x - mean);
    var /= static_cast<double>(a.size());
    return std::sqrt(var) / mean;
}

}  // namespace

TEST_CASE("uv export maps the closed unit disk onto the unit square") {
    const std::vector<cplx> corners = {{-1.0, -1.0}, {1.0, 1.0}, {0.0, 0.0}, {0.5, -0.25}};
    const std::vector<Vec2> uv = uv_from_planar(corners);
    REQUIRE((uv[0] - Vec2(0.0, 0.0)).norm() <= 1e-15);
    REQUIRE((uv[1] - Vec2(1.0, 1.0)).norm() <= 1e-15);
    REQUIRE((uv[2] - Vec2(0.5, 0.5)).norm() <= 1e-15);
    REQUIRE((uv[3] - Vec2(0.75, 0.375)).norm() <= 1e-15);
}

TEST_CASE("texture statistics: identity flattening of a flat mesh is undistorted") {
    const TriangleMesh m = hex_disk(8);
    const TextureStats st = texture_stats(m, th::identity_embedding(m));
    for (double r : st.uv_over_3d) REQUIRE(std::abs(r - 1.0) <= 1e-12);
    REQUIRE(st.density_var <= 1e-24);
}

TEST_CASE("texture density variance equals the area-population density variance") {
    // Same quantity by construction: rho = 3D area / planar area is the
    // density of the area population on the flattened state.
    const TriangleMesh m = gaussian_bump_disk(14, 0.8, 0.45);
    DiskConformalReport rep;
    const PlanarEmbedding e = disk_conformal(m, &rep);
    const TextureStats st = texture_stats(m, e);

    const std::vector<double> a3 = face_areas_3d(m);
    const std::vector<double> ap = face_areas_planar(m, e);
    Eigen::VectorXd rho(static_cast<Eigen::Index>(a3.size()));
    for (size_t f = 0; f < a3.size(); ++f)
        rho[static_cast<Eigen::Index>(f)] = a3[f] / ap[f];
    const double ref = normalized_density(rho).second;
    REQUIRE(std::abs(st.density_var - ref) <= 1e-15 * std::max(1.0, ref));
}

TEST_CASE("remeshing the identity flattening of a flat disk returns a flat disk") {
    const TriangleMesh m = hex_disk(10);
    const PlanarEmbedding e = th::identity_embedding(m);
    CircularDomainSpec domain;  // no holes
    const RemeshResult rm = remesh_circular_domain(m, e, domain, 0.1);
    REQUIRE(rm.dropped == 0);
    REQUIRE(rm.surface.face_count() > 100);
    REQUIRE(rm.surface.uvs.size() == rm.surface.vertices.size());
    for (const Vec3& p : rm.surface.vertices) REQUIRE(std::abs(p.z()) <= 1e-12);
    // samples reproduce their planar position through the identity map
    for (size_t v = 0; v < rm.surface.vertices.size(); ++v) {
        const Vec2 planar(2.0 * rm.surface.uvs[v].x() - 1.0, 2.0 * rm.surface.uvs[v].y() - 1.0);
        const Vec2 mapped(rm.surface.vertices[v].x(), rm.surface.vertices[v].y());
        REQUIRE((mapped - planar).norm() <= 0.03 + 1e-12);  // snapped rim samples move inward
    }
}

TEST_CASE("remeshing a flattened annulus keeps the hole and maps every sample") {
    const TriangleMesh m = polar_annulus(0.5, 1.0, 12, 60);
    const std::vector<double> pop = face_areas_3d(m);
    SolverConfig cfg;
    const DeqResult res = run_deq(m, pop, cfg);
    REQUIRE(res.domain.hole_count() == 1);
    const RemeshResult rm = remesh_circular_domain(m, res.embedding, res.domain, 0.08);
    REQUIRE(rm.dropped == 0);
    const MeshTopology topo = build_topology(rm.surface);
    REQUIRE(topo.boundary_loops.size() == 2);
    // every remeshed vertex lies on the original flat annulus surface
    for (const Vec3& p : rm.surface.vertices) {
        REQUIRE(std::abs(p.z()) <= 1e-12);
        const double r = std::hypot(p.x(), p.y());
        REQUIRE(r >= 0.5 - 1e-9);
        REQUIRE(r <= 1.0 + 1e-9);
    }
}

TEST_CASE("area-population remeshing is more uniform than conformal remeshing") {
    const TriangleMesh m = gaussian_bump_disk(20, 0.8, 0.45);
    const std::vector<double> pop = face_areas_3d(m);

    const PlanarEmbedding conf = disk_conformal(m);
    CircularDomainSpec disk_domain;
    const RemeshResult rm_conf = remesh_circular_domain(m, conf, disk_domain, 0.07);

    SolverConfig cfg;
    const DeqResult deq = run_deq(m, pop, cfg);
    REQUIRE(deq.history.back().flips == 0);
    const RemeshResult rm_deq = remesh_circular_domain(m, deq.embedding, deq.domain, 0.07);

    const double cv_conf = area_cv(rm_conf.surface);
    const double cv_deq = area_cv(rm_deq.surface);
    INFO("conformal CV " << cv_conf << " vs density-equalized CV " << cv_deq);
    REQUIRE(cv_deq <= cv_conf);
}
