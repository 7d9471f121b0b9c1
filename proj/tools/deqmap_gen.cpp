#include <CLI11.hpp>

#include <cstdio>
#include <numbers>

#include <deqmap/meshgen.hpp>
#include <deqmap/obj_io.hpp>

// Generates the synthetic meshes used by the demos and the acceptance runs.

int main(int argc, char** argv) {
    using namespace deqmap;
    CLI::App app{"synthetic test meshes"};
    std::string shape;
    std::string out = "mesh.obj";
    app.add_option("--shape", shape, "disk|annulus|bump|hemisphere|cylinder|rect2|disk3")
        ->required();
    app.add_option("--out", out, "output OBJ path");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        TriangleMesh m;
        if (shape == "disk") {
            m = hex_disk(20);
        } else if (shape == "annulus") {
            m = polar_annulus(0.5, 1.0, 16, 80);
        } else if (shape == "bump") {
            m = gaussian_bump_disk(20, 0.8, 0.45);
        } else if (shape == "hemisphere") {
            m = hemisphere(16);
        } else if (shape == "cylinder") {
            m = cylinder_section(1.0, std::numbers::pi / 2.0, 1.0, 30, 20);
        } else if (shape == "rect2") {
            m = delaunay_rect(-1.5, -1.0, 1.5, 1.0, 0.07, {{-0.7, 0.0, 0.3}, {0.7, 0.0, 0.3}},
                              0.3);
        } else if (shape == "disk3") {
            m = delaunay_disk(1.0, 0.07,
                              {{-0.45, -0.3, 0.18}, {0.45, -0.3, 0.18}, {0.0, 0.45, 0.2}});
        } else {
            std::fprintf(stderr, "deqmap_gen: unknown shape '%s'\n", shape.c_str());
            return 1;
        }
        save_obj(out, m);
        std::printf("%s: %d vertices, %d faces -> %s\n", shape.c_str(), m.vertex_count(),
                    m.face_count(), out.c_str());
        return 0;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "deqmap_gen: %s\n", err.what());
        return 1;
    }
}
