#include <CLI11.hpp>

#include <deqmap/cli.hpp>

int main(int argc, char** argv) {
    CLI::App app{"density-equalizing quasiconformal flattening of open triangle meshes"};
    app.require_subcommand(1);

    deqmap::cli::FlattenOptions fo;
    bool shape_preserving = false;
    CLI::App* flatten = app.add_subcommand("flatten", "map a mesh onto a circular domain");
    flatten->add_option("--input", fo.input, "source mesh (OBJ)")->required();
    flatten->add_option("--population", fo.population,
                        "population: inline JSON, JSON file, or per-face value file");
    flatten->add_option("--landmarks", fo.landmarks, "landmark constraints (JSON file)");
    flatten->add_option("--alpha", fo.solver.alpha, "coefficient magnitude weight");
    flatten->add_option("--beta", fo.solver.beta, "coefficient smoothness weight");
    flatten->add_option("--eta", fo.solver.eta, "landmark penalty weight");
    flatten->add_option("--dt", fo.solver.dt, "descent step size");
    flatten->add_option("--eps", fo.solver.epsilon, "energy stopping threshold");
    flatten->add_option("--delta", fo.solver.delta, "coefficient cut-off margin");
    flatten->add_option("--max-iter", fo.solver.max_iter, "iteration cap");
    flatten->add_flag("--shape-preserving", shape_preserving, "keep the hole layout fixed");
    flatten->add_option("--out", fo.out, "output directory");

    deqmap::cli::TextureOptions to;
    CLI::App* texture = app.add_subcommand("texture", "export UVs and area-distortion stats");
    texture->add_option("--input", to.input, "source mesh (OBJ)")->required();
    texture->add_option("--flat", to.flat, "flattened OBJ from the flatten command")->required();
    texture->add_option("--out", to.out, "output directory");

    deqmap::cli::RemeshOptions ro;
    CLI::App* remesh = app.add_subcommand("remesh", "resample the surface through the inverse map");
    remesh->add_option("--input", ro.input, "source mesh (OBJ)")->required();
    remesh->add_option("--flat", ro.flat, "flattened OBJ from the flatten command")->required();
    remesh->add_option("--spacing", ro.spacing, "planar sample spacing");
    remesh->add_option("--snap-tol", ro.snap_tol, "boundary snap tolerance");
    remesh->add_option("--out", ro.out, "output directory");

    deqmap::cli::MetricsOptions mo;
    CLI::App* metrics = app.add_subcommand("metrics", "recompute the summary row from artifacts");
    metrics->add_option("--input", mo.input, "source mesh (OBJ)")->required();
    metrics->add_option("--flat", mo.flat, "flattened OBJ")->required();
    metrics->add_option("--population", mo.population, "population spec used for the run");
    metrics->add_option("--landmarks", mo.landmarks, "landmark constraints (JSON file)");
    metrics->add_option("--report", mo.report, "report.json for the timing column");
    metrics->add_option("--out", mo.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems map to the generic error code
    }

    if (flatten->parsed()) {
        fo.solver.enable_gm = !shape_preserving;
        return deqmap::cli::cmd_flatten(fo);
    }
    if (texture->parsed()) return deqmap::cli::cmd_texture(to);
    if (remesh->parsed()) return deqmap::cli::cmd_remesh(ro);
    return deqmap::cli::cmd_metrics(mo);
}
