#include "fibermem/run.hpp"

#include <fmt/format.h>

#include "fibermem/errors.hpp"
#include "fibermem/export.hpp"

namespace fibermem {

namespace {

LoadCase spheroid_loads(const RunConfig& config) {
    LoadCase loads;
    loads.pressure = config.load.pressure;
    if (config.geometry.half) {
        // Symmetry plane z = 0 plus in-plane rigid modes, restrained only in
        // components the symmetric solution leaves at zero.
        loads.dirichlet["symmetry"] = {std::nullopt, std::nullopt, 0.0};
        loads.dirichlet["axis_x+"] = {std::nullopt, 0.0, std::nullopt};
        loads.dirichlet["axis_y+"] = {0.0, std::nullopt, std::nullopt};
        loads.dirichlet["axis_y-"] = {0.0, std::nullopt, std::nullopt};
    } else {
        loads.dirichlet["axis_x+"] = {std::nullopt, 0.0, 0.0};
        loads.dirichlet["axis_x-"] = {std::nullopt, 0.0, 0.0};
        loads.dirichlet["axis_y+"] = {0.0, std::nullopt, 0.0};
    }
    return loads;
}

LoadCase strip_loads(const RunConfig& config) {
    LoadCase loads;
    const double q = config.load.traction;
    loads.edge_tractions["loaded"] = config.load.traction_direction == TractionDirection::Normal
                                         ? Vec3(q, 0.0, 0.0)
                                         : Vec3(0.0, q, 0.0);
    loads.dirichlet["clamped"] = {0.0, 0.0, 0.0};
    return loads;
}

}  // namespace

Problem build_problem(const RunConfig& config) {
    config.validate();
    const auto& g = config.geometry;
    Problem p;
    if (g.kind == GeometryKind::Spheroid) {
        p.mesh = make_spheroid_mesh(g.n_lat, g.n_lon, g.half, g.radius_xy, g.radius_z);
        if (!g.exact_surface) p.mesh.spheroid_axes.reset();
        p.loads = spheroid_loads(config);
    } else {
        p.mesh = make_strip_mesh(g.nx, g.ny, g.length, g.width, g.load_length, g.load_position);
        p.loads = strip_loads(config);
    }
    p.design0 = initial_design(p.mesh, config.design.lower, config.design.upper,
                               config.design.volume);
    if (config.design.init_direction == InitDirection::PrincipalFromUnreinforced) {
        MembraneSolver solver(p.mesh, config.material, p.loads);
        align_with_unreinforced_principal(solver, p.design0, config.settings.tie_tol);
    }
    return p;
}

OptimizationResult solve_problem(const RunConfig& config, const Problem& problem) {
    return optimize(problem.mesh, config.material, problem.loads, problem.design0, config.settings);
}

int run(const RunConfig& config, std::ostream* log) {
    const Problem problem = build_problem(config);
    if (log)
        *log << fmt::format("mesh: {} nodes, {} elements; fiber budget {}\n",
                            problem.mesh.num_nodes(), problem.mesh.num_elements(),
                            config.design.volume);
    const OptimizationResult result = solve_problem(config, problem);
    if (log)
        *log << fmt::format("{}: compliance {:.10g} after {} OC updates, {} rotation updates\n",
                            result.message, result.state.compliance, result.oc_updates,
                            result.rotation_updates);

    namespace fs = std::filesystem;
    const fs::path dir(config.output.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

    auto wants = [&](const char* fmt_name) {
        for (const auto& f : config.output.formats)
            if (f == fmt_name) return true;
        return false;
    };
    write_text(dir / "effective_config.ini", emit_config(config));
    if (wants("csv")) {
        write_text(dir / "history.csv", history_csv(result.history));
        write_text(dir / "design.csv", design_csv(problem.mesh, result.design, result.state));
    }
    if (wants("vtk")) export_fields(problem.mesh, result.design, result.state, dir / "fields.vtk");
    if (wants("json"))
        write_text(dir / "summary.json", summary_json(result, problem.mesh.num_elements()));
    return result.converged ? kConverged : kNotConverged;
}

}  // namespace fibermem
