#include "fibermem/export.hpp"

#include <fstream>

#include <fmt/format.h>
#include "json.hpp"

#include "fibermem/errors.hpp"

namespace fibermem {

namespace {

std::string g(double v) { return fmt::format("{:.17g}", v); }

void check_sizes(const SurfaceMesh& mesh, const DesignField& design, const MembraneState& state) {
    if (design.size() != mesh.num_elements() ||
        static_cast<int>(state.point_forces.size()) != design.size())
        throw InvalidArgument("export: mesh, design and state sizes disagree");
}

}  // namespace

std::string fields_vtk(const SurfaceMesh& mesh, const DesignField& design,
                       const MembraneState& state) {
    check_sizes(mesh, design, state);
    const int ne = mesh.num_elements();
    std::string out;
    out += "# vtk DataFile Version 3.0\n";
    out += "fibermem fiber design\n";
    out += "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    out += fmt::format("POINTS {} double\n", mesh.num_nodes());
    for (const auto& p : mesh.nodes) out += fmt::format("{} {} {}\n", g(p.x()), g(p.y()), g(p.z()));
    out += fmt::format("CELLS {} {}\n", ne, 5 * ne);
    for (const auto& el : mesh.elements)
        out += fmt::format("4 {} {} {} {}\n", el[0], el[1], el[2], el[3]);
    out += fmt::format("CELL_TYPES {}\n", ne);
    for (int e = 0; e < ne; ++e) out += "9\n";

    out += fmt::format("CELL_DATA {}\n", ne);
    auto scalars = [&](const char* name, auto value) {
        out += fmt::format("SCALARS {} double 1\nLOOKUP_TABLE default\n", name);
        for (int e = 0; e < ne; ++e) out += g(value(e)) + "\n";
    };
    scalars("t1", [&](int e) { return design.points[e].t1; });
    scalars("t2", [&](int e) { return design.points[e].t2; });
    out += "VECTORS fiber_direction double\n";
    for (const auto& p : design.points)
        out += fmt::format("{} {} {}\n", g(p.s.x()), g(p.s.y()), g(p.s.z()));
    scalars("M_I", [&](int e) { return state.point_forces[e].M_I; });
    scalars("M_II", [&](int e) { return state.point_forces[e].M_II; });
    return out;
}

void export_fields(const SurfaceMesh& mesh, const DesignField& design, const MembraneState& state,
                   const std::filesystem::path& path) {
    write_text(path, fields_vtk(mesh, design, state));
}

std::string history_csv(const RunHistory& history) {
    std::string out = "iteration,compliance,volume,max_direction_change,inner_iterations\n";
    for (std::size_t i = 0; i < history.outer.size(); ++i) {
        const auto& h = history.outer[i];
        out += fmt::format("{},{},{},{},{}\n", i, g(h.compliance), g(h.fiber_volume),
                           g(h.max_direction_change), h.inner_iterations);
    }
    return out;
}

std::string design_csv(const SurfaceMesh& mesh, const DesignField& design,
                       const MembraneState& state) {
    check_sizes(mesh, design, state);
    std::string out = "element,cx,cy,cz,t1,t2,sx,sy,sz,M_I,M_II,px,py,pz\n";
    for (int e = 0; e < design.size(); ++e) {
        const auto& p = design.points[e];
        const auto& f = state.point_forces[e];
        const Vec3 c = element_centroid(mesh, p.element);
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", p.element, g(c.x()),
                           g(c.y()), g(c.z()), g(p.t1), g(p.t2), g(p.s.x()), g(p.s.y()),
                           g(p.s.z()), g(f.M_I), g(f.M_II), g(f.dir_I.x()), g(f.dir_I.y()),
                           g(f.dir_I.z()));
    }
    return out;
}

std::string summary_json(const OptimizationResult& r, int num_elements) {
    nlohmann::ordered_json j;
    j["converged"] = r.converged;
    j["message"] = r.message;
    j["final_compliance"] = r.state.compliance;
    j["oc_updates"] = r.oc_updates;
    j["rotation_updates"] = r.rotation_updates;
    j["fiber_volume"] = r.design.fiber_volume();
    j["volume_budget"] = r.design.volume_budget;
    j["elements"] = num_elements;
    j["solve_residual"] = r.state.residual;
    j["kkt"] = {{"lambda", r.kkt.lambda},
                {"max_interior_residual", r.kkt.max_interior_residual},
                {"volume_complementarity", r.kkt.volume_complementarity},
                {"max_bound_multiplier_violation", r.kkt.max_bound_multiplier_violation},
                {"max_bound_gap", r.kkt.max_bound_gap},
                {"interior", r.kkt.interior},
                {"at_lower", r.kkt.at_lower},
                {"at_upper", r.kkt.at_upper}};
    return j.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << contents;
    out.close();
    if (!out) throw Error("failed writing '" + path.string() + "'");
}

}  // namespace fibermem
