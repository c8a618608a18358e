#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fibermem/config.hpp"
#include "fibermem/errors.hpp"
#include "fibermem/export.hpp"
#include "fibermem/run.hpp"

namespace py = pybind11;
using namespace fibermem;

namespace {

using RowMatrix3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

RowMatrix3 stack(const std::vector<Vec3>& v) {
    RowMatrix3 out(v.size(), 3);
    for (std::size_t i = 0; i < v.size(); ++i) out.row(i) = v[i].transpose();
    return out;
}

template <class F>
Eigen::VectorXd per_point(const DesignField& d, F f) {
    Eigen::VectorXd out(d.size());
    for (int i = 0; i < d.size(); ++i) out(i) = f(d.points[i]);
    return out;
}

template <class F>
Eigen::VectorXd per_force(const std::vector<PointForces>& pf, F f) {
    Eigen::VectorXd out(pf.size());
    for (std::size_t i = 0; i < pf.size(); ++i) out(i) = f(pf[i]);
    return out;
}

}  // namespace

PYBIND11_MODULE(fibermem, m) {
    m.doc() = "Compliance optimization of fiber-reinforced membranes";

    auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<DegenerateElement>(m, "DegenerateElement", error.ptr());
    py::register_exception<MembraneIncompatibility>(m, "MembraneIncompatibility", error.ptr());
    py::register_exception<SingularSystem>(m, "SingularSystem", error.ptr());
    py::register_exception<InvalidLoad>(m, "InvalidLoad", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<OptimizationError>(m, "OptimizationError", error.ptr());

    py::enum_<LoadSegment>(m, "LoadSegment")
        .value("CENTERED", LoadSegment::Centered)
        .value("CORNER", LoadSegment::Corner);
    py::enum_<SensitivityRule>(m, "SensitivityRule")
        .value("ELEMENT_AVERAGE", SensitivityRule::ElementAverage)
        .value("CENTROID", SensitivityRule::Centroid);

    py::class_<SurfaceMesh>(m, "SurfaceMesh")
        .def_property_readonly("nodes", [](const SurfaceMesh& s) { return stack(s.nodes); })
        .def_readonly("elements", &SurfaceMesh::elements)
        .def_readonly("node_sets", &SurfaceMesh::node_sets)
        .def_property_readonly("boundary_labels",
                               [](const SurfaceMesh& s) {
                                   std::vector<std::string> out;
                                   for (const auto& [k, v] : s.boundary_edges) out.push_back(k);
                                   return out;
                               })
        .def_readwrite("spheroid_axes", &SurfaceMesh::spheroid_axes)
        .def_property_readonly("num_nodes", &SurfaceMesh::num_nodes)
        .def_property_readonly("num_elements", &SurfaceMesh::num_elements)
        .def("validate", &SurfaceMesh::validate)
        .def("element_area", [](const SurfaceMesh& s, int e) { return element_area(s, e); })
        .def("element_centroid", [](const SurfaceMesh& s, int e) { return element_centroid(s, e); });

    m.def("make_spheroid_mesh", &make_spheroid_mesh, py::arg("n_lat"), py::arg("n_lon"),
          py::arg("half") = true, py::arg("radius_xy") = 1.0, py::arg("radius_z") = 0.5);
    m.def("make_strip_mesh", &make_strip_mesh, py::arg("nx"), py::arg("ny"),
          py::arg("length") = 1.0, py::arg("width") = 0.5, py::arg("load_length") = 0.1,
          py::arg("segment") = LoadSegment::Centered);

    py::class_<MembraneMaterial>(m, "MembraneMaterial")
        .def(py::init([](double E, double nu, double t_b, double alpha) {
                 MembraneMaterial mat{E, nu, t_b, alpha};
                 mat.validate();
                 return mat;
             }),
             py::arg("E") = 1.0, py::arg("nu") = 0.0, py::arg("t_b") = 1.0,
             py::arg("alpha") = 0.0)
        .def_readwrite("E", &MembraneMaterial::E)
        .def_readwrite("nu", &MembraneMaterial::nu)
        .def_readwrite("t_b", &MembraneMaterial::t_b)
        .def_readwrite("alpha", &MembraneMaterial::alpha)
        .def("tangent",
             [](const MembraneMaterial& mat, double t1, double t2, const Vec2& s) {
                 return membrane_tangent_local(mat, t1, t2, s);
             },
             py::arg("t1"), py::arg("t2"), py::arg("s_local"));

    py::class_<OrthotropicConstants>(m, "OrthotropicConstants")
        .def_readonly("A", &OrthotropicConstants::A)
        .def_readonly("B", &OrthotropicConstants::B)
        .def_readonly("C", &OrthotropicConstants::C)
        .def_readonly("D", &OrthotropicConstants::D)
        .def_readonly("beta", &OrthotropicConstants::beta);
    m.def("orthotropic_constants", &orthotropic_constants, py::arg("material"), py::arg("t1"),
          py::arg("t2"));

    py::class_<LoadCase>(m, "LoadCase")
        .def(py::init<>())
        .def_readwrite("pressure", &LoadCase::pressure)
        .def_readwrite("edge_tractions", &LoadCase::edge_tractions)
        .def_readwrite("dirichlet", &LoadCase::dirichlet);

    py::class_<DesignField>(m, "DesignField")
        .def_property_readonly("size", &DesignField::size)
        .def_property_readonly("t1", [](const DesignField& d) {
            return per_point(d, [](const DesignPoint& p) { return p.t1; });
        })
        .def_property_readonly("t2", [](const DesignField& d) {
            return per_point(d, [](const DesignPoint& p) { return p.t2; });
        })
        .def_property_readonly("directions", [](const DesignField& d) {
            std::vector<Vec3> s;
            for (const auto& p : d.points) s.push_back(p.s);
            return stack(s);
        })
        .def("set_thickness",
             [](DesignField& d, const Eigen::VectorXd& t1, const Eigen::VectorXd& t2) {
                 if (t1.size() != d.size() || t2.size() != d.size())
                     throw InvalidArgument("thickness arrays must have one entry per point");
                 for (int i = 0; i < d.size(); ++i) {
                     d.points[i].t1 = t1(i);
                     d.points[i].t2 = t2(i);
                 }
             })
        .def_readonly("volume_budget", &DesignField::volume_budget)
        .def("fiber_volume", &DesignField::fiber_volume)
        .def("validate", &DesignField::validate);

    m.def("make_design_field", &make_design_field, py::arg("mesh"), py::arg("t1"), py::arg("t2"),
          py::arg("lower"), py::arg("upper"), py::arg("volume_budget"));
    m.def("initial_design", &initial_design, py::arg("mesh"), py::arg("lower"), py::arg("upper"),
          py::arg("volume_budget"));

    py::class_<MembraneState>(m, "MembraneState")
        .def_readonly("u", &MembraneState::u)
        .def_readonly("compliance", &MembraneState::compliance)
        .def_readonly("residual", &MembraneState::residual)
        .def_property_readonly("M_I", [](const MembraneState& s) {
            return per_force(s.point_forces, [](const PointForces& p) { return p.M_I; });
        })
        .def_property_readonly("M_II", [](const MembraneState& s) {
            return per_force(s.point_forces, [](const PointForces& p) { return p.M_II; });
        })
        .def_property_readonly("dir_I", [](const MembraneState& s) {
            std::vector<Vec3> d;
            for (const auto& p : s.point_forces) d.push_back(p.dir_I);
            return stack(d);
        });

    m.def("solve", &assemble_and_solve, py::arg("mesh"), py::arg("design"), py::arg("material"),
          py::arg("loads"), "Assembles and solves the membrane state problem.");

    m.def("oc_update", &oc_update, py::arg("t"), py::arg("B"), py::arg("eta"), py::arg("lower"),
          py::arg("upper"));

    py::class_<OptimizationSettings>(m, "OptimizationSettings")
        .def(py::init<>())
        .def_readwrite("eta", &OptimizationSettings::eta)
        .def_readwrite("obj_tol", &OptimizationSettings::obj_tol)
        .def_readwrite("dir_tol", &OptimizationSettings::dir_tol)
        .def_readwrite("max_oc_iters", &OptimizationSettings::max_oc_iters)
        .def_readwrite("max_rotation_updates", &OptimizationSettings::max_rotation_updates)
        .def_readwrite("tie_tol", &OptimizationSettings::tie_tol)
        .def_readwrite("bound_tol", &OptimizationSettings::bound_tol)
        .def_readwrite("sensitivity", &OptimizationSettings::sensitivity)
        .def_readwrite("strict_monotonicity", &OptimizationSettings::strict_monotonicity)
        .def_readwrite("fixed_directions", &OptimizationSettings::fixed_directions);

    py::class_<KktReport>(m, "KktReport")
        .def_readonly("multiplier", &KktReport::lambda)
        .def_readonly("max_interior_residual", &KktReport::max_interior_residual)
        .def_readonly("volume_complementarity", &KktReport::volume_complementarity)
        .def_readonly("max_bound_multiplier_violation",
                      &KktReport::max_bound_multiplier_violation)
        .def_readonly("max_bound_gap", &KktReport::max_bound_gap)
        .def_readonly("interior", &KktReport::interior)
        .def_readonly("at_lower", &KktReport::at_lower)
        .def_readonly("at_upper", &KktReport::at_upper);

    py::class_<OptimizationResult>(m, "OptimizationResult")
        .def_readonly("design", &OptimizationResult::design)
        .def_readonly("state", &OptimizationResult::state)
        .def_readonly("kkt", &OptimizationResult::kkt)
        .def_readonly("converged", &OptimizationResult::converged)
        .def_readonly("oc_updates", &OptimizationResult::oc_updates)
        .def_readonly("rotation_updates", &OptimizationResult::rotation_updates)
        .def_readonly("message", &OptimizationResult::message)
        .def_property_readonly("compliance_history", [](const OptimizationResult& r) {
            return r.history.oc_compliance;
        });

    m.def("optimize", &optimize, py::arg("mesh"), py::arg("material"), py::arg("loads"),
          py::arg("design0"), py::arg("settings") = OptimizationSettings{},
          py::call_guard<py::gil_scoped_release>());

    py::class_<RunConfig>(m, "RunConfig")
        .def_readwrite("material", &RunConfig::material)
        .def_readwrite("settings", &RunConfig::settings)
        .def("validate", &RunConfig::validate)
        .def("emit", [](const RunConfig& c) { return emit_config(c); })
        .def_property(
            "output_directory", [](const RunConfig& c) { return c.output.directory; },
            [](RunConfig& c, const std::string& d) { c.output.directory = d; });

    m.def("parse_config", [](const std::string& text) { return parse_config(text); },
          py::arg("text"));
    m.def("load_config", &load_config, py::arg("path"));

    py::class_<Problem>(m, "Problem")
        .def_readonly("mesh", &Problem::mesh)
        .def_readonly("loads", &Problem::loads)
        .def_readonly("design0", &Problem::design0);
    m.def("build_problem", &build_problem, py::arg("config"));
    m.def("solve_problem", &solve_problem, py::arg("config"), py::arg("problem"),
          py::call_guard<py::gil_scoped_release>());
    m.def("run", [](const RunConfig& c) { return run(c); }, py::arg("config"),
          "Optimizes and writes artifacts; returns 0 when converged, 2 otherwise.");
}
