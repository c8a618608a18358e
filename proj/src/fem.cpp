#include "fibermem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "fibermem/errors.hpp"

namespace fibermem {

namespace {

Vec2 fiber_local(const DesignPoint& point, const TangentFrame& frame) {
    const Vec2 s = frame.local(point.s);
    const double norm = s.norm();
    if (!(norm > 1e-12))
        throw InvalidArgument("fiber direction of point " + std::to_string(point.element) +
                              " is normal to its element");
    return s / norm;
}

// Reference coordinates of the midpoint of local edge k.
Vec2 edge_midpoint(int k) {
    switch (k) {
        case 0: return {0.0, -1.0};
        case 1: return {1.0, 0.0};
        case 2: return {0.0, 1.0};
        default: return {-1.0, 0.0};
    }
}

}  // namespace

StrainOperator strain_operator(const SurfacePoint& sp) {
    StrainOperator B = StrainOperator::Zero();
    const auto& f = sp.frame;
    for (int a = 0; a < 4; ++a) {
        const Vec2& g = sp.grad_local[a];
        B.block<1, 3>(0, 3 * a) = g.x() * f.e1.transpose();
        B.block<1, 3>(1, 3 * a) = g.y() * f.e2.transpose();
        B.block<1, 3>(2, 3 * a) = g.y() * f.e1.transpose() + g.x() * f.e2.transpose();
    }
    return B;
}

ElementMatrix element_stiffness(const SurfaceMesh& mesh, int element, const DesignPoint& point,
                                const MembraneMaterial& material) {
    if (point.element != element)
        throw InvalidArgument("design point belongs to element " + std::to_string(point.element) +
                              ", not " + std::to_string(element));
    ElementMatrix K = ElementMatrix::Zero();
    for (const auto& g : gauss_points_2x2()) {
        const SurfacePoint sp = surface_point(mesh, element, g);
        const StrainOperator B = strain_operator(sp);
        const MembraneTangent S =
            membrane_tangent_local(material, point.t1, point.t2, fiber_local(point, sp.frame));
        K.noalias() += sp.area_jacobian * B.transpose() * S * B;
    }
    return 0.5 * (K + K.transpose());
}

Eigen::VectorXd load_vector(const SurfaceMesh& mesh, const LoadCase& loads) {
    Eigen::VectorXd F = Eigen::VectorXd::Zero(3 * mesh.num_nodes());
    if (loads.pressure != 0.0) {
        for (int e = 0; e < mesh.num_elements(); ++e) {
            const auto& el = mesh.elements[e];
            for (const auto& g : gauss_points_2x2()) {
                const SurfacePoint sp = surface_point(mesh, e, g);
                const Vec3 f = loads.pressure * sp.area_jacobian * sp.frame.n;
                for (int a = 0; a < 4; ++a) F.segment<3>(3 * el[a]) += sp.shape.N[a] * f;
            }
        }
    }
    for (const auto& [label, q] : loads.edge_tractions) {
        auto it = mesh.boundary_edges.find(label);
        if (it == mesh.boundary_edges.end())
            throw InvalidLoad("traction on unknown boundary label '" + label + "'");
        if (q.isZero(0.0)) continue;
        for (const auto& [e, k] : it->second) {
            const auto& el = mesh.elements[e];
            const Vec3 n = tangent_frame_at(mesh, e, edge_midpoint(k)).n;
            if (std::abs(q.dot(n)) > 1e-10 * q.norm())
                throw InvalidLoad("traction on '" + label + "' has a component normal to element " +
                                  std::to_string(e));
            const int a = el[k], b = el[(k + 1) % 4];
            const double len = (mesh.nodes[b] - mesh.nodes[a]).norm();
            // Constant traction on a straight edge: half the resultant to each end node.
            F.segment<3>(3 * a) += 0.5 * len * q;
            F.segment<3>(3 * b) += 0.5 * len * q;
        }
    }
    return F;
}

Voigt3 element_strain(const SurfaceMesh& mesh, int element, const Eigen::VectorXd& u,
                      const Vec2& local_coords) {
    const SurfacePoint sp = surface_point(mesh, element, local_coords);
    Eigen::Matrix<double, 12, 1> ue;
    const auto& el = mesh.elements[element];
    for (int a = 0; a < 4; ++a) ue.segment<3>(3 * a) = u.segment<3>(3 * el[a]);
    return strain_operator(sp) * ue;
}

PointForces principal_forces(const Eigen::Matrix2d& M, const TangentFrame& frame, double tie_tol) {
    PointForces pf;
    pf.M = 0.5 * (M + M.transpose());
    pf.frame = frame;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(pf.M);
    const Eigen::Vector2d vals = eig.eigenvalues();  // ascending
    // Largest magnitude first; equal magnitudes put the tensile value first.
    const int I = std::abs(vals(1)) >= std::abs(vals(0)) ? 1 : 0;
    const int II = 1 - I;
    pf.M_I = vals(I);
    pf.M_II = vals(II);
    auto normalize_sign = [](Vec3 v) {
        int idx = 0;
        for (int c = 1; c < 3; ++c)
            if (std::abs(v(c)) > std::abs(v(idx)) + 1e-14) idx = c;
        return v(idx) < 0.0 ? Vec3(-v) : v;
    };
    pf.dir_I = normalize_sign(frame.global(eig.eigenvectors().col(I)).normalized());
    pf.dir_II = normalize_sign(frame.global(eig.eigenvectors().col(II)).normalized());
    const double a = std::abs(pf.M_I), b = std::abs(pf.M_II);
    pf.degenerate = a - b <= tie_tol * (a + b + std::numeric_limits<double>::epsilon());
    return pf;
}

std::array<double, 2> pointwise_sensitivity(const Vec2& s_local, const Voigt3& eps, double alpha) {
    const Vec2 s = s_local.normalized();
    const double e1 = fiber_projection(s).dot(eps);
    const double e2 = fiber_projection(Vec2(-s.y(), s.x())).dot(eps);
    return {alpha * e1 * e1, alpha * e2 * e2};
}

std::array<double, 2> pointwise_sensitivity(const DesignPoint& point, const TangentFrame& frame,
                                            const Voigt3& eps, double alpha) {
    return pointwise_sensitivity(fiber_local(point, frame), eps, alpha);
}

std::array<double, 2> element_sensitivity(const SurfaceMesh& mesh, const DesignPoint& point,
                                          const MembraneMaterial& material,
                                          const Eigen::VectorXd& u, SensitivityRule rule) {
    const int e = point.element;
    const auto& el = mesh.elements[e];
    Eigen::Matrix<double, 12, 1> ue;
    for (int a = 0; a < 4; ++a) ue.segment<3>(3 * a) = u.segment<3>(3 * el[a]);

    if (rule == SensitivityRule::Centroid) {
        const SurfacePoint sp = surface_point(mesh, e, Vec2::Zero());
        return pointwise_sensitivity(point, sp.frame, strain_operator(sp) * ue, material.alpha);
    }
    std::array<double, 2> A{0.0, 0.0};
    double area = 0.0;
    for (const auto& g : gauss_points_2x2()) {
        const SurfacePoint sp = surface_point(mesh, e, g);
        const auto a = pointwise_sensitivity(point, sp.frame, strain_operator(sp) * ue,
                                             material.alpha);
        A[0] += sp.area_jacobian * a[0];
        A[1] += sp.area_jacobian * a[1];
        area += sp.area_jacobian;
    }
    return {A[0] / area, A[1] / area};
}

std::vector<PointForces> recover_membrane_forces(const SurfaceMesh& mesh, const DesignField& design,
                                                 const MembraneMaterial& material,
                                                 const Eigen::VectorXd& u, double tie_tol) {
    std::vector<PointForces> out;
    out.reserve(design.points.size());
    for (const auto& p : design.points) {
        const SurfacePoint sp = surface_point(mesh, p.element, Vec2::Zero());
        const Voigt3 eps = element_strain(mesh, p.element, u, Vec2::Zero());
        const MembraneTangent S =
            membrane_tangent_local(material, p.t1, p.t2, fiber_local(p, sp.frame));
        PointForces pf = principal_forces(voigt_to_force(S * eps), sp.frame, tie_tol);
        pf.strain = eps;
        out.push_back(pf);
    }
    return out;
}

struct MembraneSolver::Impl {
    const SurfaceMesh* mesh;
    MembraneMaterial material;
    LoadCase loads;
    Eigen::VectorXd F;
    std::vector<char> constrained;
    Eigen::VectorXd prescribed;  // 3N, values on constrained dofs
    std::vector<int> free_index;  // -1 on constrained dofs
    int num_free = 0;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool analyzed = false;
};

MembraneSolver::MembraneSolver(const SurfaceMesh& mesh, const MembraneMaterial& material,
                               LoadCase loads)
    : impl_(std::make_unique<Impl>()) {
    material.validate();
    auto& m = *impl_;
    m.mesh = &mesh;
    m.material = material;
    m.loads = std::move(loads);
    m.F = load_vector(mesh, m.loads);

    const int ndof = 3 * mesh.num_nodes();
    m.constrained.assign(ndof, 0);
    m.prescribed = Eigen::VectorXd::Zero(ndof);
    for (const auto& [label, spec] : m.loads.dirichlet) {
        auto it = mesh.node_sets.find(label);
        if (it == mesh.node_sets.end())
            throw InvalidLoad("Dirichlet condition on unknown node set '" + label + "'");
        for (int n : it->second)
            for (int c = 0; c < 3; ++c)
                if (spec[c]) {
                    m.constrained[3 * n + c] = 1;
                    m.prescribed(3 * n + c) = *spec[c];
                }
    }
    // A flat membrane has no stiffness against out-of-plane motion.
    if (mesh.is_planar())
        for (int n = 0; n < mesh.num_nodes(); ++n) m.constrained[3 * n + 2] = 1;

    m.free_index.assign(ndof, -1);
    for (int d = 0; d < ndof; ++d)
        if (!m.constrained[d]) m.free_index[d] = m.num_free++;
}

MembraneSolver::~MembraneSolver() = default;
MembraneSolver::MembraneSolver(MembraneSolver&&) noexcept = default;
MembraneSolver& MembraneSolver::operator=(MembraneSolver&&) noexcept = default;

const Eigen::VectorXd& MembraneSolver::load() const { return impl_->F; }
const std::vector<char>& MembraneSolver::constrained() const { return impl_->constrained; }
const SurfaceMesh& MembraneSolver::mesh() const { return *impl_->mesh; }
const MembraneMaterial& MembraneSolver::material() const { return impl_->material; }

Eigen::SparseMatrix<double> MembraneSolver::global_stiffness(const DesignField& design) const {
    const auto& mesh = *impl_->mesh;
    if (design.size() != mesh.num_elements())
        throw InvalidArgument("design must have one point per element");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(144 * mesh.num_elements());
    for (int e = 0; e < mesh.num_elements(); ++e) {
        const ElementMatrix Ke = element_stiffness(mesh, e, design.points[e], impl_->material);
        const auto& el = mesh.elements[e];
        for (int a = 0; a < 4; ++a)
            for (int i = 0; i < 3; ++i)
                for (int b = 0; b < 4; ++b)
                    for (int j = 0; j < 3; ++j)
                        trip.emplace_back(3 * el[a] + i, 3 * el[b] + j, Ke(3 * a + i, 3 * b + j));
    }
    const int ndof = 3 * mesh.num_nodes();
    Eigen::SparseMatrix<double> K(ndof, ndof);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

MembraneState MembraneSolver::solve(const DesignField& design, double tie_tol) {
    auto& m = *impl_;
    const auto& mesh = *m.mesh;
    const Eigen::SparseMatrix<double> K = global_stiffness(design);
    const int ndof = 3 * mesh.num_nodes();

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(K.nonZeros());
    Eigen::VectorXd rhs(m.num_free);
    for (int d = 0; d < ndof; ++d)
        if (m.free_index[d] >= 0) rhs(m.free_index[d]) = m.F(d);
    for (int col = 0; col < K.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
            const int fr = m.free_index[it.row()], fc = m.free_index[it.col()];
            if (fr < 0) continue;
            if (fc >= 0)
                trip.emplace_back(fr, fc, it.value());
            else
                rhs(fr) -= it.value() * m.prescribed(it.col());
        }
    }
    Eigen::SparseMatrix<double> Kff(m.num_free, m.num_free);
    Kff.setFromTriplets(trip.begin(), trip.end());

    if (!m.analyzed) {
        m.ldlt.analyzePattern(Kff);
        m.analyzed = true;
    }
    m.ldlt.factorize(Kff);
    const Eigen::VectorXd D = m.ldlt.vectorD();
    const double dmax = D.size() ? D.cwiseAbs().maxCoeff() : 0.0;
    int null_modes = 0;
    for (Eigen::Index i = 0; i < D.size(); ++i)
        if (!(D(i) > 1e-12 * dmax)) ++null_modes;
    if (m.ldlt.info() != Eigen::Success || null_modes > 0)
        throw SingularSystem(null_modes, "stiffness is singular after constraints: " +
                                             std::to_string(null_modes) + " zero-energy mode(s)");

    Eigen::VectorXd uf = m.ldlt.solve(rhs);
    const double rhs_norm = rhs.norm();
    double residual = rhs_norm > 0.0 ? (Kff * uf - rhs).norm() / rhs_norm : 0.0;
    for (int pass = 0; pass < 3 && residual > 1e-12; ++pass) {
        uf += m.ldlt.solve(rhs - Kff * uf);
        residual = (Kff * uf - rhs).norm() / rhs_norm;
    }

    MembraneState state;
    state.u = m.prescribed;
    for (int d = 0; d < ndof; ++d)
        if (m.free_index[d] >= 0) state.u(d) = uf(m.free_index[d]);
    state.compliance = 0.5 * m.F.dot(state.u);
    state.residual = residual;
    state.point_forces = recover_membrane_forces(mesh, design, m.material, state.u, tie_tol);
    return state;
}

MembraneState assemble_and_solve(const SurfaceMesh& mesh, const DesignField& design,
                                 const MembraneMaterial& material, const LoadCase& loads) {
    MembraneSolver solver(mesh, material, loads);
    return solver.solve(design);
}

}  // namespace fibermem
