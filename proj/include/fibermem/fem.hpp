#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fibermem/design.hpp"
#include "fibermem/geometry.hpp"
#include "fibermem/material.hpp"

namespace fibermem {

using ElementMatrix = Eigen::Matrix<double, 12, 12>;
using StrainOperator = Eigen::Matrix<double, 3, 12>;

/// Prescribed displacement components of a node set; unset components are free.
using DirichletSpec = std::array<std::optional<double>, 3>;

struct LoadCase {
    double pressure = 0.0;                         // along the element normal
    std::map<std::string, Vec3> edge_tractions;    // force per length, tangent
    std::map<std::string, DirichletSpec> dirichlet;
};

/// Membrane force at one evaluation point with its principal decomposition,
/// ordered so that |M_I| >= |M_II|.
struct PointForces {
    Eigen::Matrix2d M = Eigen::Matrix2d::Zero();  // in (frame.e1, frame.e2)
    double M_I = 0.0;
    double M_II = 0.0;
    Vec3 dir_I = Vec3::UnitX();   // unit tangent, largest component positive
    Vec3 dir_II = Vec3::UnitY();
    bool degenerate = false;      // ||M_I| - |M_II|| within tie tolerance
    TangentFrame frame;
    Voigt3 strain = Voigt3::Zero();
};

struct MembraneState {
    Eigen::VectorXd u;   // 3 components per node
    double compliance = 0.0;
    double residual = 0.0;  // |K u - F| / |F| over free dofs
    std::vector<PointForces> point_forces;
};

/// 3 x 12 map from nodal displacements to local Voigt strain at one surface point.
StrainOperator strain_operator(const SurfacePoint& sp);

/// K_e = sum_q J_q B_q^T S_q B_q over the 2x2 Gauss points.
ElementMatrix element_stiffness(const SurfaceMesh& mesh, int element, const DesignPoint& point,
                                const MembraneMaterial& material);

/// Consistent nodal load vector (3 per node) for pressure and edge tractions.
/// Throws InvalidLoad when a traction is not tangent to the surface at its edge.
Eigen::VectorXd load_vector(const SurfaceMesh& mesh, const LoadCase& loads);

/// Local Voigt strain of the displacement field `u` at a reference point of `element`.
Voigt3 element_strain(const SurfaceMesh& mesh, int element, const Eigen::VectorXd& u,
                      const Vec2& local_coords);

/// Principal decomposition of a symmetric 2x2 membrane force given in `frame`.
PointForces principal_forces(const Eigen::Matrix2d& M, const TangentFrame& frame,
                             double tie_tol = 1e-6);

/// Fiber projection of a strain: (alpha (s.eps s)^2, alpha (s_perp.eps s_perp)^2).
std::array<double, 2> pointwise_sensitivity(const Vec2& s_local, const Voigt3& eps, double alpha);
std::array<double, 2> pointwise_sensitivity(const DesignPoint& point, const TangentFrame& frame,
                                            const Voigt3& eps, double alpha);

enum class SensitivityRule {
    ElementAverage,  // area average over the 2x2 Gauss points (exact discrete gradient)
    Centroid,        // single evaluation at the Barlow point
};

/// Sensitivities A_1, A_2 of one design point; dC/dt_alpha = -1/2 area A_alpha for
/// the element-average rule.
std::array<double, 2> element_sensitivity(const SurfaceMesh& mesh, const DesignPoint& point,
                                          const MembraneMaterial& material,
                                          const Eigen::VectorXd& u, SensitivityRule rule);

/// Membrane forces at every design point (element centroids).
std::vector<PointForces> recover_membrane_forces(const SurfaceMesh& mesh, const DesignField& design,
                                                 const MembraneMaterial& material,
                                                 const Eigen::VectorXd& u, double tie_tol = 1e-6);

/// Reusable solver for one mesh and load case: the constraint pattern and the
/// sparse symbolic factorization are set up once, every solve refactorizes.
class MembraneSolver {
public:
    MembraneSolver(const SurfaceMesh& mesh, const MembraneMaterial& material, LoadCase loads);
    ~MembraneSolver();
    MembraneSolver(MembraneSolver&&) noexcept;
    MembraneSolver& operator=(MembraneSolver&&) noexcept;

    /// Solves the state problem; throws SingularSystem when constraints leave
    /// zero-energy modes.
    MembraneState solve(const DesignField& design, double tie_tol = 1e-6);

    /// Assembled stiffness over all 3N dofs (constraints not applied).
    Eigen::SparseMatrix<double> global_stiffness(const DesignField& design) const;
    const Eigen::VectorXd& load() const;
    /// Flags of constrained dofs (3 per node).
    const std::vector<char>& constrained() const;
    const SurfaceMesh& mesh() const;
    const MembraneMaterial& material() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot assembly and solve.
MembraneState assemble_and_solve(const SurfaceMesh& mesh, const DesignField& design,
                                 const MembraneMaterial& material, const LoadCase& loads);

}  // namespace fibermem
