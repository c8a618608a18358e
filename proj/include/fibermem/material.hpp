#pragma once

#include <Eigen/Dense>

#include "fibermem/geometry.hpp"

namespace fibermem {

/// In-plane strain or membrane force in a tangent frame, Voigt order (11, 22, 12).
/// Strains carry engineering shear (gamma_12 = 2 eps_12); forces carry M_12.
using Voigt3 = Eigen::Vector3d;

/// Thickness-integrated elasticity operator S^memb = t E^memb in Voigt form:
/// M = S eps, energy density = 1/2 eps^T S eps.
using MembraneTangent = Eigen::Matrix3d;

/// Transversely isotropic base law about the surface normal.
struct BaseMaterial3D {
    double delta1;
    double delta2;
    double delta3;
    double gamma;  // out-of-plane shear coupling
    double mu;
};

struct PlaneStressModuli {
    double delta;  // plane-stress Lame coefficient
    double mu;     // in-plane shear modulus
};

/// Membrane material: isotropic base sheet of thickness t_b reinforced by two
/// orthogonal fiber families of equal stiffness alpha.
struct MembraneMaterial {
    double E = 1.0;
    double nu = 0.0;
    double t_b = 1.0;
    double alpha = 0.0;

    /// Throws InvalidArgument naming the first violated bound.
    void validate() const;
    PlaneStressModuli moduli() const;

    bool operator==(const MembraneMaterial&) const = default;
};

struct OrthotropicConstants {
    double A, B, C, D;
    double beta;  // A + C - 2B - 4D
};

/// Plane-stress reduction of the 3D law: delta = delta3 - delta2^2 / delta1.
/// Throws MembraneIncompatibility when gamma != 0, InvalidArgument when delta1 <= 0.
PlaneStressModuli reduce_transverse_isotropic(const BaseMaterial3D& base);

/// delta = nu E / (1 - nu^2), mu = E / (2 (1 + nu)).
PlaneStressModuli plane_stress_moduli(double E, double nu);

/// Voigt projection of a unit tangent direction with local components (c, s):
/// S : eps = a . eps_voigt with a = (c^2, s^2, c s).
Voigt3 fiber_projection(const Vec2& dir_local);

/// S^memb in the Voigt basis of `frame`; `s` is the first fiber direction (3D,
/// tangent to the frame). The second family runs along n x s.
MembraneTangent membrane_tangent(const MembraneMaterial& mat, double t1, double t2,
                                 const Vec3& s, const TangentFrame& frame);

/// Same operator with the fiber direction given by its local frame components.
MembraneTangent membrane_tangent_local(const MembraneMaterial& mat, double t1, double t2,
                                       const Vec2& s_local);

/// Per-thickness orthotropic constants in the fiber basis {s, s_perp}.
OrthotropicConstants orthotropic_constants(const MembraneMaterial& mat, double t1, double t2);

/// 1/2 (S eps) : eps.
double strain_energy_density(const MembraneTangent& S, const Voigt3& eps);

/// Voigt vector (with engineering shear) of a symmetric 2x2 strain tensor and back.
Voigt3 strain_to_voigt(const Eigen::Matrix2d& eps);
Eigen::Matrix2d voigt_to_strain(const Voigt3& eps);
Eigen::Matrix2d voigt_to_force(const Voigt3& m);

}  // namespace fibermem
