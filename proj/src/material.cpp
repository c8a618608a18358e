#include "fibermem/material.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fibermem/errors.hpp"

namespace fibermem {

void MembraneMaterial::validate() const {
    if (!(E > 0.0)) throw InvalidArgument("material: E must be positive, got " + std::to_string(E));
    if (!(nu >= 0.0 && nu < 1.0))
        throw InvalidArgument("material: nu must lie in [0, 1), got " + std::to_string(nu));
    if (!(t_b > 0.0))
        throw InvalidArgument("material: t_b must be positive, got " + std::to_string(t_b));
    if (!(alpha >= 0.0))
        throw InvalidArgument("material: alpha must be non-negative, got " + std::to_string(alpha));
}

PlaneStressModuli MembraneMaterial::moduli() const { return plane_stress_moduli(E, nu); }

PlaneStressModuli reduce_transverse_isotropic(const BaseMaterial3D& base) {
    if (!(base.delta1 > 0.0)) throw InvalidArgument("delta1 must be positive");
    if (!(base.mu > 0.0)) throw InvalidArgument("mu must be positive");
    const double scale = std::max({std::abs(base.delta1), std::abs(base.delta2),
                                   std::abs(base.delta3), std::abs(base.mu)});
    if (std::abs(base.gamma) > 1e-12 * scale)
        throw MembraneIncompatibility(
            "out-of-plane shear stress cannot vanish: gamma = " + std::to_string(base.gamma));
    return {base.delta3 - base.delta2 * base.delta2 / base.delta1, base.mu};
}

PlaneStressModuli plane_stress_moduli(double E, double nu) {
    if (!(E > 0.0)) throw InvalidArgument("E must be positive");
    if (!(nu >= 0.0 && nu < 1.0)) throw InvalidArgument("nu must lie in [0, 1)");
    return {nu * E / (1.0 - nu * nu), E / (2.0 * (1.0 + nu))};
}

Voigt3 fiber_projection(const Vec2& d) {
    return {d.x() * d.x(), d.y() * d.y(), d.x() * d.y()};
}

MembraneTangent membrane_tangent_local(const MembraneMaterial& mat, double t1, double t2,
                                       const Vec2& s_local) {
    const auto [delta, mu] = mat.moduli();
    MembraneTangent S;
    S << delta + 2.0 * mu, delta, 0.0,
         delta, delta + 2.0 * mu, 0.0,
         0.0, 0.0, mu;
    S *= mat.t_b;
    const Vec2 s = s_local.normalized();
    const Voigt3 a1 = fiber_projection(s);
    const Voigt3 a2 = fiber_projection(Vec2(-s.y(), s.x()));
    S += mat.alpha * t1 * a1 * a1.transpose();
    S += mat.alpha * t2 * a2 * a2.transpose();
    return S;
}

MembraneTangent membrane_tangent(const MembraneMaterial& mat, double t1, double t2,
                                 const Vec3& s, const TangentFrame& frame) {
    const Vec2 local = frame.local(s);
    if (!(local.norm() > 1e-12))
        throw InvalidArgument("fiber direction has no component in the tangent plane");
    return membrane_tangent_local(mat, t1, t2, local);
}

OrthotropicConstants orthotropic_constants(const MembraneMaterial& mat, double t1, double t2) {
    const double t = mat.t_b + t1 + t2;
    if (!(t > 0.0)) throw InvalidArgument("total thickness must be positive");
    const auto [delta, mu] = mat.moduli();
    OrthotropicConstants k{};
    k.A = mat.t_b / t * (delta + 2.0 * mu) + t1 / t * mat.alpha;
    k.B = mat.t_b / t * delta;
    k.C = mat.t_b / t * (delta + 2.0 * mu) + t2 / t * mat.alpha;
    k.D = mat.t_b / t * mu;
    k.beta = k.A + k.C - 2.0 * k.B - 4.0 * k.D;
    return k;
}

double strain_energy_density(const MembraneTangent& S, const Voigt3& eps) {
    return 0.5 * eps.dot(S * eps);
}

Voigt3 strain_to_voigt(const Eigen::Matrix2d& eps) {
    return {eps(0, 0), eps(1, 1), eps(0, 1) + eps(1, 0)};
}

Eigen::Matrix2d voigt_to_strain(const Voigt3& eps) {
    Eigen::Matrix2d m;
    m << eps(0), 0.5 * eps(2), 0.5 * eps(2), eps(1);
    return m;
}

Eigen::Matrix2d voigt_to_force(const Voigt3& m) {
    Eigen::Matrix2d M;
    M << m(0), m(2), m(2), m(1);
    return M;
}

}  // namespace fibermem
