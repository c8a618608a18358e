#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "fibermem/design.hpp"
#include "fibermem/fem.hpp"

namespace fibermem::oracles {

/// Unit square element with one label per side and single-node sets at the corners.
inline SurfaceMesh single_square() {
    SurfaceMesh m;
    m.nodes = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
    m.elements = {{0, 1, 2, 3}};
    m.boundary_edges["bottom"] = {{0, 0}};
    m.boundary_edges["right"] = {{0, 1}};
    m.boundary_edges["top"] = {{0, 2}};
    m.boundary_edges["left"] = {{0, 3}};
    for (int n = 0; n < 4; ++n) m.node_sets["corner" + std::to_string(n)] = {n};
    return m;
}

/// Edge tractions producing the homogeneous uniaxial force q d (x) d, d at `angle`,
/// with supports that only remove rigid motions.
inline LoadCase uniaxial_load(double q, double angle) {
    const Eigen::Vector2d d(std::cos(angle), std::sin(angle));
    const Eigen::Matrix2d M = q * d * d.transpose();
    auto traction = [&](double nx, double ny) {
        const Eigen::Vector2d t = M * Eigen::Vector2d(nx, ny);
        return Vec3(t.x(), t.y(), 0.0);
    };
    LoadCase lc;
    lc.edge_tractions["right"] = traction(1, 0);
    lc.edge_tractions["left"] = traction(-1, 0);
    lc.edge_tractions["top"] = traction(0, 1);
    lc.edge_tractions["bottom"] = traction(0, -1);
    lc.dirichlet["corner0"] = {0.0, 0.0, std::nullopt};
    lc.dirichlet["corner1"] = {std::nullopt, 0.0, std::nullopt};
    return lc;
}

/// Sweeps the fiber direction of a single-element design in 1 degree steps over
/// [0, 180) and returns the angle (degrees) of least compliance.
inline int best_sweep_angle(const SurfaceMesh& mesh, const MembraneMaterial& mat,
                            const LoadCase& loads, double t1, double t2) {
    MembraneSolver solver(mesh, mat, loads);
    DesignField d = make_design_field(mesh, t1, t2, {0.0, 0.0}, {1.0, 1.0}, 1e9);
    int best = -1;
    double best_c = std::numeric_limits<double>::infinity();
    for (int deg = 0; deg < 180; ++deg) {
        const double a = deg * M_PI / 180.0;
        d.points[0].s = Vec3(std::cos(a), std::sin(a), 0.0);
        const double c = solver.solve(d).compliance;
        if (c < best_c) {
            best_c = c;
            best = deg;
        }
    }
    return best;
}

/// Angular distance between two axial directions given in degrees, in [0, 90].
inline double axial_distance_deg(double a, double b) {
    double d = std::fmod(std::abs(a - b), 180.0);
    return std::min(d, 180.0 - d);
}

/// Exhaustive search over a 4-variable thickness grid for a two-element design with
/// fixed fiber directions. Compliance is evaluated from the stiffness, which is affine
/// in the thicknesses, restricted to the free degrees of freedom.
class TwoElementGridOracle {
public:
    // Stack storage: the two-element strip has 8 free degrees of freedom.
    using Small = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 12, 12>;
    using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 12, 1>;

    TwoElementGridOracle(const SurfaceMesh& mesh, const MembraneMaterial& mat,
                         const LoadCase& loads, const DesignField& directions) {
        MembraneSolver solver(mesh, mat, loads);
        const auto& fixed = solver.constrained();
        std::vector<int> free;
        for (int dof = 0; dof < static_cast<int>(fixed.size()); ++dof)
            if (!fixed[dof]) free.push_back(dof);
        n_ = static_cast<int>(free.size());
        if (n_ > 12) throw std::invalid_argument("grid oracle supports at most 12 free dofs");
        auto reduce = [&](const DesignField& d) {
            const Eigen::MatrixXd K(solver.global_stiffness(d));
            Small R(n_, n_);
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) R(i, j) = K(free[i], free[j]);
            return R;
        };
        DesignField d = directions;
        for (auto& p : d.points) p.t1 = p.t2 = 0.0;
        K0_ = reduce(d);
        for (int v = 0; v < 4; ++v) {
            DesignField dv = d;
            dv.thickness(v % 2, v / 2) = 1.0;
            Kv_[v] = reduce(dv) - K0_;
        }
        F_.resize(n_);
        for (int i = 0; i < n_; ++i) F_(i) = solver.load()(free[i]);
        area_ = {directions.area[0], directions.area[1]};
    }

    /// t ordered (t1 of point 0, t2 of point 0, t1 of point 1, t2 of point 1).
    double compliance(const std::array<double, 4>& t) const {
        Small K = K0_;
        for (int v = 0; v < 4; ++v) K += t[v] * Kv_[v];
        return 0.5 * F_.dot(K.llt().solve(F_));
    }

    double volume(const std::array<double, 4>& t) const {
        return (t[0] + t[1]) * area_[0] + (t[2] + t[3]) * area_[1];
    }

    struct Best {
        std::array<double, 4> t{};
        double compliance = std::numeric_limits<double>::infinity();
    };

    /// Best feasible point of the grid center + k * step, |k| <= half_width, clipped to
    /// [0, upper]. A full search uses center = 0 and half_width = upper / step.
    Best search(const std::array<double, 4>& center, double step, int half_width, double upper,
                double V) const {
        Best best;
        std::array<double, 4> t{};
        auto value = [&](int v, int k) { return center[v] + k * step; };
        for (int a = -half_width; a <= half_width; ++a) {
            t[0] = value(0, a);
            if (t[0] < -1e-15 || t[0] > upper + 1e-15) continue;
            for (int b = -half_width; b <= half_width; ++b) {
                t[1] = value(1, b);
                if (t[1] < -1e-15 || t[1] > upper + 1e-15) continue;
                for (int c = -half_width; c <= half_width; ++c) {
                    t[2] = value(2, c);
                    if (t[2] < -1e-15 || t[2] > upper + 1e-15) continue;
                    for (int e = -half_width; e <= half_width; ++e) {
                        t[3] = value(3, e);
                        if (t[3] < -1e-15 || t[3] > upper + 1e-15) continue;
                        if (volume(t) > V * (1.0 + 1e-12)) continue;
                        const double C = compliance(t);
                        if (C < best.compliance) best = {t, C};
                    }
                }
            }
        }
        return best;
    }

private:
    int n_ = 0;
    Small K0_;
    std::array<Small, 4> Kv_;
    SmallVec F_;
    std::array<double, 2> area_{};
};

}  // namespace fibermem::oracles
