#pragma once

#include <array>
#include <vector>

#include "fibermem/geometry.hpp"

namespace fibermem {

/// Design variables at one evaluation point (the centroid of `element`).
struct DesignPoint {
    double t1 = 0.0;  // thickness of the family along s
    double t2 = 0.0;  // thickness of the family along n x s
    Vec3 s = Vec3::UnitX();
    int element = 0;
};

/// Fiber thickness and orientation fields plus the feasible set they live in.
struct DesignField {
    std::vector<DesignPoint> points;
    std::vector<double> area;                 // area weight per point
    std::vector<std::array<double, 2>> lower;  // per point, per family
    std::vector<std::array<double, 2>> upper;
    double volume_budget = 0.0;

    int size() const { return static_cast<int>(points.size()); }
    double thickness(int family, int i) const { return family == 0 ? points[i].t1 : points[i].t2; }
    double& thickness(int family, int i) { return family == 0 ? points[i].t1 : points[i].t2; }

    /// Sum over points of (t1 + t2) * area.
    double fiber_volume() const;
    /// Sum of the area weights.
    double total_area() const;

    /// Throws InvalidArgument when sizes disagree, a bound is crossed or the
    /// volume exceeds the budget by more than 1e-12 relative.
    void validate() const;
};

/// One point per element at its centroid, uniform bounds, direction s everywhere
/// (projected per element onto the centroid tangent plane).
DesignField make_design_field(const SurfaceMesh& mesh, double t1, double t2,
                              std::array<double, 2> lower, std::array<double, 2> upper,
                              double volume_budget);

}  // namespace fibermem
