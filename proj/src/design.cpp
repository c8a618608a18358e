#include "fibermem/design.hpp"

#include <cmath>
#include <string>

#include "fibermem/errors.hpp"

namespace fibermem {

double DesignField::fiber_volume() const {
    double v = 0.0;
    for (int i = 0; i < size(); ++i) v += (points[i].t1 + points[i].t2) * area[i];
    return v;
}

double DesignField::total_area() const {
    double a = 0.0;
    for (double w : area) a += w;
    return a;
}

void DesignField::validate() const {
    const auto n = points.size();
    if (area.size() != n || lower.size() != n || upper.size() != n)
        throw InvalidArgument("design field arrays disagree in size");
    for (int i = 0; i < size(); ++i) {
        for (int f = 0; f < 2; ++f) {
            const double t = thickness(f, i);
            if (lower[i][f] < 0.0 || lower[i][f] > upper[i][f])
                throw InvalidArgument("design point " + std::to_string(i) + ": invalid bounds");
            if (t < lower[i][f] || t > upper[i][f])
                throw InvalidArgument("design point " + std::to_string(i) + ": t" +
                                      std::to_string(f + 1) + " = " + std::to_string(t) +
                                      " outside its bounds");
        }
        if (std::abs(points[i].s.norm() - 1.0) > 1e-10)
            throw InvalidArgument("design point " + std::to_string(i) + ": s is not a unit vector");
    }
    if (fiber_volume() > volume_budget * (1.0 + 1e-12))
        throw InvalidArgument("design exceeds the fiber volume budget");
}

DesignField make_design_field(const SurfaceMesh& mesh, double t1, double t2,
                              std::array<double, 2> lower, std::array<double, 2> upper,
                              double volume_budget) {
    DesignField d;
    const int ne = mesh.num_elements();
    d.points.resize(ne);
    d.area.resize(ne);
    d.lower.assign(ne, lower);
    d.upper.assign(ne, upper);
    d.volume_budget = volume_budget;
    for (int e = 0; e < ne; ++e) {
        const auto frame = tangent_frame_at(mesh, e, Vec2::Zero());
        d.points[e] = {t1, t2, frame.e1, e};
        d.area[e] = element_area(mesh, e);
    }
    return d;
}

}  // namespace fibermem
