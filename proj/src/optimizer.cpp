#include "fibermem/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fibermem/errors.hpp"

namespace fibermem {

namespace {

using Sensitivities = std::vector<std::array<double, 2>>;

double mean_sensitivity(const Sensitivities& A) {
    double sum = 0.0;
    for (const auto& a : A) sum += a[0] + a[1];
    return A.empty() ? 0.0 : sum / (2.0 * static_cast<double>(A.size()));
}

bool any_positive(const Sensitivities& A) {
    return std::any_of(A.begin(), A.end(), [](const auto& a) { return a[0] > 0.0 || a[1] > 0.0; });
}

std::vector<std::array<double, 2>> updated_thickness(const Sensitivities& A,
                                                     const DesignField& design, double eta,
                                                     double lambda) {
    std::vector<std::array<double, 2>> t(design.size());
    for (int i = 0; i < design.size(); ++i)
        for (int f = 0; f < 2; ++f)
            t[i][f] = oc_update(design.thickness(f, i), A[i][f] / lambda, eta,
                                design.lower[i][f], design.upper[i][f]);
    return t;
}

double volume_of(const std::vector<std::array<double, 2>>& t, const DesignField& design) {
    double v = 0.0;
    for (int i = 0; i < design.size(); ++i) v += (t[i][0] + t[i][1]) * design.area[i];
    return v;
}

Vec3 perpendicular(const PointForces& pf, const Vec3& s) { return pf.frame.n.cross(s).normalized(); }

}  // namespace

void OptimizationSettings::validate() const {
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("settings: eta must lie in (0, 1]");
    if (!(obj_tol > 0.0)) throw InvalidArgument("settings: obj_tol must be positive");
    if (!(dir_tol > 0.0 && dir_tol < 1.0)) throw InvalidArgument("settings: dir_tol must lie in (0, 1)");
    if (max_oc_iters < 1) throw InvalidArgument("settings: max_oc_iters must be positive");
    if (max_rotation_updates < 1)
        throw InvalidArgument("settings: max_rotation_updates must be positive");
    if (!(lambda_bracket[0] > 0.0 && lambda_bracket[1] > lambda_bracket[0]))
        throw InvalidArgument("settings: lambda bracket must be a positive interval");
    if (!(tie_tol >= 0.0)) throw InvalidArgument("settings: tie_tol must be non-negative");
    if (!(bound_tol >= 0.0)) throw InvalidArgument("settings: bound_tol must be non-negative");
}

double oc_update(double t, double B, double eta, double lower, double upper) {
    const double trial = t * std::pow(B, eta);
    if (trial <= lower) return lower;
    if (trial >= upper) return upper;
    return trial;
}

double volume_after_update(const Sensitivities& A, const DesignField& design, double eta,
                           double lambda) {
    return volume_of(updated_thickness(A, design, eta, lambda), design);
}

LambdaResult find_lambda(const Sensitivities& A, const DesignField& design, double eta,
                         std::array<double, 2> bracket) {
    if (static_cast<int>(A.size()) != design.size())
        throw InvalidArgument("find_lambda: one sensitivity pair per design point required");
    if (!any_positive(A))
        throw InvalidArgument("find_lambda: all sensitivities vanish, the constraint is vacuous");
    const double V = design.volume_budget;

    double floor_volume = 0.0;
    for (int i = 0; i < design.size(); ++i)
        floor_volume += (design.lower[i][0] + design.lower[i][1]) * design.area[i];
    if (floor_volume > V * (1.0 + 1e-12))
        throw OptimizationError("find_lambda: lower bounds alone exceed the volume budget");

    const double scale = mean_sensitivity(A);
    double lo = bracket[0] * scale;
    double hi = bracket[1] * scale;

    LambdaResult res;
    const double v_lo = volume_after_update(A, design, eta, lo);
    if (v_lo <= V) {
        res.lambda = lo;
        res.t_next = updated_thickness(A, design, eta, lo);
        res.volume = v_lo;
        res.active = false;
        return res;
    }
    int expansions = 0;
    while (volume_after_update(A, design, eta, hi) > V) {
        if (++expansions > 5)
            throw OptimizationError("find_lambda: bracket does not straddle the volume budget");
        hi *= 10.0;
    }
    // volume(lambda) is non-increasing: keep volume(lo) > V >= volume(hi).
    int it = 0;
    for (; it < 400; ++it) {
        const double v_hi = volume_after_update(A, design, eta, hi);
        if (V - v_hi <= 1e-12 * V || hi / lo - 1.0 < 1e-15) break;
        const double mid = std::sqrt(lo * hi);
        if (volume_after_update(A, design, eta, mid) > V)
            lo = mid;
        else
            hi = mid;
    }
    res.lambda = hi;
    res.t_next = updated_thickness(A, design, eta, hi);
    res.volume = volume_of(res.t_next, design);
    res.iterations = it;
    return res;
}

KktReport kkt_certificate(const DesignField& design, const Sensitivities& A, double lambda,
                          double bound_tol) {
    KktReport r;
    r.lambda = lambda;
    if (!(lambda > 0.0)) return r;
    for (int i = 0; i < design.size(); ++i) {
        for (int f = 0; f < 2; ++f) {
            const double t = design.thickness(f, i);
            const double lo = design.lower[i][f], up = design.upper[i][f];
            const double ratio = A[i][f] / lambda;
            if (up <= lo) continue;  // fixed variable
            if (t >= up) {
                ++r.at_upper;
                r.max_bound_gap = std::max(r.max_bound_gap, t - up);
                r.max_bound_multiplier_violation =
                    std::max(r.max_bound_multiplier_violation, 1.0 - ratio);
            } else if (t - lo <= bound_tol * up) {
                ++r.at_lower;
                r.max_bound_gap = std::max(r.max_bound_gap, t - lo);
                r.max_bound_multiplier_violation =
                    std::max(r.max_bound_multiplier_violation, ratio - 1.0);
            } else {
                ++r.interior;
                r.max_interior_residual = std::max(r.max_interior_residual, std::abs(ratio - 1.0));
            }
        }
    }
    const double scale = mean_sensitivity(A);
    const double weight = scale > 0.0 ? std::min(1.0, lambda / scale) : 0.0;
    r.volume_complementarity = weight * std::abs(design.volume_budget - design.fiber_volume());
    return r;
}

double rotate_fibers(const std::vector<PointForces>& forces, DesignField& design) {
    if (static_cast<int>(forces.size()) != design.size())
        throw InvalidArgument("rotate_fibers: one force state per design point required");
    double max_change = 0.0;
    for (int i = 0; i < design.size(); ++i) {
        auto& p = design.points[i];
        const auto& pf = forces[i];
        const Vec3 main_old = p.t1 >= p.t2 ? p.s : perpendicular(pf, p.s);
        if (p.t1 < p.t2) std::swap(p.t1, p.t2);
        Vec3 s_new = pf.degenerate ? main_old : pf.dir_I;
        if (s_new.dot(main_old) < 0.0) s_new = -s_new;
        p.s = s_new.normalized();
        const double cosine = std::min(1.0, std::abs(main_old.normalized().dot(p.s)));
        max_change = std::max(max_change, 1.0 - cosine);
    }
    return max_change;
}

DesignField initial_design(const SurfaceMesh& mesh, std::array<double, 2> lower,
                           std::array<double, 2> upper, double volume_budget) {
    DesignField d = make_design_field(mesh, lower[0], lower[1], lower, upper, volume_budget);
    const double t = volume_budget / (2.0 * d.total_area());
    for (auto& p : d.points) {
        p.t1 = std::clamp(t, lower[0], upper[0]);
        p.t2 = std::clamp(t, lower[1], upper[1]);
    }
    align_with_axes(mesh, d);
    return d;
}

void align_with_axes(const SurfaceMesh& mesh, DesignField& design) {
    for (auto& p : design.points) {
        const TangentFrame f = tangent_frame_at(mesh, p.element, Vec2::Zero());
        Vec3 s = f.tangent_projector() * Vec3::UnitX();
        if (s.norm() < 1e-3) s = f.tangent_projector() * Vec3::UnitY();
        p.s = s.normalized();
    }
}

void align_with_unreinforced_principal(MembraneSolver& solver, DesignField& design,
                                       double tie_tol) {
    DesignField bare = design;
    for (auto& p : bare.points) p.t1 = p.t2 = 0.0;
    const MembraneState state = solver.solve(bare, tie_tol);
    for (int i = 0; i < design.size(); ++i) {
        const auto& pf = state.point_forces[i];
        if (pf.degenerate) continue;
        auto& p = design.points[i];
        p.s = pf.dir_I.dot(p.s) < 0.0 ? Vec3(-pf.dir_I) : pf.dir_I;
    }
}

std::vector<std::array<double, 2>> design_sensitivities(const SurfaceMesh& mesh,
                                                        const DesignField& design,
                                                        const MembraneMaterial& material,
                                                        const Eigen::VectorXd& u,
                                                        SensitivityRule rule) {
    std::vector<std::array<double, 2>> A(design.size());
    for (int i = 0; i < design.size(); ++i)
        A[i] = element_sensitivity(mesh, design.points[i], material, u, rule);
    return A;
}

OptimizationResult optimize(const SurfaceMesh& mesh, const MembraneMaterial& material,
                            const LoadCase& loads, const DesignField& design0,
                            const OptimizationSettings& settings) {
    settings.validate();
    material.validate();
    design0.validate();
    if (design0.size() != mesh.num_elements())
        throw InvalidArgument("optimize: design must have one point per element");

    MembraneSolver solver(mesh, material, loads);
    OptimizationResult res;
    res.design = design0;
    auto& design = res.design;

    bool design_independent = false;
    bool budget_exhausted = false;

    // Sizing at fixed directions until the relative compliance change drops below obj_tol.
    auto inner_loop = [&]() {
        int count = 0;
        double previous = std::numeric_limits<double>::quiet_NaN();
        for (;;) {
            res.state = solver.solve(design, settings.tie_tol);
            const double C = res.state.compliance;
            res.history.oc_compliance.push_back(C);
            res.sensitivities =
                design_sensitivities(mesh, design, material, res.state.u, settings.sensitivity);
            if (!any_positive(res.sensitivities)) {
                design_independent = true;
                res.kkt = KktReport{};
                return count;
            }
            if (!std::isnan(previous) && settings.strict_monotonicity &&
                C > previous * (1.0 + 1e-9) + 1e-300) {
                std::ostringstream msg;
                msg.precision(17);
                msg << "compliance increased inside a sizing loop: " << previous << " -> " << C
                    << " after " << res.oc_updates << " OC updates";
                throw OptimizationError(msg.str());
            }
            const LambdaResult lam =
                find_lambda(res.sensitivities, design, settings.eta, settings.lambda_bracket);
            res.kkt = kkt_certificate(design, res.sensitivities, lam.lambda, settings.bound_tol);
            const bool settled = !std::isnan(previous) &&
                                 std::abs(C - previous) < settings.obj_tol * std::abs(C);
            if (settled) return count;
            if (res.oc_updates >= settings.max_oc_iters) {
                budget_exhausted = true;
                return count;
            }
            for (int i = 0; i < design.size(); ++i) {
                design.points[i].t1 = lam.t_next[i][0];
                design.points[i].t2 = lam.t_next[i][1];
            }
            ++res.oc_updates;
            ++count;
            previous = C;
        }
    };

    double last_change = std::numeric_limits<double>::infinity();
    for (;;) {
        const int inner = inner_loop();
        res.history.outer.push_back({res.state.compliance, design.fiber_volume(),
                                     res.rotation_updates > 0 ? last_change : 0.0, inner});
        if (design_independent) {
            res.converged = true;
            res.message = "compliance does not depend on the design";
            break;
        }
        if (budget_exhausted) {
            res.message = "OC update budget exhausted";
            break;
        }
        if (settings.fixed_directions) {
            res.converged = true;
            res.message = "converged (fixed directions)";
            break;
        }
        if (res.rotation_updates > 0 && 1.0 - last_change >= settings.dir_tol) {
            res.converged = true;
            res.message = "converged";
            break;
        }
        if (res.rotation_updates >= settings.max_rotation_updates) {
            res.message = "rotation update budget exhausted";
            break;
        }
        last_change = rotate_fibers(res.state.point_forces, design);
        ++res.rotation_updates;
    }
    return res;
}

}  // namespace fibermem
