#pragma once

#include <array>
#include <string>
#include <vector>

#include "fibermem/design.hpp"
#include "fibermem/fem.hpp"

namespace fibermem {

struct OptimizationSettings {
    double eta = 0.5;                 // OC damping exponent, (0, 1]
    double obj_tol = 1e-5;            // relative compliance change ending an inner loop
    double dir_tol = 0.999;           // |cos| between successive main fiber directions
    int max_oc_iters = 500;           // total thickness updates over the run
    int max_rotation_updates = 50;
    std::array<double, 2> lambda_bracket{1e-12, 1e12};  // times the mean sensitivity
    double tie_tol = 1e-6;            // relative principal-value tie
    double bound_tol = 0.0;           // t - lower <= bound_tol * upper counts as on the lower bound (0: exact)
    SensitivityRule sensitivity = SensitivityRule::ElementAverage;
    bool strict_monotonicity = true;  // abort when compliance rises inside an inner loop
    bool fixed_directions = false;    // sizing only: stop after the first inner loop

    void validate() const;
    bool operator==(const OptimizationSettings&) const = default;
};

enum class InitDirection {
    AxisAligned,              // global x projected on the tangent plane (y where x is normal)
    PrincipalFromUnreinforced // principal direction of a fiber-free solve
};

struct HistoryEntry {
    double compliance = 0.0;
    double fiber_volume = 0.0;
    double max_direction_change = 0.0;  // from the rotation preceding this inner loop
    int inner_iterations = 0;
};

struct RunHistory {
    std::vector<HistoryEntry> outer;
    std::vector<double> oc_compliance;  // compliance at every state solve inside inner loops
};

struct LambdaResult {
    double lambda = 0.0;
    std::vector<std::array<double, 2>> t_next;
    double volume = 0.0;
    bool active = true;   // false: constraint slack, lambda is the bracket floor
    int iterations = 0;
};

/// Optimality-conditions residuals of a sizing design for given sensitivities.
struct KktReport {
    double lambda = 0.0;
    double max_interior_residual = 0.0;  // max |A / Lambda - 1| over interior (point, family)
    double volume_complementarity = 0.0; // Lambda (V - vol) normalised by the mean sensitivity
    double max_bound_multiplier_violation = 0.0;  // negative implied lambda^+ or lambda^-
    double max_bound_gap = 0.0;          // distance of bound-active variables from their bound
    int interior = 0;
    int at_lower = 0;
    int at_upper = 0;
};

struct OptimizationResult {
    DesignField design;
    MembraneState state;
    RunHistory history;
    std::vector<std::array<double, 2>> sensitivities;  // A at the returned design
    KktReport kkt;
    bool converged = false;
    int oc_updates = 0;
    int rotation_updates = 0;
    std::string message;
};

/// clamp(t * B^eta, lower, upper).
double oc_update(double t, double B, double eta, double lower, double upper);

/// Bisection (in log Lambda) for the multiplier that meets the fiber volume budget.
/// Throws OptimizationError when even the largest Lambda leaves the volume above V.
LambdaResult find_lambda(const std::vector<std::array<double, 2>>& A, const DesignField& design,
                         double eta, std::array<double, 2> bracket = {1e-12, 1e12});

/// Fiber volume after an OC step with multiplier `lambda`.
double volume_after_update(const std::vector<std::array<double, 2>>& A, const DesignField& design,
                           double eta, double lambda);

KktReport kkt_certificate(const DesignField& design, const std::vector<std::array<double, 2>>& A,
                          double lambda, double bound_tol = 0.0);

/// Aligns the main fiber family with the largest-magnitude principal membrane force.
/// Returns the max over points of 1 - |cos| between old and new main directions.
double rotate_fibers(const std::vector<PointForces>& forces, DesignField& design);

/// Uniform t1 = t2 meeting the volume budget with equality (clamped to the bounds).
DesignField initial_design(const SurfaceMesh& mesh, std::array<double, 2> lower,
                           std::array<double, 2> upper, double volume_budget);

/// Sets every s to the projected global x axis (y where x is normal to the element).
void align_with_axes(const SurfaceMesh& mesh, DesignField& design);

/// Sets s to principal directions of a fiber-free solve; degenerate points keep s.
void align_with_unreinforced_principal(MembraneSolver& solver, DesignField& design,
                                       double tie_tol);

/// Sensitivities of every design point for the displacement field u.
std::vector<std::array<double, 2>> design_sensitivities(const SurfaceMesh& mesh,
                                                        const DesignField& design,
                                                        const MembraneMaterial& material,
                                                        const Eigen::VectorXd& u,
                                                        SensitivityRule rule);

/// Alternating sizing (OC with Lambda bisection) and fiber rotation.
OptimizationResult optimize(const SurfaceMesh& mesh, const MembraneMaterial& material,
                            const LoadCase& loads, const DesignField& design0,
                            const OptimizationSettings& settings);

}  // namespace fibermem
