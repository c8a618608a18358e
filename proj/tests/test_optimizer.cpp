#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fibermem/errors.hpp"
#include "fibermem/optimizer.hpp"
#include "support.hpp"

using namespace fibermem;
using fibermem::oracles::axial_distance_deg;

namespace {

using Sens = std::vector<std::array<double, 2>>;

DesignField two_points(double V) {
    DesignField d;
    d.points.resize(2);
    d.points[1].element = 1;
    for (auto& p : d.points) p.t1 = p.t2 = 0.001;
    d.area = {0.5, 0.5};
    d.lower = {{0.0, 0.0}, {0.0, 0.0}};
    d.upper = {{0.004, 0.004}, {0.004, 0.004}};
    d.volume_budget = V;
    return d;
}

LoadCase strip_load(const Vec3& q) {
    LoadCase lc;
    lc.edge_tractions["loaded"] = q;
    lc.dirichlet["clamped"] = {0.0, 0.0, 0.0};
    return lc;
}

}  // namespace

TEST(OcUpdate, Examples) {
    EXPECT_EQ(oc_update(0.0013, 1.0, 0.5, 0.0, 0.004), 0.0013);
    EXPECT_EQ(oc_update(0.002, 4.0, 0.5, 0.0, 0.004), 0.004);
    EXPECT_EQ(oc_update(0.002, 0.0, 0.5, 0.0, 0.004), 0.0);
    EXPECT_EQ(oc_update(0.002, 0.25, 1.0, 0.001, 0.004), 0.001);
    EXPECT_DOUBLE_EQ(oc_update(0.002, 1.21, 0.5, 0.0, 0.004), 0.0022);
}

TEST(FindLambda, SymmetricPointsShareTheBudget) {
    auto d = two_points(0.003);
    const auto r = find_lambda(Sens{{1.0, 1.0}, {1.0, 1.0}}, d, 0.5);
    EXPECT_TRUE(r.active);
    EXPECT_DOUBLE_EQ(r.t_next[0][0], r.t_next[1][0]);
    EXPECT_DOUBLE_EQ(r.t_next[0][0], r.t_next[0][1]);
    EXPECT_NEAR(r.volume, 0.003, 1e-12 * 0.003);
    EXPECT_LE(r.volume, 0.003);
}

TEST(FindLambda, LargeLambdaSendsThicknessToLowerBounds) {
    const auto d = two_points(0.003);
    const Sens A{{1.0, 2.0}, {3.0, 0.5}};
    for (int i = 0; i < 2; ++i)
        for (int f = 0; f < 2; ++f) {
            const double t = oc_update(d.thickness(f, i), A[i][f] / 1e300, 0.5, 0.0, 0.004);
            EXPECT_LT(t, 1e-140);
            // Vanishing sensitivity lands exactly on the bound.
            EXPECT_EQ(oc_update(d.thickness(f, i), 0.0, 0.5, 0.0, 0.004), 0.0);
        }
    EXPECT_LT(volume_after_update(A, d, 0.5, 1e300), 1e-140);
}

TEST(FindLambda, SlackConstraintReturnsBracketFloor) {
    const auto d = two_points(1.0);
    const auto r = find_lambda(Sens{{1.0, 1.0}, {1.0, 1.0}}, d, 0.5);
    EXPECT_FALSE(r.active);
    EXPECT_LT(r.volume, 1.0);
    EXPECT_DOUBLE_EQ(r.lambda, 1e-12);
    EXPECT_EQ(r.t_next[0][0], 0.004);
}

TEST(FindLambda, Errors) {
    auto d = two_points(0.003);
    EXPECT_THROW(find_lambda(Sens{{0.0, 0.0}, {0.0, 0.0}}, d, 0.5), InvalidArgument);
    EXPECT_THROW(find_lambda(Sens{{1.0, 0.0}}, d, 0.5), InvalidArgument);
    d.lower = {{0.002, 0.002}, {0.002, 0.002}};
    d.volume_budget = 0.001;
    EXPECT_THROW(find_lambda(Sens{{1.0, 1.0}, {1.0, 1.0}}, d, 0.5), OptimizationError);
}

TEST(FindLambda, MatchesDenseScanOfVolumeCurve) {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int instance = 0; instance < 3; ++instance) {
        DesignField d;
        Sens A;
        for (int i = 0; i < 10; ++i) {
            DesignPoint p;
            p.element = i;
            p.t1 = 0.004 * u(rng);
            p.t2 = 0.004 * u(rng);
            d.points.push_back(p);
            d.area.push_back(0.05 + 0.1 * u(rng));
            d.lower.push_back({0.0, 0.0005 * u(rng)});
            d.upper.push_back({0.004, 0.004});
            A.push_back({std::pow(10.0, 4 * u(rng) - 2), std::pow(10.0, 4 * u(rng) - 2)});
        }
        double vmax = 0.0, vmin = 0.0;
        for (int i = 0; i < 10; ++i) {
            vmax += (d.upper[i][0] + d.upper[i][1]) * d.area[i];
            vmin += (d.lower[i][0] + d.lower[i][1]) * d.area[i];
        }
        d.volume_budget = vmin + (0.3 + 0.4 * u(rng)) * (vmax - vmin);
        const double eta = 0.5 + 0.5 * u(rng);
        const auto r = find_lambda(A, d, eta);
        ASSERT_TRUE(r.active);
        EXPECT_LE(std::abs(r.volume - d.volume_budget), 1e-6 * d.volume_budget);
        EXPECT_LE(r.volume, d.volume_budget * (1.0 + 1e-12));

        // 10^6-sample log-spaced scan over the bracket the solver used.
        double mean = 0.0;
        for (const auto& a : A) mean += a[0] + a[1];
        mean /= 20.0;
        const double lo = std::log(1e-12 * mean), hi = std::log(1e12 * mean);
        const int n = 1'000'000;
        const double step = (hi - lo) / (n - 1);
        int first_feasible = -1;
        for (int k = 0; k < n; ++k)
            if (volume_after_update(A, d, eta, std::exp(lo + k * step)) <= d.volume_budget) {
                first_feasible = k;
                break;
            }
        ASSERT_GT(first_feasible, 0);
        const double grid_hi = lo + first_feasible * step;
        const double grid_lo = grid_hi - step;
        EXPECT_GE(std::log(r.lambda), grid_lo - 1e-12);
        EXPECT_LE(std::log(r.lambda), grid_hi + 1e-12);
    }
}

TEST(KktCertificate, ClassifiesBoundsAndInterior) {
    auto d = two_points(0.0035);
    d.points[0] = {0.004, 0.0, Vec3::UnitX(), 0};
    d.points[1] = {0.003, 0.0, Vec3::UnitX(), 1};
    const double lambda = 2.0;
    const auto r = kkt_certificate(d, Sens{{3.0, 1.0}, {2.0, 0.5}}, lambda);
    EXPECT_EQ(r.at_upper, 1);
    EXPECT_EQ(r.at_lower, 2);
    EXPECT_EQ(r.interior, 1);
    EXPECT_EQ(r.max_interior_residual, 0.0);
    EXPECT_EQ(r.max_bound_multiplier_violation, 0.0);
    EXPECT_EQ(r.max_bound_gap, 0.0);
    EXPECT_NEAR(r.volume_complementarity, 0.0, 1e-18);

    // Wrong-signed multiplier at a bound and a non-stationary interior value.
    const auto bad = kkt_certificate(d, Sens{{1.0, 3.0}, {2.2, 0.5}}, lambda);
    EXPECT_NEAR(bad.max_bound_multiplier_violation, 0.5, 1e-15);
    EXPECT_NEAR(bad.max_interior_residual, 0.1, 1e-15);
}

TEST(RotateFibers, Examples) {
    const TangentFrame f{Vec3::UnitZ(), Vec3::UnitX(), Vec3::UnitY()};
    auto forces_of = [&](double m11, double m22, double m12) {
        Eigen::Matrix2d M;
        M << m11, m12, m12, m22;
        return std::vector<PointForces>{principal_forces(M, f)};
    };
    DesignField d = two_points(1.0);
    d.points.resize(1);

    // Uniaxial along e1, already aligned.
    d.points[0] = {0.003, 0.001, Vec3::UnitX(), 0};
    EXPECT_EQ(rotate_fibers(forces_of(1.0, 0.0, 0.0), d), 0.0);
    EXPECT_NEAR((d.points[0].s - Vec3::UnitX()).norm(), 0.0, 1e-15);

    // t1 < t2 with M_I along e2: swap and align with e2; the main family did not move.
    d.points[0] = {0.001, 0.003, Vec3::UnitX(), 0};
    EXPECT_NEAR(rotate_fibers(forces_of(0.0, 2.0, 0.0), d), 0.0, 1e-15);
    EXPECT_EQ(d.points[0].t1, 0.003);
    EXPECT_EQ(d.points[0].t2, 0.001);
    EXPECT_NEAR(std::abs(d.points[0].s.dot(Vec3::UnitY())), 1.0, 1e-15);

    // Hydrostatic: direction kept.
    const Vec3 s0 = Vec3(1, 1, 0).normalized();
    d.points[0] = {0.003, 0.001, s0, 0};
    EXPECT_EQ(rotate_fibers(forces_of(1.0, 1.0, 0.0), d), 0.0);
    EXPECT_NEAR((d.points[0].s - s0).norm(), 0.0, 1e-15);

    // 60 degree turn reports 1 - cos(60).
    d.points[0] = {0.003, 0.001, Vec3::UnitX(), 0};
    const double a = M_PI / 3;
    const double c = std::cos(a), s = std::sin(a);
    const double change = rotate_fibers(forces_of(c * c, s * s, c * s), d);
    EXPECT_NEAR(change, 0.5, 1e-12);
    EXPECT_GE(d.points[0].t1, d.points[0].t2);
}

TEST(RotationSweep, UniaxialOptimumIsPrincipalAlignment) {
    const auto mesh = oracles::single_square();
    const MembraneMaterial mat{1.0, 0.3, 0.005, 2.0};
    for (double deg : {0.0, 30.0, 73.0, 135.0}) {
        const int best = oracles::best_sweep_angle(
            mesh, mat, oracles::uniaxial_load(0.001, deg * M_PI / 180.0), 0.003, 0.001);
        EXPECT_LE(axial_distance_deg(best, deg), 1.0) << "load angle " << deg;
    }
}

TEST(Optimize, WorthlessFibersTerminateImmediately) {
    const auto mesh = make_strip_mesh(4, 2);
    const MembraneMaterial mat{1.0, 0.0, 0.005, 0.0};
    const auto d0 = initial_design(mesh, {0.0, 0.0}, {0.008, 0.008}, 0.001);
    const auto r = optimize(mesh, mat, strip_load({0.001, 0, 0}), d0, OptimizationSettings{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.oc_updates, 0);
    EXPECT_EQ(r.rotation_updates, 0);
    for (int i = 0; i < d0.size(); ++i) EXPECT_EQ(r.design.points[i].t1, d0.points[i].t1);
}

TEST(Optimize, ZeroLoadConvergesWithZeroCompliance) {
    const auto mesh = make_strip_mesh(4, 2);
    const auto d0 = initial_design(mesh, {0.0, 0.0}, {0.008, 0.008}, 0.001);
    const auto r = optimize(mesh, MembraneMaterial{1.0, 0.0, 0.005, 2.0}, strip_load(Vec3::Zero()),
                            d0, OptimizationSettings{});
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.state.compliance, 0.0);
}

TEST(Optimize, InnerLoopsAreMonotoneAndFeasible) {
    const auto mesh = make_strip_mesh(10, 5);
    const MembraneMaterial mat{1.0, 0.3, 0.005, 2.0};
    const auto d0 = initial_design(mesh, {0.0, 0.0}, {0.008, 0.008}, 0.002);
    OptimizationSettings s;
    s.max_oc_iters = 60;
    const auto r = optimize(mesh, mat, strip_load({0.0, 0.001, 0.0}), d0, s);
    ASSERT_GE(r.history.oc_compliance.size(), 2u);
    EXPECT_LT(r.history.oc_compliance.back(), r.history.oc_compliance.front());
    for (const auto& h : r.history.outer) EXPECT_LE(h.fiber_volume, 0.002 * (1 + 1e-12));
    for (int i = 0; i < r.design.size(); ++i)
        for (int f = 0; f < 2; ++f) {
            EXPECT_GE(r.design.thickness(f, i), 0.0);
            EXPECT_LE(r.design.thickness(f, i), 0.008);
        }
    for (const auto& p : r.design.points) EXPECT_GE(p.t1, p.t2);
}

TEST(Optimize, FixedDirectionsReachAnOcFixedPoint) {
    const auto mesh = make_strip_mesh(2, 1);
    const MembraneMaterial mat{1.0, 0.0, 0.005, 2.0};
    const auto d0 = initial_design(mesh, {0.0, 0.0}, {0.004, 0.004}, 0.002);
    const auto loads = strip_load({0.0, 0.001, 0.0});
    OptimizationSettings s;
    s.fixed_directions = true;
    s.obj_tol = 1e-12;
    s.max_oc_iters = 20000;
    const auto r = optimize(mesh, mat, loads, d0, s);
    ASSERT_TRUE(r.converged) << r.message;
    EXPECT_EQ(r.rotation_updates, 0);
    for (int i = 0; i < 2; ++i) EXPECT_EQ(r.design.points[i].s, d0.points[i].s);

    // One more inner iteration moves no thickness by more than 1e-6 t_max.
    const auto lam = find_lambda(r.sensitivities, r.design, s.eta);
    for (int i = 0; i < 2; ++i)
        for (int f = 0; f < 2; ++f)
            EXPECT_LE(std::abs(lam.t_next[i][f] - r.design.thickness(f, i)), 1e-6 * 0.004);
}

TEST(Optimize, MatchesGridOracleOnTwoElements) {
    const auto mesh = make_strip_mesh(2, 1);
    const MembraneMaterial mat{1.0, 0.3, 0.005, 2.0};
    const double V = 0.00123, tmax = 0.004;
    const auto d0 = initial_design(mesh, {0.0, 0.0}, {tmax, tmax}, V);
    const auto loads = strip_load({0.001, 0.0003, 0.0});
    OptimizationSettings s;
    s.fixed_directions = true;
    s.obj_tol = 1e-12;
    s.max_oc_iters = 20000;
    const auto r = optimize(mesh, mat, loads, d0, s);
    ASSERT_TRUE(r.converged);

    const oracles::TwoElementGridOracle oracle(mesh, mat, loads, d0);
    const auto coarse = oracle.search({0, 0, 0, 0}, 2e-4, 20, tmax, V);
    const std::array<double, 4> t{r.design.points[0].t1, r.design.points[0].t2,
                                  r.design.points[1].t1, r.design.points[1].t2};
    for (int v = 0; v < 4; ++v) EXPECT_NEAR(t[v], coarse.t[v], 4e-4) << "variable " << v;
    EXPECT_LE(r.state.compliance, coarse.compliance * (1 + 1e-12));
    EXPECT_NEAR(oracle.compliance(t), r.state.compliance, 1e-10 * r.state.compliance);
}

TEST(Optimize, PrincipalInitialDirections) {
    const auto mesh = make_strip_mesh(10, 5);
    const MembraneMaterial mat{1.0, 0.0, 0.005, 2.0};
    auto d = initial_design(mesh, {0.0, 0.0}, {0.008, 0.008}, 0.002);
    const auto loads = strip_load({0.001, 0.0, 0.0});
    MembraneSolver solver(mesh, mat, loads);
    align_with_unreinforced_principal(solver, d, 1e-6);
    DesignField bare = d;
    for (auto& p : bare.points) p.t1 = p.t2 = 0.0;
    const auto state = solver.solve(bare);
    for (int i = 0; i < d.size(); ++i)
        if (!state.point_forces[i].degenerate)
            EXPECT_NEAR(std::abs(d.points[i].s.dot(state.point_forces[i].dir_I)), 1.0, 1e-12);
}

TEST(OptimizationSettings, Validate) {
    OptimizationSettings s;
    EXPECT_NO_THROW(s.validate());
    s.eta = 1.5;
    EXPECT_THROW(s.validate(), InvalidArgument);
    s = {};
    s.dir_tol = 1.0;
    EXPECT_THROW(s.validate(), InvalidArgument);
    s = {};
    s.lambda_bracket = {1.0, 0.5};
    EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(InitialDesign, MeetsBudgetWithEquality) {
    const auto mesh = make_spheroid_mesh(9, 32, true);
    const auto d = initial_design(mesh, {0.0, 0.0}, {0.004, 0.004}, 0.01);
    EXPECT_NEAR(d.fiber_volume(), 0.01, 1e-12);
    for (const auto& p : d.points) {
        EXPECT_EQ(p.t1, p.t2);
        const auto f = tangent_frame_at(mesh, p.element, Vec2::Zero());
        EXPECT_NEAR(p.s.norm(), 1.0, 1e-12);
        EXPECT_NEAR(p.s.dot(f.n), 0.0, 1e-10);
    }
}
