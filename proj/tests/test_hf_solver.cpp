#include "hyperfe2/hf_solver.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hyperfe2;

namespace {

PhaseMaterial soft() { return {"a", 4000, 0.38, 60, 70, 0.335, 0.05, true}; }
PhaseMaterial stiff() { return {"b", 231000, 0.2}; }

// Two horizontal layers split at y = 0.5.
RveMesh bilayer(int res) {
    return detail::build_structured(2, res, {"a", "b"},
                                    [](const Eigen::Vector3d& c) { return c.y() < 0.5 ? 0 : 1; });
}

// Closed-form laminate homogenization (layers normal to y, plane strain): eps_xx
// is common to both layers, sigma_yy and sigma_xy are continuous.
VoigtVector laminate_stress(const VoigtMatrix& ca, const VoigtMatrix& cb, double fa, const VoigtVector& eps) {
    // Unknowns: (eyy_a, gxy_a, eyy_b, gxy_b).
    Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
    Eigen::Vector4d rhs;
    const double fb = 1.0 - fa;
    a(0, 0) = fa;
    a(0, 2) = fb;
    rhs(0) = eps(1);
    a(1, 1) = fa;
    a(1, 3) = fb;
    rhs(1) = eps(2);
    for (int row = 0; row < 2; ++row) {
        const int s = row + 1;  // sigma_yy, sigma_xy
        a(2 + row, 0) = ca(s, 1);
        a(2 + row, 1) = ca(s, 2);
        a(2 + row, 2) = -cb(s, 1);
        a(2 + row, 3) = -cb(s, 2);
        rhs(2 + row) = -(ca(s, 0) - cb(s, 0)) * eps(0);
    }
    const Eigen::Vector4d x = a.fullPivLu().solve(rhs);
    VoigtVector ea(3), eb(3);
    ea << eps(0), x(0), x(1);
    eb << eps(0), x(2), x(3);
    return fa * (ca * ea) + fb * (cb * eb);
}

RveMesh fiber_cell(int res) {
    FiberRveConfig cfg;
    cfg.resolution = res;
    cfg.volume_fraction = 0.5;
    return build_fiber_rve(cfg, 3);
}

}  // namespace

TEST(HfSolver, ConstraintMapExcludesPinnedAndPairsPeriodically) {
    const RveMesh mesh = build_homogeneous_rve(2, 4);
    const PeriodicConstraintMap map(mesh);
    EXPECT_EQ(map.n_free(), 2 * (16 - 1));
    Vector free = Vector::LinSpaced(map.n_free(), 1.0, 2.0);
    const Vector full = map.expand(free);
    for (const auto& [s, m] : mesh.periodic_pairs)
        for (int c = 0; c < 2; ++c) EXPECT_EQ(full(2 * s + c), full(2 * m + c));
    EXPECT_EQ(full(0), 0.0);
    EXPECT_EQ(full(1), 0.0);
    // expand^T = restrict_sum
    const Vector y = Vector::LinSpaced(map.n_full(), -1.0, 3.0);
    EXPECT_NEAR(full.dot(y), free.dot(map.restrict_sum(y)), 1e-12);
}

TEST(HfSolver, ZeroStrainVirginIsZero) {
    const RveMesh mesh = fiber_cell(16);
    HfSolver solver(mesh, {soft(), stiff()});
    const auto sol = solver.solve_increment(VoigtVector::Zero(3), solver.virgin_states());
    EXPECT_EQ(sol.fluctuation.norm(), 0.0);
    EXPECT_EQ(sol.homogenized_stress.norm(), 0.0);
}

TEST(HfSolver, HomogeneousBodyHasNoFluctuation) {
    for (int dim : {2, 3}) {
        const RveMesh mesh = build_homogeneous_rve(dim, 4);
        const PhaseMaterial elastic{"matrix", 3790, 0.37};
        HfSolver solver(mesh, {elastic});
        std::mt19937_64 rng(2);
        std::normal_distribution<double> g(0, 1e-2);
        VoigtVector eps(mesh.n_sigma());
        for (int i = 0; i < eps.size(); ++i) eps(i) = g(rng);
        const auto sol = solver.solve_increment(eps, solver.virgin_states());
        EXPECT_LT(sol.fluctuation.norm(), 1e-12);
        const VoigtVector ref = isotropic_elasticity(3790, 0.37, mesh.n_sigma()) * eps;
        EXPECT_LT((sol.homogenized_stress - ref).norm(), 1e-10 * ref.norm());
        const Matrix c = solver.homogenize_tangent(eps, solver.virgin_states(), &sol);
        const Matrix cref = isotropic_elasticity(3790, 0.37, mesh.n_sigma());
        EXPECT_LT((c - cref).norm(), 1e-6 * cref.norm());
    }
}

TEST(HfSolver, LaminateMatchesClosedForm) {
    const RveMesh mesh = bilayer(8);
    PhaseMaterial a = soft();
    a.is_inelastic = false;
    HfSolver solver(mesh, {a, stiff()});
    const VoigtMatrix ca = isotropic_elasticity(4000, 0.38, 3);
    const VoigtMatrix cb = isotropic_elasticity(231000, 0.2, 3);
    // Transverse uniaxial strain: series (Reuss) combination of P-wave moduli.
    VoigtVector eps(3);
    eps << 0.0, 1e-3, 0.0;
    const auto sol = solver.solve_increment(eps, solver.virgin_states());
    const double reuss = 1.0 / (0.5 / ca(1, 1) + 0.5 / cb(1, 1));
    EXPECT_NEAR(sol.homogenized_stress(1), reuss * 1e-3, 1e-8 * reuss * 1e-3);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0, 1e-3);
    for (int t = 0; t < 5; ++t) {
        for (int i = 0; i < 3; ++i) eps(i) = g(rng);
        const auto s = solver.solve_increment(eps, solver.virgin_states());
        const VoigtVector ref = laminate_stress(ca, cb, 0.5, eps);
        EXPECT_LT((s.homogenized_stress - ref).norm(), 1e-8 * ref.norm());
    }
}

TEST(HfSolver, ElasticHeterogeneousTangentSymmetricPositiveDefinite) {
    const RveMesh mesh = fiber_cell(16);
    PhaseMaterial a = soft();
    a.is_inelastic = false;
    HfSolver solver(mesh, {a, stiff()});
    const VoigtVector eps = VoigtVector::Zero(3);
    const Matrix c = solver.homogenize_tangent(eps, solver.virgin_states());
    EXPECT_LT((c - c.transpose()).norm(), 1e-8 * c.norm());
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (c + c.transpose()));
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(HfSolver, StressReQuadratureAndZeroMeanFluctuation) {
    const RveMesh mesh = fiber_cell(16);
    HfSolver solver(mesh, {soft(), stiff()});
    VoigtVector eps(3);
    eps << 0.01, -0.004, 0.012;
    const auto sol = solver.solve_increment(eps, solver.virgin_states());
    EXPECT_GT(sol.max_damage(), 0.0);
    VoigtVector sum = VoigtVector::Zero(3);
    VoigtVector mean_fluct = VoigtVector::Zero(3);
    for (int g = 0; g < mesh.n_gauss(); ++g) {
        sum += mesh.gauss_points[g].weight * sol.stress.col(g);
        mean_fluct += mesh.gauss_points[g].weight * (sol.strain.col(g) - eps);
    }
    EXPECT_LT((homogenize_stress(mesh, sol) - sum / mesh.volume).norm(), 1e-14 * sum.norm());
    EXPECT_LT(mean_fluct.cwiseAbs().maxCoeff() / mesh.volume, 1e-10);
    // Uniform micro stress averages to itself.
    Matrix uniform(3, mesh.n_gauss());
    for (int g = 0; g < mesh.n_gauss(); ++g) uniform.col(g) = eps;
    EXPECT_LT((homogenize_stress(mesh, uniform) - eps).norm(), 1e-14);
}

TEST(HfSolver, DamagedTangentMatchesDirectionalDifferences) {
    const RveMesh mesh = fiber_cell(16);
    HfSolver solver(mesh, {soft(), stiff()});
    VoigtVector dir(3);
    dir << 0.6, 0.3, 0.74;
    dir.normalize();
    const auto traj = solver.run_trajectory(dir, 0.015, 10);
    const auto& last = traj.back();
    ASSERT_GT(last.max_damage(), 0.0);
    const auto prev = traj[traj.size() - 2].states();
    const Matrix c = solver.homogenize_tangent(last.macro_strain, prev, &last);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    HfOptions tight;
    tight.relative_tolerance = 1e-13;
    tight.absolute_tolerance = 1e-15;
    for (int t = 0; t < 3; ++t) {
        VoigtVector d(3);
        for (int i = 0; i < 3; ++i) d(i) = g(rng);
        d.normalize();
        const double h = 1e-6;
        const VoigtVector ep = last.macro_strain + h * d, em = last.macro_strain - h * d;
        const auto sp = solver.solve_increment(ep, prev, &last.fluctuation, tight);
        const auto sm = solver.solve_increment(em, prev, &last.fluctuation, tight);
        const VoigtVector fd = (sp.homogenized_stress - sm.homogenized_stress) / (2 * h);
        EXPECT_LT((c * d - fd).norm(), 1e-4 * fd.norm());
    }
}

TEST(HfSolver, TrajectoryReachesDamageAndIsStepInsensitive) {
    const RveMesh mesh = fiber_cell(16);
    HfSolver solver(mesh, {soft(), stiff()});
    VoigtVector dir(3);
    dir << 0.5, 0.5, 0.7071067811865476;
    dir.normalize();
    const auto coarse = solver.run_trajectory(dir, 0.02, 10);
    const auto fine = solver.run_trajectory(dir, 0.02, 40);
    EXPECT_GT(fine.back().max_damage(), 0.0);
    const VoigtVector a = coarse.back().homogenized_stress, b = fine.back().homogenized_stress;
    EXPECT_LT((a - b).norm(), 0.005 * b.norm());
    EXPECT_THROW(solver.run_trajectory(2.0 * dir, 0.02, 4), ConfigError);
    const auto zero = solver.run_trajectory(dir, 0.0, 3);
    for (const auto& s : zero) EXPECT_EQ(s.homogenized_stress.norm(), 0.0);
}

TEST(HfSolver, NonConvergenceCarriesResidual) {
    const RveMesh mesh = fiber_cell(16);
    HfOptions opts;
    opts.max_iterations = 0;
    HfSolver solver(mesh, {soft(), stiff()}, opts);
    VoigtVector eps(3);
    eps << 0.01, 0.0, 0.0;
    try {
        solver.solve_increment(eps, solver.virgin_states());
        FAIL();
    } catch (const NonConvergenceError& e) {
        EXPECT_GT(e.last_residual(), 0.0);
    }
}
