#include "hyperfe2/cubature.hpp"
#include "hyperfe2/reduction.hpp"
#include "hyperfe2/sampling.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

using namespace hyperfe2;

namespace {

Matrix random_matrix(int rows, int cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    Matrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) a(i, j) = g(rng);
    return a;
}

// Orthonormal sqrt(w)-weighted modes of nonnegative random fields (energy-like).
Matrix energy_like_modes(const Vector& w, int n, unsigned seed) {
    Matrix f = random_matrix(static_cast<int>(w.size()), 3 * n, seed).cwiseAbs();
    for (Eigen::Index g = 0; g < w.size(); ++g) f.row(g) *= std::sqrt(w(g));
    return pod(f, n).basis;
}

// Full-Gauss integral of the unweighted field behind a weighted mode column.
double full_integral(const Vector& mode, const Vector& w) {
    double s = 0.0;
    for (Eigen::Index g = 0; g < w.size(); ++g) s += std::sqrt(w(g)) * mode(g);
    return s;
}

double rule_integral(const CubatureRule& rule, const Vector& mode, const Vector& w) {
    double s = 0.0;
    for (int k = 0; k < rule.size(); ++k) s += rule.weights(k) * mode(rule.points[k]) / std::sqrt(w(rule.points[k]));
    return s;
}

void expect_valid_rule(const CubatureRule& rule, const Matrix& phi, const Vector& w, int max_points) {
    EXPECT_LE(rule.size(), max_points);
    ASSERT_GT(rule.size(), 0);
    EXPECT_GT(rule.weights.minCoeff(), 0.0);
    const std::set<int> unique(rule.points.begin(), rule.points.end());
    EXPECT_EQ(unique.size(), rule.points.size());
    const double volume = w.sum();
    EXPECT_NEAR(rule.weights.sum(), volume, 1e-8 * volume);
    double scale = volume * volume;
    for (int i = 0; i < rule.n_phi; ++i) scale += std::pow(full_integral(phi.col(i), w), 2);
    scale = std::sqrt(scale);
    for (int i = 0; i < rule.n_phi; ++i)
        EXPECT_NEAR(rule_integral(rule, phi.col(i), w), full_integral(phi.col(i), w), 1e-8 * scale) << "mode " << i;
}

}  // namespace

TEST(Cubature, VolumeOnlyRuleIsOnePoint) {
    const RveMesh mesh = build_homogeneous_rve(2, 4);
    const Vector w = mesh.gauss_weights();
    const auto rule = select_cubature(Matrix(w.size(), 0), w, 0);
    ASSERT_EQ(rule.size(), 1);
    EXPECT_DOUBLE_EQ(rule.weights(0), w.sum());
}

TEST(Cubature, ConstantModeNeedsOnePoint) {
    const RveMesh mesh = build_homogeneous_rve(2, 6);
    const Vector w = mesh.gauss_weights();
    Matrix phi = w.cwiseSqrt();
    phi /= phi.norm();
    const auto rule = select_cubature(phi, w, 1);
    ASSERT_EQ(rule.size(), 1);
    EXPECT_NEAR(rule.weights(0), w.sum(), 1e-14);
    EXPECT_NEAR(rule_integral(rule, phi.col(0), w), full_integral(phi.col(0), w), 1e-14);
}

TEST(Cubature, RandomRulesAreValidProperty) {
    FiberRveConfig cfg;
    cfg.resolution = 12;
    cfg.volume_fraction = 0.4;
    const RveMesh mesh = build_fiber_rve(cfg, 4);
    const Vector w = mesh.gauss_weights();
    for (unsigned seed = 1; seed <= 12; ++seed) {
        const int n_phi = 5 + 7 * static_cast<int>(seed);
        const Matrix phi = energy_like_modes(w, n_phi, seed);
        const auto rule = select_cubature(phi, w, n_phi);
        expect_valid_rule(rule, phi, w, n_phi + 1);
        const auto rep = verify_rule(rule, phi, w);
        EXPECT_LE(rep.max_residual, 1e-8);
        EXPECT_GT(rep.min_weight, 0.0);
    }
}

TEST(Cubature, SnapshotEnergyModesOnFiberCell) {
    FiberRveConfig cfg;
    cfg.resolution = 16;
    cfg.volume_fraction = 0.4;
    const RveMesh mesh = build_fiber_rve(cfg, 1);
    const auto mats = materials_for(mesh, {{"matrix", {"matrix", 4000, 0.38, 60, 70, 0.335, 0.05, true}},
                                           {"fiber", {"fiber", 231000, 0.2}}});
    SamplingPlan plan;
    plan.n_dirs = 12;
    plan.n_steps = 15;
    plan.chi_end = 0.02;
    const auto snaps = collect_snapshots(plan, mesh, mats);
    const auto split = split_elastic_inelastic(snaps);
    const auto basis = build_energy_basis(split.inelastic.energy, 99);
    ASSERT_EQ(basis.n_modes(), 99);
    const Vector w = mesh.gauss_weights();
    const auto rule = select_cubature(basis.modes, w, 99);
    expect_valid_rule(rule, basis.modes, w, 100);
}

TEST(Cubature, DeterministicSelection) {
    const RveMesh mesh = build_homogeneous_rve(2, 8);
    const Vector w = mesh.gauss_weights();
    const Matrix phi = energy_like_modes(w, 30, 77);
    const auto a = select_cubature(phi, w, 30);
    const auto b = select_cubature(phi, w, 30);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.weights, b.weights);
    EXPECT_TRUE(std::is_sorted(a.points.begin(), a.points.end()));
}

TEST(Cubature, PerturbedWeightShowsOnVolumeRow) {
    const RveMesh mesh = build_homogeneous_rve(2, 6);
    const Vector w = mesh.gauss_weights();
    const Matrix phi = energy_like_modes(w, 10, 3);
    auto rule = select_cubature(phi, w, 10);
    rule.weights(0) *= 1.1;
    const auto rep = verify_rule(rule, phi, w);
    EXPECT_NEAR(rep.volume_residual, 0.1 * rule.weights(0) / 1.1 / w.sum(), 1e-12);
    EXPECT_GT(rep.max_residual, 1e-8);
}

TEST(Cubature, EmptyRuleHasUnitVolumeResidual) {
    const RveMesh mesh = build_homogeneous_rve(2, 2);
    CubatureRule empty;
    const auto rep = verify_rule(empty, Matrix(mesh.n_gauss(), 0), mesh.gauss_weights());
    EXPECT_DOUBLE_EQ(rep.volume_residual, 1.0);
    EXPECT_DOUBLE_EQ(rep.max_residual, 1.0);
}

TEST(Cubature, RejectsImpossibleRequests) {
    const RveMesh mesh = build_homogeneous_rve(2, 1);
    const Vector w = mesh.gauss_weights();
    const Matrix phi = random_matrix(4, 5, 1);
    EXPECT_THROW(select_cubature(phi, w, 4), ConfigError);  // 5 rows > 4 points
    EXPECT_THROW(select_cubature(phi, w, 6), ConfigError);
    EXPECT_THROW(select_cubature(random_matrix(3, 2, 1), w, 1), ConfigError);
}

TEST(Cubature, ConstrainedSelectionIntegratesConstraintsAndModes) {
    const RveMesh mesh = build_homogeneous_rve(2, 10);
    const Vector w = mesh.gauss_weights();
    const Matrix phi = energy_like_modes(w, 40, 8);
    // Two independent constraints and one repeated combination (rank 2).
    Matrix con = energy_like_modes(w, 2, 99);
    con.conservativeResize(Eigen::NoChange, 3);
    con.col(2) = 2.0 * con.col(0) - con.col(1);
    const auto rule = select_cubature_constrained(con, phi, w, 30);
    EXPECT_EQ(rule.n_constraints, 2);
    EXPECT_EQ(rule.n_phi, 27);
    expect_valid_rule(rule, phi, w, 30);
    for (int i = 0; i < 3; ++i)
        EXPECT_NEAR(rule_integral(rule, con.col(i), w), full_integral(con.col(i), w),
                    1e-8 * (std::abs(full_integral(con.col(i), w)) + w.sum()));
    EXPECT_THROW(select_cubature_constrained(con, phi, w, 2), ConfigError);
}

TEST(Cubature, ConstrainedBudgetCapsAtAvailableModes) {
    const RveMesh mesh = build_homogeneous_rve(2, 6);
    const Vector w = mesh.gauss_weights();
    const Matrix phi = energy_like_modes(w, 8, 2);
    const auto rule = select_cubature_constrained(Matrix(w.size(), 0), phi, w, 100);
    EXPECT_EQ(rule.n_phi, 8);
    EXPECT_EQ(rule.n_constraints, 0);
    expect_valid_rule(rule, phi, w, 9);
}

TEST(Cubature, RuleTextRoundTrip) {
    const RveMesh mesh = build_homogeneous_rve(2, 6);
    const Vector w = mesh.gauss_weights();
    const Matrix phi = energy_like_modes(w, 12, 5);
    const auto rule = select_cubature(phi, w, 12);
    std::stringstream ss;
    write_rule(ss, rule);
    const auto back = read_rule(ss);
    EXPECT_EQ(back.points, rule.points);
    EXPECT_EQ(back.weights, rule.weights);
    EXPECT_EQ(back.n_phi, rule.n_phi);
    EXPECT_DOUBLE_EQ(back.volume, rule.volume);
    std::stringstream bad("n_phi 1\nbogus 3\n");
    EXPECT_THROW(read_rule(bad), FormatError);
    std::stringstream truncated("points 3\n1 0.5\n");
    EXPECT_THROW(read_rule(truncated), FormatError);
}

TEST(Cubature, FullGaussRuleReproducesWeights) {
    const RveMesh mesh = build_homogeneous_rve(2, 3);
    const auto rule = full_gauss_rule(mesh.gauss_weights());
    EXPECT_EQ(rule.size(), mesh.n_gauss());
    EXPECT_LT(rule.n_phi, 0);
    EXPECT_DOUBLE_EQ(rule.volume, mesh.gauss_weights().sum());
}

TEST(IncrementalQr, MatchesDenseLeastSquaresAfterRemovals) {
    const Matrix a = random_matrix(20, 8, 13);
    const Vector b = random_matrix(20, 1, 14).col(0);
    detail::IncrementalQr qr(20, 2);  // grows past the initial capacity
    for (int j = 0; j < 8; ++j) ASSERT_TRUE(qr.append(a.col(j)));
    std::vector<int> cols{0, 1, 2, 3, 4, 5, 6, 7};
    for (int drop : {3, 0, 4}) {
        qr.remove(drop);
        cols.erase(cols.begin() + drop);
        Matrix sub(20, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) sub.col(k) = a.col(cols[k]);
        const Vector ref = sub.colPivHouseholderQr().solve(b);
        EXPECT_LT((qr.solve(b) - ref).cwiseAbs().maxCoeff(), 1e-10);
    }
    EXPECT_EQ(qr.size(), 5);
    EXPECT_FALSE(qr.append(a.col(1) + 2.0 * a.col(2)));  // dependent on kept columns
    EXPECT_EQ(qr.size(), 5);
}

TEST(Nnls, KktConditionsHold) {
    for (unsigned seed = 1; seed <= 20; ++seed) {
        const Matrix a = random_matrix(15, 10, seed);
        const Vector b = random_matrix(15, 1, seed + 100).col(0);
        const Vector x = nnls(a, b);
        const Vector grad = a.transpose() * (a * x - b);
        EXPECT_GE(x.minCoeff(), 0.0);
        for (int j = 0; j < 10; ++j) {
            EXPECT_GE(grad(j), -1e-9) << "seed " << seed;
            if (x(j) > 0.0) EXPECT_NEAR(grad(j), 0.0, 1e-9);
        }
    }
}

TEST(Nnls, RecoversNonnegativeSolutionOfConsistentSystem) {
    const Matrix a = random_matrix(12, 6, 3);
    Vector x(6);
    x << 1, 0, 2, 0.5, 0, 3;
    const Vector got = nnls(a, a * x);
    EXPECT_LT((got - x).cwiseAbs().maxCoeff(), 1e-10);
    const Vector warm = nnls(a, a * x, &x);
    EXPECT_LT((warm - x).cwiseAbs().maxCoeff(), 1e-10);
}
