#include "hyperfe2/hf_solver.hpp"
#include "hyperfe2/hpr_solver.hpp"
#include "hyperfe2/reduction.hpp"
#include "hyperfe2/sampling.hpp"

#include <gtest/gtest.h>

#include <memory>
#include <random>

using namespace hyperfe2;

namespace {

struct Pipeline {
    RveMesh mesh;
    std::vector<PhaseMaterial> materials;
    StrainBasis basis;
    EnergyBasis energy;
};

// Small fiber cell with bases from a short sampling run.
const Pipeline& pipeline() {
    static const std::unique_ptr<Pipeline> p = [] {
        auto out = std::make_unique<Pipeline>();
        FiberRveConfig cfg;
        cfg.resolution = 12;
        cfg.volume_fraction = 0.4;
        out->mesh = build_fiber_rve(cfg, 2);
        out->materials = materials_for(out->mesh, {{"matrix", {"matrix", 4000, 0.38, 60, 70, 0.335, 0.05, true}},
                                                   {"fiber", {"fiber", 231000, 0.2}}});
        SamplingPlan plan;
        plan.n_dirs = 10;
        plan.n_steps = 12;
        plan.chi_end = 0.02;
        plan.seed = 3;
        const auto snaps = collect_snapshots(plan, out->mesh, out->materials);
        const auto split = split_elastic_inelastic(snaps);
        out->basis = build_strain_basis(split.elastic.strain, split.inelastic.strain, 20);
        out->energy = build_energy_basis(split.inelastic.energy, 200);
        return out;
    }();
    return *p;
}

HprSolver make_solver(const Pipeline& p, int n_points, HprOptions opts = {}) {
    const CubatureRule rule =
        n_points > 0 ? select_reduced_rule(p.mesh, p.materials, p.basis.modes, p.basis.n_elastic, p.energy.modes,
                                           n_points)
                     : full_gauss_rule(p.mesh.gauss_weights());
    return HprSolver(make_reduced_operators(p.mesh, p.basis.modes, rule, p.basis.n_elastic), p.materials, opts);
}

VoigtVector random_direction(std::mt19937& rng) {
    std::normal_distribution<double> g;
    VoigtVector v(3);
    for (int i = 0; i < 3; ++i) v(i) = g(rng);
    return v.normalized();
}

// Exact elastic energy of the reduced fluctuation on the full Gauss rule.
double exact_elastic_energy(const Pipeline& p, const Vector& c, const VoigtVector& eps) {
    double e = 0.0;
    for (const auto& gp : p.mesh.gauss_points) {
        const auto& m = p.materials[gp.phase];
        const VoigtMatrix cm = isotropic_elasticity(m.young_modulus, m.poisson_ratio, 3);
        const Matrix psi = p.basis.modes.middleRows(3 * gp.index, 3) / std::sqrt(gp.weight);
        const VoigtVector strain = eps + psi * c;
        e += 0.5 * gp.weight * strain.dot(cm * strain);
    }
    return e;
}

}  // namespace

TEST(HprSolver, ResidualIsExactElasticEnergyGradient) {
    const auto& p = pipeline();
    HprOptions opts;
    opts.consistency = ElasticConsistency::all_modes;
    const HprSolver solver = make_solver(p, 120, opts);
    const auto state = solver.virgin_state();
    std::mt19937 rng(1);
    const VoigtVector eps = 1e-4 * random_direction(rng);
    std::normal_distribution<double> g;
    Vector c(solver.n_modes());
    for (int i = 0; i < c.size(); ++i) c(i) = 1e-5 * g(rng);
    const Vector res = solver.residual(c, eps, state);
    const double h = 1e-7;
    for (int i = 0; i < c.size(); ++i) {
        Vector cp = c, cm = c;
        cp(i) += h;
        cm(i) -= h;
        const double fd = (exact_elastic_energy(p, cp, eps) - exact_elastic_energy(p, cm, eps)) / (2 * h);
        EXPECT_NEAR(res(i), fd, 1e-6 * res.norm()) << "mode " << i;
    }
}

TEST(HprSolver, ElasticResponseMatchesHighFidelity) {
    const auto& p = pipeline();
    const HprSolver solver = make_solver(p, 120);
    HfSolver hf(p.mesh, p.materials);
    std::mt19937 rng(7);
    for (int k = 0; k < 5; ++k) {
        const VoigtVector eps = 2e-4 * random_direction(rng);
        const auto red = solver.solve_increment(eps, solver.virgin_state());
        const auto full = hf.solve_increment(eps, hf.virgin_states());
        ASSERT_EQ(full.max_damage(), 0.0);
        EXPECT_LT((red.homogenized_stress - full.homogenized_stress).norm(), 1e-8 * full.homogenized_stress.norm());
    }
}

TEST(HprSolver, ElasticTangentMatchesHighFidelity) {
    const auto& p = pipeline();
    const HprSolver solver = make_solver(p, 120);
    HfSolver hf(p.mesh, p.materials);
    const VoigtVector zero = VoigtVector::Zero(3);
    const auto sol = solver.solve_increment(zero, solver.virgin_state());
    const Matrix ct = solver.homogenized_tangent(sol, solver.virgin_state());
    const Matrix ref = hf.homogenize_tangent(zero, hf.virgin_states());
    EXPECT_LT((ct - ref).norm(), 1e-6 * ref.norm());
}

TEST(HprSolver, HomogenizedTangentMatchesFiniteDifferencesWhenDamaged) {
    const auto& p = pipeline();
    const HprSolver solver = make_solver(p, 120);
    std::mt19937 rng(21);
    int trial = 0;
    for (int attempt = 0; attempt < 30 && trial < 3; ++attempt) {
        const VoigtVector dir = random_direction(rng);
        const auto steps = solver.run_trajectory(dir, 0.02, 10);
        if (steps.back().max_damage() == 0.0) continue;  // direction stays elastic
        ++trial;
        const ReducedState committed = steps.back().state();
        const VoigtVector eps = steps.back().macro_strain * 1.05;
        const auto sol = solver.solve_increment(eps, committed);
        const Matrix ct = solver.homogenized_tangent(sol, committed);
        HprOptions tight;
        tight.relative_tolerance = 1e-14;
        tight.absolute_tolerance = 1e-16;
        const double h = 1e-8;
        Matrix fd(3, 3);
        for (int k = 0; k < 3; ++k) {
            VoigtVector ep = eps, em = eps;
            ep(k) += h;
            em(k) -= h;
            fd.col(k) = (solver.solve_increment(ep, committed, tight).homogenized_stress -
                         solver.solve_increment(em, committed, tight).homogenized_stress) /
                        (2 * h);
        }
        EXPECT_LT((ct - fd).norm(), 1e-4 * fd.norm()) << "trial " << trial;
    }
    EXPECT_EQ(trial, 3);
}

TEST(HprSolver, RomConsistencyTermsVanish) {
    const auto& p = pipeline();
    HprOptions none;
    none.consistency = ElasticConsistency::none;
    const HprSolver a = make_solver(p, 0);
    const HprSolver b = make_solver(p, 0, none);
    const VoigtVector dir = VoigtVector::Constant(3, 1.0 / std::sqrt(3.0));
    const auto sa = a.run_trajectory(dir, 0.015, 6);
    const auto sb = b.run_trajectory(dir, 0.015, 6);
    for (std::size_t k = 0; k < sa.size(); ++k)
        EXPECT_LT((sa[k].homogenized_stress - sb[k].homogenized_stress).norm(),
                  1e-9 * sb[k].homogenized_stress.norm());
}

TEST(HprSolver, UnloadingReturnsToZeroStress) {
    const auto& p = pipeline();
    const HprSolver solver = make_solver(p, 120);
    VoigtVector dir(3);
    dir << -0.076, 0.748, 0.539;
    dir.normalize();
    const std::vector<double> chis{0.005, 0.01, 0.015, 0.01, 0.005, 0.0};
    const auto steps = solver.run_schedule(dir, chis);
    EXPECT_GT(steps[2].max_damage(), 0.0);
    EXPECT_LT(steps.back().homogenized_stress.norm(), 1e-8 * steps[2].homogenized_stress.norm());
    // Damage is irreversible along the path.
    for (std::size_t k = 3; k < steps.size(); ++k)
        EXPECT_GE(steps[k].damage.minCoeff() - steps[2].damage.minCoeff(), -1e-15);
    for (int j = 0; j < steps[2].r.size(); ++j) EXPECT_DOUBLE_EQ(steps.back().r(j), steps[2].r(j));
}

TEST(HprSolver, VirginStateAndInputValidation) {
    const auto& p = pipeline();
    const HprSolver solver = make_solver(p, 150);
    const auto s = solver.virgin_state();
    EXPECT_EQ(s.c.size(), solver.n_modes());
    EXPECT_EQ(s.r.size(), solver.n_points());
    EXPECT_LE(solver.n_points(), 150);
    EXPECT_THROW(solver.solve_increment(VoigtVector::Zero(6), s), ConfigError);
    VoigtVector bad = VoigtVector::Zero(3);
    bad(0) = std::nan("");
    EXPECT_THROW(solver.solve_increment(bad, s), DomainError);
    ReducedState wrong = s;
    wrong.r.resize(1);
    EXPECT_THROW(solver.solve_increment(VoigtVector::Zero(3), wrong), ConfigError);
    EXPECT_THROW(solver.run_trajectory(VoigtVector::Constant(3, 1.0), 0.01, 3), ConfigError);
}

TEST(HprSolver, LocalizationFieldsReproduceElasticSolve) {
    const auto& p = pipeline();
    const auto fields = elastic_localization_fields(p.mesh, p.materials, p.basis.modes, p.basis.n_elastic);
    EXPECT_EQ(fields.rows(), p.mesh.n_gauss());
    EXPECT_EQ(fields.cols(), p.basis.n_modes() * 3 + 9);
    // Rows of psi^T T integrated on the full rule: the elastic-mode rows are the
    // exact elastic residual along the localization, which vanishes.
    const Vector w = p.mesh.gauss_weights();
    Vector integral = Vector::Zero(fields.cols());
    for (int g = 0; g < p.mesh.n_gauss(); ++g) integral += std::sqrt(w(g)) * fields.row(g).transpose();
    const double scale = integral.tail(9).cwiseAbs().maxCoeff();
    EXPECT_LT(integral.head(3 * p.basis.n_elastic).cwiseAbs().maxCoeff(), 1e-9 * scale);
}

TEST(HprSolver, RuleBudgetIsRespected) {
    const auto& p = pipeline();
    const int n_c = p.basis.n_modes() * 3 + 9;
    EXPECT_THROW(make_solver(p, 10), ConfigError);
    const auto rule = select_reduced_rule(p.mesh, p.materials, p.basis.modes, p.basis.n_elastic, p.energy.modes,
                                          n_c + 40);
    EXPECT_LE(rule.size(), n_c + 40);
    EXPECT_EQ(rule.n_phi + rule.n_constraints + 1, n_c + 40);
}
