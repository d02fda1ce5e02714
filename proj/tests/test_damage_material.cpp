#include "hyperfe2/damage_material.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hyperfe2;

namespace {

PhaseMaterial model_b_matrix() { return {"matrix", 4000, 0.38, 60, 70, 0.335, 0.05, true}; }

// Independent scalar oracle: 1D bar with modulus E and the same hardening law.
struct ScalarOracle {
    double e, r0, rinf, h1, h2;
    double q(double r) const {
        return r <= rinf ? r0 + h1 * (r - r0) : r0 + h1 * (rinf - r0) + h2 * (r - rinf);
    }
};

VoigtVector random_strain(std::mt19937_64& rng, int ns, double scale) {
    std::normal_distribution<double> g(0.0, scale);
    VoigtVector v(ns);
    for (int i = 0; i < ns; ++i) v(i) = g(rng);
    return v;
}

}  // namespace

TEST(DamageMaterial, TauZeroAndCompression) {
    for (int ns : {3, 6}) {
        const auto p = DamageParams::from_material(model_b_matrix(), ns);
        EXPECT_EQ(tau_epsilon(VoigtVector::Zero(ns), p), 0.0);
        VoigtVector hydro = -1e-3 * voigt_identity(ns);
        EXPECT_EQ(tau_epsilon(hydro, p), 0.0);
    }
}

TEST(DamageMaterial, TauUniaxialIdealization) {
    // nu = 0 turns uniaxial strain into the 1D bar: tau = e sqrt(E).
    PhaseMaterial m{"m", 5000, 0.0, 10, 20, 0.1, 0.1, true};
    for (int ns : {3, 6}) {
        const auto p = DamageParams::from_material(m, ns);
        VoigtVector eps = VoigtVector::Zero(ns);
        eps(0) = 2e-3;
        EXPECT_NEAR(tau_epsilon(eps, p), 2e-3 * std::sqrt(5000.0), 1e-14);
    }
}

TEST(DamageMaterial, TauMatchesBruteForceSpectralSum) {
    std::mt19937_64 rng(5);
    const auto p = DamageParams::from_material(model_b_matrix(), 6);
    for (int t = 0; t < 200; ++t) {
        const VoigtVector eps = random_strain(rng, 6, 1e-2);
        const Tensor3 sig = strain_to_tensor(eps) * (2 * p.lame.mu) +
                            p.lame.lambda * strain_to_tensor(eps).trace() * Tensor3::Identity();
        Eigen::SelfAdjointEigenSolver<Tensor3> es(sig);
        Tensor3 plus = Tensor3::Zero();
        for (int k = 0; k < 3; ++k)
            plus += std::max(es.eigenvalues()(k), 0.0) * es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose();
        const double ref = std::sqrt(std::max(0.0, (plus.cwiseProduct(strain_to_tensor(eps))).sum()));
        EXPECT_NEAR(tau_epsilon(eps, p), ref, 1e-12 * std::max(1.0, ref));
    }
}

TEST(DamageMaterial, HardeningLaw) {
    const auto p = DamageParams::from_material(model_b_matrix(), 3);
    EXPECT_NEAR(p.r0, 60.0 / std::sqrt(4000.0), 1e-15);
    EXPECT_NEAR(p.r0, 0.94868, 1e-5);
    EXPECT_DOUBLE_EQ(hardening_q(p.r0, p), p.r0);
    // r0 + 1 lies past r_inf = 70/sqrt(4000); evaluate against the piecewise formula.
    const double r = p.r0 + 1.0;
    const double expected = p.r0 + 0.335 * (p.r_inf - p.r0) + 0.05 * (r - p.r_inf);
    EXPECT_NEAR(hardening_q(r, p), expected, 1e-14);
    // Below the breakpoint the slope is H1.
    const double rm = 0.5 * (p.r0 + p.r_inf);
    EXPECT_NEAR(hardening_q(rm, p), p.r0 + 0.335 * (rm - p.r0), 1e-14);
    EXPECT_NEAR(hardening_q(100.0, p) - hardening_q(99.0, p), 0.05, 1e-12);
    EXPECT_THROW(hardening_q(0.5 * p.r0, p), DomainError);
}

TEST(DamageMaterial, VirginAndElasticPhase) {
    const auto p = DamageParams::from_material(model_b_matrix(), 3);
    const auto resp = update_state(VoigtVector::Zero(3), virgin_state(p), p);
    EXPECT_EQ(resp.stress.norm(), 0.0);
    EXPECT_EQ(resp.damage, 0.0);
    EXPECT_EQ(resp.r, p.r0);

    PhaseMaterial fiber{"fiber", 231000, 0.2};
    const auto pf = DamageParams::from_material(fiber, 6);
    std::mt19937_64 rng(1);
    const VoigtVector eps = random_strain(rng, 6, 0.05);
    const auto rf = update_state(eps, virgin_state(pf), pf);
    EXPECT_LT((rf.stress - pf.elasticity * eps).norm(), 1e-12 * rf.stress.norm());
    EXPECT_EQ(rf.damage, 0.0);
}

TEST(DamageMaterial, ProportionalPathsMatchScalarOracle) {
    // Along eps = chi n the multiaxial tau is chi tau(n), so the 1D law with strain
    // measure chi * tau(n) gives the stress scale factor q/r.
    std::mt19937_64 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int path = 0; path < 1000; ++path) {
        const int ns = path % 2 ? 6 : 3;
        const auto p = DamageParams::from_material(model_b_matrix(), ns);
        const ScalarOracle o{4000, p.r0, p.r_inf, p.h1, p.h2};
        VoigtVector n = random_strain(rng, ns, 1.0);
        n.normalize();
        const double tn = tau_epsilon(n, p);
        DamageState st = virgin_state(p);
        double r_oracle = p.r0;
        const double chi_end = 0.05 * u(rng);
        for (int k = 1; k <= 10; ++k) {
            const double chi = chi_end * k / 10.0;
            const VoigtVector eps = chi * n;
            const auto resp = update_state(eps, st, p);
            st.r = resp.r;
            r_oracle = std::max(r_oracle, chi * tn);
            const VoigtVector ref = (o.q(r_oracle) / r_oracle) * (p.elasticity * eps);
            if (ref.norm() > 0) worst = std::max(worst, (resp.stress - ref).norm() / ref.norm());
            EXPECT_NEAR(resp.damage, 1.0 - o.q(r_oracle) / r_oracle, 1e-12);
        }
    }
    EXPECT_LE(worst, 1e-10);
}

TEST(DamageMaterial, KktOnRandomWalks) {
    std::mt19937_64 rng(99);
    for (int walk = 0; walk < 1000; ++walk) {
        const int ns = walk % 2 ? 6 : 3;
        const auto p = DamageParams::from_material(model_b_matrix(), ns);
        DamageState st = virgin_state(p);
        VoigtVector eps = VoigtVector::Zero(ns);
        double prev_d = 0.0;
        for (int k = 0; k < 20; ++k) {
            eps += random_strain(rng, ns, 4e-3);
            const double r_prev = st.r;
            const auto resp = update_state(eps, st, p);
            const double rdot = resp.r - r_prev;
            const double g = tau_epsilon(eps, p) - resp.r;
            EXPECT_GE(rdot, 0.0);
            EXPECT_LE(g, 1e-14 * resp.r);
            EXPECT_LE(std::abs(rdot * g), 1e-14 * resp.r * resp.r);
            EXPECT_GE(resp.damage, prev_d);  // dissipation >= 0 since psi0 >= 0
            EXPECT_GE(resp.damage, 0.0);
            EXPECT_LT(resp.damage, 1.0);
            EXPECT_GE(resp.free_energy, 0.0);
            prev_d = resp.damage;
            st.r = resp.r;
        }
    }
}

TEST(DamageMaterial, UnloadingIsSecantThroughOrigin) {
    const auto p = DamageParams::from_material(model_b_matrix(), 3);
    VoigtVector n(3);
    n << 1.0, 0.2, 0.1;
    n /= tau_epsilon(n, p);  // tau(n) = 1
    DamageState st = virgin_state(p);
    const auto loaded = update_state(2 * p.r0 * n, st, p);
    EXPECT_NEAR(loaded.r, 2 * p.r0, 1e-14);
    st.r = loaded.r;
    for (double s : {0.75, 0.5, 0.25, 0.0}) {
        const auto resp = update_state(s * 2 * p.r0 * n, st, p);
        EXPECT_EQ(resp.r, st.r);
        EXPECT_FALSE(resp.loading);
        EXPECT_LT((resp.stress - (1 - loaded.damage) * p.elasticity * (s * 2 * p.r0 * n)).norm(), 1e-12);
        EXPECT_LE(tau_epsilon(s * 2 * p.r0 * n, p) - st.r, 0.0);
    }
}

TEST(DamageMaterial, ConsistentTangentMatchesFiniteDifferences) {
    std::mt19937_64 rng(77);
    for (int ns : {3, 6}) {
        const auto p = DamageParams::from_material(model_b_matrix(), ns);
        int checked = 0;
        for (int t = 0; t < 200 && checked < 50; ++t) {
            const VoigtVector eps = random_strain(rng, ns, 0.03);
            DamageState st = virgin_state(p);
            // Committed history below the current tau: loading branch.
            const double tau = tau_epsilon(eps, p);
            if (tau < 1.2 * p.r0) continue;
            st.r = std::max(p.r0, 0.8 * tau);
            const auto resp = update_state(eps, st, p);
            ASSERT_TRUE(resp.loading);
            VoigtMatrix fd(ns, ns);
            const double h = 1e-7 * eps.norm();
            for (int k = 0; k < ns; ++k) {
                VoigtVector ep = eps, em = eps;
                ep(k) += h;
                em(k) -= h;
                fd.col(k) = (update_state(ep, st, p).stress - update_state(em, st, p).stress) / (2 * h);
            }
            EXPECT_LE((resp.tangent - fd).norm(), 1e-5 * fd.norm());
            ++checked;
        }
        EXPECT_GT(checked, 20);
    }
}
