#pragma once

// Isotropic damage with a traction-only elastic domain and bilinear hardening.
//
//   psi   = (1 - d) psi0,          psi0 = 1/2 eps : C : eps
//   d     = 1 - q(r) / r
//   sigma = (q / r) C : eps
//   g     = tau(eps) - r,          tau = sqrt(sigma_bar+ : eps)
//   r0    = sigma_e / sqrt(E),     q(r0) = r0
//   KKT:  r_dot >= 0, g <= 0, r_dot g = 0  (closed form: r = max(r_n, tau))

#include "hyperfe2/common.hpp"
#include "hyperfe2/rve_model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace hyperfe2 {

struct DamageParams {
    VoigtMatrix elasticity;
    LameParameters lame{0.0, 0.0};
    double r0 = 0.0;
    double r_inf = 0.0;  // H1 -> H2 breakpoint
    double h1 = 0.0;
    double h2 = 0.0;
    bool inelastic = false;

    int n_sigma() const { return static_cast<int>(elasticity.rows()); }

    static DamageParams from_material(const PhaseMaterial& m, int n_sigma) {
        m.validate();
        DamageParams p;
        p.lame = lame_from_engineering(m.young_modulus, m.poisson_ratio);
        p.elasticity = isotropic_elasticity(p.lame, n_sigma);
        p.inelastic = m.is_inelastic;
        if (p.inelastic) {
            const double sq = std::sqrt(m.young_modulus);
            p.r0 = m.elastic_threshold / sq;
            p.r_inf = m.infinity_threshold / sq;
            p.h1 = m.hardening_h1;
            p.h2 = m.hardening_h2;
        }
        return p;
    }
};

struct DamageState {
    double r = 0.0;
};

inline DamageState virgin_state(const DamageParams& p) { return {p.inelastic ? p.r0 : 0.0}; }

struct MaterialResponse {
    VoigtVector stress;
    double damage = 0.0;
    VoigtMatrix tangent;
    double free_energy = 0.0;
    double r = 0.0;
    bool loading = false;
};

// Positive part of the effective stress and the strain norm it induces.
struct PositiveSplit {
    double tau_squared = 0.0;          // sigma_bar+ : eps
    VoigtVector positive_stress;       // sigma_bar+ (Voigt, tensor components)
    VoigtVector tau_squared_gradient;  // d(tau^2)/d(eps) in engineering Voigt
};

namespace detail {

// sigma_bar = 2 mu eps + lambda tr(eps) I shares eigenvectors with eps, so the
// split is done on the strain principal values e_k with s_k = 2 mu e_k + lambda tr.
// In plane strain e_zz = 0 contributes nothing to sigma_bar+ : eps, so the
// in-plane 2x2 problem suffices.
template <int N>
PositiveSplit positive_split_impl(const Eigen::Matrix<double, N, N>& eps, const LameParameters& lame,
                                  int n_sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es;
    if constexpr (N == 2)
        es.computeDirect(eps);
    else
        es.compute(eps);
    const auto& e = es.eigenvalues();
    const auto& v = es.eigenvectors();
    const double tr = e.sum();
    Eigen::Matrix<double, N, 1> s, g;
    double heaviside_sum = 0.0;
    double f = 0.0;
    for (int k = 0; k < N; ++k) {
        s(k) = 2.0 * lame.mu * e(k) + lame.lambda * tr;
        if (s(k) > 0.0) {
            f += s(k) * e(k);
            heaviside_sum += e(k);
        }
    }
    for (int k = 0; k < N; ++k) {
        const double pos = s(k) > 0.0 ? 1.0 : 0.0;
        g(k) = std::max(s(k), 0.0) + 2.0 * lame.mu * pos * e(k) + lame.lambda * heaviside_sum;
    }
    Eigen::Matrix<double, N, N> plus = Eigen::Matrix<double, N, N>::Zero();
    Eigen::Matrix<double, N, N> grad = Eigen::Matrix<double, N, N>::Zero();
    for (int k = 0; k < N; ++k) {
        const auto vk = v.col(k);
        plus += std::max(s(k), 0.0) * vk * vk.transpose();
        grad += g(k) * vk * vk.transpose();
    }
    Tensor3 plus3 = Tensor3::Zero(), grad3 = Tensor3::Zero();
    plus3.topLeftCorner(N, N) = plus;
    grad3.topLeftCorner(N, N) = grad;
    PositiveSplit out;
    out.tau_squared = std::max(f, 0.0);
    out.positive_stress = tensor_to_stress(plus3, n_sigma);
    // d f / d gamma_ij = G_ij for engineering shear, so tensor components carry over.
    out.tau_squared_gradient = tensor_to_stress(grad3, n_sigma);
    return out;
}

}  // namespace detail

inline PositiveSplit positive_split(const VoigtVector& strain, const DamageParams& params) {
    const Tensor3 t = strain_to_tensor(strain);
    if (strain.size() == 3)
        return detail::positive_split_impl<2>(t.topLeftCorner<2, 2>(), params.lame, 3);
    return detail::positive_split_impl<3>(t, params.lame, 6);
}

inline double tau_epsilon(const VoigtVector& strain, const DamageParams& params) {
    return std::sqrt(positive_split(strain, params).tau_squared);
}

inline double hardening_q(double r, const DamageParams& p) {
    if (r < p.r0 * (1.0 - 1e-14))
        throw DomainError("hardening_q: r below the initial threshold r0");
    if (r <= p.r_inf) return p.r0 + p.h1 * (r - p.r0);
    return p.r0 + p.h1 * (p.r_inf - p.r0) + p.h2 * (r - p.r_inf);
}

inline double hardening_slope(double r, const DamageParams& p) { return r <= p.r_inf ? p.h1 : p.h2; }

inline double damage_from_r(double r, const DamageParams& p) {
    if (!p.inelastic) return 0.0;
    return 1.0 - hardening_q(r, p) / r;
}

inline MaterialResponse update_state(const VoigtVector& strain, const DamageState& state,
                                     const DamageParams& params) {
    MaterialResponse out;
    const VoigtMatrix& c = params.elasticity;
    const VoigtVector eff = c * strain;
    const double psi0 = 0.5 * strain.dot(eff);
    if (!params.inelastic) {
        out.stress = eff;
        out.tangent = c;
        out.free_energy = psi0;
        out.r = state.r;
        return out;
    }
    const PositiveSplit split = positive_split(strain, params);
    const double tau = std::sqrt(split.tau_squared);
    const double r_prev = std::max(state.r, params.r0);
    out.loading = tau > r_prev;
    const double r = out.loading ? tau : r_prev;
    const double q = hardening_q(r, params);
    const double ratio = q / r;
    out.r = r;
    out.damage = 1.0 - ratio;
    out.stress = ratio * eff;
    out.free_energy = ratio * psi0;
    out.tangent = ratio * c;
    if (out.loading) {
        // d(q/r)/dr * sigma_bar (x) d(tau)/d(eps)
        const double dratio = (hardening_slope(r, params) * r - q) / (r * r);
        out.tangent += (dratio / (2.0 * tau)) * eff * split.tau_squared_gradient.transpose();
    }
    return out;
}

}  // namespace hyperfe2
