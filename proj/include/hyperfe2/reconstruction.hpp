#pragma once

// Recovery of full-mesh fields from a reduced solution: displacement fluctuation
// by L2 projection of psi c onto B q, internal variable by projection of the
// cubature-point values onto the internal-variable modes, stress from the
// constitutive law with the recovered damage.

#include "hyperfe2/common.hpp"
#include "hyperfe2/cubature.hpp"
#include "hyperfe2/damage_material.hpp"
#include "hyperfe2/hf_solver.hpp"
#include "hyperfe2/rve_model.hpp"

#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <vector>

namespace hyperfe2 {

struct ReconstructionProjectors {
    Matrix d_u;      // n_dofs x n_eps (full nodal layout)
    Matrix d_r;      // n_r x N_r
    Matrix psi_r;    // N_gp x n_r, unweighted internal-variable modes
    Vector r0;       // per gp (0 on elastic phases)
    Vector r0_rule;  // r0 at the cubature points
    Matrix strain_modes;  // unweighted, n_sigma*N_gp x n_eps
    int n_sigma = 0;
};

inline ReconstructionProjectors build_projectors(const RveMesh& mesh, const std::vector<PhaseMaterial>& materials,
                                                 const Matrix& strain_modes, const Matrix& internal_modes,
                                                 const CubatureRule& rule) {
    const int ns = mesh.n_sigma();
    const int ng = mesh.n_gauss();
    const auto n_eps = strain_modes.cols();
    if (strain_modes.rows() != static_cast<Eigen::Index>(ns) * ng || internal_modes.rows() != ng)
        throw ConfigError("reconstruction: bases do not match the mesh");
    std::vector<DamageParams> params;
    for (const auto& m : materials) params.push_back(DamageParams::from_material(m, ns));
    ReconstructionProjectors out;
    out.n_sigma = ns;

    // Displacement projector on the periodic, pinned space.
    const PeriodicConstraintMap map(mesh);
    const int nf = map.n_free();
    const int nd = mesh.element_dofs();
    const int gpe = mesh.gauss_per_element();
    std::vector<Eigen::Triplet<double>> trips;
    Matrix f_u = Matrix::Zero(nf, n_eps);
    out.strain_modes.resize(strain_modes.rows(), n_eps);
    std::vector<int> ef(nd);
    for (int e = 0; e < mesh.n_elements(); ++e) {
        for (int a = 0; a < mesh.nodes_per_element(); ++a)
            for (int c = 0; c < mesh.dim; ++c)
                ef[a * mesh.dim + c] = map.free_index(mesh.elements[e][a] * mesh.dim + c);
        Matrix ke = Matrix::Zero(nd, nd);
        Matrix fe = Matrix::Zero(nd, n_eps);
        for (int l = 0; l < gpe; ++l) {
            const auto& gp = mesh.gauss_points[e * gpe + l];
            const Matrix b = strain_displacement(mesh, gp);
            const Matrix psi = strain_modes.middleRows(static_cast<Eigen::Index>(gp.index) * ns, ns) /
                               std::sqrt(gp.weight);
            out.strain_modes.middleRows(static_cast<Eigen::Index>(gp.index) * ns, ns) = psi;
            ke.noalias() += gp.weight * b.transpose() * b;
            fe.noalias() += gp.weight * b.transpose() * psi;
        }
        for (int i = 0; i < nd; ++i) {
            if (ef[i] < 0) continue;
            f_u.row(ef[i]) += fe.row(i);
            for (int j = 0; j < nd; ++j)
                if (ef[j] >= 0) trips.emplace_back(ef[i], ef[j], ke(i, j));
        }
    }
    Eigen::SparseMatrix<double> k_u(nf, nf);
    k_u.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(k_u);
    if (ldlt.info() != Eigen::Success) throw ConstraintError("reconstruction: K_u is singular");
    const Matrix d_free = ldlt.solve(f_u);
    out.d_u.resize(mesh.n_dofs(), n_eps);
    for (Eigen::Index k = 0; k < n_eps; ++k) out.d_u.col(k) = map.expand(d_free.col(k));

    // Internal-variable projector with the cubature rule as quadrature.
    const auto n_r = internal_modes.cols();
    out.psi_r.resize(ng, n_r);
    out.r0.resize(ng);
    for (const auto& gp : mesh.gauss_points) {
        out.psi_r.row(gp.index) = internal_modes.row(gp.index) / std::sqrt(gp.weight);
        const auto& p = params[gp.phase];
        out.r0(gp.index) = p.inelastic ? p.r0 : 0.0;
    }
    Matrix k_r = Matrix::Zero(n_r, n_r);
    Matrix f_r(n_r, rule.size());
    out.r0_rule.resize(rule.size());
    for (int j = 0; j < rule.size(); ++j) {
        const Vector phi = out.psi_r.row(rule.points[j]).transpose();
        k_r.noalias() += rule.weights(j) * phi * phi.transpose();
        f_r.col(j) = rule.weights(j) * phi;
        out.r0_rule(j) = out.r0(rule.points[j]);
    }
    // Minimum-norm solve keeps the projector defined when N_r < n_r.
    if (n_r == 0) out.d_r.resize(0, rule.size());
    else out.d_r = Eigen::CompleteOrthogonalDecomposition<Matrix>(k_r).solve(f_r);
    return out;
}

inline Vector reconstruct_displacement(const ReconstructionProjectors& proj, const Vector& c) {
    return proj.d_u * c;
}

struct ReconstructedInternal {
    Vector r;       // per gp
    Vector damage;  // per gp, in [0, 1]
};

inline ReconstructedInternal reconstruct_internal_variable(const ReconstructionProjectors& proj,
                                                           const RveMesh& mesh,
                                                           const std::vector<PhaseMaterial>& materials,
                                                           const Vector& r_rule) {
    if (r_rule.size() != proj.d_r.cols()) throw ConfigError("reconstruction: r has wrong size");
    std::vector<DamageParams> params;
    for (const auto& m : materials) params.push_back(DamageParams::from_material(m, proj.n_sigma));
    const Vector cr = proj.d_r * (r_rule - proj.r0_rule);
    ReconstructedInternal out;
    out.r = proj.r0 + proj.psi_r * cr;
    out.damage = Vector::Zero(out.r.size());
    for (const auto& gp : mesh.gauss_points) {
        const auto& p = params[gp.phase];
        const int g = gp.index;
        if (!p.inelastic) {
            out.r(g) = 0.0;
            continue;
        }
        if (out.r(g) <= p.r0) continue;  // below threshold: undamaged
        out.damage(g) = std::clamp(1.0 - hardening_q(out.r(g), p) / out.r(g), 0.0, 1.0);
    }
    return out;
}

// Micro strain and stress at every Gauss point: eps_mu = eps + psi c,
// sigma_mu = (1 - d) C eps_mu.
inline void reconstruct_stress(const ReconstructionProjectors& proj, const RveMesh& mesh,
                               const std::vector<PhaseMaterial>& materials, const VoigtVector& eps,
                               const Vector& c, const Vector& damage, Matrix& strain, Matrix& stress) {
    const int ns = proj.n_sigma;
    const int ng = mesh.n_gauss();
    std::vector<VoigtMatrix> cmat;
    for (const auto& m : materials) cmat.push_back(isotropic_elasticity(m.young_modulus, m.poisson_ratio, ns));
    const Vector fluct = proj.strain_modes * c;
    strain.resize(ns, ng);
    stress.resize(ns, ng);
    for (const auto& gp : mesh.gauss_points) {
        const int g = gp.index;
        const VoigtVector e = eps + fluct.segment(static_cast<Eigen::Index>(g) * ns, ns);
        strain.col(g) = e;
        stress.col(g) = (1.0 - damage(g)) * (cmat[gp.phase] * e);
    }
}

// max over rows (components) of ||a_i - b_i||_1 / ||b_i||_1.
inline double field_error(const Matrix& reconstructed, const Matrix& reference) {
    if (reconstructed.rows() != reference.rows() || reconstructed.cols() != reference.cols())
        throw AlignmentError("field_error: layouts differ");
    double worst = 0.0;
    for (Eigen::Index i = 0; i < reference.rows(); ++i) {
        const double denom = reference.row(i).lpNorm<1>();
        if (denom == 0.0) throw UndefinedErrorMetric("field_error: reference component has zero L1 norm");
        worst = std::max(worst, (reconstructed.row(i) - reference.row(i)).lpNorm<1>() / denom);
    }
    return worst;
}

inline double field_error(const Vector& reconstructed, const Vector& reference) {
    return field_error(Matrix(reconstructed.transpose()), Matrix(reference.transpose()));
}

}  // namespace hyperfe2
