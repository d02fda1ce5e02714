#pragma once

// POD bases for the strain fluctuation (elastic block first), the free energy
// and the internal variable.

#include "hyperfe2/common.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <string>
#include <vector>

namespace hyperfe2 {

inline constexpr double kRankTolerance = 1e-10;

struct PodResult {
    Matrix basis;             // orthonormal columns
    Vector singular_values;   // all singular values, descending
};

namespace detail {

// Thin SVD (U, s) of a tall or wide matrix. Tall inputs go through a Householder
// QR first so the SVD runs on the small triangular factor.
inline void thin_svd(const Matrix& x, Matrix& u, Vector& s) {
    if (x.rows() > 2 * x.cols()) {
        Eigen::HouseholderQR<Matrix> qr(x);
        const Eigen::Index n = x.cols();
        const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
        Eigen::BDCSVD<Matrix> svd(r, Eigen::ComputeThinU);
        s = svd.singularValues();
        u = Matrix::Zero(x.rows(), n);
        u.topRows(n) = svd.matrixU();
        u.applyOnTheLeft(qr.householderQ());
        return;
    }
    Eigen::BDCSVD<Matrix> svd(x, Eigen::ComputeThinU);
    s = svd.singularValues();
    u = svd.matrixU();
}

inline int numerical_rank(const Vector& s, double rel_tol = kRankTolerance) {
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    int k = 0;
    while (k < s.size() && s(k) > rel_tol * s(0)) ++k;
    return k;
}

}  // namespace detail

// Leading n_modes left singular vectors, capped at the numerical rank. n_modes < 0
// keeps the full numerical rank.
inline PodResult pod(const Matrix& x, int n_modes = -1) {
    PodResult out;
    if (x.size() == 0 || x.cwiseAbs().maxCoeff() == 0.0) {
        out.basis.resize(x.rows(), 0);
        out.singular_values.resize(0);
        return out;
    }
    Matrix u;
    detail::thin_svd(x, u, out.singular_values);
    const int rank = detail::numerical_rank(out.singular_values);
    if (n_modes > std::min<Eigen::Index>(x.rows(), x.cols()))
        throw ConfigError("pod: n_modes exceeds min(rows, cols)");
    const int k = n_modes < 0 ? rank : std::min(n_modes, rank);
    out.basis = u.leftCols(k);
    return out;
}

// Smallest k with sum_{i>k} s_i^2 / sum s_i^2 <= energy_tol.
inline PodResult pod_energy(const Matrix& x, double energy_tol) {
    PodResult full = pod(x, -1);
    const Vector& s = full.singular_values;
    const double total = s.squaredNorm();
    if (total == 0.0) return full;
    double tail = total;
    int k = 0;
    while (k < full.basis.cols() && tail / total > energy_tol) {
        tail -= s(k) * s(k);
        ++k;
    }
    full.basis = full.basis.leftCols(k).eval();
    return full;
}

struct StrainBasis {
    Matrix modes;  // n_sigma*N_gp x (n_elastic + n_inelastic)
    int n_elastic = 0;
    int n_inelastic = 0;
    Vector elastic_singular_values;
    Vector inelastic_singular_values;
    std::vector<std::string> warnings;

    int n_modes() const { return n_elastic + n_inelastic; }

    // Leading n_total modes; the elastic block is always kept whole.
    StrainBasis truncated(int n_total) const {
        if (n_total < n_elastic) throw ConfigError("strain basis cannot drop elastic modes");
        if (n_total > n_modes()) throw ConfigError("strain basis has only " + std::to_string(n_modes()) + " modes");
        StrainBasis out = *this;
        out.modes = modes.leftCols(n_total);
        out.n_inelastic = n_total - n_elastic;
        return out;
    }
};

inline StrainBasis build_strain_basis(const Matrix& elastic, const Matrix& inelastic, int n_i) {
    if (elastic.cols() == 0) throw ConfigError("strain basis needs elastic snapshots");
    StrainBasis out;
    const PodResult pe = pod(elastic, -1);
    out.n_elastic = static_cast<int>(pe.basis.cols());
    out.elastic_singular_values = pe.singular_values;
    if (n_i <= 0 || inelastic.cols() == 0) {
        if (n_i > 0) out.warnings.push_back("no inelastic snapshots; basis is elastic-only");
        out.modes = pe.basis;
        return out;
    }
    const Matrix projected = inelastic - pe.basis * (pe.basis.transpose() * inelastic);
    const PodResult pi = pod(projected, -1);
    out.inelastic_singular_values = pi.singular_values;
    int k = static_cast<int>(pi.basis.cols());
    if (n_i > k)
        out.warnings.push_back("requested " + std::to_string(n_i) + " inelastic modes, rank is " + std::to_string(k));
    k = std::min(k, n_i);
    Matrix joint(elastic.rows(), out.n_elastic + k);
    joint << pe.basis, pi.basis.leftCols(k);
    // Re-orthonormalize in column order so the elastic span is untouched.
    Eigen::HouseholderQR<Matrix> qr(joint);
    Matrix q = Matrix::Identity(joint.rows(), joint.cols());
    q.applyOnTheLeft(qr.householderQ());
    // Fix signs so each column keeps the orientation of its POD source.
    for (Eigen::Index c = 0; c < q.cols(); ++c)
        if (q.col(c).dot(joint.col(c)) < 0.0) q.col(c) = -q.col(c);
    out.modes = q;
    out.n_inelastic = k;
    return out;
}

struct EnergyBasis {
    Matrix modes;  // N_gp x N_phi, sqrt(w)-weighted
    Vector singular_values;
    int n_modes() const { return static_cast<int>(modes.cols()); }
};

inline EnergyBasis build_energy_basis(const Matrix& energy_snapshots, int n_phi) {
    const PodResult p = pod(energy_snapshots, std::min<int>(n_phi, std::min(energy_snapshots.rows(), energy_snapshots.cols())));
    return {p.basis, p.singular_values};
}

struct InternalVarBasis {
    Matrix modes;  // N_gp x n_r, sqrt(w)-weighted, centered on r0
    Vector singular_values;
    int n_modes() const { return static_cast<int>(modes.cols()); }
};

// Columns are centered on the weighted r0 field before the POD.
inline InternalVarBasis build_internal_basis(const Matrix& internal_snapshots, const Vector& weighted_r0, int n_r) {
    const Matrix centered = internal_snapshots.colwise() - weighted_r0;
    const PodResult p = pod(centered, std::min<int>(n_r, std::min(centered.rows(), centered.cols())));
    return {p.basis, p.singular_values};
}

}  // namespace hyperfe2
