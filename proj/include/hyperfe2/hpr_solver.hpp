#pragma once

// Online hyper-reduced micro solver.
//
// The fluctuation strain is eps~ = psi c, with psi the unweighted strain modes,
// and the equilibrium integral is evaluated with the cubature rule:
//
//   R(c)  = sum_j w_j psi_j^T sigma_j + K_c c + F_c eps
//   sigma = (sum_j w_j sigma_j + S_c eps + G_c c) / |Omega|
//
// K_c, F_c, S_c, G_c are elastic consistency terms: the difference between the
// linear-elastic operators integrated exactly (full Gauss, precomputed per phase
// and split into lambda and mu parts) and the same operators on the cubature
// rule. By default K_c and G_c act on the elastic-mode coefficients only, which
// makes the elastic regime exact while the inelastic block stays a pure cubature
// sum. With the full Gauss rule every consistency term vanishes (the ROM).
//
// The rule itself integrates, besides the energy modes and the volume, the
// elastic localization fields sqrt(w) psi^T T and sqrt(w) T, T = C (I + psi_e A),
// A = -K_ee^-1 F_e. A budget of N_r points then holds N_phi + 1 + n_c rows with
// n_c = n_sigma (n_modes + n_sigma).

#include "hyperfe2/common.hpp"
#include "hyperfe2/cubature.hpp"
#include "hyperfe2/damage_material.hpp"
#include "hyperfe2/rve_model.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace hyperfe2 {

// Per-phase integrals of the strain modes, independent of material constants.
struct PhaseModeIntegrals {
    Matrix k_lambda;  // int psi^T m m^T psi    (n_eps x n_eps)
    Matrix k_mu;      // int psi^T D psi
    Matrix f_lambda;  // int psi^T m m^T        (n_eps x n_sigma)
    Matrix f_mu;      // int psi^T D
    double volume = 0.0;
};

struct ReducedOperators {
    int n_sigma = 0;
    int n_modes = 0;
    int n_elastic = 0;  // leading modes spanning the elastic fluctuations
    double volume = 0.0;
    std::vector<int> points;     // global Gauss indices
    std::vector<double> weights;
    std::vector<int> phase;
    std::vector<Matrix> psi;     // n_sigma x n_modes per cubature point (unweighted)
    std::vector<PhaseModeIntegrals> phases;

    int n_points() const { return static_cast<int>(points.size()); }
};

// modes: sqrt(w)-weighted strain basis (n_sigma*N_gp x n_modes).
inline std::vector<PhaseModeIntegrals> phase_mode_integrals(const RveMesh& mesh, const Matrix& modes) {
    const int ns = mesh.n_sigma();
    const auto n = modes.cols();
    if (modes.rows() != static_cast<Eigen::Index>(ns) * mesh.n_gauss())
        throw ConfigError("strain modes do not match the mesh");
    std::vector<PhaseModeIntegrals> out(mesh.n_phases());
    for (auto& p : out) {
        p.k_lambda = Matrix::Zero(n, n);
        p.k_mu = Matrix::Zero(n, n);
        p.f_lambda = Matrix::Zero(n, ns);
        p.f_mu = Matrix::Zero(n, ns);
    }
    const VoigtVector m = voigt_identity(ns);
    const VoigtVector dvec = voigt_shear_metric(ns).diagonal();
    // Accumulate per phase via row blocks: trace rows and D-scaled rows.
    std::vector<Matrix> trace_rows(mesh.n_phases()), metric_rows(mesh.n_phases());
    std::vector<int> count(mesh.n_phases(), 0);
    for (const auto& gp : mesh.gauss_points) ++count[gp.phase];
    for (int p = 0; p < mesh.n_phases(); ++p) {
        trace_rows[p].resize(count[p], n);
        metric_rows[p].resize(static_cast<Eigen::Index>(count[p]) * ns, n);
        out[p].volume = mesh.phase_volume(p);
    }
    std::fill(count.begin(), count.end(), 0);
    for (const auto& gp : mesh.gauss_points) {
        const int p = gp.phase;
        const auto block = modes.middleRows(static_cast<Eigen::Index>(gp.index) * ns, ns);  // sqrt(w) psi
        const double sw = std::sqrt(gp.weight);
        const int k = count[p]++;
        trace_rows[p].row(k) = m.transpose() * block;
        for (int s = 0; s < ns; ++s)
            metric_rows[p].row(static_cast<Eigen::Index>(k) * ns + s) = std::sqrt(dvec(s)) * block.row(s);
        // f terms: w psi^T X = sqrt(w) * (sqrt(w) psi)^T X
        out[p].f_lambda.noalias() += sw * (block.transpose() * m) * m.transpose();
        out[p].f_mu.noalias() += sw * block.transpose() * dvec.asDiagonal();
    }
    for (int p = 0; p < mesh.n_phases(); ++p) {
        out[p].k_lambda.noalias() = trace_rows[p].transpose() * trace_rows[p];
        out[p].k_mu.noalias() = metric_rows[p].transpose() * metric_rows[p];
    }
    return out;
}

inline ReducedOperators make_reduced_operators(const RveMesh& mesh, const Matrix& modes, const CubatureRule& rule,
                                               int n_elastic) {
    ReducedOperators ops;
    ops.n_sigma = mesh.n_sigma();
    ops.n_modes = static_cast<int>(modes.cols());
    if (n_elastic < 0 || n_elastic > ops.n_modes) throw ConfigError("n_elastic out of range");
    ops.n_elastic = n_elastic;
    ops.volume = mesh.volume;
    ops.phases = phase_mode_integrals(mesh, modes);
    for (int k = 0; k < rule.size(); ++k) {
        const int g = rule.points[k];
        if (g < 0 || g >= mesh.n_gauss()) throw ConfigError("cubature point index out of range");
        if (!(rule.weights(k) > 0.0)) throw ConfigError("cubature weights must be positive");
        const auto& gp = mesh.gauss_points[g];
        ops.points.push_back(g);
        ops.weights.push_back(rule.weights(k));
        ops.phase.push_back(gp.phase);
        ops.psi.push_back(modes.middleRows(static_cast<Eigen::Index>(g) * ops.n_sigma, ops.n_sigma) /
                          std::sqrt(gp.weight));
    }
    return ops;
}

// Integrands of the linear-elastic reduced problem along its own solution:
// with the elastic localization L = I + psi_e A (A from the exact elastic solve
// on the elastic modes) and T = C L, the columns are sqrt(w) * (psi^T T) and
// sqrt(w) * T, one per matrix entry. A rule that integrates them reproduces the
// exact elastic residual rows and homogenized stress.
inline Matrix elastic_localization_fields(const RveMesh& mesh, const std::vector<PhaseMaterial>& materials,
                                          const Matrix& modes, int n_elastic) {
    const int ns = mesh.n_sigma();
    const auto n = modes.cols();
    if (static_cast<int>(materials.size()) != mesh.n_phases()) throw ConfigError("material table does not match mesh");
    if (n_elastic < 0 || n_elastic > n) throw ConfigError("n_elastic out of range");
    std::vector<VoigtMatrix> cmat;
    for (const auto& m : materials) cmat.push_back(isotropic_elasticity(m.young_modulus, m.poisson_ratio, ns));
    Matrix a = Matrix::Zero(n_elastic, ns);
    if (n_elastic > 0) {
        const auto integrals = phase_mode_integrals(mesh, modes.leftCols(n_elastic));
        Matrix k = Matrix::Zero(n_elastic, n_elastic), f = Matrix::Zero(n_elastic, ns);
        for (int p = 0; p < mesh.n_phases(); ++p) {
            const auto lame = lame_from_engineering(materials[p].young_modulus, materials[p].poisson_ratio);
            k += lame.lambda * integrals[p].k_lambda + lame.mu * integrals[p].k_mu;
            f += lame.lambda * integrals[p].f_lambda + lame.mu * integrals[p].f_mu;
        }
        a = -k.ldlt().solve(f);
    }
    Matrix out(mesh.n_gauss(), n * ns + ns * ns);
    for (const auto& gp : mesh.gauss_points) {
        const double sw = std::sqrt(gp.weight);
        const Matrix psi = modes.middleRows(static_cast<Eigen::Index>(gp.index) * ns, ns) / sw;
        Matrix l = Matrix::Identity(ns, ns);
        if (n_elastic > 0) l.noalias() += psi.leftCols(n_elastic) * a;
        const Matrix t = Matrix(cmat[gp.phase]) * l;
        const Matrix pt = psi.transpose() * t;
        Eigen::Index col = 0;
        for (Eigen::Index k = 0; k < n; ++k)
            for (int m = 0; m < ns; ++m) out(gp.index, col++) = sw * pt(k, m);
        for (int i = 0; i < ns; ++i)
            for (int m = 0; m < ns; ++m) out(gp.index, col++) = sw * t(i, m);
    }
    return out;
}

// Cubature rule for a given strain basis: energy modes plus the elastic
// localization fields, within a budget of n_points points.
inline CubatureRule select_reduced_rule(const RveMesh& mesh, const std::vector<PhaseMaterial>& materials,
                                        const Matrix& modes, int n_elastic, const Matrix& energy_modes,
                                        int n_points) {
    return select_cubature_constrained(elastic_localization_fields(mesh, materials, modes, n_elastic), energy_modes,
                                       mesh.gauss_weights(), n_points);
}

struct ReducedState {
    Vector c;
    Vector r;  // per cubature point (0 on elastic phases)
};

struct ReducedSolution {
    VoigtVector macro_strain;
    Vector c;
    VoigtVector homogenized_stress;
    Vector r;
    Vector damage;
    int iterations = 0;
    double residual = 0.0;

    ReducedState state() const { return {c, r}; }
    double max_damage() const { return damage.size() ? damage.maxCoeff() : 0.0; }
};

enum class ElasticConsistency {
    none,           // pure cubature
    elastic_modes,  // exact elastic operators on the elastic-mode columns
    all_modes,      // exact elastic operators on every column
};

struct HprOptions {
    double relative_tolerance = 1e-8;
    double absolute_tolerance = 1e-14;
    int max_iterations = 25;
    ElasticConsistency consistency = ElasticConsistency::elastic_modes;
};

class HprSolver {
public:
    HprSolver(ReducedOperators ops, const std::vector<PhaseMaterial>& materials, HprOptions options = {})
        : ops_(std::move(ops)), options_(options) {
        if (static_cast<int>(materials.size()) != static_cast<int>(ops_.phases.size()))
            throw ConfigError("material table does not match the reduced operators");
        const int ns = ops_.n_sigma, n = ops_.n_modes;
        Matrix k_el = Matrix::Zero(n, n), f_el = Matrix::Zero(n, ns), s_el = Matrix::Zero(ns, ns);
        for (std::size_t p = 0; p < materials.size(); ++p) {
            params_.push_back(DamageParams::from_material(materials[p], ns));
            const auto& l = params_.back().lame;
            const auto& pi = ops_.phases[p];
            k_el += l.lambda * pi.k_lambda + l.mu * pi.k_mu;
            f_el += l.lambda * pi.f_lambda + l.mu * pi.f_mu;
            s_el += pi.volume * Matrix(params_.back().elasticity);
        }
        k_elastic_ = k_el;
        // Subtract the cubature images of the same operators.
        for (int j = 0; j < ops_.n_points(); ++j) {
            const Matrix c = params_[ops_.phase[j]].elasticity;
            const double w = ops_.weights[j];
            const Matrix cpsi = c * ops_.psi[j];
            k_el.noalias() -= w * ops_.psi[j].transpose() * cpsi;
            f_el.noalias() -= w * ops_.psi[j].transpose() * c;
            s_el -= w * c;
        }
        k_c_ = Matrix::Zero(n, n);
        g_c_ = Matrix::Zero(ns, n);
        f_c_ = Matrix::Zero(n, ns);
        s_c_ = Matrix::Zero(ns, ns);
        if (options_.consistency != ElasticConsistency::none) {
            const int cols = options_.consistency == ElasticConsistency::all_modes ? n : ops_.n_elastic;
            k_c_.leftCols(cols) = k_el.leftCols(cols);
            g_c_.leftCols(cols) = f_el.transpose().leftCols(cols);
            f_c_ = f_el;
            s_c_ = s_el;
        }
    }

    const ReducedOperators& operators() const { return ops_; }
    const HprOptions& options() const { return options_; }
    int n_modes() const { return ops_.n_modes; }
    int n_points() const { return ops_.n_points(); }
    // Exactly integrated elastic stiffness of the strain modes.
    const Matrix& elastic_stiffness() const { return k_elastic_; }

    ReducedState virgin_state() const {
        ReducedState s;
        s.c = Vector::Zero(ops_.n_modes);
        s.r.resize(ops_.n_points());
        for (int j = 0; j < ops_.n_points(); ++j) s.r(j) = hyperfe2::virgin_state(params_[ops_.phase[j]]).r;
        return s;
    }

    // Trial residual from the committed history; nothing is stored.
    Vector residual(const Vector& c, const VoigtVector& eps, const ReducedState& committed) const {
        return evaluate(c, eps, committed, false).residual;
    }

    // Homogenized stress of a trial c from the committed history.
    VoigtVector trial_stress(const Vector& c, const VoigtVector& eps, const ReducedState& committed) const {
        return evaluate(c, eps, committed, true).stress;
    }

    ReducedSolution solve_increment(const VoigtVector& eps, const ReducedState& committed) const {
        return solve_increment(eps, committed, options_);
    }

    ReducedSolution solve_increment(const VoigtVector& eps, const ReducedState& committed,
                                    const HprOptions& opts) const {
        if (eps.size() != ops_.n_sigma) throw ConfigError("macro strain has wrong Voigt size");
        if (!eps.allFinite()) throw DomainError("macro strain has non-finite entries");
        if (committed.r.size() != ops_.n_points()) throw ConfigError("reduced state has wrong size");
        Vector c = committed.c.size() == ops_.n_modes ? committed.c : Vector::Zero(ops_.n_modes);
        int it = 0;
        Evaluation e;
        for (;; ++it) {
            e = evaluate(c, eps, committed, true);
            const double norm = e.residual.norm();
            if (norm <= opts.relative_tolerance * e.scale || norm <= opts.absolute_tolerance) break;
            if (it >= opts.max_iterations)
                throw NonConvergenceError("reduced Newton did not converge in " +
                                              std::to_string(opts.max_iterations) + " iterations",
                                          norm);
            Eigen::PartialPivLU<Matrix> lu(e.tangent);
            const Vector dc = lu.solve(-e.residual);
            if (!dc.allFinite()) throw ConstraintError("reduced stiffness is singular");
            double step = 1.0;
            Vector trial = c + dc;
            for (int ls = 0; ls < 4; ++ls) {
                if (residual(trial, eps, committed).norm() <= norm || ls == 3) break;
                step *= 0.5;
                trial = c + step * dc;
            }
            c = trial;
        }
        ReducedSolution sol;
        sol.macro_strain = eps;
        sol.c = c;
        sol.homogenized_stress = e.stress;
        sol.r = e.r;
        sol.damage = e.damage;
        sol.iterations = it;
        sol.residual = e.residual.norm();
        return sol;
    }

    // Static condensation C = (S - G K^-1 F) / |Omega| at the converged coefficients.
    Matrix homogenized_tangent(const ReducedSolution& sol, const ReducedState& committed) const {
        const int ns = ops_.n_sigma, n = ops_.n_modes;
        Matrix s = s_c_, g = g_c_, f = f_c_, k = k_c_;
        for (int j = 0; j < ops_.n_points(); ++j) {
            const auto& p = params_[ops_.phase[j]];
            const VoigtVector strain = sol.macro_strain + ops_.psi[j] * sol.c;
            const Matrix ct = update_state(strain, {committed.r(j)}, p).tangent;
            const double w = ops_.weights[j];
            const Matrix ctpsi = ct * ops_.psi[j];
            s += w * ct;
            g += w * ctpsi;
            f += w * ops_.psi[j].transpose() * ct;
            k += w * ops_.psi[j].transpose() * ctpsi;
        }
        if (n == 0) return s / ops_.volume;
        Eigen::FullPivLU<Matrix> lu(k);
        if (!lu.isInvertible()) throw TangentError("reduced stiffness is singular");
        const Matrix kf = lu.solve(f);
        Matrix out = (s - g * kf) / ops_.volume;
        if (out.rows() != ns) throw TangentError("tangent has wrong shape");
        return out;
    }

    std::vector<ReducedSolution> run_schedule(const VoigtVector& direction, const std::vector<double>& chis) const {
        std::vector<ReducedSolution> out;
        out.reserve(chis.size());
        ReducedState state = virgin_state();
        for (std::size_t k = 0; k < chis.size(); ++k) {
            try {
                out.push_back(solve_increment(direction * chis[k], state));
            } catch (const NonConvergenceError& e) {
                throw NonConvergenceError("step " + std::to_string(k + 1) + ": " + e.what(), e.last_residual());
            } catch (const Error& e) {
                throw Error("step " + std::to_string(k + 1) + ": " + e.what());
            }
            state = out.back().state();
        }
        return out;
    }

    std::vector<ReducedSolution> run_trajectory(const VoigtVector& direction, double chi_end, int n_steps) const {
        if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
        if (std::abs(direction.norm() - 1.0) > 1e-10) throw ConfigError("trajectory direction must be unit norm");
        std::vector<double> chis(n_steps);
        for (int k = 0; k < n_steps; ++k) chis[k] = chi_end * (k + 1) / n_steps;
        return run_schedule(direction, chis);
    }

private:
    struct Evaluation {
        Vector residual;
        Matrix tangent;
        VoigtVector stress;
        Vector r;
        Vector damage;
        double scale = 0.0;
    };

    Evaluation evaluate(const Vector& c, const VoigtVector& eps, const ReducedState& committed, bool full) const {
        const int ns = ops_.n_sigma;
        Evaluation e;
        Vector internal = Vector::Zero(ops_.n_modes);
        Vector magnitude = Vector::Zero(ops_.n_modes);
        VoigtVector stress_sum = VoigtVector::Zero(ns);
        if (full) {
            e.tangent = k_c_;
            e.r.resize(ops_.n_points());
            e.damage = Vector::Zero(ops_.n_points());
        }
        for (int j = 0; j < ops_.n_points(); ++j) {
            const auto& p = params_[ops_.phase[j]];
            const VoigtVector strain = eps + ops_.psi[j] * c;
            const MaterialResponse resp = update_state(strain, {committed.r(j)}, p);
            const double w = ops_.weights[j];
            const Vector fj = w * (ops_.psi[j].transpose() * resp.stress);
            internal += fj;
            magnitude += fj.cwiseAbs();
            stress_sum += w * resp.stress;
            if (full) {
                e.r(j) = resp.r;
                e.damage(j) = resp.damage;
                e.tangent.noalias() += w * (ops_.psi[j].transpose() * (resp.tangent * ops_.psi[j]));
            }
        }
        const Vector consistency = k_c_ * c + f_c_ * eps;
        e.residual = internal + consistency;
        e.scale = magnitude.norm() + consistency.norm();
        if (full) e.stress = (stress_sum + s_c_ * eps + g_c_ * c) / ops_.volume;
        return e;
    }

    ReducedOperators ops_;
    HprOptions options_;
    std::vector<DamageParams> params_;
    Matrix k_elastic_;
    Matrix k_c_;
    Matrix g_c_;
    Matrix f_c_;
    Matrix s_c_;
};

}  // namespace hyperfe2
