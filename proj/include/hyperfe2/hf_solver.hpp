#pragma once

// High-fidelity periodic micro problem in displacement form.
//
// u_mu = eps . x + u~, with u~ periodic and one node pinned. Newton on
// R(a) = sum_gp w B^T sigma(eps + B u~, r_n) = 0 over the free fluctuation DOFs.

#include "hyperfe2/common.hpp"
#include "hyperfe2/damage_material.hpp"
#include "hyperfe2/rve_model.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace hyperfe2 {

using MacroStrain = VoigtVector;

// Expansion operator from free DOFs to full nodal DOFs: slave = master, and the
// pinned node's translations are fixed to zero.
class PeriodicConstraintMap {
public:
    explicit PeriodicConstraintMap(const RveMesh& mesh, int pinned_node = 0) : dim_(mesh.dim) {
        std::vector<int> master(mesh.n_nodes());
        for (int n = 0; n < mesh.n_nodes(); ++n) master[n] = n;
        for (const auto& [slave, m] : mesh.periodic_pairs) master[slave] = m;
        const int pinned = master[pinned_node];
        std::vector<int> rep_id(mesh.n_nodes(), -1);
        int next = 0;
        for (int n = 0; n < mesh.n_nodes(); ++n) {
            const int m = master[n];
            if (m == pinned || rep_id[m] >= 0) continue;
            rep_id[m] = next++;
        }
        map_.assign(mesh.n_dofs(), -1);
        for (int n = 0; n < mesh.n_nodes(); ++n) {
            const int id = rep_id[master[n]];
            if (id < 0) continue;
            for (int c = 0; c < dim_; ++c) map_[n * dim_ + c] = id * dim_ + c;
        }
        n_free_ = next * dim_;
    }

    int n_free() const { return n_free_; }
    int n_full() const { return static_cast<int>(map_.size()); }
    int free_index(int full_dof) const { return map_[full_dof]; }

    Vector expand(const Vector& free) const {
        Vector full = Vector::Zero(n_full());
        for (int i = 0; i < n_full(); ++i)
            if (map_[i] >= 0) full(i) = free(map_[i]);
        return full;
    }

    // Transpose of expand: accumulates a full nodal vector onto free DOFs.
    Vector restrict_sum(const Vector& full) const {
        Vector free = Vector::Zero(n_free_);
        for (int i = 0; i < n_full(); ++i)
            if (map_[i] >= 0) free(map_[i]) += full(i);
        return free;
    }

private:
    int dim_;
    int n_free_ = 0;
    std::vector<int> map_;
};

struct HfOptions {
    double relative_tolerance = 1e-8;
    double absolute_tolerance = 1e-12;
    int max_iterations = 25;
};

struct HfSolution {
    VoigtVector macro_strain;
    Vector fluctuation;  // full nodal vector (node-major)
    Matrix strain;       // n_sigma x N_gp micro strain
    Matrix stress;       // n_sigma x N_gp micro stress
    Vector r;
    Vector damage;
    Vector free_energy;
    VoigtVector homogenized_stress;
    int iterations = 0;
    double residual = 0.0;

    std::vector<DamageState> states() const {
        std::vector<DamageState> s(r.size());
        for (Eigen::Index i = 0; i < r.size(); ++i) s[i].r = r(i);
        return s;
    }
    double max_damage() const { return damage.size() ? damage.maxCoeff() : 0.0; }
};

// sigma = (1/|Omega|) sum_gp w sigma_mu.
inline VoigtVector homogenize_stress(const RveMesh& mesh, const Matrix& micro_stress) {
    return (micro_stress * mesh.gauss_weights()) / mesh.volume;
}

inline VoigtVector homogenize_stress(const RveMesh& mesh, const HfSolution& sol) {
    return homogenize_stress(mesh, sol.stress);
}

class HfSolver {
public:
    HfSolver(const RveMesh& mesh, std::vector<PhaseMaterial> materials, HfOptions options = {})
        : mesh_(mesh), materials_(std::move(materials)), options_(options), constraints_(mesh) {
        if (static_cast<int>(materials_.size()) != mesh_.n_phases())
            throw ConfigError("material table does not match mesh phases");
        for (const auto& m : materials_) params_.push_back(DamageParams::from_material(m, mesh_.n_sigma()));
        b_.reserve(mesh_.n_gauss());
        for (const auto& gp : mesh_.gauss_points) b_.push_back(strain_displacement(mesh_, gp));
        build_pattern();
    }

    const RveMesh& mesh() const { return mesh_; }
    const std::vector<PhaseMaterial>& materials() const { return materials_; }
    const std::vector<DamageParams>& params() const { return params_; }
    const PeriodicConstraintMap& constraints() const { return constraints_; }
    const HfOptions& options() const { return options_; }
    const BMatrix& b_matrix(int gp) const { return b_[gp]; }

    std::vector<DamageState> virgin_states() const {
        std::vector<DamageState> s(mesh_.n_gauss());
        for (const auto& gp : mesh_.gauss_points) s[gp.index] = virgin_state(params_[gp.phase]);
        return s;
    }

    // Newton solve of one increment from the committed history `previous`.
    HfSolution solve_increment(const MacroStrain& eps, const std::vector<DamageState>& previous,
                               const Vector* initial_fluctuation = nullptr) {
        return solve_increment(eps, previous, initial_fluctuation, options_);
    }

    HfSolution solve_increment(const MacroStrain& eps, const std::vector<DamageState>& previous,
                               const Vector* initial_fluctuation, const HfOptions& opts) {
        if (eps.size() != mesh_.n_sigma()) throw ConfigError("macro strain has wrong Voigt size");
        if (static_cast<int>(previous.size()) != mesh_.n_gauss())
            throw ConfigError("state vector does not match Gauss point count");
        if (!eps.allFinite()) throw DomainError("macro strain has non-finite entries");
        Vector a = Vector::Zero(constraints_.n_free());
        if (initial_fluctuation) {
            // Gather master values from a full nodal vector.
            for (int i = 0; i < constraints_.n_full(); ++i) {
                const int f = constraints_.free_index(i);
                if (f >= 0) a(f) = (*initial_fluctuation)(i);
            }
        }
        Vector residual;
        double scale = 0.0;
        double norm = 0.0;
        int it = 0;
        for (;; ++it) {
            evaluate(eps, previous, a, residual, scale, true);
            norm = residual.norm();
            if (norm <= opts.relative_tolerance * scale || norm <= opts.absolute_tolerance) break;
            if (it >= opts.max_iterations)
                throw NonConvergenceError("HF Newton did not converge in " +
                                              std::to_string(opts.max_iterations) +
                                              " iterations (residual " + std::to_string(norm) + ")",
                                          norm);
            lu_.factorize(stiffness_);
            if (lu_.info() != Eigen::Success) throw ConstraintError("HF stiffness is singular");
            const Vector da = lu_.solve(-residual);
            // Backtracking on the residual norm.
            double step = 1.0;
            Vector trial = a + da;
            for (int ls = 0; ls < 4; ++ls) {
                Vector r_trial;
                double s_trial = 0.0;
                evaluate(eps, previous, trial, r_trial, s_trial, false);
                if (r_trial.norm() <= norm || ls == 3) break;
                step *= 0.5;
                trial = a + step * da;
            }
            a = trial;
        }
        HfSolution sol = collect(eps, previous, a);
        sol.iterations = it;
        sol.residual = norm;
        return sol;
    }

    std::vector<HfSolution> run_schedule(const MacroStrain& direction, const std::vector<double>& chis) {
        std::vector<HfSolution> out;
        out.reserve(chis.size());
        std::vector<DamageState> states = virgin_states();
        Vector guess = Vector::Zero(mesh_.n_dofs());
        for (std::size_t k = 0; k < chis.size(); ++k) {
            const MacroStrain eps = direction * chis[k];
            try {
                out.push_back(solve_increment(eps, states, &guess));
            } catch (const NonConvergenceError& e) {
                throw NonConvergenceError("step " + std::to_string(k + 1) + ": " + e.what(),
                                          e.last_residual());
            } catch (const Error& e) {
                throw Error("step " + std::to_string(k + 1) + ": " + e.what());
            }
            states = out.back().states();
            guess = out.back().fluctuation;
        }
        return out;
    }

    // eps(chi) = direction * chi at chi_end * k / n_steps, k = 1..n_steps.
    std::vector<HfSolution> run_trajectory(const MacroStrain& direction, double chi_end, int n_steps) {
        if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
        if (std::abs(direction.norm() - 1.0) > 1e-10) throw ConfigError("trajectory direction must be unit norm");
        std::vector<double> chis(n_steps);
        for (int k = 0; k < n_steps; ++k) chis[k] = chi_end * (k + 1) / n_steps;
        return run_schedule(direction, chis);
    }

    // d sigma / d eps by central differences (2 n_sigma extra solves from the same history).
    Matrix homogenize_tangent(const MacroStrain& eps, const std::vector<DamageState>& previous,
                              const HfSolution* base = nullptr, double h = 1e-6) {
        const int ns = mesh_.n_sigma();
        HfOptions tight = options_;
        tight.relative_tolerance = 1e-13;
        tight.absolute_tolerance = 1e-15;
        Matrix c(ns, ns);
        const Vector* guess = base ? &base->fluctuation : nullptr;
        for (int k = 0; k < ns; ++k) {
            MacroStrain ep = eps, em = eps;
            ep(k) += h;
            em(k) -= h;
            try {
                const auto sp = solve_increment(ep, previous, guess, tight);
                const auto sm = solve_increment(em, previous, guess, tight);
                c.col(k) = (sp.homogenized_stress - sm.homogenized_stress) / (2.0 * h);
            } catch (const Error& e) {
                throw TangentError(std::string("perturbed solve failed: ") + e.what());
            }
        }
        return c;
    }

private:
    void build_pattern() {
        const int nd = mesh_.element_dofs();
        std::vector<Eigen::Triplet<double>> trips;
        element_free_.resize(mesh_.n_elements());
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            auto& ef = element_free_[e];
            ef.resize(nd);
            for (int a = 0; a < mesh_.nodes_per_element(); ++a)
                for (int c = 0; c < mesh_.dim; ++c)
                    ef[a * mesh_.dim + c] = constraints_.free_index(mesh_.elements[e][a] * mesh_.dim + c);
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j)
                    if (ef[i] >= 0 && ef[j] >= 0) trips.emplace_back(ef[i], ef[j], 1.0);
        }
        const int n = constraints_.n_free();
        stiffness_.resize(n, n);
        stiffness_.setFromTriplets(trips.begin(), trips.end());
        stiffness_.makeCompressed();
        slots_.assign(static_cast<std::size_t>(mesh_.n_elements()) * nd * nd, -1);
        const int* outer = stiffness_.outerIndexPtr();
        const int* inner = stiffness_.innerIndexPtr();
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const auto& ef = element_free_[e];
            for (int i = 0; i < nd; ++i)
                for (int j = 0; j < nd; ++j) {
                    if (ef[i] < 0 || ef[j] < 0) continue;
                    const int col = ef[j];
                    const int* begin = inner + outer[col];
                    const int* end = inner + outer[col + 1];
                    const int* pos = std::lower_bound(begin, end, ef[i]);
                    slots_[(static_cast<std::size_t>(e) * nd + i) * nd + j] = static_cast<int>(pos - inner);
                }
        }
        lu_.analyzePattern(stiffness_);
    }

    Eigen::Matrix<double, 24, 1> element_displacement(int e, const Vector& a) const {
        const int nd = mesh_.element_dofs();
        Eigen::Matrix<double, 24, 1> ue = Eigen::Matrix<double, 24, 1>::Zero();
        const auto& ef = element_free_[e];
        for (int i = 0; i < nd; ++i)
            if (ef[i] >= 0) ue(i) = a(ef[i]);
        return ue;
    }

    void evaluate(const MacroStrain& eps, const std::vector<DamageState>& previous, const Vector& a,
                  Vector& residual, double& scale, bool with_tangent) {
        const int nd = mesh_.element_dofs();
        const int gpe = mesh_.gauss_per_element();
        residual = Vector::Zero(constraints_.n_free());
        Vector magnitude = Vector::Zero(constraints_.n_free());
        double* kv = stiffness_.valuePtr();
        if (with_tangent) std::fill(kv, kv + stiffness_.nonZeros(), 0.0);
        Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 24, 1> fe(nd);
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 24, 24> ke(nd, nd);
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const auto ue = element_displacement(e, a);
            fe.setZero();
            if (with_tangent) ke.setZero();
            for (int l = 0; l < gpe; ++l) {
                const int g = e * gpe + l;
                const auto& gp = mesh_.gauss_points[g];
                const BMatrix& b = b_[g];
                const VoigtVector strain = eps + b * ue.head(nd);
                const MaterialResponse resp = update_state(strain, previous[g], params_[gp.phase]);
                fe.noalias() += gp.weight * (b.transpose() * resp.stress);
                if (with_tangent) ke.noalias() += gp.weight * (b.transpose() * (resp.tangent * b));
            }
            const auto& ef = element_free_[e];
            for (int i = 0; i < nd; ++i) {
                if (ef[i] < 0) continue;
                residual(ef[i]) += fe(i);
                magnitude(ef[i]) += std::abs(fe(i));
            }
            if (with_tangent) {
                const int* slot = &slots_[static_cast<std::size_t>(e) * nd * nd];
                for (int i = 0; i < nd; ++i)
                    for (int j = 0; j < nd; ++j) {
                        const int s = slot[i * nd + j];
                        if (s >= 0) kv[s] += ke(i, j);
                    }
            }
        }
        scale = magnitude.norm();
    }

    HfSolution collect(const MacroStrain& eps, const std::vector<DamageState>& previous, const Vector& a) const {
        const int ns = mesh_.n_sigma();
        const int ng = mesh_.n_gauss();
        const int gpe = mesh_.gauss_per_element();
        const int nd = mesh_.element_dofs();
        HfSolution sol;
        sol.macro_strain = eps;
        sol.fluctuation = constraints_.expand(a);
        sol.strain.resize(ns, ng);
        sol.stress.resize(ns, ng);
        sol.r.resize(ng);
        sol.damage.resize(ng);
        sol.free_energy.resize(ng);
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const auto ue = element_displacement(e, a);
            for (int l = 0; l < gpe; ++l) {
                const int g = e * gpe + l;
                const auto& gp = mesh_.gauss_points[g];
                const VoigtVector strain = eps + b_[g] * ue.head(nd);
                const MaterialResponse resp = update_state(strain, previous[g], params_[gp.phase]);
                sol.strain.col(g) = strain;
                sol.stress.col(g) = resp.stress;
                sol.r(g) = resp.r;
                sol.damage(g) = resp.damage;
                sol.free_energy(g) = resp.free_energy;
            }
        }
        sol.homogenized_stress = homogenize_stress(mesh_, sol.stress);
        return sol;
    }

    RveMesh mesh_;
    std::vector<PhaseMaterial> materials_;
    std::vector<DamageParams> params_;
    HfOptions options_;
    PeriodicConstraintMap constraints_;
    std::vector<BMatrix> b_;
    std::vector<std::vector<int>> element_free_;
    std::vector<int> slots_;
    Eigen::SparseMatrix<double> stiffness_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

}  // namespace hyperfe2
