#pragma once

// Miniature two-scale coupon: a 2D plane-strain Q4 macro mesh, bottom edge
// clamped, top edge driven by a uniform u_x (u_y free). Every macro Gauss point
// owns an independent micro model; the macro Newton uses the homogenized
// tangents returned by the micro models.

#include "hyperfe2/common.hpp"
#include "hyperfe2/hf_solver.hpp"
#include "hyperfe2/hpr_solver.hpp"
#include "hyperfe2/parallel.hpp"
#include "hyperfe2/rve_model.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <cmath>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace hyperfe2 {

struct CouponMesh {
    int nx = 4;
    int ny = 2;
    double length = 8.0;
    double height = 4.0;

    int n_nodes() const { return (nx + 1) * (ny + 1); }
    int n_elements() const { return nx * ny; }
    int n_gauss() const { return 4 * n_elements(); }
    int n_dofs() const { return 2 * n_nodes(); }
    int node(int i, int j) const { return i + (nx + 1) * j; }

    std::array<int, 4> element_nodes(int e) const {
        const int i = e % nx, j = e / nx;
        return {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
    }

    // B matrix (3 x 8) and weight of local Gauss point l of any element.
    BMatrix b_matrix(int l, double& weight) const {
        const double hx = length / nx, hy = height / ny;
        const auto dn = shape_gradients(2, gauss_reference_point(2, l));
        Eigen::Matrix<double, 8, 3> g = Eigen::Matrix<double, 8, 3>::Zero();
        for (int a = 0; a < 4; ++a) {
            g(a, 0) = dn(a, 0) * 2.0 / hx;
            g(a, 1) = dn(a, 1) * 2.0 / hy;
        }
        weight = 0.25 * hx * hy;
        return b_matrix_from_gradients(2, g);
    }

    void validate() const {
        if (nx < 1 || ny < 1) throw ConfigError("coupon mesh needs at least one element per direction");
        if (nx * ny > 32) throw ConfigError("coupon mesh is limited to 32 elements");
        if (!(length > 0.0 && height > 0.0)) throw ConfigError("coupon dimensions must be positive");
    }
};

// Linear maps that rotate Voigt strain / stress by theta.
inline Matrix strain_rotation_2d(double theta) {
    Matrix r(3, 3);
    for (int k = 0; k < 3; ++k) {
        VoigtVector e = VoigtVector::Zero(3);
        e(k) = 1.0;
        r.col(k) = rotate_strain_2d(e, theta);
    }
    return r;
}

inline Matrix stress_rotation_2d(double theta) {
    Matrix r(3, 3);
    for (int k = 0; k < 3; ++k) {
        VoigtVector s = VoigtVector::Zero(3);
        s(k) = 1.0;
        r.col(k) = rotate_stress_2d(s, theta);
    }
    return r;
}

struct MicroResponse {
    VoigtVector stress;
    Matrix tangent;
};

// Micro model backed by the hyper-reduced solver; fibers rotated by theta
// relative to the macro frame.
class ReducedMicroModel {
public:
    using State = ReducedState;

    ReducedMicroModel(const HprSolver& solver, double theta) : solver_(solver), theta_(theta) {
        to_local_ = strain_rotation_2d(-theta);
        to_global_ = stress_rotation_2d(theta);
    }

    State virgin() const { return solver_.virgin_state(); }

    MicroResponse respond(const VoigtVector& eps, const State& committed, State& trial) const {
        const VoigtVector local = to_local_ * eps;
        const ReducedSolution sol = solver_.solve_increment(local, committed);
        trial = sol.state();
        MicroResponse out;
        out.stress = to_global_ * sol.homogenized_stress;
        out.tangent = to_global_ * solver_.homogenized_tangent(sol, committed) * to_local_;
        return out;
    }

    const HprSolver& solver() const { return solver_; }

private:
    const HprSolver& solver_;
    double theta_;
    Matrix to_local_, to_global_;
};

// Micro model backed by full HF cell solves (true FE2). Solvers are pooled so
// concurrent macro Gauss points never share one.
class HfMicroModel {
public:
    struct State {
        std::vector<DamageState> states;
        Vector fluctuation;
    };

    HfMicroModel(const RveMesh& mesh, const std::vector<PhaseMaterial>& materials, double theta)
        : mesh_(mesh), materials_(materials) {
        to_local_ = strain_rotation_2d(-theta);
        to_global_ = stress_rotation_2d(theta);
        pool_.push_back(std::make_unique<HfSolver>(mesh_, materials_));
    }

    State virgin() const { return {pool_.front()->virgin_states(), Vector()}; }

    MicroResponse respond(const VoigtVector& eps, const State& committed, State& trial) const {
        std::unique_ptr<HfSolver> hf = acquire();
        const VoigtVector local = to_local_ * eps;
        const Vector* guess = committed.fluctuation.size() ? &committed.fluctuation : nullptr;
        const HfSolution sol = hf->solve_increment(local, committed.states, guess);
        MicroResponse out;
        out.stress = to_global_ * sol.homogenized_stress;
        out.tangent = to_global_ * hf->homogenize_tangent(local, committed.states, &sol) * to_local_;
        trial = {sol.states(), sol.fluctuation};
        release(std::move(hf));
        return out;
    }

private:
    std::unique_ptr<HfSolver> acquire() const {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            if (!pool_.empty()) {
                auto hf = std::move(pool_.back());
                pool_.pop_back();
                return hf;
            }
        }
        return std::make_unique<HfSolver>(mesh_, materials_);
    }

    void release(std::unique_ptr<HfSolver> hf) const {
        std::lock_guard<std::mutex> lock(mutex_);
        pool_.push_back(std::move(hf));
    }

    RveMesh mesh_;
    std::vector<PhaseMaterial> materials_;
    Matrix to_local_, to_global_;
    mutable std::mutex mutex_;
    mutable std::vector<std::unique_ptr<HfSolver>> pool_;
};

// Single-scale linear material with a precomputed homogenized tensor.
class LinearMicroModel {
public:
    struct State {};

    LinearMicroModel(const Matrix& c_local, double theta)
        : c_(stress_rotation_2d(theta) * c_local * strain_rotation_2d(-theta)) {}

    State virgin() const { return {}; }

    MicroResponse respond(const VoigtVector& eps, const State&, State&) const {
        return {c_ * eps, c_};
    }

private:
    Matrix c_;
};

struct CouponStep {
    double displacement = 0.0;
    double reaction = 0.0;  // total x reaction on the driven edge
    int iterations = 0;
    std::vector<VoigtVector> strain;  // per macro Gauss point
    std::vector<VoigtVector> stress;
};

struct CouponOptions {
    double relative_tolerance = 1e-8;
    int max_iterations = 25;
    unsigned workers = 1;
};

template <class Micro>
class CouponSolver {
public:
    using State = typename Micro::State;

    CouponSolver(CouponMesh mesh, const Micro& micro, CouponOptions options = {})
        : mesh_(mesh), micro_(micro), options_(options) {
        mesh_.validate();
        prescribed_.assign(mesh_.n_dofs(), -1);
        for (int i = 0; i <= mesh_.nx; ++i) {
            prescribed_[2 * mesh_.node(i, 0)] = 0;
            prescribed_[2 * mesh_.node(i, 0) + 1] = 0;
            prescribed_[2 * mesh_.node(i, mesh_.ny)] = 1;
        }
        int k = 0;
        free_.assign(mesh_.n_dofs(), -1);
        for (int d = 0; d < mesh_.n_dofs(); ++d)
            if (prescribed_[d] < 0) free_[d] = k++;
        n_free_ = k;
        states_.assign(mesh_.n_gauss(), micro_.virgin());
        u_ = Vector::Zero(mesh_.n_dofs());
    }

    const std::vector<State>& states() const { return states_; }
    const Vector& displacement() const { return u_; }

    CouponStep step(double top_ux) {
        for (int d = 0; d < mesh_.n_dofs(); ++d)
            if (prescribed_[d] == 0) u_(d) = 0.0;
            else if (prescribed_[d] == 1) u_(d) = top_ux;
        std::vector<State> trial(states_.size());
        std::vector<MicroResponse> resp(states_.size());
        std::vector<VoigtVector> strain(states_.size());
        CouponStep out;
        out.displacement = top_ux;
        for (int it = 0;; ++it) {
            evaluate(strain, trial, resp);
            Vector f = Vector::Zero(mesh_.n_dofs());
            std::vector<Eigen::Triplet<double>> trips;
            double scale = 0.0;
            for (int e = 0; e < mesh_.n_elements(); ++e) {
                const auto nodes = mesh_.element_nodes(e);
                for (int l = 0; l < 4; ++l) {
                    double w = 0.0;
                    const Matrix b = mesh_.b_matrix(l, w);
                    const int g = 4 * e + l;
                    const Vector fe = w * (b.transpose() * resp[g].stress);
                    const Matrix ke = w * (b.transpose() * resp[g].tangent * b);
                    scale += fe.cwiseAbs().sum();
                    for (int a = 0; a < 8; ++a) {
                        const int da = 2 * nodes[a / 2] + a % 2;
                        f(da) += fe(a);
                        if (free_[da] < 0) continue;
                        for (int c = 0; c < 8; ++c) {
                            const int dc = 2 * nodes[c / 2] + c % 2;
                            if (free_[dc] >= 0) trips.emplace_back(free_[da], free_[dc], ke(a, c));
                        }
                    }
                }
            }
            Vector r(n_free_);
            for (int d = 0; d < mesh_.n_dofs(); ++d)
                if (free_[d] >= 0) r(free_[d]) = f(d);
            if (r.norm() <= options_.relative_tolerance * std::max(scale, 1e-300) || r.norm() == 0.0) {
                out.iterations = it;
                out.reaction = 0.0;
                for (int d = 0; d < mesh_.n_dofs(); ++d)
                    if (prescribed_[d] == 1) out.reaction += f(d);
                break;
            }
            if (it >= options_.max_iterations)
                throw NonConvergenceError("macro Newton did not converge at u_x = " + std::to_string(top_ux),
                                          r.norm());
            Eigen::SparseMatrix<double> k(n_free_, n_free_);
            k.setFromTriplets(trips.begin(), trips.end());
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(k);
            if (lu.info() != Eigen::Success) throw ConstraintError("macro stiffness is singular");
            const Vector du = lu.solve(-r);
            for (int d = 0; d < mesh_.n_dofs(); ++d)
                if (free_[d] >= 0) u_(d) += du(free_[d]);
        }
        states_ = trial;
        out.strain = strain;
        for (const auto& rsp : resp) out.stress.push_back(rsp.stress);
        return out;
    }

    std::vector<CouponStep> run(double max_displacement, int n_steps) {
        if (n_steps < 1) throw ConfigError("coupon needs at least one step");
        std::vector<CouponStep> out;
        for (int k = 1; k <= n_steps; ++k) out.push_back(step(max_displacement * k / n_steps));
        return out;
    }

private:
    void evaluate(std::vector<VoigtVector>& strain, std::vector<State>& trial, std::vector<MicroResponse>& resp) {
        for (int e = 0; e < mesh_.n_elements(); ++e) {
            const auto nodes = mesh_.element_nodes(e);
            Vector ue(8);
            for (int a = 0; a < 4; ++a) ue.segment(2 * a, 2) = u_.segment(2 * nodes[a], 2);
            for (int l = 0; l < 4; ++l) {
                double w = 0.0;
                strain[4 * e + l] = mesh_.b_matrix(l, w) * ue;
            }
        }
        parallel_for(
            mesh_.n_gauss(),
            [&](int g) { resp[g] = micro_.respond(strain[g], states_[g], trial[g]); },
            options_.workers);
    }

    CouponMesh mesh_;
    const Micro& micro_;
    CouponOptions options_;
    std::vector<int> prescribed_;  // -1 free, 0 clamped, 1 driven u_x
    std::vector<int> free_;
    int n_free_ = 0;
    std::vector<State> states_;
    Vector u_;
};

// max_k |R_a - R_b| / |R_b| over steps with nonzero reference reaction.
inline double reaction_error(const std::vector<CouponStep>& a, const std::vector<CouponStep>& reference) {
    if (a.size() != reference.size()) throw AlignmentError("reaction curves differ in length");
    double worst = 0.0;
    bool any = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (std::abs(a[k].displacement - reference[k].displacement) > 1e-14)
            throw AlignmentError("reaction curves sampled at different displacements");
        if (reference[k].reaction == 0.0) continue;
        any = true;
        worst = std::max(worst, std::abs(a[k].reaction - reference[k].reaction) / std::abs(reference[k].reaction));
    }
    if (!any) throw UndefinedErrorMetric("reference reaction is zero everywhere");
    return worst;
}

}  // namespace hyperfe2
