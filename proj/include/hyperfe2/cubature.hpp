#pragma once

// Empirical cubature on the existing Gauss points: find z, omega >= 0 with
//   sum_j omega_j f_i(z_j) = sum_gp w_gp f_i(gp)   for every energy mode f_i,
//   sum_j omega_j          = |Omega|,
// using greedy point selection with a nonnegative least-squares refit.
// Energy modes are stored sqrt(w)-weighted, so f_i = Phi_i / sqrt(w).

#include "hyperfe2/common.hpp"

#include <Eigen/Jacobi>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace hyperfe2 {

struct CubatureRule {
    std::vector<int> points;
    Vector weights;
    int n_phi = 0;
    int n_constraints = 0;  // extra integrands enforced besides the energy modes
    double volume = 0.0;
    double residual = 0.0;

    int size() const { return static_cast<int>(points.size()); }
};

// The full Gauss rule expressed as a cubature rule.
inline CubatureRule full_gauss_rule(const Vector& gauss_weights) {
    CubatureRule r;
    r.points.resize(gauss_weights.size());
    std::iota(r.points.begin(), r.points.end(), 0);
    r.weights = gauss_weights;
    r.volume = gauss_weights.sum();
    r.n_phi = -1;
    return r;
}

// Lawson-Hanson active set method for min ||A x - b|| s.t. x >= 0. A nonnegative
// x0 warm-starts the passive set.
inline Vector nnls(const Matrix& a, const Vector& b, const Vector* x0 = nullptr, int max_outer = -1) {
    const Eigen::Index n = a.cols();
    Vector x = Vector::Zero(n);
    std::vector<char> passive(n, 0);
    if (x0) {
        if (x0->size() != n) throw ConfigError("nnls: warm start has wrong size");
        for (Eigen::Index j = 0; j < n; ++j)
            if ((*x0)(j) > 0.0) {
                x(j) = (*x0)(j);
                passive[j] = 1;
            }
    }
    if (max_outer < 0) max_outer = static_cast<int>(3 * n + 10);
    const double tol = 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff() * b.norm());

    auto solve_passive = [&](Vector& s) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index j = 0; j < n; ++j)
            if (passive[j]) idx.push_back(j);
        Matrix ap(a.rows(), static_cast<Eigen::Index>(idx.size()));
        for (std::size_t k = 0; k < idx.size(); ++k) ap.col(k) = a.col(idx[k]);
        const Vector sp = ap.colPivHouseholderQr().solve(b);
        s = Vector::Zero(n);
        for (std::size_t k = 0; k < idx.size(); ++k) s(idx[k]) = sp(k);
    };

    // Inner loop: move from feasible x toward the passive LS solution, dropping
    // variables that hit zero.
    auto inner = [&]() {
        for (int guard = 0; guard <= n; ++guard) {
            Vector s;
            solve_passive(s);
            bool feasible = true;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[j] && s(j) <= 0.0) feasible = false;
            if (feasible) {
                x = s;
                return;
            }
            double alpha = 1.0;
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[j] && s(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - s(j)));
            x += alpha * (s - x);
            for (Eigen::Index j = 0; j < n; ++j)
                if (passive[j] && x(j) <= 1e-300) {
                    passive[j] = 0;
                    x(j) = 0.0;
                }
        }
    };

    if (std::any_of(passive.begin(), passive.end(), [](char c) { return c != 0; })) inner();
    for (int outer = 0; outer < max_outer; ++outer) {
        const Vector w = a.transpose() * (b - a * x);
        Eigen::Index best = -1;
        double best_w = tol;
        for (Eigen::Index j = 0; j < n; ++j)
            if (!passive[j] && w(j) > best_w) {
                best_w = w(j);
                best = j;
            }
        if (best < 0) break;
        passive[best] = 1;
        inner();
        if (!passive[best]) break;  // no progress possible along this direction
    }
    return x;
}

namespace detail {

// Rows: f_1..f_nphi, 1. Columns: Gauss points.
inline Matrix cubature_system(const Matrix& phi, const Vector& gauss_weights, int n_phi) {
    const Eigen::Index ng = gauss_weights.size();
    Matrix a(n_phi + 1, ng);
    for (Eigen::Index g = 0; g < ng; ++g) {
        const double s = 1.0 / std::sqrt(gauss_weights(g));
        for (int i = 0; i < n_phi; ++i) a(i, g) = phi(g, i) * s;
        a(n_phi, g) = 1.0;
    }
    return a;
}

}  // namespace detail

inline constexpr double kCubatureTolerance = 1e-8;
inline constexpr double kCubatureDegeneracy = 1e-6;

namespace detail {

// Thin QR of the selected columns, grown one column at a time by Gram-Schmidt
// with one reorthogonalization pass.
class IncrementalQr {
public:
    IncrementalQr(Eigen::Index rows, Eigen::Index capacity) : q_(rows, capacity), r_(capacity, capacity) {}

    Eigen::Index size() const { return k_; }
    void clear() { k_ = 0; }

    // Returns false (and leaves the factorization unchanged) for a dependent column.
    bool append(const Vector& v) {
        if (k_ == q_.cols()) {
            q_.conservativeResize(Eigen::NoChange, 2 * k_ + 1);
            r_.conservativeResize(2 * k_ + 1, 2 * k_ + 1);
        }
        Vector w = v;
        Vector h = Vector::Zero(k_);
        for (int pass = 0; pass < 2; ++pass) {
            const Vector hp = q_.leftCols(k_).transpose() * w;
            w.noalias() -= q_.leftCols(k_) * hp;
            h += hp;
        }
        const double nw = w.norm();
        if (!(nw > 1e-12 * v.norm())) return false;
        q_.col(k_) = w / nw;
        r_.col(k_).head(k_) = h;
        r_.row(k_).head(k_ + 1).setZero();
        r_(k_, k_) = nw;
        ++k_;
        return true;
    }

    // Drops column j, restoring the triangular factor with Givens rotations.
    void remove(Eigen::Index j) {
        for (Eigen::Index c = j; c + 1 < k_; ++c) r_.col(c).head(k_) = r_.col(c + 1).head(k_);
        for (Eigen::Index i = j; i + 1 < k_; ++i) {
            Eigen::JacobiRotation<double> g;
            g.makeGivens(r_(i, i), r_(i + 1, i));
            r_.block(0, i, k_, k_ - 1 - i).applyOnTheLeft(i, i + 1, g.adjoint());
            q_.leftCols(k_).applyOnTheRight(i, i + 1, g);
        }
        --k_;
    }

    Vector solve(const Vector& b) const {
        const Vector qb = q_.leftCols(k_).transpose() * b;
        return r_.topLeftCorner(k_, k_).triangularView<Eigen::Upper>().solve(qb);
    }

private:
    Matrix q_, r_;
    Eigen::Index k_ = 0;
};

}  // namespace detail

// Greedy selection: add the unselected point best aligned with the residual,
// refit by least squares on the selected set, and run Lawson-Hanson steps on the
// same factorization (evicting points whose weight reaches zero) when the refit
// is not strictly positive.
inline CubatureRule select_cubature(const Matrix& phi, const Vector& gauss_weights, int n_phi) {
    if (n_phi < 0 || n_phi > phi.cols()) throw ConfigError("select_cubature: n_phi out of range");
    if (phi.rows() != gauss_weights.size()) throw ConfigError("select_cubature: Phi rows must match Gauss points");
    const Eigen::Index ng = gauss_weights.size();
    if (n_phi + 1 > ng) throw ConfigError("select_cubature: N_phi + 1 exceeds the number of Gauss points");
    const Matrix a = detail::cubature_system(phi, gauss_weights, n_phi);
    const Vector b = a * gauss_weights;
    const double bnorm = b.norm();
    const Vector col_norm = a.colwise().norm().transpose();
    const int max_points = n_phi + 1;

    std::vector<int> selected;
    Vector weights;
    Vector r = b;
    std::vector<char> in_set(ng, 0);
    detail::IncrementalQr qr(a.rows(), max_points);
    auto residual_of = [&]() {
        r = b;
        for (std::size_t k = 0; k < selected.size(); ++k) r.noalias() -= weights(k) * a.col(selected[k]);
    };
    const int max_iterations = 10 * max_points + 20;
    for (int it = 0; it < max_iterations; ++it) {
        if (r.norm() <= kCubatureTolerance * bnorm) break;
        if (static_cast<int>(selected.size()) >= max_points) break;
        const Vector corr = a.transpose() * r;
        Eigen::Index best = -1;
        double best_val = 0.0;
        for (Eigen::Index g = 0; g < ng; ++g) {
            if (in_set[g]) continue;
            const double v = corr(g) / col_norm(g);
            if (v > best_val) {  // strict: ties keep the lowest index
                best_val = v;
                best = g;
            }
        }
        if (best < 0) break;
        in_set[best] = 1;
        if (!qr.append(a.col(best))) continue;  // dependent on the selected set
        selected.push_back(static_cast<int>(best));
        // Lawson-Hanson inner loop from the previous (feasible) weights; the
        // newcomer starts at zero.
        Vector x = Vector::Zero(static_cast<Eigen::Index>(selected.size()));
        if (weights.size()) x.head(weights.size()) = weights;
        while (!selected.empty()) {
            const Vector s = qr.solve(b);
            if (s.minCoeff() > 0.0) {
                x = s;
                break;
            }
            double alpha = 1.0;
            Eigen::Index blocking = -1;
            for (Eigen::Index k = 0; k < s.size(); ++k)
                if (s(k) <= 0.0) {
                    const double t = x(k) / (x(k) - s(k));
                    if (blocking < 0 || t < alpha) {
                        alpha = t;
                        blocking = k;
                    }
                }
            x += alpha * (s - x);
            x(blocking) = 0.0;
            const double floor = 1e-15 * x.cwiseAbs().maxCoeff();
            for (Eigen::Index k = static_cast<Eigen::Index>(selected.size()) - 1; k >= 0; --k) {
                if (x(k) > floor) continue;
                qr.remove(k);
                // Evicted points may be selected again later, except the newcomer.
                if (selected[k] != best) in_set[selected[k]] = 0;
                selected.erase(selected.begin() + k);
                Vector shrunk(x.size() - 1);
                shrunk << x.head(k), x.tail(x.size() - k - 1);
                x = shrunk;
            }
        }
        weights = x;
        residual_of();
    }
    const double rel = r.norm() / bnorm;
    if (rel > kCubatureDegeneracy)
        throw DegeneracyError("cubature residual " + std::to_string(rel) + " after " +
                              std::to_string(selected.size()) + " points; try a larger N_phi");
    // Report points in ascending index order.
    std::vector<int> order(selected.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return selected[i] < selected[j]; });
    CubatureRule rule;
    rule.n_phi = n_phi;
    rule.volume = gauss_weights.sum();
    rule.residual = rel;
    rule.weights.resize(static_cast<Eigen::Index>(order.size()));
    for (std::size_t k = 0; k < order.size(); ++k) {
        rule.points.push_back(selected[order[k]]);
        rule.weights(k) = weights(order[k]);
    }
    return rule;
}

// Selection with additional exactly integrated fields. constraints holds
// sqrt(w)-weighted integrands (N_gp x m); they are orthonormalized, the leading
// energy modes are orthogonalized against them, and the joint basis is passed to
// select_cubature. n_points is the point budget: the energy count is
// n_points - 1 - rank(constraints), capped at the available modes.
inline CubatureRule select_cubature_constrained(const Matrix& constraints, const Matrix& phi,
                                                const Vector& gauss_weights, int n_points) {
    if (constraints.rows() != phi.rows()) throw ConfigError("select_cubature: constraint rows must match Phi rows");
    Matrix qc(phi.rows(), 0);
    if (constraints.cols() > 0 && constraints.cwiseAbs().maxCoeff() > 0.0) {
        Eigen::BDCSVD<Matrix> svd(constraints, Eigen::ComputeThinU);
        const Vector& sv = svd.singularValues();
        int k = 0;
        while (k < sv.size() && sv(k) > 1e-10 * sv(0)) ++k;
        qc = svd.matrixU().leftCols(k);
    }
    const int n_c = static_cast<int>(qc.cols());
    const int n_phi = std::min<int>(n_points - 1 - n_c, static_cast<int>(phi.cols()));
    if (n_phi < 0)
        throw ConfigError("select_cubature: " + std::to_string(n_points) + " points cannot hold " +
                          std::to_string(n_c) + " constraints plus the volume");
    Matrix rest = phi.leftCols(n_phi) - qc * (qc.transpose() * phi.leftCols(n_phi));
    Matrix qp(phi.rows(), 0);
    // Phi is orthonormal, so singular values of the remainder lie in [0, 1].
    if (n_phi > 0 && rest.cwiseAbs().maxCoeff() > 1e-12) {
        Eigen::BDCSVD<Matrix> svd(rest, Eigen::ComputeThinU);
        const Vector& sv = svd.singularValues();
        int k = 0;
        while (k < sv.size() && sv(k) > 1e-10) ++k;
        qp = svd.matrixU().leftCols(k);
    }
    Matrix joint(phi.rows(), qc.cols() + qp.cols());
    joint << qc, qp;
    CubatureRule rule = select_cubature(joint, gauss_weights, static_cast<int>(joint.cols()));
    rule.n_phi = n_phi;
    rule.n_constraints = n_c;
    return rule;
}

struct RuleReport {
    Vector mode_residuals;  // |reduced - full| / ||b|| per energy mode
    double volume_residual = 0.0;  // |sum omega - |Omega|| / |Omega|
    double max_residual = 0.0;
    double min_weight = 0.0;
};

inline RuleReport verify_rule(const CubatureRule& rule, const Matrix& phi, const Vector& gauss_weights) {
    const int n_phi = std::max(rule.n_phi, 0);
    const Matrix a = detail::cubature_system(phi, gauss_weights, n_phi);
    const Vector b = a * gauss_weights;
    Vector reduced = Vector::Zero(n_phi + 1);
    for (int k = 0; k < rule.size(); ++k) reduced += rule.weights(k) * a.col(rule.points[k]);
    const double bnorm = b.norm();
    RuleReport rep;
    rep.mode_residuals = (reduced - b).head(n_phi).cwiseAbs() / bnorm;
    const double volume = gauss_weights.sum();
    rep.volume_residual = std::abs(reduced(n_phi) - volume) / volume;
    rep.max_residual = std::max(rep.volume_residual, n_phi ? rep.mode_residuals.maxCoeff() : 0.0);
    rep.min_weight = rule.size() ? rule.weights.minCoeff() : 0.0;
    return rep;
}

inline void write_rule(std::ostream& os, const CubatureRule& rule) {
    os << "# hyperfe2 cubature rule\n";
    os << std::setprecision(17);
    os << "n_phi " << rule.n_phi << "\n";
    os << "constraints " << rule.n_constraints << "\n";
    os << "volume " << rule.volume << "\n";
    os << "residual " << rule.residual << "\n";
    os << "points " << rule.size() << "\n";
    for (int k = 0; k < rule.size(); ++k) os << rule.points[k] << " " << rule.weights(k) << "\n";
}

inline CubatureRule read_rule(std::istream& is) {
    CubatureRule rule;
    std::string line, key;
    int n = -1;
    while (n < 0 && std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ls >> key;
        if (key == "n_phi") ls >> rule.n_phi;
        else if (key == "constraints") ls >> rule.n_constraints;
        else if (key == "volume") ls >> rule.volume;
        else if (key == "residual") ls >> rule.residual;
        else if (key == "points") ls >> n;
        else throw FormatError("unknown rule header key '" + key + "'");
    }
    if (n < 0) throw FormatError("rule file missing 'points' header");
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        int idx = 0;
        double w = 0.0;
        if (!(is >> idx >> w)) throw FormatError("rule file truncated");
        rule.points.push_back(idx);
        rule.weights(k) = w;
    }
    return rule;
}

inline void save_rule(const std::string& path, const CubatureRule& rule) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path);
    write_rule(os, rule);
}

inline CubatureRule load_rule(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return read_rule(is);
}

}  // namespace hyperfe2
