#pragma once

// Shared numeric types, error hierarchy and Voigt-notation helpers.
//
// Voigt ordering is (xx, yy, zz, xy, yz, xz) with engineering shear strains
// (gamma = 2 eps). In 2D (plane strain) the ordering collapses to (xx, yy, xy)
// and eps_zz = 0 is implied.

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace hyperfe2 {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Small fixed-capacity types for per-point kernels (no heap allocation).
using VoigtVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 6, 1>;
using VoigtMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 6>;
using Tensor3 = Eigen::Matrix3d;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ConstraintError : public Error {
public:
    using Error::Error;
};

class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

class SaturationError : public Error {
public:
    SaturationError(const std::string& what, double achieved_fraction)
        : Error(what), achieved_fraction_(achieved_fraction) {}
    double achieved_fraction() const noexcept { return achieved_fraction_; }

private:
    double achieved_fraction_;
};

class TangentError : public Error {
public:
    using Error::Error;
};

class DegeneracyError : public Error {
public:
    using Error::Error;
};

class AlignmentError : public Error {
public:
    using Error::Error;
};

class UndefinedErrorMetric : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

inline int voigt_size(int dim) {
    if (dim == 2) return 3;
    if (dim == 3) return 6;
    throw ConfigError("dimension must be 2 or 3, got " + std::to_string(dim));
}

inline int dim_from_voigt(int n_sigma) {
    if (n_sigma == 3) return 2;
    if (n_sigma == 6) return 3;
    throw ConfigError("Voigt size must be 3 or 6, got " + std::to_string(n_sigma));
}

// Voigt strain (engineering shear) to symmetric 3x3 tensor.
inline Tensor3 strain_to_tensor(const VoigtVector& e) {
    Tensor3 t = Tensor3::Zero();
    if (e.size() == 3) {
        t(0, 0) = e(0);
        t(1, 1) = e(1);
        t(0, 1) = t(1, 0) = 0.5 * e(2);
    } else {
        t(0, 0) = e(0);
        t(1, 1) = e(1);
        t(2, 2) = e(2);
        t(0, 1) = t(1, 0) = 0.5 * e(3);
        t(1, 2) = t(2, 1) = 0.5 * e(4);
        t(0, 2) = t(2, 0) = 0.5 * e(5);
    }
    return t;
}

// Symmetric 3x3 tensor to Voigt stress-like vector (tensor components, no factor 2).
inline VoigtVector tensor_to_stress(const Tensor3& t, int n_sigma) {
    VoigtVector s(n_sigma);
    if (n_sigma == 3) {
        s << t(0, 0), t(1, 1), t(0, 1);
    } else {
        s << t(0, 0), t(1, 1), t(2, 2), t(0, 1), t(1, 2), t(0, 2);
    }
    return s;
}

struct LameParameters {
    double lambda;
    double mu;
};

inline LameParameters lame_from_engineering(double young, double poisson) {
    return {young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)),
            young / (2.0 * (1.0 + poisson))};
}

// m = Voigt image of the second-order identity.
inline VoigtVector voigt_identity(int n_sigma) {
    VoigtVector m = VoigtVector::Zero(n_sigma);
    const int normal = n_sigma == 3 ? 2 : 3;
    for (int i = 0; i < normal; ++i) m(i) = 1.0;
    return m;
}

// D such that 2 mu I maps engineering strain to stress: diag(2,2,[2],1,[1,1]).
inline VoigtMatrix voigt_shear_metric(int n_sigma) {
    VoigtMatrix d = VoigtMatrix::Zero(n_sigma, n_sigma);
    const int normal = n_sigma == 3 ? 2 : 3;
    for (int i = 0; i < n_sigma; ++i) d(i, i) = i < normal ? 2.0 : 1.0;
    return d;
}

// C = 2 mu I + lambda (1 x 1) in engineering Voigt form; plane strain in 2D.
inline VoigtMatrix isotropic_elasticity(const LameParameters& lame, int n_sigma) {
    const VoigtVector m = voigt_identity(n_sigma);
    VoigtMatrix c = lame.lambda * (m * m.transpose());
    c += lame.mu * voigt_shear_metric(n_sigma);
    return c;
}

inline VoigtMatrix isotropic_elasticity(double young, double poisson, int n_sigma) {
    return isotropic_elasticity(lame_from_engineering(young, poisson), n_sigma);
}

// Rotates a 2D Voigt strain (engineering shear) by angle theta about z.
inline VoigtVector rotate_strain_2d(const VoigtVector& e, double theta) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    Eigen::Matrix2d t;
    t << e(0), 0.5 * e(2), 0.5 * e(2), e(1);
    const Eigen::Matrix2d tr = r * t * r.transpose();
    VoigtVector out(3);
    out << tr(0, 0), tr(1, 1), 2.0 * tr(0, 1);
    return out;
}

inline VoigtVector rotate_stress_2d(const VoigtVector& s, double theta) {
    const double c = std::cos(theta), sn = std::sin(theta);
    Eigen::Matrix2d r;
    r << c, -sn, sn, c;
    Eigen::Matrix2d t;
    t << s(0), s(2), s(2), s(1);
    const Eigen::Matrix2d tr = r * t * r.transpose();
    VoigtVector out(3);
    out << tr(0, 0), tr(1, 1), tr(0, 1);
    return out;
}

}  // namespace hyperfe2
