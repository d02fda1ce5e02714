#pragma once

// Structured RVE meshes (unit square / unit cube), phase layouts for the
// layered and random-fiber archetypes, bilinear/trilinear shape functions and
// the 2^d Gauss table.

#include "hyperfe2/common.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace hyperfe2 {

struct PhaseMaterial {
    std::string name;
    double young_modulus = 0.0;
    double poisson_ratio = 0.0;
    double elastic_threshold = 0.0;
    double infinity_threshold = 0.0;
    double hardening_h1 = 0.0;
    double hardening_h2 = 0.0;
    bool is_inelastic = false;

    void validate() const {
        if (!(young_modulus > 0.0))
            throw ConfigError("phase '" + name + "': young_modulus must be > 0");
        if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
            throw ConfigError("phase '" + name + "': poisson_ratio must be in [0, 0.5)");
        if (!is_inelastic) return;
        if (!(elastic_threshold > 0.0))
            throw ConfigError("phase '" + name + "': elastic_threshold must be > 0");
        if (!(infinity_threshold >= elastic_threshold))
            throw ConfigError("phase '" + name + "': infinity_threshold must be >= elastic_threshold");
        if (!(hardening_h1 > 0.0 && hardening_h2 > 0.0))
            throw ConfigError("phase '" + name + "': hardening parameters must be > 0");
    }

    bool operator==(const PhaseMaterial&) const = default;
};

struct GaussPointRef {
    int index = 0;
    int element = 0;
    int local = 0;
    double weight = 0.0;
    int phase = 0;
};

struct RveMesh {
    int dim = 2;
    std::array<int, 3> cells{1, 1, 1};
    std::array<double, 3> lengths{1.0, 1.0, 1.0};
    std::vector<Eigen::Vector3d> nodes;
    std::vector<std::array<int, 8>> elements;
    std::vector<int> element_phase;
    std::vector<std::string> phase_names;
    std::vector<GaussPointRef> gauss_points;
    std::vector<Eigen::Vector3d> gauss_positions;
    // (slave, master) where master is the periodic image with all indices reduced mod cells.
    std::vector<std::pair<int, int>> periodic_pairs;
    double volume = 0.0;

    int n_sigma() const { return voigt_size(dim); }
    int nodes_per_element() const { return dim == 2 ? 4 : 8; }
    int element_dofs() const { return dim * nodes_per_element(); }
    int n_nodes() const { return static_cast<int>(nodes.size()); }
    int n_dofs() const { return dim * n_nodes(); }
    int n_elements() const { return static_cast<int>(elements.size()); }
    int n_gauss() const { return static_cast<int>(gauss_points.size()); }
    int n_phases() const { return static_cast<int>(phase_names.size()); }
    int gauss_per_element() const { return dim == 2 ? 4 : 8; }

    int phase_id(const std::string& name) const {
        for (int p = 0; p < n_phases(); ++p)
            if (phase_names[p] == name) return p;
        return -1;
    }

    Vector gauss_weights() const {
        Vector w(n_gauss());
        for (const auto& gp : gauss_points) w(gp.index) = gp.weight;
        return w;
    }

    double phase_volume(int phase) const {
        double v = 0.0;
        for (const auto& gp : gauss_points)
            if (gp.phase == phase) v += gp.weight;
        return v;
    }

    double phase_fraction(int phase) const { return phase_volume(phase) / volume; }
    double phase_fraction(const std::string& name) const {
        const int p = phase_id(name);
        return p < 0 ? 0.0 : phase_fraction(p);
    }
};

// ---------------------------------------------------------------------------
// Reference element

namespace detail {

inline constexpr std::array<std::array<int, 3>, 8> kNodeSigns{{
    {-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
    {-1, -1, 1},  {1, -1, 1},  {1, 1, 1},  {-1, 1, 1},
}};

}  // namespace detail

inline Eigen::Vector3d gauss_reference_point(int dim, int local) {
    const double g = 1.0 / std::sqrt(3.0);
    Eigen::Vector3d xi = Eigen::Vector3d::Zero();
    // Same counter-clockwise layout as the element nodes.
    const auto& s = detail::kNodeSigns[local];
    for (int d = 0; d < dim; ++d) xi(d) = g * s[d];
    return xi;
}

// Shape function values at reference point xi.
inline Eigen::Matrix<double, 8, 1> shape_values(int dim, const Eigen::Vector3d& xi) {
    Eigen::Matrix<double, 8, 1> n = Eigen::Matrix<double, 8, 1>::Zero();
    const int npe = dim == 2 ? 4 : 8;
    const double scale = dim == 2 ? 0.25 : 0.125;
    for (int a = 0; a < npe; ++a) {
        double v = scale;
        for (int d = 0; d < dim; ++d) v *= 1.0 + detail::kNodeSigns[a][d] * xi(d);
        n(a) = v;
    }
    return n;
}

// Reference-space gradients, row a = dN_a/dxi.
inline Eigen::Matrix<double, 8, 3> shape_gradients(int dim, const Eigen::Vector3d& xi) {
    Eigen::Matrix<double, 8, 3> g = Eigen::Matrix<double, 8, 3>::Zero();
    const int npe = dim == 2 ? 4 : 8;
    const double scale = dim == 2 ? 0.25 : 0.125;
    for (int a = 0; a < npe; ++a) {
        const auto& s = detail::kNodeSigns[a];
        for (int k = 0; k < dim; ++k) {
            double v = scale * s[k];
            for (int d = 0; d < dim; ++d)
                if (d != k) v *= 1.0 + s[d] * xi(d);
            g(a, k) = v;
        }
    }
    return g;
}

using BMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 6, 24>;

struct PhysicalGradients {
    Eigen::Matrix<double, 8, 3> dn_dx;
    double det_j;
};

inline PhysicalGradients physical_gradients(const RveMesh& mesh, int element,
                                            const Eigen::Vector3d& xi) {
    const int dim = mesh.dim;
    const int npe = mesh.nodes_per_element();
    const auto dn = shape_gradients(dim, xi);
    Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
    jac.topLeftCorner(dim, dim).setZero();
    for (int a = 0; a < npe; ++a) {
        const auto& x = mesh.nodes[mesh.elements[element][a]];
        for (int i = 0; i < dim; ++i)
            for (int k = 0; k < dim; ++k) jac(i, k) += x(i) * dn(a, k);
    }
    const double det = jac.topLeftCorner(dim, dim).determinant();
    if (!(det > 0.0)) throw ConfigError("element has non-positive Jacobian");
    PhysicalGradients out;
    out.dn_dx.setZero();
    const Eigen::Matrix3d jinv_t = jac.inverse().transpose();
    for (int a = 0; a < npe; ++a)
        out.dn_dx.row(a) = (jinv_t * dn.row(a).transpose()).transpose();
    out.det_j = det;
    return out;
}

inline BMatrix b_matrix_from_gradients(int dim, const Eigen::Matrix<double, 8, 3>& g) {
    const int npe = dim == 2 ? 4 : 8;
    BMatrix b = BMatrix::Zero(voigt_size(dim), dim * npe);
    for (int a = 0; a < npe; ++a) {
        const double gx = g(a, 0), gy = g(a, 1), gz = g(a, 2);
        if (dim == 2) {
            const int c = 2 * a;
            b(0, c) = gx;
            b(1, c + 1) = gy;
            b(2, c) = gy;
            b(2, c + 1) = gx;
        } else {
            const int c = 3 * a;
            b(0, c) = gx;
            b(1, c + 1) = gy;
            b(2, c + 2) = gz;
            b(3, c) = gy;
            b(3, c + 1) = gx;
            b(4, c + 1) = gz;
            b(4, c + 2) = gy;
            b(5, c) = gz;
            b(5, c + 2) = gx;
        }
    }
    return b;
}

// Maps the element nodal displacement vector (node-major, component-minor) to
// the Voigt strain at the Gauss point.
inline BMatrix strain_displacement(const RveMesh& mesh, const GaussPointRef& gp) {
    const auto pg = physical_gradients(mesh, gp.element, gauss_reference_point(mesh.dim, gp.local));
    return b_matrix_from_gradients(mesh.dim, pg.dn_dx);
}

// ---------------------------------------------------------------------------
// Structured builder

namespace detail {

inline int node_index(const std::array<int, 3>& n, int i, int j, int k) {
    return i + (n[0] + 1) * (j + (n[1] + 1) * k);
}

// classify(center) -> raw phase id; raw ids are compacted so only used phases
// remain, ordered by raw id.
inline RveMesh build_structured(int dim, int resolution,
                                const std::vector<std::string>& raw_names,
                                const std::function<int(const Eigen::Vector3d&)>& classify) {
    if (dim != 2 && dim != 3) throw ConfigError("dimension must be 2 or 3");
    if (resolution < 1) throw ConfigError("resolution must be >= 1");
    RveMesh mesh;
    mesh.dim = dim;
    mesh.cells = {resolution, resolution, dim == 3 ? resolution : 0};
    mesh.lengths = {1.0, 1.0, dim == 3 ? 1.0 : 0.0};
    const auto& n = mesh.cells;
    const double h = 1.0 / resolution;
    const int nk = dim == 3 ? n[2] : 0;

    for (int k = 0; k <= nk; ++k)
        for (int j = 0; j <= n[1]; ++j)
            for (int i = 0; i <= n[0]; ++i) mesh.nodes.emplace_back(i * h, j * h, k * h);

    for (int k = 0; k <= nk; ++k)
        for (int j = 0; j <= n[1]; ++j)
            for (int i = 0; i <= n[0]; ++i) {
                const bool on_max = i == n[0] || j == n[1] || (dim == 3 && k == nk);
                if (!on_max) continue;
                const int master = node_index(n, i % n[0], j % n[1], dim == 3 ? k % nk : 0);
                mesh.periodic_pairs.emplace_back(node_index(n, i, j, k), master);
            }

    std::vector<int> raw_phase;
    const int ek = dim == 3 ? nk : 1;
    for (int k = 0; k < ek; ++k)
        for (int j = 0; j < n[1]; ++j)
            for (int i = 0; i < n[0]; ++i) {
                std::array<int, 8> conn{};
                const int k1 = dim == 3 ? k + 1 : 0;
                conn[0] = node_index(n, i, j, k);
                conn[1] = node_index(n, i + 1, j, k);
                conn[2] = node_index(n, i + 1, j + 1, k);
                conn[3] = node_index(n, i, j + 1, k);
                if (dim == 3) {
                    conn[4] = node_index(n, i, j, k1);
                    conn[5] = node_index(n, i + 1, j, k1);
                    conn[6] = node_index(n, i + 1, j + 1, k1);
                    conn[7] = node_index(n, i, j + 1, k1);
                }
                mesh.elements.push_back(conn);
                const Eigen::Vector3d center((i + 0.5) * h, (j + 0.5) * h,
                                             dim == 3 ? (k + 0.5) * h : 0.0);
                const int p = classify(center);
                if (p < 0 || p >= static_cast<int>(raw_names.size()))
                    throw ConfigError("classifier returned invalid phase id");
                raw_phase.push_back(p);
            }

    std::vector<int> remap(raw_names.size(), -1);
    for (int p : raw_phase) remap[p] = 0;
    for (std::size_t p = 0; p < raw_names.size(); ++p)
        if (remap[p] == 0) {
            remap[p] = static_cast<int>(mesh.phase_names.size());
            mesh.phase_names.push_back(raw_names[p]);
        }
    for (int p : raw_phase) mesh.element_phase.push_back(remap[p]);

    const int gpe = mesh.gauss_per_element();
    for (int e = 0; e < mesh.n_elements(); ++e)
        for (int l = 0; l < gpe; ++l) {
            const Eigen::Vector3d xi = gauss_reference_point(dim, l);
            const auto pg = physical_gradients(mesh, e, xi);
            GaussPointRef gp;
            gp.index = static_cast<int>(mesh.gauss_points.size());
            gp.element = e;
            gp.local = l;
            gp.weight = pg.det_j;  // unit Gauss weights for the 2-point rule
            gp.phase = mesh.element_phase[e];
            mesh.gauss_points.push_back(gp);
            const auto nv = shape_values(dim, xi);
            Eigen::Vector3d x = Eigen::Vector3d::Zero();
            for (int a = 0; a < mesh.nodes_per_element(); ++a)
                x += nv(a) * mesh.nodes[mesh.elements[e][a]];
            mesh.gauss_positions.push_back(x);
        }
    mesh.volume = 1.0;  // unit square / unit cube
    return mesh;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Layered (cross-ply) archetype

struct LayeredRveConfig {
    int dimension = 2;
    int resolution = 32;
    int ply_count = 2;
    double fiber_fraction = 0.35;
    double interphase_thickness = 1.0 / 32.0;  // cohesive band around fibers
    double interply_thickness = 1.0 / 32.0;
};

inline const std::vector<std::string>& layered_phase_names() {
    static const std::vector<std::string> names{"matrix", "fiber", "cohesive", "interply"};
    return names;
}

// Plies are stacked along y. Even plies carry a full-width fiber band (fibers
// in-plane along x), odd plies a square fiber section (fibers along z). Each
// fiber is wrapped in a cohesive band; an interply band closes every ply.
// Geometry is snapped to whole cells.
inline RveMesh build_layered_rve(const LayeredRveConfig& cfg) {
    const int n = cfg.resolution;
    if (cfg.ply_count < 1) throw ConfigError("ply_count must be >= 1");
    if (n % cfg.ply_count != 0)
        throw ConfigError("resolution must be divisible by ply_count");
    if (!(cfg.fiber_fraction >= 0.0 && cfg.fiber_fraction < 1.0))
        throw ConfigError("fiber_fraction must be in [0, 1)");
    const double h = 1.0 / n;
    auto to_cells = [&](double t, const char* what) {
        if (t < 0.0) throw ConfigError(std::string(what) + " must be >= 0");
        if (t == 0.0) return 0;
        if (t < h * (1.0 - 1e-12))
            throw ConfigError(std::string(what) + " thinner than one element; refine resolution");
        return static_cast<int>(std::lround(t / h));
    };
    const int tc = to_cells(cfg.interphase_thickness, "interphase_thickness");
    const int ti = to_cells(cfg.interply_thickness, "interply_thickness");
    const int ply_h = n / cfg.ply_count;
    const double fiber_cells = cfg.fiber_fraction * n * n / cfg.ply_count;
    const int band = static_cast<int>(std::lround(fiber_cells / n));
    const int side = static_cast<int>(std::lround(std::sqrt(fiber_cells)));
    if (band + 2 * tc + ti > ply_h || (cfg.ply_count > 1 && side + 2 * tc + ti > ply_h) ||
        side + 2 * tc > n)
        throw ConfigError("fiber layout does not fit in a ply at this resolution");

    auto classify = [=](const Eigen::Vector3d& c) {
        const int ci = static_cast<int>(std::floor(c.x() / h));
        const int cj = static_cast<int>(std::floor(c.y() / h));
        const int ply = cj / ply_h;
        const int row = cj % ply_h;  // row within ply
        if (row >= ply_h - ti) return 3;
        const int usable = ply_h - ti;
        if (ply % 2 == 0) {
            const int start = (usable - band) / 2;
            if (row >= start && row < start + band) return 1;
            if (row >= start - tc && row < start + band + tc) return 2;
            return 0;
        }
        const int r0 = (usable - side) / 2;
        const int c0 = (n - side) / 2;
        const bool in_r = row >= r0 && row < r0 + side;
        const bool in_c = ci >= c0 && ci < c0 + side;
        if (in_r && in_c) return 1;
        const bool in_rc = row >= r0 - tc && row < r0 + side + tc;
        const bool in_cc = ci >= c0 - tc && ci < c0 + side + tc;
        if (in_rc && in_cc) return 2;
        return 0;
    };
    return detail::build_structured(cfg.dimension, n, layered_phase_names(), classify);
}

// ---------------------------------------------------------------------------
// Random fiber archetype

struct FiberRveConfig {
    int dimension = 2;
    int resolution = 32;
    double volume_fraction = 0.6;
    int fiber_count = 4;
    double min_gap = -1.0;  // centre-distance clearance; < 0 means one element width
    std::int64_t max_attempts = 2'000'000;
};

struct FiberLayout {
    double radius = 0.0;
    std::vector<Eigen::Vector2d> centers;
};

inline double periodic_distance(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    Eigen::Vector2d d = (a - b).cwiseAbs();
    for (int i = 0; i < 2; ++i) d(i) = std::min(d(i), 1.0 - d(i));
    return d.norm();
}

// Seeded random sequential addition with full restarts.
inline FiberLayout place_fibers(const FiberRveConfig& cfg, std::uint64_t seed) {
    FiberLayout layout;
    if (cfg.volume_fraction == 0.0 || cfg.fiber_count == 0) return layout;
    if (!(cfg.volume_fraction > 0.0 && cfg.volume_fraction <= 0.65))
        throw ConfigError("fiber volume_fraction must be in [0, 0.65]");
    if (cfg.fiber_count < 0) throw ConfigError("fiber_count must be >= 0");
    layout.radius = std::sqrt(cfg.volume_fraction / (cfg.fiber_count * std::numbers::pi));
    const double gap = cfg.min_gap < 0.0 ? 1.0 / cfg.resolution : cfg.min_gap;
    const double dmin = 2.0 * layout.radius + gap;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int per_fiber = 1000;
    std::int64_t attempts = 0;
    std::size_t best = 0;
    while (attempts < cfg.max_attempts) {
        std::vector<Eigen::Vector2d> centers;
        bool stuck = false;
        while (static_cast<int>(centers.size()) < cfg.fiber_count && !stuck) {
            bool placed = false;
            for (int t = 0; t < per_fiber && attempts < cfg.max_attempts; ++t, ++attempts) {
                const Eigen::Vector2d p(u(rng), u(rng));
                bool ok = true;
                for (const auto& q : centers)
                    if (periodic_distance(p, q) < dmin) {
                        ok = false;
                        break;
                    }
                if (ok) {
                    centers.push_back(p);
                    placed = true;
                    break;
                }
            }
            stuck = !placed;
        }
        best = std::max(best, centers.size());
        if (static_cast<int>(centers.size()) == cfg.fiber_count) {
            layout.centers = std::move(centers);
            return layout;
        }
    }
    const double achieved = best * std::numbers::pi * layout.radius * layout.radius;
    throw SaturationError("fiber placement saturated after " + std::to_string(cfg.max_attempts) +
                              " attempts; achieved fraction " + std::to_string(achieved),
                          achieved);
}

inline const std::vector<std::string>& fiber_phase_names() {
    static const std::vector<std::string> names{"matrix", "fiber"};
    return names;
}

// Fibers are circles in 2D and z-aligned cylinders in 3D; element phase is
// decided at the element centre.
inline RveMesh build_fiber_rve(const FiberRveConfig& cfg, std::uint64_t seed) {
    const FiberLayout layout = place_fibers(cfg, seed);
    auto classify = [&layout](const Eigen::Vector3d& c) {
        const Eigen::Vector2d p(c.x(), c.y());
        for (const auto& q : layout.centers)
            if (periodic_distance(p, q) <= layout.radius) return 1;
        return 0;
    };
    return detail::build_structured(cfg.dimension, cfg.resolution, fiber_phase_names(), classify);
}

// Uniform cell with a single phase; used by oracles and tests.
inline RveMesh build_homogeneous_rve(int dimension, int resolution, const std::string& phase = "matrix") {
    return detail::build_structured(dimension, resolution, {phase},
                                    [](const Eigen::Vector3d&) { return 0; });
}

// Resolves the per-phase material table for a mesh by phase name.
inline std::vector<PhaseMaterial> materials_for(const RveMesh& mesh,
                                                const std::map<std::string, PhaseMaterial>& table) {
    std::vector<PhaseMaterial> out;
    for (const auto& name : mesh.phase_names) {
        const auto it = table.find(name);
        if (it == table.end()) throw ConfigError("no material given for phase '" + name + "'");
        it->second.validate();
        out.push_back(it->second);
        out.back().name = name;
    }
    return out;
}

inline void write_mesh_text(std::ostream& os, const RveMesh& mesh) {
    os << "# hyperfe2 mesh\n";
    os << "dimension " << mesh.dim << "\n";
    os << "phases " << mesh.n_phases() << "\n";
    for (int p = 0; p < mesh.n_phases(); ++p) os << p << " " << mesh.phase_names[p] << "\n";
    os << "nodes " << mesh.n_nodes() << "\n";
    os.precision(17);
    for (const auto& x : mesh.nodes) {
        os << x.x() << " " << x.y();
        if (mesh.dim == 3) os << " " << x.z();
        os << "\n";
    }
    os << "elements " << mesh.n_elements() << " " << mesh.nodes_per_element() << "\n";
    for (int e = 0; e < mesh.n_elements(); ++e) {
        os << mesh.element_phase[e];
        for (int a = 0; a < mesh.nodes_per_element(); ++a) os << " " << mesh.elements[e][a];
        os << "\n";
    }
}

}  // namespace hyperfe2
