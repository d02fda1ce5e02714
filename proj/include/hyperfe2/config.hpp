#pragma once

// Experiment configuration read from an INI file:
//
//   [geometry]        model = fiber | layered | homogeneous, dimension, resolution, seed, ...
//   [material.NAME]   one block per phase, PhaseMaterial fields
//   [sampling]        directions, steps, chi_end, seed, workers
//   [reduction]       inelastic_modes, energy_modes, internal_modes, modes, points
//   [validation]      direction, chi_end, steps
//   [override.NAME]   optional per-phase material overrides for customization runs
//   [coupon]          macro coupon settings

#include "hyperfe2/common.hpp"
#include "hyperfe2/rve_model.hpp"
#include "hyperfe2/sampling.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hyperfe2 {

struct GeometryConfig {
    std::string model = "fiber";
    int dimension = 2;
    int resolution = 32;
    std::uint64_t seed = 1;
    FiberRveConfig fiber;
    LayeredRveConfig layered;
};

struct ReductionConfig {
    int inelastic_modes = 60;    // n_i cap of the stored strain basis
    int energy_modes = 400;      // N_phi cap of the stored energy basis
    int internal_modes = 60;     // n_r
    std::vector<int> modes{10, 20, 40};        // n_eps sweep
    std::vector<int> points{50, 100, 200, 400};  // N_r sweep
};

struct ValidationConfig {
    VoigtVector direction;  // unit norm after loading
    double chi_end = 0.02;
    int steps = 40;
};

struct CouponConfig {
    int nx = 4;
    int ny = 2;
    double length = 8.0;
    double height = 4.0;
    double max_displacement = 0.08;
    int steps = 20;
    double fiber_angle_deg = 0.0;
    int probe_gauss_point = 0;
    std::vector<int> modes{20, 40};
    std::vector<int> points{100, 400};
};

struct ExperimentConfig {
    std::filesystem::path source;
    GeometryConfig geometry;
    std::map<std::string, PhaseMaterial> materials;
    std::map<std::string, std::map<std::string, double>> overrides;
    SamplingPlan sampling;
    ReductionConfig reduction;
    ValidationConfig validation;
    CouponConfig coupon;
    std::filesystem::path output = "out";
};

namespace detail {

template <class T>
std::vector<T> parse_list(const std::string& text, const std::string& key) {
    std::vector<T> out;
    std::string s = text;
    for (char& c : s)
        if (c == ',' || c == ';' || c == '[' || c == ']') c = ' ';
    std::istringstream is(s);
    T v{};
    while (is >> v) out.push_back(v);
    if (!is.eof()) throw ConfigError("cannot parse list for '" + key + "': " + text);
    return out;
}

inline const std::vector<std::string>& material_keys() {
    static const std::vector<std::string> keys{"young_modulus",      "poisson_ratio", "elastic_threshold",
                                               "infinity_threshold", "hardening_h1",  "hardening_h2",
                                               "inelastic"};
    return keys;
}

inline void apply_material_key(PhaseMaterial& m, const std::string& key, double v) {
    if (key == "young_modulus") m.young_modulus = v;
    else if (key == "poisson_ratio") m.poisson_ratio = v;
    else if (key == "elastic_threshold") m.elastic_threshold = v;
    else if (key == "infinity_threshold") m.infinity_threshold = v;
    else if (key == "hardening_h1") m.hardening_h1 = v;
    else if (key == "hardening_h2") m.hardening_h2 = v;
    else if (key == "inelastic") m.is_inelastic = v != 0.0;
    else throw ConfigError("unknown material key '" + key + "' for phase '" + m.name + "'");
}

template <class T>
T get_value(const boost::property_tree::ptree& section, const std::string& key, const T& fallback) {
    const auto v = section.get_optional<std::string>(key);
    if (!v) return fallback;
    std::istringstream is(*v);
    T out{};
    if constexpr (std::is_same_v<T, bool>) {
        std::string word;
        is >> word;
        if (word == "true" || word == "1" || word == "yes") return true;
        if (word == "false" || word == "0" || word == "no") return false;
        throw ConfigError("bad boolean for '" + key + "': " + *v);
    } else {
        if (!(is >> out)) throw ConfigError("bad value for '" + key + "': " + *v);
        std::string rest;
        if (is >> rest) throw ConfigError("trailing text for '" + key + "': " + *v);
        return out;
    }
}

inline void check_keys(const boost::property_tree::ptree& section, const std::string& name,
                       const std::vector<std::string>& allowed) {
    for (const auto& kv : section) {
        bool ok = false;
        for (const auto& a : allowed) ok = ok || kv.first == a;
        if (!ok) throw ConfigError("unknown key '" + kv.first + "' in [" + name + "]");
    }
}

}  // namespace detail

inline PhaseMaterial apply_overrides(const PhaseMaterial& base, const std::map<std::string, double>& ov) {
    PhaseMaterial m = base;
    for (const auto& [k, v] : ov) detail::apply_material_key(m, k, v);
    m.validate();
    return m;
}

inline std::map<std::string, PhaseMaterial> overridden_materials(const ExperimentConfig& cfg) {
    auto out = cfg.materials;
    for (const auto& [phase, ov] : cfg.overrides) {
        const auto it = out.find(phase);
        if (it == out.end()) throw ConfigError("override for unknown phase '" + phase + "'");
        it->second = apply_overrides(it->second, ov);
    }
    return out;
}

inline ExperimentConfig parse_config(std::istream& is, const std::filesystem::path& source = {}) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    ExperimentConfig cfg;
    cfg.source = source;
    const pt::ptree empty;
    auto section = [&](const std::string& name) -> const pt::ptree& {
        const auto child = tree.get_child_optional(pt::ptree::path_type(name, '\0'));
        return child ? *child : empty;
    };

    const auto& g = section("geometry");
    detail::check_keys(g, "geometry",
                       {"model", "dimension", "resolution", "seed", "volume_fraction", "fiber_count", "min_gap",
                        "ply_count", "fiber_fraction", "interphase_thickness", "interply_thickness"});
    cfg.geometry.model = detail::get_value<std::string>(g, "model", "fiber");
    cfg.geometry.dimension = detail::get_value(g, "dimension", 2);
    cfg.geometry.resolution = detail::get_value(g, "resolution", 32);
    cfg.geometry.seed = detail::get_value<std::uint64_t>(g, "seed", 1);
    auto& fc = cfg.geometry.fiber;
    fc.dimension = cfg.geometry.dimension;
    fc.resolution = cfg.geometry.resolution;
    fc.volume_fraction = detail::get_value(g, "volume_fraction", fc.volume_fraction);
    fc.fiber_count = detail::get_value(g, "fiber_count", fc.fiber_count);
    fc.min_gap = detail::get_value(g, "min_gap", fc.min_gap);
    auto& lc = cfg.geometry.layered;
    lc.dimension = cfg.geometry.dimension;
    lc.resolution = cfg.geometry.resolution;
    lc.ply_count = detail::get_value(g, "ply_count", lc.ply_count);
    lc.fiber_fraction = detail::get_value(g, "fiber_fraction", lc.fiber_fraction);
    lc.interphase_thickness = detail::get_value(g, "interphase_thickness", lc.interphase_thickness);
    lc.interply_thickness = detail::get_value(g, "interply_thickness", lc.interply_thickness);
    if (cfg.geometry.model != "fiber" && cfg.geometry.model != "layered" && cfg.geometry.model != "homogeneous")
        throw ConfigError("geometry.model must be fiber, layered or homogeneous");
    voigt_size(cfg.geometry.dimension);

    for (const auto& [name, sec] : tree) {
        if (name.rfind("material.", 0) == 0) {
            PhaseMaterial m;
            m.name = name.substr(9);
            detail::check_keys(sec, name, detail::material_keys());
            for (const auto& kv : sec) {
                if (kv.first == "inelastic") {
                    m.is_inelastic = detail::get_value<bool>(sec, "inelastic", false);
                    continue;
                }
                detail::apply_material_key(m, kv.first, detail::get_value<double>(sec, kv.first, 0.0));
            }
            m.validate();
            cfg.materials[m.name] = m;
        } else if (name.rfind("override.", 0) == 0) {
            detail::check_keys(sec, name, detail::material_keys());
            auto& ov = cfg.overrides[name.substr(9)];
            for (const auto& kv : sec)
                ov[kv.first] = kv.first == "inelastic" ? (detail::get_value<bool>(sec, kv.first, false) ? 1.0 : 0.0)
                                                       : detail::get_value<double>(sec, kv.first, 0.0);
        }
    }
    if (cfg.materials.empty()) throw ConfigError("config defines no [material.*] section");

    const auto& s = section("sampling");
    detail::check_keys(s, "sampling", {"directions", "steps", "chi_end", "seed", "workers"});
    cfg.sampling.n_dirs = detail::get_value(s, "directions", cfg.sampling.n_dirs);
    cfg.sampling.n_steps = detail::get_value(s, "steps", cfg.sampling.n_steps);
    cfg.sampling.chi_end = detail::get_value(s, "chi_end", cfg.sampling.chi_end);
    cfg.sampling.seed = detail::get_value<std::uint64_t>(s, "seed", cfg.sampling.seed);
    cfg.sampling.workers = detail::get_value<unsigned>(s, "workers", cfg.sampling.workers);
    cfg.sampling.n_sigma = voigt_size(cfg.geometry.dimension);
    cfg.sampling.validate();

    const auto& r = section("reduction");
    detail::check_keys(r, "reduction", {"inelastic_modes", "energy_modes", "internal_modes", "modes", "points"});
    auto& rc = cfg.reduction;
    rc.inelastic_modes = detail::get_value(r, "inelastic_modes", rc.inelastic_modes);
    rc.energy_modes = detail::get_value(r, "energy_modes", rc.energy_modes);
    rc.internal_modes = detail::get_value(r, "internal_modes", rc.internal_modes);
    if (auto v = r.get_optional<std::string>("modes")) rc.modes = detail::parse_list<int>(*v, "modes");
    if (auto v = r.get_optional<std::string>("points")) rc.points = detail::parse_list<int>(*v, "points");
    if (rc.modes.empty() || rc.points.empty()) throw ConfigError("reduction sweep lists must be nonempty");

    const auto& v = section("validation");
    detail::check_keys(v, "validation", {"direction", "chi_end", "steps"});
    const int ns = cfg.sampling.n_sigma;
    std::vector<double> dir;
    if (auto d = v.get_optional<std::string>("direction")) dir = detail::parse_list<double>(*d, "direction");
    else if (ns == 3) dir = {-0.076, 0.748, 0.539};
    else dir = {-0.076, 0.748, 0.188, 0.539, 0.006, -0.329};
    if (static_cast<int>(dir.size()) != ns)
        throw ConfigError("validation.direction needs " + std::to_string(ns) + " components");
    cfg.validation.direction = Eigen::Map<const Eigen::VectorXd>(dir.data(), ns);
    if (cfg.validation.direction.norm() == 0.0) throw ConfigError("validation.direction is zero");
    cfg.validation.direction.normalize();
    cfg.validation.chi_end = detail::get_value(v, "chi_end", cfg.sampling.chi_end);
    cfg.validation.steps = detail::get_value(v, "steps", cfg.sampling.n_steps);

    const auto& c = section("coupon");
    detail::check_keys(c, "coupon",
                       {"nx", "ny", "length", "height", "max_displacement", "steps", "fiber_angle", "probe_gauss_point",
                        "modes", "points"});
    auto& cc = cfg.coupon;
    cc.nx = detail::get_value(c, "nx", cc.nx);
    cc.ny = detail::get_value(c, "ny", cc.ny);
    cc.length = detail::get_value(c, "length", cc.length);
    cc.height = detail::get_value(c, "height", cc.height);
    cc.max_displacement = detail::get_value(c, "max_displacement", cc.max_displacement);
    cc.steps = detail::get_value(c, "steps", cc.steps);
    cc.fiber_angle_deg = detail::get_value(c, "fiber_angle", cc.fiber_angle_deg);
    cc.probe_gauss_point = detail::get_value(c, "probe_gauss_point", cc.probe_gauss_point);
    if (auto m = c.get_optional<std::string>("modes")) cc.modes = detail::parse_list<int>(*m, "coupon.modes");
    if (auto p = c.get_optional<std::string>("points")) cc.points = detail::parse_list<int>(*p, "coupon.points");
    if (cc.modes.size() != cc.points.size()) throw ConfigError("coupon.modes and coupon.points must pair up");

    const auto& o = section("output");
    detail::check_keys(o, "output", {"dir"});
    cfg.output = detail::get_value<std::string>(o, "dir", "out");
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config " + path.string());
    return parse_config(is, path);
}

inline RveMesh build_rve(const GeometryConfig& g) {
    if (g.model == "fiber") return build_fiber_rve(g.fiber, g.seed);
    if (g.model == "layered") return build_layered_rve(g.layered);
    return build_homogeneous_rve(g.dimension, g.resolution);
}

}  // namespace hyperfe2
