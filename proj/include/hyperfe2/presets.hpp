#pragma once

// Desk-scale analogs of the two reference microcells and the customization
// overrides used by the benchmarks.

#include "hyperfe2/config.hpp"
#include "hyperfe2/rve_model.hpp"

#include <map>
#include <string>

namespace hyperfe2 {

// Layered cross-ply analog: matrix, elastic fiber, cohesive and interply bands.
inline std::map<std::string, PhaseMaterial> model_a_materials() {
    return {
        {"matrix", {"matrix", 3790.0, 0.37, 200.0, 220.0, 0.10, 0.01, true}},
        {"fiber", {"fiber", 72000.0, 0.25, 0.0, 0.0, 0.0, 0.0, false}},
        {"cohesive", {"cohesive", 3790.0, 0.37, 100.0, 100.1, 0.01, 0.01, true}},
        {"interply", {"interply", 3790.0, 0.37, 100.0, 100.1, 0.01, 0.01, true}},
    };
}

// Random unidirectional fibers in a damageable matrix.
inline std::map<std::string, PhaseMaterial> model_b_materials() {
    return {
        {"matrix", {"matrix", 4000.0, 0.38, 60.0, 70.0, 0.335, 0.05, true}},
        {"fiber", {"fiber", 231000.0, 0.2, 0.0, 0.0, 0.0, 0.0, false}},
    };
}

inline ExperimentConfig model_a_config(int resolution = 32) {
    ExperimentConfig cfg;
    cfg.geometry.model = "layered";
    cfg.geometry.dimension = 2;
    cfg.geometry.resolution = resolution;
    cfg.geometry.layered.resolution = resolution;
    cfg.materials = model_a_materials();
    cfg.sampling.n_dirs = 40;
    cfg.sampling.n_steps = 40;
    cfg.sampling.chi_end = 0.1;
    cfg.sampling.seed = 7;
    cfg.sampling.n_sigma = 3;
    cfg.validation.direction = VoigtVector(3);
    cfg.validation.direction << -0.076, 0.748, 0.539;
    cfg.validation.direction.normalize();
    cfg.validation.chi_end = 0.1;
    cfg.validation.steps = 40;
    return cfg;
}

inline ExperimentConfig model_b_config(int resolution = 24) {
    ExperimentConfig cfg;
    cfg.geometry.model = "fiber";
    cfg.geometry.dimension = 2;
    cfg.geometry.resolution = resolution;
    cfg.geometry.fiber.resolution = resolution;
    cfg.geometry.seed = 1;
    cfg.materials = model_b_materials();
    cfg.sampling.n_dirs = 100;
    cfg.sampling.n_steps = 40;
    cfg.sampling.chi_end = 0.02;
    cfg.sampling.seed = 7;
    cfg.sampling.n_sigma = 3;
    cfg.reduction.energy_modes = 1600;
    cfg.reduction.points = {100, 200, 400, 800, 1600};
    cfg.validation.direction = VoigtVector(3);
    cfg.validation.direction << -0.076, 0.748, 0.539;
    cfg.validation.direction.normalize();
    cfg.validation.chi_end = 0.02;
    cfg.validation.steps = 40;
    return cfg;
}

// Matrix stiffness doubled.
inline std::map<std::string, std::map<std::string, double>> custom_m1_overrides() {
    return {{"matrix", {{"young_modulus", 8000.0}}}};
}

// Matrix stiffness doubled with a lower hardening and a higher infinity threshold.
inline std::map<std::string, std::map<std::string, double>> custom_m2_overrides() {
    return {{"matrix",
             {{"young_modulus", 8000.0}, {"infinity_threshold", 140.0}, {"hardening_h1", 0.10}, {"hardening_h2", 0.01}}}};
}

// Fibers become damageable with matrix-like thresholds.
inline std::map<std::string, std::map<std::string, double>> custom_m3_overrides() {
    return {{"fiber",
             {{"inelastic", 1.0},
              {"elastic_threshold", 60.0},
              {"infinity_threshold", 70.0},
              {"hardening_h1", 0.01},
              {"hardening_h2", 0.01}}}};
}

}  // namespace hyperfe2
