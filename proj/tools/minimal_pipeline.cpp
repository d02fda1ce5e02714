// Smallest end-to-end use of the library: sample a 12x12 fiber cell, build the
// bases, select a 120-point rule and compare the reduced response with HF on
// one trajectory.

#include "hyperfe2/hyperfe2.hpp"

#include <cstdio>

using namespace hyperfe2;

int main() {
    FiberRveConfig geometry;
    geometry.resolution = 12;
    geometry.volume_fraction = 0.4;
    const RveMesh mesh = build_fiber_rve(geometry, 2);
    const auto materials = materials_for(mesh, model_b_materials());

    SamplingPlan plan;
    plan.n_dirs = 10;
    plan.n_steps = 12;
    plan.chi_end = 0.02;
    plan.seed = 3;
    ReductionConfig reduction;
    reduction.inelastic_modes = 20;
    reduction.energy_modes = 200;
    reduction.internal_modes = 20;
    const auto model = build_reduced_model(collect_snapshots(plan, mesh, materials), mesh, materials, reduction);
    const auto online = make_online_model(model, mesh, materials, 12, 120);

    VoigtVector dir(3);
    dir << -0.076, 0.748, 0.539;
    dir.normalize();
    const auto chis = monotone_schedule(0.02, 20);
    HfSolver hf(mesh, materials);
    const auto r = compare_on_schedule(hf, *online.solver, dir, chis);
    std::printf("%d gauss points -> %d cubature points, %d modes\n", mesh.n_gauss(), online.rule.size(),
                online.basis.n_modes());
    std::printf("trajectory error %.3f%%, HF %.3f s, reduced %.4f s\n", 100.0 * r.error, r.hf_seconds,
                r.reduced_seconds);
    return 0;
}
