#include "hyperfe2/hyperfe2.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hyperfe2;

namespace {

StressCurve ramp_curve(int n, double scale = 1.0) {
    StressCurve c;
    for (int k = 0; k <= n; ++k) {
        VoigtVector e(3), s(3);
        e << 0.001 * k, -0.0005 * k, 0.0002 * k;
        s << 10.0 * k * scale, -3.0 * k * scale, 1.0 * k * scale;
        c.push(0.001 * k, e, s, 0.01 * k);
    }
    return c;
}

}  // namespace

TEST(Curves, CsvRoundTripIsExact) {
    const StressCurve c = ramp_curve(5);
    std::stringstream ss;
    write_curve_csv(ss, c);
    const StressCurve back = read_curve_csv(ss);
    ASSERT_EQ(back.size(), c.size());
    for (int k = 0; k < c.size(); ++k) {
        EXPECT_EQ(back.chi[k], c.chi[k]);
        EXPECT_EQ(back.strain[k], c.strain[k]);
        EXPECT_EQ(back.stress[k], c.stress[k]);
        EXPECT_EQ(back.max_damage[k], c.max_damage[k]);
    }
    std::stringstream bad("chi,a,b\r\n1,2,3\r\n");
    EXPECT_THROW(read_curve_csv(bad), FormatError);
}

TEST(Curves, TrajectoryErrorExamples) {
    const StressCurve ref = ramp_curve(4);
    EXPECT_EQ(trajectory_error(ref, ref), 0.0);
    EXPECT_NEAR(trajectory_error(ref, ramp_curve(4, 1.01)), 0.01, 1e-14);

    // Two steps, hand-computed: |(1,2,0)-(1,1,0)|_inf / 2 = 0.5 and |(4,0,1)-(4,0,0)|_inf / 4 = 0.25.
    StressCurve a, b;
    VoigtVector e = VoigtVector::Zero(3), s(3);
    a.push(0.0, e, VoigtVector::Zero(3), 0);
    b.push(0.0, e, VoigtVector::Ones(3), 0);  // chi = 0 is skipped
    s << 1, 2, 0;
    a.push(0.1, e, s, 0);
    s << 1, 1, 0;
    b.push(0.1, e, s, 0);
    s << 4, 0, 1;
    a.push(0.2, e, s, 0);
    s << 4, 0, 0;
    b.push(0.2, e, s, 0);
    EXPECT_DOUBLE_EQ(trajectory_error(a, b), 0.5);

    EXPECT_THROW(trajectory_error(ref, ramp_curve(3)), AlignmentError);
    StressCurve shifted = ref;
    shifted.chi[2] += 1e-6;
    EXPECT_THROW(trajectory_error(ref, shifted), AlignmentError);
    StressCurve zero;
    zero.push(0.1, e, VoigtVector::Zero(3), 0);
    EXPECT_THROW(trajectory_error(zero, zero), UndefinedErrorMetric);
}

TEST(Curves, Schedules) {
    const auto m = monotone_schedule(0.02, 4);
    ASSERT_EQ(m.size(), 4u);
    EXPECT_DOUBLE_EQ(m.back(), 0.02);
    const auto c = cyclic_schedule(0.02, 4);
    ASSERT_EQ(c.size(), 8u);
    EXPECT_DOUBLE_EQ(c[3], 0.02);
    EXPECT_DOUBLE_EQ(c[4], 0.015);
    EXPECT_EQ(c.back(), 0.0);
    EXPECT_THROW(monotone_schedule(0.02, 0), ConfigError);
}

TEST(CsvTable, QuotesAndRoundTrips) {
    CsvTable t({"name", "value"});
    t.add_row({"plain", "1"});
    t.add_row({"with,comma", "say \"hi\""});
    std::stringstream ss;
    t.write(ss);
    const CsvTable back = CsvTable::read(ss);
    EXPECT_EQ(back.header(), t.header());
    EXPECT_EQ(back.rows(), t.rows());
    EXPECT_THROW(t.add_row({"short"}), ConfigError);
}

TEST(Config, ParsesShippedConfigs) {
    for (const char* name : {"model_a.ini", "model_b.ini", "model_b_custom_m3.ini"}) {
        const auto cfg = load_config(std::filesystem::path(HYPERFE2_SOURCE_DIR) / "configs" / name);
        EXPECT_FALSE(cfg.materials.empty()) << name;
        EXPECT_NEAR(cfg.validation.direction.norm(), 1.0, 1e-14) << name;
    }
    const auto b = load_config(std::filesystem::path(HYPERFE2_SOURCE_DIR) / "configs" / "model_b.ini");
    EXPECT_EQ(b.geometry.model, "fiber");
    EXPECT_EQ(b.sampling.n_dirs, 100);
    EXPECT_EQ(b.reduction.modes, (std::vector<int>{10, 20, 40}));
    EXPECT_DOUBLE_EQ(overridden_materials(b).at("matrix").young_modulus, 8000.0);
    EXPECT_DOUBLE_EQ(b.materials.at("matrix").young_modulus, 4000.0);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
    const std::string base = "[material.matrix]\nyoung_modulus = 4000\npoisson_ratio = 0.3\n";
    {
        std::istringstream is(base + "[sampling]\ndirectoins = 4\n");
        EXPECT_THROW(parse_config(is), ConfigError);
    }
    {
        std::istringstream is(base + "colour = blue\n");
        EXPECT_THROW(parse_config(is), ConfigError);
    }
    {
        std::istringstream is(base + "[geometry]\nmodel = hexagonal\n");
        EXPECT_THROW(parse_config(is), ConfigError);
    }
    {
        std::istringstream is("[geometry]\nmodel = fiber\n");
        EXPECT_THROW(parse_config(is), ConfigError);
    }
    {
        std::istringstream is(base + "[sampling]\ndirections = many\n");
        EXPECT_THROW(parse_config(is), ConfigError);
    }
    std::istringstream ok(base + "[sampling]\ndirections = 4\n");
    EXPECT_EQ(parse_config(ok).sampling.n_dirs, 4);
}

TEST(Coupon, ZeroDisplacementGivesZeroReaction) {
    CouponConfig cfg;
    cfg.max_displacement = 0.0;
    cfg.steps = 2;
    const Matrix c = isotropic_elasticity(4000.0, 0.3, 3);
    const auto steps = run_coupon_linear(c, cfg);
    ASSERT_EQ(steps.size(), 2u);
    for (const auto& s : steps) EXPECT_EQ(s.reaction, 0.0);
}

TEST(Coupon, LinearReactionScalesWithDisplacement) {
    CouponConfig cfg;
    cfg.max_displacement = 0.02;
    cfg.steps = 2;
    cfg.fiber_angle_deg = 30.0;
    const Matrix c = isotropic_elasticity(4000.0, 0.3, 3);
    const auto steps = run_coupon_linear(c, cfg);
    EXPECT_NE(steps[0].reaction, 0.0);
    EXPECT_NEAR(steps[1].reaction, 2.0 * steps[0].reaction, 1e-10 * std::abs(steps[1].reaction));
    EXPECT_EQ(reaction_error(steps, steps), 0.0);
}

TEST(ReducedModel, SaveLoadRoundTrip) {
    const RveMesh mesh = build_homogeneous_rve(2, 4);
    const std::vector<PhaseMaterial> mats{{"matrix", 4000, 0.38, 60, 70, 0.335, 0.05, true}};
    SamplingPlan plan;
    plan.n_dirs = 3;
    plan.n_steps = 6;
    plan.chi_end = 0.02;
    plan.seed = 2;
    ReductionConfig rc;
    rc.inelastic_modes = 4;
    rc.energy_modes = 10;
    rc.internal_modes = 5;
    const auto model = build_reduced_model(collect_snapshots(plan, mesh, mats), mesh, mats, rc);
    const auto dir = std::filesystem::temp_directory_path() / "hyperfe2_test_rom";
    std::filesystem::remove_all(dir);
    save_reduced_model(dir, model);
    const auto back = load_reduced_model(dir);
    EXPECT_EQ(back.strain.modes, model.strain.modes);
    EXPECT_EQ(back.strain.n_elastic, model.strain.n_elastic);
    EXPECT_EQ(back.energy.modes, model.energy.modes);
    EXPECT_EQ(back.internal.modes, model.internal.modes);
    EXPECT_EQ(back.weighted_r0, model.weighted_r0);
    EXPECT_EQ(back.snapshot_hashes, model.snapshot_hashes);

    // Corrupting a basis file is detected through the manifest hash.
    {
        std::fstream f(dir / "strain_basis.bin", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-1, std::ios::end);
        f.put('\x7f');
    }
    EXPECT_THROW(load_reduced_model(dir), FormatError);
    std::filesystem::remove_all(dir);
}

TEST(Coupon, HfCellsMatchLinearOracleWhenElasticAndSoftenWhenDamaged) {
    const RveMesh mesh = build_homogeneous_rve(2, 2);
    const std::vector<PhaseMaterial> mats{{"matrix", 4000, 0.38, 60, 70, 0.335, 0.05, true}};
    CouponConfig cfg;
    cfg.nx = 2;
    cfg.ny = 1;
    cfg.length = 4;
    cfg.height = 2;
    cfg.fiber_angle_deg = 30.0;
    cfg.steps = 2;
    cfg.max_displacement = 1e-4;
    const Matrix c = hf_elastic_tensor(mesh, mats);
    EXPECT_LT(reaction_error(run_coupon_hf(mesh, mats, cfg), run_coupon_linear(c, cfg)), 1e-6);
    cfg.max_displacement = 0.1;
    cfg.steps = 4;
    const auto hf = run_coupon_hf(mesh, mats, cfg, 2);
    const auto lin = run_coupon_linear(c, cfg);
    EXPECT_LT(std::abs(hf.back().reaction), 0.9 * std::abs(lin.back().reaction));
}
