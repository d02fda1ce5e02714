#pragma once

// Offline/online pipeline orchestration and the benchmark experiments: error
// sweeps against the HF validation curve, load-unload cycle, material
// customization, speedup scaling and the miniature coupon.

#include "hyperfe2/config.hpp"
#include "hyperfe2/coupon.hpp"
#include "hyperfe2/cubature.hpp"
#include "hyperfe2/curves.hpp"
#include "hyperfe2/hf_solver.hpp"
#include "hyperfe2/hpr_solver.hpp"
#include "hyperfe2/matrix_io.hpp"
#include "hyperfe2/parallel.hpp"
#include "hyperfe2/reconstruction.hpp"
#include "hyperfe2/reduction.hpp"
#include "hyperfe2/sampling.hpp"
#include "hyperfe2/svg.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace hyperfe2 {

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::string hex64(std::uint64_t h) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline std::string matrix_hash(const Matrix& m, MatrixKind kind) {
    const auto bytes = encode_matrix(m, kind);
    return hex64(fnv1a(bytes.data(), bytes.size()));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reduced model: the three bases built from one snapshot set.

struct ReducedModel {
    StrainBasis strain;
    EnergyBasis energy;
    InternalVarBasis internal;
    Vector weighted_r0;
    std::map<std::string, std::string> snapshot_hashes;
};

inline ReducedModel build_reduced_model(const SnapshotSet& snaps, const RveMesh& mesh,
                                        const std::vector<PhaseMaterial>& materials, const ReductionConfig& cfg) {
    if (snaps.empty()) throw ConfigError("no snapshots to reduce");
    const auto split = split_elastic_inelastic(snaps);
    std::vector<DamageParams> params;
    for (const auto& m : materials) params.push_back(DamageParams::from_material(m, mesh.n_sigma()));
    ReducedModel model;
    model.strain = build_strain_basis(split.elastic.strain, split.inelastic.strain, cfg.inelastic_modes);
    if (split.inelastic.cols() > 0) {
        model.energy = build_energy_basis(split.inelastic.energy, cfg.energy_modes);
    } else {
        model.energy.modes.resize(mesh.n_gauss(), 0);
    }
    model.weighted_r0 = weighted_r0(mesh, params);
    model.internal = build_internal_basis(snaps.internal, model.weighted_r0,
                                          std::min<int>(cfg.internal_modes, snaps.cols()));
    model.snapshot_hashes = {{"strain", detail::matrix_hash(snaps.strain, MatrixKind::strain)},
                             {"energy", detail::matrix_hash(snaps.energy, MatrixKind::energy)},
                             {"internal", detail::matrix_hash(snaps.internal, MatrixKind::internal)}};
    return model;
}

// Directory layout: strain_basis.bin, energy_basis.bin, internal_basis.bin,
// manifest.txt (sizes, singular values and snapshot hashes).
inline void save_reduced_model(const std::filesystem::path& dir, const ReducedModel& model) {
    std::filesystem::create_directories(dir);
    write_matrix(dir / "strain_basis.bin", model.strain.modes, MatrixKind::strain_basis);
    write_matrix(dir / "energy_basis.bin", model.energy.modes, MatrixKind::energy_basis);
    write_matrix(dir / "internal_basis.bin", model.internal.modes, MatrixKind::internal_basis);
    {
        Matrix sv(std::max<Eigen::Index>(1, model.weighted_r0.size()), 1);
        sv.col(0) = model.weighted_r0;
        write_matrix(dir / "weighted_r0.bin", sv, MatrixKind::internal);
    }
    std::ofstream os(dir / "manifest.txt");
    os << "# hyperfe2 reduced model\n";
    os << "n_e " << model.strain.n_elastic << "\n";
    os << "n_i " << model.strain.n_inelastic << "\n";
    os << "n_phi " << model.energy.n_modes() << "\n";
    os << "n_r " << model.internal.n_modes() << "\n";
    for (const auto& [k, v] : model.snapshot_hashes) os << "snapshot_" << k << " " << v << "\n";
    os << "basis_strain " << file_hash(dir / "strain_basis.bin") << "\n";
    os << "basis_energy " << file_hash(dir / "energy_basis.bin") << "\n";
    os << "basis_internal " << file_hash(dir / "internal_basis.bin") << "\n";
    if (!os) throw FormatError("cannot write manifest");
}

inline ReducedModel load_reduced_model(const std::filesystem::path& dir) {
    std::ifstream is(dir / "manifest.txt");
    if (!is) throw FormatError("missing manifest.txt in " + dir.string());
    ReducedModel model;
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string k, v;
        ls >> k >> v;
        kv[k] = v;
    }
    for (const char* key : {"basis_strain", "basis_energy", "basis_internal"}) {
        const std::string file = std::string(key).substr(6) + "_basis.bin";
        if (!kv.count(key)) throw FormatError(std::string("manifest lacks ") + key);
        if (file_hash(dir / file) != kv[key]) throw FormatError("hash mismatch for " + file);
    }
    model.strain.modes = read_matrix(dir / "strain_basis.bin", MatrixKind::strain_basis);
    model.energy.modes = read_matrix(dir / "energy_basis.bin", MatrixKind::energy_basis);
    model.internal.modes = read_matrix(dir / "internal_basis.bin", MatrixKind::internal_basis);
    model.weighted_r0 = read_matrix(dir / "weighted_r0.bin", MatrixKind::internal).col(0);
    model.strain.n_elastic = std::stoi(kv.at("n_e"));
    model.strain.n_inelastic = std::stoi(kv.at("n_i"));
    if (model.strain.n_modes() != model.strain.modes.cols()) throw FormatError("manifest disagrees with strain basis");
    for (const auto& [k, v] : kv)
        if (k.rfind("snapshot_", 0) == 0) model.snapshot_hashes[k.substr(9)] = v;
    return model;
}

// ---------------------------------------------------------------------------
// Online models built from a reduced model.

struct OnlineModel {
    StrainBasis basis;
    CubatureRule rule;
    std::unique_ptr<HprSolver> solver;
    double selection_seconds = 0.0;

    bool is_rom() const { return rule.n_phi < 0; }
};

// n_points <= 0 selects the full Gauss rule (the ROM). rule_materials drive the
// elastic constraint fields of the cubature; solver_materials the online model.
inline OnlineModel make_online_model(const ReducedModel& model, const RveMesh& mesh,
                                     const std::vector<PhaseMaterial>& rule_materials,
                                     const std::vector<PhaseMaterial>& solver_materials, int n_modes,
                                     int n_points, HprOptions options = {}) {
    OnlineModel out;
    out.basis = model.strain.truncated(std::min(n_modes, model.strain.n_modes()));
    const auto t0 = std::chrono::steady_clock::now();
    if (n_points <= 0) {
        out.rule = full_gauss_rule(mesh.gauss_weights());
    } else {
        out.rule = select_reduced_rule(mesh, rule_materials, out.basis.modes, out.basis.n_elastic, model.energy.modes,
                                       n_points);
    }
    out.selection_seconds = detail::seconds_since(t0);
    out.solver = std::make_unique<HprSolver>(
        make_reduced_operators(mesh, out.basis.modes, out.rule, out.basis.n_elastic), solver_materials, options);
    return out;
}

inline OnlineModel make_online_model(const ReducedModel& model, const RveMesh& mesh,
                                     const std::vector<PhaseMaterial>& materials, int n_modes, int n_points,
                                     HprOptions options = {}) {
    return make_online_model(model, mesh, materials, materials, n_modes, n_points, options);
}

// ---------------------------------------------------------------------------
// Trajectory helpers.

inline StressCurve hf_curve(HfSolver& hf, const VoigtVector& direction, const std::vector<double>& chis) {
    return make_curve(chis, hf.run_schedule(direction, chis));
}

inline StressCurve reduced_curve(const HprSolver& solver, const VoigtVector& direction,
                                 const std::vector<double>& chis) {
    return make_curve(chis, solver.run_schedule(direction, chis));
}

// ---------------------------------------------------------------------------
// Error sweep.

struct SweepEntry {
    int n_modes = 0;
    int requested_points = 0;  // <= 0 for the ROM
    int n_points = 0;
    int n_phi = 0;
    double error = -1.0;
    double rule_residual = 0.0;  // verify_rule max residual on the energy modes
    double rule_min_weight = 0.0;
    double selection_seconds = 0.0;
    double online_seconds = 0.0;
    std::string status = "ok";
};

struct ErrorReport {
    std::vector<SweepEntry> entries;
    std::map<int, double> rom_error;  // per n_modes
    double hf_seconds = 0.0;

    // Error of the (n_modes, largest successful N_r) combination, if any.
    std::optional<SweepEntry> largest(int n_modes) const {
        std::optional<SweepEntry> best;
        for (const auto& e : entries)
            if (e.n_modes == n_modes && e.requested_points > 0 && e.status == "ok" &&
                (!best || e.requested_points > best->requested_points))
                best = e;
        return best;
    }
};

inline ErrorReport run_sweep(const ReducedModel& model, const RveMesh& mesh,
                             const std::vector<PhaseMaterial>& materials, const ValidationConfig& validation,
                             const std::vector<int>& modes, const std::vector<int>& points,
                             const StressCurve& reference, unsigned workers = 1) {
    const auto chis = monotone_schedule(validation.chi_end, validation.steps);
    struct Job {
        int n_modes;
        int n_points;
    };
    std::vector<Job> jobs;
    for (int m : modes) {
        jobs.push_back({m, 0});
        for (int p : points) jobs.push_back({m, p});
    }
    std::vector<SweepEntry> entries(jobs.size());
    parallel_for(
        static_cast<int>(jobs.size()),
        [&](int i) {
            SweepEntry& e = entries[i];
            e.n_modes = jobs[i].n_modes;
            e.requested_points = jobs[i].n_points;
            try {
                const auto online = make_online_model(model, mesh, materials, jobs[i].n_modes, jobs[i].n_points);
                e.n_modes = online.basis.n_modes();
                e.n_points = online.rule.size();
                e.n_phi = online.rule.n_phi;
                e.selection_seconds = online.selection_seconds;
                if (!online.is_rom()) {
                    const auto rep = verify_rule(online.rule, model.energy.modes, mesh.gauss_weights());
                    e.rule_residual = rep.max_residual;
                    e.rule_min_weight = rep.min_weight;
                } else {
                    e.rule_min_weight = online.rule.weights.minCoeff();
                }
                const auto t0 = std::chrono::steady_clock::now();
                const auto curve = reduced_curve(*online.solver, validation.direction, chis);
                e.online_seconds = detail::seconds_since(t0);
                e.error = trajectory_error(reference, curve);
            } catch (const Error& ex) {
                e.status = ex.what();
            }
        },
        workers);
    ErrorReport report;
    report.entries = entries;
    for (const auto& e : entries)
        if (e.requested_points <= 0 && e.status == "ok") report.rom_error[e.n_modes] = e.error;
    return report;
}

inline CsvTable sweep_table(const ErrorReport& report) {
    CsvTable t({"n_modes", "requested_points", "n_points", "n_phi", "error", "rom_error", "rule_residual",
                "rule_min_weight", "selection_s", "online_s", "status"});
    for (const auto& e : report.entries) {
        const auto rom = report.rom_error.find(e.n_modes);
        t.add_row({std::to_string(e.n_modes), std::to_string(e.requested_points), std::to_string(e.n_points),
                   std::to_string(e.n_phi), CsvTable::num(e.error),
                   rom == report.rom_error.end() ? "" : CsvTable::num(rom->second), CsvTable::num(e.rule_residual),
                   CsvTable::num(e.rule_min_weight), CsvTable::num(e.selection_seconds), CsvTable::num(e.online_seconds), e.status});
    }
    return t;
}

inline SvgChart sweep_chart(const ErrorReport& report) {
    SvgChart chart;
    chart.title = "Validation error vs cubature points";
    chart.x_label = "cubature points";
    chart.y_label = "error";
    chart.log_y = true;
    std::map<int, SvgSeries> by_mode;
    double xmin = 1e300, xmax = 0.0;
    for (const auto& e : report.entries) {
        if (e.requested_points <= 0 || e.status != "ok") continue;
        auto& s = by_mode[e.n_modes];
        s.label = std::to_string(e.n_modes) + " modes";
        s.x.push_back(e.n_points);
        s.y.push_back(e.error);
        xmin = std::min<double>(xmin, e.n_points);
        xmax = std::max<double>(xmax, e.n_points);
    }
    for (auto& [m, s] : by_mode) {
        chart.series.push_back(s);
        const auto rom = report.rom_error.find(m);
        if (rom != report.rom_error.end() && xmax > 0.0)
            chart.series.push_back({std::to_string(m) + " modes ROM", {xmin, xmax}, {rom->second, rom->second}, true});
    }
    return chart;
}

// ---------------------------------------------------------------------------
// Cycle and customization.

struct ComparisonResult {
    StressCurve hf;
    StressCurve reduced;
    double error = 0.0;
    double hf_seconds = 0.0;
    double reduced_seconds = 0.0;
};

inline ComparisonResult compare_on_schedule(HfSolver& hf, const HprSolver& reduced, const VoigtVector& direction,
                                            const std::vector<double>& chis) {
    ComparisonResult out;
    auto t0 = std::chrono::steady_clock::now();
    out.hf = hf_curve(hf, direction, chis);
    out.hf_seconds = detail::seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    out.reduced = reduced_curve(reduced, direction, chis);
    out.reduced_seconds = detail::seconds_since(t0);
    out.error = trajectory_error(out.hf, out.reduced);
    return out;
}

// Load 0 -> chi_end -> 0 along the validation direction.
inline ComparisonResult run_cycle_test(const ReducedModel& model, const RveMesh& mesh,
                                       const std::vector<PhaseMaterial>& materials,
                                       const ValidationConfig& validation, int n_modes, int n_points) {
    const auto online = make_online_model(model, mesh, materials, n_modes, n_points);
    HfSolver hf(mesh, materials);
    return compare_on_schedule(hf, *online.solver, validation.direction,
                               cyclic_schedule(validation.chi_end, validation.steps));
}

// Bases and rule from the original materials, online model and fresh HF with
// the custom ones, on the load-unload cycle.
inline ComparisonResult run_customization(const ReducedModel& model, const RveMesh& mesh,
                                          const std::vector<PhaseMaterial>& original,
                                          const std::vector<PhaseMaterial>& custom,
                                          const ValidationConfig& validation, int n_modes, int n_points) {
    const auto online = make_online_model(model, mesh, original, custom, n_modes, n_points);
    HfSolver hf(mesh, custom);
    return compare_on_schedule(hf, *online.solver, validation.direction,
                               cyclic_schedule(validation.chi_end, validation.steps));
}

inline SvgChart comparison_chart(const ComparisonResult& r, int component, const std::string& title) {
    SvgChart chart;
    chart.title = title;
    chart.x_label = "chi (step)";
    chart.y_label = "sigma component " + std::to_string(component);
    SvgSeries hf{"HF", {}, {}, false}, red{"reduced", {}, {}, true};
    for (int k = 0; k < r.hf.size(); ++k) {
        hf.x.push_back(k + 1);
        hf.y.push_back(r.hf.stress[k](component));
        red.x.push_back(k + 1);
        red.y.push_back(r.reduced.stress[k](component));
    }
    chart.series = {hf, red};
    return chart;
}

// ---------------------------------------------------------------------------
// Speedup scaling.

struct SpeedupRow {
    int resolution = 0;
    int n_gauss = 0;
    int n_modes = 0;
    int n_points = 0;
    double hf_seconds = 0.0;
    double reduced_seconds = 0.0;
    double speedup = 0.0;
    double error = 0.0;
};

struct SpeedupOptions {
    int n_modes = 20;
    int n_points = 100;
    int repeats = 5;  // reduced timing is the median of repeats
    SamplingPlan sampling;
    ReductionConfig reduction;
};

// One row per geometry: sample, reduce, then time one HF and the reduced
// validation trajectory. The HF time also provides the reference curve.
inline SpeedupRow measure_speedup(const GeometryConfig& geometry, const std::map<std::string, PhaseMaterial>& table,
                                  const ValidationConfig& validation, const SpeedupOptions& opts) {
    const RveMesh mesh = build_rve(geometry);
    const auto materials = materials_for(mesh, table);
    SamplingPlan plan = opts.sampling;
    plan.n_sigma = mesh.n_sigma();
    const auto snaps = collect_snapshots(plan, mesh, materials);
    const auto model = build_reduced_model(snaps, mesh, materials, opts.reduction);
    const auto online = make_online_model(model, mesh, materials, opts.n_modes, opts.n_points);
    const auto chis = monotone_schedule(validation.chi_end, validation.steps);
    SpeedupRow row;
    row.resolution = geometry.resolution;
    row.n_gauss = mesh.n_gauss();
    row.n_modes = online.basis.n_modes();
    row.n_points = online.rule.size();
    HfSolver hf(mesh, materials);
    auto t0 = std::chrono::steady_clock::now();
    const auto ref = hf_curve(hf, validation.direction, chis);
    row.hf_seconds = detail::seconds_since(t0);
    std::vector<double> times;
    StressCurve red;
    for (int k = 0; k < std::max(1, opts.repeats); ++k) {
        t0 = std::chrono::steady_clock::now();
        red = reduced_curve(*online.solver, validation.direction, chis);
        times.push_back(detail::seconds_since(t0));
    }
    std::sort(times.begin(), times.end());
    row.reduced_seconds = times[times.size() / 2];
    row.speedup = row.hf_seconds / row.reduced_seconds;
    row.error = trajectory_error(ref, red);
    return row;
}

inline CsvTable speedup_table(const std::vector<SpeedupRow>& rows) {
    CsvTable t({"resolution", "n_gauss", "n_modes", "n_points", "hf_s", "reduced_s", "speedup", "error"});
    for (const auto& r : rows)
        t.add_row({std::to_string(r.resolution), std::to_string(r.n_gauss), std::to_string(r.n_modes),
                   std::to_string(r.n_points), CsvTable::num(r.hf_seconds), CsvTable::num(r.reduced_seconds),
                   CsvTable::num(r.speedup), CsvTable::num(r.error)});
    return t;
}

inline SvgChart speedup_chart(const std::vector<SpeedupRow>& rows) {
    SvgChart chart;
    chart.title = "Speedup vs micro Gauss points";
    chart.x_label = "Gauss points";
    chart.y_label = "speedup";
    SvgSeries s{"HF / reduced", {}, {}, false};
    for (const auto& r : rows) {
        s.x.push_back(r.n_gauss);
        s.y.push_back(r.speedup);
    }
    chart.series = {s};
    return chart;
}

// ---------------------------------------------------------------------------
// Coupon.

inline CouponMesh coupon_mesh(const CouponConfig& cfg) {
    CouponMesh m;
    m.nx = cfg.nx;
    m.ny = cfg.ny;
    m.length = cfg.length;
    m.height = cfg.height;
    m.validate();
    return m;
}

inline std::vector<CouponStep> run_coupon_reduced(const HprSolver& solver, const CouponConfig& cfg,
                                                  unsigned workers = 1) {
    const double theta = cfg.fiber_angle_deg * 3.14159265358979323846 / 180.0;
    const ReducedMicroModel micro(solver, theta);
    CouponOptions opts;
    opts.workers = workers;
    CouponSolver<ReducedMicroModel> coupon(coupon_mesh(cfg), micro, opts);
    return coupon.run(cfg.max_displacement, cfg.steps);
}

inline std::vector<CouponStep> run_coupon_linear(const Matrix& c_hom, const CouponConfig& cfg) {
    const double theta = cfg.fiber_angle_deg * 3.14159265358979323846 / 180.0;
    const LinearMicroModel micro(c_hom, theta);
    CouponSolver<LinearMicroModel> coupon(coupon_mesh(cfg), micro);
    return coupon.run(cfg.max_displacement, cfg.steps);
}

// True two-scale coupon with an HF cell at every macro Gauss point.
inline std::vector<CouponStep> run_coupon_hf(const RveMesh& mesh, const std::vector<PhaseMaterial>& materials,
                                             const CouponConfig& cfg, unsigned workers = 1) {
    const double theta = cfg.fiber_angle_deg * 3.14159265358979323846 / 180.0;
    const HfMicroModel micro(mesh, materials, theta);
    CouponOptions opts;
    opts.workers = workers;
    CouponSolver<HfMicroModel> coupon(coupon_mesh(cfg), micro, opts);
    return coupon.run(cfg.max_displacement, cfg.steps);
}

// Elastic homogenized tensor of the HF cell (perturbation tangent at the virgin state).
inline Matrix hf_elastic_tensor(const RveMesh& mesh, const std::vector<PhaseMaterial>& materials) {
    HfSolver hf(mesh, materials);
    return hf.homogenize_tangent(VoigtVector::Zero(mesh.n_sigma()), hf.virgin_states());
}

struct ProbeFields {
    VoigtVector local_strain;  // macro strain in the cell frame
    Vector damage;             // per micro gp
    Matrix stress;             // n_sigma x N_gp micro stress in the cell frame
};

struct CouponRun {
    std::vector<CouponStep> steps;
    std::vector<ProbeFields> probe;
};

// Reduced coupon that also recovers the micro fields at one macro Gauss point
// after every converged step.
inline CouponRun run_coupon_with_probe(const OnlineModel& online, const ReducedModel& model, const RveMesh& mesh,
                                       const std::vector<PhaseMaterial>& materials, const CouponConfig& cfg,
                                       unsigned workers = 1) {
    const CouponMesh cm = coupon_mesh(cfg);
    if (cfg.probe_gauss_point < 0 || cfg.probe_gauss_point >= cm.n_gauss())
        throw ConfigError("coupon.probe_gauss_point out of range");
    const double theta = cfg.fiber_angle_deg * 3.14159265358979323846 / 180.0;
    const ReducedMicroModel micro(*online.solver, theta);
    CouponOptions opts;
    opts.workers = workers;
    CouponSolver<ReducedMicroModel> coupon(cm, micro, opts);
    const auto proj = build_projectors(mesh, materials, online.basis.modes, model.internal.modes, online.rule);
    const Matrix to_local = strain_rotation_2d(-theta);
    CouponRun out;
    for (int k = 1; k <= cfg.steps; ++k) {
        out.steps.push_back(coupon.step(cfg.max_displacement * k / cfg.steps));
        const auto& st = coupon.states()[cfg.probe_gauss_point];
        ProbeFields f;
        f.local_strain = to_local * out.steps.back().strain[cfg.probe_gauss_point];
        f.damage = reconstruct_internal_variable(proj, mesh, materials, st.r).damage;
        Matrix strain;
        reconstruct_stress(proj, mesh, materials, f.local_strain, st.c, f.damage, strain, f.stress);
        out.probe.push_back(std::move(f));
    }
    return out;
}

inline CsvTable probe_table(const CouponRun& run) {
    const int ns = run.probe.empty() ? 3 : static_cast<int>(run.probe.front().stress.rows());
    std::vector<std::string> header{"step", "gauss_point", "damage"};
    for (int i = 0; i < ns; ++i) header.push_back(std::string("sigma_") + detail::voigt_label(ns, i));
    CsvTable t(header);
    for (std::size_t k = 0; k < run.probe.size(); ++k) {
        const auto& f = run.probe[k];
        for (Eigen::Index g = 0; g < f.damage.size(); ++g) {
            std::vector<std::string> row{std::to_string(k + 1), std::to_string(g), CsvTable::num(f.damage(g))};
            for (int i = 0; i < ns; ++i) row.push_back(CsvTable::num(f.stress(i, g)));
            t.add_row(row);
        }
    }
    return t;
}

inline CsvTable coupon_table(const std::vector<std::pair<std::string, std::vector<CouponStep>>>& runs) {
    std::vector<std::string> header{"u_x"};
    for (const auto& r : runs) header.push_back("R_x_" + r.first);
    CsvTable t(header);
    if (runs.empty()) return t;
    for (std::size_t k = 0; k < runs.front().second.size(); ++k) {
        std::vector<std::string> row{CsvTable::num(runs.front().second[k].displacement)};
        for (const auto& r : runs) row.push_back(CsvTable::num(r.second[k].reaction));
        t.add_row(row);
    }
    return t;
}

}  // namespace hyperfe2
