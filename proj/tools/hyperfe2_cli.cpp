// hyperfe2: offline/online pipeline and benchmark experiments.
//
//   hyperfe2 sample     --config cfg.ini --out dir
//   hyperfe2 build-rom  --config cfg.ini --out dir
//   hyperfe2 solve-hf   --config cfg.ini --out dir
//   hyperfe2 solve-hpr  --config cfg.ini --out dir --modes 20 --points 400
//   hyperfe2 sweep      --config cfg.ini --out dir [--modes ..] [--points ..]
//   hyperfe2 cycle | customize | speedup | coupon
//   hyperfe2 compare    a.csv b.csv
//
// Exit code 0 on success, 2 when a threshold is violated, 1 on errors.

#include "hyperfe2/hyperfe2.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hyperfe2;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::vector<int> modes;
    std::vector<int> points;
    unsigned workers = 0;
    double threshold = -1.0;
    std::vector<int> resolutions{20, 28, 40};
    std::vector<std::string> files;
    bool hf_reference = false;
};

struct Context {
    ExperimentConfig cfg;
    fs::path out;
    RveMesh mesh;
    std::vector<PhaseMaterial> materials;
};

Context make_context(const Options& o) {
    Context ctx;
    ctx.cfg = o.config.empty() ? model_b_config() : load_config(o.config);
    if (o.seed) {
        ctx.cfg.sampling.seed = *o.seed;
        ctx.cfg.geometry.seed = *o.seed;
    }
    if (!o.modes.empty()) ctx.cfg.reduction.modes = o.modes;
    if (!o.points.empty()) ctx.cfg.reduction.points = o.points;
    if (o.workers > 0) ctx.cfg.sampling.workers = o.workers;
    ctx.out = o.out.empty() ? ctx.cfg.output : fs::path(o.out);
    fs::create_directories(ctx.out);
    ctx.mesh = build_rve(ctx.cfg.geometry);
    ctx.materials = materials_for(ctx.mesh, ctx.cfg.materials);
    return ctx;
}

void log(const std::string& msg) { std::cerr << "[hyperfe2] " << msg << std::endl; }

SnapshotSet ensure_snapshots(const Context& ctx) {
    const fs::path dir = ctx.out / "snapshots";
    if (fs::exists(dir / "tags.txt")) return load_snapshots(dir);
    log("sampling " + std::to_string(ctx.cfg.sampling.n_dirs) + " directions");
    auto snaps = collect_snapshots(ctx.cfg.sampling, ctx.mesh, ctx.materials, [](int d, int n) {
        if (d % 10 == 0 || d == n) log("  trajectory " + std::to_string(d) + "/" + std::to_string(n));
    });
    save_snapshots(dir, snaps);
    return snaps;
}

ReducedModel ensure_model(const Context& ctx) {
    const fs::path dir = ctx.out / "rom";
    if (fs::exists(dir / "manifest.txt")) return load_reduced_model(dir);
    const auto snaps = ensure_snapshots(ctx);
    log("building bases");
    auto model = build_reduced_model(snaps, ctx.mesh, ctx.materials, ctx.cfg.reduction);
    for (const auto& w : model.strain.warnings) log("warning: " + w);
    save_reduced_model(dir, model);
    return model;
}

StressCurve ensure_hf_validation(const Context& ctx) {
    const fs::path file = ctx.out / "hf_validation.csv";
    if (fs::exists(file)) return load_curve(file.string());
    log("HF validation trajectory");
    HfSolver hf(ctx.mesh, ctx.materials);
    const auto curve = hf_curve(hf, ctx.cfg.validation.direction,
                                monotone_schedule(ctx.cfg.validation.chi_end, ctx.cfg.validation.steps));
    save_curve(file.string(), curve);
    return curve;
}

int check(double value, double threshold, const std::string& what) {
    std::cout << what << " " << value << "\n";
    if (threshold >= 0.0 && value > threshold) {
        std::cout << what << " exceeds threshold " << threshold << "\n";
        return 2;
    }
    return 0;
}

void save_comparison(const fs::path& stem, const ComparisonResult& r, const std::string& title) {
    save_curve(stem.string() + "_hf.csv", r.hf);
    save_curve(stem.string() + "_reduced.csv", r.reduced);
    for (int i = 0; i < r.hf.n_sigma(); ++i)
        save_svg(stem.string() + "_sigma" + std::to_string(i) + ".svg", comparison_chart(r, i, title));
}

int first_or(const std::vector<int>& v, int fallback) { return v.empty() ? fallback : v.front(); }

int cmd_sample(const Options& o) {
    const auto ctx = make_context(o);
    const auto snaps = ensure_snapshots(ctx);
    std::cout << "snapshots " << snaps.cols() << " elastic " << snaps.count_elastic() << " failed "
              << snaps.failed_trajectories << "\n";
    return 0;
}

int cmd_build_rom(const Options& o) {
    const auto ctx = make_context(o);
    const auto model = ensure_model(ctx);
    std::cout << "n_e " << model.strain.n_elastic << " n_i " << model.strain.n_inelastic << " n_phi "
              << model.energy.n_modes() << " n_r " << model.internal.n_modes() << "\n";
    return 0;
}

int cmd_solve_hf(const Options& o) {
    const auto ctx = make_context(o);
    const auto curve = ensure_hf_validation(ctx);
    std::cout << "steps " << curve.size() << " max_damage " << curve.max_damage.back() << "\n";
    return 0;
}

int cmd_solve_hpr(const Options& o) {
    const auto ctx = make_context(o);
    const auto model = ensure_model(ctx);
    const int n_modes = first_or(o.modes, 20);
    const int n_points = first_or(o.points, 400);
    const auto online = make_online_model(model, ctx.mesh, ctx.materials, n_modes, n_points);
    const auto curve = reduced_curve(*online.solver, ctx.cfg.validation.direction,
                                     monotone_schedule(ctx.cfg.validation.chi_end, ctx.cfg.validation.steps));
    save_curve((ctx.out / "hpr_validation.csv").string(), curve);
    {
        std::ofstream os(ctx.out / "rule.txt");
        write_rule(os, online.rule);
    }
    std::cout << "modes " << online.basis.n_modes() << " points " << online.rule.size() << "\n";
    if (fs::exists(ctx.out / "hf_validation.csv"))
        return check(trajectory_error(load_curve((ctx.out / "hf_validation.csv").string()), curve), o.threshold,
                     "error");
    return 0;
}

int cmd_sweep(const Options& o) {
    const auto ctx = make_context(o);
    const auto model = ensure_model(ctx);
    const auto reference = ensure_hf_validation(ctx);
    log("sweep");
    const auto report = run_sweep(model, ctx.mesh, ctx.materials, ctx.cfg.validation, ctx.cfg.reduction.modes,
                                  ctx.cfg.reduction.points, reference, std::max(1u, ctx.cfg.sampling.workers));
    sweep_table(report).save((ctx.out / "sweep.csv").string());
    save_svg((ctx.out / "sweep.svg").string(), sweep_chart(report));
    int code = 0;
    for (const auto& e : report.entries) {
        std::cout << e.n_modes << " modes, " << (e.requested_points > 0 ? std::to_string(e.n_points) : "all")
                  << " points: " << (e.status == "ok" ? std::to_string(e.error) : e.status) << "\n";
        if (e.status == "ok" && o.threshold >= 0.0 && e.requested_points > 0) {
            const auto best = report.largest(e.n_modes);
            if (best && best->requested_points == e.requested_points && e.error > o.threshold) code = 2;
        }
    }
    return code;
}

int cmd_cycle(const Options& o) {
    const auto ctx = make_context(o);
    const auto model = ensure_model(ctx);
    const auto r = run_cycle_test(model, ctx.mesh, ctx.materials, ctx.cfg.validation, first_or(o.modes, 30),
                                  first_or(o.points, 400));
    save_comparison(ctx.out / "cycle", r, "Load-unload cycle");
    return check(r.error, o.threshold < 0.0 ? 0.02 : o.threshold, "cycle_error");
}

int cmd_customize(const Options& o) {
    const auto ctx = make_context(o);
    const auto model = ensure_model(ctx);
    if (ctx.cfg.overrides.empty()) log("no [override.*] sections; running the baseline materials");
    const auto custom = materials_for(ctx.mesh, overridden_materials(ctx.cfg));
    const auto r = run_customization(model, ctx.mesh, ctx.materials, custom, ctx.cfg.validation,
                                     first_or(o.modes, 30), first_or(o.points, 400));
    save_comparison(ctx.out / "customize", r, "Customized materials");
    return check(r.error, o.threshold < 0.0 ? 0.05 : o.threshold, "customization_error");
}

int cmd_speedup(const Options& o) {
    const auto ctx = make_context(o);
    SpeedupOptions so;
    so.n_modes = first_or(o.modes, 20);
    so.n_points = first_or(o.points, 100);
    so.sampling = ctx.cfg.sampling;
    so.sampling.n_dirs = std::min(so.sampling.n_dirs, 16);
    so.sampling.n_steps = std::min(so.sampling.n_steps, 20);
    so.reduction = ctx.cfg.reduction;
    std::vector<SpeedupRow> rows;
    for (int res : o.resolutions) {
        log("speedup at resolution " + std::to_string(res));
        GeometryConfig g = ctx.cfg.geometry;
        g.resolution = g.fiber.resolution = g.layered.resolution = res;
        rows.push_back(measure_speedup(g, ctx.cfg.materials, ctx.cfg.validation, so));
        const auto& r = rows.back();
        std::cout << "gauss " << r.n_gauss << " hf " << r.hf_seconds << " s reduced " << r.reduced_seconds
                  << " s speedup " << r.speedup << "\n";
    }
    speedup_table(rows).save((ctx.out / "speedup.csv").string());
    save_svg((ctx.out / "speedup.svg").string(), speedup_chart(rows));
    for (std::size_t k = 1; k < rows.size(); ++k)
        if (!(rows[k].speedup > rows[k - 1].speedup)) return 2;
    return 0;
}

int cmd_coupon(const Options& o) {
    const auto ctx = make_context(o);
    if (ctx.mesh.dim != 2) throw ConfigError("the coupon driver is 2D");
    const auto model = ensure_model(ctx);
    auto cc = ctx.cfg.coupon;
    if (!o.modes.empty()) cc.modes = o.modes;
    if (!o.points.empty()) cc.points = o.points;
    if (cc.modes.size() != cc.points.size()) throw ConfigError("--modes and --points must pair up for coupon");
    const unsigned workers = std::max(1u, ctx.cfg.sampling.workers);
    std::vector<std::pair<std::string, std::vector<CouponStep>>> runs;
    runs.emplace_back("linear", run_coupon_linear(hf_elastic_tensor(ctx.mesh, ctx.materials), cc));
    std::optional<std::vector<CouponStep>> hf_run;
    if (o.hf_reference) {
        log("coupon HF reference");
        hf_run = run_coupon_hf(ctx.mesh, ctx.materials, cc, workers);
    }
    for (std::size_t k = 0; k < cc.modes.size(); ++k) {
        const std::string tag = std::to_string(cc.modes[k]) + "m_" + std::to_string(cc.points[k]) + "cp";
        log("coupon " + tag);
        const auto online = make_online_model(model, ctx.mesh, ctx.materials, cc.modes[k], cc.points[k]);
        auto run = run_coupon_with_probe(online, model, ctx.mesh, ctx.materials, cc, workers);
        probe_table(run).save((ctx.out / ("coupon_probe_" + tag + ".csv")).string());
        runs.emplace_back(tag, std::move(run.steps));
    }
    if (hf_run) {
        for (std::size_t k = 1; k < runs.size(); ++k)
            std::cout << "reaction_error_vs_hf_" << runs[k].first << " " << reaction_error(runs[k].second, *hf_run)
                      << "\n";
        runs.emplace_back("hf", std::move(*hf_run));
    }
    coupon_table(runs).save((ctx.out / "coupon.csv").string());
    SvgChart chart;
    chart.title = "Coupon reaction";
    chart.x_label = "u_x";
    chart.y_label = "R_x";
    for (const auto& [tag, steps] : runs) {
        SvgSeries s{tag, {}, {}, tag == "linear" || tag == "hf"};
        for (const auto& st : steps) {
            s.x.push_back(st.displacement);
            s.y.push_back(st.reaction);
        }
        chart.series.push_back(s);
    }
    save_svg((ctx.out / "coupon.svg").string(), chart);
    int code = 0;
    const std::size_t n_reduced = runs.size() - 1 - (o.hf_reference ? 1 : 0);
    if (n_reduced >= 2) {
        // Every reduced configuration against the last (richest) one.
        for (std::size_t k = 1; k < n_reduced; ++k)
            code = std::max(code, check(reaction_error(runs[k].second, runs[n_reduced].second),
                                        o.threshold < 0.0 ? 0.02 : o.threshold, "reaction_error_" + runs[k].first));
    }
    return code;
}

int cmd_compare(const Options& o) {
    if (o.files.size() != 2) throw ConfigError("compare needs a reference and a candidate curve CSV");
    const auto ref = load_curve(o.files[0]);
    const auto cand = load_curve(o.files[1]);
    return check(trajectory_error(ref, cand), o.threshold, "error");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hyper-reduced multiscale damage homogenization"};
    app.require_subcommand(1);
    Options o;
    auto common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment INI file (default: built-in fiber cell)")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "output directory (default: [output] dir)");
        sub->add_option("--seed", o.seed, "sampling and geometry seed");
        sub->add_option("--modes", o.modes, "strain mode counts")->delimiter(',');
        sub->add_option("--points", o.points, "cubature point counts")->delimiter(',');
        sub->add_option("--workers", o.workers, "worker threads");
        sub->add_option("--threshold", o.threshold, "acceptance threshold on the reported error");
    };
    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const Options&);
    };
    const std::vector<Sub> subs{
        {"sample", "collect HF snapshots", cmd_sample},
        {"build-rom", "build strain, energy and internal-variable bases", cmd_build_rom},
        {"solve-hf", "HF validation trajectory", cmd_solve_hf},
        {"solve-hpr", "reduced validation trajectory", cmd_solve_hpr},
        {"sweep", "error sweep over modes and cubature points", cmd_sweep},
        {"cycle", "load-unload cycle against HF", cmd_cycle},
        {"customize", "reduced vs fresh HF with overridden materials", cmd_customize},
        {"speedup", "online timing across mesh sizes", cmd_speedup},
        {"coupon", "miniature two-scale shear coupon", cmd_coupon},
        {"compare", "trajectory error between two curve CSVs", cmd_compare},
    };
    int (*selected)(const Options&) = nullptr;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        common(sub);
        if (std::string(s.name) == "speedup")
            sub->add_option("--resolutions", o.resolutions, "cell resolutions")->delimiter(',');
        if (std::string(s.name) == "coupon")
            sub->add_flag("--hf-reference", o.hf_reference, "also run the coupon with HF cells (slow)");
        if (std::string(s.name) == "compare") sub->add_option("files", o.files, "reference and candidate CSV")->required();
        sub->callback([&selected, run = s.run] { selected = run; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        return selected(o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
