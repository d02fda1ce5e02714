#pragma once

// Offline sampling: proportional macro-strain trajectories along directions on
// the unit hypersphere, recorded as sqrt(w)-weighted snapshot columns.

#include "hyperfe2/common.hpp"
#include "hyperfe2/hf_solver.hpp"
#include "hyperfe2/matrix_io.hpp"
#include "hyperfe2/parallel.hpp"

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace hyperfe2 {

struct SamplingPlan {
    int n_dirs = 100;
    int n_steps = 40;
    double chi_end = 0.02;
    std::uint64_t seed = 0;
    int n_sigma = 3;
    unsigned workers = 1;

    void validate() const {
        if (n_dirs < 1) throw ConfigError("sampling: n_dirs must be >= 1");
        if (n_steps < 1) throw ConfigError("sampling: n_steps must be >= 1");
        if (!(chi_end >= 0.0)) throw ConfigError("sampling: chi_end must be >= 0");
        voigt_size(dim_from_voigt(n_sigma));
    }
};

// Seeded isotropic Gaussian draws, normalized.
inline std::vector<VoigtVector> hypersphere_directions(int n, int dim, std::uint64_t seed) {
    if (dim != 3 && dim != 6) throw ConfigError("hypersphere dimension must be 3 or 6");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<VoigtVector> out;
    out.reserve(n);
    while (static_cast<int>(out.size()) < n) {
        VoigtVector v(dim);
        for (int i = 0; i < dim; ++i) v(i) = g(rng);
        const double norm = v.norm();
        if (norm < 1e-12) continue;
        out.push_back(v / norm);
    }
    return out;
}

struct SnapshotTag {
    int trajectory = 0;
    int step = 0;
    bool elastic = true;
    bool operator==(const SnapshotTag&) const = default;
};

struct SnapshotSet {
    Matrix strain;    // n_sigma*N_gp x n_cols: sqrt(w) * (eps_mu - eps)
    Matrix energy;    // N_gp x n_cols: sqrt(w) * psi
    Matrix internal;  // N_gp x n_cols: sqrt(w) * r  (0 on elastic phases)
    std::vector<SnapshotTag> tags;
    int failed_trajectories = 0;

    int cols() const { return static_cast<int>(tags.size()); }
    bool empty() const { return tags.empty(); }
    int count_elastic() const {
        int n = 0;
        for (const auto& t : tags) n += t.elastic;
        return n;
    }

    // Selects columns in the given order.
    SnapshotSet select(const std::vector<int>& columns) const {
        SnapshotSet out;
        const auto n = static_cast<Eigen::Index>(columns.size());
        out.strain.resize(strain.rows(), n);
        out.energy.resize(energy.rows(), n);
        out.internal.resize(internal.rows(), n);
        for (Eigen::Index k = 0; k < n; ++k) {
            out.strain.col(k) = strain.col(columns[k]);
            out.energy.col(k) = energy.col(columns[k]);
            out.internal.col(k) = internal.col(columns[k]);
            out.tags.push_back(tags[columns[k]]);
        }
        return out;
    }
};

inline SnapshotSet concatenate(const SnapshotSet& a, const SnapshotSet& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    SnapshotSet out;
    auto hcat = [](const Matrix& x, const Matrix& y) {
        Matrix m(x.rows(), x.cols() + y.cols());
        m << x, y;
        return m;
    };
    out.strain = hcat(a.strain, b.strain);
    out.energy = hcat(a.energy, b.energy);
    out.internal = hcat(a.internal, b.internal);
    out.tags = a.tags;
    out.tags.insert(out.tags.end(), b.tags.begin(), b.tags.end());
    out.failed_trajectories = a.failed_trajectories + b.failed_trajectories;
    return out;
}

// Per-gp r0 (0 on elastic phases), weighted like the internal-variable rows.
inline Vector weighted_r0(const RveMesh& mesh, const std::vector<DamageParams>& params) {
    Vector out(mesh.n_gauss());
    for (const auto& gp : mesh.gauss_points)
        out(gp.index) = std::sqrt(gp.weight) * (params[gp.phase].inelastic ? params[gp.phase].r0 : 0.0);
    return out;
}

// One snapshot column per step of a trajectory.
inline SnapshotSet snapshot_columns(const RveMesh& mesh, const std::vector<DamageParams>& params,
                                    const std::vector<HfSolution>& steps, int trajectory) {
    const int ns = mesh.n_sigma();
    const int ng = mesh.n_gauss();
    const int n = static_cast<int>(steps.size());
    SnapshotSet out;
    out.strain.resize(static_cast<Eigen::Index>(ns) * ng, n);
    out.energy.resize(ng, n);
    out.internal.resize(ng, n);
    Vector sqw(ng);
    for (const auto& gp : mesh.gauss_points) sqw(gp.index) = std::sqrt(gp.weight);
    for (int k = 0; k < n; ++k) {
        const auto& s = steps[k];
        for (int g = 0; g < ng; ++g) {
            out.strain.block(static_cast<Eigen::Index>(g) * ns, k, ns, 1) =
                sqw(g) * (s.strain.col(g) - s.macro_strain);
            out.energy(g, k) = sqw(g) * s.free_energy(g);
            const auto& p = params[mesh.gauss_points[g].phase];
            out.internal(g, k) = p.inelastic ? sqw(g) * s.r(g) : 0.0;
        }
        out.tags.push_back({trajectory, k + 1, s.max_damage() == 0.0});
    }
    return out;
}

using SamplingProgress = std::function<void(int done, int total)>;

inline SnapshotSet collect_snapshots(const SamplingPlan& plan, const RveMesh& mesh,
                                     const std::vector<PhaseMaterial>& materials,
                                     const SamplingProgress& progress = {}) {
    plan.validate();
    if (plan.n_sigma != mesh.n_sigma()) throw ConfigError("sampling plan strain dimension does not match mesh");
    const auto dirs = hypersphere_directions(plan.n_dirs, plan.n_sigma, plan.seed);
    std::vector<SnapshotSet> parts(plan.n_dirs);
    std::vector<char> failed(plan.n_dirs, 0);
    std::vector<DamageParams> params;
    for (const auto& m : materials) params.push_back(DamageParams::from_material(m, mesh.n_sigma()));
    std::atomic<int> done{0};
    std::mutex progress_mutex;
    // One solver per worker slot: the sparse factorization is stateful.
    const unsigned workers = std::max(1u, plan.workers);
    std::vector<std::unique_ptr<HfSolver>> solvers(workers);
    std::vector<std::vector<int>> buckets(workers);
    for (int t = 0; t < plan.n_dirs; ++t) buckets[t % workers].push_back(t);
    parallel_for(
        static_cast<int>(workers),
        [&](int w) {
            solvers[w] = std::make_unique<HfSolver>(mesh, materials);
            for (int t : buckets[w]) {
                try {
                    const auto steps = solvers[w]->run_trajectory(dirs[t], plan.chi_end, plan.n_steps);
                    parts[t] = snapshot_columns(mesh, params, steps, t);
                } catch (const Error&) {
                    failed[t] = 1;
                }
                const int d = ++done;
                if (progress) {
                    std::lock_guard<std::mutex> lock(progress_mutex);
                    progress(d, plan.n_dirs);
                }
            }
        },
        workers);
    int n_failed = 0;
    Eigen::Index total = 0;
    for (int t = 0; t < plan.n_dirs; ++t) {
        n_failed += failed[t];
        if (!failed[t]) total += parts[t].cols();
    }
    SnapshotSet out;
    out.strain.resize(static_cast<Eigen::Index>(mesh.n_sigma()) * mesh.n_gauss(), total);
    out.energy.resize(mesh.n_gauss(), total);
    out.internal.resize(mesh.n_gauss(), total);
    Eigen::Index col = 0;
    for (int t = 0; t < plan.n_dirs; ++t) {
        if (failed[t]) continue;
        const Eigen::Index c = parts[t].cols();
        out.strain.middleCols(col, c) = parts[t].strain;
        out.energy.middleCols(col, c) = parts[t].energy;
        out.internal.middleCols(col, c) = parts[t].internal;
        out.tags.insert(out.tags.end(), parts[t].tags.begin(), parts[t].tags.end());
        col += c;
        parts[t] = {};
    }
    out.failed_trajectories = n_failed;
    if (plan.n_dirs - n_failed < 0.9 * plan.n_dirs)
        throw Error("sampling: " + std::to_string(n_failed) + " of " + std::to_string(plan.n_dirs) +
                    " trajectories failed (at least 90% must succeed)");
    return out;
}

struct SnapshotSplit {
    SnapshotSet elastic;
    SnapshotSet inelastic;
};

inline SnapshotSplit split_elastic_inelastic(const SnapshotSet& set) {
    std::vector<int> e, i;
    for (int k = 0; k < set.cols(); ++k) (set.tags[k].elastic ? e : i).push_back(k);
    SnapshotSplit out{set.select(e), set.select(i)};
    out.elastic.failed_trajectories = set.failed_trajectories;
    return out;
}

// Snapshot directory layout: strain.bin, energy.bin, internal.bin, tags.txt.
inline void save_snapshots(const std::filesystem::path& dir, const SnapshotSet& set) {
    std::filesystem::create_directories(dir);
    write_matrix(dir / "strain.bin", set.strain, MatrixKind::strain);
    write_matrix(dir / "energy.bin", set.energy, MatrixKind::energy);
    write_matrix(dir / "internal.bin", set.internal, MatrixKind::internal);
    std::ofstream tags(dir / "tags.txt");
    tags << "# trajectory step elastic\n";
    tags << "failed " << set.failed_trajectories << "\n";
    for (const auto& t : set.tags) tags << t.trajectory << " " << t.step << " " << (t.elastic ? 1 : 0) << "\n";
    if (!tags) throw FormatError("cannot write tags file");
}

inline SnapshotSet load_snapshots(const std::filesystem::path& dir) {
    SnapshotSet set;
    set.strain = read_matrix(dir / "strain.bin", MatrixKind::strain);
    set.energy = read_matrix(dir / "energy.bin", MatrixKind::energy);
    set.internal = read_matrix(dir / "internal.bin", MatrixKind::internal);
    std::ifstream tags(dir / "tags.txt");
    if (!tags) throw FormatError("missing tags.txt in " + dir.string());
    std::string line;
    while (std::getline(tags, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream is(line);
        if (line.rfind("failed", 0) == 0) {
            std::string word;
            is >> word >> set.failed_trajectories;
            continue;
        }
        SnapshotTag t;
        int e = 0;
        if (!(is >> t.trajectory >> t.step >> e)) throw FormatError("bad tag line: " + line);
        t.elastic = e != 0;
        set.tags.push_back(t);
    }
    if (set.strain.cols() != set.cols() || set.energy.cols() != set.cols() || set.internal.cols() != set.cols())
        throw FormatError("snapshot column counts disagree with tags");
    return set;
}

}  // namespace hyperfe2
