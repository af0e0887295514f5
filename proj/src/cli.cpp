#include "claricov/cli.hpp"

#include "claricov/csv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace claricov::cli {

namespace fs = std::filesystem;

void prepare_out_dir(const fs::path& out_dir, bool force) {
    if (fs::exists(out_dir) && !fs::is_empty(out_dir) && !force)
        throw DataError("output directory not empty: " + out_dir.string() +
                        " (use --force to overwrite)");
    fs::create_directories(out_dir);
}

namespace {

std::string snapshot_name(const std::string& stem, int index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04d.csv", stem.c_str(), index);
    return buf;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw DataError("cannot write: " + tmp.string());
        out << text;
    }
    fs::rename(tmp, path);
}

} // namespace

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

namespace {

struct SnapshotData {
    std::vector<double> times;          // sorted unique times
    std::vector<Vec2> positions;        // shared across snapshots
    std::vector<Eigen::VectorXd> values; // per time
};

SnapshotData load_snapshots(const fs::path& path) {
    const csv::Table table = csv::read(path);
    const std::size_t ct = table.column("t");
    const std::size_t cx = table.column("x_km");
    const std::size_t cy = table.column("y_km");
    const std::size_t cv = table.column("value");
    if (table.rows.empty()) throw DataError(path.string() + ": no data rows");

    std::map<double, std::vector<std::pair<Vec2, double>>> by_time;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        by_time[table.number(r, ct)].push_back(
            {{table.number(r, cx), table.number(r, cy)}, table.number(r, cv)});
    }

    SnapshotData data;
    const auto& first = by_time.begin()->second;
    data.positions.reserve(first.size());
    for (const auto& [p, v] : first) data.positions.push_back(p);

    for (const auto& [t, rows] : by_time) {
        if (rows.size() != data.positions.size())
            throw DataError(path.string() + ": snapshot at t=" + csv::format_double(t) +
                            " has " + std::to_string(rows.size()) + " rows, expected " +
                            std::to_string(data.positions.size()));
        Eigen::VectorXd v(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if ((rows[i].first - data.positions[i]).squaredNorm() > 1e-16)
                throw DataError(path.string() + ": snapshot positions differ across times "
                                "(rows must keep one fixed grid ordering)");
            v[static_cast<Eigen::Index>(i)] = rows[i].second;
        }
        data.times.push_back(t);
        data.values.push_back(std::move(v));
    }
    return data;
}

} // namespace

int run_fit(const FitArgs& args, std::ostream& log) {
    prepare_out_dir(args.out_dir, args.force);
    const SnapshotData data = load_snapshots(args.data_path);

    // Spatial structure: pool pairs from every snapshot into one variogram.
    double max_lag = args.max_lag;
    if (max_lag <= 0.0) {
        Vec2 lo = data.positions.front(), hi = lo;
        for (const auto& p : data.positions) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        max_lag = 0.5 * (hi - lo).norm();
    }

    Variogram vg;
    {
        // accumulate bin sums across snapshots by summing per-snapshot
        // variograms weighted by pair counts
        std::vector<double> semi_sum, lag_sum;
        std::vector<std::size_t> counts;
        for (const auto& values : data.values) {
            std::vector<Sample> snap(data.positions.size());
            for (std::size_t i = 0; i < data.positions.size(); ++i)
                snap[i] = {data.positions[i], values[static_cast<Eigen::Index>(i)]};
            const Variogram one = empirical_variogram(snap, args.n_bins, max_lag);
            if (semi_sum.empty()) {
                semi_sum.assign(static_cast<std::size_t>(args.n_bins), 0.0);
                lag_sum.assign(static_cast<std::size_t>(args.n_bins), 0.0);
                counts.assign(static_cast<std::size_t>(args.n_bins), 0);
            }
            const double width = max_lag / args.n_bins;
            for (const auto& b : one.bins) {
                auto idx = static_cast<std::size_t>(
                    std::min<int>(static_cast<int>(b.lag / width), args.n_bins - 1));
                semi_sum[idx] += b.semivariance * static_cast<double>(b.pair_count);
                lag_sum[idx] += b.lag * static_cast<double>(b.pair_count);
                counts[idx] += b.pair_count;
            }
        }
        for (std::size_t b = 0; b < counts.size(); ++b) {
            if (counts[b] == 0) continue;
            vg.bins.push_back({lag_sum[b] / static_cast<double>(counts[b]),
                               semi_sum[b] / static_cast<double>(counts[b]), counts[b]});
        }
    }

    {
        const std::vector<std::string> header{"lag_km", "semivariance", "pair_count"};
        csv::Writer w(args.out_dir / "variogram.csv", header);
        for (const auto& b : vg.bins)
            w.row(std::vector<double>{b.lag, b.semivariance,
                                      static_cast<double>(b.pair_count)});
    }

    const KernelFit fit = fit_kernel(vg, args.family);
    log << "fitted " << kernel_family_name(args.family) << ": sigma = "
        << fit.params.sigma << ", length_scale = " << fit.params.length_scale
        << " km, residual = " << fit.residual << "\n";

    std::ostringstream frag;
    frag << "# fitted by claricov fit; residual = " << csv::format_double(fit.residual)
         << "\n[kernel]\n";
    frag << "family = " << kernel_family_name(args.family) << "\n";
    frag << "sigma = " << csv::format_double(fit.params.sigma) << "\n";
    frag << "length_scale_km = " << csv::format_double(fit.params.length_scale) << "\n";
    frag << "noise_var = " << csv::format_double(args.noise_var) << "\n";

    // Temporal variance needs at least three snapshots.
    bool temporal_ok = data.times.size() >= 3;
    if (temporal_ok) {
        std::vector<FieldSnapshot> snaps;
        for (std::size_t k = 0; k < data.times.size(); ++k)
            snaps.push_back({data.times[k], data.values[k]});
        const TemporalVariance tv = estimate_temporal_variance(snaps);

        const std::vector<std::string> header{"x_km", "y_km", "sigma_t_sq",
                                              "literal_quotient_var"};
        csv::Writer w(args.out_dir / "sigma_t.csv", header);
        for (std::size_t i = 0; i < data.positions.size(); ++i)
            w.row(std::vector<double>{data.positions[i].x(), data.positions[i].y(),
                                      tv.rate[static_cast<Eigen::Index>(i)],
                                      tv.literal_quotient_var[static_cast<Eigen::Index>(i)]});
        frag << "\n[process]\n";
        frag << "sigma_t_sq_file = " << (args.out_dir / "sigma_t.csv").string() << "\n";
    }

    write_text_atomic(args.out_dir / "fitted.ini", frag.str());

    if (!temporal_ok) {
        log << "error: temporal variance needs >= 3 snapshot times, found "
            << data.times.size() << "; wrote the spatial kernel fit only\n";
        return kExitDataError;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

void write_run_outputs(const RunResult& result, const fs::path& out_dir) {
    const GridSpec& grid = result.grid;

    {
        const std::vector<std::string> header{"t", "mean_clarity_deficit", "rmse_x",
                                              "rmse_y"};
        csv::Writer w(out_dir / "metrics.csv", header);
        for (const auto& m : result.metrics)
            w.row(std::vector<double>{m.t, m.mean_clarity_deficit, m.rmse_x, m.rmse_y});
    }
    {
        const std::vector<std::string> header{"t", "agent_id", "x_km", "y_km", "ux", "uy"};
        csv::Writer w(out_dir / "trajectories.csv", header);
        for (const auto& r : result.trajectories)
            w.row(std::vector<double>{r.t, static_cast<double>(r.agent), r.position.x(),
                                      r.position.y(), r.u_mps.x(), r.u_mps.y()});
    }
    {
        const std::vector<std::string> header{"t", "agent_id", "ux", "uy", "policy",
                                              "fallback_flag"};
        csv::Writer w(out_dir / "controls.csv", header);
        const std::string policy = coverage_policy_name(result.config.policy);
        for (const auto& r : result.trajectories)
            w.row_cells(std::vector<std::string>{
                csv::format_double(r.t), std::to_string(r.agent),
                csv::format_double(r.u_mps.x()), csv::format_double(r.u_mps.y()),
                policy, r.fallback ? "1" : "0"});
    }
    {
        const std::vector<std::string> header{"t", "agent_id", "x_km", "y_km",
                                              "component", "value"};
        csv::Writer w(out_dir / "measurements.csv", header);
        for (const auto& r : result.measurements)
            w.row_cells(std::vector<std::string>{
                csv::format_double(r.t), std::to_string(r.agent),
                csv::format_double(r.position.x()), csv::format_double(r.position.y()),
                r.component == 0 ? "x" : "y", csv::format_double(r.value)});
    }

    for (std::size_t s = 0; s < result.clarity_snapshots.size(); ++s) {
        const auto& snap = result.clarity_snapshots[s];
        const std::vector<std::string> header{"t", "x_km", "y_km", "q", "q_target"};
        csv::Writer w(out_dir / snapshot_name("clarity", static_cast<int>(s)), header);
        for (Eigen::Index i = 0; i < snap.map.q.size(); ++i) {
            const Vec2 p = grid.point(static_cast<int>(i));
            w.row(std::vector<double>{snap.t, p.x(), p.y(), snap.map.q[i],
                                      snap.map.q_target[i]});
        }
    }

    const char* comp_names[2] = {"x", "y"};
    for (std::size_t s = 0; s < result.field_snapshots.size(); ++s) {
        const auto& snap = result.field_snapshots[s];
        {
            std::vector<std::string> header{"t", "x_km", "y_km"};
            for (std::size_t c = 0; c < snap.truth.size(); ++c)
                header.push_back(std::string("value_") + comp_names[c]);
            csv::Writer w(out_dir / snapshot_name("truth", static_cast<int>(s)), header);
            for (Eigen::Index i = 0; i < snap.truth[0].size(); ++i) {
                const Vec2 p = result.truth_grid.point(static_cast<int>(i));
                std::vector<double> row{snap.t, p.x(), p.y()};
                for (const auto& f : snap.truth) row.push_back(f[i]);
                w.row(row);
            }
        }
        for (std::size_t c = 0; c < snap.est_mean.size(); ++c) {
            const std::vector<std::string> header{"t", "x_km", "y_km", "mean", "variance"};
            csv::Writer w(out_dir / snapshot_name(std::string("est_") + comp_names[c],
                                                  static_cast<int>(s)),
                          header);
            for (Eigen::Index i = 0; i < snap.est_mean[c].size(); ++i) {
                const Vec2 p = grid.point(static_cast<int>(i));
                w.row(std::vector<double>{snap.t, p.x(), p.y(), snap.est_mean[c][i],
                                          snap.est_var[c][i]});
            }
        }
    }
}

int run_run(const RunArgs& args, std::ostream& log) {
    ScenarioConfig config = load_config(args.config_path);
    if (args.controller) config.policy = *args.controller;
    if (args.agents) config.agents = *args.agents;
    if (args.seed) config.seed = *args.seed;
    config.validate();

    prepare_out_dir(args.out_dir, args.force);

    const auto t0 = std::chrono::steady_clock::now();
    const RunResult result = run_scenario(config);
    const double duration =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    write_text_atomic(args.out_dir / "config.ini", serialize_config(config));
    write_run_outputs(result, args.out_dir);

    const StepMetrics& last = result.metrics.back();
    std::ostringstream manifest;
    manifest << "[manifest]\n";
    manifest << "version = " << kVersion << "\n";
    manifest << "config = " << args.config_path.string() << "\n";
    manifest << "resolved_config = " << (args.out_dir / "config.ini").string() << "\n";
    manifest << "seed = " << config.seed << "\n";
    manifest << "controller = " << coverage_policy_name(config.policy) << "\n";
    manifest << "agents = " << config.agents << "\n";
    manifest << "out_dir = " << args.out_dir.string() << "\n";
    manifest << "duration_s = " << csv::format_double(duration) << "\n";
    manifest << "final_mean_clarity_deficit = "
             << csv::format_double(last.mean_clarity_deficit) << "\n";
    manifest << "final_rmse_x = " << csv::format_double(last.rmse_x) << "\n";
    manifest << "final_rmse_y = " << csv::format_double(last.rmse_y) << "\n";
    manifest << "distance_traveled_km = ";
    for (std::size_t i = 0; i < result.distance_traveled.size(); ++i) {
        if (i) manifest << "; ";
        manifest << csv::format_double(result.distance_traveled[i]);
    }
    manifest << "\n";
    write_text_atomic(args.out_dir / "manifest.ini", manifest.str());

    log << "run complete: final mean clarity deficit = " << last.mean_clarity_deficit
        << ", rmse_x = " << last.rmse_x << ", rmse_y = " << last.rmse_y << " ("
        << duration << " s)\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

namespace {

struct RunSummary {
    std::string name;
    std::string controller;
    int agents = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<double, double>> deficit; // (t, deficit)
    double final_deficit = 0.0;
    double final_rmse_x = 0.0;
    double final_rmse_y = 0.0;
};

std::map<std::string, std::string> parse_kv_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("missing file: " + path.string());
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
            std::size_t i = 0;
            while (i < s.size() && s[i] == ' ') ++i;
            return s.substr(i);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

RunSummary load_run(const fs::path& dir) {
    std::vector<std::string> missing;
    for (const char* f : {"manifest.ini", "metrics.csv"})
        if (!fs::exists(dir / f)) missing.push_back((dir / f).string());
    if (!missing.empty()) {
        std::string msg = "run directory incomplete, missing:";
        for (const auto& m : missing) msg += " " + m;
        throw DataError(msg);
    }

    RunSummary s;
    s.name = dir.filename().string();
    const auto kv = parse_kv_file(dir / "manifest.ini");
    if (auto it = kv.find("controller"); it != kv.end()) s.controller = it->second;
    if (auto it = kv.find("agents"); it != kv.end()) s.agents = std::stoi(it->second);
    if (auto it = kv.find("seed"); it != kv.end()) s.seed = std::stoull(it->second);

    const csv::Table table = csv::read(dir / "metrics.csv");
    const std::size_t ct = table.column("t");
    const std::size_t cd = table.column("mean_clarity_deficit");
    const std::size_t cx = table.column("rmse_x");
    const std::size_t cy = table.column("rmse_y");
    for (std::size_t r = 0; r < table.rows.size(); ++r)
        s.deficit.push_back({table.number(r, ct), table.number(r, cd)});
    if (table.rows.empty()) throw DataError(dir.string() + ": metrics.csv has no rows");
    s.final_deficit = s.deficit.back().second;
    s.final_rmse_x = table.number(table.rows.size() - 1, cx);
    s.final_rmse_y = table.number(table.rows.size() - 1, cy);
    return s;
}

} // namespace

int run_report(const ReportArgs& args, std::ostream& log) {
    if (args.run_dirs.empty()) throw DataError("report: no run directories given");
    prepare_out_dir(args.out_dir, args.force);

    std::vector<RunSummary> runs;
    for (const auto& dir : args.run_dirs) runs.push_back(load_run(dir));

    {
        const std::vector<std::string> header{"run", "t", "mean_clarity_deficit"};
        csv::Writer w(args.out_dir / "deficit_curves.csv", header);
        for (const auto& r : runs)
            for (const auto& [t, d] : r.deficit)
                w.row_cells(std::vector<std::string>{r.name, csv::format_double(t),
                                                     csv::format_double(d)});
    }
    {
        const std::vector<std::string> header{"run",     "controller",   "agents",
                                              "seed",    "final_deficit", "final_rmse_x",
                                              "final_rmse_y"};
        csv::Writer w(args.out_dir / "comparison.csv", header);
        for (const auto& r : runs)
            w.row_cells(std::vector<std::string>{
                r.name, r.controller, std::to_string(r.agents), std::to_string(r.seed),
                csv::format_double(r.final_deficit), csv::format_double(r.final_rmse_x),
                csv::format_double(r.final_rmse_y)});
    }

    for (const auto& r : runs)
        log << r.name << ": controller=" << r.controller << " agents=" << r.agents
            << " final_deficit=" << r.final_deficit << "\n";

    // Soft cross-run checks, reported but never failing.
    for (const auto& a : runs)
        for (const auto& b : runs) {
            if (a.controller == b.controller && a.seed == b.seed && a.agents > b.agents) {
                if (a.final_deficit < b.final_deficit)
                    log << "ok: " << a.name << " (" << a.agents << " agents) beats "
                        << b.name << " (" << b.agents << " agents)\n";
                else
                    log << "warning: " << a.name << " (" << a.agents
                        << " agents) does not beat " << b.name << " (" << b.agents
                        << " agents)\n";
            }
            if (a.controller == "indirect" && b.controller == "direct" &&
                a.agents == b.agents && a.seed == b.seed) {
                if (a.final_deficit <= b.final_deficit)
                    log << "ok: indirect <= direct final deficit (" << a.name << " vs "
                        << b.name << ")\n";
                else
                    log << "warning: indirect > direct final deficit (" << a.name
                        << " vs " << b.name << ")\n";
            }
        }
    return kExitOk;
}

} // namespace claricov::cli
