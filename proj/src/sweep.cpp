#include "vibronic/sweep.hpp"

#include "vibronic/serialize.hpp"
#include "vibronic/version.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace vibronic {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(SweepMethod m) {
    switch (m) {
    case SweepMethod::nonperturbative: return "nonperturbative";
    case SweepMethod::ctrw: return "ctrw";
    case SweepMethod::both: return "both";
    }
    return "?";
}

SweepMethod parse_method(const std::string& s) {
    if (s == "nonperturbative") return SweepMethod::nonperturbative;
    if (s == "ctrw") return SweepMethod::ctrw;
    if (s == "both") return SweepMethod::both;
    throw invalid_parameter("unknown sweep method '" + s + "' (nonperturbative, ctrw or both)");
}

void SweepPlan::validate() const {
    base.validate();
    propagator.validate();
    if (delta_count < 2) throw invalid_parameter("sweep grid needs at least 2 points");
    if (!(delta_stop > delta_start)) throw invalid_parameter("sweep grid must be strictly increasing");
    if (workers < 1) throw invalid_parameter("workers must be >= 1");
    if (site0 < -1 || site0 >= base.L) throw invalid_parameter("initial site out of range");
    if (!(ctrw_dt > 0.0)) throw invalid_parameter("ctrw_dt must be > 0");
    if (kernel_resolution < 32) throw invalid_parameter("kernel resolution must be >= 32");
    for (double t : sample_times)
        if (!(t > 0.0) || t > propagator.t_final * (1 + 1e-12))
            throw invalid_parameter("sample times must lie in (0, t_final]");
}

std::vector<double> SweepPlan::grid() const {
    std::vector<double> g(delta_count);
    const double step = (delta_stop - delta_start) / (delta_count - 1);
    for (int i = 0; i < delta_count; ++i) g[i] = delta_start + i * step;
    g.back() = delta_stop;
    return g;
}

int SweepPlan::initial_site() const { return site0 >= 0 ? site0 : central_site(base); }

std::vector<double> SweepPlan::report_times() const {
    std::vector<double> t = sample_times;
    t.push_back(propagator.t_final);
    std::sort(t.begin(), t.end());
    std::vector<double> out;
    for (double v : t)
        if (out.empty() || std::abs(v - out.back()) > 1e-12) out.push_back(v);
    return out;
}

namespace {

constexpr double time_match = 1e-9;

std::string point_stem(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "point_%04zu", i);
    return buf;
}

CtrwState run_ctrw(const SweepPlan& plan, const ChainParams& p) {
    std::vector<double> times{0.0};
    const double tf = plan.propagator.t_final;
    const auto n = static_cast<long>(std::ceil(tf / plan.ctrw_dt - 1e-9));
    for (long k = 1; k <= n; ++k) times.push_back(std::min(k * plan.ctrw_dt, tf));
    for (double t : plan.sample_times) times.push_back(t);
    std::sort(times.begin(), times.end());
    std::vector<double> merged;
    for (double t : times)
        if (merged.empty() || t - merged.back() > 1e-12) merged.push_back(t);
    auto kp = KernelParams::from_chain(p, plan.kernel_resolution);
    return ctrw_evolve(p.L, plan.initial_site(), make_bond_kernels(merged, kp));
}

void compute_point(const SweepPlan& plan, SweepPoint& pt) {
    const auto start = std::chrono::steady_clock::now();
    ChainParams p = plan.base;
    p.delta_eps = pt.delta;
    try {
        if (plan.method != SweepMethod::ctrw) {
            PropagateOptions opt;
            opt.sample_times = plan.sample_times;
            auto traj = propagate(build_fc_initial_state(p, plan.initial_site()), plan.propagator, opt);
            pt.leak = traj.leak;
            pt.flagged_steps = traj.flagged_steps;
            pt.nonperturbative = std::move(traj.observables);
        }
        if (plan.method != SweepMethod::nonperturbative) pt.ctrw = run_ctrw(plan, p);
    } catch (const std::exception& e) {
        pt.ok = false;
        pt.error = e.what();
    }
    pt.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json point_record(std::size_t i, const SweepPoint& pt) {
    json j{{"index", i},           {"delta_eps", pt.delta},
           {"ok", pt.ok},          {"resumed", pt.resumed},
           {"wall_seconds", pt.wall_seconds}, {"leak", pt.leak},
           {"flagged_steps", pt.flagged_steps}};
    if (!pt.ok) j["error"] = pt.error;
    if (pt.ctrw) {
        j["ctrw_clipped_mass"] = pt.ctrw->clipped_mass;
        j["ctrw_max_outflow"] = pt.ctrw->max_outflow;
    }
    return j;
}

void write_point(const fs::path& dir, std::size_t i, const SweepPoint& pt) {
    const auto stem = point_stem(i);
    if (pt.nonperturbative) write_csv_file((dir / (stem + "_np.csv")).string(), pt.nonperturbative->to_table());
    if (pt.ctrw) write_csv_file((dir / (stem + "_ctrw.csv")).string(), pt.ctrw->to_table());
    // The record goes last: its presence marks the point complete.
    write_json_file((dir / (stem + ".json")).string(), point_record(i, pt));
}

bool load_point(const fs::path& dir, std::size_t i, const SweepPlan& plan, SweepPoint& pt) {
    const auto stem = point_stem(i);
    const auto rec_path = dir / (stem + ".json");
    if (!fs::exists(rec_path)) return false;
    try {
        const json rec = read_json_file(rec_path.string());
        if (!rec.at("ok").get<bool>() || rec.at("delta_eps").get<double>() != pt.delta) return false;
        SweepPoint loaded;
        loaded.delta = pt.delta;
        loaded.resumed = true;
        loaded.wall_seconds = rec.at("wall_seconds").get<double>();
        loaded.leak = rec.at("leak").get<double>();
        loaded.flagged_steps = rec.at("flagged_steps").get<int>();
        if (plan.method != SweepMethod::ctrw)
            loaded.nonperturbative = ObservableSeries::from_table(read_csv_file((dir / (stem + "_np.csv")).string()));
        if (plan.method != SweepMethod::nonperturbative) {
            loaded.ctrw = CtrwState::from_table(read_csv_file((dir / (stem + "_ctrw.csv")).string()));
            loaded.ctrw->clipped_mass = rec.at("ctrw_clipped_mass").get<double>();
            loaded.ctrw->max_outflow = rec.at("ctrw_max_outflow").get<double>();
        }
        pt = std::move(loaded);
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return buf;
}

} // namespace

SweepResult run_sweep(const SweepPlan& plan, const SweepProgress& progress) {
    plan.validate();
    const auto grid = plan.grid();
    SweepResult result;
    result.plan = plan;
    result.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) result.points[i].delta = grid[i];

    const bool persist = !plan.output_dir.empty();
    const fs::path dir = plan.output_dir;
    const fs::path points_dir = dir / "points";
    const std::string started = utc_now();
    std::vector<char> pending(grid.size(), 1);
    if (persist) {
        fs::create_directories(points_dir);
        const auto plan_path = dir / "plan.json";
        const json identity = plan_identity(plan);
        if (fs::exists(plan_path)) {
            if (read_json_file(plan_path.string()) != identity)
                throw invalid_parameter("output directory " + plan.output_dir + " holds a different sweep");
        } else {
            write_json_file(plan_path.string(), identity);
        }
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (load_point(points_dir, i, plan, result.points[i])) pending[i] = 0;
    }

    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (pending[i]) todo.push_back(i);

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::size_t> finished;
    std::size_t workers_left = 0;
    std::exception_ptr writer_error;

    auto worker = [&] {
        for (std::size_t k = next++; k < todo.size(); k = next++) {
            compute_point(plan, result.points[todo[k]]);
            std::lock_guard lock(mu);
            finished.push_back(todo[k]);
            cv.notify_one();
        }
        std::lock_guard lock(mu);
        --workers_left;
        cv.notify_one();
    };

    // Single writer: files and progress callbacks are serialized here.
    std::size_t done = grid.size() - todo.size();
    auto writer = [&] {
        while (true) {
            std::unique_lock lock(mu);
            cv.wait(lock, [&] { return !finished.empty() || workers_left == 0; });
            if (finished.empty()) return;
            const std::size_t i = finished.front();
            finished.pop_front();
            lock.unlock();
            ++done;
            try {
                if (persist && result.points[i].ok) write_point(points_dir, i, result.points[i]);
                if (progress) progress(result.points[i], done, grid.size());
            } catch (...) {
                if (!writer_error) writer_error = std::current_exception();
            }
        }
    };

    const int n_workers = std::max(1, std::min<int>(plan.workers, static_cast<int>(todo.size())));
    workers_left = static_cast<std::size_t>(n_workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    writer();
    for (auto& t : pool) t.join();
    if (writer_error) std::rethrow_exception(writer_error);

    if (persist) {
        json manifest{{"program", "vibronic"}, {"version", version},      {"started", started},
                      {"finished", utc_now()}, {"plan", plan},            {"grid", grid},
                      {"report_times", plan.report_times()}};
        double total_wall = 0.0;
        json pts = json::array();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            pts.push_back(point_record(i, result.points[i]));
            total_wall += result.points[i].wall_seconds;
        }
        manifest["points"] = pts;
        manifest["compute_seconds"] = total_wall;
        if (plan.method != SweepMethod::ctrw)
            write_csv_file((dir / "summary_nonperturbative.csv").string(),
                           result.summary(SweepMethod::nonperturbative));
        if (plan.method != SweepMethod::nonperturbative)
            write_csv_file((dir / "summary_ctrw.csv").string(), result.summary(SweepMethod::ctrw));
        write_json_file((dir / "manifest.json").string(), manifest);
    }
    return result;
}

SweepResult load_sweep(const std::string& output_dir) {
    const fs::path dir = output_dir;
    SweepPlan plan = read_json_file((dir / "plan.json").string()).get<SweepPlan>();
    plan.output_dir = output_dir;
    plan.validate();
    SweepResult result;
    result.plan = plan;
    const auto grid = plan.grid();
    result.points.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        result.points[i].delta = grid[i];
        if (!load_point(dir / "points", i, plan, result.points[i]))
            throw invalid_parameter("sweep in " + output_dir + " is incomplete: point " + std::to_string(i) +
                                    " (delta_eps=" + format_double(grid[i]) + ") missing");
    }
    return result;
}

CsvTable SweepResult::summary(SweepMethod which) const {
    if (which == SweepMethod::both) throw invalid_parameter("summary needs a single method");
    const int L = plan.base.L;
    CsvTable t;
    t.header = {"delta", "time", "norm2", "xbar", "rmsd", "leak"};
    for (int j = 0; j < L; ++j) t.header.push_back("n_" + std::to_string(j));
    const auto times = plan.report_times();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& pt : points) {
        for (double tr : times) {
            std::vector<double> row{pt.delta, tr};
            bool found = false;
            if (pt.ok && which == SweepMethod::nonperturbative && pt.nonperturbative) {
                const auto& s = *pt.nonperturbative;
                for (std::size_t k = 0; k < s.size() && !found; ++k) {
                    if (std::abs(s.times[k] - tr) > time_match) continue;
                    row.insert(row.end(), {s.norm2[k], s.xbar[k], s.rmsd[k], pt.leak});
                    row.insert(row.end(), s.density[k].begin(), s.density[k].end());
                    found = true;
                }
            } else if (pt.ok && which == SweepMethod::ctrw && pt.ctrw) {
                const auto& c = *pt.ctrw;
                for (std::size_t k = 0; k < c.times.size() && !found; ++k) {
                    if (std::abs(c.times[k] - tr) > time_match) continue;
                    const auto& p = c.populations[k];
                    const double s = std::accumulate(p.begin(), p.end(), 0.0);
                    const auto m = mean_and_rmsd(p);
                    row.insert(row.end(), {s, m.mean, m.rmsd, 0.0});
                    row.insert(row.end(), p.begin(), p.end());
                    found = true;
                }
            }
            if (!found) row.resize(t.header.size(), nan);
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

std::vector<double> SweepResult::curve(SweepMethod which, double time, const std::string& column) const {
    const auto t = summary(which);
    const auto ct = t.column("time"), cc = t.column(column);
    std::vector<double> out;
    for (const auto& row : t.rows)
        if (std::abs(row[ct] - time) <= time_match) out.push_back(row[cc]);
    if (out.size() != points.size())
        throw invalid_parameter("time " + format_double(time) + " is not a report time of this sweep");
    return out;
}

Fraction nearest_fraction(double x, int n_max) {
    if (n_max < 1) throw invalid_parameter("n_max must be >= 1");
    Fraction best{static_cast<int>(std::lround(x)), 1};
    double best_d = std::abs(x - best.value());
    for (int n = 2; n <= n_max; ++n) {
        const int m = static_cast<int>(std::lround(x * n));
        if (std::gcd(m, n) != 1) continue;
        const double d = std::abs(x - static_cast<double>(m) / n);
        if (d < best_d - 1e-12) {
            best = {m, n};
            best_d = d;
        }
    }
    return best;
}

const ResonancePeak* ResonanceReport::find(int m, int n) const {
    for (const auto& p : peaks)
        if (p.matched && p.fraction.m == m && p.fraction.n == n) return &p;
    return nullptr;
}

ResonanceReport detect_resonances(const std::vector<double>& deltas, const std::vector<double>& values,
                                  const ResonanceOptions& opt) {
    if (deltas.size() != values.size()) throw invalid_parameter("detect_resonances: size mismatch");
    if (opt.n_max < 1) throw invalid_parameter("n_max must be >= 1");
    const std::size_t n = values.size();
    ResonanceReport rep;
    if (n < 3) return rep;

    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= static_cast<std::size_t>(opt.smoothing) ? i - opt.smoothing : 0;
        const std::size_t hi = std::min(n - 1, i + opt.smoothing);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += values[k];
        s[i] = acc / static_cast<double>(hi - lo + 1);
    }
    const double top = *std::max_element(s.begin(), s.end());

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(s[i] > s[i - 1] && s[i] >= s[i + 1])) continue;
        double left = s[i], right = s[i];
        for (std::size_t k = i; k-- > 0;) {
            if (s[k] > s[i]) break;
            left = std::min(left, s[k]);
        }
        for (std::size_t k = i + 1; k < n; ++k) {
            if (s[k] > s[i]) break;
            right = std::min(right, s[k]);
        }
        ResonancePeak p;
        p.index = i;
        p.delta = deltas[i];
        p.value = s[i];
        p.prominence = s[i] - std::max(left, right);
        if (p.prominence < opt.prominence_fraction * top) continue;
        const double x = deltas[i] / opt.omega;
        p.fraction = nearest_fraction(x, opt.n_max);
        p.distance = std::abs(x - p.fraction.value());
        const double spacing = std::max(deltas[i + 1] - deltas[i], deltas[i] - deltas[i - 1]) / opt.omega;
        p.matched = p.distance <= spacing * (1 + 1e-9);
        rep.peaks.push_back(p);
        if (!p.matched) rep.anomalies.push_back(p);
    }
    return rep;
}

DensityPeakScan density_peak_scan(const SweepResult& result, int n, SweepMethod which) {
    const int L = result.plan.base.L, j0 = result.plan.initial_site();
    if (n < 1 || j0 - n < 0 || j0 + n >= L)
        throw invalid_parameter("density_peak_scan: sites j0 +- n must lie on the chain");
    DensityPeakScan scan;
    scan.n = n;
    scan.times = result.plan.report_times();
    scan.table.header = {"delta", "time", "minus", "plus", "sum"};
    const auto summary = result.summary(which);
    const auto cd = summary.column("delta"), ct = summary.column("time"), cn = summary.column("norm2");
    const auto cm = summary.column("n_" + std::to_string(j0 - n)), cp = summary.column("n_" + std::to_string(j0 + n));
    for (double t : scan.times) {
        double best = -1.0, arg = std::numeric_limits<double>::quiet_NaN();
        for (const auto& row : summary.rows) {
            if (std::abs(row[ct] - t) > time_match || !(row[cn] > 0.0)) continue;
            const double minus = row[cm] / row[cn], plus = row[cp] / row[cn];
            scan.table.rows.push_back({row[cd], t, minus, plus, minus + plus});
            if (minus + plus > best) {
                best = minus + plus;
                arg = row[cd];
            }
        }
        scan.argmax_delta.push_back(arg);
    }
    return scan;
}

} // namespace vibronic
