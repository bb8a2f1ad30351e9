#include "vibronic/config.hpp"
#include "vibronic/serialize.hpp"
#include "vibronic/version.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

using namespace vibronic;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::vector<std::string> config_files;
    std::string preset;
    std::vector<std::string> sets;
    std::map<std::string, std::string> flags;
    std::map<std::string, std::string> flag_values;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config_files, "key = value config file (repeatable, later wins)");
    cmd->add_option("--preset", c.preset, "named parameter set")->check(CLI::IsMember(RunConfig::preset_names()));
    cmd->add_option("--set", c.sets, "override as key=value (repeatable)");
    for (const auto& [key, help] : RunConfig::keys()) {
        std::string flag = key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        c.flags[key] = flag;
        cmd->add_option("--" + flag, c.flag_values[key], help);
    }
}

ResolvedConfig resolve(const Common& c, CLI::App* cmd) {
    RunConfig rc;
    if (!c.preset.empty()) rc.apply_preset(c.preset);
    for (const auto& f : c.config_files) rc.load_file(f);
    for (const auto& [key, flag] : c.flags)
        if (cmd->count("--" + flag) > 0) rc.set(key, c.flag_values.at(key));
    for (const auto& s : c.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw invalid_parameter("--set expects key=value, got '" + s + "'");
        rc.set(s.substr(0, eq), s.substr(eq + 1));
    }
    return rc.resolve();
}

fs::path prepare_output(const std::string& dir) {
    fs::path p = dir;
    fs::create_directories(p);
    const auto probe = p / ".write_test";
    {
        std::FILE* f = std::fopen(probe.c_str(), "w");
        if (!f) throw invalid_parameter("output directory " + dir + " is not writable");
        std::fclose(f);
    }
    fs::remove(probe);
    return p;
}

json manifest_base(const std::string& command, const ResolvedConfig& rc, int argc, char** argv) {
    json args = json::array();
    for (int i = 0; i < argc; ++i) args.push_back(argv[i]);
    return json{{"program", "vibronic"}, {"version", version}, {"command", command}, {"argv", args},
                {"config", rc.to_json()}};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_propagate(const ResolvedConfig& rc, const std::string& resume, json manifest) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = prepare_output(rc.output);
    SparseWavefunction psi0 = build_fc_initial_state(rc.chain, rc.site0 >= 0 ? rc.site0 : central_site(rc.chain));
    PropagateOptions opt;
    opt.sample_times = rc.plan.sample_times;
    if (!resume.empty()) {
        auto ck = read_checkpoint_file(resume);
        if (!(ck.state.params() == rc.chain))
            throw invalid_parameter("checkpoint " + resume + " was written for " + ck.state.params().describe());
        psi0 = std::move(ck.state);
        opt.t_start = ck.time;
        manifest["resumed_from"] = {{"path", resume}, {"time", ck.time}};
    }
    auto traj = propagate(psi0, rc.propagator, opt);
    write_csv_file((out / "trajectory.csv").string(), traj.observables.to_table());
    CsvTable steps;
    steps.header = {"time", "krylov_dim", "support", "leak"};
    for (std::size_t k = 0; k < traj.step_times.size(); ++k)
        steps.rows.push_back({traj.step_times[k], static_cast<double>(traj.krylov_dims[k]),
                              static_cast<double>(traj.support_sizes[k]), traj.leak_history[k]});
    write_csv_file((out / "steps.csv").string(), steps);
    write_checkpoint_file((out / "final.ckpt").string(), traj.final_state, rc.propagator.t_final);
    for (const auto& w : traj.warnings) std::cerr << "warning: " << w << '\n';

    const auto& o = traj.observables;
    manifest["outputs"] = {"trajectory.csv", "steps.csv", "final.ckpt"};
    manifest["leak"] = traj.leak;
    manifest["max_clipped"] = traj.max_clipped;
    manifest["flagged_steps"] = traj.flagged_steps;
    manifest["final"] = {{"time", o.times.back()}, {"xbar", o.xbar.back()}, {"rmsd", o.rmsd.back()},
                         {"norm2", o.norm2.back()}, {"energy", o.energy.back()}};
    manifest["wall_seconds"] = seconds_since(t0);
    write_json_file((out / "manifest.json").string(), manifest);
    std::printf("t=%g  xbar=%.6f  rmsd=%.6f  leak=%.3e  -> %s\n", o.times.back(), o.xbar.back(), o.rmsd.back(),
                traj.leak, out.c_str());
    return 0;
}

json report_json(const ResonanceReport& r) {
    auto peak = [](const ResonancePeak& p) {
        return json{{"delta_eps", p.delta}, {"value", p.value},       {"prominence", p.prominence},
                    {"m", p.fraction.m},    {"n", p.fraction.n},       {"distance", p.distance},
                    {"matched", p.matched}};
    };
    json peaks = json::array(), anomalies = json::array();
    for (const auto& p : r.peaks) peaks.push_back(peak(p));
    for (const auto& p : r.anomalies) anomalies.push_back(peak(p));
    return json{{"time", r.time}, {"peaks", peaks}, {"anomalies", anomalies}};
}

json analyze_result(const SweepResult& res, const ResonanceOptions& opt, int density_n, const fs::path& out) {
    json doc{{"options",
              {{"n_max", opt.n_max}, {"smoothing", opt.smoothing}, {"prominence_fraction", opt.prominence_fraction}}}};
    std::vector<SweepMethod> methods;
    if (res.plan.method != SweepMethod::ctrw) methods.push_back(SweepMethod::nonperturbative);
    if (res.plan.method != SweepMethod::nonperturbative) methods.push_back(SweepMethod::ctrw);
    std::vector<double> deltas;
    for (const auto& p : res.points) deltas.push_back(p.delta);
    for (auto m : methods) {
        json per_time = json::array();
        for (double t : res.plan.report_times()) {
            auto r = detect_resonances(deltas, res.curve(m, t, "rmsd"), opt);
            r.time = t;
            per_time.push_back(report_json(r));
        }
        doc[to_string(m)] = per_time;
        const int j0 = res.plan.initial_site();
        if (density_n > 0 && j0 - density_n >= 0 && j0 + density_n < res.plan.base.L) {
            auto scan = density_peak_scan(res, density_n, m);
            write_csv_file((out / ("density_scan_" + to_string(m) + ".csv")).string(), scan.table);
            doc[to_string(m) + "_density_argmax"] = {{"n", density_n}, {"times", scan.times},
                                                     {"argmax_delta", scan.argmax_delta}};
        }
    }
    write_json_file((out / "resonances.json").string(), doc);
    return doc;
}

int run_sweep_cmd(const ResolvedConfig& rc, const ResonanceOptions& opt, int density_n, json manifest) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = prepare_output(rc.output);
    auto res = run_sweep(rc.plan, [](const SweepPoint& p, std::size_t done, std::size_t total) {
        if (p.ok)
            std::fprintf(stderr, "[%zu/%zu] delta=%.6g %.1fs\n", done, total, p.delta, p.wall_seconds);
        else
            std::fprintf(stderr, "[%zu/%zu] delta=%.6g failed: %s\n", done, total, p.delta, p.error.c_str());
    });
    int failed = 0;
    for (const auto& p : res.points) failed += p.ok ? 0 : 1;
    analyze_result(res, opt, density_n, out);
    manifest["failed_points"] = failed;
    manifest["wall_seconds"] = seconds_since(t0);
    write_json_file((out / "run.json").string(), manifest);
    std::printf("%zu points, %d failed -> %s\n", res.points.size(), failed, out.c_str());
    return failed == 0 ? 0 : 3;
}

int run_kernel(const ResolvedConfig& rc, bool use_grid, int fourier_max, json manifest) {
    const auto out = prepare_output(rc.output);
    std::vector<double> deltas{rc.kernel.delta_eps};
    if (use_grid) deltas = rc.plan.grid();
    CsvTable t;
    t.header = {"time", "delta", "q", "refined", "error", "converged"};
    bool all_converged = true;
    for (double d : deltas) {
        KernelParams kp = rc.kernel;
        kp.delta_eps = d;
        for (double time : rc.kernel_times) {
            auto r = kernel_q(time, kp);
            all_converged = all_converged && r.converged;
            t.rows.push_back({time, d, r.value, r.refined, r.error_estimate, r.converged ? 1.0 : 0.0});
        }
    }
    write_csv_file((out / "kernel.csv").string(), t);
    manifest["outputs"] = {"kernel.csv"};
    if (fourier_max >= 0) {
        CsvTable f;
        f.header = {"m", "re", "im", "error", "converged"};
        for (int m = -fourier_max; m <= fourier_max; ++m) {
            auto c = fourier_coefficient(m, rc.kernel);
            f.rows.push_back({static_cast<double>(m), c.refined.real(), c.refined.imag(), c.error_estimate,
                              c.converged ? 1.0 : 0.0});
        }
        write_csv_file((out / "fourier.csv").string(), f);
        manifest["outputs"].push_back("fourier.csv");
    }
    manifest["converged"] = all_converged;
    write_json_file((out / "manifest.json").string(), manifest);
    if (!all_converged) std::cerr << "warning: some kernel values did not converge under refinement\n";
    std::printf("%zu kernel values -> %s\n", t.rows.size(), out.c_str());
    return 0;
}

int run_ctrw_cmd(const ResolvedConfig& rc, bool explicit_times, json manifest) {
    const auto out = prepare_output(rc.output);
    std::vector<double> times;
    if (explicit_times) {
        times = rc.kernel_times;
        if (times.empty() || times.front() != 0.0) times.insert(times.begin(), 0.0);
    } else {
        const double tf = rc.propagator.t_final;
        const auto n = static_cast<long>(std::ceil(tf / rc.plan.ctrw_dt - 1e-9));
        for (long k = 0; k <= n; ++k) times.push_back(std::min(k * rc.plan.ctrw_dt, tf));
    }
    auto kernels = make_bond_kernels(times, rc.kernel);
    auto st = ctrw_evolve(rc.chain.L, rc.plan.initial_site(), kernels);
    write_csv_file((out / "ctrw.csv").string(), st.to_table());
    manifest["outputs"] = {"ctrw.csv"};
    manifest["kernels_converged"] = kernels.converged;
    manifest["clipped_mass"] = st.clipped_mass;
    manifest["max_outflow"] = st.max_outflow;
    write_json_file((out / "manifest.json").string(), manifest);
    const auto m = mean_and_rmsd(st.populations.back());
    std::printf("t=%g  xbar=%.6f  rmsd=%.6f  clipped=%.3e -> %s\n", st.times.back(), m.mean, m.rmsd,
                st.clipped_mass, out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tilted Holstein chain dynamics: adaptive Krylov propagation, rate kernels, sweeps"};
    app.set_version_flag("--version", version);
    app.require_subcommand(1);

    Common prop_c, sweep_c, kernel_c, ctrw_c;
    auto* prop = app.add_subcommand("propagate", "propagate one Franck-Condon start");
    add_common(prop, prop_c);
    std::string resume;
    prop->add_option("--resume", resume, "continue from a checkpoint file")->check(CLI::ExistingFile);

    auto* sweep = app.add_subcommand("sweep", "scan the tilt, resumable");
    add_common(sweep, sweep_c);
    ResonanceOptions ropt;
    int density_n = 2;
    for (auto* cmd : {sweep}) {
        cmd->add_option("--n-max", ropt.n_max, "largest denominator for resonance matching")->check(CLI::PositiveNumber);
        cmd->add_option("--smoothing", ropt.smoothing, "moving-average half-width")->check(CLI::NonNegativeNumber);
        cmd->add_option("--prominence", ropt.prominence_fraction, "peak prominence threshold, fraction of max");
        cmd->add_option("--density-n", density_n, "report density n sites from the start");
    }

    auto* kernel = app.add_subcommand("kernel", "first-order transfer probability q(t, delta)");
    add_common(kernel, kernel_c);
    bool kernel_grid = false;
    int fourier_max = -1;
    kernel->add_flag("--over-grid", kernel_grid, "evaluate over the tilt grid instead of delta_eps");
    kernel->add_option("--fourier", fourier_max, "also write c_m for |m| <= M");

    auto* ctrw = app.add_subcommand("ctrw", "rate-kernel random walk on the chain");
    add_common(ctrw, ctrw_c);

    auto* analyze = app.add_subcommand("analyze", "resonance report for a finished sweep directory");
    std::string sweep_dir;
    ResonanceOptions aopt;
    int analyze_n = 2;
    analyze->add_option("dir", sweep_dir, "sweep output directory")->required()->check(CLI::ExistingDirectory);
    analyze->add_option("--n-max", aopt.n_max, "largest denominator")->check(CLI::PositiveNumber);
    analyze->add_option("--smoothing", aopt.smoothing, "moving-average half-width")->check(CLI::NonNegativeNumber);
    analyze->add_option("--prominence", aopt.prominence_fraction, "peak prominence threshold");
    analyze->add_option("--density-n", analyze_n, "report density n sites from the start");

    auto* presets = app.add_subcommand("presets", "list named parameter sets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*prop) {
            auto rc = resolve(prop_c, prop);
            return run_propagate(rc, resume, manifest_base("propagate", rc, argc, argv));
        }
        if (*sweep) {
            auto rc = resolve(sweep_c, sweep);
            ropt.omega = rc.chain.omega;
            return run_sweep_cmd(rc, ropt, density_n, manifest_base("sweep", rc, argc, argv));
        }
        if (*kernel) {
            auto rc = resolve(kernel_c, kernel);
            return run_kernel(rc, kernel_grid, fourier_max, manifest_base("kernel", rc, argc, argv));
        }
        if (*ctrw) {
            auto rc = resolve(ctrw_c, ctrw);
            return run_ctrw_cmd(rc, ctrw->count("--times") > 0, manifest_base("ctrw", rc, argc, argv));
        }
        if (*analyze) {
            auto res = load_sweep(sweep_dir);
            aopt.omega = res.plan.base.omega;
            auto doc = analyze_result(res, aopt, analyze_n, sweep_dir);
            std::cout << doc.dump(2) << '\n';
            return 0;
        }
        if (*presets) {
            for (const auto& name : RunConfig::preset_names())
                std::printf("%-11s %s\n", name.c_str(), RunConfig::preset_description(name).c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
