// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Sweeps are cached under the directory given as
// the first argument so a repeated run only re-evaluates.

#include "vibronic/propagator.hpp"
#include "vibronic/ratekernel.hpp"
#include "vibronic/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace vibronic;
namespace fs = std::filesystem;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

void note(const std::string& s) { std::fprintf(stderr, "  %s\n", s.c_str()); }

// Conservation bookkeeping collected from every propagation below.
struct Ledger {
    double worst_leak_identity = 0.0; // |norm2 + leak - 1|
    double worst_ctrw_total = 0.0;    // |sum p - 1|
    double worst_mirror = 0.0;        // |rmsd(d) - rmsd(-d)|
    double worst_energy_drift = 0.0;  // exact and drop_tol = 1e-14 runs only
    int propagations = 0;
    int ctrw_runs = 0;
    int mirror_pairs = 0;
    int energy_runs = 0;

    void trajectory(const ObservableSeries& o, double leak) {
        ++propagations;
        worst_leak_identity = std::max(worst_leak_identity, std::abs(o.norm2.back() + leak - 1.0));
    }
    void ctrw(const CtrwState& s) {
        ++ctrw_runs;
        for (double t : s.total()) worst_ctrw_total = std::max(worst_ctrw_total, std::abs(t - 1.0));
    }
    void mirror(const ObservableSeries& a, const ObservableSeries& b) {
        ++mirror_pairs;
        for (std::size_t k = 0; k < std::min(a.size(), b.size()); ++k)
            worst_mirror = std::max(worst_mirror, std::abs(a.rmsd[k] - b.rmsd[k]));
    }
    void energy(const ObservableSeries& o) {
        ++energy_runs;
        const double e0 = o.energy.front();
        for (double e : o.energy) worst_energy_drift = std::max(worst_energy_drift, std::abs(e - e0) / std::abs(e0));
    }
};

Ledger ledger;
fs::path cache_root = "acceptance_cache";

void record_sweep(const SweepResult& r) {
    for (const auto& p : r.points) {
        if (!p.ok) continue;
        if (p.nonperturbative) ledger.trajectory(*p.nonperturbative, p.leak);
        if (p.ctrw) ledger.ctrw(*p.ctrw);
    }
}

SweepResult cached_sweep(SweepPlan plan, const std::string& name) {
    plan.output_dir = (cache_root / name).string();
    const auto t0 = std::chrono::steady_clock::now();
    auto r = run_sweep(plan, [&](const SweepPoint& p, std::size_t done, std::size_t total) {
        if (!p.resumed)
            std::fprintf(stderr, "    %s [%zu/%zu] delta=%.4g %.1fs%s\n", name.c_str(), done, total, p.delta,
                         p.wall_seconds, p.ok ? "" : (" FAILED: " + p.error).c_str());
    });
    note(fmt("%s: %zu points, %.0fs", name.c_str(), r.points.size(),
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    record_sweep(r);
    return r;
}

double at(const std::vector<double>& grid, const std::vector<double>& v, double delta) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (std::abs(grid[i] - delta) < 1e-9) return v[i];
    throw std::logic_error("delta not on grid");
}

// Criterion 1: Krylov against exact diagonalization.
Outcome oracle_equivalence() {
    ChainParams p;
    p.L = 2;
    p.nu_max = 6;
    p.g = 1.0;
    p.J = -0.1;
    p.delta_eps = 0.7;
    PropagatorConfig c;
    c.drop_tol = 0.0;
    c.t_final = 5.0;
    const auto t0 = std::chrono::steady_clock::now();
    const auto psi0 = build_fc_initial_state(p, central_site(p));
    auto traj = propagate(psi0, c);
    const auto exact = dense_propagate(psi0, c.t_final, p);
    const double fid = std::abs(exact.inner(traj.final_state));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ledger.trajectory(traj.observables, traj.leak);
    ledger.energy(traj.observables);

    // Mirror partner: reflected start, reversed tilt.
    ChainParams q = p;
    q.delta_eps = -p.delta_eps;
    auto mirror = propagate(build_fc_initial_state(q, p.L - 1 - central_site(p)), c);
    ledger.trajectory(mirror.observables, mirror.leak);
    ledger.mirror(traj.observables, mirror.observables);

    return {fid >= 1.0 - 1e-8 && secs < 60.0, fmt("1 - |<dense|krylov>| = %.2e (need <= 1e-8), %.1fs", 1.0 - fid, secs)};
}

// Criterion 2: S = 0 closed form.
Outcome analytic_limit() {
    double worst = 0.0;
    int n = 0;
    for (double d : {0.3, 0.7, 1.5}) {
        KernelParams kp;
        kp.S = 0.0;
        kp.J = -0.1;
        kp.delta_eps = d;
        for (int k = 0; k <= 100; ++k) {
            const double t = 0.1 * k;
            const double tau = t * two_pi;
            const double ref = kp.J * kp.J * std::pow(2.0 / d, 2) * std::pow(std::sin(d * tau / 2.0), 2);
            const double q = kernel_q(t, kp).value;
            // Relative error, floored at the exact zeros of sin^2 by the kernel's bound J^2 tau^2.
            const double scale = std::max(ref, 1e-6 * kp.J * kp.J * tau * tau);
            if (scale > 0.0) worst = std::max(worst, std::abs(q - ref) / scale);
            else worst = std::max(worst, std::abs(q));
            ++n;
        }
    }
    return {worst < 1e-8, fmt("max relative error %.2e over %d (t, delta) points (need < 1e-8)", worst, n)};
}

SweepPlan weak_hopping_plan() {
    SweepPlan plan;
    plan.base.L = 9;
    plan.base.J = -0.1;
    plan.base.g = 2.0;
    plan.base.nu_max = 32;
    plan.propagator.drop_tol = 1e-12;
    plan.propagator.t_final = 3.0;
    plan.propagator.sample_every = 10;
    plan.sample_times = {1.0, 1.5, 2.0, 2.5};
    plan.delta_start = 1.0;
    plan.delta_stop = 2.0;
    plan.delta_count = 3;
    plan.method = SweepMethod::both;
    return plan;
}

// Criterion 3: rate-kernel random walk against the exact dynamics. Any report
// time up to 3T may carry the comparison; every one is listed.
Outcome weak_hopping_agreement() {
    auto plan = weak_hopping_plan();
    auto r = cached_sweep(plan, "weak_hopping");
    const auto grid = plan.grid();
    double chosen = -1.0, rel_at = 0.0, ratio_at = 0.0;
    double rel_final = 0.0, ratio_final = 0.0;
    for (double t : plan.report_times()) {
        const auto np = r.curve(SweepMethod::nonperturbative, t, "rmsd");
        const auto cw = r.curve(SweepMethod::ctrw, t, "rmsd");
        double rel = 0.0, ratio = 1e300;
        for (double peak : {1.0, 2.0}) {
            const double a = at(grid, np, peak), b = at(grid, cw, peak);
            rel = std::max(rel, std::abs(b - a) / a);
            ratio = std::min({ratio, a / at(grid, np, 1.5), b / at(grid, cw, 1.5)});
        }
        note(fmt("t=%.1fT rmsd exact %.4f %.4f %.4f  ctrw %.4f %.4f %.4f  mismatch %.1f%%  peak/valley %.2f", t,
                 np[0], np[1], np[2], cw[0], cw[1], cw[2], 100 * rel, ratio));
        if (chosen < 0 && rel <= 0.2 && ratio >= 3.0) chosen = t, rel_at = rel, ratio_at = ratio;
        rel_final = rel, ratio_final = ratio;
    }

    // Mirror partner of the first resonance.
    ChainParams q = plan.base;
    q.delta_eps = -1.0;
    auto mirror = propagate(build_fc_initial_state(q, central_site(q)), plan.propagator, {plan.sample_times});
    ledger.trajectory(mirror.observables, mirror.leak);
    ledger.mirror(r.points[0].nonperturbative.value(), mirror.observables);

    if (chosen < 0)
        return {false, fmt("no time <= 3T meets both; at 3T mismatch %.1f%% (need <= 20%%), min peak/valley %.2f "
                           "(need >= 3)",
                           100 * rel_final, ratio_final)};
    return {true, fmt("at t=%.1fT mismatch %.1f%% (need <= 20%%), min peak/valley %.2f (need >= 3); at 3T %.1f%%, %.2f",
                      chosen, 100 * rel_at, ratio_at, 100 * rel_final, ratio_final)};
}

SweepPlan cy3_plan(int L, double start, double stop) {
    SweepPlan plan;
    plan.base.L = L;
    plan.base.J = 0.55;
    plan.base.g = std::sqrt(0.5);
    plan.base.nu_max = 10;
    plan.propagator.drop_tol = 1e-7;
    plan.propagator.t_final = 180.0 / (1.0 / (2.99792458e-5 * 1150.0)); // 180 fs at 1150 cm^-1
    plan.propagator.sample_every = 50;
    plan.sample_times = {2.0, 3.0, 4.0, 5.0, 6.0};
    plan.delta_start = start;
    plan.delta_stop = stop;
    plan.delta_count = static_cast<int>(std::lround((stop - start) / 0.02)) + 1;
    return plan;
}

bool has_peak_near(const ResonanceReport& rep, double target, double tol) {
    for (const auto& p : rep.peaks)
        if (std::abs(p.delta - target) <= tol + 1e-9) return true;
    return false;
}

std::string peak_list(const ResonanceReport& rep) {
    std::ostringstream os;
    for (const auto& p : rep.peaks) os << fmt(" %.2f(prominence %.2f)", p.delta, p.prominence);
    return os.str();
}

// Criterion 4: fractional resonances at Cy3-like parameters.
Outcome fractional_resonances(SweepResult& main_sweep) {
    auto plan = cy3_plan(21, 0.0, 1.16);
    main_sweep = cached_sweep(plan, "cy3_L21");
    const auto grid = plan.grid();
    ResonanceOptions opt;
    opt.n_max = 4;
    double best_time = -1.0;
    for (double t : plan.report_times()) {
        auto rep = detect_resonances(grid, main_sweep.curve(SweepMethod::nonperturbative, t, "rmsd"), opt);
        const bool ok = has_peak_near(rep, 0.5, 0.02) && has_peak_near(rep, 1.0, 0.02);
        note(fmt("L=21 t=%.2fT rmsd maxima:%s%s", t, peak_list(rep).c_str(), ok ? "  <- 1/2 and 1" : ""));
        if (ok && best_time < 0) best_time = t;
    }

    auto third = cy3_plan(31, 0.2, 0.5);
    auto r31 = cached_sweep(third, "cy3_L31");
    double third_time = -1.0;
    for (double t : third.report_times()) {
        auto rep = detect_resonances(third.grid(), r31.curve(SweepMethod::nonperturbative, t, "rmsd"), opt);
        const bool ok = has_peak_near(rep, 1.0 / 3.0, 0.02);
        note(fmt("L=31 t=%.2fT rmsd maxima:%s%s", t, peak_list(rep).c_str(), ok ? "  <- 1/3" : ""));
        if (ok && third_time < 0) third_time = t;
    }

    // Mirror partner at the two-bond resonance.
    ChainParams q = plan.base;
    q.delta_eps = -0.5;
    auto mirror = propagate(build_fc_initial_state(q, central_site(q)), plan.propagator, {plan.sample_times});
    ledger.trajectory(mirror.observables, mirror.leak);
    ledger.mirror(main_sweep.points[25].nonperturbative.value(), mirror.observables);

    std::string detail = best_time > 0 ? fmt("maxima at 1/2 and 1 at t=%.2fT", best_time)
                                       : std::string("no report time has maxima within 0.02 of both 1/2 and 1");
    detail += third_time > 0 ? fmt("; 1/3 at L=31 t=%.2fT", third_time) : std::string("; no maximum near 1/3 at L=31");
    return {best_time > 0 && third_time > 0, detail};
}

// Criterion 5: density two sites out, and the untilted symmetry.
Outcome multimodal_density(const SweepResult& sweep) {
    auto scan = density_peak_scan(sweep, 2);
    double best_time = -1.0;
    for (std::size_t k = 0; k < scan.times.size(); ++k) {
        const bool ok = std::abs(scan.argmax_delta[k] - 0.5) <= 0.04 + 1e-9;
        note(fmt("t=%.2fT argmax of n(j0-2)+n(j0+2) at delta=%.2f", scan.times[k], scan.argmax_delta[k]));
        if (ok && best_time < 0) best_time = scan.times[k];
    }
    const auto& zero = sweep.points.front();
    double asym = 0.0;
    if (zero.ok && zero.nonperturbative) {
        const auto& o = *zero.nonperturbative;
        const auto& d = o.density.back();
        for (std::size_t j = 0; j < d.size(); ++j)
            asym = std::max(asym, std::abs(d[j] - d[d.size() - 1 - j]) / o.norm2.back());
    }
    std::string detail = best_time > 0 ? fmt("argmax within 0.04 of 1/2 at t=%.2fT", best_time)
                                       : std::string("argmax never within 0.04 of 1/2");
    detail += fmt("; delta=0 reflection asymmetry %.2e (need <= 1e-6)", asym);
    return {best_time > 0 && asym <= 1e-6, detail};
}

double bessel_c(int m, double S) {
    double total = 0.0, weight = std::exp(-2.0 * S);
    for (int k = 0; k < 80; ++k) {
        if (k > 0) weight *= 2.0 * S / k;
        const double b = std::cyl_bessel_j(std::abs(m + k), 2.0 * S);
        total += weight * b * b;
    }
    return total;
}

// Criterion 6: quadratic growth on resonance.
Outcome peak_growth() {
    KernelParams kp;
    kp.S = 1.0;
    kp.J = -0.1;
    kp.delta_eps = 1.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (double t = 2.0; t <= 10.0 + 1e-9; t += 0.25) {
        const double lx = std::log(t), ly = std::log(kernel_q(t, kp).refined);
        sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
        ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);

    PeakModel pm = make_peak_model(1, kp);
    pm.c_m = bessel_c(1, kp.S);
    double worst = 0.0;
    for (double t = 5.0; t <= 10.0 + 1e-9; t += 0.5) {
        const double q = kernel_q(t, kp).refined;
        worst = std::max(worst, std::abs(peak_approx(t, kp.delta_eps, pm) - q) / q);
    }
    return {std::abs(slope - 2.0) <= 0.1 && worst <= 0.05,
            fmt("log-log slope %.4f over [2T,10T] (need 2 +- 0.1); line-shape model off by <= %.2f%% for t >= 5T (need <= 5%%)",
                slope, 100.0 * worst)};
}

// Criterion 7: the bookkeeping gathered above plus a drop_tol = 1e-14 energy run.
Outcome conservation() {
    auto plan = weak_hopping_plan();
    ChainParams p = plan.base;
    p.delta_eps = 1.0;
    PropagatorConfig c = plan.propagator;
    c.drop_tol = 1e-14;
    const auto t0 = std::chrono::steady_clock::now();
    auto traj = propagate(build_fc_initial_state(p, central_site(p)), c);
    note(fmt("drop_tol=1e-14 run: leak %.2e, %.0fs", traj.leak,
             std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()));
    ledger.trajectory(traj.observables, traj.leak);
    ledger.energy(traj.observables);

    const auto& L = ledger;
    const bool ok = L.worst_leak_identity <= 1e-12 && L.worst_energy_drift < 1e-6 && L.worst_ctrw_total <= 1e-9 &&
                    L.worst_mirror <= 1e-8 && traj.leak < 1e-6;
    return {ok, fmt("leak identity %.1e over %d runs; energy drift %.1e (%d runs); ctrw total %.1e (%d runs); "
                    "mirror rmsd %.1e (%d pairs); leak at 1e-14 %.1e",
                    L.worst_leak_identity, L.propagations, L.worst_energy_drift, L.energy_runs, L.worst_ctrw_total,
                    L.ctrw_runs, L.worst_mirror, L.mirror_pairs, traj.leak)};
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) cache_root = argv[1];
    fs::create_directories(cache_root);

    int failed = 0;
    auto report = [&](int id, const char* name, const std::function<Outcome()>& f) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            o = f();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d %s  %s: %s [%.0fs]\n", id, o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    };

    SweepResult cy3;
    report(1, "oracle equivalence", oracle_equivalence);
    report(2, "analytic kernel limit", analytic_limit);
    report(3, "random walk vs exact, weak hopping", weak_hopping_agreement);
    report(4, "fractional resonances", [&] { return fractional_resonances(cy3); });
    report(5, "multimodal density", [&] {
        if (cy3.points.empty()) return Outcome{false, "criterion 4 sweep unavailable"};
        return multimodal_density(cy3);
    });
    report(6, "t^2 peak growth", peak_growth);
    report(7, "conservation", conservation);
    return failed == 0 ? 0 : 1;
}
