#pragma once

#include "vibronic/propagator.hpp"
#include "vibronic/ratekernel.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace vibronic {

enum class SweepMethod { nonperturbative, ctrw, both };

std::string to_string(SweepMethod m);
SweepMethod parse_method(const std::string& s);

struct SweepPlan {
    ChainParams base;
    PropagatorConfig propagator;
    double delta_start = 0.0;
    double delta_stop = 2.2;
    int delta_count = 111;
    SweepMethod method = SweepMethod::nonperturbative;
    /// Times (periods) reported in the summary; empty means t_final only.
    std::vector<double> sample_times;
    int workers = 1;
    int site0 = -1; ///< -1 selects the central site
    int kernel_resolution = 512;
    double ctrw_dt = 0.01; ///< random-walk time step in periods
    /// Per-point and summary files go here; empty keeps everything in memory.
    std::string output_dir;

    void validate() const;
    std::vector<double> grid() const;
    int initial_site() const;
    /// Sample times actually reported (sorted, t_final included).
    std::vector<double> report_times() const;
};

struct SweepPoint {
    double delta = 0.0;
    bool ok = true;
    bool resumed = false; ///< loaded from an earlier run instead of computed
    std::string error;
    double wall_seconds = 0.0;
    std::optional<ObservableSeries> nonperturbative;
    double leak = 0.0;
    int flagged_steps = 0;
    std::optional<CtrwState> ctrw;
};

struct SweepResult {
    SweepPlan plan;
    std::vector<SweepPoint> points; ///< grid order

    /// One row per (delta, report time): delta,time,norm2,xbar,rmsd,leak,n_0..n_{L-1}.
    CsvTable summary(SweepMethod which) const;
    /// Values of `column` (xbar, rmsd or n_j) along the grid at one time.
    std::vector<double> curve(SweepMethod which, double time, const std::string& column) const;
};

/// Called after each finished point, from the writer thread.
using SweepProgress = std::function<void(const SweepPoint&, std::size_t done, std::size_t total)>;

/// Runs every grid point, in parallel over plan.workers threads. With an
/// output directory, each point is written as soon as it finishes and a later
/// call with the same plan reuses the files that are already there.
SweepResult run_sweep(const SweepPlan& plan, const SweepProgress& progress = {});

/// Reads a finished sweep directory back without computing anything; throws
/// when a point is missing.
SweepResult load_sweep(const std::string& output_dir);

struct Fraction {
    int m = 0;
    int n = 1;
    double value() const { return static_cast<double>(m) / n; }
};

/// Closest m/n with 1 <= n <= n_max in lowest terms; ties go to smaller n.
Fraction nearest_fraction(double x, int n_max);

struct ResonancePeak {
    std::size_t index = 0;
    double delta = 0.0;
    double value = 0.0;
    double prominence = 0.0;
    Fraction fraction;
    double distance = 0.0; ///< |delta/omega - m/n|
    bool matched = false;
};

struct ResonanceOptions {
    int n_max = 4;
    double omega = 1.0;
    int smoothing = 0;                    ///< half-width of a moving average, 0 = none
    double prominence_fraction = 0.05;    ///< relative to the curve maximum
};

struct ResonanceReport {
    double time = 0.0;
    std::vector<ResonancePeak> peaks;     ///< prominent local maxima
    std::vector<ResonancePeak> anomalies; ///< prominent maxima with no rational nearby
    const ResonancePeak* find(int m, int n) const;
};

/// Peaks of a sampled curve by 3-point comparison. Prominence is the drop to
/// the higher of the two bases, each base being the lowest point between the
/// peak and the nearest higher sample on that side (or the curve end).
ResonanceReport detect_resonances(const std::vector<double>& deltas, const std::vector<double>& values,
                                  const ResonanceOptions& opt = {});

/// Density n sites either side of the start, normalized by the total weight.
struct DensityPeakScan {
    int n = 0;
    std::vector<double> times;
    std::vector<double> argmax_delta; ///< per time, of n_{j0-n} + n_{j0+n}
    CsvTable table;                   ///< delta,time,minus,plus,sum
};

DensityPeakScan density_peak_scan(const SweepResult& result, int n,
                                  SweepMethod which = SweepMethod::nonperturbative);

} // namespace vibronic
