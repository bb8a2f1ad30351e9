#pragma once

#include "vibronic/csv.hpp"
#include "vibronic/wavefunction.hpp"

#include <span>
#include <vector>

namespace vibronic {

struct Moments {
    double mean = 0.0; ///< X-bar
    double rmsd = 0.0;
};

/// Per-site exciton population sum_{states on j} |a|^2 (not renormalized).
std::vector<double> density(const SparseWavefunction& psi);

/// Mean position and RMSD of `d` after dividing by sum(d). Throws
/// invalid_parameter for an all-zero (or empty) density.
Moments mean_and_rmsd(std::span<const double> d);

/// Total phonon number sum_j <b_j^dag b_j>.
double total_phonons(const SparseWavefunction& psi);

/// Time series sampled along a trajectory. Times are in phonon periods.
struct ObservableSeries {
    int L = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> density; ///< raw n_j per sample
    std::vector<double> xbar;                 ///< moments of the renormalized density
    std::vector<double> rmsd;
    std::vector<double> norm2;
    std::vector<double> energy; ///< <H> / norm2
    std::vector<double> phonons;

    std::size_t size() const { return times.size(); }

    /// Evaluates every observable of `psi`; `energy` is passed in when the
    /// caller already has it, otherwise H is applied once.
    void append(double time, const SparseWavefunction& psi);
    void append(double time, const SparseWavefunction& psi, double energy);

    /// Columns: time,norm2,energy,xbar,rmsd,n_0..n_{L-1},phonons
    CsvTable to_table() const;
    static ObservableSeries from_table(const CsvTable& table);
};

} // namespace vibronic
