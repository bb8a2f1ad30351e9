#pragma once

#include "vibronic/csv.hpp"
#include "vibronic/model.hpp"

#include <complex>
#include <vector>

namespace vibronic {

// First-order rate-kernel theory for the tilted Holstein dimer and its
// continuous-time random-walk extension to the chain. Time arguments are in
// phonon periods 2*pi/omega; energies in the units of omega.

struct KernelParams {
    double J = -0.1;
    double omega = 1.0;
    double S = 1.0; ///< Huang-Rhys factor (g / hbar omega)^2
    double delta_eps = 0.0;
    int resolution = 512; ///< Simpson points per phonon period
    static constexpr double hbar = 1.0;

    void validate() const;
    static KernelParams from_chain(const ChainParams& p, int resolution = 512);
    double period() const;
};

struct QuadratureResult {
    double value = 0.0;   ///< at the configured resolution
    double refined = 0.0; ///< at twice the resolution
    double error_estimate = 0.0;
    bool converged = true; ///< |refined - value| <= 1e-6 |refined|
};

/// Dimer transfer probability: |J|^2 times the double time integral over
/// [0,t]^2 of exp{2S(e^{-i w (t1-t2)} - 1) + 2iS[sin w t1 - sin w t2] - i d (t1-t2)},
/// by composite Simpson on a uniform grid.
QuadratureResult kernel_q(double t, const KernelParams& kp);

/// kernel_q on a list of times. Only the last time is refined; the rest are
/// evaluated at the configured resolution and inherit its certificate.
std::vector<QuadratureResult> kernel_table(const std::vector<double>& times, const KernelParams& kp);

struct FourierResult {
    std::complex<double> value;
    std::complex<double> refined;
    double error_estimate = 0.0;
    bool converged = true;
};

/// Fourier coefficient of the untilted integrand F at (m w, -m w) over one
/// period square, normalized by T^2.
FourierResult fourier_coefficient(int m, const KernelParams& kp);

/// Near-resonance line shape around delta_eps = m hbar omega.
struct PeakModel {
    int m = 0;
    std::complex<double> c_m;
    double coupling_sq = 0.0; ///< |J / hbar|^2 prefactor of the kernel
    double omega = 1.0;
};

PeakModel make_peak_model(int m, const KernelParams& kp);

/// |J|^2 * 2 c_m (1 - cos(t x)) / x^2 with x = delta_eps/hbar - m omega; returns the
/// limit |J|^2 c_m t^2 at x = 0. Meant for |x| <= omega / 2.
double peak_approx(double t, double delta_eps, const PeakModel& pm);

/// Cumulative transfer kernels on a shared time grid for the two hop
/// directions of every bond: `forward` is j -> j+1 (tilt +delta_eps),
/// `backward` is j+1 -> j (tilt -delta_eps).
struct BondKernels {
    std::vector<double> times;
    std::vector<double> forward;
    std::vector<double> backward;
    bool converged = true;
};

BondKernels make_bond_kernels(const std::vector<double>& times, const KernelParams& kp);

/// Populations of the random walk on the open chain.
struct CtrwState {
    int L = 0;
    std::vector<double> times;
    std::vector<std::vector<double>> populations;
    /// Population-weighted kernel decrements that were clipped to zero.
    double clipped_mass = 0.0;
    /// Largest single-step outflow fraction from any site.
    double max_outflow = 0.0;

    std::vector<double> total() const;
    /// Columns: time,norm2,xbar,rmsd,n_0..n_{L-1}
    CsvTable to_table() const;
    /// Inverse of to_table; the two diagnostics are not stored there.
    static CtrwState from_table(const CsvTable& table);
};

/// Explicit master scheme: over [t_k, t_{k+1}] the hop weight of each bond
/// direction is max(0, q(t_{k+1}) - q(t_k)). Throws invalid_parameter when a
/// step would move more than all of a site's population.
CtrwState ctrw_evolve(int L, int site0, const BondKernels& kernels);

} // namespace vibronic
