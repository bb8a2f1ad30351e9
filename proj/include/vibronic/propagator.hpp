#pragma once

#include "vibronic/hilbert.hpp"
#include "vibronic/observables.hpp"
#include "vibronic/wavefunction.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace vibronic {

// All times in this header are in phonon periods 2*pi/omega.

struct PropagatorConfig {
    double dt = 0.01;
    int krylov_dim_max = 24;
    double krylov_tol = 1e-10;
    double drop_tol = 1e-12; ///< squared-amplitude truncation threshold
    double t_final = 1.0;
    int sample_every = 1; ///< record observables every this many steps
    /// Krylov vectors are expanded only through entries whose weight, scaled
    /// to the state norm, is at least expand_factor * drop_tol. With
    /// drop_tol = 0 every entry is expanded and the Krylov space is exact.
    double expand_factor = 1e-2;

    void validate() const;
    friend bool operator==(const PropagatorConfig&, const PropagatorConfig&) = default;
};

struct StepReport {
    int krylov_dim = 0;
    double residual = 0.0; ///< a-posteriori error estimate of the Krylov exponential
    bool converged = true;
    double dropped = 0.0;  ///< weight removed by drop_tol
    double clipped = 0.0;  ///< weight of H*psi removed by the phonon cutoff, first vector
    std::size_t working_size = 0;
    std::size_t support_size = 0;
};

/// exp(-i H dt) psi by Lanczos with full reorthogonalization, followed by a
/// drop_tol truncation pass (no renormalization).
SparseWavefunction krylov_step(const SparseWavefunction& psi, double dt, const PropagatorConfig& cfg,
                               StepReport* report = nullptr);

struct Trajectory {
    explicit Trajectory(SparseWavefunction initial) : final_state(std::move(initial)) {}

    ObservableSeries observables;
    std::vector<double> step_times; ///< end time of every step
    std::vector<int> krylov_dims;
    std::vector<std::size_t> support_sizes;
    std::vector<double> leak_history;
    double leak = 0.0;
    double max_clipped = 0.0;
    int flagged_steps = 0;
    std::vector<std::string> warnings;
    SparseWavefunction final_state;
};

struct PropagateOptions {
    /// Additional times at which observables are recorded; steps are
    /// shortened to land on them exactly.
    std::vector<double> sample_times;
    /// Called at every recorded sample (including t = 0).
    std::function<void(double, const SparseWavefunction&)> on_sample;
    /// Starting time when resuming from a checkpoint.
    double t_start = 0.0;
};

Trajectory propagate(const SparseWavefunction& psi0, const PropagatorConfig& cfg,
                     const PropagateOptions& options = {});

/// Exact propagator from a full diagonalization of build_dense.
class DensePropagator {
public:
    explicit DensePropagator(const ChainParams& params, std::size_t cap = default_dense_cap);

    const DenseHamiltonian& hamiltonian() const { return h_; }
    const Eigen::VectorXd& eigenvalues() const { return evals_; }
    Eigen::VectorXcd evolve(const Eigen::VectorXcd& v, double t) const;
    SparseWavefunction evolve(const SparseWavefunction& psi, double t) const;

private:
    DenseHamiltonian h_;
    Eigen::VectorXd evals_;
    Eigen::MatrixXd evecs_;
};

SparseWavefunction dense_propagate(const SparseWavefunction& psi0, double t, const ChainParams& params);

/// Versioned text checkpoint. Floating point fields are hexadecimal so a
/// restart reproduces the state bit for bit; entries keep support order.
struct Checkpoint {
    SparseWavefunction state;
    double time = 0.0;
};

inline constexpr int checkpoint_version = 1;

void write_checkpoint(std::ostream& os, const SparseWavefunction& psi, double time);
void write_checkpoint_file(const std::string& path, const SparseWavefunction& psi, double time);
Checkpoint read_checkpoint(std::istream& is);
Checkpoint read_checkpoint_file(const std::string& path);

} // namespace vibronic
