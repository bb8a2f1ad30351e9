#pragma once

#include "vibronic/model.hpp"
#include "vibronic/support_set.hpp"
#include "vibronic/wavefunction.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace vibronic {

/// Growing basis with lazily built Hamiltonian rows.
///
/// Each state couples to at most four others: two hops of the exciton and one
/// phonon raised or lowered on the occupied site. Building the row of a state
/// inserts its neighbours, so repeated application of H explores the basis
/// shell by shell. Raising a mode above nu_max is projected out; the squared
/// matrix element that would have been needed is kept per row so callers can
/// report the weight the cutoff removes from H*psi.
///
/// The rows hold H - energy_offset(), with the tilt measured from the chain
/// center. That keeps the arithmetic of a run and of its mirror image
/// (reflected chain, opposite tilt) bit-identical.
class LocalHamiltonian {
public:
    static constexpr int max_neighbors = 4;

    explicit LocalHamiltonian(const ChainParams& params);

    const ChainParams& params() const { return params_; }
    SupportSet& basis() { return basis_; }
    const SupportSet& basis() const { return basis_; }
    std::size_t size() const { return basis_.size(); }
    bool has_row(std::size_t i) const { return i < built_.size() && built_[i]; }

    /// Builds the row of state i, inserting its neighbours.
    void ensure_row(std::size_t i);

    /// Builds rows for every state currently in the basis (new neighbours
    /// are appended but get no row).
    void build_rows();

    /// out = (H - energy_offset())*in, skipping input entries with |in_i|^2 < expand_threshold.
    /// Rows are built on demand, so the basis (and out) may grow.
    void apply(std::span<const complex> in, std::vector<complex>& out, double expand_threshold = 0.0);

    /// Weight sum_i clip_i |in_i|^2 dropped from H*in by the phonon cutoff.
    double clipped_weight(std::span<const complex> in) const;

    double diagonal(std::size_t i) const { return rows_[i].diag; }
    double energy_offset() const { return offset_; }
    const std::array<std::int32_t, max_neighbors>& neighbors(std::size_t i) const { return rows_[i].nb; }
    const std::array<double, max_neighbors>& couplings(std::size_t i) const { return rows_[i].val; }

private:
    ChainParams params_;
    SupportSet basis_;
    double offset_ = 0.0;
    struct Row {
        double diag = 0.0;
        double clip = 0.0;
        std::array<std::int32_t, max_neighbors> nb{-1, -1, -1, -1};
        std::array<double, max_neighbors> val{};
    };
    std::vector<Row> rows_;
    std::vector<bool> built_;
    std::vector<std::uint8_t> key_;
};

/// H*psi over the support of psi and its one-step neighbourhood. When `clipped`
/// is given it receives the weight dropped by the phonon cutoff.
SparseWavefunction apply_hamiltonian(const SparseWavefunction& psi, const ChainParams& params,
                                     double* clipped = nullptr);
SparseWavefunction apply_hamiltonian(const SparseWavefunction& psi, double* clipped = nullptr);

/// <psi|H|psi>
double expectation_energy(const SparseWavefunction& psi);

inline constexpr std::size_t default_dense_cap = 20000;

/// Explicit matrix over the full truncated basis, enumerated in canonical
/// order. H is real symmetric in the occupation basis, so a real matrix is
/// stored.
struct DenseHamiltonian {
    ChainParams params;
    SupportSet basis;
    Eigen::MatrixXd matrix;

    std::size_t dimension() const { return basis.size(); }

    /// Coordinates of psi in this basis.
    Eigen::VectorXcd to_vector(const SparseWavefunction& psi) const;
    /// Sparse state with every basis entry (including zeros unless dropped).
    SparseWavefunction to_sparse(const Eigen::VectorXcd& v, bool skip_zeros = true) const;
};

std::size_t dense_dimension(const ChainParams& params);
DenseHamiltonian build_dense(const ChainParams& params, std::size_t cap = default_dense_cap);

} // namespace vibronic
