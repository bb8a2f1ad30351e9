#pragma once

#include "vibronic/model.hpp"
#include "vibronic/support_set.hpp"

#include <span>
#include <utility>
#include <vector>

namespace vibronic {

/// Amplitudes over an adaptive support set.
///
/// `leak()` is the total squared amplitude removed by truncation passes over
/// the history of this state; for a state that started normalized,
/// norm2() + leak() == 1 up to rounding.
class SparseWavefunction {
public:
    explicit SparseWavefunction(ChainParams params);
    SparseWavefunction(ChainParams params, SupportSet support, std::vector<complex> amplitudes,
                       double leak = 0.0);

    const ChainParams& params() const { return params_; }
    const SupportSet& support() const { return support_; }
    std::span<const complex> amplitudes() const { return amps_; }
    std::size_t size() const { return amps_.size(); }

    /// Adds `value` to the amplitude of `bs`, inserting it if absent.
    void add(const BasisState& bs, complex value);
    complex amplitude(const BasisState& bs) const;

    double norm2() const;
    double leak() const { return leak_; }
    void set_leak(double leak) { leak_ = leak; }

    /// Removes entries with |a|^2 < drop_tol, keeping the order of the
    /// survivors. Returns the removed weight, which is also added to leak().
    double truncate(double drop_tol);

    /// Entries sorted by the canonical BasisState order.
    std::vector<std::pair<BasisState, complex>> canonical_entries() const;

    void scale(complex factor);
    complex inner(const SparseWavefunction& other) const; ///< <this|other>

private:
    ChainParams params_;
    SupportSet support_;
    std::vector<complex> amps_;
    double leak_ = 0.0;
};

/// Vertical excitation: exciton on `site`, every mode in its vacuum.
SparseWavefunction build_fc_initial_state(const ChainParams& params, int site);

} // namespace vibronic
