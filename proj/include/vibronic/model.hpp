#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vibronic {

using complex = std::complex<double>;

/// Parameter error raised when a ChainParams / config invariant is violated.
class invalid_parameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Tilted Holstein chain parameters. Energies are in units of hbar*omega
/// unless the caller chooses otherwise; hbar is fixed to 1.
class ChainParams {
public:
    int L = 9;
    double J = -0.1;        ///< nearest-neighbour hopping, sign-carrying
    double omega = 1.0;     ///< phonon energy
    double g = 4.0;         ///< local vibronic coupling
    double delta_eps = 0.0; ///< site energy increment per site
    int nu_max = 32;        ///< phonon cutoff per mode
    static constexpr double hbar = 1.0;

    /// Throws invalid_parameter if L < 2, nu_max outside [0, 255] or omega <= 0.
    void validate() const;

    double huang_rhys() const { return (g / (hbar * omega)) * (g / (hbar * omega)); }
    double displacement() const { return g / (hbar * omega); }
    double period() const; ///< 2*pi/omega

    std::string describe() const;

    friend bool operator==(const ChainParams&, const ChainParams&) = default;
};

/// One exciton on `exciton_site` dressed by L phonon occupations.
struct BasisState {
    int exciton_site = 0;
    std::vector<std::uint8_t> phonons;

    friend bool operator==(const BasisState&, const BasisState&) = default;
    friend auto operator<=>(const BasisState&, const BasisState&) = default;
};

/// Throws invalid_parameter if `bs` is not a valid state of `params`.
void validate_state(const BasisState& bs, const ChainParams& params);

/// Sum of the oscillator energies plus the tilt of the occupied site.
double state_energy_diagonal(const BasisState& bs, const ChainParams& params);
double state_energy_diagonal(int exciton_site, std::span<const std::uint8_t> phonons,
                             const ChainParams& params);

/// Overlap of the phonon vacuum with the nu'-th eigenstate of the oscillator
/// displaced by the exciton, e^{-S/2} alpha^nu' / sqrt(nu'!).
complex fc_overlap(int nu_prime, const ChainParams& params);

class SparseWavefunction;

/// Vertical excitation: exciton on `site`, every mode in its vacuum.
SparseWavefunction build_fc_initial_state(const ChainParams& params, int site);

/// Default initial site, floor(L/2).
inline int central_site(const ChainParams& params) { return params.L / 2; }

} // namespace vibronic
