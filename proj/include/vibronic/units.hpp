#pragma once

#include <string>

namespace vibronic {

enum class UnitSystem { dimensionless, wavenumber_fs };

UnitSystem parse_units(const std::string& s);
std::string to_string(UnitSystem u);

/// Speed of light in cm/fs.
inline constexpr double speed_of_light_cm_per_fs = 2.99792458e-5;

/// Converts between user-facing units and the internal ones (energies in
/// hbar*omega, times in phonon periods). For wavenumber_fs, energies are in
/// cm^-1 and times in fs, scaled by the phonon wavenumber omega_cm.
struct UnitConverter {
    UnitSystem system = UnitSystem::dimensionless;
    double omega_cm = 1.0;

    void validate() const;
    double energy_in(double v) const;
    double energy_out(double v) const;
    double time_in(double v) const;
    double time_out(double v) const;
    /// One phonon period in fs.
    double period_fs() const;
};

} // namespace vibronic
