#include "vibronic/units.hpp"

#include "vibronic/model.hpp"

#include <cmath>

namespace vibronic {

UnitSystem parse_units(const std::string& s) {
    if (s == "dimensionless") return UnitSystem::dimensionless;
    if (s == "wavenumber-fs") return UnitSystem::wavenumber_fs;
    throw invalid_parameter("unknown unit system '" + s + "' (dimensionless or wavenumber-fs)");
}

std::string to_string(UnitSystem u) { return u == UnitSystem::dimensionless ? "dimensionless" : "wavenumber-fs"; }

void UnitConverter::validate() const {
    if (system == UnitSystem::wavenumber_fs && !(omega_cm > 0.0 && std::isfinite(omega_cm)))
        throw invalid_parameter("omega_cm must be a positive wavenumber");
}

double UnitConverter::energy_in(double v) const { return system == UnitSystem::dimensionless ? v : v / omega_cm; }
double UnitConverter::energy_out(double v) const { return system == UnitSystem::dimensionless ? v : v * omega_cm; }

double UnitConverter::time_in(double v) const {
    return system == UnitSystem::dimensionless ? v : v * speed_of_light_cm_per_fs * omega_cm;
}

double UnitConverter::time_out(double v) const {
    return system == UnitSystem::dimensionless ? v : v / (speed_of_light_cm_per_fs * omega_cm);
}

double UnitConverter::period_fs() const { return 1.0 / (speed_of_light_cm_per_fs * omega_cm); }

} // namespace vibronic
