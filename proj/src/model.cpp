#include "vibronic/model.hpp"
#include "vibronic/wavefunction.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace vibronic {

void ChainParams::validate() const {
    if (L < 2) throw invalid_parameter("L must be >= 2, got " + std::to_string(L));
    if (nu_max < 0 || nu_max > 255)
        throw invalid_parameter("nu_max must be in [0, 255], got " + std::to_string(nu_max));
    if (!(omega > 0.0)) throw invalid_parameter("omega must be > 0");
    if (!std::isfinite(J) || !std::isfinite(g) || !std::isfinite(delta_eps))
        throw invalid_parameter("J, g and delta_eps must be finite");
}

double ChainParams::period() const { return 2.0 * std::numbers::pi / omega; }

std::string ChainParams::describe() const {
    std::ostringstream os;
    os << "L=" << L << " J=" << J << " omega=" << omega << " g=" << g << " delta_eps=" << delta_eps
       << " nu_max=" << nu_max;
    return os.str();
}

void validate_state(const BasisState& bs, const ChainParams& params) {
    if (bs.exciton_site < 0 || bs.exciton_site >= params.L)
        throw invalid_parameter("exciton site " + std::to_string(bs.exciton_site) + " out of range");
    if (static_cast<int>(bs.phonons.size()) != params.L)
        throw invalid_parameter("phonon vector length does not match L");
    for (auto nu : bs.phonons)
        if (nu > params.nu_max) throw invalid_parameter("phonon occupation above nu_max");
}

double state_energy_diagonal(int exciton_site, std::span<const std::uint8_t> phonons,
                             const ChainParams& params) {
    double quanta = 0.0;
    for (auto nu : phonons) quanta += static_cast<double>(nu) + 0.5;
    return params.hbar * params.omega * quanta + params.delta_eps * exciton_site;
}

double state_energy_diagonal(const BasisState& bs, const ChainParams& params) {
    return state_energy_diagonal(bs.exciton_site, bs.phonons, params);
}

complex fc_overlap(int nu_prime, const ChainParams& params) {
    if (nu_prime < 0) throw invalid_parameter("nu' must be non-negative");
    const double alpha = params.displacement();
    const double S = alpha * alpha;
    if (nu_prime == 0) return {std::exp(-0.5 * S), 0.0};
    if (alpha == 0.0) return {0.0, 0.0};
    const double log_mag =
        -0.5 * S + nu_prime * std::log(std::abs(alpha)) - 0.5 * std::lgamma(nu_prime + 1.0);
    const double sign = (alpha < 0.0 && nu_prime % 2 == 1) ? -1.0 : 1.0;
    return {sign * std::exp(log_mag), 0.0};
}

SparseWavefunction build_fc_initial_state(const ChainParams& params, int site) {
    params.validate();
    if (site < 0 || site >= params.L)
        throw invalid_parameter("initial site " + std::to_string(site) + " outside [0, L)");
    SparseWavefunction psi(params);
    psi.add(BasisState{site, std::vector<std::uint8_t>(params.L, 0)}, complex{1.0, 0.0});
    return psi;
}

} // namespace vibronic
