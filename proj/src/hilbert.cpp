#include "vibronic/hilbert.hpp"

#include <cmath>
#include <limits>

namespace vibronic {

LocalHamiltonian::LocalHamiltonian(const ChainParams& params) : params_(params), basis_(params.L) {
    params_.validate();
    offset_ = params_.delta_eps * 0.5 * (params_.L - 1);
}

void LocalHamiltonian::ensure_row(std::size_t i) {
    if (has_row(i)) return;
    const int L = params_.L;
    if (rows_.size() <= i) {
        rows_.resize(i + 1);
        built_.resize(i + 1, false);
    }
    // Work on a copy of the record: inserting may reallocate the pool.
    auto rec = basis_.record(i);
    key_.assign(rec.begin(), rec.end());
    const int site = SupportSet::key_site(key_, L);

    Row row;
    double quanta = 0.0;
    for (int j = 0; j < L; ++j) quanta += key_[j] + 0.5;
    row.diag = params_.hbar * params_.omega * quanta + params_.delta_eps * (site - 0.5 * (L - 1));
    int k = 0;

    if (params_.J != 0.0) {
        for (int hop : {site - 1, site + 1}) {
            if (hop < 0 || hop >= L) continue;
            key_[L] = static_cast<std::uint8_t>(hop & 0xff);
            key_[L + 1] = static_cast<std::uint8_t>((hop >> 8) & 0xff);
            row.nb[k] = static_cast<std::int32_t>(basis_.insert(key_).first);
            row.val[k++] = params_.J;
        }
        key_[L] = static_cast<std::uint8_t>(site & 0xff);
        key_[L + 1] = static_cast<std::uint8_t>((site >> 8) & 0xff);
    }

    if (params_.g != 0.0) {
        const int nu = key_[site];
        if (nu < params_.nu_max) {
            key_[site] = static_cast<std::uint8_t>(nu + 1);
            row.nb[k] = static_cast<std::int32_t>(basis_.insert(key_).first);
            row.val[k++] = params_.g * std::sqrt(nu + 1.0);
        } else {
            row.clip = params_.g * params_.g * (nu + 1.0);
        }
        if (nu > 0) {
            key_[site] = static_cast<std::uint8_t>(nu - 1);
            row.nb[k] = static_cast<std::int32_t>(basis_.insert(key_).first);
            row.val[k++] = params_.g * std::sqrt(static_cast<double>(nu));
        }
    }

    rows_[i] = row;
    built_[i] = true;
}

void LocalHamiltonian::build_rows() {
    const std::size_t target = basis_.size();
    rows_.reserve(target);
    for (std::size_t i = 0; i < target; ++i) ensure_row(i);
}

void LocalHamiltonian::apply(std::span<const complex> in, std::vector<complex>& out,
                             double expand_threshold) {
    out.assign(basis_.size(), complex{});
    for (std::size_t i = 0; i < in.size(); ++i) {
        const complex v = in[i];
        if (v == complex{}) continue;
        if (expand_threshold > 0.0 && std::norm(v) < expand_threshold) continue;
        if (!has_row(i)) {
            ensure_row(i);
            if (out.size() < basis_.size()) out.resize(basis_.size());
        }
        const Row& row = rows_[i];
        out[i] += row.diag * v;
        for (int k = 0; k < max_neighbors && row.nb[k] >= 0; ++k) out[row.nb[k]] += row.val[k] * v;
    }
}

double LocalHamiltonian::clipped_weight(std::span<const complex> in) const {
    double s = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i)
        if (has_row(i) && rows_[i].clip != 0.0) s += rows_[i].clip * std::norm(in[i]);
    return s;
}

SparseWavefunction apply_hamiltonian(const SparseWavefunction& psi, const ChainParams& params,
                                     double* clipped) {
    LocalHamiltonian h(params);
    const auto& sup = psi.support();
    h.basis().reserve(5 * sup.size());
    for (std::size_t i = 0; i < sup.size(); ++i) {
        auto state = sup.state(i);
        validate_state(state, params);
        h.basis().insert(sup.record(i));
    }
    std::vector<complex> out;
    h.apply(psi.amplitudes(), out);
    auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) out[i] += h.energy_offset() * amps[i];
    if (clipped) *clipped = h.clipped_weight(psi.amplitudes());
    return SparseWavefunction(params, h.basis(), std::move(out), psi.leak());
}

SparseWavefunction apply_hamiltonian(const SparseWavefunction& psi, double* clipped) {
    return apply_hamiltonian(psi, psi.params(), clipped);
}

double expectation_energy(const SparseWavefunction& psi) {
    auto hpsi = apply_hamiltonian(psi);
    return psi.inner(hpsi).real();
}

std::size_t dense_dimension(const ChainParams& params) {
    // Saturates instead of overflowing for large L.
    const double dim =
        static_cast<double>(params.L) * std::pow(static_cast<double>(params.nu_max + 1), params.L);
    if (dim > static_cast<double>(std::numeric_limits<std::size_t>::max() / 2))
        return std::numeric_limits<std::size_t>::max() / 2;
    return static_cast<std::size_t>(dim);
}

DenseHamiltonian build_dense(const ChainParams& params, std::size_t cap) {
    params.validate();
    const std::size_t dim = dense_dimension(params);
    if (dim > cap)
        throw invalid_parameter("dense dimension " + std::to_string(dim) + " exceeds cap " +
                                std::to_string(cap) + " for " + params.describe());

    DenseHamiltonian out{params, SupportSet(params.L), Eigen::MatrixXd::Zero(dim, dim)};
    out.basis.reserve(dim);
    // Canonical order: site major, then phonon occupations lexicographically.
    const int L = params.L;
    BasisState bs{0, std::vector<std::uint8_t>(L, 0)};
    for (int site = 0; site < L; ++site) {
        bs.exciton_site = site;
        std::fill(bs.phonons.begin(), bs.phonons.end(), 0);
        while (true) {
            out.basis.insert(bs);
            int pos = L - 1;
            while (pos >= 0 && bs.phonons[pos] == params.nu_max) bs.phonons[pos--] = 0;
            if (pos < 0) break;
            ++bs.phonons[pos];
        }
    }

    LocalHamiltonian h(params);
    for (std::size_t i = 0; i < dim; ++i) h.basis().insert(out.basis.record(i));
    h.build_rows();
    if (h.size() != dim) throw std::logic_error("build_dense: basis not closed under H");
    for (std::size_t j = 0; j < dim; ++j) {
        out.matrix(j, j) += h.diagonal(j) + h.energy_offset();
        const auto& nb = h.neighbors(j);
        const auto& val = h.couplings(j);
        for (int k = 0; k < LocalHamiltonian::max_neighbors && nb[k] >= 0; ++k)
            out.matrix(nb[k], j) += val[k];
    }
    return out;
}

Eigen::VectorXcd DenseHamiltonian::to_vector(const SparseWavefunction& psi) const {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dimension());
    const auto& sup = psi.support();
    auto amps = psi.amplitudes();
    for (std::size_t i = 0; i < sup.size(); ++i) {
        auto idx = basis.find(sup.record(i));
        if (!idx) throw invalid_parameter("state outside the dense basis");
        v[*idx] = amps[i];
    }
    return v;
}

SparseWavefunction DenseHamiltonian::to_sparse(const Eigen::VectorXcd& v, bool skip_zeros) const {
    SupportSet sup(params.L);
    std::vector<complex> amps;
    for (std::size_t i = 0; i < dimension(); ++i) {
        if (skip_zeros && v[i] == complex{}) continue;
        sup.insert(basis.record(i));
        amps.push_back(v[i]);
    }
    return SparseWavefunction(params, std::move(sup), std::move(amps));
}

} // namespace vibronic
