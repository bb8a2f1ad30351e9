#include "vibronic/wavefunction.hpp"

#include <algorithm>
#include <numeric>

namespace vibronic {

SparseWavefunction::SparseWavefunction(ChainParams params)
    : params_(std::move(params)), support_(params_.L) {}

SparseWavefunction::SparseWavefunction(ChainParams params, SupportSet support,
                                       std::vector<complex> amplitudes, double leak)
    : params_(std::move(params)), support_(std::move(support)), amps_(std::move(amplitudes)),
      leak_(leak) {
    if (amps_.size() != support_.size())
        throw invalid_parameter("amplitude count does not match support size");
}

void SparseWavefunction::add(const BasisState& bs, complex value) {
    validate_state(bs, params_);
    auto [idx, inserted] = support_.insert(bs);
    if (inserted) amps_.push_back(value);
    else amps_[idx] += value;
}

complex SparseWavefunction::amplitude(const BasisState& bs) const {
    auto idx = support_.find(bs);
    return idx ? amps_[*idx] : complex{};
}

double SparseWavefunction::norm2() const {
    long double s = 0.0L;
    for (const auto& a : amps_) s += std::norm(a);
    return static_cast<double>(s);
}

double SparseWavefunction::truncate(double drop_tol) {
    double dropped = 0.0;
    bool any = false;
    for (const auto& a : amps_)
        if (std::norm(a) < drop_tol) {
            any = true;
            break;
        }
    if (!any) return 0.0;
    SupportSet kept(params_.L);
    std::vector<complex> kept_amps;
    kept_amps.reserve(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) {
        const double w = std::norm(amps_[i]);
        if (w < drop_tol) {
            dropped += w;
            continue;
        }
        kept.insert(support_.record(i));
        kept_amps.push_back(amps_[i]);
    }
    support_ = std::move(kept);
    amps_ = std::move(kept_amps);
    leak_ += dropped;
    return dropped;
}

std::vector<std::pair<BasisState, complex>> SparseWavefunction::canonical_entries() const {
    std::vector<std::pair<BasisState, complex>> out;
    out.reserve(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) out.emplace_back(support_.state(i), amps_[i]);
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

void SparseWavefunction::scale(complex factor) {
    for (auto& a : amps_) a *= factor;
}

complex SparseWavefunction::inner(const SparseWavefunction& other) const {
    // Iterate the smaller support.
    complex s{};
    if (size() <= other.size()) {
        for (std::size_t i = 0; i < amps_.size(); ++i) {
            auto j = other.support_.find(support_.record(i));
            if (j) s += std::conj(amps_[i]) * other.amps_[*j];
        }
    } else {
        for (std::size_t j = 0; j < other.amps_.size(); ++j) {
            auto i = support_.find(other.support_.record(j));
            if (i) s += std::conj(amps_[*i]) * other.amps_[j];
        }
    }
    return s;
}

} // namespace vibronic
