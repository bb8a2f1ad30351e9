#include "vibronic/support_set.hpp"

#include <cstring>

namespace vibronic {

namespace {

inline std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
}

} // namespace

SupportSet::SupportSet(int L) : L_(L), stride_((static_cast<std::size_t>(L) + 2 + 7) / 8) {
    table_.assign(16, 0);
    mask_ = table_.size() - 1;
}

void SupportSet::reserve(std::size_t n) {
    pool_.reserve(n * stride_);
    while (table_.size() < 2 * n) grow_table();
}

void SupportSet::clear() {
    count_ = 0;
    pool_.clear();
    std::fill(table_.begin(), table_.end(), 0u);
}

std::vector<std::uint8_t> SupportSet::make_key(int site, std::span<const std::uint8_t> phonons) const {
    std::vector<std::uint8_t> key(record_bytes(), 0);
    std::memcpy(key.data(), phonons.data(), static_cast<std::size_t>(L_));
    key[L_] = static_cast<std::uint8_t>(site & 0xff);
    key[L_ + 1] = static_cast<std::uint8_t>((site >> 8) & 0xff);
    return key;
}

std::vector<std::uint8_t> SupportSet::make_key(const BasisState& bs) const {
    if (static_cast<int>(bs.phonons.size()) != L_)
        throw invalid_parameter("basis state length does not match support set");
    return make_key(bs.exciton_site, bs.phonons);
}

int SupportSet::key_site(std::span<const std::uint8_t> key, int L) {
    return static_cast<int>(key[L]) | (static_cast<int>(key[L + 1]) << 8);
}

std::uint64_t SupportSet::hash_record(const std::uint64_t* words) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t w = 0; w < stride_; ++w) h = mix(h ^ words[w]) + w;
    return h;
}

std::size_t SupportSet::probe(const std::uint64_t* words, std::uint64_t h) const {
    std::size_t slot = h & mask_;
    const std::size_t bytes = record_bytes();
    while (true) {
        const std::uint32_t entry = table_[slot];
        if (entry == 0) return slot;
        if (std::memcmp(pool_.data() + (entry - 1) * stride_, words, bytes) == 0) return slot;
        slot = (slot + 1) & mask_;
    }
}

void SupportSet::grow_table() {
    std::vector<std::uint32_t> old = std::move(table_);
    table_.assign(old.size() * 2, 0);
    mask_ = table_.size() - 1;
    for (std::uint32_t entry : old) {
        if (entry == 0) continue;
        const std::uint64_t* words = pool_.data() + (entry - 1) * stride_;
        std::size_t slot = hash_record(words) & mask_;
        while (table_[slot] != 0) slot = (slot + 1) & mask_;
        table_[slot] = entry;
    }
}

std::optional<std::size_t> SupportSet::find(std::span<const std::uint8_t> key) const {
    if (L_ == 0) return std::nullopt;
    std::uint64_t words[64];
    std::vector<std::uint64_t> heap;
    std::uint64_t* buf = words;
    if (stride_ > 64) {
        heap.resize(stride_);
        buf = heap.data();
    }
    std::memcpy(buf, key.data(), record_bytes());
    const std::uint32_t entry = table_[probe(buf, hash_record(buf))];
    if (entry == 0) return std::nullopt;
    return entry - 1;
}

std::optional<std::size_t> SupportSet::find(const BasisState& bs) const {
    if (static_cast<int>(bs.phonons.size()) != L_) return std::nullopt;
    return find(make_key(bs));
}

std::pair<std::size_t, bool> SupportSet::insert(std::span<const std::uint8_t> key) {
    if (2 * (count_ + 1) > table_.size()) grow_table();
    // Stage the candidate at the end of the pool so probing compares words.
    const std::size_t base = count_ * stride_;
    pool_.resize(base + stride_);
    std::memcpy(pool_.data() + base, key.data(), record_bytes());
    const std::uint64_t* words = pool_.data() + base;
    const std::size_t slot = probe(words, hash_record(words));
    if (table_[slot] != 0) {
        pool_.resize(base);
        return {table_[slot] - 1, false};
    }
    table_[slot] = static_cast<std::uint32_t>(count_ + 1);
    return {count_++, true};
}

std::pair<std::size_t, bool> SupportSet::insert(const BasisState& bs) { return insert(make_key(bs)); }

std::span<const std::uint8_t> SupportSet::record(std::size_t i) const {
    return {reinterpret_cast<const std::uint8_t*>(pool_.data() + i * stride_), record_bytes()};
}

int SupportSet::site(std::size_t i) const { return key_site(record(i), L_); }

std::span<const std::uint8_t> SupportSet::phonons(std::size_t i) const {
    return record(i).first(static_cast<std::size_t>(L_));
}

BasisState SupportSet::state(std::size_t i) const {
    auto ph = phonons(i);
    return BasisState{site(i), std::vector<std::uint8_t>(ph.begin(), ph.end())};
}

} // namespace vibronic
