#pragma once

#include "vibronic/model.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace vibronic {

/// Insertion-ordered set of basis states with O(1) index lookup.
///
/// States are stored as fixed-width byte records (L phonon bytes followed by
/// the two-byte exciton site, zero padded to a whole number of 64-bit words)
/// in one contiguous pool. Indices are dense and stable: the i-th inserted
/// state keeps index i for the lifetime of the set, so iteration order only
/// depends on insertion history.
class SupportSet {
public:
    SupportSet() = default;
    explicit SupportSet(int L);

    int sites() const { return L_; }
    std::size_t size() const { return count_; }
    bool empty() const { return count_ == 0; }
    void reserve(std::size_t n);
    void clear();

    /// Width of a record in bytes.
    std::size_t record_bytes() const { return stride_ * sizeof(std::uint64_t); }

    /// Raw key helpers. A key is a buffer of record_bytes() bytes.
    std::vector<std::uint8_t> make_key(const BasisState& bs) const;
    std::vector<std::uint8_t> make_key(int site, std::span<const std::uint8_t> phonons) const;
    static int key_site(std::span<const std::uint8_t> key, int L);

    std::optional<std::size_t> find(std::span<const std::uint8_t> key) const;
    std::optional<std::size_t> find(const BasisState& bs) const;

    /// Returns (index, inserted).
    std::pair<std::size_t, bool> insert(std::span<const std::uint8_t> key);
    std::pair<std::size_t, bool> insert(const BasisState& bs);

    int site(std::size_t i) const;
    std::span<const std::uint8_t> phonons(std::size_t i) const;
    std::span<const std::uint8_t> record(std::size_t i) const;
    BasisState state(std::size_t i) const;

private:
    std::uint64_t hash_record(const std::uint64_t* words) const;
    void grow_table();
    std::size_t probe(const std::uint64_t* words, std::uint64_t h) const;

    int L_ = 0;
    std::size_t stride_ = 0; // words per record
    std::size_t count_ = 0;
    std::vector<std::uint64_t> pool_;
    std::vector<std::uint32_t> table_; // index + 1, 0 = empty
    std::size_t mask_ = 0;
};

} // namespace vibronic
