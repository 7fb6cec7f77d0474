#pragma once

#include <bit>
#include <cstdint>
#include <span>

#include "types.hpp"

namespace arraylog {

namespace detail {

inline std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

}  // namespace detail

// Murmur3 (x64 128-bit variant, low word) over the little-endian byte
// concatenation of the column values, seed 0. Every input is a whole
// number of 64-bit lanes, so the byte-level tail cases collapse to one
// trailing lane. Bit-exact on all platforms so index layouts reproduce.
inline std::uint64_t prefix_hash(std::span<const value_t> columns) {
    constexpr std::uint64_t c1 = 0x87c37b91114253d5ULL;
    constexpr std::uint64_t c2 = 0x4cf5ad432745937fULL;
    std::uint64_t h1 = 0, h2 = 0;

    const std::size_t n = columns.size();
    for (std::size_t i = 0; i + 1 < n; i += 2) {
        std::uint64_t k1 = columns[i];
        std::uint64_t k2 = columns[i + 1];
        k1 *= c1; k1 = std::rotl(k1, 31); k1 *= c2; h1 ^= k1;
        h1 = std::rotl(h1, 27); h1 += h2; h1 = h1 * 5 + 0x52dce729;
        k2 *= c2; k2 = std::rotl(k2, 33); k2 *= c1; h2 ^= k2;
        h2 = std::rotl(h2, 31); h2 += h1; h2 = h2 * 5 + 0x38495ab5;
    }
    if (n % 2) {
        std::uint64_t k1 = columns[n - 1];
        k1 *= c1; k1 = std::rotl(k1, 31); k1 *= c2; h1 ^= k1;
    }

    const std::uint64_t len = n * sizeof(value_t);
    h1 ^= len; h2 ^= len;
    h1 += h2; h2 += h1;
    h1 = detail::fmix64(h1);
    h2 = detail::fmix64(h2);
    return h1 + h2;
}

// Hash as stored in index slots: values equal to the empty-slot sentinel
// are remapped so the sentinel stays reserved.
inline std::uint64_t slot_key(std::span<const value_t> columns) {
    std::uint64_t h = prefix_hash(columns);
    return h == kEmptySlot ? kEmptySlot - 1 : h;
}

}  // namespace arraylog
