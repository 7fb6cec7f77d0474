#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "hash.hpp"
#include "tuple_array.hpp"
#include "types.hpp"

namespace arraylog {

// Open-addressing map from join-prefix hash to the offset of the first
// (lexicographically smallest) row of that prefix group in the owning
// sorted array. Probing is linear, +1 with wraparound; a slot whose key
// equals the sentinel is empty.
struct index_map {
    struct slot {
        value_t key_hash = kEmptySlot;
        std::uint64_t offset = 0;
        bool operator==(const slot&) const = default;
    };

    std::vector<slot> slots;
    std::uint32_t prefix_len = 0;
    double load_factor = 0.8;

    std::size_t slot_count() const { return slots.size(); }

    std::size_t occupied() const {
        std::size_t n = 0;
        for (const auto& s : slots)
            if (s.key_hash != kEmptySlot) ++n;
        return n;
    }

    bool operator==(const index_map&) const = default;
};

namespace detail {

// Positions of the first row of each prefix group. Boundary marking runs in
// parallel blocks; collection is in row order, so the result is identical
// for any worker count.
inline std::vector<std::uint64_t> group_starts(const tuple_array& tuples,
                                               std::uint32_t prefix_len,
                                               unsigned workers) {
    const std::size_t n = tuples.count();
    std::vector<std::uint8_t> is_start(n, 0);
    const value_t* rows = tuples.data.data();
    const std::uint32_t k = tuples.arity;
    parallel_blocks(n, workers,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
                        for (std::size_t i = lo; i < hi; ++i) {
                            is_start[i] =
                                i == 0 ||
                                compare_rows(rows + (i - 1) * k, rows + i * k,
                                             prefix_len) != 0;
                        }
                    });
    std::vector<std::uint64_t> starts;
    for (std::size_t i = 0; i < n; ++i)
        if (is_start[i]) starts.push_back(i);
    return starts;
}

}  // namespace detail

// Builds the prefix index for a canonical array. Slots are claimed in
// lexicographic group order, which makes the layout a pure function of the
// tuple data; the parallel and sequential paths differ only in how group
// starts are discovered and therefore produce byte-identical maps.
inline index_map build_index(const tuple_array& tuples,
                             std::uint32_t prefix_len,
                             double load_factor = 0.8, unsigned workers = 1) {
    if (!tuples.canonical)
        throw std::logic_error("build_index: tuples must be canonical");
    if (prefix_len == 0 || prefix_len > tuples.arity)
        throw config_error("build_index: prefix_len must be in [1, arity]");
    if (!(load_factor > 0.0) || load_factor >= 1.0)
        throw config_error("build_index: load factor must be in (0, 1)");

    auto starts = detail::group_starts(tuples, prefix_len, workers);
    const std::size_t distinct = starts.size();

    std::size_t slot_count =
        distinct == 0
            ? 1
            : static_cast<std::size_t>(
                  std::ceil(static_cast<double>(distinct) / load_factor));
    while (static_cast<double>(distinct) >
           load_factor * static_cast<double>(slot_count))
        ++slot_count;

    index_map map;
    map.prefix_len = prefix_len;
    map.load_factor = load_factor;
    map.slots.assign(slot_count, {});

    const value_t* rows = tuples.data.data();
    const std::uint32_t k = tuples.arity;
    for (std::uint64_t offset : starts) {
        std::uint64_t h = slot_key({rows + offset * k, prefix_len});
        std::size_t i = h % slot_count;
        for (;;) {
            auto& s = map.slots[i];
            if (s.key_hash == kEmptySlot) {
                s.key_hash = h;
                s.offset = offset;
                break;
            }
            if (s.key_hash == h &&
                detail::compare_rows(rows + s.offset * k, rows + offset * k,
                                     prefix_len) == 0) {
                // Same prefix published twice: keep the smallest offset.
                s.offset = std::min(s.offset, offset);
                break;
            }
            i = (i + 1) % slot_count;
        }
    }
    return map;
}

}  // namespace arraylog
