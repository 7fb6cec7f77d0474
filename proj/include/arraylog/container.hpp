#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "index_map.hpp"
#include "tuple_array.hpp"
#include "types.hpp"

namespace arraylog {

inline std::vector<std::uint32_t> identity_permutation(std::uint32_t arity) {
    std::vector<std::uint32_t> p(arity);
    std::iota(p.begin(), p.end(), 0);
    return p;
}

inline bool is_identity_permutation(std::span<const std::uint32_t> perm) {
    for (std::uint32_t i = 0; i < perm.size(); ++i)
        if (perm[i] != i) return false;
    return true;
}

// Canonical tuple storage plus an optional prefix index. Containers are
// immutable once built and safe to share across workers; `permutation`
// records how columns were reordered relative to the logical relation
// (empty or identity for the base copy).
struct relation_container {
    tuple_array tuples;
    std::optional<index_map> index;
    std::vector<std::uint32_t> permutation;

    std::uint32_t arity() const { return tuples.arity; }
    std::size_t row_count() const { return tuples.count(); }
};

struct row_range {
    std::size_t start = 0;
    std::size_t count = 0;
    bool empty() const { return count == 0; }
    bool operator==(const row_range&) const = default;
};

// Returns the contiguous row range whose first prefix_len columns equal
// `prefix`. Probing accepts a slot only after comparing the actual tuple
// prefix at the stored offset, so hash collisions between distinct
// prefixes just continue the probe. The match count comes from a forward
// scan, exploiting sortedness.
inline row_range range_lookup(const relation_container& c,
                              std::span<const value_t> prefix) {
    if (!c.index)
        throw usage_error("range_lookup: container has no index");
    if (c.index->prefix_len != prefix.size())
        throw usage_error("range_lookup: prefix length " +
                          std::to_string(prefix.size()) +
                          " does not match index prefix_len " +
                          std::to_string(c.index->prefix_len));

    const auto& map = *c.index;
    const std::size_t slot_count = map.slot_count();
    const value_t* rows = c.tuples.data.data();
    const std::uint32_t k = c.tuples.arity;
    const std::uint32_t plen = map.prefix_len;

    auto prefix_matches = [&](std::size_t row) {
        const value_t* r = rows + row * k;
        for (std::uint32_t i = 0; i < plen; ++i)
            if (r[i] != prefix[i]) return false;
        return true;
    };

    const std::uint64_t h = slot_key(prefix);
    std::size_t i = h % slot_count;
    for (std::size_t probes = 0; probes < slot_count; ++probes) {
        const auto& s = map.slots[i];
        if (s.key_hash == kEmptySlot) return {};
        if (s.key_hash == h && prefix_matches(s.offset)) {
            std::size_t end = s.offset + 1;
            const std::size_t n = c.tuples.count();
            while (end < n && prefix_matches(end)) ++end;
            return {s.offset, end - s.offset};
        }
        i = (i + 1) % slot_count;
    }
    return {};
}

inline row_range range_lookup(const relation_container& c,
                              std::initializer_list<value_t> prefix) {
    return range_lookup(c, std::span<const value_t>(prefix.begin(),
                                                    prefix.size()));
}

// Wraps a canonical array into a container, optionally building the prefix
// index. The array must already be in the permuted column order.
inline relation_container make_container(
    tuple_array canonical, std::vector<std::uint32_t> permutation = {},
    std::optional<std::uint32_t> index_prefix_len = std::nullopt,
    double load_factor = 0.8, unsigned workers = 1) {
    if (!canonical.canonical)
        throw std::logic_error("make_container: array must be canonical");
    relation_container c;
    c.tuples = std::move(canonical);
    c.permutation = permutation.empty()
                        ? identity_permutation(c.tuples.arity)
                        : std::move(permutation);
    if (index_prefix_len)
        c.index = build_index(c.tuples, *index_prefix_len, load_factor,
                              workers);
    return c;
}

}  // namespace arraylog
