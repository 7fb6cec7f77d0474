#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "parallel.hpp"
#include "types.hpp"

namespace arraylog {

// Flat row-major tuple storage. "Canonical" means rows are in strictly
// increasing full-lexicographic order (sorted and duplicate-free); builders
// may hold non-canonical intermediates but must leave the flag unset.
struct tuple_array {
    std::uint32_t arity = 0;
    bool canonical = false;
    std::vector<value_t> data;  // count() * arity values

    tuple_array() = default;
    explicit tuple_array(std::uint32_t a) : arity(a) {}
    tuple_array(std::uint32_t a, std::vector<value_t> d, bool canon = false)
        : arity(a), canonical(canon), data(std::move(d)) {
        if (arity == 0)
            throw std::logic_error("tuple_array: arity must be positive");
        if (data.size() % arity != 0)
            throw std::logic_error(
                "tuple_array: data length must be count * arity");
    }

    std::size_t count() const { return arity ? data.size() / arity : 0; }

    std::span<const value_t> row(std::size_t i) const {
        return {data.data() + i * arity, arity};
    }

    void push_row(std::initializer_list<value_t> r) {
        if (r.size() != arity)
            throw std::logic_error("tuple_array: row width mismatch");
        data.insert(data.end(), r.begin(), r.end());
        canonical = false;
    }

    std::size_t byte_size() const { return data.size() * sizeof(value_t); }

    bool operator==(const tuple_array&) const = default;
};

namespace detail {

inline int compare_rows(const value_t* a, const value_t* b,
                        std::uint32_t arity) {
    for (std::uint32_t c = 0; c < arity; ++c) {
        if (a[c] != b[c]) return a[c] < b[c] ? -1 : 1;
    }
    return 0;
}

inline bool rows_equal(const value_t* a, const value_t* b,
                       std::uint32_t arity) {
    return compare_rows(a, b, arity) == 0;
}

}  // namespace detail

// Sorts the distinct rows of `raw` into a fresh canonical array. Worker
// blocks are sorted independently and merged pairwise, so the result does
// not depend on the worker count.
inline tuple_array canonicalize(const tuple_array& raw, unsigned workers = 1) {
    if (raw.arity == 0)
        throw std::logic_error("canonicalize: arity must be positive");
    const std::uint32_t k = raw.arity;
    const std::size_t n = raw.count();

    tuple_array out(k);
    out.canonical = true;
    if (n == 0) return out;
    if (raw.canonical) {
        out.data = raw.data;
        return out;
    }

    const value_t* rows = raw.data.data();
    auto row_before = [rows, k](std::uint64_t a, std::uint64_t b) {
        return detail::compare_rows(rows + a * k, rows + b * k, k) < 0;
    };

    std::vector<std::uint64_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    std::size_t nblocks = std::min<std::size_t>(resolve_workers(workers), n);
    if (nblocks <= 1) {
        std::sort(order.begin(), order.end(), row_before);
    } else {
        std::size_t chunk = (n + nblocks - 1) / nblocks;
        std::vector<std::pair<std::size_t, std::size_t>> blocks;
        for (std::size_t lo = 0; lo < n; lo += chunk)
            blocks.emplace_back(lo, std::min(n, lo + chunk));
        parallel_blocks(blocks.size(), workers,
                        [&](std::size_t, std::size_t bl, std::size_t bh) {
                            for (std::size_t b = bl; b < bh; ++b)
                                std::sort(order.begin() + blocks[b].first,
                                          order.begin() + blocks[b].second,
                                          row_before);
                        });
        while (blocks.size() > 1) {
            std::vector<std::pair<std::size_t, std::size_t>> merged;
            for (std::size_t i = 0; i + 1 < blocks.size(); i += 2) {
                std::inplace_merge(order.begin() + blocks[i].first,
                                   order.begin() + blocks[i].second,
                                   order.begin() + blocks[i + 1].second,
                                   row_before);
                merged.emplace_back(blocks[i].first, blocks[i + 1].second);
            }
            if (blocks.size() % 2) merged.push_back(blocks.back());
            blocks = std::move(merged);
        }
    }

    out.data.reserve(raw.data.size());
    const value_t* prev = nullptr;
    for (std::uint64_t idx : order) {
        const value_t* r = rows + idx * k;
        if (prev && detail::rows_equal(prev, r, k)) continue;
        out.data.insert(out.data.end(), r, r + k);
        prev = out.data.data() + out.data.size() - k;
    }
    return out;
}

}  // namespace arraylog
