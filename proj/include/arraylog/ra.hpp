#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <span>
#include <vector>

#include "container.hpp"
#include "parallel.hpp"
#include "tuple_array.hpp"
#include "types.hpp"

namespace arraylog {

// One output value of a projection or one side of a filter: a column of
// the outer row, a column of the inner row, or a constant.
struct operand {
    enum class kind : std::uint8_t { outer_col, inner_col, constant };

    kind from = kind::constant;
    std::uint32_t column = 0;
    value_t value = 0;

    static operand outer(std::uint32_t c) {
        return {kind::outer_col, c, 0};
    }
    static operand inner(std::uint32_t c) {
        return {kind::inner_col, c, 0};
    }
    static operand constant(value_t v) { return {kind::constant, 0, v}; }

    bool operator==(const operand&) const = default;
};

struct column_map {
    std::vector<operand> sources;

    std::uint32_t output_arity() const {
        return static_cast<std::uint32_t>(sources.size());
    }
    bool operator==(const column_map&) const = default;
};

// Post-match row predicate: lhs <op> rhs where op is == or !=. Inequality
// filters implement constraints like SG's x != y; equality filters carry
// in-atom constants and repeated variables.
struct row_filter {
    operand lhs;
    operand rhs;
    bool require_equal = false;

    bool operator==(const row_filter&) const = default;
};

// One binary join: the outer's first join_column_count columns are the key
// (the planner permutes relations so this holds); the inner is indexed
// with a matching prefix length. join_column_count 0 pairs every outer row
// with the whole inner array (no shared variables).
struct join_spec {
    std::uint32_t join_column_count = 0;
    const relation_container* outer = nullptr;
    const relation_container* inner = nullptr;
    column_map projection;
    std::vector<row_filter> filters;
};

namespace detail {

inline value_t eval_operand(const operand& op, const value_t* outer_row,
                            const value_t* inner_row) {
    switch (op.from) {
        case operand::kind::outer_col: return outer_row[op.column];
        case operand::kind::inner_col: return inner_row[op.column];
        default: return op.value;
    }
}

inline bool passes_filters(std::span<const row_filter> filters,
                           const value_t* outer_row,
                           const value_t* inner_row) {
    for (const auto& f : filters) {
        value_t a = eval_operand(f.lhs, outer_row, inner_row);
        value_t b = eval_operand(f.rhs, outer_row, inner_row);
        if ((a == b) != f.require_equal) return false;
    }
    return true;
}

inline void validate_operand(const operand& op, std::uint32_t outer_arity,
                             std::uint32_t inner_arity) {
    if (op.from == operand::kind::outer_col && op.column >= outer_arity)
        throw config_error("join: outer column out of range");
    if (op.from == operand::kind::inner_col && op.column >= inner_arity)
        throw config_error("join: inner column out of range");
}

inline void validate_spec(const join_spec& spec) {
    if (!spec.outer || !spec.inner)
        throw usage_error("join: outer and inner are required");
    if (spec.projection.sources.empty())
        throw config_error("join: projection must produce at least one column");
    const std::uint32_t oa = spec.outer->arity();
    const std::uint32_t ia = spec.inner->arity();
    if (spec.join_column_count > 0) {
        if (spec.join_column_count > oa || spec.join_column_count > ia)
            throw config_error("join: join_column_count exceeds arity");
        if (!spec.inner->index)
            throw usage_error("join: inner relation has no index");
        if (spec.inner->index->prefix_len != spec.join_column_count)
            throw usage_error(
                "join: inner index prefix_len does not match join columns");
    }
    for (const auto& s : spec.projection.sources)
        validate_operand(s, oa, ia);
    for (const auto& f : spec.filters) {
        validate_operand(f.lhs, oa, ia);
        validate_operand(f.rhs, oa, ia);
    }
}

inline row_range match_range(const join_spec& spec, const value_t* outer_row) {
    if (spec.join_column_count == 0)
        return {0, spec.inner->row_count()};
    return range_lookup(*spec.inner,
                        {outer_row, spec.join_column_count});
}

}  // namespace detail

inline std::size_t resolve_stride(std::size_t stride_rows, std::size_t rows,
                                  unsigned workers) {
    if (stride_rows > 0) return stride_rows;
    std::size_t w = resolve_workers(workers);
    std::size_t per = (rows + 8 * w - 1) / (8 * w);
    return std::max<std::size_t>(1024, per);
}

// First pass of the two-pass join: total match count, filters included, no
// result storage. Work is partitioned over outer rows in fixed strides.
inline std::size_t join_count(const join_spec& spec, unsigned workers = 1,
                              std::size_t stride_rows = 0) {
    detail::validate_spec(spec);
    const std::size_t n = spec.outer->row_count();
    if (n == 0 || spec.inner->row_count() == 0) return 0;

    const std::size_t stride = resolve_stride(stride_rows, n, workers);
    const std::size_t nstrides = (n + stride - 1) / stride;
    std::vector<std::size_t> per_stride(nstrides, 0);

    const value_t* outer_rows = spec.outer->tuples.data.data();
    const value_t* inner_rows = spec.inner->tuples.data.data();
    const std::uint32_t oa = spec.outer->arity();
    const std::uint32_t ia = spec.inner->arity();

    parallel_blocks(nstrides, workers,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            std::size_t total = 0;
            const std::size_t row_end = std::min(n, (s + 1) * stride);
            for (std::size_t r = s * stride; r < row_end; ++r) {
                const value_t* orow = outer_rows + r * oa;
                row_range range = detail::match_range(spec, orow);
                if (spec.filters.empty()) {
                    total += range.count;
                    continue;
                }
                for (std::size_t m = 0; m < range.count; ++m) {
                    const value_t* irow =
                        inner_rows + (range.start + m) * ia;
                    if (detail::passes_filters(spec.filters, orow, irow))
                        ++total;
                }
            }
            per_stride[s] = total;
        }
    });

    std::size_t total = 0;
    for (std::size_t c : per_stride) total += c;
    return total;
}

// Second pass: emits one projected row per surviving (outer, inner) pair
// into `out`, which must be pre-sized to join_count * output_arity values.
// Per-row output offsets come from a prefix sum over per-row match counts,
// so writes never race and the row placement is independent of stride size
// and worker count. Output order is unspecified; canonicalize afterwards.
inline void join_materialize(const join_spec& spec, tuple_array& out,
                             unsigned workers = 1,
                             std::size_t stride_rows = 0) {
    detail::validate_spec(spec);
    const std::size_t n = spec.outer->row_count();
    const std::uint32_t out_arity = spec.projection.output_arity();
    out.arity = out_arity;
    out.canonical = false;

    const value_t* outer_rows = spec.outer->tuples.data.data();
    const value_t* inner_rows = spec.inner->tuples.data.data();
    const std::uint32_t oa = spec.outer->arity();
    const std::uint32_t ia = spec.inner->arity();

    if (n == 0 || spec.inner->row_count() == 0) {
        if (!out.data.empty())
            throw std::logic_error("join_materialize: output capacity mismatch");
        return;
    }

    const std::size_t stride = resolve_stride(stride_rows, n, workers);
    const std::size_t nstrides = (n + stride - 1) / stride;

    std::vector<std::size_t> row_counts(n, 0);
    parallel_blocks(nstrides, workers,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t row_end = std::min(n, (s + 1) * stride);
            for (std::size_t r = s * stride; r < row_end; ++r) {
                const value_t* orow = outer_rows + r * oa;
                row_range range = detail::match_range(spec, orow);
                if (spec.filters.empty()) {
                    row_counts[r] = range.count;
                    continue;
                }
                std::size_t c = 0;
                for (std::size_t m = 0; m < range.count; ++m) {
                    const value_t* irow =
                        inner_rows + (range.start + m) * ia;
                    if (detail::passes_filters(spec.filters, orow, irow)) ++c;
                }
                row_counts[r] = c;
            }
        }
    });

    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t r = 0; r < n; ++r)
        offsets[r + 1] = offsets[r] + row_counts[r];
    const std::size_t total = offsets[n];

    if (out.data.size() != total * out_arity)
        throw std::logic_error("join_materialize: output capacity mismatch");

    value_t* out_rows = out.data.data();
    parallel_blocks(nstrides, workers,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            const std::size_t row_end = std::min(n, (s + 1) * stride);
            for (std::size_t r = s * stride; r < row_end; ++r) {
                const value_t* orow = outer_rows + r * oa;
                row_range range = detail::match_range(spec, orow);
                value_t* w = out_rows + offsets[r] * out_arity;
                for (std::size_t m = 0; m < range.count; ++m) {
                    const value_t* irow =
                        inner_rows + (range.start + m) * ia;
                    if (!detail::passes_filters(spec.filters, orow, irow))
                        continue;
                    for (const auto& src : spec.projection.sources)
                        *w++ = detail::eval_operand(src, orow, irow);
                }
            }
        }
    });
}

// Row filter plus projection over a single relation; operands must all be
// outer-side or constants. Drives copy rules and other single-atom bodies.
inline tuple_array select_project(const relation_container& src,
                                  const column_map& projection,
                                  std::span<const row_filter> filters = {}) {
    for (const auto& s : projection.sources)
        if (s.from == operand::kind::inner_col)
            throw std::logic_error("select_project: inner operand");
    for (const auto& f : filters)
        if (f.lhs.from == operand::kind::inner_col ||
            f.rhs.from == operand::kind::inner_col)
            throw std::logic_error("select_project: inner operand");

    const std::uint32_t oa = src.arity();
    for (const auto& s : projection.sources)
        detail::validate_operand(s, oa, 0);

    tuple_array out(projection.output_arity());
    const std::size_t n = src.row_count();
    out.data.reserve(n * projection.output_arity());
    const value_t* rows = src.tuples.data.data();
    for (std::size_t r = 0; r < n; ++r) {
        const value_t* row = rows + r * oa;
        if (!detail::passes_filters(filters, row, nullptr)) continue;
        for (const auto& s : projection.sources)
            out.data.push_back(detail::eval_operand(s, row, nullptr));
    }
    return out;
}

// Canonical union of two disjoint canonical arrays, written through the
// caller-provided buffer. Both inputs are coarsely partitioned into
// aligned sorted tiles (split points found by binary search), which merge
// independently; the merged bytes do not depend on the tiling.
inline tuple_array merge_sorted(const tuple_array& full,
                                const tuple_array& delta,
                                std::span<value_t> buffer,
                                unsigned workers = 1) {
    if (!full.canonical || !delta.canonical)
        throw std::logic_error("merge_sorted: inputs must be canonical");
    if (full.arity != delta.arity)
        throw std::logic_error("merge_sorted: arity mismatch");
    const std::uint32_t k = full.arity;
    const std::size_t nf = full.count();
    const std::size_t nd = delta.count();
    if (buffer.size() < (nf + nd) * k)
        throw std::logic_error("merge_sorted: buffer too small");

    const value_t* frows = full.data.data();
    const value_t* drows = delta.data.data();

    // lower_bound of a full row within delta
    auto delta_split = [&](std::size_t full_row) {
        const value_t* key = frows + full_row * k;
        std::size_t lo = 0, hi = nd;
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo) / 2;
            if (detail::compare_rows(drows + mid * k, key, k) < 0)
                lo = mid + 1;
            else
                hi = mid;
        }
        return lo;
    };

    std::size_t nblocks =
        std::max<std::size_t>(1, std::min<std::size_t>(resolve_workers(workers),
                                                       nf ? nf : 1));
    std::size_t chunk = nf ? (nf + nblocks - 1) / nblocks : 0;
    std::vector<std::size_t> fsplit, dsplit;
    fsplit.push_back(0);
    dsplit.push_back(0);
    for (std::size_t b = 1; b < nblocks && chunk; ++b) {
        std::size_t f = std::min(nf, b * chunk);
        fsplit.push_back(f);
        dsplit.push_back(f < nf ? delta_split(f) : nd);
    }
    fsplit.push_back(nf);
    dsplit.push_back(nd);

    const std::size_t segs = fsplit.size() - 1;
    std::atomic<bool> overlap{false};
    parallel_blocks(segs, workers,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            std::size_t fi = fsplit[s], fe = fsplit[s + 1];
            std::size_t di = dsplit[s], de = dsplit[s + 1];
            value_t* w = buffer.data() + (fi + di) * k;
            while (fi < fe && di < de) {
                int cmp = detail::compare_rows(frows + fi * k, drows + di * k,
                                               k);
                if (cmp == 0) {
                    overlap.store(true, std::memory_order_relaxed);
                    return;
                }
                const value_t* src =
                    cmp < 0 ? frows + fi++ * k : drows + di++ * k;
                w = std::copy(src, src + k, w);
            }
            while (fi < fe) {
                w = std::copy(frows + fi * k, frows + fi * k + k, w);
                ++fi;
            }
            while (di < de) {
                w = std::copy(drows + di * k, drows + di * k + k, w);
                ++di;
            }
        }
    });
    if (overlap.load())
        throw std::logic_error("merge_sorted: inputs are not disjoint");

    tuple_array out(k);
    out.canonical = true;
    out.data.assign(buffer.begin(), buffer.begin() + (nf + nd) * k);
    return out;
}

// Rows of new_rel absent from full, in canonical order. Per-row binary
// search over the sorted full array; compaction preserves input order so
// the result is independent of worker count.
inline tuple_array difference(const tuple_array& new_rel,
                              const tuple_array& full, unsigned workers = 1) {
    if (!new_rel.canonical || !full.canonical)
        throw std::logic_error("difference: inputs must be canonical");
    if (new_rel.arity != full.arity)
        throw std::logic_error("difference: arity mismatch");
    const std::uint32_t k = new_rel.arity;
    const std::size_t n = new_rel.count();
    const std::size_t nf = full.count();
    const value_t* nrows = new_rel.data.data();
    const value_t* frows = full.data.data();

    std::vector<std::uint8_t> keep(n, 0);
    parallel_blocks(n, workers,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const value_t* key = nrows + i * k;
            std::size_t a = 0, b = nf;
            while (a < b) {
                std::size_t mid = a + (b - a) / 2;
                if (detail::compare_rows(frows + mid * k, key, k) < 0)
                    a = mid + 1;
                else
                    b = mid;
            }
            keep[i] = a == nf ||
                      detail::compare_rows(frows + a * k, key, k) != 0;
        }
    });

    tuple_array out(k);
    out.canonical = true;
    for (std::size_t i = 0; i < n; ++i)
        if (keep[i])
            out.data.insert(out.data.end(), nrows + i * k, nrows + i * k + k);
    return out;
}

// Reorders each row so output column j holds input column perm[j], then
// re-canonicalizes (row order changes under permutation).
inline tuple_array permute_columns(const tuple_array& rel,
                                   std::span<const std::uint32_t> perm,
                                   unsigned workers = 1) {
    if (!rel.canonical)
        throw std::logic_error("permute_columns: input must be canonical");
    const std::uint32_t k = rel.arity;
    if (perm.size() != k)
        throw config_error("permute_columns: permutation size mismatch");
    std::vector<bool> seen(k, false);
    for (std::uint32_t p : perm) {
        if (p >= k || seen[p])
            throw config_error("permute_columns: not a bijection");
        seen[p] = true;
    }
    if (is_identity_permutation(perm)) return rel;

    const std::size_t n = rel.count();
    tuple_array raw(k);
    raw.data.resize(n * k);
    const value_t* src = rel.data.data();
    value_t* dst = raw.data.data();
    parallel_blocks(n, workers,
                    [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i)
            for (std::uint32_t c = 0; c < k; ++c)
                dst[i * k + c] = src[i * k + perm[c]];
    });
    return canonicalize(raw, workers);
}

}  // namespace arraylog
