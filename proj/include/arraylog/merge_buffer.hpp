#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "budget.hpp"
#include "types.hpp"

namespace arraylog {

// Scratch buffer for one relation's full/delta merges. Under eager
// management it is over-allocated and retained across iterations so the
// long tail of small deltas reuses it instead of reallocating.
struct merge_buffer {
    std::string owner_relation;
    std::uint32_t arity = 0;
    std::size_t capacity_rows = 0;
    bool in_use = false;
    std::vector<value_t> storage;

    std::span<value_t> values() {
        return {storage.data(), capacity_rows * arity};
    }
};

// Hands out merge buffers, one retained per recursive relation. Eager
// mode: reuse the retained buffer whenever its capacity already covers
// full + delta; otherwise allocate full + K * delta rows for the largest
// K in [1, alpha] that fits the budget, and fail with a budget error when
// even K = 1 does not fit. With eager management off, exactly full + delta
// rows are allocated and freed again after the merge.
class buffer_manager {
public:
    buffer_manager(memory_accountant& acct, bool eager, unsigned alpha)
        : acct_(&acct), eager_(eager), alpha_(alpha) {
        if (alpha_ == 0)
            throw config_error("buffer_manager: alpha must be at least 1");
    }

    merge_buffer& acquire(const std::string& relation, std::size_t full_rows,
                          std::size_t delta_rows, std::uint32_t arity) {
        auto& buf = buffers_[relation];
        if (buf.in_use)
            throw std::logic_error("buffer_manager: buffer already in use");
        buf.owner_relation = relation;

        const std::size_t need = full_rows + delta_rows;
        if (eager_ && buf.arity == arity && buf.capacity_rows >= need) {
            buf.in_use = true;
            return buf;
        }

        const std::size_t old_bytes = charges_[relation].bytes();
        std::size_t rows = 0;
        if (eager_) {
            for (unsigned k = alpha_; k >= 1; --k) {
                std::size_t candidate = full_rows + delta_rows * k;
                std::size_t bytes = candidate * arity * sizeof(value_t);
                if (acct_->can_charge(bytes > old_bytes ? bytes - old_bytes
                                                        : 0)) {
                    rows = candidate;
                    break;
                }
            }
            if (rows == 0)
                throw budget_error(
                    "merge", "not enough memory for the merge buffer of '" +
                                 relation + "' (full " +
                                 std::to_string(full_rows) + " rows, delta " +
                                 std::to_string(delta_rows) + " rows)");
        } else {
            rows = need;
        }

        charges_[relation].reset();
        charges_[relation] =
            tracked_bytes(*acct_, memory_accountant::category::buffer,
                          rows * arity * sizeof(value_t), "merge");
        buf.arity = arity;
        buf.capacity_rows = rows;
        buf.storage.assign(rows * arity, 0);
        buf.in_use = true;
        ++allocations_;
        return buf;
    }

    void release(const std::string& relation) {
        auto it = buffers_.find(relation);
        if (it == buffers_.end() || !it->second.in_use)
            throw std::logic_error("buffer_manager: release without acquire");
        it->second.in_use = false;
        if (!eager_) {
            charges_[relation].reset();
            it->second.storage.clear();
            it->second.storage.shrink_to_fit();
            it->second.capacity_rows = 0;
        }
    }

    std::size_t allocation_count() const { return allocations_; }

    std::size_t retained_rows(const std::string& relation) const {
        auto it = buffers_.find(relation);
        return it == buffers_.end() ? 0 : it->second.capacity_rows;
    }

private:
    memory_accountant* acct_;
    bool eager_;
    unsigned alpha_;
    std::size_t allocations_ = 0;
    std::map<std::string, merge_buffer> buffers_;
    std::map<std::string, tracked_bytes> charges_;
};

}  // namespace arraylog
