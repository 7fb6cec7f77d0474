#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "types.hpp"

namespace arraylog {

// Tracks the logical bytes of containers, temporaries, and merge buffers
// against an engine-wide budget. Single-threaded by design: the fixpoint
// driver is the only caller; kernels never allocate tracked storage
// themselves.
class memory_accountant {
public:
    enum class category : std::size_t { container = 0, temp = 1, buffer = 2 };
    static constexpr std::size_t unlimited = static_cast<std::size_t>(-1);

    explicit memory_accountant(std::size_t budget_bytes = unlimited)
        : budget_(budget_bytes) {}

    bool can_charge(std::size_t bytes) const {
        if (budget_ == unlimited) return true;
        return current_total() + bytes <= budget_;
    }

    void charge(category cat, std::size_t bytes, std::string_view phase) {
        if (bytes == 0) return;
        if (!can_charge(bytes))
            throw budget_error(
                std::string(phase),
                "need " + std::to_string(bytes) + " more bytes with " +
                    std::to_string(current_total()) + " in use of " +
                    std::to_string(budget_) + " budgeted");
        current_[static_cast<std::size_t>(cat)] += bytes;
        ++events_;
        peak_ = std::max(peak_, current_total());
        if (cat == category::temp)
            peak_temp_ = std::max(
                peak_temp_, current_[static_cast<std::size_t>(cat)]);
    }

    void release(category cat, std::size_t bytes) noexcept {
        auto& c = current_[static_cast<std::size_t>(cat)];
        c = bytes > c ? 0 : c - bytes;
    }

    std::size_t current(category cat) const {
        return current_[static_cast<std::size_t>(cat)];
    }
    std::size_t current_total() const {
        return current_[0] + current_[1] + current_[2];
    }
    std::size_t peak_bytes() const { return peak_; }
    std::size_t peak_temp_bytes() const { return peak_temp_; }
    std::size_t charge_events() const { return events_; }
    std::size_t budget() const { return budget_; }

private:
    std::size_t budget_;
    std::array<std::size_t, 3> current_{};
    std::size_t peak_ = 0;
    std::size_t peak_temp_ = 0;
    std::size_t events_ = 0;
};

// RAII owner of one accounted charge; releasing on destruction keeps
// charge/release pairs balanced across early exits.
class tracked_bytes {
public:
    tracked_bytes() = default;
    tracked_bytes(memory_accountant& acct, memory_accountant::category cat,
                  std::size_t bytes, std::string_view phase)
        : acct_(&acct), cat_(cat) {
        acct.charge(cat, bytes, phase);
        bytes_ = bytes;
    }
    tracked_bytes(tracked_bytes&& o) noexcept
        : acct_(o.acct_), cat_(o.cat_), bytes_(o.bytes_) {
        o.acct_ = nullptr;
        o.bytes_ = 0;
    }
    tracked_bytes& operator=(tracked_bytes&& o) noexcept {
        if (this != &o) {
            reset();
            acct_ = o.acct_;
            cat_ = o.cat_;
            bytes_ = o.bytes_;
            o.acct_ = nullptr;
            o.bytes_ = 0;
        }
        return *this;
    }
    tracked_bytes(const tracked_bytes&) = delete;
    tracked_bytes& operator=(const tracked_bytes&) = delete;
    ~tracked_bytes() { reset(); }

    void reset() noexcept {
        if (acct_ && bytes_) acct_->release(cat_, bytes_);
        acct_ = nullptr;
        bytes_ = 0;
    }

    std::size_t bytes() const { return bytes_; }

private:
    memory_accountant* acct_ = nullptr;
    memory_accountant::category cat_ = memory_accountant::category::container;
    std::size_t bytes_ = 0;
};

}  // namespace arraylog
