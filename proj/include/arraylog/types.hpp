#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace arraylog {

// Column values are dictionary-encoded symbols or raw numeric ids.
using value_t = std::uint64_t;

// Reserved sentinel: marks empty index slots and padding. Never appears in
// user data (ingestion rejects it).
inline constexpr value_t kEmptySlot = std::numeric_limits<value_t>::max();

// Bad configuration values (load factors, permutations, alpha, ...).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// API misuse: lookups on missing indexes, unknown relation names, bad flags.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fact-file and I/O problems, reported with path/line context.
struct load_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Rule cannot be compiled into a join chain.
struct plan_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tracked allocations would exceed the engine-wide memory budget. Carries
// the evaluation phase that requested the allocation.
class budget_error : public std::runtime_error {
public:
    budget_error(std::string phase, const std::string& detail)
        : std::runtime_error("memory budget exceeded in " + phase +
                             " phase: " + detail),
          phase_(std::move(phase)) {}

    const std::string& phase() const noexcept { return phase_; }

private:
    std::string phase_;
};

}  // namespace arraylog
