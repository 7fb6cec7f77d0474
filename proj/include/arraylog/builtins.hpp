#pragma once

#include <string>
#include <string_view>

#include "parser.hpp"
#include "program.hpp"
#include "types.hpp"

namespace arraylog {

// Transitive closure over an edge list.
inline constexpr std::string_view kReachSource = R"(
.decl Edge(2)
Reach(from, to) :- Edge(from, to).
Reach(from, to) :- Edge(from, mid), Reach(mid, to).
)";

// Same generation: nodes sharing a parent, extended one level at a time.
inline constexpr std::string_view kSgSource = R"(
.decl Edge(2)
SG(x, y) :- Edge(p, x), Edge(p, y), x != y.
SG(x, y) :- Edge(a, x), SG(a, b), Edge(b, y).
)";

// Context-sensitive program analysis: value-flow and alias propagation
// seeded from assignment and dereference facts.
inline constexpr std::string_view kCspaSource = R"(
.decl assign(2)
.decl dereference(2)
ValueFlow(y, x) :- assign(y, x).
ValueFlow(x, x) :- assign(x, y).
ValueFlow(x, x) :- assign(y, x).
MemoryAlias(x, x) :- assign(y, x).
MemoryAlias(x, x) :- assign(x, y).
ValueFlow(x, y) :- ValueFlow(x, z), ValueFlow(z, y).
ValueAlias(x, y) :- ValueFlow(z, x), ValueFlow(z, y).
ValueFlow(x, y) :- assign(x, z), MemoryAlias(z, y).
MemoryAlias(x, w) :- dereference(y, x), ValueAlias(y, z), dereference(z, w).
ValueAlias(x, y) :- ValueFlow(z, x), MemoryAlias(z, w), ValueFlow(w, y).
)";

inline std::string_view builtin_source(std::string_view name) {
    if (name == "reach") return kReachSource;
    if (name == "sg") return kSgSource;
    if (name == "cspa") return kCspaSource;
    throw usage_error("unknown builtin program '" + std::string(name) +
                      "' (expected reach, sg, or cspa)");
}

inline bool is_builtin_program(std::string_view name) {
    return name == "reach" || name == "sg" || name == "cspa";
}

inline program builtin_program(std::string_view name) {
    auto result = parse_program(builtin_source(name));
    if (!result.ok())
        throw std::logic_error("builtin program failed to parse");
    return std::move(result.prog);
}

}  // namespace arraylog
