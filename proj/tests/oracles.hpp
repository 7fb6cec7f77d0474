// Test-only reference implementations: a naive Datalog evaluator, a
// brute-force transitive closure, and a nested-loop join. These stay
// deliberately independent of the engine's storage and join machinery so
// they can serve as oracles for it.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "arraylog/program.hpp"
#include "arraylog/ra.hpp"
#include "arraylog/tuple_array.hpp"

namespace oracles {

using row = std::vector<arraylog::value_t>;
using row_set = std::set<row>;

inline row_set to_set(const arraylog::tuple_array& t) {
    row_set out;
    for (std::size_t i = 0; i < t.count(); ++i) {
        auto r = t.row(i);
        out.insert(row(r.begin(), r.end()));
    }
    return out;
}

inline std::multiset<row> to_multiset(const arraylog::tuple_array& t) {
    std::multiset<row> out;
    for (std::size_t i = 0; i < t.count(); ++i) {
        auto r = t.row(i);
        out.insert(row(r.begin(), r.end()));
    }
    return out;
}

inline arraylog::tuple_array from_rows(std::uint32_t arity,
                                       const std::vector<row>& rows) {
    arraylog::tuple_array t(arity);
    for (const auto& r : rows)
        t.data.insert(t.data.end(), r.begin(), r.end());
    return t;
}

inline arraylog::tuple_array from_set(std::uint32_t arity,
                                      const row_set& rows) {
    arraylog::tuple_array t(arity);
    for (const auto& r : rows)
        t.data.insert(t.data.end(), r.begin(), r.end());
    t.canonical = true;  // std::set iterates in lexicographic order
    return t;
}

// ---------------------------------------------------------------------
// Naive Datalog evaluation: apply every rule to saturation with plain
// substitution matching, no deltas, no indexes.

using database = std::map<std::string, row_set>;

inline bool match_atom(const arraylog::atom& a, const row& tuple,
                       std::map<std::string, arraylog::value_t>& binding) {
    std::vector<std::pair<std::string, arraylog::value_t>> added;
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        const auto& t = a.terms[i];
        if (t.is_constant) {
            if (tuple[i] != t.value) {
                for (auto& [k, v] : added) binding.erase(k);
                return false;
            }
            continue;
        }
        auto it = binding.find(t.var);
        if (it == binding.end()) {
            binding.emplace(t.var, tuple[i]);
            added.emplace_back(t.var, tuple[i]);
        } else if (it->second != tuple[i]) {
            for (auto& [k, v] : added) binding.erase(k);
            return false;
        }
    }
    return true;
}

inline void enumerate_rule(const arraylog::rule& r, const database& db,
                           std::size_t atom_idx,
                           std::map<std::string, arraylog::value_t>& binding,
                           row_set& out) {
    if (atom_idx == r.body.size()) {
        for (const auto& c : r.constraints)
            if (binding.at(c.lhs) == binding.at(c.rhs)) return;
        row head;
        for (const auto& t : r.head.terms)
            head.push_back(t.is_constant ? t.value : binding.at(t.var));
        out.insert(std::move(head));
        return;
    }
    auto it = db.find(r.body[atom_idx].relation);
    if (it == db.end()) return;
    for (const row& tuple : it->second) {
        auto saved = binding;
        if (match_atom(r.body[atom_idx], tuple, binding))
            enumerate_rule(r, db, atom_idx + 1, binding, out);
        binding = std::move(saved);
    }
}

inline database naive_eval(const arraylog::program& p, database db) {
    for (const auto& r : p.rules) db[r.head.relation];
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : p.rules) {
            row_set derived;
            std::map<std::string, arraylog::value_t> binding;
            enumerate_rule(r, db, 0, binding, derived);
            auto& head = db[r.head.relation];
            for (const auto& t : derived)
                if (head.insert(t).second) changed = true;
        }
    }
    return db;
}

// ---------------------------------------------------------------------
// Brute-force transitive closure by repeated BFS.

inline row_set transitive_closure(const row_set& edges) {
    std::map<arraylog::value_t, std::set<arraylog::value_t>> adj;
    std::set<arraylog::value_t> nodes;
    for (const auto& e : edges) {
        adj[e[0]].insert(e[1]);
        nodes.insert(e[0]);
        nodes.insert(e[1]);
    }
    row_set out;
    for (auto src : nodes) {
        std::set<arraylog::value_t> seen;
        std::vector<arraylog::value_t> stack(adj[src].begin(),
                                             adj[src].end());
        while (!stack.empty()) {
            auto v = stack.back();
            stack.pop_back();
            if (!seen.insert(v).second) continue;
            out.insert({src, v});
            for (auto w : adj[v]) stack.push_back(w);
        }
    }
    return out;
}

// ---------------------------------------------------------------------
// Nested-loop join over the same spec the kernels take.

inline std::multiset<row> nested_loop_join(const arraylog::join_spec& spec) {
    std::multiset<row> out;
    const auto& outer = spec.outer->tuples;
    const auto& inner = spec.inner->tuples;
    for (std::size_t i = 0; i < outer.count(); ++i) {
        auto orow = outer.row(i);
        for (std::size_t j = 0; j < inner.count(); ++j) {
            auto irow = inner.row(j);
            bool key_match = true;
            for (std::uint32_t c = 0; c < spec.join_column_count; ++c)
                if (orow[c] != irow[c]) key_match = false;
            if (!key_match) continue;

            auto value_of = [&](const arraylog::operand& op) {
                switch (op.from) {
                    case arraylog::operand::kind::outer_col:
                        return orow[op.column];
                    case arraylog::operand::kind::inner_col:
                        return irow[op.column];
                    default:
                        return op.value;
                }
            };
            bool pass = true;
            for (const auto& f : spec.filters)
                if ((value_of(f.lhs) == value_of(f.rhs)) != f.require_equal)
                    pass = false;
            if (!pass) continue;

            row r;
            for (const auto& s : spec.projection.sources)
                r.push_back(value_of(s));
            out.insert(std::move(r));
        }
    }
    return out;
}

// ---------------------------------------------------------------------
// Random instance generators (seeded; deterministic across runs).

inline arraylog::tuple_array random_relation(std::mt19937_64& rng,
                                             std::uint32_t arity,
                                             std::size_t rows,
                                             arraylog::value_t domain) {
    std::uniform_int_distribution<arraylog::value_t> pick(0, domain - 1);
    arraylog::tuple_array t(arity);
    for (std::size_t i = 0; i < rows * arity; ++i)
        t.data.push_back(pick(rng));
    return t;
}

inline row_set random_graph(std::mt19937_64& rng, std::size_t max_nodes,
                            std::size_t max_edges) {
    std::uniform_int_distribution<std::size_t> nodes_d(2, max_nodes);
    std::size_t nodes = nodes_d(rng);
    std::uniform_int_distribution<std::size_t> edges_d(1, max_edges);
    std::size_t edges = edges_d(rng);
    std::uniform_int_distribution<arraylog::value_t> pick(1, nodes);
    row_set out;
    for (std::size_t i = 0; i < edges; ++i)
        out.insert({pick(rng), pick(rng)});
    return out;
}

// Edges only from smaller to larger node ids: acyclic by construction.
inline row_set random_dag(std::mt19937_64& rng, std::size_t max_nodes,
                          std::size_t max_edges) {
    std::uniform_int_distribution<std::size_t> nodes_d(3, max_nodes);
    std::size_t nodes = nodes_d(rng);
    std::uniform_int_distribution<std::size_t> edges_d(2, max_edges);
    std::size_t edges = edges_d(rng);
    std::uniform_int_distribution<arraylog::value_t> pick(1, nodes);
    row_set out;
    for (std::size_t i = 0; i < edges; ++i) {
        auto a = pick(rng), b = pick(rng);
        if (a == b) continue;
        out.insert({std::min(a, b), std::max(a, b)});
    }
    return out;
}

}  // namespace oracles
