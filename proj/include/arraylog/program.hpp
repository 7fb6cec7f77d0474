#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "types.hpp"

namespace arraylog {

// A term is a variable name or an unsigned integer constant.
struct term {
    bool is_constant = false;
    std::string var;
    value_t value = 0;

    static term variable(std::string name) {
        term t;
        t.var = std::move(name);
        return t;
    }
    static term constant(value_t v) {
        term t;
        t.is_constant = true;
        t.value = v;
        return t;
    }
    bool operator==(const term&) const = default;
};

struct atom {
    std::string relation;
    std::vector<term> terms;
    bool operator==(const atom&) const = default;
};

// x != y between two body variables.
struct inequality {
    std::string lhs;
    std::string rhs;
    bool operator==(const inequality&) const = default;
};

struct rule {
    atom head;
    std::vector<atom> body;
    std::vector<inequality> constraints;
    bool operator==(const rule&) const = default;
};

struct edb_decl {
    std::string name;
    std::uint32_t arity = 0;
    bool operator==(const edb_decl&) const = default;
};

struct program {
    std::vector<edb_decl> edbs;
    std::vector<rule> rules;

    bool operator==(const program&) const = default;

    bool is_edb(const std::string& name) const {
        for (const auto& e : edbs)
            if (e.name == name) return true;
        return false;
    }

    // IDB relations in first-appearance (head) order.
    std::vector<std::string> idb_relations() const {
        std::vector<std::string> out;
        for (const auto& r : rules)
            if (std::find(out.begin(), out.end(), r.head.relation) ==
                out.end())
                out.push_back(r.head.relation);
        return out;
    }

    std::optional<std::uint32_t> arity_of(const std::string& name) const {
        for (const auto& e : edbs)
            if (e.name == name) return e.arity;
        for (const auto& r : rules)
            if (r.head.relation == name)
                return static_cast<std::uint32_t>(r.head.terms.size());
        return std::nullopt;
    }
};

inline std::string to_string(const term& t) {
    return t.is_constant ? std::to_string(t.value) : t.var;
}

inline std::string to_string(const atom& a) {
    std::string s = a.relation + "(";
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (i) s += ", ";
        s += to_string(a.terms[i]);
    }
    return s + ")";
}

inline std::string pretty_print(const program& p) {
    std::ostringstream out;
    for (const auto& e : p.edbs)
        out << ".decl " << e.name << "(" << e.arity << ")\n";
    for (const auto& r : p.rules) {
        out << to_string(r.head) << " :- ";
        bool first = true;
        for (const auto& a : r.body) {
            if (!first) out << ", ";
            out << to_string(a);
            first = false;
        }
        for (const auto& c : r.constraints)
            out << ", " << c.lhs << " != " << c.rhs;
        out << ".\n";
    }
    return out.str();
}

namespace detail {

// Relations that sit on a dependency cycle (head depends on each body
// relation). Reaching yourself through at least one edge counts; the
// relation universe here is small enough for plain DFS per node.
inline std::set<std::string> cyclic_relations(const program& p) {
    std::map<std::string, std::set<std::string>> deps;
    for (const auto& r : p.rules)
        for (const auto& a : r.body)
            deps[r.head.relation].insert(a.relation);

    std::set<std::string> cyclic;
    for (const auto& [start, _] : deps) {
        std::vector<std::string> stack(deps[start].begin(),
                                       deps[start].end());
        std::set<std::string> seen;
        while (!stack.empty()) {
            std::string cur = stack.back();
            stack.pop_back();
            if (cur == start) {
                cyclic.insert(start);
                break;
            }
            if (!seen.insert(cur).second) continue;
            auto it = deps.find(cur);
            if (it != deps.end())
                stack.insert(stack.end(), it->second.begin(),
                             it->second.end());
        }
    }
    return cyclic;
}

// Relations whose contents can still grow inside the fixpoint loop: every
// relation on a dependency cycle, plus heads of rules reading such a
// relation, closed transitively. Rules touching none of these evaluate
// once up front.
inline std::set<std::string> loop_fed_relations(const program& p) {
    auto fed = detail::cyclic_relations(p);
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& r : p.rules) {
            if (fed.count(r.head.relation)) continue;
            for (const auto& a : r.body) {
                if (!p.is_edb(a.relation) && fed.count(a.relation)) {
                    fed.insert(r.head.relation);
                    changed = true;
                    break;
                }
            }
        }
    }
    return fed;
}

}  // namespace detail

// Body atom positions whose relation is an IDB still growing during the
// fixpoint; a rule with at least one such atom runs inside the loop and
// gets one delta-placement variant per such atom.
inline std::vector<std::size_t> recursive_atoms(const program& p,
                                                const rule& r) {
    auto fed = detail::loop_fed_relations(p);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < r.body.size(); ++i) {
        const std::string& rel = r.body[i].relation;
        if (!p.is_edb(rel) && fed.count(rel)) out.push_back(i);
    }
    return out;
}

struct rule_classes {
    std::vector<std::size_t> nonrecursive;
    std::vector<std::size_t> recursive;
};

inline rule_classes classify_rules(const program& p) {
    auto fed = detail::loop_fed_relations(p);
    rule_classes out;
    for (std::size_t i = 0; i < p.rules.size(); ++i) {
        bool rec = false;
        for (const auto& a : p.rules[i].body)
            if (!p.is_edb(a.relation) && fed.count(a.relation)) {
                rec = true;
                break;
            }
        (rec ? out.recursive : out.nonrecursive).push_back(i);
    }
    return out;
}

}  // namespace arraylog
