#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "container.hpp"
#include "program.hpp"
#include "ra.hpp"
#include "types.hpp"

namespace arraylog {

enum class version_tag : std::uint8_t { full, delta };

// Where the first outer of a variant's chain comes from: a stored relation
// version under a column permutation that puts the first join columns up
// front. Later steps chain from the previous step's temp instead.
struct source_ref {
    std::string relation;
    version_tag version = version_tag::full;
    std::vector<std::uint32_t> permutation;

    bool operator==(const source_ref&) const = default;
};

struct join_step {
    std::string inner_relation;
    std::vector<std::uint32_t> inner_permutation;
    std::uint32_t join_column_count = 0;
    column_map projection;
    std::vector<row_filter> filters;

    bool operator==(const join_step&) const = default;
};

// One delta placement of a rule. Single-atom bodies have no steps and use
// the select projection/filters directly over the source.
struct rule_variant {
    source_ref source;
    std::vector<join_step> steps;
    column_map select_projection;
    std::vector<row_filter> select_filters;

    bool operator==(const rule_variant&) const = default;
};

struct rule_plan {
    std::size_t rule_index = 0;
    std::string head_relation;
    std::uint32_t head_arity = 0;
    bool recursive = false;
    std::vector<rule_variant> variants;
};

// Inner-join targets that need a registered indexed copy; prefix_len 0
// marks an unindexed copy used by joins without shared variables.
struct index_requirement {
    std::string relation;
    std::vector<std::uint32_t> permutation;
    std::uint32_t prefix_len = 0;

    bool operator<(const index_requirement& o) const {
        return std::tie(relation, permutation, prefix_len) <
               std::tie(o.relation, o.permutation, o.prefix_len);
    }
};

namespace detail {

struct atom_columns {
    std::vector<term> terms;                        // post-permutation
    std::map<std::string, std::uint32_t> first_col; // var -> first position
    std::vector<std::uint32_t> permutation;
};

// Columns of `a` reordered so the variables in `front` (in order) come
// first; remaining columns keep their relative order. Also reports each
// variable's first post-permutation position.
inline atom_columns permute_atom(const atom& a,
                                 const std::vector<std::string>& front) {
    const auto n = static_cast<std::uint32_t>(a.terms.size());
    std::vector<std::uint32_t> perm;
    std::vector<bool> used(n, false);
    for (const auto& v : front) {
        for (std::uint32_t c = 0; c < n; ++c) {
            if (!used[c] && !a.terms[c].is_constant && a.terms[c].var == v) {
                perm.push_back(c);
                used[c] = true;
                break;
            }
        }
    }
    for (std::uint32_t c = 0; c < n; ++c)
        if (!used[c]) perm.push_back(c);

    atom_columns out;
    out.permutation = perm;
    for (std::uint32_t i = 0; i < n; ++i) {
        out.terms.push_back(a.terms[perm[i]]);
        if (!out.terms.back().is_constant)
            out.first_col.emplace(out.terms.back().var, i);
    }
    return out;
}

// Constant and repeated-variable columns become equality filters on one
// side; emitted at the step where the atom enters the chain.
inline void atom_self_filters(const atom_columns& cols, bool inner_side,
                              std::vector<row_filter>& out) {
    std::map<std::string, std::uint32_t> seen;
    auto col = [&](std::uint32_t c) {
        return inner_side ? operand::inner(c) : operand::outer(c);
    };
    for (std::uint32_t i = 0; i < cols.terms.size(); ++i) {
        const term& t = cols.terms[i];
        if (t.is_constant) {
            out.push_back({col(i), operand::constant(t.value), true});
            continue;
        }
        auto [it, inserted] = seen.emplace(t.var, i);
        if (!inserted) out.push_back({col(i), col(it->second), true});
    }
}

inline std::set<std::string> atom_vars(const atom& a) {
    std::set<std::string> vars;
    for (const auto& t : a.terms)
        if (!t.is_constant) vars.insert(t.var);
    return vars;
}

// Join order within one variant: start from the delta atom, then take the
// first remaining body atom sharing a variable with the bound set, falling
// back to plain body order when nothing connects.
inline std::vector<std::size_t> chain_order(const rule& r,
                                            std::size_t start) {
    std::vector<std::size_t> order{start};
    std::set<std::string> bound = atom_vars(r.body[start]);
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < r.body.size(); ++i)
        if (i != start) remaining.push_back(i);

    while (!remaining.empty()) {
        std::size_t pick = remaining.size();
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            auto vars = atom_vars(r.body[remaining[i]]);
            bool connected =
                std::any_of(vars.begin(), vars.end(), [&](const auto& v) {
                    return bound.count(v) > 0;
                });
            if (connected) {
                pick = i;
                break;
            }
        }
        if (pick == remaining.size()) pick = 0;
        std::size_t next = remaining[pick];
        remaining.erase(remaining.begin() + pick);
        order.push_back(next);
        auto vars = atom_vars(r.body[next]);
        bound.insert(vars.begin(), vars.end());
    }
    return order;
}

inline rule_variant plan_variant(const rule& r,
                                 std::size_t start_atom,
                                 version_tag start_version) {
    rule_variant variant;
    variant.source.relation = r.body[start_atom].relation;
    variant.source.version = start_version;

    const auto order = chain_order(r, start_atom);

    // Single-atom body: select + project straight off the source.
    if (order.size() == 1) {
        atom_columns src = permute_atom(r.body[start_atom], {});
        variant.source.permutation = src.permutation;
        atom_self_filters(src, false, variant.select_filters);
        for (const auto& c : r.constraints) {
            auto l = src.first_col.find(c.lhs);
            auto rr = src.first_col.find(c.rhs);
            if (l == src.first_col.end() || rr == src.first_col.end())
                throw plan_error("constraint variable not bound in body");
            variant.select_filters.push_back({operand::outer(l->second),
                                              operand::outer(rr->second),
                                              false});
        }
        for (const auto& t : r.head.terms) {
            if (t.is_constant) {
                variant.select_projection.sources.push_back(
                    operand::constant(t.value));
                continue;
            }
            auto it = src.first_col.find(t.var);
            if (it == src.first_col.end())
                throw plan_error("unbound head variable '" + t.var + "'");
            variant.select_projection.sources.push_back(
                operand::outer(it->second));
        }
        return variant;
    }

    // The outer layout entering each step: variable at each position.
    // Constant columns of the source atom occupy positions too and are
    // filtered out at the first step.
    std::set<std::string> head_vars;
    for (const auto& t : r.head.terms)
        if (!t.is_constant) head_vars.insert(t.var);

    std::vector<bool> constraint_done(r.constraints.size(), false);

    // First join's key: variables shared between the source atom and the
    // second atom, ordered by the second atom's columns.
    auto shared_with = [&](const std::set<std::string>& bound,
                           const atom& a) {
        std::vector<std::string> join_vars;
        for (const auto& t : a.terms)
            if (!t.is_constant && bound.count(t.var) &&
                std::find(join_vars.begin(), join_vars.end(), t.var) ==
                    join_vars.end())
                join_vars.push_back(t.var);
        return join_vars;
    };

    std::set<std::string> bound = atom_vars(r.body[start_atom]);
    std::vector<std::string> first_join =
        shared_with(bound, r.body[order[1]]);

    atom_columns src = permute_atom(r.body[start_atom], first_join);
    variant.source.permutation = src.permutation;

    std::vector<row_filter> pending_source_filters;
    atom_self_filters(src, false, pending_source_filters);

    // layout: position -> variable (first occurrence wins; extra columns
    // for repeated variables and constants ride along until projected out).
    std::map<std::string, std::uint32_t> outer_pos = src.first_col;

    for (std::size_t s = 1; s < order.size(); ++s) {
        const atom& inner_atom = r.body[order[s]];
        join_step step;
        step.inner_relation = inner_atom.relation;

        std::vector<std::string> join_vars = shared_with(bound, inner_atom);
        atom_columns inner = permute_atom(inner_atom, join_vars);
        step.inner_permutation = inner.permutation;
        step.join_column_count =
            static_cast<std::uint32_t>(join_vars.size());

        // The outer must present the join variables first, in the same
        // order; step 1 gets that from the source permutation, later steps
        // from the previous projection.
        for (std::uint32_t j = 0; j < join_vars.size(); ++j) {
            auto it = outer_pos.find(join_vars[j]);
            if (it == outer_pos.end() || it->second != j)
                throw std::logic_error(
                    "plan_variant: outer join columns misaligned");
        }

        if (s == 1) {
            step.filters = std::move(pending_source_filters);
            pending_source_filters.clear();
        }
        atom_self_filters(inner, true, step.filters);

        std::set<std::string> bound_after = bound;
        for (const auto& [v, _] : inner.first_col) bound_after.insert(v);

        auto resolve = [&](const std::string& v) -> std::optional<operand> {
            auto o = outer_pos.find(v);
            if (o != outer_pos.end()) return operand::outer(o->second);
            auto i = inner.first_col.find(v);
            if (i != inner.first_col.end()) return operand::inner(i->second);
            return std::nullopt;
        };

        for (std::size_t c = 0; c < r.constraints.size(); ++c) {
            if (constraint_done[c]) continue;
            auto l = resolve(r.constraints[c].lhs);
            auto rr = resolve(r.constraints[c].rhs);
            if (l && rr) {
                step.filters.push_back({*l, *rr, false});
                constraint_done[c] = true;
            }
        }

        const bool last = s + 1 == order.size();
        if (last) {
            for (const auto& t : r.head.terms) {
                if (t.is_constant) {
                    step.projection.sources.push_back(
                        operand::constant(t.value));
                    continue;
                }
                auto op = resolve(t.var);
                if (!op)
                    throw plan_error("unbound head variable '" + t.var + "'");
                step.projection.sources.push_back(*op);
            }
            variant.steps.push_back(std::move(step));
            break;
        }

        // Keep only variables still needed: by the head, by an unapplied
        // constraint, or by a not-yet-joined atom. The next step's join
        // variables go first so the temp needs no extra permutation.
        std::set<std::string> needed = head_vars;
        for (std::size_t c = 0; c < r.constraints.size(); ++c)
            if (!constraint_done[c]) {
                needed.insert(r.constraints[c].lhs);
                needed.insert(r.constraints[c].rhs);
            }
        for (std::size_t t = s + 1; t < order.size(); ++t) {
            auto vars = atom_vars(r.body[order[t]]);
            needed.insert(vars.begin(), vars.end());
        }

        std::vector<std::string> next_join =
            shared_with(bound_after, r.body[order[s + 1]]);

        std::vector<std::string> layout = next_join;
        auto add_kept = [&](const std::string& v) {
            if (!needed.count(v)) return;
            if (std::find(layout.begin(), layout.end(), v) != layout.end())
                return;
            layout.push_back(v);
        };
        {
            // stable order: existing outer layout order, then inner columns
            std::vector<std::pair<std::uint32_t, std::string>> outer_sorted(
                outer_pos.size());
            std::size_t i = 0;
            for (const auto& [v, pos] : outer_pos)
                outer_sorted[i++] = {pos, v};
            std::sort(outer_sorted.begin(), outer_sorted.end());
            for (const auto& [pos, v] : outer_sorted) add_kept(v);
            std::vector<std::pair<std::uint32_t, std::string>> inner_sorted(
                inner.first_col.size());
            i = 0;
            for (const auto& [v, pos] : inner.first_col)
                inner_sorted[i++] = {pos, v};
            std::sort(inner_sorted.begin(), inner_sorted.end());
            for (const auto& [pos, v] : inner_sorted) add_kept(v);
        }

        std::map<std::string, std::uint32_t> new_outer_pos;
        for (std::uint32_t i = 0; i < layout.size(); ++i) {
            auto op = resolve(layout[i]);
            if (!op)
                throw std::logic_error("plan_variant: lost a live variable");
            step.projection.sources.push_back(*op);
            new_outer_pos.emplace(layout[i], i);
        }
        // Nothing live between joins (all-constant heads over disconnected
        // atoms): carry one dummy column so the temp keeps its row count.
        if (step.projection.sources.empty())
            step.projection.sources.push_back(operand::outer(0));

        outer_pos = std::move(new_outer_pos);
        bound = std::move(bound_after);
        variant.steps.push_back(std::move(step));
    }
    return variant;
}

}  // namespace detail

// Compiles one rule into its delta-placement variants. Each variant is a
// chain of binary joins through short-lived temps: the chain starts from
// the variant's delta atom, every other atom reads the full version, and
// projections keep only variables still needed downstream.
inline rule_plan plan_rule(const program& p, const rule& r,
                           std::size_t rule_index = 0) {
    if (r.body.empty()) throw plan_error("rule has no body atoms");
    std::set<std::string> body_vars;
    for (const auto& a : r.body)
        for (const auto& t : a.terms)
            if (!t.is_constant) body_vars.insert(t.var);
    for (const auto& t : r.head.terms)
        if (!t.is_constant && !body_vars.count(t.var))
            throw plan_error("unbound head variable '" + t.var + "'");

    rule_plan plan;
    plan.rule_index = rule_index;
    plan.head_relation = r.head.relation;
    plan.head_arity = static_cast<std::uint32_t>(r.head.terms.size());

    auto rec_atoms = recursive_atoms(p, r);
    plan.recursive = !rec_atoms.empty();
    if (plan.recursive) {
        for (std::size_t d : rec_atoms)
            plan.variants.push_back(
                detail::plan_variant(r, d, version_tag::delta));
    } else {
        plan.variants.push_back(
            detail::plan_variant(r, 0, version_tag::full));
    }
    return plan;
}

inline std::vector<rule_plan> plan_program(const program& p) {
    std::vector<rule_plan> plans;
    plans.reserve(p.rules.size());
    for (std::size_t i = 0; i < p.rules.size(); ++i)
        plans.push_back(plan_rule(p, p.rules[i], i));
    return plans;
}

inline std::set<index_requirement> collect_index_requirements(
    const std::vector<rule_plan>& plans) {
    std::set<index_requirement> out;
    for (const auto& plan : plans)
        for (const auto& variant : plan.variants)
            for (const auto& step : variant.steps)
                out.insert({step.inner_relation, step.inner_permutation,
                            step.join_column_count});
    return out;
}

}  // namespace arraylog
