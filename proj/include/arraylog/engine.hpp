#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "budget.hpp"
#include "builtins.hpp"
#include "container.hpp"
#include "merge_buffer.hpp"
#include "plan.hpp"
#include "program.hpp"
#include "ra.hpp"
#include "stats.hpp"
#include "tuple_array.hpp"
#include "types.hpp"

namespace arraylog {

struct engine_config {
    std::size_t memory_budget_bytes = memory_accountant::unlimited;
    bool ebm_enabled = true;
    unsigned alpha = 5;
    double load_factor = 0.8;
    unsigned workers = 0;       // 0 = hardware concurrency
    std::size_t stride_rows = 0;  // 0 = derived from outer size and workers
};

// Semi-naive fixpoint driver over versioned relations. Each iteration
// refreshes indexed copies, runs every rule variant's join chain against
// the deltas, deduplicates the new tuples, subtracts the full relation to
// form the next delta, and merges delta into full through the buffer
// manager. Orchestration is single-threaded; parallelism lives inside the
// bulk kernels.
class engine {
    using category = memory_accountant::category;
    using clock = std::chrono::steady_clock;

    struct indexed_copy {
        relation_container container;
        std::size_t bytes = 0;
    };

    using copy_key = std::pair<std::vector<std::uint32_t>, std::uint32_t>;

    struct relation_state {
        std::string name;
        std::uint32_t arity = 0;
        bool is_edb = false;
        relation_container full;
        relation_container delta;
        tuple_array new_acc;
        std::map<copy_key, indexed_copy> copies;
        bool dirty = false;
        std::size_t full_bytes = 0;
        std::size_t delta_bytes = 0;
        std::size_t new_bytes = 0;
    };

public:
    explicit engine(program p, engine_config cfg = {})
        : prog_(std::move(p)),
          cfg_(cfg),
          acct_(cfg.memory_budget_bytes),
          buffers_(acct_, cfg.ebm_enabled, cfg.alpha) {
        if (!(cfg_.load_factor > 0.0) || cfg_.load_factor >= 1.0)
            throw config_error("engine: load factor must be in (0, 1)");

        for (const auto& e : prog_.edbs) {
            auto& st = rels_[e.name];
            st.name = e.name;
            st.arity = e.arity;
            st.is_edb = true;
            init_containers(st);
        }
        for (const auto& name : prog_.idb_relations()) {
            auto& st = rels_[name];
            st.name = name;
            st.arity = *prog_.arity_of(name);
            init_containers(st);
        }
        set_plans(plan_program(prog_));
    }

    // The buffer manager and tracked charges point into the accountant;
    // the engine stays where it was constructed.
    engine(const engine&) = delete;
    engine& operator=(const engine&) = delete;

    // Replaces the compiled plans; used to experiment with alternative
    // variant sets. Must be called before seeding.
    void override_plans(std::vector<rule_plan> plans) {
        if (seeded_)
            throw std::logic_error("override_plans: engine already seeded");
        set_plans(std::move(plans));
    }

    const std::vector<rule_plan>& plans() const { return plans_; }
    const program& source_program() const { return prog_; }
    const memory_accountant& accountant() const { return acct_; }

    void load_edb(const std::string& name, tuple_array facts) {
        if (seeded_)
            throw std::logic_error("load_edb: engine already running");
        auto it = rels_.find(name);
        if (it == rels_.end() || !it->second.is_edb)
            throw load_error("load_edb: '" + name +
                             "' is not a declared EDB relation");
        auto& st = it->second;
        if (facts.arity != st.arity)
            throw load_error("load_edb: '" + name + "' expects arity " +
                             std::to_string(st.arity) + ", got " +
                             std::to_string(facts.arity));
        for (value_t v : facts.data)
            if (v == kEmptySlot)
                throw load_error("load_edb: '" + name +
                                 "' contains the reserved sentinel value");
        tuple_array canonical = facts.canonical
                                    ? std::move(facts)
                                    : tracked_canonicalize(facts, "other");
        assign_full(st, std::move(canonical), "other");
        st.dirty = true;
    }

    void run() {
        seed();
        iterate_to_fixpoint();
    }

    // Evaluates the non-recursive rules once, in dependency order, seeding
    // both the full and delta versions of their head relations.
    void seed() {
        if (seeded_) throw std::logic_error("seed: called twice");
        auto t0 = clock::now();

        for (std::size_t pi : nonrecursive_topo_order()) {
            const rule_plan& plan = plans_[pi];
            const rule_variant& variant = plan.variants.front();
            refresh_inputs(variant);
            tuple_array rows = execute_chain(variant);
            tracked_bytes rows_charge(acct_, category::temp,
                                      rows.byte_size(), "join");
            if (rows.count() == 0) continue;

            auto& head = state(plan.head_relation);
            tuple_array fresh = tracked_canonicalize(rows, "dedup");
            tracked_bytes fresh_charge(acct_, category::temp,
                                       fresh.byte_size(), "dedup");
            rows_charge.reset();
            rows = {};

            tuple_array gained;
            {
                phase_timer t(*this, "difference");
                gained = difference(fresh, head.full.tuples,
                                    cfg_.workers);
            }
            if (gained.count() == 0) continue;
            tracked_bytes gained_charge(acct_, category::temp,
                                        gained.byte_size(), "difference");
            fresh_charge.reset();
            merge_into_full(head, gained, "merge");
        }

        for (const auto& name : prog_.idb_relations()) {
            auto& st = state(name);
            tuple_array copy = st.full.tuples;
            assign_delta(st, std::move(copy), "other");
        }

        check_temp_watermark();
        seeded_ = true;
        stats_.total_seconds += elapsed(t0);
    }

    void iterate_to_fixpoint() {
        if (!seeded_) seed();
        auto t0 = clock::now();

        std::vector<std::string> recursive_rels;
        for (const auto& plan : plans_)
            if (plan.recursive &&
                std::find(recursive_rels.begin(), recursive_rels.end(),
                          plan.head_relation) == recursive_rels.end())
                recursive_rels.push_back(plan.head_relation);

        std::map<std::string, std::vector<std::size_t>> history;
        for (const auto& r : recursive_rels) history[r];

        // Terminates without a guard: positive Datalog over the finite
        // value domain of the input only ever adds tuples, and every
        // iteration with all-empty deltas exits.
        for (;;) {
            bool active = false;
            for (const auto& r : recursive_rels)
                if (state(r).delta.tuples.count() > 0) active = true;
            if (!active) break;

            ++stats_.iterations;
            for (const auto& r : recursive_rels)
                history[r].push_back(state(r).delta.tuples.count());

            // (1) refresh indexed copies with rows merged last iteration
            for (auto& [name, st] : rels_)
                if (st.dirty) refresh_copies(st);

            // (2) run every variant of every recursive rule on the deltas
            for (const auto& plan : plans_) {
                if (!plan.recursive) continue;
                auto& head = state(plan.head_relation);
                for (const auto& variant : plan.variants) {
                    if (variant.source.version == version_tag::delta &&
                        state(variant.source.relation).delta.tuples.count() ==
                            0)
                        continue;
                    tuple_array rows = execute_chain(variant);
                    append_new(head, rows);
                }
                check_temp_watermark();
            }

            // (3) dedup new, (4) subtract full, (5) merge delta into full
            for (const auto& r : recursive_rels) {
                auto& st = state(r);
                tuple_array fresh(st.arity);
                fresh.canonical = true;
                if (st.new_acc.count() > 0)
                    fresh = tracked_canonicalize(st.new_acc, "dedup");
                tracked_bytes fresh_charge(acct_, category::temp,
                                           fresh.byte_size(), "dedup");
                clear_new(st);

                tuple_array next_delta;
                {
                    phase_timer t(*this, "difference");
                    next_delta =
                        difference(fresh, st.full.tuples, cfg_.workers);
                }
                fresh_charge.reset();
                assign_delta(st, std::move(next_delta), "difference");

                if (st.delta.tuples.count() > 0) {
                    merge_into_full(st, st.delta.tuples, "merge");
                    st.dirty = true;
                }
            }
        }

        for (auto& [name, deltas] : history)
            stats_.delta_history.emplace_back(name, std::move(deltas));
        stats_.total_seconds += elapsed(t0);
    }

    const tuple_array& relation(const std::string& name) const {
        auto it = rels_.find(name);
        if (it == rels_.end())
            throw usage_error("unknown relation '" + name + "'");
        return it->second.full.tuples;
    }

    std::vector<std::string> idb_relations() const {
        return prog_.idb_relations();
    }

    run_stats stats() const {
        run_stats s = stats_;
        s.buffer_allocations = buffers_.allocation_count();
        s.charge_events = acct_.charge_events();
        s.peak_tracked_bytes = acct_.peak_bytes();
        s.peak_temp_bytes = acct_.peak_temp_bytes();
        return s;
    }

private:
    struct phase_timer {
        engine& e;
        const char* phase;
        clock::time_point t0 = clock::now();
        phase_timer(engine& eng, const char* p) : e(eng), phase(p) {}
        ~phase_timer() { e.stats_.phase_seconds[phase] += e.elapsed(t0); }
    };

    static double elapsed(clock::time_point t0) {
        return std::chrono::duration<double>(clock::now() - t0).count();
    }

    void init_containers(relation_state& st) {
        st.full.tuples = tuple_array(st.arity);
        st.full.tuples.canonical = true;
        st.full.permutation = identity_permutation(st.arity);
        st.delta = st.full;
        st.new_acc = tuple_array(st.arity);
    }

    void set_plans(std::vector<rule_plan> plans) {
        plans_ = std::move(plans);
        for (const auto& req : collect_index_requirements(plans_)) {
            auto it = rels_.find(req.relation);
            if (it == rels_.end())
                throw usage_error("plan references unknown relation '" +
                                  req.relation + "'");
            it->second.copies[{req.permutation, req.prefix_len}];
            it->second.dirty = true;
        }
    }

    relation_state& state(const std::string& name) {
        auto it = rels_.find(name);
        if (it == rels_.end())
            throw usage_error("unknown relation '" + name + "'");
        return it->second;
    }

    // Non-recursive rules ordered so producers run before consumers; the
    // dependency graph among them is acyclic by construction (a cycle
    // would have made the rules recursive).
    std::vector<std::size_t> nonrecursive_topo_order() const {
        std::vector<std::size_t> nonrec;
        for (std::size_t i = 0; i < plans_.size(); ++i)
            if (!plans_[i].recursive) nonrec.push_back(i);

        std::vector<std::size_t> order;
        std::vector<bool> done(nonrec.size(), false);
        while (order.size() < nonrec.size()) {
            bool progressed = false;
            for (std::size_t i = 0; i < nonrec.size(); ++i) {
                if (done[i]) continue;
                const rule& r = prog_.rules[plans_[nonrec[i]].rule_index];
                bool ready = true;
                for (const auto& a : r.body) {
                    if (prog_.is_edb(a.relation)) continue;
                    for (std::size_t j = 0; j < nonrec.size(); ++j)
                        if (!done[j] && j != i &&
                            plans_[nonrec[j]].head_relation == a.relation)
                            ready = false;
                }
                if (ready) {
                    done[i] = true;
                    order.push_back(nonrec[i]);
                    progressed = true;
                }
            }
            if (!progressed)
                throw std::logic_error(
                    "nonrecursive rules form a dependency cycle");
        }
        return order;
    }

    void refresh_inputs(const rule_variant& variant) {
        for (const auto& step : variant.steps) {
            auto& st = state(step.inner_relation);
            if (st.dirty) refresh_copies(st);
        }
    }

    // Rebuilds every registered indexed copy of a relation from its full
    // tuples (permute, then index). Rebuild-from-scratch; costs land in
    // the index phase.
    void refresh_copies(relation_state& st) {
        phase_timer t(*this, "index");
        for (auto& [key, copy] : st.copies) {
            const auto& [perm, prefix_len] = key;
            tracked_bytes scratch(
                acct_, category::temp,
                2 * st.full.tuples.byte_size() +
                    st.full.tuples.count() * sizeof(value_t),
                "index");
            tuple_array permuted =
                permute_columns(st.full.tuples, perm, cfg_.workers);
            relation_container next;
            next.tuples = std::move(permuted);
            next.permutation = perm;
            if (prefix_len > 0)
                next.index = build_index(next.tuples, prefix_len,
                                         cfg_.load_factor, cfg_.workers);
            scratch.reset();

            std::size_t bytes =
                next.tuples.byte_size() +
                (next.index ? next.index->slot_count() *
                                  sizeof(index_map::slot)
                            : 0);
            acct_.charge(category::container, bytes, "index");
            acct_.release(category::container, copy.bytes);
            copy.bytes = bytes;
            copy.container = std::move(next);
        }
        st.dirty = false;
    }

    // Runs one variant's join chain; returns the head-shaped rows. All
    // intermediate temps are charged to the temp category and released
    // before returning, matching the purge discipline for temporarily
    // materialized joins.
    tuple_array execute_chain(const rule_variant& variant) {
        auto& src = state(variant.source.relation);
        const relation_container& base =
            variant.source.version == version_tag::delta ? src.delta
                                                         : src.full;

        relation_container permuted_holder;
        tracked_bytes permuted_charge;
        const relation_container* current = &base;
        if (!is_identity_permutation(variant.source.permutation)) {
            phase_timer t(*this, "join");
            tracked_bytes scratch(
                acct_, category::temp,
                2 * base.tuples.byte_size() +
                    base.tuples.count() * sizeof(value_t),
                "join");
            tuple_array permuted = permute_columns(
                base.tuples, variant.source.permutation, cfg_.workers);
            scratch.reset();
            permuted_charge = tracked_bytes(
                acct_, category::temp, permuted.byte_size(), "join");
            permuted_holder.tuples = std::move(permuted);
            permuted_holder.permutation = variant.source.permutation;
            current = &permuted_holder;
        }

        if (variant.steps.empty()) {
            phase_timer t(*this, "join");
            return select_project(*current, variant.select_projection,
                                  variant.select_filters);
        }

        relation_container chained;
        tracked_bytes chained_charge;
        tuple_array result;
        for (std::size_t s = 0; s < variant.steps.size(); ++s) {
            const join_step& step = variant.steps[s];
            const auto& inner_state = state(step.inner_relation);
            auto cit = inner_state.copies.find(
                {step.inner_permutation, step.join_column_count});
            if (cit == inner_state.copies.end())
                throw std::logic_error(
                    "execute_chain: missing indexed copy for '" +
                    step.inner_relation + "'");

            join_spec spec;
            spec.join_column_count = step.join_column_count;
            spec.outer = current;
            spec.inner = &cit->second.container;
            spec.projection = step.projection;
            spec.filters = step.filters;

            std::size_t total;
            {
                phase_timer t(*this, "join");
                total = join_count(spec, cfg_.workers, cfg_.stride_rows);
            }
            const std::uint32_t out_arity = step.projection.output_arity();
            tracked_bytes out_charge(acct_, category::temp,
                                     total * out_arity * sizeof(value_t),
                                     "join");
            tuple_array out(out_arity);
            out.data.resize(total * out_arity);
            {
                phase_timer t(*this, "join");
                join_materialize(spec, out, cfg_.workers, cfg_.stride_rows);
            }

            if (s + 1 == variant.steps.size()) {
                result = std::move(out);
                break;
            }
            // Temps are unversioned, undeduplicated, and purged as soon as
            // the next join consumes them.
            chained = relation_container{};
            chained.tuples = std::move(out);
            chained.permutation =
                identity_permutation(chained.tuples.arity);
            chained_charge = std::move(out_charge);
            permuted_charge.reset();
            current = &chained;
        }
        return result;
    }

    void append_new(relation_state& head, const tuple_array& rows) {
        if (rows.count() == 0) return;
        if (rows.arity != head.arity)
            throw std::logic_error("append_new: arity mismatch");
        acct_.charge(category::container, rows.byte_size(), "join");
        head.new_bytes += rows.byte_size();
        head.new_acc.data.insert(head.new_acc.data.end(), rows.data.begin(),
                                 rows.data.end());
        head.new_acc.canonical = false;
    }

    void clear_new(relation_state& st) {
        acct_.release(category::container, st.new_bytes);
        st.new_bytes = 0;
        st.new_acc = tuple_array(st.arity);
    }

    void assign_full(relation_state& st, tuple_array tuples,
                     const char* phase) {
        acct_.charge(category::container, tuples.byte_size(), phase);
        acct_.release(category::container, st.full_bytes);
        st.full_bytes = tuples.byte_size();
        st.full.tuples = std::move(tuples);
    }

    void assign_delta(relation_state& st, tuple_array tuples,
                      const char* phase) {
        acct_.charge(category::container, tuples.byte_size(), phase);
        acct_.release(category::container, st.delta_bytes);
        st.delta_bytes = tuples.byte_size();
        st.delta.tuples = std::move(tuples);
    }

    // full <- full U gained through the relation's merge buffer.
    void merge_into_full(relation_state& st, const tuple_array& gained,
                         const char* phase) {
        merge_buffer& buf = buffers_.acquire(
            st.name, st.full.tuples.count(), gained.count(), st.arity);
        tuple_array merged;
        {
            phase_timer t(*this, phase);
            merged = merge_sorted(st.full.tuples, gained, buf.values(),
                                  cfg_.workers);
        }
        buffers_.release(st.name);
        assign_full(st, std::move(merged), phase);
        st.dirty = true;
    }

    tuple_array tracked_canonicalize(const tuple_array& raw,
                                     const char* phase) {
        phase_timer t(*this, phase);
        tracked_bytes scratch(
            acct_, category::temp,
            raw.count() * sizeof(value_t) + raw.byte_size(), phase);
        return canonicalize(raw, cfg_.workers);
    }

    void check_temp_watermark() const {
        if (acct_.current(category::temp) != 0)
            throw std::logic_error(
                "temporary storage leaked past a rule boundary");
    }

    program prog_;
    engine_config cfg_;
    memory_accountant acct_;
    buffer_manager buffers_;
    std::vector<rule_plan> plans_;
    std::map<std::string, relation_state> rels_;
    run_stats stats_;
    bool seeded_ = false;
};

}  // namespace arraylog
