#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "bar/decomposer.hpp"
#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/recipes.hpp"

namespace bar {

// ============================================================================
// Recursive goal decomposition (backward planning)
//
// The loop is the paper's queue/stack construction: pop the head goal,
// decompose it into one step plus sub-goals, push the step, enqueue the
// sub-goals, repeat until the queue drains, then pop the stack into the raw
// plan. Two demand-aggregation rules keep the arithmetic equal to the
// reference plans ("Craft 9 planks" from requests of 3+2+4, mined from
// exactly 3 log):
//
//   * a pushed ObtainItem goal merges into a pending goal for the same item
//     (quantities add; reusable items keep the max instead), so split demand
//     is batch-rounded once, not per request;
//   * a goal for a reusable item (or a dig with a tool already dug with) is
//     skipped entirely when a step on the stack already satisfies it.
//
// Fusion then merges the remaining same-kind steps, and normalization
// produces the canonical step order used by the dataset annotations.
// ============================================================================

struct TraceEntry {
    Goal goal;
    DecompositionResult result;
};

/// One entry per decompose call, in decomposition order.
using PlanningTrace = std::vector<TraceEntry>;

struct PlanningResult {
    Plan plan;       // fused + normalized
    Plan raw;        // stack pop order, pre-fusion
    PlanningTrace trace;
};

using HintProvider = std::function<std::optional<DecompositionResult>(const Goal&)>;

struct PlannerOptions {
    int iteration_budget = 256;
    const RecipeDb* db = nullptr; // required: fusion caps + normalization
    HintProvider hints;           // optional stage-memory lookup
};

// ----------------------------------------------------------------------------
// Step fusion
// ----------------------------------------------------------------------------

/// Merges steps with identical (verb, item, tool) into one at the earliest
/// occurrence, summing quantities. Reusable items keep the largest single
/// request instead of the sum (one crafting_table serves every craft), and
/// duplicate digs with the same tool collapse to the first.
inline Plan fuse_steps(const Plan& plan, const RecipeDb& db) {
    Plan out;
    std::vector<size_t> slot; // parallel to out
    for (const auto& s : plan) {
        bool merged = false;
        for (auto& existing : out) {
            if (!existing.same_kind(s)) continue;
            if (s.verb == StepVerb::DigDown || s.verb == StepVerb::Equip) {
                // no quantity to add
            } else if (s.item && db.is_reusable(*s.item)) {
                existing.qty = std::max(existing.qty, s.qty);
            } else {
                existing.qty += s.qty;
            }
            merged = true;
            break;
        }
        if (!merged) out.push_back(s);
    }
    return out;
}

// ----------------------------------------------------------------------------
// Plan normalization
// ----------------------------------------------------------------------------

namespace detail {

/// Dependency edges between step instances of one plan. Step j depends on
/// step i when i produces something j consumes: a recipe input, smelting
/// fuel, the station, the tool, or (for below-ground mining) the dig that
/// gets the agent underground. Digs pair with a same-tool dig when present.
struct StepGraph {
    const Plan* plan;
    std::vector<std::vector<size_t>> deps; // deps[j] = producers j waits on

    StepGraph(const Plan& p, const RecipeDb& db) : plan(&p), deps(p.size()) {
        std::map<ItemId, std::vector<size_t>> producers;
        for (size_t i = 0; i < p.size(); ++i) {
            const Step& s = p[i];
            if (s.item && s.verb != StepVerb::Equip) producers[*s.item].push_back(i);
        }
        auto add_producers = [&](size_t j, const ItemId& item) {
            auto it = producers.find(item);
            if (it == producers.end()) return;
            for (size_t i : it->second)
                if (i != j) deps[j].push_back(i);
        };
        std::vector<size_t> digs;
        for (size_t i = 0; i < p.size(); ++i)
            if (p[i].verb == StepVerb::DigDown) digs.push_back(i);

        for (size_t j = 0; j < p.size(); ++j) {
            const Step& s = p[j];
            switch (s.verb) {
                case StepVerb::Craft:
                case StepVerb::Smelt: {
                    RecipeKind k = s.verb == StepVerb::Craft ? RecipeKind::Craft : RecipeKind::Smelt;
                    const Recipe* r = s.item ? db.find(*s.item, k) : nullptr;
                    if (!r) break;
                    for (const auto& in : r->inputs) add_producers(j, in.item);
                    if (r->fuel) add_producers(j, r->fuel->item);
                    if (r->station) add_producers(j, *r->station);
                    break;
                }
                case StepVerb::Mine: {
                    if (s.tool) add_producers(j, *s.tool);
                    const Recipe* r = s.item ? db.find(*s.item, RecipeKind::Mine) : nullptr;
                    if (r && r->location == Location::BelowGround && !digs.empty()) {
                        size_t chosen = digs.front();
                        for (size_t d : digs)
                            if ((*plan)[d].tool == s.tool) { chosen = d; break; }
                        if (chosen != j) deps[j].push_back(chosen);
                    }
                    break;
                }
                case StepVerb::DigDown:
                    if (s.tool) add_producers(j, *s.tool);
                    break;
                case StepVerb::Equip:
                    if (s.item) add_producers(j, *s.item);
                    break;
            }
        }
    }
};

/// Canonical visit order of a step's dependencies: recipe inputs in recipe
/// order, then fuel, station, tool and finally the dig. This mirrors the
/// sub-goal order the decomposer emits, so oracle plans come out in the
/// order of the annotated plans (stick before crafting_table, dig right
/// before the mine it enables).
inline std::vector<size_t> ordered_deps(const StepGraph& g, const RecipeDb& db, size_t j) {
    const Step& s = (*g.plan)[j];
    std::vector<ItemId> want;
    bool want_dig = false;
    switch (s.verb) {
        case StepVerb::Craft:
        case StepVerb::Smelt: {
            RecipeKind k = s.verb == StepVerb::Craft ? RecipeKind::Craft : RecipeKind::Smelt;
            if (const Recipe* r = s.item ? db.find(*s.item, k) : nullptr) {
                for (const auto& in : r->inputs) want.push_back(in.item);
                if (r->fuel) want.push_back(r->fuel->item);
                if (r->station) want.push_back(*r->station);
            }
            break;
        }
        case StepVerb::Mine:
            if (s.tool) want.push_back(*s.tool);
            want_dig = true;
            break;
        case StepVerb::DigDown:
            if (s.tool) want.push_back(*s.tool);
            break;
        case StepVerb::Equip:
            if (s.item) want.push_back(*s.item);
            break;
    }
    std::vector<size_t> order;
    auto push_unique = [&](size_t d) {
        for (size_t x : order)
            if (x == d) return;
        order.push_back(d);
    };
    for (const auto& item : want)
        for (size_t d : g.deps[j])
            if ((*g.plan)[d].item && *(*g.plan)[d].item == item) push_unique(d);
    if (want_dig)
        for (size_t d : g.deps[j])
            if ((*g.plan)[d].verb == StepVerb::DigDown) push_unique(d);
    for (size_t d : g.deps[j]) push_unique(d); // anything not covered above
    return order;
}

} // namespace detail

/// Canonicalizes step order without breaking any dependency. The last step
/// (the goal achiever) is the root; its dependency closure is laid out by
/// post-order traversal, which yields the annotation standard. Steps outside
/// the closure keep their relative order and land where dependencies allow.
/// Idempotent, and insensitive to shuffles of mutually independent steps.
inline Plan normalize_plan(const Plan& plan, const RecipeDb& db) {
    if (plan.size() <= 1) return plan;
    detail::StepGraph g(plan, db);

    const size_t n = plan.size();
    std::vector<int> rank(n, -1);
    int next_rank = 0;
    // Gray nodes guard against dependency cycles in adversarial plans
    // (cycle edges are simply skipped).
    std::vector<int> color(n, 0);
    std::function<void(size_t)> visit = [&](size_t j) {
        if (color[j] != 0) return;
        color[j] = 1;
        for (size_t d : detail::ordered_deps(g, db, j))
            if (color[d] == 0) visit(d);
        color[j] = 2;
        rank[j] = next_rank++;
    };
    visit(n - 1);
    for (size_t j = 0; j < n; ++j)
        if (rank[j] < 0) rank[j] = static_cast<int>(n) + static_cast<int>(j);

    // Kahn's algorithm, lowest rank first among available steps.
    std::vector<size_t> remaining_deps(n, 0);
    std::vector<std::vector<size_t>> dependents(n);
    for (size_t j = 0; j < n; ++j) {
        std::set<size_t> uniq(g.deps[j].begin(), g.deps[j].end());
        uniq.erase(j);
        for (size_t d : uniq) dependents[d].push_back(j);
        remaining_deps[j] = uniq.size();
    }
    auto cmp = [&](size_t a, size_t b) {
        return rank[a] != rank[b] ? rank[a] < rank[b] : a < b;
    };
    std::set<size_t, decltype(cmp)> ready(cmp);
    for (size_t j = 0; j < n; ++j)
        if (remaining_deps[j] == 0) ready.insert(j);

    Plan out;
    std::vector<bool> emitted(n, false);
    while (!ready.empty()) {
        size_t j = *ready.begin();
        ready.erase(ready.begin());
        emitted[j] = true;
        out.push_back(plan[j]);
        for (size_t k : dependents[j])
            if (!emitted[k] && --remaining_deps[k] == 0) ready.insert(k);
    }
    // Cycle fallback: emit whatever is left in input order.
    for (size_t j = 0; j < n; ++j)
        if (!emitted[j]) out.push_back(plan[j]);
    return out;
}

// ----------------------------------------------------------------------------
// Algorithm body
// ----------------------------------------------------------------------------

inline PlanningResult plan_backward(const Goal& goal, Decomposer& decomposer,
                                    const PlannerOptions& opts) {
    if (!opts.db) throw ConfigError("plan_backward requires a recipe db");
    const RecipeDb& db = *opts.db;

    std::deque<Goal> queue{goal};
    std::vector<Step> stack;
    PlanningResult result;
    std::map<Goal, int> decompose_count;

    auto stack_satisfies = [&](const Goal& g) {
        if (g.kind == GoalKind::ReachBelowGround) {
            for (const auto& s : stack)
                if (s.verb == StepVerb::DigDown && s.tool && *s.tool == g.tool) return true;
            return false;
        }
        if (!db.is_reusable(g.item)) return false;
        for (const auto& s : stack)
            if (s.item && *s.item == g.item && s.verb != StepVerb::Equip) return true;
        return false;
    };

    auto enqueue = [&](const Goal& g) {
        for (auto& pending : queue) {
            if (pending.kind != g.kind) continue;
            if (g.kind == GoalKind::ObtainItem && pending.item == g.item) {
                if (db.is_reusable(g.item))
                    pending.qty = std::max(pending.qty, g.qty);
                else
                    pending.qty += g.qty;
                return;
            }
            if (g.kind == GoalKind::ReachBelowGround && pending.tool == g.tool) return;
        }
        queue.push_back(g);
    };

    int iterations = 0;
    while (!queue.empty()) {
        Goal top = queue.front();
        queue.pop_front();
        if (stack_satisfies(top)) continue;

        if (++iterations > opts.iteration_budget)
            throw IterationBudgetExceeded("budget " + std::to_string(opts.iteration_budget) +
                                          " reached at goal \"" + render_goal(top) + "\"");
        if (++decompose_count[top] > 64)
            throw IterationBudgetExceeded("goal \"" + render_goal(top) +
                                          "\" decomposed repeatedly; cyclic decomposition?");

        std::optional<DecompositionResult> hint;
        if (opts.hints) hint = opts.hints(top);
        DecompositionResult d = decomposer.decompose(top, hint);
        stack.push_back(d.step);
        for (const auto& sub : d.sub_goals) enqueue(sub);
        result.trace.push_back({top, std::move(d)});
    }

    result.raw.assign(stack.rbegin(), stack.rend());
    result.plan = normalize_plan(fuse_steps(result.raw, db), db);
    return result;
}

} // namespace bar
