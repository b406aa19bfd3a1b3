#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/planner.hpp"
#include "bar/recipes.hpp"
#include "bar/simulator.hpp"

namespace bar {

// ============================================================================
// State consistency maintenance
//
// Backward planning ignores the agent's physical state, so an initial plan
// can demand mining stone while still above ground. This module rates the
// steps of the initial plan, brackets the suspicious stretches with anchor
// pairs, regenerates the bracketed segment by forward (state-aware)
// completion, and splices the segment back in.
// ============================================================================

struct StepRating {
    int index{0}; // 1-based step position
    int score{0}; // 1..10
};

struct AnchorPair {
    int start{0};
    int end{0}; // start < end <= plan length
};

enum class AnchorMethod { StepScoring, SlidingWindow };

struct ConsistencyConfig {
    AnchorMethod method{AnchorMethod::StepScoring};
    int t{5};            // score threshold
    int k{3};            // window length
    int rounds{1};       // score/repair passes
    std::uint64_t seed{0}; // sliding-window selection
};

/// Remote hooks; when unset the deterministic simulation backends run.
struct ConsistencyBackends {
    std::function<std::vector<StepRating>(const std::string& goal_text, const Plan&)> remote_scorer;
    std::function<Plan(const std::string& goal_text, const Step& start, const Step& end)> remote_completer;
};

// ----------------------------------------------------------------------------
// Step scoring
// ----------------------------------------------------------------------------

/// Simulation scorer: run the plan once skipping failures, then give step i
/// a 1 when any of the k steps after it fails, 10 otherwise. Binary scores
/// are enough for thresholding; only the remote scorer produces the full
/// 1..10 range.
inline std::vector<StepRating> score_steps(const Plan& plan, const WorldState& initial_state,
                                           const ConsistencyConfig& cfg, const RecipeDb& db) {
    std::vector<bool> failed(plan.size(), false);
    WorldState state = initial_state;
    StochasticProfile deterministic;
    for (size_t i = 0; i < plan.size(); ++i) {
        StepOutcome o = simulate_step(state, plan[i], db, deterministic, nullptr);
        failed[i] = !o.completed;
        state = o.state_after;
    }
    std::vector<StepRating> ratings;
    for (size_t i = 0; i < plan.size(); ++i) {
        bool bad = false;
        for (size_t j = i + 1; j <= i + static_cast<size_t>(cfg.k) && j < plan.size(); ++j)
            if (failed[j]) { bad = true; break; }
        ratings.push_back({static_cast<int>(i) + 1, bad ? 1 : 10});
    }
    return ratings;
}

// ----------------------------------------------------------------------------
// Anchor selection
// ----------------------------------------------------------------------------

/// Steps rated below t start an anchor pair ending k steps later (clamped
/// to the plan end). Overlapping pairs chain-merge left to right into
/// non-overlapping pairs; a start at the last step has nowhere to end and
/// is dropped.
inline std::vector<AnchorPair> choose_anchors_scoring(const std::vector<StepRating>& ratings,
                                                      int t, int k, int plan_len) {
    std::vector<int> starts;
    for (const auto& r : ratings)
        if (r.score < t) starts.push_back(r.index);
    std::sort(starts.begin(), starts.end());

    std::vector<AnchorPair> pairs;
    int covered_until = 0;
    for (int s : starts) {
        if (s <= covered_until) continue;
        int e = std::min(s + k, plan_len);
        if (e <= s) continue;
        pairs.push_back({s, e});
        covered_until = e;
    }
    return pairs;
}

/// Seeded random choice of ceil(len/(k+1)) non-overlapping pairs, each
/// spanning k steps (clamped at the plan end).
inline std::vector<AnchorPair> choose_anchors_sliding(int plan_len, int k, std::uint64_t seed) {
    std::vector<AnchorPair> pairs;
    if (plan_len < 2) return pairs;
    int target = (plan_len + k) / (k + 1);

    std::vector<int> candidates;
    for (int s = 1; s < plan_len; ++s) candidates.push_back(s);
    std::mt19937_64 rng(detail::splitmix64(seed ^ 0x51edd1a9u));
    std::shuffle(candidates.begin(), candidates.end(), rng);

    for (int s : candidates) {
        if (static_cast<int>(pairs.size()) >= target) break;
        int e = std::min(s + k, plan_len);
        if (e <= s) continue;
        bool overlaps = false;
        for (const auto& p : pairs)
            if (s <= p.end && p.start <= e) { overlaps = true; break; }
        if (!overlaps) pairs.push_back({s, e});
    }
    std::sort(pairs.begin(), pairs.end(), [](const AnchorPair& a, const AnchorPair& b) {
        return a.start < b.start;
    });
    return pairs;
}

// ----------------------------------------------------------------------------
// Forward completion
// ----------------------------------------------------------------------------

/// Simulation state travelling through a repair: the world plus the set of
/// tools already used to dig, so the repairer knows which tool tiers the
/// plan has already descended with.
struct RepairContext {
    WorldState state;
    std::set<ItemId> dug_tools;
};

namespace detail {

class ForwardRepairer {
public:
    ForwardRepairer(const RecipeDb& db, RepairContext ctx, int insertion_budget)
        : db_(db), ctx_(std::move(ctx)), budget_(insertion_budget) {}

    /// The start anchor opens the partial plan as-is; enabling steps may
    /// never land in front of it.
    void run_start(const Step& step) {
        exec(step);
        partial_.push_back(step);
    }

    /// Replays a step from the bracketed segment, first inserting whatever
    /// its preconditions still need. Keeping the original steps (instead of
    /// rederiving the segment) preserves quantities that later steps
    /// outside the window rely on.
    void run_step(const Step& step) {
        enable(step, 0);
        exec(step);
        partial_.push_back(step);
    }

    Plan take_partial() { return std::move(partial_); }

private:
    // Derives missing preconditions of `step` in the order the recipes list
    // them, inserting enabling steps before it.
    void enable(const Step& step, int depth) {
        if (depth > 16) throw RepairDepthExceeded("derivation too deep at " + render_step(step));
        switch (step.verb) {
            case StepVerb::Craft:
            case StepVerb::Smelt: {
                RecipeKind kind = step.verb == StepVerb::Craft ? RecipeKind::Craft : RecipeKind::Smelt;
                const Recipe* r = step.item ? db_.find(*step.item, kind) : nullptr;
                if (!r) throw RepairDepthExceeded("no recipe for " + render_step(step));
                int batches = (step.qty + r->out_count - 1) / r->out_count;
                for (const auto& in : r->inputs) obtain(in.item, in.count * batches, depth);
                if (r->fuel) obtain(r->fuel->item, r->fuel->count * batches, depth);
                if (r->station && ctx_.state.count(*r->station) < 1) obtain(*r->station, 1, depth);
                break;
            }
            case StepVerb::Mine: {
                const Recipe* r = step.item ? db_.find(*step.item, RecipeKind::Mine) : nullptr;
                if (!r) throw RepairDepthExceeded("unminable " + render_step(step));
                if (r->min_tool && !holds_tool(*r->min_tool)) obtain(*r->min_tool, 1, depth);
                if (r->location == Location::BelowGround) {
                    // One dig per tool tier, matching the annotation style:
                    // insert the dig unless the plan already descended with
                    // this mine's tool.
                    ItemId dig_tool = r->min_tool ? *r->min_tool : db_.tool_order().front();
                    bool need_dig = ctx_.state.location == Position::AboveGround ||
                                    !ctx_.dug_tools.count(dig_tool);
                    if (need_dig) insert(Step::dig_down(dig_tool), depth);
                }
                break;
            }
            case StepVerb::DigDown: {
                if (step.tool && !ctx_.state.count(*step.tool) && !holds_any_tool())
                    obtain(*step.tool, 1, depth);
                break;
            }
            case StepVerb::Equip:
                if (step.item && ctx_.state.count(*step.item) < 1) obtain(*step.item, 1, depth);
                break;
        }
    }

    // Makes `missing` more of `item` available via single-recipe lookup.
    void obtain(const ItemId& item, int needed, int depth) {
        int missing = needed - ctx_.state.count(item);
        if (missing <= 0) return;
        const Recipe* r = db_.recipe_for(item);
        if (!r) throw RepairDepthExceeded("no recipe produces " + item.name);
        Step step;
        if (r->kind == RecipeKind::Mine) {
            step = Step::mine(item, missing, r->min_tool);
        } else {
            int batches = (missing + r->out_count - 1) / r->out_count;
            int qty = batches * r->out_count;
            step = r->kind == RecipeKind::Craft ? Step::craft(item, qty) : Step::smelt(item, qty);
        }
        insert(step, depth);
    }

    void insert(const Step& step, int depth) {
        enable(step, depth + 1);
        if (++insertions_ > budget_)
            throw RepairDepthExceeded("more than " + std::to_string(budget_) +
                                      " insertions between anchors");
        exec(step);
        partial_.push_back(step);
    }

    bool holds_tool(const ItemId& min_tool) const {
        for (const auto& t : db_.tool_order())
            if (ctx_.state.count(t) > 0 && db_.tool_satisfies(t, min_tool)) return true;
        return false;
    }

    bool holds_any_tool() const {
        for (const auto& t : db_.tool_order())
            if (ctx_.state.count(t) > 0) return true;
        return false;
    }

    void exec(const Step& step) {
        StochasticProfile deterministic;
        StepOutcome o = simulate_step(ctx_.state, step, db_, deterministic, nullptr);
        if (o.completed) {
            ctx_.state = o.state_after;
            if (step.verb == StepVerb::DigDown && step.tool) ctx_.dug_tools.insert(*step.tool);
        }
        // A still-failing anchor is carried through unchanged; the next
        // scoring round (or the caller's executor) will see the failure.
    }

    const RecipeDb& db_;
    RepairContext ctx_;
    int budget_;
    int insertions_ = 0;
    Plan partial_;
};

} // namespace detail

/// Generates the partial plan between the anchors: execute the start
/// anchor, replay the bracketed interior steps, and close with the end
/// anchor — inserting whatever any of their preconditions still need
/// (location digs, missing materials, stations, tools via single-recipe
/// lookup). Insertions are limited to 2k; the replayed steps are free.
inline Plan forward_complete(const Step& start, const Step& end, const Plan& interior,
                             const RepairContext& at_start, const RecipeDb& db, int k) {
    detail::ForwardRepairer repairer(db, at_start, 2 * k);
    repairer.run_start(start);
    for (const auto& s : interior) repairer.run_step(s);
    repairer.run_step(end);
    return repairer.take_partial();
}

// ----------------------------------------------------------------------------
// Integration
// ----------------------------------------------------------------------------

/// Splices the partial plan over initial[start..end]. The partial's first
/// and last steps must match the anchors by (verb, item, tool); the spliced
/// seam steps keep the larger of the two quantities, and duplicates inside
/// the partial are fused before splicing.
inline Plan integrate(const Plan& initial, const Plan& partial, const AnchorPair& pair,
                      const RecipeDb& db) {
    if (pair.start < 1 || pair.end > static_cast<int>(initial.size()) || pair.start >= pair.end)
        throw AnchorMismatch("pair (" + std::to_string(pair.start) + ", " +
                             std::to_string(pair.end) + ") out of range");
    if (partial.empty() || !partial.front().same_kind(initial[pair.start - 1]) ||
        !partial.back().same_kind(initial[pair.end - 1]))
        throw AnchorMismatch("partial plan endpoints do not match the anchor steps");

    Plan fused = fuse_steps(partial, db);
    if (fused.empty() || !fused.front().same_kind(initial[pair.start - 1]) ||
        !fused.back().same_kind(initial[pair.end - 1]))
        throw AnchorMismatch("fusing the partial plan destroyed an anchor step");
    fused.front().qty = std::max(fused.front().qty, initial[pair.start - 1].qty);
    fused.back().qty = std::max(fused.back().qty, initial[pair.end - 1].qty);

    Plan out;
    out.insert(out.end(), initial.begin(), initial.begin() + pair.start - 1);
    out.insert(out.end(), fused.begin(), fused.end());
    out.insert(out.end(), initial.begin() + pair.end, initial.end());
    return out;
}

// ----------------------------------------------------------------------------
// Pipeline
// ----------------------------------------------------------------------------

namespace detail {

inline RepairContext simulate_prefix(const Plan& plan, int upto_exclusive, const RecipeDb& db) {
    RepairContext ctx;
    StochasticProfile deterministic;
    for (int i = 0; i < upto_exclusive; ++i) {
        StepOutcome o = simulate_step(ctx.state, plan[i], db, deterministic, nullptr);
        if (o.completed) {
            ctx.state = o.state_after;
            if (plan[i].verb == StepVerb::DigDown && plan[i].tool)
                ctx.dug_tools.insert(*plan[i].tool);
        }
    }
    return ctx;
}

} // namespace detail

/// Whole-module pipeline: rate, choose anchors, forward-complete each pair
/// from the re-simulated pre-anchor state, splice, repeat for `rounds`.
/// A plan with no anchors comes back step-for-step unchanged.
inline Plan maintain_consistency(const Plan& plan, const std::string& goal_text,
                                 const ConsistencyConfig& cfg, const RecipeDb& db,
                                 const ConsistencyBackends& backends = {}) {
    Plan cur = plan;
    for (int round = 0; round < cfg.rounds; ++round) {
        if (cur.empty()) return cur;

        std::vector<AnchorPair> pairs;
        if (cfg.method == AnchorMethod::StepScoring) {
            std::vector<StepRating> ratings =
                backends.remote_scorer ? backends.remote_scorer(goal_text, cur)
                                       : score_steps(cur, WorldState{}, cfg, db);
            pairs = choose_anchors_scoring(ratings, cfg.t, cfg.k, static_cast<int>(cur.size()));
        } else {
            pairs = choose_anchors_sliding(static_cast<int>(cur.size()), cfg.k,
                                           cfg.seed + static_cast<std::uint64_t>(round));
        }
        if (pairs.empty()) break;

        int shift = 0;
        bool changed = false;
        for (AnchorPair pair : pairs) {
            pair.start += shift;
            pair.end += shift;
            const Step& start_step = cur[pair.start - 1];
            const Step& end_step = cur[pair.end - 1];
            Plan partial;
            if (backends.remote_completer) {
                partial = backends.remote_completer(goal_text, start_step, end_step);
            } else {
                RepairContext ctx = detail::simulate_prefix(cur, pair.start - 1, db);
                Plan interior(cur.begin() + pair.start, cur.begin() + pair.end - 1);
                partial = forward_complete(start_step, end_step, interior, ctx, db, cfg.k);
            }
            Plan next = integrate(cur, partial, pair, db);
            shift += static_cast<int>(next.size()) - static_cast<int>(cur.size());
            if (next != cur) changed = true;
            cur = std::move(next);
        }
        if (changed) cur = normalize_plan(fuse_steps(cur, db), db);
    }
    return cur;
}

} // namespace bar
