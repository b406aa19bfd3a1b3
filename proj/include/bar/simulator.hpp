#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "bar/domain.hpp"
#include "bar/recipes.hpp"

namespace bar {

// ============================================================================
// World state
// ============================================================================

enum class Position { AboveGround, BelowGround };

/// Inventory multiset + vertical location + equipped tool. The initial state
/// is an empty inventory above ground with nothing equipped.
struct WorldState {
    std::map<ItemId, int> inventory;
    Position location{Position::AboveGround};
    std::optional<ItemId> equipped;

    int count(const ItemId& item) const {
        auto it = inventory.find(item);
        return it == inventory.end() ? 0 : it->second;
    }
    void add(const ItemId& item, int n) {
        if (n > 0) inventory[item] += n;
    }
    void remove(const ItemId& item, int n) {
        auto it = inventory.find(item);
        it->second -= n;
        if (it->second <= 0) inventory.erase(it); // zero-count entries removed
    }

    bool operator==(const WorldState&) const = default;
};

enum class FailReason { MissingMaterials, MissingStation, MissingTool, WrongLocation, UnknownRecipe };

inline const char* fail_reason_name(FailReason r) {
    switch (r) {
        case FailReason::MissingMaterials: return "missing_materials";
        case FailReason::MissingStation: return "missing_station";
        case FailReason::MissingTool: return "missing_tool";
        case FailReason::WrongLocation: return "wrong_location";
        case FailReason::UnknownRecipe: return "unknown_recipe";
    }
    return "?";
}

/// Failed steps leave the state untouched (steps are atomic).
struct StepOutcome {
    Step step;
    bool completed{false};
    std::optional<FailReason> reason;
    std::string detail;
    WorldState state_after;
};

// ============================================================================
// Stochastic mining profile
// ============================================================================

/// Per-item probability that one mined unit actually yields. All defaults
/// at 1.0 make the simulator fully deterministic; lower values stand in for
/// scarce ore placement.
struct StochasticProfile {
    std::map<ItemId, double> mine_yield;
    std::uint64_t seed{0};

    double yield_for(const ItemId& item) const {
        auto it = mine_yield.find(item);
        return it == mine_yield.end() ? 1.0 : it->second;
    }
    bool deterministic() const {
        for (const auto& [_, p] : mine_yield)
            if (p < 1.0) return false;
        return true;
    }
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

} // namespace detail

/// Deterministic per-run generator derived from (base seed, run index).
class SimRng {
public:
    explicit SimRng(std::uint64_t base_seed, std::uint64_t run_index = 0)
        : engine_(detail::splitmix64(base_seed ^ detail::splitmix64(run_index + 1))) {}

    bool bernoulli(double p) {
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        return std::uniform_real_distribution<double>(0.0, 1.0)(engine_) < p;
    }

private:
    std::mt19937_64 engine_;
};

// ============================================================================
// Step execution
// ============================================================================

/// Applies one step to a state. Crafting consumes inputs and requires the
/// station to be present (it is returned to the inventory, never consumed);
/// smelting additionally burns fuel. Mining checks location and tool tier;
/// tools auto-equip. Digging down moves the agent below ground for the rest
/// of the plan.
inline StepOutcome simulate_step(const WorldState& state, const Step& step, const RecipeDb& db,
                                 const StochasticProfile& profile, SimRng* rng = nullptr) {
    StepOutcome out;
    out.step = step;
    out.state_after = state;

    auto fail = [&](FailReason r, std::string detail) {
        out.completed = false;
        out.reason = r;
        out.detail = std::move(detail);
        out.state_after = state;
        return out;
    };

    switch (step.verb) {
        case StepVerb::Craft:
        case StepVerb::Smelt: {
            RecipeKind kind = step.verb == StepVerb::Craft ? RecipeKind::Craft : RecipeKind::Smelt;
            const Recipe* r = step.item ? db.find(*step.item, kind) : nullptr;
            if (!r) return fail(FailReason::UnknownRecipe, "no recipe for " + render_step(step));
            int batches = (step.qty + r->out_count - 1) / r->out_count;
            if (r->station && state.count(*r->station) < 1)
                return fail(FailReason::MissingStation, r->station->name + " not in inventory");
            std::string missing;
            auto need = [&](const Ingredient& in, int mult) {
                int want = in.count * mult;
                if (state.count(in.item) < want) {
                    if (!missing.empty()) missing += ", ";
                    missing += std::to_string(want) + " " + in.item.name +
                               " (have " + std::to_string(state.count(in.item)) + ")";
                }
            };
            for (const auto& in : r->inputs) need(in, batches);
            if (r->fuel) need(*r->fuel, batches);
            if (!missing.empty()) return fail(FailReason::MissingMaterials, missing);

            for (const auto& in : r->inputs) out.state_after.remove(in.item, in.count * batches);
            if (r->fuel) out.state_after.remove(r->fuel->item, r->fuel->count * batches);
            out.state_after.add(*step.item, r->out_count * batches);
            out.completed = true;
            return out;
        }

        case StepVerb::Mine: {
            const Recipe* r = step.item ? db.find(*step.item, RecipeKind::Mine) : nullptr;
            if (!r) return fail(FailReason::UnknownRecipe,
                                step.item ? step.item->name + " is not minable" : "no item");
            if (r->location == Location::BelowGround && state.location != Position::BelowGround)
                return fail(FailReason::WrongLocation, step.item->name + " is only found below the ground");
            if (r->location == Location::AboveGround && state.location != Position::AboveGround)
                return fail(FailReason::WrongLocation, step.item->name + " is only found above the ground");
            if (r->min_tool) {
                std::optional<ItemId> held;
                // prefer the step's stated tool when it is actually held
                if (step.tool && state.count(*step.tool) > 0 && db.tool_satisfies(*step.tool, *r->min_tool))
                    held = *step.tool;
                if (!held) {
                    for (const auto& t : db.tool_order())
                        if (state.count(t) > 0 && db.tool_satisfies(t, *r->min_tool)) { held = t; break; }
                }
                if (!held)
                    return fail(FailReason::MissingTool,
                                "need at least " + r->min_tool->name + " to mine " + step.item->name);
                out.state_after.equipped = *held;
            }
            double p = profile.yield_for(*step.item);
            int got = 0;
            for (int i = 0; i < step.qty; ++i) {
                if (p >= 1.0 || (rng && rng->bernoulli(p)))
                    ++got;
            }
            out.state_after.add(*step.item, got);
            out.completed = true;
            if (got < step.qty)
                out.detail = "yielded " + std::to_string(got) + " of " + std::to_string(step.qty);
            return out;
        }

        case StepVerb::Equip: {
            if (state.count(*step.item) < 1)
                return fail(FailReason::MissingMaterials, step.item->name + " not in inventory");
            out.state_after.equipped = *step.item;
            out.completed = true;
            return out;
        }

        case StepVerb::DigDown: {
            // digging needs at least the lowest pickaxe tier in the inventory
            std::optional<ItemId> held;
            if (step.tool && state.count(*step.tool) > 0) held = *step.tool;
            if (!held && !db.tool_order().empty()) {
                for (const auto& t : db.tool_order())
                    if (state.count(t) > 0) { held = t; break; }
            }
            if (!held)
                return fail(FailReason::MissingTool, "no pickaxe to dig down with");
            out.state_after.equipped = *held;
            out.state_after.location = Position::BelowGround;
            out.completed = true;
            return out;
        }
    }
    return fail(FailReason::UnknownRecipe, "unreachable");
}

// ============================================================================
// Plan execution
// ============================================================================

enum class ExecutionMode { Strict, SkipFailures };

struct ExecutionReport {
    std::vector<StepOutcome> outcomes;
    bool goal_achieved{false};
    std::optional<int> failed_index; // 1-based position of the first failure
    double elapsed_ms{0.0};
    WorldState final_state;
};

inline bool goal_satisfied(const Goal& goal, const WorldState& state) {
    if (goal.kind == GoalKind::ReachBelowGround)
        return state.location == Position::BelowGround;
    return state.count(goal.item) >= goal.qty;
}

/// Strict mode stops at the first failure (dynamic-experiment semantics);
/// SkipFailures runs every step, skipping the failed ones (scorer semantics).
inline ExecutionReport execute_plan(const Goal& goal, const Plan& plan, const RecipeDb& db,
                                    const StochasticProfile& profile, ExecutionMode mode,
                                    std::uint64_t run_index = 0) {
    auto t0 = std::chrono::steady_clock::now();
    ExecutionReport report;
    SimRng rng(profile.seed, run_index);
    SimRng* rng_ptr = profile.deterministic() ? nullptr : &rng;

    WorldState state;
    for (size_t i = 0; i < plan.size(); ++i) {
        StepOutcome outcome = simulate_step(state, plan[i], db, profile, rng_ptr);
        bool ok = outcome.completed;
        state = outcome.state_after;
        report.outcomes.push_back(std::move(outcome));
        if (!ok) {
            if (!report.failed_index) report.failed_index = static_cast<int>(i) + 1;
            if (mode == ExecutionMode::Strict) break;
        }
    }
    report.final_state = state;
    report.goal_achieved = goal_satisfied(goal, state);
    report.elapsed_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0).count();
    return report;
}

/// Fraction of `runs` strict executions that achieve the goal; run seeds
/// derive deterministically from the profile seed plus the run index.
inline double success_rate(const Goal& goal, const Plan& plan, const RecipeDb& db,
                           const StochasticProfile& profile, int runs) {
    int achieved = 0;
    for (int r = 0; r < runs; ++r) {
        auto report = execute_plan(goal, plan, db, profile, ExecutionMode::Strict,
                                   static_cast<std::uint64_t>(r));
        if (report.goal_achieved) ++achieved;
    }
    return runs > 0 ? static_cast<double>(achieved) / runs : 0.0;
}

// ============================================================================
// Report serialization
// ============================================================================

inline nlohmann::ordered_json execution_report_json(const ExecutionReport& report) {
    nlohmann::ordered_json j;
    j["outcomes"] = nlohmann::ordered_json::array();
    for (const auto& o : report.outcomes) {
        nlohmann::ordered_json jo;
        jo["step"] = render_step(o.step);
        jo["status"] = o.completed ? "completed" : "failed";
        if (o.reason) jo["reason"] = fail_reason_name(*o.reason);
        if (!o.detail.empty()) jo["detail"] = o.detail;
        j["outcomes"].push_back(std::move(jo));
    }
    j["goal_achieved"] = report.goal_achieved;
    if (report.failed_index)
        j["failed_index"] = *report.failed_index;
    else
        j["failed_index"] = nullptr;
    j["elapsed_ms"] = report.elapsed_ms;
    return j;
}

} // namespace bar
