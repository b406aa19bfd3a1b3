#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/recipes.hpp"

namespace bar {

/// One decomposition: the step that directly achieves the goal plus the
/// sub-goals that must hold before it can execute.
struct DecompositionResult {
    Step step;
    std::vector<Goal> sub_goals;
    std::string thought; // optional free-text rationale (remote backend)

    bool operator==(const DecompositionResult& o) const {
        return step == o.step && sub_goals == o.sub_goals;
    }
};

/// Test-only fault injection for the oracle backend.
enum class FaultProfile {
    None,
    OmitDigDown, // drop every ReachBelowGround sub-goal; reproduces the
                 // missing-dig state conflict the consistency module repairs
};

/// Interface shared by the recipe oracle and the remote (LLM) backend.
class Decomposer {
public:
    virtual ~Decomposer() = default;
    virtual DecompositionResult decompose(const Goal& goal,
                                          const std::optional<DecompositionResult>& hint) = 0;
};

/// Deterministic decomposer backed by the recipe database.
///
/// ObtainItem(x, n) with a craft/smelt recipe: step = Craft/Smelt the
/// batch-rounded quantity, sub-goals = inputs scaled by ceil(n/out_count)
/// in recipe order, then fuel, then station. With a mine recipe: step =
/// Mine n x with min_tool; sub-goals = the tool, then reaching below ground
/// when the recipe demands it. ReachBelowGround(t): step = DigDown(t), no
/// sub-goals (the tool goal is queued by the parent mine decomposition).
class RecipeOracle final : public Decomposer {
public:
    explicit RecipeOracle(const RecipeDb& db, FaultProfile fault = FaultProfile::None)
        : db_(&db), fault_(fault) {}

    DecompositionResult decompose(const Goal& goal,
                                  const std::optional<DecompositionResult>& hint) override {
        if (hint && hint_valid(goal, *hint)) return apply_fault(*hint);
        return apply_fault(fresh(goal));
    }

    /// Validated hints beat fresh output; an invalid hint is discarded.
    bool hint_valid(const Goal& goal, const DecompositionResult& hint) const {
        const Step& st = hint.step;
        if (goal.kind == GoalKind::ReachBelowGround)
            return st.verb == StepVerb::DigDown && st.tool && db_->has_item(*st.tool);
        if (!st.item || *st.item != goal.item) return false;
        if (st.tool && !db_->has_item(*st.tool)) return false;
        RecipeKind kind;
        switch (st.verb) {
            case StepVerb::Craft: kind = RecipeKind::Craft; break;
            case StepVerb::Smelt: kind = RecipeKind::Smelt; break;
            case StepVerb::Mine: kind = RecipeKind::Mine; break;
            default: return false;
        }
        const Recipe* r = db_->find(goal.item, kind);
        if (!r) return false;
        // Quantity must cover the goal and stay batch-consistent.
        int batches = (goal.qty + r->out_count - 1) / r->out_count;
        if (st.verb != StepVerb::Mine && st.qty != batches * r->out_count) return false;
        if (st.verb == StepVerb::Mine && st.qty < goal.qty) return false;
        for (const auto& g : hint.sub_goals) {
            if (g.kind == GoalKind::ObtainItem && !db_->has_item(g.item)) return false;
            if (g.kind == GoalKind::ReachBelowGround && !db_->has_item(g.tool)) return false;
        }
        return true;
    }

private:
    DecompositionResult fresh(const Goal& goal) const {
        DecompositionResult out;
        if (goal.kind == GoalKind::ReachBelowGround) {
            out.step = Step::dig_down(goal.tool);
            return out;
        }
        const Recipe* r = db_->recipe_for(goal.item);
        if (!r) throw NoRecipe(goal.item.name);

        if (r->kind == RecipeKind::Mine) {
            out.step = Step::mine(goal.item, goal.qty, r->min_tool);
            if (r->min_tool) out.sub_goals.push_back(Goal::obtain(*r->min_tool, 1));
            if (r->location == Location::BelowGround) {
                // The dig is paired with the mine's own tool; barehand mining
                // below ground would still need at least the lowest pickaxe.
                ItemId dig_tool = r->min_tool ? *r->min_tool : db_->tool_order().front();
                out.sub_goals.push_back(Goal::reach_below(dig_tool));
            }
            return out;
        }

        int batches = (goal.qty + r->out_count - 1) / r->out_count;
        int qty = batches * r->out_count;
        out.step = r->kind == RecipeKind::Craft ? Step::craft(goal.item, qty)
                                                : Step::smelt(goal.item, qty);
        for (const auto& in : r->inputs)
            out.sub_goals.push_back(Goal::obtain(in.item, in.count * batches));
        if (r->fuel)
            out.sub_goals.push_back(Goal::obtain(r->fuel->item, r->fuel->count * batches));
        if (r->station)
            out.sub_goals.push_back(Goal::obtain(*r->station, 1));
        return out;
    }

    DecompositionResult apply_fault(DecompositionResult d) const {
        if (fault_ == FaultProfile::OmitDigDown) {
            std::erase_if(d.sub_goals, [](const Goal& g) {
                return g.kind == GoalKind::ReachBelowGround;
            });
        }
        return d;
    }

    const RecipeDb* db_;
    FaultProfile fault_;
};

} // namespace bar
