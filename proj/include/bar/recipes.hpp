#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bar/domain.hpp"
#include "bar/errors.hpp"

namespace bar {

enum class RecipeKind { Craft, Smelt, Mine };
enum class Location { AboveGround, BelowGround, Any };

inline const char* recipe_kind_name(RecipeKind k) {
    switch (k) {
        case RecipeKind::Craft: return "craft";
        case RecipeKind::Smelt: return "smelt";
        case RecipeKind::Mine: return "mine";
    }
    return "?";
}

struct Ingredient {
    ItemId item;
    int count{1};
    bool operator==(const Ingredient&) const = default;
};

/// Data-driven crafting knowledge. Mine recipes have no inputs; Craft/Smelt
/// have at least one. Stations are required but never consumed.
struct Recipe {
    ItemId output;
    int out_count{1};
    RecipeKind kind{RecipeKind::Craft};
    std::vector<Ingredient> inputs;       // Craft/Smelt
    std::optional<ItemId> station;        // e.g. crafting_table, furnace
    std::optional<Ingredient> fuel;       // Smelt
    std::optional<ItemId> min_tool;       // Mine
    Location location{Location::Any};     // Mine
    bool reusable{false};                 // tools/stations capped at 1 by fusion
};

/// Item registry + recipes + tool-tier order, immutable after load.
class RecipeDb {
public:
    /// Tier index in the pickaxe order; barehand (absent tool) is below all.
    std::optional<int> tool_tier(const ItemId& t) const {
        for (size_t i = 0; i < tool_order_.size(); ++i)
            if (tool_order_[i] == t) return static_cast<int>(i);
        return std::nullopt;
    }

    /// True when `held` satisfies a "with at least `required`" demand.
    bool tool_satisfies(const ItemId& held, const ItemId& required) const {
        auto h = tool_tier(held), r = tool_tier(required);
        if (!r) return held == required;
        return h && *h >= *r;
    }

    const Recipe* find(const ItemId& item, RecipeKind kind) const {
        auto it = recipes_.find({item, kind});
        return it == recipes_.end() ? nullptr : &it->second;
    }

    /// Recipe used to obtain an item: craft, then smelt, then mine.
    const Recipe* recipe_for(const ItemId& item) const {
        for (auto k : {RecipeKind::Craft, RecipeKind::Smelt, RecipeKind::Mine})
            if (auto* r = find(item, k)) return r;
        return nullptr;
    }

    bool has_item(const ItemId& item) const { return items_.count(item) > 0; }
    bool is_reusable(const ItemId& item) const {
        auto* r = recipe_for(item);
        return r && r->reusable;
    }

    const std::set<ItemId>& items() const { return items_; }
    const std::vector<ItemId>& tool_order() const { return tool_order_; }
    const std::map<std::pair<ItemId, RecipeKind>, Recipe>& recipes() const { return recipes_; }

    void add(Recipe r) {
        auto key = std::make_pair(r.output, r.kind);
        if (recipes_.count(key))
            throw DuplicateRecipe(r.output.name, recipe_kind_name(r.kind));
        items_.insert(r.output);
        recipes_.emplace(std::move(key), std::move(r));
    }

    void set_tool_order(std::vector<ItemId> order) { tool_order_ = std::move(order); }

    /// Referenced-item closure and acyclicity. Every input/station/fuel/
    /// min_tool must be producible; the output->input graph must be a DAG so
    /// backward decomposition terminates.
    void validate() const {
        for (const auto& [key, r] : recipes_) {
            if (r.kind == RecipeKind::Mine && !r.inputs.empty())
                throw Error("mine recipe for " + r.output.name + " must not have inputs");
            if (r.kind != RecipeKind::Mine && r.inputs.empty())
                throw Error("recipe for " + r.output.name + " needs at least one input");
            for (const auto& in : r.inputs)
                if (!items_.count(in.item)) throw UnknownItem(in.item.name);
            if (r.station && !items_.count(*r.station)) throw UnknownItem(r.station->name);
            if (r.fuel && !items_.count(r.fuel->item)) throw UnknownItem(r.fuel->item.name);
            if (r.min_tool) {
                if (!items_.count(*r.min_tool)) throw UnknownItem(r.min_tool->name);
                if (!tool_tier(*r.min_tool))
                    throw Error("min_tool " + r.min_tool->name + " not in tool_order");
            }
        }
        for (const auto& t : tool_order_)
            if (!items_.count(t)) throw UnknownItem(t.name);
        check_acyclic();
    }

private:
    // DFS over output -> (inputs, station, fuel, min_tool) edges.
    void check_acyclic() const {
        std::map<ItemId, int> color; // 0 white, 1 gray, 2 black
        std::vector<ItemId> stack;
        for (const auto& item : items_)
            if (!color[item]) visit(item, color, stack);
    }

    void visit(const ItemId& item, std::map<ItemId, int>& color, std::vector<ItemId>& stack) const {
        color[item] = 1;
        stack.push_back(item);
        for (auto k : {RecipeKind::Craft, RecipeKind::Smelt, RecipeKind::Mine}) {
            auto it = recipes_.find({item, k});
            if (it == recipes_.end()) continue;
            const Recipe& r = it->second;
            std::vector<ItemId> deps;
            for (const auto& in : r.inputs) deps.push_back(in.item);
            if (r.station) deps.push_back(*r.station);
            if (r.fuel) deps.push_back(r.fuel->item);
            if (r.min_tool) deps.push_back(*r.min_tool);
            for (const auto& d : deps) {
                if (color[d] == 1) {
                    std::string path;
                    for (auto s = stack.rbegin(); s != stack.rend(); ++s) {
                        path = s->name + " -> " + path;
                        if (*s == d) break;
                    }
                    throw RecipeCycle(path + d.name);
                }
                if (color[d] == 0) visit(d, color, stack);
            }
        }
        stack.pop_back();
        color[item] = 2;
    }

    std::set<ItemId> items_;
    std::map<std::pair<ItemId, RecipeKind>, Recipe> recipes_;
    std::vector<ItemId> tool_order_;
};

// ============================================================================
// Recipe file
//
// JSON document: {"tool_order": [...], "recipes": [{"output", "count",
// "kind", "inputs": [{"item","count"}], "station", "fuel", "min_tool",
// "location", "reusable"}]}
// ============================================================================

inline RecipeDb load_recipe_db(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("recipe file is not valid JSON: ") + e.what());
    }

    RecipeDb db;
    std::vector<ItemId> order;
    for (const auto& t : doc.value("tool_order", nlohmann::json::array()))
        order.emplace_back(t.get<std::string>());
    db.set_tool_order(std::move(order));

    if (!doc.contains("recipes") || !doc["recipes"].is_array())
        throw Error("recipe file missing \"recipes\" array");
    for (const auto& jr : doc["recipes"]) {
        Recipe r;
        r.output = ItemId{jr.at("output").get<std::string>()};
        if (!valid_item_token(r.output.name)) throw UnknownItem(r.output.name);
        r.out_count = jr.value("count", 1);
        if (r.out_count < 1) throw Error("recipe for " + r.output.name + " has count < 1");
        auto kind = jr.value("kind", "craft");
        if (kind == "craft") r.kind = RecipeKind::Craft;
        else if (kind == "smelt") r.kind = RecipeKind::Smelt;
        else if (kind == "mine") r.kind = RecipeKind::Mine;
        else throw Error("recipe for " + r.output.name + " has unknown kind " + kind);
        for (const auto& ji : jr.value("inputs", nlohmann::json::array())) {
            Ingredient in;
            in.item = ItemId{ji.at("item").get<std::string>()};
            in.count = ji.value("count", 1);
            if (in.count < 1) throw Error("input count < 1 in recipe for " + r.output.name);
            r.inputs.push_back(std::move(in));
        }
        if (jr.contains("station")) r.station = ItemId{jr["station"].get<std::string>()};
        if (jr.contains("fuel")) {
            Ingredient f;
            f.item = ItemId{jr["fuel"].at("item").get<std::string>()};
            f.count = jr["fuel"].value("count", 1);
            r.fuel = std::move(f);
        }
        if (jr.contains("min_tool")) r.min_tool = ItemId{jr["min_tool"].get<std::string>()};
        auto loc = jr.value("location", "any");
        if (loc == "above_ground") r.location = Location::AboveGround;
        else if (loc == "below_ground") r.location = Location::BelowGround;
        else if (loc == "any") r.location = Location::Any;
        else throw Error("recipe for " + r.output.name + " has unknown location " + loc);
        r.reusable = jr.value("reusable", false);
        db.add(std::move(r));
    }
    db.validate();
    return db;
}

inline RecipeDb load_recipe_db_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open recipe file: " + path);
    return load_recipe_db(in);
}

/// Step-level validation against the registry (parser accepts grammar only).
inline void validate_step_items(const Step& s, const RecipeDb& db) {
    if (s.item && !db.has_item(*s.item))
        throw MalformedStep(render_step(s), "unregistered item " + s.item->name);
    if (s.tool && !db.has_item(*s.tool))
        throw MalformedStep(render_step(s), "unregistered tool " + s.tool->name);
}

inline void validate_goal_items(const Goal& g, const RecipeDb& db) {
    if (g.kind == GoalKind::ObtainItem && !db.has_item(g.item))
        throw MalformedGoal(render_goal(g), "unregistered item " + g.item.name);
    if (g.kind == GoalKind::ReachBelowGround && !db.has_item(g.tool))
        throw MalformedGoal(render_goal(g), "unregistered tool " + g.tool.name);
}

} // namespace bar
