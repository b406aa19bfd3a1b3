#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bar/errors.hpp"

namespace bar {

// ============================================================================
// Items and quantities
// ============================================================================

/// Lowercase token naming an item ("wooden_pickaxe", "log", ...).
struct ItemId {
    std::string name;

    ItemId() = default;
    explicit ItemId(std::string n) : name(std::move(n)) {}

    bool operator==(const ItemId&) const = default;
    auto operator<=>(const ItemId&) const = default;
};

inline bool valid_item_token(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

// ============================================================================
// Steps
// ============================================================================

enum class StepVerb { Mine, Craft, Smelt, Equip, DigDown };

inline const char* verb_name(StepVerb v) {
    switch (v) {
        case StepVerb::Mine: return "Mine";
        case StepVerb::Craft: return "Craft";
        case StepVerb::Smelt: return "Smelt";
        case StepVerb::Equip: return "Equip";
        case StepVerb::DigDown: return "Dig down";
    }
    return "?";
}

/// One executable plan step. DigDown carries a tool but no item/quantity.
/// An absent tool renders as "with barehand" on Mine steps.
struct Step {
    StepVerb verb{StepVerb::Mine};
    std::optional<ItemId> item;
    int qty{0};
    std::optional<ItemId> tool;

    bool operator==(const Step&) const = default;

    static Step mine(ItemId it, int n, std::optional<ItemId> t = std::nullopt) {
        return Step{StepVerb::Mine, std::move(it), n, std::move(t)};
    }
    static Step craft(ItemId it, int n) { return Step{StepVerb::Craft, std::move(it), n, std::nullopt}; }
    static Step smelt(ItemId it, int n) { return Step{StepVerb::Smelt, std::move(it), n, std::nullopt}; }
    static Step equip(ItemId it) { return Step{StepVerb::Equip, std::move(it), 1, std::nullopt}; }
    static Step dig_down(ItemId t) { return Step{StepVerb::DigDown, std::nullopt, 0, std::move(t)}; }

    /// Merge key: steps fuse when verb, item and tool all agree.
    bool same_kind(const Step& o) const {
        return verb == o.verb && item == o.item && tool == o.tool;
    }
};

using Plan = std::vector<Step>;

// ============================================================================
// Goals
// ============================================================================

enum class GoalKind { ObtainItem, ReachBelowGround };

/// A goal to be decomposed. "obtain"/"collect" phrasing normalizes away.
struct Goal {
    GoalKind kind{GoalKind::ObtainItem};
    ItemId item;       // ObtainItem only
    int qty{0};        // ObtainItem only
    ItemId tool;       // ReachBelowGround only

    bool operator==(const Goal&) const = default;
    auto operator<=>(const Goal&) const = default;

    static Goal obtain(ItemId it, int n) { return Goal{GoalKind::ObtainItem, std::move(it), n, ItemId{}}; }
    static Goal reach_below(ItemId t) { return Goal{GoalKind::ReachBelowGround, ItemId{}, 0, std::move(t)}; }
};

// ============================================================================
// Text grammar
//
//   step := ("Mine"|"Craft"|"Smelt"|"Equip") <int> <item> [" with " <tool>]
//         | "Dig down with " <tool>
//   goal := ("obtain"|"collect") <int> <item> | "dig down with " <tool>
//
// Step lines may carry a leading "N. " index. "with barehand" parses to an
// absent tool. Case-insensitive on the leading verb, as the paper's prompts
// mix "craft 1 stick" and "Craft 1 stick".
// ============================================================================

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

/// Strips an optional "N. " or "N) " list prefix.
inline std::string_view strip_index(std::string_view s) {
    s = trim(s);
    size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')')) {
        auto rest = trim(s.substr(i + 1));
        if (!rest.empty()) return rest;
    }
    return s;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (size_t i = 0; i < prefix.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(s[i])) !=
            std::tolower(static_cast<unsigned char>(prefix[i])))
            return false;
    }
    return true;
}

inline std::optional<int> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    int v = 0;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
        v = v * 10 + (c - '0');
        if (v > 1000000) return std::nullopt;
    }
    return v;
}

} // namespace detail

/// Splits "<qty> <item>[ with <tool>]" after a verb. Throws MalformedStep.
inline Step parse_step(std::string_view text) {
    using namespace detail;
    const std::string original(text);
    std::string_view s = strip_index(text);
    if (s.empty()) throw MalformedStep(original, "empty line");

    if (starts_with_ci(s, "dig down")) {
        auto rest = trim(s.substr(8));
        if (!starts_with_ci(rest, "with "))
            throw MalformedStep(original, "dig down requires \"with <tool>\"");
        auto tool = lower(trim(rest.substr(5)));
        if (tool == "barehand" || !valid_item_token(tool))
            throw MalformedStep(original, "dig down requires a real tool");
        return Step::dig_down(ItemId{tool});
    }

    StepVerb verb;
    size_t verb_len;
    if (starts_with_ci(s, "mine ")) { verb = StepVerb::Mine; verb_len = 5; }
    else if (starts_with_ci(s, "craft ")) { verb = StepVerb::Craft; verb_len = 6; }
    else if (starts_with_ci(s, "smelt ")) { verb = StepVerb::Smelt; verb_len = 6; }
    else if (starts_with_ci(s, "equip ")) { verb = StepVerb::Equip; verb_len = 6; }
    else throw MalformedStep(original, "unknown verb");

    auto rest = trim(s.substr(verb_len));
    std::optional<ItemId> tool;
    // " with " splits item part from tool part; only Mine may carry one.
    if (auto pos = lower(rest).rfind(" with "); pos != std::string::npos) {
        auto tool_name = lower(trim(rest.substr(pos + 6)));
        if (!valid_item_token(tool_name)) throw MalformedStep(original, "bad tool name");
        if (tool_name != "barehand") tool = ItemId{tool_name};
        rest = trim(rest.substr(0, pos));
        if (verb != StepVerb::Mine)
            throw MalformedStep(original, "only Mine steps may carry a tool");
    }

    int qty = 1;
    std::string item_part(rest);
    if (verb != StepVerb::Equip || rest.find(' ') != std::string_view::npos) {
        auto sp = rest.find(' ');
        if (sp == std::string_view::npos)
            throw MalformedStep(original, "expected \"<count> <item>\"");
        auto n = parse_int(rest.substr(0, sp));
        if (!n) throw MalformedStep(original, "bad quantity");
        if (*n <= 0) throw MalformedStep(original, "quantity must be positive");
        qty = *n;
        item_part = std::string(trim(rest.substr(sp + 1)));
    }
    auto item = lower(item_part);
    if (!valid_item_token(item)) throw MalformedStep(original, "bad item name");
    return Step{verb, ItemId{item}, qty, std::move(tool)};
}

/// Canonical text for a step; inverse of parse_step.
inline std::string render_step(const Step& s) {
    if (s.verb == StepVerb::DigDown)
        return "Dig down with " + s.tool->name;
    std::string out = verb_name(s.verb);
    if (s.verb == StepVerb::Equip) {
        out += " 1 " + s.item->name;
        return out;
    }
    out += " " + std::to_string(s.qty) + " " + s.item->name;
    if (s.verb == StepVerb::Mine)
        out += " with " + (s.tool ? s.tool->name : std::string("barehand"));
    return out;
}

inline Goal parse_goal(std::string_view text) {
    using namespace detail;
    const std::string original(text);
    std::string_view s = trim(text);
    while (!s.empty() && (s.back() == '.' || s.back() == '!')) { s.remove_suffix(1); s = trim(s); }
    if (s.empty()) throw MalformedGoal(original, "empty text");

    if (starts_with_ci(s, "dig down")) {
        auto rest = trim(s.substr(8));
        if (!starts_with_ci(rest, "with "))
            throw MalformedGoal(original, "dig down requires \"with <tool>\"");
        auto tool = lower(trim(rest.substr(5)));
        if (!valid_item_token(tool) || tool == "barehand")
            throw MalformedGoal(original, "dig down requires a real tool");
        return Goal::reach_below(ItemId{tool});
    }

    size_t verb_len = 0;
    if (starts_with_ci(s, "obtain ")) verb_len = 7;
    else if (starts_with_ci(s, "collect ")) verb_len = 8;
    else throw MalformedGoal(original, "expected obtain/collect/dig down");

    auto rest = trim(s.substr(verb_len));
    auto sp = rest.find(' ');
    if (sp == std::string_view::npos) throw MalformedGoal(original, "expected \"<count> <item>\"");
    auto n = parse_int(rest.substr(0, sp));
    if (!n || *n <= 0) throw MalformedGoal(original, "bad quantity");
    auto item = lower(trim(rest.substr(sp + 1)));
    if (!valid_item_token(item)) throw MalformedGoal(original, "bad item name");
    return Goal::obtain(ItemId{item}, *n);
}

/// Canonical goal text ("obtain 3 stone", "dig down with wooden_pickaxe").
inline std::string render_goal(const Goal& g) {
    if (g.kind == GoalKind::ReachBelowGround)
        return "dig down with " + g.tool.name;
    return "obtain " + std::to_string(g.qty) + " " + g.item.name;
}

// ============================================================================
// Plan text: numbered lines "i. <step>", 1-based.
// ============================================================================

inline std::string render_plan(const Plan& plan) {
    std::string out;
    for (size_t i = 0; i < plan.size(); ++i) {
        out += std::to_string(i + 1) + ". " + render_step(plan[i]) + "\n";
    }
    return out;
}

/// Parses numbered or bare step lines; blank lines are skipped.
inline Plan parse_plan(std::string_view text) {
    Plan plan;
    size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = detail::trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
        if (!line.empty()) plan.push_back(parse_step(line));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return plan;
}

} // namespace bar
