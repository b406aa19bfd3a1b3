#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bar/consistency.hpp"
#include "bar/decomposer.hpp"
#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/recipes.hpp"

namespace bar {

// ============================================================================
// Prompt protocol
//
// The four prompts of the agent (goal decomposition, step rating, partial
// plan completion, plan integration) and the parsers for their responses.
// The texts are frozen; the golden files under tests/golden and the assets
// under data/prompts carry the same bytes.
// ============================================================================

namespace prompts {

inline constexpr std::string_view kDecomposeSystem =
    "You are a helpful assistant in Minecraft. I will give you a goal to achieve in "
    "Minecraft, and you need to decompose the goal into a single step and a list of sub "
    "goals to achieve. Output the reasoning thought and the decomposed result. You can "
    "follow the history dialogue to make the decomposition.";

inline constexpr std::string_view kDecomposeExemplar =
    "========\n"
    "Goal: collect 3 stone.\n"
    "Thought:\n"
    "To collect 3 stone, the last step is to mine 3 stone with wooden_pickaxe, as mining "
    "the stone requires at least wooden_pickaxe. And the previous sub goals are to obtain "
    "1 wooden_pickaxe and dig down with wooden_pickaxe, because stone only appears at the "
    "below ground level. Based on these analysis, the decomposed result is as follows:\n"
    "Decomposed Step:\n"
    "Mine 3 stone with wooden_pickaxe\n"
    "Decomposed Sub Goals:\n"
    "1. Obtain 1 wooden_pickaxe\n"
    "2. Dig down with wooden_pickaxe\n"
    "========";

inline constexpr std::string_view kRateSystem =
    "You are a helpful assistant in Minecraft. I will give you a goal to achieve in "
    "Minecraft and the generated initial plan to achieve this goal. You need to rate for "
    "all the steps in the initial plan to evaluate the correctness of the steps on a "
    "scale of 1 to 10, where 1 indicating the next few steps starting from this step is "
    "likely to be wrong and 10 indicating the next few steps starting from this step is "
    "completely accurate.";

inline constexpr std::string_view kRateExemplar =
    "========\n"
    "Goal: collect 3 stone.\n"
    "Initial Plan:\n"
    "1. Mine 3 log with barehand\n"
    "2. Craft 9 planks\n"
    "3. Craft 2 stick\n"
    "4. Craft 1 crafting_table\n"
    "5. Craft 1 wooden_pickaxe\n"
    "6. Mine 3 stone with wooden_pickaxe\n"
    "Thought:\n"
    "As the stone only exists in below the ground, when executing the step \"Mine 3 stone "
    "with wooden_pickaxe\", the agent should be below the ground. However, before this "
    "step the agent is gathering materials and crafting items above the ground. So the "
    "latter half of the steps in the initial plan may not be executed successfully.\n"
    "Rating:\n"
    "1. Mine 3 log with barehand - 10\n"
    "2. Craft 9 planks - 8\n"
    "3. Craft 2 stick - 5\n"
    "4. Craft 1 crafting_table - 3\n"
    "5. Craft 1 wooden_pickaxe - 3\n"
    "6. Mine 3 stone with wooden_pickaxe - 5\n"
    "========";

inline constexpr std::string_view kCompleteSystem =
    "You are a helpful assistant in Minecraft. I will give you a task goal to achieve in "
    "Minecraft and a pair of start and end anchor steps chosen from the corresponding "
    "plan to achieve the task goal. You need to complement the partial plan between the "
    "start and end anchor steps to help achieve the task goal.";

inline constexpr std::string_view kCompleteExemplar =
    "========\n"
    "Goal: collect 3 stone.\n"
    "Start Anchor Step: Craft 1 crafting_table\n"
    "End Anchor Step: Mine 3 stone with wooden_pickaxe\n"
    "\n"
    "Thought:\n"
    "To achieve the task goal \"collect 3 stone\", starting from the step \"Craft 1 "
    "crafting_table\", next I need to craft 1 wooden_pickaxe to mine stone. But before "
    "mining stone, I need to reach below ground first as stone only exists underground. "
    "Finally I can mine 3 stone with wooden_pickaxe. Based on these analysis, the partial "
    "plan should be as follows:\n"
    "Partial Plan:\n"
    "Craft 1 crafting_table\n"
    "Craft 1 wooden_pickaxe\n"
    "Dig down with wooden_pickaxe\n"
    "Mine 3 stone with wooden_pickaxe\n"
    "========";

inline constexpr std::string_view kIntegrateSystem =
    "You are a helpful assistant in Minecraft. I will give you an initial plan to achieve "
    "a goal in Minecraft and a complementary partial plan. You need to compare the two "
    "plans and correct possible mistakes in the initial plan.";

inline constexpr std::string_view kIntegrateExemplar =
    "========\n"
    "Goal: collect 3 stone.\n"
    "\n"
    "Initial Plan:\n"
    "1. Mine 3 log with barehand\n"
    "2. Craft 9 planks\n"
    "3. Craft 2 stick\n"
    "4. Craft 1 crafting_table\n"
    "5. Craft 1 wooden_pickaxe\n"
    "6. Mine 3 stone with wooden_pickaxe\n"
    "\n"
    "Complementary Partial Plan:\n"
    "4. Craft 1 crafting_table\n"
    "5. Craft 1 wooden_pickaxe\n"
    "6. Dig down with wooden_pickaxe\n"
    "7. Mine 3 stone with wooden_pickaxe\n"
    "\n"
    "Thought:\n"
    "The initial plan ignores one important step \"Dig down with wooden_pickaxe\" that is "
    "presented in the complementary partial plan. As the stone is in below ground, the "
    "agent should reach below ground first and then mine the stone.\n"
    "\n"
    "Corrected Plan:\n"
    "1. Mine 3 log with barehand\n"
    "2. Craft 9 planks\n"
    "3. Craft 2 stick\n"
    "4. Craft 1 crafting_table\n"
    "5. Craft 1 wooden_pickaxe\n"
    "6. Dig down with wooden_pickaxe\n"
    "7. Mine 3 stone with wooden_pickaxe\n"
    "========";

} // namespace prompts

/// A prompt split into its chat roles; the flat text form carries literal
/// System:/User:/Assistant: markers, matching how the templates are printed.
struct PromptParts {
    std::string system;
    std::string user;

    std::string flat() const {
        return "System:\n" + system + "\n\nUser:\n" + user + "\nAssistant:\n";
    }
};

namespace detail {

inline std::string join_blocks(const std::vector<std::string>& exemplars, const std::string& query) {
    std::string user;
    for (const auto& e : exemplars) user += e + "\n\n";
    user += query;
    return user;
}

/// Plan as numbered lines without the trailing newline.
inline std::string plan_block(const Plan& plan) {
    std::string s = render_plan(plan);
    if (!s.empty() && s.back() == '\n') s.pop_back();
    return s;
}

} // namespace detail

inline PromptParts format_decompose_prompt(const std::string& goal_text,
                                           const std::vector<std::string>& exemplars = {
                                               std::string(prompts::kDecomposeExemplar)}) {
    std::string query = "========\nGoal: " + goal_text + "\nThought:\n";
    return {std::string(prompts::kDecomposeSystem), detail::join_blocks(exemplars, query)};
}

inline PromptParts format_rate_prompt(const std::string& goal_text, const Plan& plan,
                                      const std::vector<std::string>& exemplars = {
                                          std::string(prompts::kRateExemplar)}) {
    std::string query = "========\nGoal: " + goal_text + "\nInitial Plan:\n" +
                        detail::plan_block(plan) + "\nThought:\n";
    return {std::string(prompts::kRateSystem), detail::join_blocks(exemplars, query)};
}

inline PromptParts format_complete_prompt(const std::string& goal_text, const Step& start,
                                          const Step& end,
                                          const std::vector<std::string>& exemplars = {
                                              std::string(prompts::kCompleteExemplar)}) {
    std::string query = "========\nGoal: " + goal_text +
                        "\nStart Anchor Step: " + render_step(start) +
                        "\nEnd Anchor Step: " + render_step(end) + "\n\nThought:\n";
    return {std::string(prompts::kCompleteSystem), detail::join_blocks(exemplars, query)};
}

inline PromptParts format_integrate_prompt(const std::string& goal_text, const Plan& initial,
                                           const Plan& partial,
                                           const std::vector<std::string>& exemplars = {
                                               std::string(prompts::kIntegrateExemplar)}) {
    std::string query = "========\nGoal: " + goal_text + "\n\nInitial Plan:\n" +
                        detail::plan_block(initial) + "\n\nComplementary Partial Plan:\n" +
                        detail::plan_block(partial) + "\n\nThought:\n";
    return {std::string(prompts::kIntegrateSystem), detail::join_blocks(exemplars, query)};
}

// ============================================================================
// Response parsers — tolerant of surrounding thought text.
// ============================================================================

namespace detail {

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        lines.emplace_back(trim(line));
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return lines;
}

/// Index of the last line equal to `header` (headers may appear in echoed
/// exemplars; the response's own section comes last).
inline std::optional<size_t> last_header(const std::vector<std::string>& lines,
                                         std::string_view header) {
    std::optional<size_t> found;
    for (size_t i = 0; i < lines.size(); ++i)
        if (lines[i] == header) found = i;
    return found;
}

inline bool is_fence(const std::string& line) {
    return line.size() >= 4 && line.find_first_not_of('=') == std::string::npos;
}

} // namespace detail

/// Extracts the single step after "Decomposed Step:" and the numbered goals
/// after "Decomposed Sub Goals:".
inline DecompositionResult parse_decompose_response(const std::string& text,
                                                    const RecipeDb* db = nullptr) {
    auto lines = detail::split_lines(text);
    auto step_at = detail::last_header(lines, "Decomposed Step:");
    auto goals_at = detail::last_header(lines, "Decomposed Sub Goals:");
    if (!step_at) throw RemoteParseError("missing \"Decomposed Step:\" header", text);
    if (!goals_at) throw RemoteParseError("missing \"Decomposed Sub Goals:\" header", text);

    DecompositionResult out;
    bool have_step = false;
    for (size_t i = *step_at + 1; i < lines.size() && i < *goals_at; ++i) {
        if (lines[i].empty() || detail::is_fence(lines[i])) continue;
        try {
            out.step = parse_step(lines[i]);
            if (db) validate_step_items(out.step, *db);
        } catch (const Error& e) {
            throw RemoteParseError(e.what(), text);
        }
        have_step = true;
        break;
    }
    if (!have_step) throw RemoteParseError("no step line after \"Decomposed Step:\"", text);

    for (size_t i = *goals_at + 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty() || detail::is_fence(line)) break;
        if (!std::isdigit(static_cast<unsigned char>(line.front()))) break;
        try {
            Goal g = parse_goal(detail::strip_index(line));
            if (db) validate_goal_items(g, *db);
            out.sub_goals.push_back(std::move(g));
        } catch (const Error& e) {
            throw RemoteParseError(e.what(), text);
        }
    }
    return out;
}

/// Parses "i. <step> - <score>" rating lines, in order.
inline std::vector<StepRating> parse_rating_response(const std::string& text) {
    auto lines = detail::split_lines(text);
    size_t from = 0;
    if (auto at = detail::last_header(lines, "Rating:")) from = *at + 1;

    std::vector<StepRating> ratings;
    for (size_t i = from; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty() || detail::is_fence(line)) {
            if (!ratings.empty()) break;
            continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(line.front()))) {
            if (!ratings.empty()) break;
            continue;
        }
        auto dash = line.rfind(" - ");
        if (dash == std::string::npos) continue;
        auto score = detail::parse_int(detail::trim(std::string_view(line).substr(dash + 3)));
        if (!score || *score < 1 || *score > 10)
            throw RemoteParseError("rating score out of range in \"" + line + "\"", text);
        ratings.push_back({static_cast<int>(ratings.size()) + 1, *score});
    }
    if (ratings.empty()) throw RemoteParseError("no rating lines found", text);
    return ratings;
}

/// Steps after "Partial Plan:", numbered or bare, until a fence.
inline Plan parse_partial_plan_response(const std::string& text, const RecipeDb* db = nullptr) {
    auto lines = detail::split_lines(text);
    auto at = detail::last_header(lines, "Partial Plan:");
    if (!at) throw RemoteParseError("missing \"Partial Plan:\" header", text);
    Plan plan;
    for (size_t i = *at + 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty() || detail::is_fence(line)) break;
        try {
            Step s = parse_step(line);
            if (db) validate_step_items(s, *db);
            plan.push_back(std::move(s));
        } catch (const Error& e) {
            throw RemoteParseError(e.what(), text);
        }
    }
    if (plan.empty()) throw RemoteParseError("no steps after \"Partial Plan:\"", text);
    return plan;
}

/// Numbered steps after "Corrected Plan:".
inline Plan parse_corrected_plan_response(const std::string& text, const RecipeDb* db = nullptr) {
    auto lines = detail::split_lines(text);
    auto at = detail::last_header(lines, "Corrected Plan:");
    if (!at) throw RemoteParseError("missing \"Corrected Plan:\" header", text);
    Plan plan;
    for (size_t i = *at + 1; i < lines.size(); ++i) {
        const auto& line = lines[i];
        if (line.empty() || detail::is_fence(line)) break;
        try {
            Step s = parse_step(line);
            if (db) validate_step_items(s, *db);
            plan.push_back(std::move(s));
        } catch (const Error& e) {
            throw RemoteParseError(e.what(), text);
        }
    }
    if (plan.empty()) throw RemoteParseError("no steps after \"Corrected Plan:\"", text);
    return plan;
}

// ============================================================================
// Versioned template assets: the text written to data/prompts/<name>.txt.
// Placeholders ({goal}, {initial plan}, ...) mark the slots the formatters
// fill.
// ============================================================================

inline std::string prompt_template_text(const std::string& name) {
    using namespace prompts;
    if (name == "decompose")
        return PromptParts{std::string(kDecomposeSystem),
                           detail::join_blocks({std::string(kDecomposeExemplar)},
                                               "========\nGoal: {goal}\nThought:\n")}
            .flat();
    if (name == "rate")
        return PromptParts{std::string(kRateSystem),
                           detail::join_blocks({std::string(kRateExemplar)},
                                               "========\nGoal: {goal}\nInitial Plan:\n"
                                               "{initial plan}\nThought:\n")}
            .flat();
    if (name == "complete")
        return PromptParts{std::string(kCompleteSystem),
                           detail::join_blocks({std::string(kCompleteExemplar)},
                                               "========\nGoal: {goal}\nStart Anchor Step: "
                                               "{start anchor step}\nEnd Anchor Step: "
                                               "{end anchor step}\n\nThought:\n")}
            .flat();
    if (name == "integrate")
        return PromptParts{std::string(kIntegrateSystem),
                           detail::join_blocks({std::string(kIntegrateExemplar)},
                                               "========\nGoal: {goal}\n\nInitial Plan:\n"
                                               "{initial plan}\n\nComplementary Partial "
                                               "Plan:\n{partial plan}\n\nThought:\n")}
            .flat();
    throw Error("unknown prompt template: " + name);
}

} // namespace bar
