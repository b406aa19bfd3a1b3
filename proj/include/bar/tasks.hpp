#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/recipes.hpp"

namespace bar {

/// One benchmark task: a goal plus its annotated ground-truth plan.
struct Task {
    std::string id;
    std::string group;      // stone | iron | diamond | redstone | gold
    std::string goal_text;  // original phrasing, used verbatim in prompts
    Goal goal;
    Plan ground_truth;
};

inline std::vector<Task> load_tasks(std::istream& in, const RecipeDb& db) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("task file is not valid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw Error("task file must be a JSON array");

    std::vector<Task> tasks;
    for (const auto& jt : doc) {
        Task t;
        t.id = jt.at("id").get<std::string>();
        t.group = jt.at("group").get<std::string>();
        t.goal_text = jt.at("goal").get<std::string>();
        t.goal = parse_goal(t.goal_text);
        validate_goal_items(t.goal, db);
        for (const auto& line : jt.at("ground_truth")) {
            auto s = parse_step(line.get<std::string>());
            validate_step_items(s, db);
            t.ground_truth.push_back(std::move(s));
        }
        if (t.ground_truth.empty())
            throw Error("task " + t.id + " has an empty ground truth");
        tasks.push_back(std::move(t));
    }
    return tasks;
}

inline std::vector<Task> load_tasks_file(const std::string& path, const RecipeDb& db) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open task file: " + path);
    return load_tasks(in, db);
}

} // namespace bar
