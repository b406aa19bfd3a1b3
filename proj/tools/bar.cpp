// bar — backward-reasoning crafting planner CLI.
//
//   bar plan      print the plan for one goal
//   bar run       static/dynamic experiment over the bundled dataset
//   bar eval      score a generated plan file against a ground-truth file
//   bar simulate  execute a plan file and print the execution report

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bar/consistency.hpp"
#include "bar/decomposer.hpp"
#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/harness.hpp"
#include "bar/metrics.hpp"
#include "bar/planner.hpp"
#include "bar/recipes.hpp"
#include "bar/remote.hpp"
#include "bar/simulator.hpp"
#include "bar/stage_memory.hpp"
#include "bar/tasks.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bar::Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string recipes = "data/recipes.json";
    std::string consistency = "scoring";
    int t = 5;
    int k = 3;
    int consistency_rounds = 1;
    std::string decomposer = "oracle";
    std::string endpoint;
    std::string fault = "none";
    std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--recipes", o.recipes, "recipe database file");
    cmd->add_option("--consistency", o.consistency, "scoring|window|off")
        ->check(CLI::IsMember({"scoring", "window", "off"}));
    cmd->add_option("-t", o.t, "step-score threshold")->check(CLI::Range(1, 10));
    cmd->add_option("-k", o.k, "anchor window length")->check(CLI::PositiveNumber);
    cmd->add_option("--consistency-rounds", o.consistency_rounds, "score/repair passes");
    cmd->add_option("--decomposer", o.decomposer, "oracle|remote")
        ->check(CLI::IsMember({"oracle", "remote"}));
    cmd->add_option("--endpoint", o.endpoint, "remote decomposer URL");
    cmd->add_option("--fault", o.fault, "oracle fault profile (omit-digdown)")
        ->check(CLI::IsMember({"none", "omit-digdown"}));
    cmd->add_option("--seed", o.seed, "base random seed");
}

bar::ExperimentConfig to_config(const CommonOpts& o) {
    bar::ExperimentConfig cfg;
    cfg.recipes_path = o.recipes;
    cfg.consistency_enabled = o.consistency != "off";
    cfg.consistency.method = o.consistency == "window" ? bar::AnchorMethod::SlidingWindow
                                                       : bar::AnchorMethod::StepScoring;
    cfg.consistency.t = o.t;
    cfg.consistency.k = o.k;
    cfg.consistency.rounds = o.consistency_rounds;
    cfg.seed = o.seed;
    cfg.fault = o.fault == "omit-digdown" ? bar::FaultProfile::OmitDigDown
                                          : bar::FaultProfile::None;
    if (o.decomposer == "remote") {
        if (o.endpoint.empty()) throw bar::ConfigError("--decomposer remote requires --endpoint");
        cfg.decomposer = bar::DecomposerKind::Remote;
        cfg.remote = bar::RemoteConfig::from_endpoint(o.endpoint);
    }
    return cfg;
}

int cmd_plan(const CommonOpts& o, const std::string& goal_text) {
    auto cfg = to_config(o);
    auto db = bar::load_recipe_db_file(o.recipes);
    bar::Goal goal = bar::parse_goal(goal_text);
    bar::validate_goal_items(goal, db);
    std::cout << bar::render_plan(bar::plan_single_goal(cfg, db, goal, goal_text));
    return 0;
}

int cmd_run(const CommonOpts& o, const std::string& mode, const std::string& tasks_path,
            int runs, const std::string& memory_path, double memory_threshold, int rounds,
            const std::string& out_dir) {
    auto cfg = to_config(o);
    cfg.mode = mode == "dynamic" ? bar::ExperimentMode::Dynamic : bar::ExperimentMode::Static;
    cfg.runs = runs;
    cfg.dataset_path = tasks_path;
    cfg.memory_path = memory_path;
    cfg.memory_threshold = memory_threshold;
    cfg.rounds = rounds;
    cfg.out_dir = out_dir;

    auto db = bar::load_recipe_db_file(cfg.recipes_path);
    auto tasks = bar::load_tasks_file(cfg.dataset_path, db);

    bar::ExperimentReport report;
    if (cfg.mode == bar::ExperimentMode::Static) {
        report = bar::run_static(cfg, db, tasks);
    } else {
        bar::StageMemoryStore store;
        if (!cfg.memory_path.empty() && std::filesystem::exists(cfg.memory_path)) {
            std::vector<std::string> warnings;
            store = bar::StageMemoryStore::load(cfg.memory_path, db, &warnings);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        }
        report = bar::run_dynamic(cfg, db, tasks, store);
        store.save(cfg.memory_path);
    }
    bar::write_report(report, cfg.out_dir);

    const bar::PhaseResult& final_phase = report.phase2 ? *report.phase2 : report.phase1;
    std::printf("%zu tasks, %d runs each -> %s\n", tasks.size(), cfg.runs, out_dir.c_str());
    for (const auto& [group, g] : final_phase.agg.by_group) {
        std::printf("  %-9s Acc %6.2f  F1 %6.2f  ED %5.2f", group.c_str(), g.accuracy, g.f1,
                    g.edit_distance);
        if (final_phase.overall_success >= 0)
            std::printf("  SR %.2f", final_phase.group_success.at(group));
        std::printf("\n");
    }
    return 0;
}

int cmd_eval(const std::string& gen_path, const std::string& gt_path, const std::string& recipes) {
    auto db = bar::load_recipe_db_file(recipes);
    bar::Plan gen = bar::parse_plan(read_file(gen_path));
    bar::Plan gt = bar::parse_plan(read_file(gt_path));
    auto m = bar::score_plan(bar::normalize_plan(gen, db), bar::normalize_plan(gt, db));
    nlohmann::ordered_json j;
    j["accuracy"] = m.accuracy;
    j["f1"] = m.f1;
    j["edit_distance"] = m.edit_distance;
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_simulate(const std::string& goal_text, const std::string& plan_path,
                 const std::string& recipes, int runs, std::uint64_t seed) {
    auto db = bar::load_recipe_db_file(recipes);
    bar::Goal goal = bar::parse_goal(goal_text);
    bar::validate_goal_items(goal, db);
    bar::Plan plan = bar::parse_plan(read_file(plan_path));
    for (const auto& s : plan) bar::validate_step_items(s, db);

    bar::StochasticProfile profile;
    profile.seed = seed;
    auto report = bar::execute_plan(goal, plan, db, profile, bar::ExecutionMode::Strict);
    auto j = bar::execution_report_json(report);
    if (runs > 1)
        j["success_rate"] = bar::success_rate(goal, plan, db, profile, runs);
    std::cout << j.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"backward-reasoning crafting planner"};
    app.require_subcommand(1);

    CommonOpts plan_opts;
    std::string plan_goal;
    auto* plan_cmd = app.add_subcommand("plan", "plan a single goal and print the steps");
    plan_cmd->add_option("--goal", plan_goal, "goal text, e.g. \"collect 3 stone\"")->required();
    add_common(plan_cmd, plan_opts);

    CommonOpts run_opts;
    std::string run_mode = "static", run_tasks = "data/tasks.json", run_memory, run_out = "out";
    int run_runs = 10, run_rounds = 1;
    double run_threshold = 0.3;
    auto* run_cmd = app.add_subcommand("run", "run the experiment harness over a dataset");
    run_cmd->add_option("--mode", run_mode, "static|dynamic")
        ->check(CLI::IsMember({"static", "dynamic"}));
    run_cmd->add_option("--tasks", run_tasks, "task dataset file");
    run_cmd->add_option("--runs", run_runs, "runs per task")->check(CLI::PositiveNumber);
    run_cmd->add_option("--memory", run_memory, "stage-memory file (dynamic mode)");
    run_cmd->add_option("--memory-threshold", run_threshold, "retrieval success-rate threshold");
    run_cmd->add_option("--rounds", run_rounds, "dynamic record/replan cycles")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", run_out, "output directory")->required();
    add_common(run_cmd, run_opts);

    std::string eval_gen, eval_gt, eval_recipes = "data/recipes.json";
    auto* eval_cmd = app.add_subcommand("eval", "score a generated plan against ground truth");
    eval_cmd->add_option("--gen", eval_gen, "generated plan file")->required();
    eval_cmd->add_option("--gt", eval_gt, "ground-truth plan file")->required();
    eval_cmd->add_option("--recipes", eval_recipes, "recipe database file");

    std::string sim_goal, sim_plan, sim_recipes = "data/recipes.json";
    int sim_runs = 1;
    std::uint64_t sim_seed = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "execute a plan file in the simulator");
    sim_cmd->add_option("--goal", sim_goal, "goal text")->required();
    sim_cmd->add_option("--plan", sim_plan, "plan file")->required();
    sim_cmd->add_option("--recipes", sim_recipes, "recipe database file");
    sim_cmd->add_option("--runs", sim_runs, "execution repetitions");
    sim_cmd->add_option("--seed", sim_seed, "base random seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) return cmd_plan(plan_opts, plan_goal);
        if (run_cmd->parsed())
            return cmd_run(run_opts, run_mode, run_tasks, run_runs, run_memory, run_threshold,
                           run_rounds, run_out);
        if (eval_cmd->parsed()) return cmd_eval(eval_gen, eval_gt, eval_recipes);
        if (sim_cmd->parsed()) return cmd_simulate(sim_goal, sim_plan, sim_recipes, sim_runs, sim_seed);
    } catch (const bar::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
