#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bar/consistency.hpp"
#include "bar/decomposer.hpp"
#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/metrics.hpp"
#include "bar/planner.hpp"
#include "bar/recipes.hpp"
#include "bar/remote.hpp"
#include "bar/simulator.hpp"
#include "bar/stage_memory.hpp"
#include "bar/tasks.hpp"

namespace bar {

// ============================================================================
// Experiment harness: the static and dynamic planning loops over the
// bundled dataset, with aggregation and report emission.
// ============================================================================

enum class ExperimentMode { Static, Dynamic };
enum class DecomposerKind { Oracle, Remote };

struct ExperimentConfig {
    ExperimentMode mode{ExperimentMode::Static};
    DecomposerKind decomposer{DecomposerKind::Oracle};
    RemoteConfig remote;                    // Remote decomposer only
    FaultProfile fault{FaultProfile::None}; // oracle fault injection
    bool consistency_enabled{true};
    ConsistencyConfig consistency;
    int runs{10};
    std::uint64_t seed{0};
    double memory_threshold{0.3};
    bool memory_item_only{false};
    int rounds{1}; // dynamic record/replan cycles
    std::string dataset_path;
    std::string recipes_path;
    std::string memory_path; // required in dynamic mode
    std::string out_dir;
};

struct TaskOutcome {
    std::string id;
    std::string group;
    int gt_len{0};
    MetricResult metrics;          // mean over runs
    double success_rate{-1.0};     // dynamic phases only
    bool decomposer_failed{false};
    double elapsed_ms{0.0};        // advisory wall clock, never asserted
};

struct PhaseResult {
    std::vector<TaskOutcome> tasks;
    Aggregate agg;
    std::map<std::string, double> group_success; // dynamic phases only
    double overall_success{-1.0};
};

struct ExperimentReport {
    ExperimentConfig config;
    PhaseResult phase1;
    std::optional<PhaseResult> phase2; // dynamic mode
};

// ----------------------------------------------------------------------------
// Single-task pipeline
// ----------------------------------------------------------------------------

namespace detail {

struct PipelineDeps {
    const RecipeDb* db;
    const ExperimentConfig* cfg;
    const RemoteSession* remote; // set when decomposer == Remote
};

inline std::unique_ptr<Decomposer> make_decomposer(const PipelineDeps& deps) {
    if (deps.cfg->decomposer == DecomposerKind::Remote)
        return std::make_unique<RemoteDecomposer>(deps.cfg->remote, *deps.db);
    return std::make_unique<RecipeOracle>(*deps.db, deps.cfg->fault);
}

/// plan_backward + maintain_consistency for one run of one task.
inline Plan plan_task_once(const Task& task, const PipelineDeps& deps, const HintProvider& hints,
                           std::uint64_t run_index, PlanningTrace* trace_out) {
    auto decomposer = make_decomposer(deps);
    PlannerOptions opts;
    opts.db = deps.db;
    opts.hints = hints;
    PlanningResult pr = plan_backward(task.goal, *decomposer, opts);
    if (trace_out) *trace_out = pr.trace;

    Plan plan = pr.plan;
    if (deps.cfg->consistency_enabled) {
        ConsistencyConfig ccfg = deps.cfg->consistency;
        ccfg.seed = deps.cfg->seed + run_index;
        ConsistencyBackends backends;
        if (deps.remote) backends = remote_consistency_backends(*deps.remote, *deps.db);
        plan = maintain_consistency(plan, task.goal_text, ccfg, *deps.db, backends);
    }
    return plan;
}

inline TaskOutcome evaluate_task(const Task& task, const PipelineDeps& deps,
                                 const HintProvider& hints, bool execute,
                                 PlanningTrace* trace_out, Plan* plan_out) {
    auto t0 = std::chrono::steady_clock::now();
    TaskOutcome out;
    out.id = task.id;
    out.group = task.group;
    out.gt_len = static_cast<int>(task.ground_truth.size());

    const Plan gt = normalize_plan(task.ground_truth, *deps.db);
    double acc = 0, f1s = 0, ed = 0;
    Plan run0_plan;
    bool failed = false;
    for (int r = 0; r < deps.cfg->runs; ++r) {
        try {
            Plan plan = plan_task_once(task, deps, hints, static_cast<std::uint64_t>(r),
                                       r == 0 ? trace_out : nullptr);
            if (r == 0) run0_plan = plan;
            MetricResult m = score_plan(normalize_plan(plan, *deps.db), gt);
            acc += m.accuracy;
            f1s += m.f1;
            ed += m.edit_distance;
        } catch (const Error&) {
            // worst-case scoring keeps the means honest when a backend fails
            failed = true;
            acc += 0;
            f1s += 0;
            ed += static_cast<double>(gt.size());
        }
    }
    out.decomposer_failed = failed;
    out.metrics.accuracy = acc / deps.cfg->runs;
    out.metrics.f1 = f1s / deps.cfg->runs;
    out.metrics.edit_distance = static_cast<int>(0.5 + ed / deps.cfg->runs);

    if (execute && !run0_plan.empty()) {
        StochasticProfile profile;
        profile.seed = deps.cfg->seed;
        out.success_rate = success_rate(task.goal, run0_plan, *deps.db, profile, deps.cfg->runs);
    } else if (execute) {
        out.success_rate = 0.0;
    }
    if (plan_out) *plan_out = run0_plan;
    out.elapsed_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

inline PhaseResult run_phase(const std::vector<Task>& tasks, const PipelineDeps& deps,
                             const HintProvider& hints, bool execute,
                             StageMemoryStore* record_into) {
    PhaseResult phase;
    std::vector<TaggedResult> tagged;
    std::map<std::string, std::pair<double, int>> success_acc;
    double success_total = 0;

    for (const auto& task : tasks) {
        PlanningTrace trace;
        TaskOutcome out = evaluate_task(task, deps, hints, execute, &trace, nullptr);
        if (record_into && !out.decomposer_failed)
            record_into->record(trace, out.success_rate, task.id);
        tagged.push_back({out.id, out.group, out.gt_len, out.metrics});
        if (execute) {
            success_acc[out.group].first += out.success_rate;
            success_acc[out.group].second += 1;
            success_total += out.success_rate;
        }
        phase.tasks.push_back(std::move(out));
    }
    phase.agg = aggregate(tagged);
    if (execute) {
        for (const auto& [group, acc] : success_acc)
            phase.group_success[group] = acc.first / acc.second;
        phase.overall_success = tasks.empty() ? 0.0 : success_total / tasks.size();
    }
    return phase;
}

} // namespace detail

// ----------------------------------------------------------------------------
// Experiment entry points
// ----------------------------------------------------------------------------

/// One-off planning of a single goal through the configured pipeline
/// (decomposer + consistency); what `bar plan` prints.
inline Plan plan_single_goal(const ExperimentConfig& cfg, const RecipeDb& db, const Goal& goal,
                             const std::string& goal_text) {
    std::optional<RemoteSession> remote;
    if (cfg.decomposer == DecomposerKind::Remote) remote.emplace(cfg.remote);
    detail::PipelineDeps deps{&db, &cfg, remote ? &*remote : nullptr};
    Task task{"cli", "", goal_text, goal, {}};
    return detail::plan_task_once(task, deps, nullptr, 0, nullptr);
}

/// Static setting: plan + repair per task, compare against the annotated
/// ground truth, no environment interaction.
inline ExperimentReport run_static(const ExperimentConfig& cfg, const RecipeDb& db,
                                   const std::vector<Task>& tasks) {
    ExperimentReport report;
    report.config = cfg;
    std::optional<RemoteSession> remote;
    if (cfg.decomposer == DecomposerKind::Remote) remote.emplace(cfg.remote);
    detail::PipelineDeps deps{&db, &cfg, remote ? &*remote : nullptr};
    report.phase1 = detail::run_phase(tasks, deps, nullptr, /*execute=*/false, nullptr);
    return report;
}

/// Dynamic setting: plan, execute for success rates, record stage memory,
/// then replan every task with memory hints. With `rounds > 1` the
/// record/replan cycle repeats, accumulating memory.
inline ExperimentReport run_dynamic(const ExperimentConfig& cfg, const RecipeDb& db,
                                    const std::vector<Task>& tasks, StageMemoryStore& store) {
    if (cfg.memory_path.empty())
        throw ConfigError("dynamic mode requires a memory file path");

    ExperimentReport report;
    report.config = cfg;
    std::optional<RemoteSession> remote;
    if (cfg.decomposer == DecomposerKind::Remote) remote.emplace(cfg.remote);
    detail::PipelineDeps deps{&db, &cfg, remote ? &*remote : nullptr};

    // Phase 1: memory-free planning, executed to stamp success rates.
    report.phase1 = detail::run_phase(tasks, deps, nullptr, /*execute=*/true, &store);

    HintProvider hints = [&cfg, &store](const Goal& goal) {
        return store.retrieve(goal, cfg.memory_threshold, cfg.memory_item_only);
    };

    // Phase 2 (repeated for extra rounds): memory-assisted replanning.
    for (int round = 0; round < std::max(1, cfg.rounds); ++round) {
        bool last = round + 1 >= std::max(1, cfg.rounds);
        report.phase2 = detail::run_phase(tasks, deps, hints, /*execute=*/true,
                                          last ? nullptr : &store);
    }
    return report;
}

// ----------------------------------------------------------------------------
// Report emission (deterministic: no wall-clock content)
// ----------------------------------------------------------------------------

namespace detail {

inline nlohmann::ordered_json phase_json(const PhaseResult& phase, bool with_success) {
    nlohmann::ordered_json j;
    j["tasks"] = nlohmann::ordered_json::array();
    for (const auto& t : phase.tasks) {
        nlohmann::ordered_json jt;
        jt["task_id"] = t.id;
        jt["group"] = t.group;
        jt["plan_len"] = t.gt_len;
        jt["accuracy"] = t.metrics.accuracy;
        jt["f1"] = t.metrics.f1;
        jt["edit_distance"] = t.metrics.edit_distance;
        if (with_success) jt["success_rate"] = t.success_rate;
        if (t.decomposer_failed) jt["decomposer_failed"] = true;
        j["tasks"].push_back(std::move(jt));
    }
    j["groups"] = nlohmann::ordered_json::object();
    for (const auto& [group, g] : phase.agg.by_group) {
        nlohmann::ordered_json jg;
        jg["accuracy"] = g.accuracy;
        jg["f1"] = g.f1;
        jg["edit_distance"] = g.edit_distance;
        jg["tasks"] = g.count;
        if (with_success) jg["success_rate"] = phase.group_success.at(group);
        j["groups"][group] = std::move(jg);
    }
    j["by_length"] = nlohmann::ordered_json::object();
    for (const auto& [len, g] : phase.agg.by_length) {
        nlohmann::ordered_json jg;
        jg["accuracy"] = g.accuracy;
        jg["f1"] = g.f1;
        jg["edit_distance"] = g.edit_distance;
        jg["tasks"] = g.count;
        j["by_length"][std::to_string(len)] = std::move(jg);
    }
    nlohmann::ordered_json overall;
    overall["accuracy"] = phase.agg.overall.accuracy;
    overall["f1"] = phase.agg.overall.f1;
    overall["edit_distance"] = phase.agg.overall.edit_distance;
    if (with_success) overall["success_rate"] = phase.overall_success;
    j["overall"] = std::move(overall);
    return j;
}

inline std::string format2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace detail

inline nlohmann::ordered_json report_json(const ExperimentReport& report) {
    const auto& cfg = report.config;
    nlohmann::ordered_json j;
    nlohmann::ordered_json jc;
    jc["mode"] = cfg.mode == ExperimentMode::Static ? "static" : "dynamic";
    jc["decomposer"] = cfg.decomposer == DecomposerKind::Oracle ? "oracle" : "remote";
    jc["fault"] = cfg.fault == FaultProfile::OmitDigDown ? "omit-digdown" : "none";
    jc["consistency"] = cfg.consistency_enabled
                            ? (cfg.consistency.method == AnchorMethod::StepScoring ? "scoring"
                                                                                   : "window")
                            : "off";
    jc["t"] = cfg.consistency.t;
    jc["k"] = cfg.consistency.k;
    jc["runs"] = cfg.runs;
    jc["seed"] = cfg.seed;
    jc["memory_threshold"] = cfg.memory_threshold;
    jc["dataset"] = cfg.dataset_path;
    jc["recipes"] = cfg.recipes_path;
    j["config"] = std::move(jc);
    bool dynamic = cfg.mode == ExperimentMode::Dynamic;
    if (dynamic) {
        j["phase1"] = detail::phase_json(report.phase1, true);
        j["phase2"] = detail::phase_json(*report.phase2, true);
    } else {
        j["static"] = detail::phase_json(report.phase1, false);
    }
    return j;
}

/// CSV of the final phase: task_id, group, plan_len, accuracy, f1,
/// edit_distance.
inline std::string report_csv(const ExperimentReport& report) {
    const PhaseResult& phase = report.phase2 ? *report.phase2 : report.phase1;
    std::string csv = "task_id,group,plan_len,accuracy,f1,edit_distance\n";
    for (const auto& t : phase.tasks) {
        csv += t.id + "," + t.group + "," + std::to_string(t.gt_len) + "," +
               detail::format2(t.metrics.accuracy) + "," + detail::format2(t.metrics.f1) + "," +
               std::to_string(t.metrics.edit_distance) + "\n";
    }
    return csv;
}

/// Advisory wall-clock summary, kept out of the deterministic reports.
inline std::string timings_text(const ExperimentReport& report) {
    std::map<std::string, std::pair<double, int>> by_group;
    const PhaseResult& phase = report.phase2 ? *report.phase2 : report.phase1;
    for (const auto& t : phase.tasks) {
        by_group[t.group].first += t.elapsed_ms;
        by_group[t.group].second += 1;
    }
    std::string out = "mean wall-clock per task (ms), advisory only\n";
    for (const auto& [group, acc] : by_group)
        out += group + ": " + detail::format2(acc.first / acc.second) + "\n";
    return out;
}

inline void write_report(const ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw PersistenceFailure("cannot create output dir " + out_dir);

    std::ofstream json_out(fs::path(out_dir) / "report.json");
    json_out << report_json(report).dump(2) << "\n";
    std::ofstream csv_out(fs::path(out_dir) / "report.csv");
    csv_out << report_csv(report);
    std::ofstream timing_out(fs::path(out_dir) / "timings.txt");
    timing_out << timings_text(report);
    if (!json_out || !csv_out || !timing_out)
        throw PersistenceFailure("failed writing reports to " + out_dir);
}

} // namespace bar
