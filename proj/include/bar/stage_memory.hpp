#pragma once

#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bar/decomposer.hpp"
#include "bar/domain.hpp"
#include "bar/errors.hpp"
#include "bar/planner.hpp"
#include "bar/recipes.hpp"

namespace bar {

// ============================================================================
// Stage memory
//
// Every plan execution stamps its success rate onto the goal decompositions
// recorded while planning it. Later planning runs retrieve the decomposition
// stored for an identical goal when its success rate clears the threshold,
// and feed it to the decomposer as a hint.
// ============================================================================

/// Canonical goal key: verb-insensitive, exact (item, qty) match.
struct GoalKey {
    GoalKind kind{GoalKind::ObtainItem};
    ItemId item;
    int qty{0};
    ItemId tool;

    static GoalKey of(const Goal& g) {
        return GoalKey{g.kind, g.item, g.qty, g.tool};
    }
    auto operator<=>(const GoalKey&) const = default;
    bool operator==(const GoalKey&) const = default;
};

struct StageMemoryEntry {
    GoalKey key;
    DecompositionResult decomposition;
    double success_rate{0.0};
    std::string source_task;
    std::string recorded_at; // ISO-8601 UTC
    std::uint64_t seq{0};    // insertion order, breaks rate ties by recency
};

class StageMemoryStore {
public:
    /// Records every decomposition of a planning trace, all stamped with the
    /// plan's execution success rate. A duplicate (key, decomposition) keeps
    /// the maximum rate seen.
    void record(const PlanningTrace& trace, double success_rate, const std::string& task_id) {
        for (const auto& entry : trace)
            record_one(GoalKey::of(entry.goal), entry.result, success_rate, task_id);
    }

    void record_one(const GoalKey& key, const DecompositionResult& d, double rate,
                    const std::string& task_id) {
        auto& bucket = entries_[key];
        for (auto& e : bucket) {
            if (e.decomposition == d) {
                if (rate > e.success_rate) {
                    e.success_rate = rate;
                    e.source_task = task_id;
                    e.recorded_at = now_iso8601();
                    e.seq = ++seq_;
                }
                return;
            }
        }
        bucket.push_back({key, d, rate, task_id, now_iso8601(), ++seq_});
    }

    /// Highest-rate entry for the exact goal key at or above the threshold;
    /// ties go to the most recently recorded. With `item_only` the quantity
    /// is ignored when matching ObtainItem goals (off by default).
    std::optional<DecompositionResult> retrieve(const Goal& goal, double threshold,
                                                bool item_only = false) const {
        const StageMemoryEntry* best = nullptr;
        auto consider = [&](const StageMemoryEntry& e) {
            if (e.success_rate < threshold) return;
            if (!best || e.success_rate > best->success_rate ||
                (e.success_rate == best->success_rate && e.seq > best->seq))
                best = &e;
        };
        GoalKey key = GoalKey::of(goal);
        if (!item_only) {
            auto it = entries_.find(key);
            if (it != entries_.end())
                for (const auto& e : it->second) consider(e);
        } else {
            for (const auto& [k, bucket] : entries_) {
                if (k.kind != key.kind) continue;
                if (k.kind == GoalKind::ObtainItem && k.item != key.item) continue;
                if (k.kind == GoalKind::ReachBelowGround && k.tool != key.tool) continue;
                for (const auto& e : bucket) consider(e);
            }
        }
        if (!best) return std::nullopt;
        return best->decomposition;
    }

    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& [_, bucket] : entries_) n += bucket.size();
        return n;
    }
    bool empty() const { return entries_.empty(); }
    const std::map<GoalKey, std::vector<StageMemoryEntry>>& entries() const { return entries_; }

    // ------------------------------------------------------------------
    // Persistence: one JSON document, goals and steps as canonical text.
    // ------------------------------------------------------------------

    static constexpr int kSchemaVersion = 1;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["version"] = kSchemaVersion;
        j["entries"] = nlohmann::ordered_json::array();
        for (const auto& [key, bucket] : entries_) {
            for (const auto& e : bucket) {
                nlohmann::ordered_json je;
                je["goal"] = render_goal(to_goal(key));
                je["step"] = render_step(e.decomposition.step);
                je["sub_goals"] = nlohmann::ordered_json::array();
                for (const auto& g : e.decomposition.sub_goals)
                    je["sub_goals"].push_back(render_goal(g));
                je["success_rate"] = e.success_rate;
                je["source_task"] = e.source_task;
                je["recorded_at"] = e.recorded_at;
                j["entries"].push_back(std::move(je));
            }
        }
        return j;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw PersistenceFailure("cannot write " + path);
        out << to_json().dump(2) << "\n";
        if (!out) throw PersistenceFailure("write failed: " + path);
    }

    /// Loads and validates against the recipe db; entries referencing
    /// unknown items are dropped with a warning on `warnings`.
    static StageMemoryStore load(const std::string& path, const RecipeDb& db,
                                 std::vector<std::string>* warnings = nullptr) {
        std::ifstream in(path);
        if (!in) throw PersistenceFailure("cannot read " + path);
        std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        StageMemoryStore store;
        if (content.find_first_not_of(" \t\r\n") == std::string::npos)
            return store; // empty file -> empty store

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(content);
        } catch (const nlohmann::json::exception& e) {
            throw PersistenceFailure(std::string("memory file is not valid JSON: ") + e.what());
        }
        int version = j.value("version", -1);
        if (version != kSchemaVersion)
            throw SchemaVersionMismatch("memory file version " + std::to_string(version) +
                                        ", expected " + std::to_string(kSchemaVersion));
        for (const auto& je : j.value("entries", nlohmann::json::array())) {
            try {
                Goal goal = parse_goal(je.at("goal").get<std::string>());
                validate_goal_items(goal, db);
                DecompositionResult d;
                d.step = parse_step(je.at("step").get<std::string>());
                validate_step_items(d.step, db);
                for (const auto& sg : je.value("sub_goals", nlohmann::json::array())) {
                    Goal g = parse_goal(sg.get<std::string>());
                    validate_goal_items(g, db);
                    d.sub_goals.push_back(std::move(g));
                }
                double rate = je.at("success_rate").get<double>();
                if (rate < 0.0 || rate > 1.0) throw Error("success_rate out of range");
                auto& bucket = store.entries_[GoalKey::of(goal)];
                bucket.push_back({GoalKey::of(goal), std::move(d), rate,
                                  je.value("source_task", std::string{}),
                                  je.value("recorded_at", std::string{}), ++store.seq_});
            } catch (const Error& e) {
                if (warnings) warnings->push_back(std::string("dropped memory entry: ") + e.what());
            }
        }
        return store;
    }

private:
    static Goal to_goal(const GoalKey& k) {
        if (k.kind == GoalKind::ReachBelowGround) return Goal::reach_below(k.tool);
        return Goal::obtain(k.item, k.qty);
    }

    static std::string now_iso8601() {
        auto now = std::chrono::system_clock::now();
        auto t = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::tm tm{};
        gmtime_r(&t, &tm);
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    std::map<GoalKey, std::vector<StageMemoryEntry>> entries_;
    std::uint64_t seq_ = 0;
};

} // namespace bar
