#pragma once

#include <stdexcept>
#include <string>

namespace bar {

// Base for all typed errors thrown by the library. Simulator step failures
// are data (StepOutcome), not exceptions.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct MalformedStep : Error {
    std::string text;
    MalformedStep(std::string t, const std::string& reason)
        : Error("malformed step \"" + t + "\": " + reason), text(std::move(t)) {}
};

struct MalformedGoal : Error {
    std::string text;
    MalformedGoal(std::string t, const std::string& reason)
        : Error("malformed goal \"" + t + "\": " + reason), text(std::move(t)) {}
};

struct UnknownItem : Error {
    std::string name;
    explicit UnknownItem(std::string n)
        : Error("unknown item \"" + n + "\""), name(std::move(n)) {}
};

struct DuplicateRecipe : Error {
    DuplicateRecipe(const std::string& item, const std::string& kind)
        : Error("duplicate recipe for (" + item + ", " + kind + ")") {}
};

struct RecipeCycle : Error {
    std::string path;
    explicit RecipeCycle(std::string p)
        : Error("recipe dependency cycle: " + p), path(std::move(p)) {}
};

struct NoRecipe : Error {
    std::string item;
    explicit NoRecipe(std::string i)
        : Error("no recipe produces \"" + i + "\""), item(std::move(i)) {}
};

struct IterationBudgetExceeded : Error {
    explicit IterationBudgetExceeded(const std::string& detail)
        : Error("planning iteration budget exceeded: " + detail) {}
};

struct RepairDepthExceeded : Error {
    explicit RepairDepthExceeded(const std::string& detail)
        : Error("forward completion repair depth exceeded: " + detail) {}
};

struct AnchorMismatch : Error {
    explicit AnchorMismatch(const std::string& detail)
        : Error("anchor mismatch: " + detail) {}
};

struct RemoteUnavailable : Error {
    explicit RemoteUnavailable(const std::string& detail)
        : Error("remote decomposer unavailable: " + detail) {}
};

struct RemoteParseError : Error {
    std::string raw_text;
    RemoteParseError(const std::string& reason, std::string raw)
        : Error("cannot parse remote response: " + reason), raw_text(std::move(raw)) {}
};

struct PersistenceFailure : Error {
    explicit PersistenceFailure(const std::string& detail)
        : Error("persistence failure: " + detail) {}
};

struct SchemaVersionMismatch : Error {
    explicit SchemaVersionMismatch(const std::string& detail)
        : Error("schema version mismatch: " + detail) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& detail)
        : Error("configuration error: " + detail) {}
};

} // namespace bar
