#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "bar/decomposer.hpp"
#include "bar/domain.hpp"

#include "testutil.hpp"

using namespace bar;

namespace {
DecompositionResult decompose(const Goal& g,
                              FaultProfile fault = FaultProfile::None,
                              std::optional<DecompositionResult> hint = std::nullopt) {
    RecipeOracle oracle(tests::default_db(), fault);
    return oracle.decompose(g, hint);
}
} // namespace

TEST_CASE("oracle decomposes a below-ground mine goal", "[decomposer]") {
    auto d = decompose(parse_goal("collect 3 stone"));
    CHECK(render_step(d.step) == "Mine 3 stone with wooden_pickaxe");
    REQUIRE(d.sub_goals.size() == 2);
    CHECK(d.sub_goals[0] == Goal::obtain(ItemId{"wooden_pickaxe"}, 1));
    CHECK(d.sub_goals[1] == Goal::reach_below(ItemId{"wooden_pickaxe"}));
}

TEST_CASE("oracle decomposes a craft goal into recipe-ordered sub-goals", "[decomposer]") {
    auto d = decompose(parse_goal("obtain 1 diamond_pickaxe"));
    CHECK(render_step(d.step) == "Craft 1 diamond_pickaxe");
    REQUIRE(d.sub_goals.size() == 3);
    CHECK(d.sub_goals[0] == Goal::obtain(ItemId{"diamond"}, 3));
    CHECK(d.sub_goals[1] == Goal::obtain(ItemId{"stick"}, 2));
    CHECK(d.sub_goals[2] == Goal::obtain(ItemId{"crafting_table"}, 1));
}

TEST_CASE("oracle leaf goals and batch scaling", "[decomposer]") {
    auto leaf = decompose(parse_goal("obtain 3 log"));
    CHECK(render_step(leaf.step) == "Mine 3 log with barehand");
    CHECK(leaf.sub_goals.empty());

    auto planks = decompose(parse_goal("obtain 9 planks"));
    CHECK(render_step(planks.step) == "Craft 9 planks");
    REQUIRE(planks.sub_goals.size() == 1);
    CHECK(planks.sub_goals[0] == Goal::obtain(ItemId{"log"}, 3));

    auto dig = decompose(parse_goal("dig down with wooden_pickaxe"));
    CHECK(render_step(dig.step) == "Dig down with wooden_pickaxe");
    CHECK(dig.sub_goals.empty());

    auto smelt = decompose(parse_goal("obtain 3 iron_ingot"));
    CHECK(render_step(smelt.step) == "Smelt 3 iron_ingot");
    REQUIRE(smelt.sub_goals.size() == 3);
    CHECK(smelt.sub_goals[0] == Goal::obtain(ItemId{"iron_ore"}, 3));
    CHECK(smelt.sub_goals[1] == Goal::obtain(ItemId{"planks"}, 3)); // fuel
    CHECK(smelt.sub_goals[2] == Goal::obtain(ItemId{"furnace"}, 1));

    CHECK_THROWS_AS(decompose(Goal::obtain(ItemId{"unobtainium"}, 1)), NoRecipe);
}

TEST_CASE("quantity scaling is exact batch arithmetic", "[decomposer][property]") {
    const auto& db = tests::default_db();
    RecipeOracle oracle(db);
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> qty(1, 200);
    std::vector<const Recipe*> craftables;
    for (const auto& [key, r] : db.recipes())
        if (r.kind != RecipeKind::Mine) craftables.push_back(&r);

    for (int i = 0; i < 1000; ++i) {
        const Recipe* r = craftables[i % craftables.size()];
        int n = qty(rng);
        auto d = oracle.decompose(Goal::obtain(r->output, n), std::nullopt);
        int batches = (n + r->out_count - 1) / r->out_count;
        CHECK(d.step.qty == batches * r->out_count);
        size_t gi = 0;
        for (const auto& in : r->inputs) {
            REQUIRE(gi < d.sub_goals.size());
            CHECK(d.sub_goals[gi].item == in.item);
            CHECK(d.sub_goals[gi].qty == in.count * batches);
            ++gi;
        }
    }
}

TEST_CASE("oracle determinism", "[decomposer]") {
    auto a = decompose(parse_goal("obtain 1 iron_pickaxe"));
    auto b = decompose(parse_goal("obtain 1 iron_pickaxe"));
    CHECK(a == b);
    CHECK(render_step(a.step) == render_step(b.step));
}

TEST_CASE("omit-digdown fault strips exactly the dig sub-goals", "[decomposer]") {
    auto clean = decompose(parse_goal("collect 3 stone"));
    auto faulted = decompose(parse_goal("collect 3 stone"), FaultProfile::OmitDigDown);
    CHECK(faulted.step == clean.step);
    REQUIRE(faulted.sub_goals.size() == 1);
    CHECK(faulted.sub_goals[0] == clean.sub_goals[0]);

    // goals without a dig are untouched
    auto craft = decompose(parse_goal("obtain 1 diamond_pickaxe"), FaultProfile::OmitDigDown);
    CHECK(craft == decompose(parse_goal("obtain 1 diamond_pickaxe")));
}

TEST_CASE("validated hints beat fresh oracle output", "[decomposer]") {
    const auto& db = tests::default_db();
    RecipeOracle oracle(db);
    Goal goal = parse_goal("obtain 3 stone");

    SECTION("valid hint returned verbatim") {
        DecompositionResult hint;
        hint.step = parse_step("Mine 3 stone with wooden_pickaxe");
        hint.sub_goals = {Goal::obtain(ItemId{"wooden_pickaxe"}, 1)}; // dig omitted, still valid
        auto d = oracle.decompose(goal, hint);
        CHECK(d == hint);
    }
    SECTION("hint for the wrong item is discarded") {
        DecompositionResult hint;
        hint.step = parse_step("Mine 3 log with barehand");
        auto d = oracle.decompose(goal, hint);
        CHECK(render_step(d.step) == "Mine 3 stone with wooden_pickaxe");
    }
    SECTION("hint with broken batch arithmetic is discarded") {
        DecompositionResult hint;
        hint.step = parse_step("Craft 7 planks"); // 7 is not a multiple of 3
        auto d = oracle.decompose(Goal::obtain(ItemId{"planks"}, 7), hint);
        CHECK(d.step.qty == 9);
    }
    SECTION("hint with unknown items is discarded") {
        DecompositionResult hint;
        hint.step = parse_step("Mine 3 stone with wooden_pickaxe");
        hint.sub_goals = {Goal::obtain(ItemId{"unobtainium"}, 1)};
        auto d = oracle.decompose(goal, hint);
        CHECK(d.sub_goals.size() == 2);
    }
}
