#include <catch2/catch_amalgamated.hpp>

#include "bar/prompts.hpp"

#include "testutil.hpp"

using namespace bar;

TEST_CASE("prompt templates match the versioned assets", "[prompts]") {
    for (const auto& name : {"decompose", "rate", "complete", "integrate"}) {
        CAPTURE(name);
        CHECK(prompt_template_text(name) ==
              tests::read_file(tests::source_dir() + "/data/prompts/" + name + ".txt"));
    }
}

TEST_CASE("rendered prompts match the golden files byte for byte", "[prompts]") {
    Plan initial = parse_plan(
        "1. Mine 3 log with barehand\n2. Craft 9 planks\n3. Craft 2 stick\n"
        "4. Craft 1 crafting_table\n5. Craft 1 wooden_pickaxe\n"
        "6. Mine 3 stone with wooden_pickaxe\n");

    CHECK(format_decompose_prompt("collect 3 stone").flat() ==
          tests::read_file(tests::golden_path("decompose_prompt.txt")));

    CHECK(format_rate_prompt("collect 3 stone", initial).flat() ==
          tests::read_file(tests::golden_path("rate_prompt.txt")));

    CHECK(format_complete_prompt("collect 3 stone", parse_step("Craft 1 crafting_table"),
                                 parse_step("Mine 3 stone with wooden_pickaxe"))
              .flat() == tests::read_file(tests::golden_path("complete_prompt.txt")));

    Plan partial = parse_plan(
        "Craft 1 crafting_table\nCraft 1 wooden_pickaxe\nDig down with wooden_pickaxe\n"
        "Mine 3 stone with wooden_pickaxe\n");
    CHECK(format_integrate_prompt("collect 3 stone", initial, partial).flat() ==
          tests::read_file(tests::golden_path("integrate_prompt.txt")));
}

TEST_CASE("prompt structure details", "[prompts]") {
    auto p = format_decompose_prompt("collect 3 stone");
    CHECK(p.flat().find("Goal: collect 3 stone") != std::string::npos);
    CHECK(p.flat().find("========") != std::string::npos);

    SECTION("empty exemplar list leaves only the query block") {
        auto bare = format_decompose_prompt("obtain 1 bucket", {});
        CHECK(bare.user == "========\nGoal: obtain 1 bucket\nThought:\n");
        CHECK(bare.system == std::string(prompts::kDecomposeSystem));
    }
    SECTION("exemplars are inserted in order") {
        auto two = format_decompose_prompt("obtain 1 bucket", {"AAA", "BBB"});
        CHECK(two.user.find("AAA") < two.user.find("BBB"));
        CHECK(two.user.find("BBB") < two.user.find("obtain 1 bucket"));
    }
}

TEST_CASE("decompose responses parse", "[prompts]") {
    const auto& db = tests::default_db();

    SECTION("the reference response") {
        std::string text =
            "To collect 3 stone, the last step is to mine 3 stone with wooden_pickaxe, as "
            "mining the stone requires at least wooden_pickaxe. And the previous sub goals are "
            "to obtain 1 wooden_pickaxe and dig down with wooden_pickaxe, because stone only "
            "appears at the below ground level. Based on these analysis, the decomposed result "
            "is as follows:\n"
            "Decomposed Step:\n"
            "Mine 3 stone with wooden_pickaxe\n"
            "Decomposed Sub Goals:\n"
            "1. Obtain 1 wooden_pickaxe\n"
            "2. Dig down with wooden_pickaxe\n";
        auto d = parse_decompose_response(text, &db);
        CHECK(render_step(d.step) == "Mine 3 stone with wooden_pickaxe");
        REQUIRE(d.sub_goals.size() == 2);
        CHECK(d.sub_goals[0] == Goal::obtain(ItemId{"wooden_pickaxe"}, 1));
        CHECK(d.sub_goals[1] == Goal::reach_below(ItemId{"wooden_pickaxe"}));
    }
    SECTION("headers but zero sub-goal lines") {
        auto d = parse_decompose_response(
            "Decomposed Step:\nMine 3 log with barehand\nDecomposed Sub Goals:\n");
        CHECK(d.sub_goals.empty());
    }
    SECTION("missing step header") {
        CHECK_THROWS_AS(parse_decompose_response("Decomposed Sub Goals:\n1. Obtain 1 log\n"),
                        RemoteParseError);
    }
    SECTION("missing sub-goals header") {
        CHECK_THROWS_AS(parse_decompose_response("Decomposed Step:\nMine 3 log with barehand\n"),
                        RemoteParseError);
    }
    SECTION("unparsable step") {
        CHECK_THROWS_AS(
            parse_decompose_response("Decomposed Step:\nFly 3 up\nDecomposed Sub Goals:\n"),
            RemoteParseError);
    }
}

TEST_CASE("rating responses parse in order", "[prompts]") {
    std::string text =
        "As the stone only exists in below the ground, when executing the step \"Mine 3 stone "
        "with wooden_pickaxe\", the agent should be below the ground. However, before this step "
        "the agent is gathering materials and crafting items above the ground. So the latter "
        "half of the steps in the initial plan may not be executed successfully.\n"
        "Rating:\n"
        "1. Mine 3 log with barehand - 10\n"
        "2. Craft 9 planks - 8\n"
        "3. Craft 2 stick - 5\n"
        "4. Craft 1 crafting_table - 3\n"
        "5. Craft 1 wooden_pickaxe - 3\n"
        "6. Mine 3 stone with wooden_pickaxe - 5\n";
    auto ratings = parse_rating_response(text);
    REQUIRE(ratings.size() == 6);
    std::vector<int> scores;
    for (const auto& r : ratings) scores.push_back(r.score);
    CHECK(scores == std::vector<int>{10, 8, 5, 3, 3, 5});
    for (size_t i = 0; i < ratings.size(); ++i) CHECK(ratings[i].index == static_cast<int>(i) + 1);

    CHECK_THROWS_AS(parse_rating_response("no ratings here"), RemoteParseError);
    CHECK_THROWS_AS(parse_rating_response("Rating:\n1. Mine 3 log with barehand - 11\n"),
                    RemoteParseError);
}

TEST_CASE("partial plan responses parse", "[prompts]") {
    const auto& db = tests::default_db();
    std::string text =
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
        "========\n";
    Plan partial = parse_partial_plan_response(text, &db);
    REQUIRE(partial.size() == 4);
    CHECK(render_step(partial[2]) == "Dig down with wooden_pickaxe");

    CHECK_THROWS_AS(parse_partial_plan_response("Thought:\nnothing\n", &db), RemoteParseError);
}

TEST_CASE("corrected plan responses parse", "[prompts]") {
    const auto& db = tests::default_db();
    std::string text =
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
        "7. Mine 3 stone with wooden_pickaxe\n";
    Plan corrected = parse_corrected_plan_response(text, &db);
    REQUIRE(corrected.size() == 7);
    CHECK(render_step(corrected.back()) == "Mine 3 stone with wooden_pickaxe");

    CHECK_THROWS_AS(parse_corrected_plan_response("Corrected Plan:\n", &db), RemoteParseError);
}
