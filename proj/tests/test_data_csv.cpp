#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <sstream>

#include "specrank/csv.hpp"
#include "specrank/data.hpp"
#include "specrank/rng.hpp"

using namespace specrank;

TEST_CASE("choice rows parse with first-appearance label mapping") {
    const ComparisonDataset ds = parse_choice_csv("3,2,3,4,5\n2,1,2,3\n");
    REQUIRE(ds.n_items == 5);
    REQUIRE(ds.comparisons.size() == 2);
    // labels in appearance order: winner token first
    CHECK(ds.labels == std::vector<std::string>{"3", "2", "4", "5", "1"});
    CHECK(ds.comparisons[0].choice_set.size() == 4);
    CHECK(ds.label_of(ds.comparisons[0].winner) == "3");
    CHECK(ds.comparisons[1].choice_set.size() == 3);
    CHECK(ds.label_of(ds.comparisons[1].winner) == "2");
}

TEST_CASE("minimal pairwise row") {
    const ComparisonDataset ds = parse_choice_csv("0,0,1\n");
    REQUIRE(ds.n_items == 2);
    REQUIRE(ds.comparisons.size() == 1);
    CHECK(ds.comparisons[0].choice_set.size() == 2);
    CHECK(ds.label_of(ds.comparisons[0].winner) == "0");
}

TEST_CASE("winner outside the set is a validation error") {
    CHECK_THROWS_AS(parse_choice_csv("5,1,2\n"), ValidationError);
    CHECK_THROWS_WITH(parse_choice_csv("5,1,2\n"),
                      Catch::Matchers::ContainsSubstring("line 1"));
}

TEST_CASE("set smaller than 2 after dedup is rejected") {
    CHECK_THROWS_AS(parse_choice_csv("1,1,1\n"), ValidationError);
    CHECK_THROWS_AS(parse_choice_csv("1,2\n"), ValidationError);
}

TEST_CASE("n= directive switches to integer-index mode") {
    const ComparisonDataset ds = parse_choice_csv("n=4\n0,0,1\n3,2,3\n");
    CHECK(ds.n_items == 4);
    CHECK(ds.labels.empty());
    CHECK(ds.comparisons[1].winner == 3);

    CHECK_THROWS_AS(parse_choice_csv("n=4\nx,0,1\n"), ParseError);
    CHECK_THROWS_AS(parse_choice_csv("n=2\n0,0,5\n"), ValidationError);
}

TEST_CASE("header, comments, blank lines, and repeated winner tokens") {
    const ComparisonDataset ds =
        parse_choice_csv("winner,set\n# a comment\n\n3,2,3,4,5,3\n2,1,2,3\n");
    CHECK(ds.n_items == 5);
    CHECK(ds.comparisons[0].choice_set.size() == 4);
}

TEST_CASE("rank rows require the multilevel flag and share a group") {
    CHECK_THROWS_AS(parse_choice_csv("rank:1>2>3\n"), ValidationError);
    const ComparisonDataset ds =
        parse_choice_csv("rank:1>2>3\nrank:3>1\n", BreakMode::multilevel);
    REQUIRE(ds.comparisons.size() == 3);
    CHECK(ds.groups == std::vector<std::uint32_t>{0, 0, 1});
    CHECK(ds.has_nontrivial_groups());
    CHECK(ds.group_count() == 2);
    CHECK_THROWS_AS(parse_choice_csv("rank:1>2>1\n", BreakMode::multilevel), ValidationError);
}

TEST_CASE("multi-level breaking produces the nested selection events") {
    SECTION("three items") {
        const auto broken = break_full_ranking({{7, 3, 5}});
        REQUIRE(broken.size() == 2);
        CHECK(broken[0].winner == 7);
        CHECK(broken[0].choice_set == std::vector<std::uint32_t>{7, 3, 5});
        CHECK(broken[1].winner == 3);
        CHECK(broken[1].choice_set == std::vector<std::uint32_t>{3, 5});
    }
    SECTION("pairwise is its own breaking") {
        const auto broken = break_full_ranking({{4, 9}});
        REQUIRE(broken.size() == 1);
        CHECK(broken[0].winner == 4);
        CHECK(broken[0].choice_set == std::vector<std::uint32_t>{4, 9});
    }
    SECTION("four items give sets of sizes 4,3,2") {
        const auto broken = break_full_ranking({{1, 2, 3, 4}});
        REQUIRE(broken.size() == 3);
        CHECK(broken[0].choice_set.size() == 4);
        CHECK(broken[1].choice_set.size() == 3);
        CHECK(broken[2].choice_set.size() == 2);
    }
    SECTION("output length is B-1 and the first set is the whole ranking") {
        Rng rng(5);
        for (int trial = 0; trial < 20; ++trial) {
            const std::uint32_t b = 2 + rng.below(6);
            std::vector<std::uint32_t> items(20);
            std::iota(items.begin(), items.end(), 0u);
            for (std::uint32_t i = 19; i > 0; --i)
                std::swap(items[i], items[rng.below(i + 1)]);
            items.resize(b);
            const auto broken = break_full_ranking({items});
            REQUIRE(broken.size() == items.size() - 1);
            auto sorted_set = broken[0].choice_set;
            auto sorted_items = items;
            std::sort(sorted_set.begin(), sorted_set.end());
            std::sort(sorted_items.begin(), sorted_items.end());
            CHECK(sorted_set == sorted_items);
        }
    }
    SECTION("duplicates rejected") {
        CHECK_THROWS_AS(break_full_ranking({{1, 2, 1}}), ValidationError);
    }
}

TEST_CASE("dataset_from_rankings tags groups by ranking") {
    const std::vector<FullRanking> rankings{{{0, 1, 2}}, {{2, 0}}};
    const ComparisonDataset ds = dataset_from_rankings(rankings, 3);
    REQUIRE(ds.comparisons.size() == 3);
    CHECK(ds.groups == std::vector<std::uint32_t>{0, 0, 1});
}

TEST_CASE("resolve_item uses labels when present else indices") {
    const ComparisonDataset labeled = parse_choice_csv("b,a,b\na,a,b\n");
    CHECK(resolve_item(labeled, "a") == 1);
    CHECK_THROWS_AS(resolve_item(labeled, "zz"), ParameterError);
    const ComparisonDataset indexed = parse_choice_csv("n=3\n0,0,1\n1,1,2\n2,0,2\n");
    CHECK(resolve_item(indexed, "2") == 2);
    CHECK_THROWS_AS(resolve_item(indexed, "9"), ParameterError);
}
