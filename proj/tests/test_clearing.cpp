#include <doctest.h>

#include "htlcswap/clearing.hpp"
#include "support.hpp"

using namespace htlcswap;
using namespace testsupport;

namespace {

ClearingResult clear_json(const char* text) { return clear(orders_from_json(nlohmann::json::parse(text))); }

}  // namespace

TEST_CASE("skis for an ipad") {
    auto r = clear_json(R"([{"party":"alice","offers":["ski"],"wants":["ipad"]},
                            {"party":"bob","offers":["ipad"],"wants":["ski"]}])");
    REQUIRE(r.accepted());
    CHECK(*r.graph == graph("alice bob\nbob alice\n"));
    CHECK(r.tags.at({"alice", "bob"}) == "ski");
    CHECK(r.tags.at({"bob", "alice"}) == "ipad");
}

TEST_CASE("three way cycle") {
    auto r = clear_json(R"([{"party":"a","offers":["x"],"wants":["z"]},
                            {"party":"b","offers":["y"],"wants":["x"]},
                            {"party":"c","offers":["z"],"wants":["y"]}])");
    REQUIRE(r.accepted());
    CHECK(*r.graph == graph("a b\nb c\nc a\n"));
}

TEST_CASE("rejection stages") {
    auto unbalanced = clear_json(R"([{"party":"a","offers":["x"],"wants":["y"]},
                                     {"party":"b","offers":["y"],"wants":["x","x"]}])");
    CHECK(unbalanced.stage == ClearingResult::Stage::Unbalanced);
    CHECK(unbalanced.reason.find("tag x") != std::string::npos);

    auto parallel = clear_json(R"([{"party":"a","offers":["x","y"],"wants":["z"]},
                                   {"party":"b","offers":["z"],"wants":["x","y"]}])");
    CHECK(parallel.stage == ClearingResult::Stage::ParallelArcConflict);

    auto self_only = clear_json(R"([{"party":"a","offers":["x"],"wants":["x"]}])");
    CHECK(self_only.stage == ClearingResult::Stage::ParallelArcConflict);

    auto split = clear_json(R"([{"party":"a","offers":["x"],"wants":["y"]},
                                {"party":"b","offers":["y"],"wants":["x"]},
                                {"party":"c","offers":["z"],"wants":["w"]},
                                {"party":"d","offers":["w"],"wants":["z"]}])");
    CHECK(split.stage == ClearingResult::Stage::NotStronglyConnected);

    // one tag per arc of the crossed square
    auto square = clear_json(R"([{"party":"a","offers":["ab"],"wants":["ba","da"]},
                                 {"party":"b","offers":["ba","bc"],"wants":["ab"]},
                                 {"party":"c","offers":["cd"],"wants":["bc","dc"]},
                                 {"party":"d","offers":["da","dc"],"wants":["cd"]}])");
    CHECK(square.stage == ClearingResult::Stage::NotReuniclus);
}

TEST_CASE("least matching that passes every stage") {
    // x goes a->c, b->d (least, but two disjoint digons) or a->d, b->c (one cycle)
    auto r = clear_json(R"([{"party":"a","offers":["x"],"wants":["p"]},
                            {"party":"b","offers":["x"],"wants":["q"]},
                            {"party":"c","offers":["p"],"wants":["x"]},
                            {"party":"d","offers":["q"],"wants":["x"]}])");
    REQUIRE(r.accepted());
    CHECK(*r.graph == graph("a d\nb c\nc a\nd b\n"));
    CHECK(r.matchings_tried == 2);
}

TEST_CASE("malformed orders") {
    CHECK_THROWS_AS(orders_from_json(nlohmann::json::parse(R"({"party":"a"})")), std::invalid_argument);
    CHECK_THROWS_AS(clear_json(R"([{"party":"a","offers":["x"]},{"party":"a","wants":["x"]}])"), std::invalid_argument);
}
