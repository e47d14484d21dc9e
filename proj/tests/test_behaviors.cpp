#include <doctest.h>

#include "htlcswap/behaviors.hpp"
#include "htlcswap/outcomes.hpp"
#include "support.hpp"

using namespace htlcswap;
using namespace testsupport;

namespace {

BehaviorPlan script(const SwapDigraph& g, const std::string& text) {
    return plan_from_json(g, nlohmann::json::parse(text));
}

std::string dump(const SwapDigraph& g, const BehaviorPlan& p) { return plan_to_json(g, p).dump(); }

}  // namespace

TEST_CASE("a party that never creates stalls the whole cycle") {
    auto g = three_cycle();
    auto s = compile_bdp(g, g.vertex("l"));
    auto t = simulate(g, s, script(g, R"([{"party":"a","deviation":"never_create","arc":["a","b"]}])"));
    for (Vertex v = 0; v < 3; ++v) CHECK(classify(g, t, {v}).cls == OutcomeClass::NoDeal);
    int aborts = 0;
    for (const auto& e : t.events) aborts += e.kind == "abort";
    CHECK(aborts == 3);
}

TEST_CASE("leader leaking its secret early cannot hurt conforming parties") {
    // l hands s_l to b at 0; b claims (a,b) as soon as it can; l never pays a.
    auto g = three_cycle();
    auto s = compile_bdp(g, g.vertex("l"));
    auto plan = script(g, R"([
        {"party":"l","deviation":"share_secret","to":"b","at":0},
        {"party":"b","deviation":"claim_eagerly","arc":["a","b"]},
        {"party":"l","deviation":"never_create","arc":["l","a"]}
    ])");
    auto t = simulate(g, s, plan);
    CHECK(classify(g, t, {g.vertex("a")}).acceptable());

    // same leak with l paying: a still ends with a deal or better
    auto leak = script(g, R"([
        {"party":"l","deviation":"share_secret","to":"b","at":0},
        {"party":"b","deviation":"claim_eagerly","arc":["a","b"]}
    ])");
    auto u = simulate(g, s, leak);
    auto a = classify(g, u, {g.vertex("a")});
    CHECK(a.acceptable());
    CHECK(a.transferred_in.size() == 1);
}

TEST_CASE("everyone outside a triple stops early") {
    auto g = graph("a b\nb c\nc d\nd a\n");
    auto s = compile_bdp(g, g.vertex("a"));
    for (Step t = -1; t < s.last_step(); ++t) {
        auto plan = BehaviorPlan::conforming(g);
        plan.parties[g.vertex("d")].deviations.push_back({Deviation::Kind::FollowUntil, 0, t, 0, 0, 0});
        auto trace = simulate(g, s, plan);
        for (const char* v : {"a", "b", "c"}) CHECK(classify(g, trace, {g.vertex(v)}).acceptable());
    }
}

TEST_CASE("budget zero is conforming") {
    auto g = digon_chain();
    auto s = build_schedule(g, {});
    auto plan = random_adversary(g, s, 42, {g.vertex("c")}, 0);
    CHECK(plan.deviation_count() == 0);
    CHECK(plan.deviators().empty());
    auto t = simulate(g, s, plan);
    for (Vertex v = 0; v < 3; ++v) CHECK(classify(g, t, {v}).cls == OutcomeClass::Deal);
}

TEST_CASE("random adversaries are seed deterministic") {
    auto g = digon_chain();
    auto s = build_schedule(g, {});
    std::vector<Vertex> c = {g.vertex("b"), g.vertex("c")};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto p = random_adversary(g, s, seed, c, 3);
        CHECK(dump(g, p) == dump(g, random_adversary(g, s, seed, c, 3)));
        CHECK(p.deviation_count() <= 3);
        for (Vertex v = 0; v < 3; ++v)
            if (std::find(c.begin(), c.end(), v) == c.end()) CHECK(p.parties[v].deviations.empty());
    }
}

TEST_CASE("seed sweep on the digon reaches the withheld creation") {
    auto g = digon();
    auto s = compile_bdp(g, g.vertex("l"));
    Deviation target{Deviation::Kind::NeverCreate, g.arc_id("v", "l"), 0, 0, 0, 0};
    bool found = false;
    for (std::uint64_t seed = 0; seed < 100 && !found; ++seed) {
        auto p = random_adversary(g, s, seed, {g.vertex("v")}, 2);
        for (const auto& d : p.parties[g.vertex("v")].deviations) found = found || d == target;
    }
    CHECK(found);
}

TEST_CASE("exhaustive enumeration size") {
    auto g = digon();
    auto s = compile_bdp(g, g.vertex("l"));
    Vertex v = g.vertex("v");
    std::size_t n = deviation_catalog(g, s, v).size();
    auto count = [&](int budget) { return for_each_adversary(g, s, {v}, budget, [](const BehaviorPlan&) { return true; }); };
    CHECK(count(0) == 1);
    CHECK(count(1) == 1 + n);
    CHECK(count(2) == 1 + n + n * (n - 1) / 2);
    std::size_t stopped = for_each_adversary(g, s, {v}, 2, [](const BehaviorPlan&) { return false; });
    CHECK(stopped == 1);
}

TEST_CASE("catalog covers the primitive kinds") {
    auto g = digon_chain();
    auto s = build_schedule(g, {});
    std::set<Deviation::Kind> kinds;
    for (const auto& d : deviation_catalog(g, s, g.vertex("b"))) kinds.insert(d.kind);
    CHECK(kinds.size() == 8);
    for (const auto& d : deviation_catalog(g, s, g.vertex("b"))) {
        if (d.kind == Deviation::Kind::WrongTimeout) CHECK(d.timeout != s.timeout[d.arc]);
    }
}

TEST_CASE("behavior scripts round trip") {
    auto g = digon_chain();
    auto text = R"({"protocol":"rdp","behaviors":[
        {"party":"a","conforming":true},
        {"party":"b","deviation":"delay_create","arc":["b","a"],"delta":2},
        {"party":"b","deviation":"wrong_hashlock","arc":["b","c"],"hashlock":"a"},
        {"party":"c","step":1,"action":"make_pair"},
        {"party":"c","step":2,"action":"create","args":{"arc":["c","b"],"hashlock":"c","timeout":4}},
        {"coalition":["b","c"]}
    ]})";
    auto p = plan_from_json(g, nlohmann::json::parse(text));
    CHECK(p.parties[g.vertex("a")].conforming);
    CHECK_FALSE(p.parties[g.vertex("c")].conforming);
    CHECK(p.parties[g.vertex("b")].deviations.size() == 2);
    CHECK(p.parties[g.vertex("b")].pool_with == std::vector<Vertex>{g.vertex("c")});
    auto again = plan_from_json(g, nlohmann::json::parse(dump(g, p)));
    CHECK(dump(g, again) == dump(g, p));
    CHECK_THROWS(plan_from_json(g, nlohmann::json::parse(R"([{"party":"zz","conforming":true}])")));
    CHECK_THROWS(plan_from_json(g, nlohmann::json::parse(R"([{"party":"a","deviation":"teleport"}])")));
}

TEST_CASE("a forged claim is rejected by the engine") {
    auto g = three_cycle();
    auto s = compile_bdp(g, g.vertex("l"));
    auto t = simulate(g, s, script(g, R"([
        {"party":"a","conforming":true},
        {"party":"a","step":1,"action":"claim","args":{"arc":["l","a"],"secret":"l"}}
    ])"));
    bool rejected = false;
    for (const auto& e : t.events) rejected = rejected || (e.kind == "rejected" && e.note == "secret not known");
    CHECK(rejected);
    for (Vertex v = 0; v < 3; ++v) CHECK(classify(g, t, {v}).cls == OutcomeClass::Deal);
}
