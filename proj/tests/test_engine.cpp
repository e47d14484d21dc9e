#include <doctest.h>

#include <set>

#include "htlcswap/behaviors.hpp"
#include "htlcswap/outcomes.hpp"
#include "support.hpp"

using namespace htlcswap;
using namespace testsupport;

namespace {

std::vector<Event> of_kind(const Trace& t, const std::string& kind) {
    std::vector<Event> out;
    for (const auto& e : t.events)
        if (e.kind == kind) out.push_back(e);
    return out;
}

BehaviorPlan script(const SwapDigraph& g, const std::string& text) {
    return plan_from_json(g, nlohmann::json::parse(text));
}

}  // namespace

TEST_CASE("hash is deterministic and injective on issued tokens") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 5000; ++k) {
        CHECK(hash(Secret{k}) == hash(Secret{k}));
        seen.insert(hash(Secret{k}).value);
    }
    CHECK(seen.size() == 5000);
    CHECK(secret_owner(secret_of(3), 5) == std::optional<Vertex>{3});
    CHECK_FALSE(secret_owner(Secret{0}, 5).has_value());
}

TEST_CASE("conforming bdp run on the three cycle") {
    auto g = three_cycle();
    auto s = compile_bdp(g, g.vertex("l"));
    auto t = simulate(g, s, BehaviorPlan::conforming(g));

    std::multiset<Step> creates, claims;
    for (const auto& e : of_kind(t, "create")) creates.insert(e.step);
    for (const auto& e : of_kind(t, "claim")) claims.insert(e.step);
    CHECK(creates == std::multiset<Step>{0, 1, 2});
    CHECK(claims == std::multiset<Step>{3, 4, 5});
    CHECK(of_kind(t, "rejected").empty());
    for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(classify(g, t, {v}).cls == OutcomeClass::Deal);
    for (ArcId a = 0; a < g.arc_count(); ++a) CHECK(t.final_state.holder(a) == Holder::Buyer);
}

TEST_CASE("digon where the follower never creates") {
    auto g = digon();
    auto s = compile_bdp(g, g.vertex("l"));
    auto plan = script(g, R"([{"party":"v","deviation":"never_create","arc":["v","l"]}])");
    auto t = simulate(g, s, plan);

    auto aborts = of_kind(t, "abort");
    REQUIRE(aborts.size() == 2);
    CHECK(g.name(aborts[0].party) == "l");
    CHECK(aborts[0].step == 2);
    // v's remaining program gives up at its claim deadline
    CHECK(g.name(aborts[1].party) == "v");
    CHECK(aborts[1].note == "no secret learned");
    auto expired = of_kind(t, "expire");
    REQUIRE(expired.size() == 1);
    CHECK(*expired[0].arc == g.arc_id("l", "v"));
    CHECK(expired[0].step == 4);  // timeout 3, refunded on leaving step 3
    CHECK(classify(g, t, {g.vertex("l")}).cls == OutcomeClass::NoDeal);
    CHECK(classify(g, t, {g.vertex("v")}).cls == OutcomeClass::NoDeal);
}

TEST_CASE("claims after the timeout are rejected") {
    auto g = digon();
    auto s = compile_bdp(g, g.vertex("l"));
    auto plan = script(g, R"([
        {"party":"l","step":0,"action":"make_pair"},
        {"party":"l","step":0,"action":"create","args":{"arc":["l","v"],"hashlock":"l","timeout":2}},
        {"party":"l","step":0,"action":"share","args":{"to":"v","secret":"l"}},
        {"party":"v","step":3,"action":"claim","args":{"arc":["l","v"],"secret":"l"}}
    ])");
    auto t = simulate(g, s, plan);
    auto rejected = of_kind(t, "rejected");
    REQUIRE(rejected.size() == 1);
    CHECK(rejected[0].note == "contract not escrowed");
    CHECK(t.final_state.contracts[g.arc_id("l", "v")].state == Contract::State::Expired);
    CHECK(t.final_state.contracts[g.arc_id("l", "v")].resolved_at == 3);

    // at exactly the timeout the claim goes through
    auto on_time = script(g, R"([
        {"party":"l","step":0,"action":"make_pair"},
        {"party":"l","step":0,"action":"create","args":{"arc":["l","v"],"hashlock":"l","timeout":2}},
        {"party":"l","step":0,"action":"share","args":{"to":"v","secret":"l"}},
        {"party":"v","step":2,"action":"claim","args":{"arc":["l","v"],"secret":"l"}}
    ])");
    auto u = simulate(g, s, on_time);
    CHECK(u.final_state.contracts[g.arc_id("l", "v")].state == Contract::State::Claimed);
}

TEST_CASE("knowledge acquired at a step is usable from the next step") {
    auto g = digon();
    auto s = compile_bdp(g, g.vertex("l"));
    auto plan = script(g, R"([
        {"party":"l","step":0,"action":"make_pair"},
        {"party":"l","step":0,"action":"create","args":{"arc":["l","v"],"hashlock":"l","timeout":5}},
        {"party":"l","step":0,"action":"share","args":{"to":"v","secret":"l"}},
        {"party":"v","step":0,"action":"claim","args":{"arc":["l","v"],"secret":"l"}},
        {"party":"v","step":1,"action":"claim","args":{"arc":["l","v"],"secret":"l"}}
    ])");
    auto t = simulate(g, s, plan);
    auto rejected = of_kind(t, "rejected");
    REQUIRE(rejected.size() == 1);
    CHECK(rejected[0].step == 0);
    CHECK(rejected[0].note == "secret not known");
    auto claims = of_kind(t, "claim");
    REQUIRE(claims.size() == 1);
    CHECK(claims[0].step == 1);
}

TEST_CASE("illegal actions become rejected events") {
    auto g = three_cycle();
    auto s = compile_bdp(g, g.vertex("l"));
    auto plan = script(g, R"([
        {"party":"a","step":0,"action":"make_pair"},
        {"party":"a","step":1,"action":"create","args":{"arc":["l","a"],"hashlock":"a","timeout":4}},
        {"party":"b","step":1,"action":"claim","args":{"arc":["l","a"],"secret":"l"}},
        {"party":"a","step":3,"action":"claim","args":{"arc":["l","a"],"secret":"a"}},
        {"party":"b","step":2,"action":"share","args":{"to":"a","secret":"l"}}
    ])");
    auto t = simulate(g, s, plan);
    std::vector<std::string> notes;
    for (const auto& e : of_kind(t, "rejected")) notes.push_back(e.note);
    CHECK(std::count(notes.begin(), notes.end(), "only the seller may create") == 1);
    CHECK(std::count(notes.begin(), notes.end(), "only the buyer may claim") == 1);
    CHECK(std::count(notes.begin(), notes.end(), "cannot share an unknown secret") == 1);
    CHECK(std::count(notes.begin(), notes.end(), "wrong preimage") == 1);
}

TEST_CASE("views only expose incident contracts") {
    auto g = three_cycle();
    auto w = WorldState::initial(g);
    PartyView view(g, w, g.vertex("a"), 0);
    CHECK_NOTHROW(view.contract(g.arc_id("l", "a")));
    CHECK_NOTHROW(view.contract(g.arc_id("a", "b")));
    CHECK_THROWS_AS(view.contract(g.arc_id("b", "l")), std::logic_error);
}

TEST_CASE("conforming rdp run on the digon chain") {
    auto g = digon_chain();
    auto s = build_schedule(g, {});
    auto t = simulate(g, s, BehaviorPlan::conforming(g));
    Step last_create = -1, first_claim = 1 << 20;
    for (const auto& e : of_kind(t, "create")) last_create = std::max(last_create, e.step);
    for (const auto& e : of_kind(t, "claim")) first_claim = std::min(first_claim, e.step);
    CHECK(last_create == 2);
    CHECK(first_claim == 3);
    for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(classify(g, t, {v}).cls == OutcomeClass::Deal);
    CHECK(of_kind(t, "make_pair").size() == 2);
}

TEST_CASE("conforming runs reproduce the schedule") {
    for (const auto& g : {three_cycle(), digon(), digon_chain(), graph("a b\nb c\nc a\na c\nc d\nd c\n")}) {
        auto s = build_schedule(g, {});
        auto t = simulate(g, s, BehaviorPlan::conforming(g));
        std::multiset<std::pair<Step, ArcId>> want_create, got_create, want_claim, got_claim;
        for (ArcId a = 0; a < g.arc_count(); ++a) {
            want_create.insert({s.create_time[a], a});
            want_claim.insert({s.claim_time[a], a});
        }
        for (const auto& e : of_kind(t, "create")) {
            got_create.insert({e.step, *e.arc});
            CHECK(*e.timeout == s.timeout[*e.arc]);
            CHECK(*e.hashlock == hash(secret_of(s.hashlock_owner[*e.arc])));
        }
        for (const auto& e : of_kind(t, "claim")) got_claim.insert({e.step, *e.arc});
        CHECK(want_create == got_create);
        CHECK(want_claim == got_claim);
    }
}

TEST_CASE("replay and trace export") {
    auto g = digon_chain();
    auto s = build_schedule(g, {});
    auto plan = script(g, R"([{"party":"c","deviation":"never_create","arc":["c","b"]}])");
    auto t = simulate(g, s, plan);
    CHECK(replay_events(g, t.events) == t.final_state);
    CHECK(trace_hash(g, t) == trace_hash(g, simulate(g, s, plan)));
    CHECK(trace_hash(g, t) != trace_hash(g, simulate(g, s, BehaviorPlan::conforming(g))));

    auto jsonl = trace_to_jsonl(g, t);
    auto first = nlohmann::ordered_json::parse(jsonl.substr(0, jsonl.find('\n')));
    std::vector<std::string> keys;
    for (auto it = first.begin(); it != first.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"step", "phase", "party", "event", "detail"});
    CHECK(first["event"] == "make_pair");

    // events are step monotone
    Step last = 0;
    for (const auto& e : t.events) {
        CHECK(e.step >= last);
        last = e.step;
    }
}

TEST_CASE("explicit horizon leaves contracts unresolved") {
    auto g = three_cycle();
    auto s = compile_bdp(g, g.vertex("l"));
    RunOptions opts;
    opts.horizon = 2;
    auto t = simulate(g, s, BehaviorPlan::conforming(g), opts);
    CHECK(t.horizon == 2);
    CHECK_THROWS_AS(classify(g, t, {0}), std::runtime_error);
}
