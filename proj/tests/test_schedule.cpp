#include <doctest.h>

#include <map>

#include "htlcswap/schedule.hpp"
#include "support.hpp"

using namespace htlcswap;
using namespace testsupport;

namespace {

Step tau(const SwapDigraph& g, const Schedule& s, const char* u, const char* v) { return s.timeout[g.arc_id(u, v)]; }

}  // namespace

TEST_CASE("bdp timeouts on the three cycle") {
    auto g = three_cycle();
    auto s = compile_bdp(g, g.vertex("l"));
    CHECK(s.anchor == 3);
    CHECK(tau(g, s, "l", "a") == 5);
    CHECK(tau(g, s, "a", "b") == 4);
    CHECK(tau(g, s, "b", "l") == 3);
    CHECK(s.create_time[g.arc_id("l", "a")] == 0);
    CHECK(s.create_time[g.arc_id("a", "b")] == 1);
    CHECK(s.create_time[g.arc_id("b", "l")] == 2);
    CHECK(validate_schedule_invariants(g, s).ok());
    CHECK(s.secret_owners() == std::vector<Vertex>{g.vertex("l")});
}

TEST_CASE("bdp timeouts on the digon") {
    auto g = digon();
    auto s = compile_bdp(g, g.vertex("l"));
    CHECK(s.anchor == 2);
    CHECK(tau(g, s, "l", "v") == 3);
    CHECK(tau(g, s, "v", "l") == 2);
}

TEST_CASE("bdp rejects leaders that are not bottlenecks") {
    auto g = graph("a b\nb a\nb c\nc b\n");
    CHECK_THROWS_AS(compile_bdp(g, g.vertex("a")), GraphError);
    CHECK_THROWS_AS(compile_bdp(crossed_square(), 0), GraphError);
    CHECK_NOTHROW(compile_bdp(g, g.vertex("b")));
}

TEST_CASE("rdp on the digon chain") {
    auto g = digon_chain();
    auto s = build_schedule(g, {ProtocolSpec::Kind::Rdp, std::nullopt, false});
    CHECK(s.anchor == 3);
    CHECK(tau(g, s, "b", "a") == 3);
    CHECK(tau(g, s, "a", "b") == 4);
    CHECK(tau(g, s, "c", "b") == 4);
    CHECK(tau(g, s, "b", "c") == 5);
    CHECK(s.create_time[g.arc_id("a", "b")] == 0);
    CHECK(s.create_time[g.arc_id("b", "c")] == 0);
    CHECK(s.create_time[g.arc_id("c", "b")] == 1);
    CHECK(s.create_time[g.arc_id("b", "a")] == 2);
    CHECK(g.name(s.hashlock_owner[g.arc_id("a", "b")]) == "a");
    CHECK(g.name(s.hashlock_owner[g.arc_id("b", "a")]) == "a");
    CHECK(g.name(s.hashlock_owner[g.arc_id("b", "c")]) == "b");
    CHECK(g.name(s.hashlock_owner[g.arc_id("c", "b")]) == "b");
    CHECK(s.claim_time[g.arc_id("b", "a")] == 3);
    CHECK(s.claim_time[g.arc_id("c", "b")] == 4);
    CHECK(s.claim_time[g.arc_id("b", "c")] == 5);
    CHECK(validate_schedule_invariants(g, s).ok());
}

TEST_CASE("schedule invariants catch a corrupted timeout") {
    auto g = digon_chain();
    auto s = build_schedule(g, {});
    auto bad = with_timeout(s, g.arc_id("b", "a"), 5);
    auto report = validate_schedule_invariants(g, bad);
    CHECK_FALSE(report.ok());

    auto c = three_cycle();
    auto t = compile_bdp(c, c.vertex("l"));
    CHECK_FALSE(validate_schedule_invariants(c, with_timeout(t, c.arc_id("a", "b"), 6)).ok());
}

TEST_CASE("compiled schedules satisfy the invariants on all small reuniclus graphs") {
    std::map<int, int> compiled;
    for (int n = 2; n <= 4; ++n) {
        for (const auto& g : labeled_strongly_connected(n)) {
            auto rec = reuniclus_decompose(g);
            if (!rec.accepted()) continue;
            auto s = compile_rdp(g, *rec.decomposition);
            auto report = validate_schedule_invariants(g, s);
            INFO(to_graph_text(g));
            for (const auto& v : report.violations) INFO(v);
            REQUIRE(report.ok());
            REQUIRE(s.anchor == s.distances->bstar);
            for (Vertex b : bottleneck_vertices(g)) REQUIRE(validate_schedule_invariants(g, compile_bdp(g, b)).ok());
            ++compiled[n];
        }
    }
    // all 18 strongly connected 3 vertex digraphs except the complete one:
    // its three digons pairwise meet, which no control tree allows
    CHECK(compiled[2] == 1);
    CHECK(compiled[3] == 17);
    CHECK_FALSE(reuniclus_decompose(graph("a b\nb a\nb c\nc b\na c\nc a\n")).accepted());
    CHECK_FALSE(brute_force_reuniclus_oracle(graph("a b\nb a\nb c\nc b\na c\nc a\n")));
    CHECK(compiled[4] > 0);
}

TEST_CASE("bdp anchor equals the longest cycle through the leader") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        auto g = random_strongly_connected(3 + trial % 4, rng, 0.35);
        auto bn = bottleneck_vertices(g);
        if (bn.empty()) continue;
        Vertex l = bn.back();
        auto s = compile_bdp(g, l);
        int longest = 0;
        for (ArcId a : g.in_arcs(l)) longest = std::max(longest, longest_simple_path(g, l, g.arc(a).seller) + 1);
        REQUIRE(s.anchor == longest);
        for (ArcId a = 0; a < g.arc_count(); ++a) {
            Vertex buyer = g.arc(a).buyer;
            REQUIRE(s.timeout[a] == longest + (buyer == l ? 0 : longest_simple_path(g, buyer, l)));
        }
    }
}

TEST_CASE("single hashlock schedule on the crossed square") {
    auto g = crossed_square();
    auto s = compile_single_hashlock(g, g.vertex("a"));
    CHECK(s.anchor == 4);
    CHECK(tau(g, s, "a", "b") == 5);
    CHECK(tau(g, s, "b", "c") == 6);
    CHECK(tau(g, s, "b", "a") == 4);
    CHECK(tau(g, s, "c", "d") == 5);
    CHECK(tau(g, s, "d", "a") == 4);
    CHECK(tau(g, s, "d", "c") == 6);
}

TEST_CASE("schedule export ordering") {
    auto g = three_cycle();
    auto rows = schedule_actions_json(g, compile_bdp(g, g.vertex("l")));
    REQUIRE(rows.is_array());
    int last = -1;
    for (const auto& r : rows) {
        CHECK(r["time"].get<int>() >= last);
        last = r["time"].get<int>();
    }
    CHECK(rows.front()["party"] == "l");
    auto full = schedule_to_json(g, compile_bdp(g, g.vertex("l")));
    CHECK(full.contains("actions"));
}

TEST_CASE("protocol spec json round trip") {
    ProtocolSpec p{ProtocolSpec::Kind::Bdp, std::string("l"), true};
    auto back = protocol_from_json(nlohmann::json::parse(protocol_to_json(p).dump()));
    CHECK(back.kind == p.kind);
    CHECK(back.leader == p.leader);
    CHECK(back.eager_claims);
    CHECK_THROWS(parse_protocol_kind("two-phase-commit"));
}
