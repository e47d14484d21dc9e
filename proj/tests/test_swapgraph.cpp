#include <doctest.h>

#include <algorithm>
#include <random>

#include "support.hpp"

using namespace htlcswap;
using namespace testsupport;

namespace {

std::vector<std::string> names_of(const SwapDigraph& g, const std::vector<Vertex>& vs) {
    std::vector<std::string> out;
    for (Vertex v : vs) out.push_back(g.name(v));
    return out;
}

}  // namespace

TEST_CASE("parse edge lists") {
    auto g = graph("# swap\na b\n\nb a  # back\n");
    CHECK(g.vertex_count() == 2);
    CHECK(g.arc_count() == 2);
    CHECK(g.has_arc(g.vertex("a"), g.vertex("b")));
    CHECK(g.has_arc(g.vertex("b"), g.vertex("a")));

    CHECK_THROWS_WITH_AS(graph("a a\n"), "line 1: self-loop on a", ParseError);
    CHECK_THROWS_WITH_AS(graph("a b\na b\n"), "line 2: duplicate arc (a,b)", ParseError);
    CHECK_THROWS_AS(SwapDigraph::from_arcs({{"a", "a"}}), GraphError);
    CHECK_THROWS_AS(graph("a b c\n"), ParseError);
    CHECK_THROWS_AS(graph("a\n"), ParseError);

    CHECK(parse_digraph(to_graph_text(crossed_square())) == crossed_square());
}

TEST_CASE("strong connectivity") {
    CHECK(is_strongly_connected(digon()));
    CHECK_FALSE(is_strongly_connected(graph("a b\n")));
    CHECK(is_strongly_connected(crossed_square()));
    CHECK_FALSE(is_strongly_connected(graph("a b\nb a\nc d\nd c\n")));
}

TEST_CASE("labeled strongly connected counts agree with closure enumeration") {
    // 1, 18, 1606 labeled strongly connected digraphs on 2, 3, 4 vertices.
    CHECK(labeled_strongly_connected(2).size() == 1);
    CHECK(labeled_strongly_connected(3).size() == 18);
    auto four = labeled_strongly_connected(4);
    CHECK(four.size() == 1606);
    for (const auto& g : four) REQUIRE(is_strongly_connected(g));
}

TEST_CASE("bottleneck vertices") {
    auto c = three_cycle();
    CHECK(names_of(c, bottleneck_vertices(c)) == std::vector<std::string>{"a", "b", "l"});
    CHECK(bottleneck_vertices(crossed_square()).empty());
    CHECK(bottleneck_vertices(digon()).size() == 2);
    CHECK_THROWS_AS(bottleneck_vertices(graph("a b\n")), GraphError);
}

TEST_CASE("bottleneck vertices match simple-cycle intersection") {
    std::mt19937_64 rng(7);
    for (int n = 2; n <= 6; ++n) {
        for (int trial = 0; trial < 60; ++trial) {
            auto g = random_strongly_connected(n, rng, n <= 4 ? 0.4 : 0.3);
            std::vector<Vertex> expected;
            auto cycles = simple_cycles(g);
            for (Vertex v = 0; v < g.vertex_count(); ++v) {
                if (std::all_of(cycles.begin(), cycles.end(), [&](const auto& c) { return c.count(v) > 0; }))
                    expected.push_back(v);
            }
            REQUIRE(bottleneck_vertices(g) == expected);
        }
    }
}

TEST_CASE("articulation vertices") {
    auto chain = digon_chain();
    CHECK(names_of(chain, articulation_vertices(chain)) == std::vector<std::string>{"b"});
    CHECK(articulation_vertices(digon()).empty());
    // two digon stars around u and w, joined by the digon u<->w
    auto stars = graph("u x\nx u\nu y\ny u\nu w\nw u\nw p\np w\nw q\nq w\n");
    CHECK(names_of(stars, articulation_vertices(stars)) == std::vector<std::string>{"u", "w"});
}

TEST_CASE("articulation vertices match removal test") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        auto g = random_strongly_connected(2 + trial % 5, rng, 0.3);
        std::vector<Vertex> expected;
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            std::vector<Vertex> rest;
            for (Vertex w = 0; w < g.vertex_count(); ++w)
                if (w != v) rest.push_back(w);
            if (!rest.empty() && !is_weakly_connected(g.induced(rest))) expected.push_back(v);
        }
        REQUIRE(articulation_vertices(g) == expected);
    }
}

TEST_CASE("decomposition of the digon chain") {
    auto g = digon_chain();
    auto rec = reuniclus_decompose(g);
    REQUIRE(rec.accepted());
    const auto& d = *rec.decomposition;
    REQUIRE(d.size() == 2);
    CHECK(g.name(d.bottlenecks[0]) == "a");
    CHECK(g.name(d.bottlenecks[1]) == "b");
    CHECK(names_of(g, d.components[0]) == std::vector<std::string>{"a", "b"});
    CHECK(names_of(g, d.components[1]) == std::vector<std::string>{"b", "c"});
    CHECK(!d.parent[0].has_value());
    CHECK(d.parent[1] == std::optional<std::size_t>{0});
    CHECK(validate_decomposition(g, d).empty());

    auto j = decomposition_to_json(g, d);
    CHECK(j["parent"]["b"] == "a");
}

TEST_CASE("rejections") {
    auto rec = reuniclus_decompose(crossed_square());
    CHECK(rec.status == Recognition::Status::NotReuniclus);
    CHECK_FALSE(rec.reason.empty());
    CHECK_FALSE(brute_force_reuniclus_oracle(crossed_square()));
    CHECK(reuniclus_decompose(graph("a b\n")).status == Recognition::Status::NotStronglyConnected);
}

TEST_CASE("bottleneck digraphs are single components") {
    auto c = three_cycle();
    auto rec = reuniclus_decompose(c);
    REQUIRE(rec.accepted());
    CHECK(rec.decomposition->size() == 1);
    CHECK(c.name(rec.decomposition->main_leader()) == "a");
    CHECK(brute_force_reuniclus_oracle(c));
    CHECK(brute_force_reuniclus_oracle(digon_chain()));
}

TEST_CASE("recognizer agrees with the definition oracle on every labeled graph up to 4 vertices") {
    for (int n = 2; n <= 4; ++n) {
        for (const auto& g : labeled_strongly_connected(n)) {
            auto rec = reuniclus_decompose(g);
            bool oracle = brute_force_reuniclus_oracle(g);
            REQUIRE(rec.accepted() == oracle);
            if (rec.accepted()) {
                REQUIRE(validate_decomposition(g, *rec.decomposition).empty());
                // designated bottlenecks form a feedback vertex set
                std::vector<bool> keep(g.vertex_count(), true);
                for (Vertex b : rec.decomposition->bottlenecks) keep[b] = false;
                REQUIRE(is_acyclic(g, keep));
                // every bottleneck digraph is accepted
            }
            if (!bottleneck_vertices(g).empty()) REQUIRE(rec.accepted());
        }
    }
}

TEST_CASE("recognizer agrees with the oracle on random 5 and 6 vertex graphs") {
    std::mt19937_64 rng(3);
    int accepted = 0;
    for (int trial = 0; trial < 300; ++trial) {
        int n = trial % 2 ? 5 : 6;
        auto g = random_strongly_connected(n, rng, 0.25);
        auto rec = reuniclus_decompose(g);
        REQUIRE(rec.accepted() == brute_force_reuniclus_oracle(g));
        accepted += rec.accepted();
    }
    CHECK(accepted > 0);
}

TEST_CASE("main leader is the smallest admissible one") {
    for (const auto& g : labeled_strongly_connected(4)) {
        auto rec = reuniclus_decompose(g);
        if (!rec.accepted()) continue;
        auto all = brute_force_decompositions(g);
        Vertex smallest = all.front().main_leader();
        for (const auto& d : all) smallest = std::min(smallest, d.main_leader());
        REQUIRE(rec.decomposition->main_leader() == smallest);
    }
}

TEST_CASE("distances on bottleneck digraphs") {
    auto c = three_cycle();
    auto d = compute_distances(c, single_component(c, c.vertex("l")));
    CHECK(d.from_leader[c.vertex("l")] == 0);
    CHECK(d.from_leader[c.vertex("a")] == 1);
    CHECK(d.from_leader[c.vertex("b")] == 2);
    CHECK(d.to_leader[c.vertex("l")] == 0);
    CHECK(d.to_leader[c.vertex("a")] == 2);
    CHECK(d.to_leader[c.vertex("b")] == 1);
    CHECK(d.dstar == 3);
    CHECK(d.bstar == 3);

    auto g = digon();
    auto e = compute_distances(g, single_component(g, g.vertex("l")));
    CHECK(e.from_leader[g.vertex("v")] == 1);
    CHECK(e.to_leader[g.vertex("v")] == 1);
    CHECK(e.dstar == 2);
}

TEST_CASE("distances on the digon chain") {
    auto g = digon_chain();
    auto dec = *reuniclus_decompose(g).decomposition;
    auto d = compute_distances(g, dec);
    CHECK(d.sub_arc[g.arc_id("a", "b")] == 0);
    CHECK(d.sub_arc[g.arc_id("b", "c")] == 0);
    CHECK(d.sub_arc[g.arc_id("c", "b")] == 1);
    CHECK(d.sub_arc[g.arc_id("b", "a")] == 2);
    CHECK(d.bstar == 3);
    CHECK(d.to_leader == std::vector<int>{0, 1, 2});
    CHECK(check_distance_recurrences(g, dec, d).empty());
}

TEST_CASE("bottleneck digraph distances match exhaustive path search") {
    std::mt19937_64 rng(5);
    int seen = 0;
    for (int trial = 0; trial < 400 && seen < 150; ++trial) {
        auto g = random_strongly_connected(3 + trial % 4, rng, 0.35);
        auto bn = bottleneck_vertices(g);
        if (bn.empty()) continue;
        ++seen;
        Vertex l = bn.front();
        auto d = compute_distances(g, single_component(g, l));
        int dstar = 0;
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            if (v == l) continue;
            REQUIRE(d.from_leader[v] == longest_simple_path(g, l, v));
            REQUIRE(d.to_leader[v] == longest_simple_path(g, v, l));
            if (g.has_arc(v, l)) dstar = std::max(dstar, longest_simple_path(g, l, v) + 1);
        }
        REQUIRE(d.dstar == dstar);
        REQUIRE(d.bstar == dstar);
        REQUIRE(check_distance_recurrences(g, single_component(g, l), d).empty());
    }
    CHECK(seen >= 100);
}

TEST_CASE("distance recurrences hold on every accepted 4 vertex graph") {
    for (const auto& g : labeled_strongly_connected(4)) {
        auto rec = reuniclus_decompose(g);
        if (!rec.accepted()) continue;
        auto d = compute_distances(g, *rec.decomposition);
        REQUIRE(check_distance_recurrences(g, *rec.decomposition, d).empty());
        REQUIRE(d.dstar >= 2);
    }
}
