#pragma once

// Test-only helpers and independent oracles.

#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "htlcswap/swapgraph.hpp"

namespace testsupport {

using namespace htlcswap;

inline SwapDigraph graph(const std::string& text) { return parse_digraph(text); }

inline SwapDigraph three_cycle() { return graph("l a\na b\nb l\n"); }
inline SwapDigraph digon() { return graph("l v\nv l\n"); }
inline SwapDigraph digon_chain() { return graph("a b\nb a\nb c\nc b\n"); }
inline SwapDigraph crossed_square() { return graph("a b\nb c\nc d\nd a\nb a\nd c\n"); }

/// Digraph over vertices named v0..v{n-1} from an n*n adjacency bitmask.
inline SwapDigraph from_mask(int n, std::uint64_t mask) {
    std::vector<std::pair<std::string, std::string>> arcs;
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && (mask >> (i * n + j) & 1)) arcs.emplace_back(names[i], names[j]);
    return SwapDigraph::from_arcs(arcs, names);
}

/// Reachability closure by repeated squaring, independent of the library's search.
inline bool closure_strongly_connected(int n, std::uint64_t mask) {
    std::vector<std::vector<bool>> r(n, std::vector<bool>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) r[i][j] = i == j || (mask >> (i * n + j) & 1);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!r[i][j]) return false;
    return true;
}

/// Every labeled strongly connected digraph on n vertices (n >= 2).
inline std::vector<SwapDigraph> labeled_strongly_connected(int n) {
    std::vector<SwapDigraph> out;
    std::uint64_t full = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) full |= std::uint64_t{1} << (i * n + j);
    for (std::uint64_t m = full;; m = (m - 1) & full) {
        if (closure_strongly_connected(n, m)) out.push_back(from_mask(n, m));
        if (m == 0) break;
    }
    return out;
}

/// Vertex sets of all simple directed cycles, by DFS from each smallest vertex.
inline std::vector<std::set<Vertex>> simple_cycles(const SwapDigraph& g) {
    std::vector<std::set<Vertex>> out;
    std::vector<Vertex> path;
    std::vector<bool> on(g.vertex_count());
    std::function<void(Vertex, Vertex)> dfs = [&](Vertex start, Vertex v) {
        for (ArcId a : g.out_arcs(v)) {
            Vertex w = g.arc(a).buyer;
            if (w == start) out.emplace_back(path.begin(), path.end());
            else if (w > start && !on[w]) {
                on[w] = true;
                path.push_back(w);
                dfs(start, w);
                path.pop_back();
                on[w] = false;
            }
        }
    };
    for (Vertex s = 0; s < g.vertex_count(); ++s) {
        path = {s};
        on.assign(g.vertex_count(), false);
        on[s] = true;
        dfs(s, s);
    }
    return out;
}

/// Longest simple path length between two vertices (-1 if none), exhaustive.
inline int longest_simple_path(const SwapDigraph& g, Vertex from, Vertex to) {
    int best = -1;
    std::vector<bool> on(g.vertex_count());
    std::function<void(Vertex, int)> dfs = [&](Vertex v, int len) {
        if (v == to) {
            best = std::max(best, len);
            return;
        }
        for (ArcId a : g.out_arcs(v)) {
            Vertex w = g.arc(a).buyer;
            if (!on[w]) {
                on[w] = true;
                dfs(w, len + 1);
                on[w] = false;
            }
        }
    };
    on[from] = true;
    dfs(from, 0);
    return best;
}

/// Random strongly connected digraph on n vertices (rejection sampling).
inline SwapDigraph random_strongly_connected(int n, std::mt19937_64& rng, double p = 0.35) {
    std::bernoulli_distribution coin(p);
    for (;;) {
        std::uint64_t m = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && coin(rng)) m |= std::uint64_t{1} << (i * n + j);
        if (closure_strongly_connected(n, m)) return from_mask(n, m);
    }
}

}  // namespace testsupport
