#include "htlcswap/swapgraph.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace htlcswap {

// ---------------------------------------------------------------------------
// SwapDigraph

SwapDigraph SwapDigraph::from_arcs(const std::vector<std::pair<std::string, std::string>>& arcs,
                                   const std::vector<std::string>& extra_vertices) {
    std::set<std::string> names(extra_vertices.begin(), extra_vertices.end());
    for (const auto& [u, v] : arcs) {
        if (u.empty() || v.empty()) throw GraphError("empty party name");
        if (u == v) throw GraphError("self-loop on " + u);
        names.insert(u);
        names.insert(v);
    }
    if (names.count("")) throw GraphError("empty party name");

    SwapDigraph g;
    g.names_.assign(names.begin(), names.end());
    g.out_.resize(g.names_.size());
    g.in_.resize(g.names_.size());
    for (const auto& [u, v] : arcs) {
        g.arcs_.push_back({g.vertex(u), g.vertex(v)});
    }
    std::sort(g.arcs_.begin(), g.arcs_.end());
    for (std::size_t i = 1; i < g.arcs_.size(); ++i) {
        if (g.arcs_[i] == g.arcs_[i - 1]) {
            throw GraphError("duplicate arc (" + g.names_[g.arcs_[i].seller] + "," +
                             g.names_[g.arcs_[i].buyer] + ")");
        }
    }
    for (ArcId a = 0; a < g.arcs_.size(); ++a) {
        g.out_[g.arcs_[a].seller].push_back(a);
        g.in_[g.arcs_[a].buyer].push_back(a);
    }
    return g;
}

std::optional<Vertex> SwapDigraph::find(std::string_view name) const {
    auto it = std::lower_bound(names_.begin(), names_.end(), name);
    if (it == names_.end() || *it != name) return std::nullopt;
    return static_cast<Vertex>(it - names_.begin());
}

Vertex SwapDigraph::vertex(std::string_view name) const {
    auto v = find(name);
    if (!v) throw GraphError("unknown party " + std::string(name));
    return *v;
}

std::optional<ArcId> SwapDigraph::find_arc(Vertex seller, Vertex buyer) const {
    Arc key{seller, buyer};
    auto it = std::lower_bound(arcs_.begin(), arcs_.end(), key);
    if (it == arcs_.end() || *it != key) return std::nullopt;
    return static_cast<ArcId>(it - arcs_.begin());
}

ArcId SwapDigraph::arc_id(std::string_view seller, std::string_view buyer) const {
    auto a = find_arc(vertex(seller), vertex(buyer));
    if (!a) throw GraphError("unknown arc (" + std::string(seller) + "," + std::string(buyer) + ")");
    return *a;
}

std::string SwapDigraph::arc_label(ArcId a) const {
    const Arc& arc = arcs_.at(a);
    return "(" + names_[arc.seller] + "," + names_[arc.buyer] + ")";
}

SwapDigraph SwapDigraph::induced(const std::vector<Vertex>& vertices) const {
    std::vector<bool> keep(vertex_count(), false);
    std::vector<std::string> extra;
    for (Vertex v : vertices) {
        keep.at(v) = true;
        extra.push_back(names_[v]);
    }
    std::vector<std::pair<std::string, std::string>> arcs;
    for (const Arc& a : arcs_) {
        if (keep[a.seller] && keep[a.buyer]) arcs.emplace_back(names_[a.seller], names_[a.buyer]);
    }
    return from_arcs(arcs, extra);
}

// ---------------------------------------------------------------------------
// Parsing

SwapDigraph parse_digraph(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> arcs;
    std::set<std::pair<std::string, std::string>> seen;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::vector<std::string> tokens;
        for (std::string tok; fields >> tok;) tokens.push_back(tok);
        if (tokens.empty()) continue;
        if (tokens.size() != 2) throw ParseError(lineno, "expected `<seller> <buyer>`");
        if (tokens[0] == tokens[1]) throw ParseError(lineno, "self-loop on " + tokens[0]);
        if (!seen.insert({tokens[0], tokens[1]}).second) {
            throw ParseError(lineno, "duplicate arc (" + tokens[0] + "," + tokens[1] + ")");
        }
        arcs.emplace_back(tokens[0], tokens[1]);
    }
    if (arcs.empty()) throw ParseError(lineno, "graph has no arcs");
    return SwapDigraph::from_arcs(arcs);
}

SwapDigraph load_digraph(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_digraph(buf.str());
}

std::string to_graph_text(const SwapDigraph& g) {
    std::string out;
    for (const Arc& a : g.arcs()) out += g.name(a.seller) + " " + g.name(a.buyer) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Connectivity

namespace {

std::vector<bool> reach(const SwapDigraph& g, Vertex start, bool forward) {
    std::vector<bool> seen(g.vertex_count(), false);
    std::vector<Vertex> stack{start};
    seen[start] = true;
    while (!stack.empty()) {
        Vertex v = stack.back();
        stack.pop_back();
        const auto& arcs = forward ? g.out_arcs(v) : g.in_arcs(v);
        for (ArcId a : arcs) {
            Vertex w = forward ? g.arc(a).buyer : g.arc(a).seller;
            if (!seen[w]) {
                seen[w] = true;
                stack.push_back(w);
            }
        }
    }
    return seen;
}

std::vector<std::vector<Vertex>> undirected_adjacency(const SwapDigraph& g) {
    std::vector<std::set<Vertex>> adj(g.vertex_count());
    for (const Arc& a : g.arcs()) {
        adj[a.seller].insert(a.buyer);
        adj[a.buyer].insert(a.seller);
    }
    std::vector<std::vector<Vertex>> out(g.vertex_count());
    for (Vertex v = 0; v < g.vertex_count(); ++v) out[v].assign(adj[v].begin(), adj[v].end());
    return out;
}

}  // namespace

bool is_strongly_connected(const SwapDigraph& g) {
    if (g.vertex_count() == 0) return false;
    auto fwd = reach(g, 0, true);
    auto bwd = reach(g, 0, false);
    return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
           std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

bool is_weakly_connected(const SwapDigraph& g) {
    if (g.vertex_count() == 0) return false;
    auto adj = undirected_adjacency(g);
    std::vector<bool> seen(g.vertex_count(), false);
    std::vector<Vertex> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        Vertex v = stack.back();
        stack.pop_back();
        for (Vertex w : adj[v]) {
            if (!seen[w]) {
                seen[w] = true;
                ++count;
                stack.push_back(w);
            }
        }
    }
    return count == g.vertex_count();
}

bool is_acyclic(const SwapDigraph& g, const std::vector<bool>& keep) {
    std::vector<int> indegree(g.vertex_count(), 0);
    for (const Arc& a : g.arcs()) {
        if (keep[a.seller] && keep[a.buyer]) ++indegree[a.buyer];
    }
    std::vector<Vertex> ready;
    std::size_t total = 0;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (!keep[v]) continue;
        ++total;
        if (indegree[v] == 0) ready.push_back(v);
    }
    std::size_t removed = 0;
    while (!ready.empty()) {
        Vertex v = ready.back();
        ready.pop_back();
        ++removed;
        for (ArcId a : g.out_arcs(v)) {
            Vertex w = g.arc(a).buyer;
            if (keep[w] && --indegree[w] == 0) ready.push_back(w);
        }
    }
    return removed == total;
}

bool is_acyclic(const SwapDigraph& g) {
    return is_acyclic(g, std::vector<bool>(g.vertex_count(), true));
}

std::vector<Vertex> bottleneck_vertices(const SwapDigraph& g) {
    if (!is_strongly_connected(g)) throw GraphError("digraph is not strongly connected");
    std::vector<Vertex> out;
    std::vector<bool> keep(g.vertex_count(), true);
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        keep[v] = false;
        if (is_acyclic(g, keep)) out.push_back(v);
        keep[v] = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Blocks (Hopcroft-Tarjan on the underlying simple undirected graph)

namespace {

struct BlockStructure {
    std::vector<std::vector<Vertex>> blocks;
    std::vector<bool> is_cut;
};

BlockStructure compute_blocks(const SwapDigraph& g) {
    const std::size_t n = g.vertex_count();
    auto adj = undirected_adjacency(g);
    BlockStructure bs;
    bs.is_cut.assign(n, false);
    std::vector<int> disc(n, -1), low(n, 0);
    std::vector<std::pair<Vertex, Vertex>> edge_stack;
    int timer = 0;

    std::function<void(Vertex, std::optional<Vertex>)> dfs = [&](Vertex v, std::optional<Vertex> parent) {
        disc[v] = low[v] = timer++;
        int children = 0;
        for (Vertex w : adj[v]) {
            if (parent && w == *parent) continue;
            if (disc[w] == -1) {
                ++children;
                edge_stack.emplace_back(v, w);
                dfs(w, v);
                low[v] = std::min(low[v], low[w]);
                if (low[w] >= disc[v]) {
                    if (parent) bs.is_cut[v] = true;
                    std::set<Vertex> block;
                    while (true) {
                        auto e = edge_stack.back();
                        edge_stack.pop_back();
                        block.insert(e.first);
                        block.insert(e.second);
                        if (e == std::pair<Vertex, Vertex>{v, w}) break;
                    }
                    bs.blocks.emplace_back(block.begin(), block.end());
                }
            } else if (disc[w] < disc[v]) {
                edge_stack.emplace_back(v, w);
                low[v] = std::min(low[v], disc[w]);
            }
        }
        if (!parent && children > 1) bs.is_cut[v] = true;
    };

    for (Vertex v = 0; v < n; ++v) {
        if (disc[v] == -1) {
            dfs(v, std::nullopt);
            if (adj[v].empty()) bs.blocks.push_back({v});
        }
    }
    std::sort(bs.blocks.begin(), bs.blocks.end());
    return bs;
}

}  // namespace

std::vector<Vertex> articulation_vertices(const SwapDigraph& g) {
    auto bs = compute_blocks(g);
    std::vector<Vertex> out;
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (bs.is_cut[v]) out.push_back(v);
    }
    return out;
}

std::vector<std::vector<Vertex>> biconnected_components(const SwapDigraph& g) {
    return compute_blocks(g).blocks;
}

// ---------------------------------------------------------------------------
// Decomposition helpers

bool ReuniclusDecomposition::contains(std::size_t component, Vertex v) const {
    const auto& c = components.at(component);
    return std::binary_search(c.begin(), c.end(), v);
}

std::size_t ReuniclusDecomposition::component_of(const SwapDigraph& g, ArcId a) const {
    const Arc& arc = g.arc(a);
    for (std::size_t j = 0; j < components.size(); ++j) {
        if (contains(j, arc.seller) && contains(j, arc.buyer)) return j;
    }
    throw GraphError("arc " + g.arc_label(a) + " is not covered by the decomposition");
}

std::optional<std::size_t> ReuniclusDecomposition::led_by(Vertex v) const {
    for (std::size_t j = 0; j < bottlenecks.size(); ++j) {
        if (bottlenecks[j] == v) return j;
    }
    return std::nullopt;
}

bool ReuniclusDecomposition::is_bottleneck_edge(const SwapDigraph& g, ArcId a) const {
    auto j = led_by(g.arc(a).seller);
    return j && contains(*j, g.arc(a).buyer);
}

ReuniclusDecomposition single_component(const SwapDigraph& g, Vertex leader) {
    ReuniclusDecomposition dec;
    dec.bottlenecks = {leader};
    std::vector<Vertex> all(g.vertex_count());
    std::iota(all.begin(), all.end(), Vertex{0});
    dec.components = {all};
    dec.parent = {std::nullopt};
    return dec;
}

namespace {

// Reorders components root-first, breadth-first, children by bottleneck index.
ReuniclusDecomposition canonical_order(std::vector<Vertex> bottlenecks,
                                       std::vector<std::vector<Vertex>> components,
                                       std::vector<std::optional<std::size_t>> parent) {
    const std::size_t p = bottlenecks.size();
    std::vector<std::vector<std::size_t>> children(p);
    std::size_t root = p;
    for (std::size_t j = 0; j < p; ++j) {
        if (parent[j]) children[*parent[j]].push_back(j);
        else root = j;
    }
    for (auto& c : children) {
        std::sort(c.begin(), c.end(), [&](std::size_t x, std::size_t y) { return bottlenecks[x] < bottlenecks[y]; });
    }
    std::vector<std::size_t> order;
    std::deque<std::size_t> queue{root};
    while (!queue.empty()) {
        std::size_t j = queue.front();
        queue.pop_front();
        order.push_back(j);
        for (std::size_t c : children[j]) queue.push_back(c);
    }
    std::vector<std::size_t> position(p);
    for (std::size_t i = 0; i < p; ++i) position[order[i]] = i;

    ReuniclusDecomposition dec;
    for (std::size_t j : order) {
        dec.bottlenecks.push_back(bottlenecks[j]);
        std::sort(components[j].begin(), components[j].end());
        dec.components.push_back(components[j]);
        dec.parent.push_back(parent[j] ? std::optional<std::size_t>(position[*parent[j]]) : std::nullopt);
    }
    return dec;
}

bool has_bottleneck(const SwapDigraph& g, const std::vector<Vertex>& vs, Vertex b) {
    std::vector<bool> keep(g.vertex_count(), false);
    for (Vertex v : vs) keep[v] = true;
    keep[b] = false;
    return is_acyclic(g, keep);
}

std::string vertex_list(const SwapDigraph& g, const std::vector<Vertex>& vs) {
    std::string out = "{";
    for (std::size_t i = 0; i < vs.size(); ++i) out += (i ? "," : "") + g.name(vs[i]);
    return out + "}";
}

}  // namespace

// ---------------------------------------------------------------------------
// Recognition
//
// Every component of a decomposition is a union of blocks that share its
// bottleneck, and the component overlap structure is the block-cut tree
// rooted at the main leader. A choice of main leader r therefore fixes the
// decomposition: non-root blocks hang below their parent cut vertex, which
// must be a bottleneck of the block; r must be a bottleneck of every block
// it touches as root.

Recognition reuniclus_decompose(const SwapDigraph& g) {
    Recognition result;
    if (!is_strongly_connected(g)) {
        result.status = Recognition::Status::NotStronglyConnected;
        result.reason = "digraph is not strongly connected";
        return result;
    }

    const std::size_t n = g.vertex_count();
    auto bs = compute_blocks(g);
    const std::size_t nb = bs.blocks.size();

    std::vector<std::vector<bool>> is_bottleneck(nb, std::vector<bool>(n, false));
    for (std::size_t b = 0; b < nb; ++b) {
        bool any = false;
        for (Vertex v : bs.blocks[b]) {
            if (has_bottleneck(g, bs.blocks[b], v)) {
                is_bottleneck[b][v] = true;
                any = true;
            }
        }
        if (!any) {
            result.status = Recognition::Status::NotReuniclus;
            result.reason = "block " + vertex_list(g, bs.blocks[b]) + " has no bottleneck vertex";
            return result;
        }
    }

    std::vector<std::vector<std::size_t>> blocks_at(n);
    for (std::size_t b = 0; b < nb; ++b) {
        for (Vertex v : bs.blocks[b]) blocks_at[v].push_back(b);
    }

    // Block-cut tree traversal from a root; fills parent_cut for every block
    // (nullopt for blocks adjacent to a root cut vertex or the root block).
    struct Rooting {
        std::vector<std::optional<Vertex>> parent_cut;  // per block
        std::vector<std::optional<std::size_t>> parent_block;  // per cut vertex
    };
    auto root_at = [&](Vertex r) -> std::optional<Rooting> {
        Rooting rt;
        rt.parent_cut.assign(nb, std::nullopt);
        rt.parent_block.assign(n, std::nullopt);
        std::vector<bool> block_done(nb, false), cut_done(n, false);
        std::deque<std::size_t> block_queue;
        if (bs.is_cut[r]) {
            cut_done[r] = true;
            for (std::size_t b : blocks_at[r]) {
                if (!is_bottleneck[b][r]) return std::nullopt;
                block_done[b] = true;
                block_queue.push_back(b);
            }
        } else {
            std::size_t b = blocks_at[r].front();
            if (!is_bottleneck[b][r]) return std::nullopt;
            block_done[b] = true;
            block_queue.push_back(b);
        }
        while (!block_queue.empty()) {
            std::size_t b = block_queue.front();
            block_queue.pop_front();
            for (Vertex c : bs.blocks[b]) {
                if (!bs.is_cut[c] || cut_done[c]) continue;
                cut_done[c] = true;
                rt.parent_block[c] = b;
                for (std::size_t child : blocks_at[c]) {
                    if (block_done[child]) continue;
                    if (!is_bottleneck[child][c]) return std::nullopt;
                    block_done[child] = true;
                    rt.parent_cut[child] = c;
                    block_queue.push_back(child);
                }
            }
        }
        return rt;
    };

    for (Vertex r = 0; r < n; ++r) {
        auto rt = root_at(r);
        if (!rt) continue;

        // Group blocks by their component leader.
        std::map<Vertex, std::set<Vertex>> members;
        for (std::size_t b = 0; b < nb; ++b) {
            Vertex leader = rt->parent_cut[b] ? *rt->parent_cut[b] : r;
            members[leader].insert(bs.blocks[b].begin(), bs.blocks[b].end());
        }
        std::vector<Vertex> bottlenecks;
        std::vector<std::vector<Vertex>> components;
        std::map<Vertex, std::size_t> index;
        for (const auto& [leader, vs] : members) {
            index[leader] = bottlenecks.size();
            bottlenecks.push_back(leader);
            components.emplace_back(vs.begin(), vs.end());
        }
        std::vector<std::optional<std::size_t>> parent(bottlenecks.size());
        for (std::size_t j = 0; j < bottlenecks.size(); ++j) {
            Vertex leader = bottlenecks[j];
            if (leader == r) continue;
            std::size_t pb = *rt->parent_block[leader];
            Vertex parent_leader = rt->parent_cut[pb] ? *rt->parent_cut[pb] : r;
            parent[j] = index.at(parent_leader);
        }
        result.status = Recognition::Status::Accepted;
        result.decomposition = canonical_order(bottlenecks, components, parent);
        return result;
    }

    result.status = Recognition::Status::NotReuniclus;
    result.reason = "no main leader admits a control tree of bottleneck components";
    return result;
}

// ---------------------------------------------------------------------------
// Definition check

std::vector<std::string> validate_decomposition(const SwapDigraph& g, const ReuniclusDecomposition& dec) {
    std::vector<std::string> issues;
    const std::size_t p = dec.size();
    if (p == 0) return {"empty decomposition"};
    if (dec.components.size() != p || dec.parent.size() != p) return {"mismatched decomposition sizes"};

    for (std::size_t j = 0; j < p; ++j) {
        const auto& comp = dec.components[j];
        if (!std::is_sorted(comp.begin(), comp.end()) ||
            std::adjacent_find(comp.begin(), comp.end()) != comp.end()) {
            issues.push_back("component " + std::to_string(j) + " is not a sorted vertex set");
            continue;
        }
        if (!dec.contains(j, dec.bottlenecks[j])) {
            issues.push_back("bottleneck " + g.name(dec.bottlenecks[j]) + " outside its component");
            continue;
        }
        auto sub = g.induced(comp);
        if (comp.size() < 2 || !is_strongly_connected(sub)) {
            issues.push_back("component " + vertex_list(g, comp) + " is not strongly connected");
        } else if (!has_bottleneck(g, comp, dec.bottlenecks[j])) {
            issues.push_back(g.name(dec.bottlenecks[j]) + " does not lie on every cycle of " +
                             vertex_list(g, comp));
        }
    }

    // Rooted tree.
    std::size_t roots = 0;
    for (std::size_t j = 0; j < p; ++j) {
        if (!dec.parent[j]) ++roots;
        else if (*dec.parent[j] >= p || *dec.parent[j] == j) issues.push_back("invalid parent index");
    }
    if (roots != 1) issues.push_back("control tree must have exactly one root");
    if (dec.parent[0]) issues.push_back("first bottleneck must be the root");
    for (std::size_t j = 0; j < p; ++j) {
        std::size_t steps = 0;
        std::optional<std::size_t> cur = j;
        while (cur && steps <= p) {
            cur = dec.parent[*cur] && *dec.parent[*cur] < p ? dec.parent[*cur] : std::nullopt;
            ++steps;
        }
        if (steps > p) {
            issues.push_back("control tree has a cycle");
            break;
        }
    }

    // rg2.
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            if (i == j) continue;
            std::vector<Vertex> common;
            std::set_intersection(dec.components[i].begin(), dec.components[i].end(), dec.components[j].begin(),
                                  dec.components[j].end(), std::back_inserter(common));
            bool i_parent_of_j = dec.parent[j] == i;
            bool j_parent_of_i = dec.parent[i] == j;
            if (i_parent_of_j) {
                if (common != std::vector<Vertex>{dec.bottlenecks[j]}) {
                    issues.push_back("components of " + g.name(dec.bottlenecks[i]) + " and " +
                                     g.name(dec.bottlenecks[j]) + " must meet exactly in the child bottleneck");
                }
            } else if (!j_parent_of_i && !common.empty()) {
                issues.push_back("unrelated components of " + g.name(dec.bottlenecks[i]) + " and " +
                                 g.name(dec.bottlenecks[j]) + " intersect");
            }
        }
    }

    // Cover.
    std::vector<bool> covered(g.vertex_count(), false);
    for (const auto& comp : dec.components) {
        for (Vertex v : comp) {
            if (v < covered.size()) covered[v] = true;
        }
    }
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (!covered[v]) issues.push_back("vertex " + g.name(v) + " is in no component");
    }
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        std::size_t count = 0;
        for (std::size_t j = 0; j < p; ++j) {
            if (dec.contains(j, g.arc(a).seller) && dec.contains(j, g.arc(a).buyer)) ++count;
        }
        if (count != 1) issues.push_back("arc " + g.arc_label(a) + " lies in " + std::to_string(count) + " components");
    }
    return issues;
}

// ---------------------------------------------------------------------------
// Brute-force oracle

std::vector<ReuniclusDecomposition> brute_force_decompositions(const SwapDigraph& g, std::size_t max_vertices) {
    const std::size_t n = g.vertex_count();
    if (n > max_vertices || n > 16) {
        throw GraphError("brute-force oracle bound exceeded: " + std::to_string(n) + " > " +
                         std::to_string(max_vertices));
    }
    std::vector<ReuniclusDecomposition> found;
    if (!is_strongly_connected(g)) return found;

    using Mask = std::uint32_t;
    auto to_vertices = [&](Mask m) {
        std::vector<Vertex> vs;
        for (Vertex v = 0; v < n; ++v) {
            if (m & (Mask{1} << v)) vs.push_back(v);
        }
        return vs;
    };

    // Candidate components: induced bottleneck subgraphs on >= 2 vertices.
    struct Candidate {
        Mask mask;
        std::vector<Vertex> bottlenecks;
    };
    std::vector<Candidate> candidates;
    for (Mask m = 1; m < (Mask{1} << n); ++m) {
        if (std::popcount(m) < 2) continue;
        auto vs = to_vertices(m);
        auto sub = g.induced(vs);
        if (!is_strongly_connected(sub)) continue;
        Candidate c{m, {}};
        for (Vertex v : vs) {
            if (has_bottleneck(g, vs, v)) c.bottlenecks.push_back(v);
        }
        if (!c.bottlenecks.empty()) candidates.push_back(std::move(c));
    }

    auto arc_mask = [&](ArcId a) { return (Mask{1} << g.arc(a).seller) | (Mask{1} << g.arc(a).buyer); };

    std::vector<std::size_t> chosen;
    std::function<void()> assign_bottlenecks = [&]() {
        const std::size_t p = chosen.size();
        std::vector<std::size_t> pick(p, 0);
        while (true) {
            std::vector<Vertex> bn(p);
            for (std::size_t j = 0; j < p; ++j) bn[j] = candidates[chosen[j]].bottlenecks[pick[j]];
            std::set<Vertex> distinct(bn.begin(), bn.end());
            bool ok = distinct.size() == p;
            std::vector<std::optional<std::size_t>> parent(p);
            for (std::size_t i = 0; ok && i < p; ++i) {
                for (std::size_t j = i + 1; ok && j < p; ++j) {
                    Mask common = candidates[chosen[i]].mask & candidates[chosen[j]].mask;
                    if (common == 0) continue;
                    if (common == (Mask{1} << bn[j])) {
                        if (parent[j]) ok = false;
                        else parent[j] = i;
                    } else if (common == (Mask{1} << bn[i])) {
                        if (parent[i]) ok = false;
                        else parent[i] = j;
                    } else {
                        ok = false;
                    }
                }
            }
            if (ok) {
                std::size_t roots = std::count_if(parent.begin(), parent.end(), [](const auto& x) { return !x; });
                ok = roots == 1;
                for (std::size_t j = 0; ok && j < p; ++j) {
                    std::optional<std::size_t> cur = j;
                    std::size_t steps = 0;
                    while (cur && steps <= p) {
                        cur = parent[*cur];
                        ++steps;
                    }
                    if (steps > p) ok = false;
                }
            }
            if (ok) {
                std::vector<std::vector<Vertex>> comps;
                for (std::size_t j = 0; j < p; ++j) comps.push_back(to_vertices(candidates[chosen[j]].mask));
                found.push_back(canonical_order(bn, comps, parent));
            }
            std::size_t k = 0;
            while (k < p && ++pick[k] == candidates[chosen[k]].bottlenecks.size()) pick[k++] = 0;
            if (k == p) break;
        }
    };

    std::function<void(std::vector<bool>&)> cover = [&](std::vector<bool>& covered) {
        ArcId next = g.arc_count();
        for (ArcId a = 0; a < g.arc_count(); ++a) {
            if (!covered[a]) {
                next = a;
                break;
            }
        }
        if (next == g.arc_count()) {
            assign_bottlenecks();
            return;
        }
        Mask need = arc_mask(next);
        for (std::size_t c = 0; c < candidates.size(); ++c) {
            if ((candidates[c].mask & need) != need) continue;
            bool compatible = true;
            for (std::size_t other : chosen) {
                if (std::popcount(candidates[c].mask & candidates[other].mask) > 1) {
                    compatible = false;
                    break;
                }
            }
            if (!compatible) continue;
            std::vector<ArcId> newly;
            for (ArcId a = 0; a < g.arc_count(); ++a) {
                if (!covered[a] && (candidates[c].mask & arc_mask(a)) == arc_mask(a)) {
                    covered[a] = true;
                    newly.push_back(a);
                }
            }
            chosen.push_back(c);
            cover(covered);
            chosen.pop_back();
            for (ArcId a : newly) covered[a] = false;
        }
    };

    std::vector<bool> covered(g.arc_count(), false);
    cover(covered);
    return found;
}

bool brute_force_reuniclus_oracle(const SwapDigraph& g, std::size_t max_vertices) {
    return !brute_force_decompositions(g, max_vertices).empty();
}

// ---------------------------------------------------------------------------
// Distances

namespace {

// Split DAG: node v < n is the vertex itself (all arcs except home-out
// arcs of designated bottlenecks); node n + j is the home-out copy of b_j.
struct SplitDag {
    std::size_t nodes = 0;
    std::vector<std::size_t> arc_source;  // per arc id
    std::vector<std::size_t> arc_target;
    std::vector<std::vector<ArcId>> out, in;
    std::vector<std::size_t> topo;
};

SplitDag split_dag(const SwapDigraph& g, const ReuniclusDecomposition& dec, const std::vector<bool>& use_arc) {
    const std::size_t n = g.vertex_count();
    SplitDag dag;
    dag.nodes = n + dec.size();
    dag.arc_source.assign(g.arc_count(), 0);
    dag.arc_target.assign(g.arc_count(), 0);
    dag.out.resize(dag.nodes);
    dag.in.resize(dag.nodes);
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        if (!use_arc[a]) continue;
        const Arc& arc = g.arc(a);
        std::size_t src = arc.seller;
        if (auto j = dec.led_by(arc.seller); j && dec.contains(*j, arc.buyer)) src = n + *j;
        dag.arc_source[a] = src;
        dag.arc_target[a] = arc.buyer;
        dag.out[src].push_back(a);
        dag.in[arc.buyer].push_back(a);
    }
    std::vector<std::size_t> indegree(dag.nodes, 0);
    for (std::size_t v = 0; v < dag.nodes; ++v) indegree[v] = dag.in[v].size();
    std::vector<std::size_t> ready;
    for (std::size_t v = dag.nodes; v-- > 0;) {
        if (indegree[v] == 0) ready.push_back(v);
    }
    while (!ready.empty()) {
        std::size_t v = ready.back();
        ready.pop_back();
        dag.topo.push_back(v);
        for (ArcId a : dag.out[v]) {
            if (--indegree[dag.arc_target[a]] == 0) ready.push_back(dag.arc_target[a]);
        }
    }
    if (dag.topo.size() != dag.nodes) throw GraphError("internal error: split graph is cyclic");
    return dag;
}

}  // namespace

DistanceTable compute_distances(const SwapDigraph& g, const ReuniclusDecomposition& dec) {
    if (auto issues = validate_decomposition(g, dec); !issues.empty()) {
        throw GraphError("invalid decomposition: " + issues.front());
    }
    const std::size_t n = g.vertex_count();
    const Vertex leader = dec.main_leader();
    DistanceTable d;
    d.leader = leader;

    // Constrained distances from descendant leaders, and distances to the main leader.
    auto dag = split_dag(g, dec, std::vector<bool>(g.arc_count(), true));
    d.sub_vertex.assign(n, 0);
    d.sub_arc.assign(g.arc_count(), 0);
    std::vector<int> node_sub(dag.nodes, 0);
    for (std::size_t v : dag.topo) {
        if (v >= n) continue;
        int best = -1;
        for (ArcId a : dag.in[v]) best = std::max(best, dag.arc_source[a] >= n ? 0 : node_sub[dag.arc_source[a]]);
        if (best < 0) throw GraphError("internal error: vertex " + g.name(v) + " has no incoming arc");
        node_sub[v] = best + 1;
        d.sub_vertex[v] = node_sub[v];
    }
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        d.sub_arc[a] = dag.arc_source[a] >= n ? 0 : d.sub_vertex[dag.arc_source[a]];
    }
    d.bstar = d.sub_vertex[leader];

    std::vector<int> node_to(dag.nodes, 0);
    for (auto it = dag.topo.rbegin(); it != dag.topo.rend(); ++it) {
        std::size_t v = *it;
        if (v == leader || v >= n) continue;
        int best = -1;
        for (ArcId a : dag.out[v]) best = std::max(best, node_to[dag.arc_target[a]]);
        if (best < 0) throw GraphError("internal error: vertex " + g.name(v) + " cannot reach the leader");
        node_to[v] = best + 1;
    }
    d.to_leader.assign(node_to.begin(), node_to.begin() + static_cast<std::ptrdiff_t>(n));

    // Distances from the main leader inside the root component.
    std::vector<bool> root_arcs(g.arc_count(), false);
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        root_arcs[a] = dec.contains(0, g.arc(a).seller) && dec.contains(0, g.arc(a).buyer);
    }
    auto root_dag = split_dag(g, dec, root_arcs);
    d.from_leader.assign(n, std::nullopt);
    std::vector<int> from(root_dag.nodes, 0);
    for (std::size_t v : root_dag.topo) {
        if (v >= n || !dec.contains(0, v)) continue;
        int best = -1;
        for (ArcId a : root_dag.in[v]) {
            std::size_t src = root_dag.arc_source[a];
            best = std::max(best, src >= n ? 0 : from[src]);
        }
        from[v] = v == leader ? 0 : best + 1;
        d.from_leader[v] = from[v];
    }
    d.dstar = 0;
    for (ArcId a : g.in_arcs(leader)) {
        if (root_arcs[a]) d.dstar = std::max(d.dstar, *d.from_leader[g.arc(a).seller] + 1);
    }
    return d;
}

std::vector<std::string> check_distance_recurrences(const SwapDigraph& g, const ReuniclusDecomposition& dec,
                                                    const DistanceTable& d) {
    std::vector<std::string> issues;
    const Vertex leader = dec.main_leader();
    auto in_root = [&](ArcId a) { return dec.contains(0, g.arc(a).seller) && dec.contains(0, g.arc(a).buyer); };

    if (d.to_leader.at(leader) != 0) issues.push_back("to_leader(leader) != 0");
    if (d.from_leader.at(leader) != 0) issues.push_back("from_leader(leader) != 0");
    if (d.dstar < 2) issues.push_back("D* < 2");

    for (Vertex y = 0; y < g.vertex_count(); ++y) {
        if (y != leader && dec.contains(0, y)) {
            int best = -1;
            for (ArcId a : g.in_arcs(y)) {
                if (!in_root(a)) continue;
                Vertex z = g.arc(a).seller;
                best = std::max(best, z == leader ? 0 : d.from_leader[z].value_or(-1000));
            }
            if (d.from_leader[y] != best + 1) issues.push_back("from_leader recurrence fails at " + g.name(y));
        }
        if (y != leader) {
            int best = -1;
            for (ArcId a : g.out_arcs(y)) {
                if (dec.is_bottleneck_edge(g, a)) continue;
                best = std::max(best, d.to_leader[g.arc(a).buyer]);
            }
            if (d.to_leader[y] != best + 1) issues.push_back("to_leader recurrence fails at " + g.name(y));
        }
        int best = -1;
        for (ArcId a : g.in_arcs(y)) best = std::max(best, d.sub_arc[a]);
        if (d.sub_vertex[y] != best + 1) issues.push_back("sub-leader recurrence fails at " + g.name(y));
    }
    int dstar = 0;
    for (ArcId a : g.in_arcs(leader)) {
        if (in_root(a)) dstar = std::max(dstar, d.from_leader[g.arc(a).seller].value_or(-1000) + 1);
    }
    if (dstar != d.dstar) issues.push_back("D* mismatch");
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        int expected = dec.is_bottleneck_edge(g, a) ? 0 : d.sub_vertex[g.arc(a).seller];
        if (d.sub_arc[a] != expected) issues.push_back("sub-leader arc value wrong on " + g.arc_label(a));
    }
    if (d.bstar != d.sub_vertex[leader]) issues.push_back("B* != sub-leader distance of the main leader");
    return issues;
}

nlohmann::ordered_json decomposition_to_json(const SwapDigraph& g, const ReuniclusDecomposition& dec) {
    nlohmann::ordered_json j;
    j["bottlenecks"] = nlohmann::ordered_json::array();
    for (Vertex b : dec.bottlenecks) j["bottlenecks"].push_back(g.name(b));
    j["components"] = nlohmann::ordered_json::array();
    for (const auto& comp : dec.components) {
        auto arr = nlohmann::ordered_json::array();
        for (Vertex v : comp) arr.push_back(g.name(v));
        j["components"].push_back(arr);
    }
    j["parent"] = nlohmann::ordered_json::object();
    for (std::size_t k = 0; k < dec.size(); ++k) {
        if (dec.parent[k]) j["parent"][g.name(dec.bottlenecks[k])] = g.name(dec.bottlenecks[*dec.parent[k]]);
    }
    return j;
}

nlohmann::ordered_json distances_to_json(const SwapDigraph& g, const DistanceTable& d) {
    nlohmann::ordered_json j;
    j["leader"] = g.name(d.leader);
    j["Dstar"] = d.dstar;
    j["Bstar"] = d.bstar;
    j["fromLeader"] = nlohmann::ordered_json::object();
    j["toLeader"] = nlohmann::ordered_json::object();
    j["subLeader"] = nlohmann::ordered_json::object();
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (d.from_leader[v]) j["fromLeader"][g.name(v)] = *d.from_leader[v];
        j["toLeader"][g.name(v)] = d.to_leader[v];
        j["subLeader"][g.name(v)] = d.sub_vertex[v];
    }
    j["subLeaderArc"] = nlohmann::ordered_json::object();
    for (ArcId a = 0; a < g.arc_count(); ++a) j["subLeaderArc"][g.arc_label(a)] = d.sub_arc[a];
    return j;
}

}  // namespace htlcswap
