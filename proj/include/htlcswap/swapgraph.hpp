#pragma once

// Swap digraphs: parties are vertices, assets are arcs (seller -> buyer).
// Structural analyses used by the schedule compiler: strong connectivity,
// bottleneck and articulation vertices, blocks, reuniclus recognition and
// the longest-path distance tables that anchor every timeout.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace htlcswap {

using Vertex = std::size_t;
using ArcId = std::size_t;

struct Arc {
    Vertex seller;
    Vertex buyer;
    friend auto operator<=>(const Arc&, const Arc&) = default;
};

class GraphError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Immutable swap digraph. Vertex indices follow the lexicographic order of
/// the party names; arc ids follow the (seller, buyer) index order.
class SwapDigraph {
public:
    SwapDigraph() = default;

    /// Throws GraphError on self-loops, duplicate arcs or empty names.
    static SwapDigraph from_arcs(const std::vector<std::pair<std::string, std::string>>& arcs,
                                 const std::vector<std::string>& extra_vertices = {});

    std::size_t vertex_count() const { return names_.size(); }
    std::size_t arc_count() const { return arcs_.size(); }

    const std::vector<std::string>& names() const { return names_; }
    const std::string& name(Vertex v) const { return names_.at(v); }
    std::optional<Vertex> find(std::string_view name) const;
    Vertex vertex(std::string_view name) const;

    const std::vector<Arc>& arcs() const { return arcs_; }
    const Arc& arc(ArcId a) const { return arcs_.at(a); }
    std::optional<ArcId> find_arc(Vertex seller, Vertex buyer) const;
    ArcId arc_id(std::string_view seller, std::string_view buyer) const;
    bool has_arc(Vertex seller, Vertex buyer) const { return find_arc(seller, buyer).has_value(); }

    const std::vector<ArcId>& out_arcs(Vertex v) const { return out_.at(v); }
    const std::vector<ArcId>& in_arcs(Vertex v) const { return in_.at(v); }

    /// "(u,v)" with party names, for reports.
    std::string arc_label(ArcId a) const;

    /// Subgraph induced by a vertex subset, with names preserved.
    SwapDigraph induced(const std::vector<Vertex>& vertices) const;

    friend bool operator==(const SwapDigraph&, const SwapDigraph&) = default;

private:
    std::vector<std::string> names_;
    std::vector<Arc> arcs_;
    std::vector<std::vector<ArcId>> out_;
    std::vector<std::vector<ArcId>> in_;
};

/// Edge-list text: one `<seller> <buyer>` per line, `#` comments, blank lines ignored.
SwapDigraph parse_digraph(std::string_view text);
SwapDigraph load_digraph(const std::string& path);
std::string to_graph_text(const SwapDigraph& g);

bool is_strongly_connected(const SwapDigraph& g);
bool is_weakly_connected(const SwapDigraph& g);

/// True iff the digraph restricted to vertices with keep[v] has no directed cycle.
bool is_acyclic(const SwapDigraph& g, const std::vector<bool>& keep);
bool is_acyclic(const SwapDigraph& g);

/// Vertices lying on every cycle. Throws GraphError unless g is strongly connected.
std::vector<Vertex> bottleneck_vertices(const SwapDigraph& g);

/// Cut vertices of the underlying undirected graph.
std::vector<Vertex> articulation_vertices(const SwapDigraph& g);

/// Vertex sets (sorted) of the biconnected components of the underlying
/// undirected graph, in a deterministic order.
std::vector<std::vector<Vertex>> biconnected_components(const SwapDigraph& g);

struct ReuniclusDecomposition {
    /// bottlenecks[0] is the main leader.
    std::vector<Vertex> bottlenecks;
    /// components[j] is the sorted vertex set of the component led by bottlenecks[j].
    std::vector<std::vector<Vertex>> components;
    /// parent[j] indexes bottlenecks; nullopt only for the root.
    std::vector<std::optional<std::size_t>> parent;

    std::size_t size() const { return bottlenecks.size(); }
    Vertex main_leader() const { return bottlenecks.front(); }
    bool contains(std::size_t component, Vertex v) const;
    /// Component index containing both endpoints of the arc.
    std::size_t component_of(const SwapDigraph& g, ArcId a) const;
    /// Index j with bottlenecks[j] == v, if v is a designated bottleneck.
    std::optional<std::size_t> led_by(Vertex v) const;
    /// True iff the arc leaves a bottleneck into that bottleneck's own component.
    bool is_bottleneck_edge(const SwapDigraph& g, ArcId a) const;
};

/// Single-component decomposition of a bottleneck digraph.
ReuniclusDecomposition single_component(const SwapDigraph& g, Vertex leader);

struct Recognition {
    enum class Status { Accepted, NotStronglyConnected, NotReuniclus };
    Status status = Status::NotReuniclus;
    std::optional<ReuniclusDecomposition> decomposition;
    std::string reason;

    bool accepted() const { return status == Status::Accepted; }
};

/// Recognize a reuniclus digraph and return the decomposition whose main
/// leader is lexicographically smallest among all valid decompositions.
Recognition reuniclus_decompose(const SwapDigraph& g);

/// Definition check (rg1, rg2, arc cover, rooted tree); empty when valid.
std::vector<std::string> validate_decomposition(const SwapDigraph& g,
                                                const ReuniclusDecomposition& dec);

/// Exhaustive search over component families, bottleneck choices and trees.
/// Returns every valid decomposition (components of size >= 2).
std::vector<ReuniclusDecomposition> brute_force_decompositions(const SwapDigraph& g,
                                                               std::size_t max_vertices = 7);
bool brute_force_reuniclus_oracle(const SwapDigraph& g, std::size_t max_vertices = 7);

struct DistanceTable {
    Vertex leader = 0;
    /// Longest path from the main leader, defined on the root component only.
    std::vector<std::optional<int>> from_leader;
    /// Longest simple path to the main leader.
    std::vector<int> to_leader;
    int dstar = 0;
    /// Constrained longest path from a descendant leader, per vertex and per arc.
    std::vector<int> sub_vertex;
    std::vector<int> sub_arc;
    int bstar = 0;
};

/// Longest-path tables on the DAG obtained by splitting every designated
/// bottleneck into a home-out copy and a copy carrying all other arcs.
DistanceTable compute_distances(const SwapDigraph& g, const ReuniclusDecomposition& dec);

/// Re-checks the recurrences pointwise; empty when they hold.
std::vector<std::string> check_distance_recurrences(const SwapDigraph& g,
                                                    const ReuniclusDecomposition& dec,
                                                    const DistanceTable& d);

nlohmann::ordered_json decomposition_to_json(const SwapDigraph& g, const ReuniclusDecomposition& dec);
nlohmann::ordered_json distances_to_json(const SwapDigraph& g, const DistanceTable& d);

}  // namespace htlcswap
