#pragma once

// Turns offer/want orders into a swap digraph: per asset tag, offering
// parties are matched one-to-one with wanting parties.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htlcswap/swapgraph.hpp"

namespace htlcswap {

struct Order {
    std::string party;
    std::vector<std::string> offers;
    std::vector<std::string> wants;
};

struct ClearingResult {
    enum class Stage { Accepted, Unbalanced, ParallelArcConflict, NotStronglyConnected, NotReuniclus };
    Stage stage = Stage::Accepted;
    std::string reason;
    std::optional<SwapDigraph> graph;
    std::map<std::pair<std::string, std::string>, std::string> tags;  // (seller, buyer) -> asset tag
    std::size_t matchings_tried = 0;

    bool accepted() const { return stage == Stage::Accepted; }
};

std::string to_string(ClearingResult::Stage s);

struct ClearingOptions {
    /// Matchings explored before giving up on finding a better one.
    std::size_t search_cap = 100'000;
};

/// Among all per-tag matchings without self-trades or parallel arcs, returns
/// the one whose sorted arc list is lexicographically least and whose graph
/// is strongly connected and reuniclus. On failure reports the furthest
/// stage any matching reached.
ClearingResult clear(const std::vector<Order>& orders, const ClearingOptions& opts = {});

std::vector<Order> orders_from_json(const nlohmann::json& j);

}  // namespace htlcswap
