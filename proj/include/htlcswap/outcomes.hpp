#pragma once

// Outcome classes for a party or coalition, from the final contract states.

#include <string>
#include <vector>

#include <json.hpp>

#include "htlcswap/engine.hpp"

namespace htlcswap {

enum class OutcomeClass { Deal, NoDeal, Discount, FreeRide, Underwater };
std::string to_string(OutcomeClass c);

struct Outcome {
    std::vector<Vertex> subject;       // sorted
    std::vector<ArcId> incoming;       // arcs entering the subject from outside
    std::vector<ArcId> outgoing;
    std::vector<ArcId> transferred_in; // subsets of the above whose contracts were claimed
    std::vector<ArcId> transferred_out;
    OutcomeClass cls = OutcomeClass::NoDeal;

    bool acceptable() const { return cls != OutcomeClass::Underwater; }
};

/// Class of an (in, out) transfer pair given the full in/out arc counts.
OutcomeClass classify_counts(std::size_t in, std::size_t all_in, std::size_t out, std::size_t all_out);

/// Throws std::runtime_error while any contract is still escrowed.
Outcome classify(const SwapDigraph& g, const WorldState& final_state, std::vector<Vertex> parties);
inline Outcome classify(const SwapDigraph& g, const Trace& t, std::vector<Vertex> parties) {
    return classify(g, t.final_state, std::move(parties));
}

/// (p1) dominance: a gets at least b's incoming, gives at most b's outgoing, and differs.
/// Throws std::invalid_argument for different subjects.
bool dominates(const Outcome& a, const Outcome& b);

nlohmann::ordered_json outcome_to_json(const SwapDigraph& g, const Outcome& o);

}  // namespace htlcswap
