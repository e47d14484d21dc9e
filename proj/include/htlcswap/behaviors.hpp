#pragma once

// Party strategies: the conforming program derived from a schedule, the
// primitive deviations layered on top of it, raw scripted actions, and
// seeded random or exhaustive adversaries over a coalition.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "htlcswap/engine.hpp"
#include "htlcswap/schedule.hpp"

namespace htlcswap {

struct Deviation {
    enum class Kind {
        FollowUntil,   // act conformingly through step `at`, then stop
        NeverCreate,   // skip the scheduled creation of `arc`
        DelayCreate,   // create `arc` `delta` steps late
        WrongTimeout,  // create `arc` with timeout `timeout`
        WrongHashlock, // create `arc` with the hashlock of party `target`
        ShareSecret,   // at step `at` hand every known secret to `target`
        ClaimEagerly,  // claim incoming `arc` as soon as a preimage is known
        WithholdClaim, // never claim incoming `arc`
    };
    Kind kind = Kind::NeverCreate;
    ArcId arc = 0;
    Step at = 0;
    Step delta = 0;
    Step timeout = 0;
    Vertex target = 0;

    friend bool operator==(const Deviation&, const Deviation&) = default;
};

std::string to_string(Deviation::Kind k);
Deviation::Kind parse_deviation_kind(const std::string& name);
std::string describe(const SwapDigraph& g, const Deviation& d);

struct ScriptedAction {
    Step step = 0;
    Action action;
};

struct PartyPlan {
    bool conforming = true;             // run the scheduled program
    std::vector<Deviation> deviations;  // applied on top of the program
    std::vector<ScriptedAction> raw;    // extra literal actions
    std::vector<Vertex> pool_with;      // coalition partners receiving every known secret, free of budget
};

/// One plan per party; a default plan is conforming.
struct BehaviorPlan {
    std::vector<PartyPlan> parties;

    static BehaviorPlan conforming(const SwapDigraph& g);
    std::size_t deviation_count() const;
    /// Parties whose plan differs from the plain conforming program.
    std::vector<Vertex> deviators() const;
};

/// Agent for one party. The schedule must outlive the agent.
std::unique_ptr<Agent> make_agent(const SwapDigraph& g, const Schedule& s, Vertex party, const PartyPlan& plan);
std::vector<std::unique_ptr<Agent>> make_agents(const SwapDigraph& g, const Schedule& s, const BehaviorPlan& plan);

/// Executes the plan; horizon auto unless given.
Trace simulate(const SwapDigraph& g, const Schedule& s, const BehaviorPlan& plan, const RunOptions& opts = {});

/// Every primitive deviation applicable to the party under this schedule.
/// Timeout substitutions use the values present in the schedule plus one
/// fresh value; hashlock substitutions use every scheduled protector plus
/// the party itself; delays are 1 and 2 steps.
std::vector<Deviation> deviation_catalog(const SwapDigraph& g, const Schedule& s, Vertex party);

/// Knowledge pooling among coalition members, without deviations.
BehaviorPlan coalition_plan(const SwapDigraph& g, const std::vector<Vertex>& coalition);

std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic per seed: each member draws up to `budget` deviations in
/// total from its catalog; coalition members pool knowledge.
BehaviorPlan random_adversary(const SwapDigraph& g, const Schedule& s, std::uint64_t seed,
                              const std::vector<Vertex>& coalition, int budget);

/// Calls visit for every combination of at most `budget` catalog deviations
/// spread over the coalition, smallest first. Stops early when visit returns false.
/// Returns the number of plans visited.
std::size_t for_each_adversary(const SwapDigraph& g, const Schedule& s, const std::vector<Vertex>& coalition,
                               int budget, const std::function<bool(const BehaviorPlan&)>& visit);

/// Script format: a list of entries, or an object whose "behaviors" member is
/// that list. Entries: {party, conforming}, {party, deviation, ...},
/// {party, step, action, args}, {coalition: [...]}. Unmentioned parties conform.
BehaviorPlan plan_from_json(const SwapDigraph& g, const nlohmann::json& j);
nlohmann::ordered_json plan_to_json(const SwapDigraph& g, const BehaviorPlan& plan);

}  // namespace htlcswap
