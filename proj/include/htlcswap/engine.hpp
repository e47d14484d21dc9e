#pragma once

// Discrete-time execution of parties acting on hash time-lock contracts.
//
// Each step runs four phases in order: secret pairs and secret sharing,
// contract creation, claims, expiry. Every party decides its actions for step
// t from the state left by step t-1, so knowledge gained at t is usable from
// t+1 on. A claim at t succeeds iff the contract is escrowed, t <= timeout and
// the claimer learned the preimage before t; unclaimed contracts expire on the
// transition out of their timeout step and the refund is stamped timeout+1.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "htlcswap/swapgraph.hpp"

namespace htlcswap {

using Step = int;

/// Symbolic secret; party x owns token x+1, token 0 is never issued.
struct Secret {
    std::uint64_t token = 0;
    friend auto operator<=>(const Secret&, const Secret&) = default;
};

struct Hashlock {
    std::uint64_t value = 0;
    friend auto operator<=>(const Hashlock&, const Hashlock&) = default;
};

/// Injective one-way stand-in (a bijective 64-bit mixer); never inverted.
Hashlock hash(Secret s);
Secret secret_of(Vertex party);
/// Owner of the secret, or nullopt for tokens no party holds.
std::optional<Vertex> secret_owner(Secret s, std::size_t party_count);

struct Contract {
    enum class State { Unplaced, Escrowed, Claimed, Expired };
    State state = State::Unplaced;
    Hashlock hashlock;
    Step timeout = 0;
    Step created_at = 0;
    Step resolved_at = 0;  // claim step, or timeout+1 for expiry
    std::optional<Secret> preimage;

    bool placed() const { return state != State::Unplaced; }
    friend bool operator==(const Contract&, const Contract&) = default;
};

enum class Holder { Seller, Escrow, Buyer };

struct WorldState {
    Step clock = 0;
    std::vector<Contract> contracts;                       // per arc
    std::vector<std::map<Secret, Step>> knowledge;         // party -> secret -> step acquired
    std::vector<std::optional<Secret>> pairs;              // secret pair created by each party

    static WorldState initial(const SwapDigraph& g);
    Holder holder(ArcId a) const;
    /// Party whose secret opens the hashlock, if any party created it.
    std::optional<Vertex> protector(ArcId a) const;
    friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct MakePair {};
struct Share {
    Vertex to = 0;
    Secret secret;
};
struct Create {
    ArcId arc = 0;
    Hashlock hashlock;
    Step timeout = 0;
};
struct Claim {
    ArcId arc = 0;
    Secret secret;
};
/// Marker recorded in the trace when a party stops following its program.
struct Abort {
    std::string reason;
};

using Action = std::variant<MakePair, Share, Create, Claim, Abort>;

/// What a party may observe at the start of a step: its own incident
/// contracts, secrets it learned before the step, and published hashlocks.
class PartyView {
public:
    PartyView(const SwapDigraph& g, const WorldState& state, Vertex self, Step now)
        : g_(g), state_(state), self_(self), now_(now) {}

    const SwapDigraph& graph() const { return g_; }
    Vertex self() const { return self_; }
    Step now() const { return now_; }

    /// Throws std::logic_error for arcs not incident to the party.
    const Contract& contract(ArcId a) const;
    bool knows(Secret s) const;
    std::vector<Secret> known_secrets() const;
    std::optional<Secret> own_secret() const;
    /// Hashlock published by a party's secret pair, if created.
    std::optional<Hashlock> published_hashlock(Vertex party) const;
    /// A known secret opening the given hashlock.
    std::optional<Secret> preimage_of(Hashlock h) const;

private:
    const SwapDigraph& g_;
    const WorldState& state_;
    Vertex self_;
    Step now_;
};

class Agent {
public:
    virtual ~Agent() = default;
    virtual std::vector<Action> act(const PartyView& view) = 0;
    /// Last step at which the agent may still act on its own initiative.
    virtual Step last_active_step() const = 0;
};

enum class Phase { Secrets, Create, Claim, Expire };
std::string to_string(Phase p);

struct Event {
    Step step = 0;
    Phase phase = Phase::Secrets;
    Vertex party = 0;
    std::string kind;  // make_pair, share, create, claim, expire, abort, rejected
    std::optional<ArcId> arc;
    std::optional<Hashlock> hashlock;
    std::optional<Step> timeout;
    std::optional<Secret> secret;
    std::optional<Vertex> to;
    std::string note;
    friend bool operator==(const Event&, const Event&) = default;
};

struct Trace {
    std::vector<Event> events;
    WorldState final_state;
    Step horizon = 0;  // number of executed steps
};

struct RunOptions {
    /// Fixed number of steps; when empty the run stops once every agent is
    /// past its last active step and no contract is escrowed.
    std::optional<Step> horizon;
    Step horizon_cap = 10'000;
};

/// agents[v] drives party v. Illegal attempts become "rejected" events.
Trace run(const SwapDigraph& g, std::vector<std::unique_ptr<Agent>> agents, const RunOptions& opts = {});

/// Rebuilds the final state from the event list alone.
WorldState replay_events(const SwapDigraph& g, const std::vector<Event>& events);

std::string hashlock_label(const SwapDigraph& g, Hashlock h);
std::string secret_label(const SwapDigraph& g, Secret s);

nlohmann::ordered_json event_to_json(const SwapDigraph& g, const Event& e);
/// One JSON object per line, stable field order.
std::string trace_to_jsonl(const SwapDigraph& g, const Trace& t);
/// FNV-1a over the JSON-lines export.
std::uint64_t trace_hash(const SwapDigraph& g, const Trace& t);
std::string hex64(std::uint64_t v);

}  // namespace htlcswap
