#pragma once

// Per-party timetables for the bottleneck-digraph protocol (one leader, one
// hashlock) and its hierarchical extension for reuniclus digraphs (one
// hashlock per bottleneck component).

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "htlcswap/swapgraph.hpp"

namespace htlcswap {

using Step = int;

/// Which hashlock a party puts on a contract it creates.
struct HashlockSource {
    enum class Kind { Own, CopyGroup };
    Kind kind = Kind::Own;
    int group = 0;           // CopyGroup: hashlock verified for this incoming group
    Vertex protector = 0;    // party whose secret the schedule intends to protect the contract
};

struct IncomingCheck {
    enum class Rule { Own, Uniform };
    ArcId arc = 0;
    Step timeout = 0;
    Rule rule = Rule::Uniform;
    int group = 0;  // Uniform: all checks in the same group carry one hashlock
};

struct MakeSecretPair {};

/// Abort unless every listed contract exists with the expected timeout and hashlocks.
struct VerifyIncoming {
    std::vector<IncomingCheck> checks;
};

struct CreateContract {
    ArcId arc = 0;
    HashlockSource hashlock;
    Step timeout = 0;
};

/// Claim the listed incoming arcs, either with the party's own secret or with
/// a secret revealed by a claimed contract among `learned_from`; abort when
/// no such contract was claimed by `deadline`.
struct ClaimIncoming {
    std::vector<ArcId> arcs;
    bool own_secret = false;
    std::vector<ArcId> learned_from;
    Step deadline = 0;
    bool eager = false;  // attempt at every step in [time, deadline]
};

using ActionBody = std::variant<MakeSecretPair, VerifyIncoming, CreateContract, ClaimIncoming>;

struct TimedAction {
    Step time = 0;
    ActionBody body;
};

struct Schedule {
    std::string protocol;  // "bdp", "rdp" or "single-hashlock"
    Vertex main_leader = 0;
    Step anchor = 0;       // D* for bdp, B* for rdp
    std::vector<std::vector<TimedAction>> per_party;
    std::vector<Vertex> hashlock_owner;  // per arc
    std::vector<Step> timeout;           // per arc
    std::vector<Step> create_time;       // per arc
    std::vector<Step> claim_time;        // per arc, step the buyer is scheduled to claim
    std::optional<ReuniclusDecomposition> decomposition;
    std::optional<DistanceTable> distances;
    bool eager_claims = false;

    /// Last step at which any party acts.
    Step last_step() const;
    Step max_timeout() const;
    /// Parties that create a secret pair.
    std::vector<Vertex> secret_owners() const;
};

struct CompileOptions {
    /// Followers claim as soon as an outgoing asset is claimed instead of at expiry.
    bool eager_claims = false;
};

/// Throws GraphError unless g is strongly connected and leader is a bottleneck.
Schedule compile_bdp(const SwapDigraph& g, Vertex leader, CompileOptions opts = {});
/// Throws GraphError when dec is not a valid decomposition of g.
Schedule compile_rdp(const SwapDigraph& g, const ReuniclusDecomposition& dec, CompileOptions opts = {});

/// Single-hashlock, two-phase schedule for any strongly connected digraph.
/// Creation steps are breadth-first levels from the leader and each follower
/// only verifies incoming contracts scheduled strictly earlier, so the
/// schedule stays live on graphs that are not bottleneck digraphs. Only used
/// to exhibit attacks on non-reuniclus graphs.
Schedule compile_single_hashlock(const SwapDigraph& g, Vertex leader);

struct ProtocolSpec {
    enum class Kind { Bdp, Rdp, SingleHashlock };
    Kind kind = Kind::Rdp;
    std::optional<std::string> leader;
    bool eager_claims = false;
};

std::string to_string(ProtocolSpec::Kind kind);
ProtocolSpec::Kind parse_protocol_kind(const std::string& name);

/// Compiles the requested protocol; for bdp/single-hashlock without a leader the
/// lexicographically smallest admissible leader is used. Throws GraphError.
Schedule build_schedule(const SwapDigraph& g, const ProtocolSpec& spec);

nlohmann::ordered_json protocol_to_json(const ProtocolSpec& spec);
ProtocolSpec protocol_from_json(const nlohmann::json& j);

struct ScheduleReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

/// Structural properties every atomic HTLC schedule must have: path orderings
/// of creation steps and timeouts, a seller-protected contract on every cycle,
/// and the per-party protector/timeout relations.
ScheduleReport validate_schedule_invariants(const SwapDigraph& g, const Schedule& s);

/// Returns a copy with the arc's timeout replaced in the table, in the
/// seller's creation and in the buyer's verification.
Schedule with_timeout(const Schedule& s, ArcId arc, Step timeout);

/// Rows {party, time, action, arc, hashlockOwner, timeout} ordered by (time, party, arc).
nlohmann::ordered_json schedule_actions_json(const SwapDigraph& g, const Schedule& s);
/// Full export: tables, distances and the action rows.
nlohmann::ordered_json schedule_to_json(const SwapDigraph& g, const Schedule& s);

}  // namespace htlcswap
