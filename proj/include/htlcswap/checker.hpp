#pragma once

// Property suites over the engine: liveness, safety and coalition no-gain
// under sampled or exhaustively enumerated adversaries, trace invariants, and
// small-digraph enumeration cross-checks. Trials run on worker threads; the
// report never depends on the worker count.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "htlcswap/behaviors.hpp"
#include "htlcswap/outcomes.hpp"
#include "htlcswap/schedule.hpp"

namespace htlcswap {

/// Everything needed to rerun a single execution.
struct ReplayBundle {
    std::string property;
    std::string graph_text;
    ProtocolSpec protocol;
    std::vector<std::pair<ArcId, Step>> timeout_overrides;
    std::vector<std::string> coalition;
    nlohmann::ordered_json behaviors = nlohmann::ordered_json::array();
    Step horizon = 0;
    std::uint64_t seed = 0;
    std::uint64_t trace_hash = 0;
    std::string reason;
};

nlohmann::ordered_json bundle_to_json(const ReplayBundle& b);
ReplayBundle bundle_from_json(const nlohmann::json& j);

struct CheckReport {
    std::string property;
    bool pass = true;
    std::size_t instances = 0;
    std::size_t failures = 0;
    std::uint64_t seed = 0;
    double runtime_ms = 0;
    std::vector<ReplayBundle> counterexamples;  // lowest trial indices first
    std::vector<std::string> notes;

    void merge(const CheckReport& other);
};

/// JSON summary; runtime is left out unless asked so reports compare equal.
nlohmann::ordered_json report_to_json(const CheckReport& r, bool with_runtime = false);

struct CheckOptions {
    unsigned workers = 0;           // 0: hardware concurrency
    std::size_t max_counterexamples = 3;
    Step horizon_cap = 10'000;
};

/// Compiled schedule plus the data needed to rebuild it inside a bundle.
struct Instance {
    SwapDigraph graph;
    ProtocolSpec protocol;
    Schedule schedule;
    std::vector<std::pair<ArcId, Step>> timeout_overrides;

    static Instance compile(const SwapDigraph& g, const ProtocolSpec& p);
    Instance with_timeout(ArcId arc, Step timeout) const;
};

/// Schedule invariants plus the realized trace invariants of a conforming run.
std::vector<std::string> trace_violations(const SwapDigraph& g, const Schedule& s, const Trace& t);

/// Conforming run ends with every party in Deal and no invariant violation.
CheckReport check_liveness(const Instance& inst, const CheckOptions& opts = {});

struct AdversaryMode {
    bool exhaustive = false;
    std::size_t trials = 1000;    // randomized
    std::uint64_t seed = 0;       // randomized
    std::size_t max_coalition = 1;
    int budget = 2;
    /// Explicit coalitions (randomized: used round robin); empty means every
    /// coalition up to max_coalition, or a random one per trial.
    std::vector<std::vector<Vertex>> coalitions;
};

struct AdversarialReports {
    CheckReport safety;   // no conforming party Underwater
    CheckReport no_gain;  // coalition never Discount or FreeRide
};

/// One sweep, both verdicts.
AdversarialReports check_adversarial(const Instance& inst, const AdversaryMode& mode, const CheckOptions& opts = {});
CheckReport check_safety(const Instance& inst, const AdversaryMode& mode, const CheckOptions& opts = {});
CheckReport check_coalition_no_gain(const Instance& inst, const AdversaryMode& mode, const CheckOptions& opts = {});

/// Two-phase and ordering invariants of one trace.
CheckReport check_trace_invariants(const SwapDigraph& g, const Schedule& s, const Trace& t);

struct ReplayResult {
    bool failed = false;
    std::uint64_t trace_hash = 0;
    std::string reason;
};

/// Reruns a bundle and re-evaluates its property.
ReplayResult replay(const ReplayBundle& b);

// ---------------------------------------------------------------------------
// Enumeration and sampling

/// Graphs on vertices v0..v{n-1} from an n*n row-major adjacency mask.
SwapDigraph digraph_from_mask(int n, std::uint64_t mask);

struct EnumeratedGraph {
    std::uint64_t mask = 0;      // canonical (minimal) adjacency mask
    std::size_t orbit_size = 0;  // number of labeled graphs isomorphic to it
};

/// Strongly connected digraphs on exactly n vertices (2 <= n <= 5), one per
/// isomorphism class, as minimal masks over all vertex permutations.
std::vector<EnumeratedGraph> strongly_connected_up_to_isomorphism(int n);
std::size_t count_labeled_strongly_connected(int n);

/// Random bottleneck components glued along a random control tree.
SwapDigraph random_reuniclus(std::mt19937_64& rng, int min_vertices, int max_vertices);
/// Uniform arc density drawn per sample, rejected until strongly connected.
SwapDigraph random_strongly_connected_digraph(std::mt19937_64& rng, int n);

struct EnumerationOptions {
    int max_vertices = 4;
    std::size_t safety_trials = 20;  // randomized safety per reuniclus graph, 0 to skip
    std::uint64_t seed = 0;
};

/// Recognizer vs oracle on every class; liveness and randomized safety on the reuniclus ones.
CheckReport enumerate_and_crosscheck(const EnumerationOptions& eo, const CheckOptions& opts = {});

}  // namespace htlcswap
