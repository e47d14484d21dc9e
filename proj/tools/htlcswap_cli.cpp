// htlcswap: recognize, schedule, simulate, check and clear from the shell.
// Exit codes: 0 ok, 1 input or usage error, 2 rejection or property failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "htlcswap/behaviors.hpp"
#include "htlcswap/checker.hpp"
#include "htlcswap/clearing.hpp"
#include "htlcswap/outcomes.hpp"

using namespace htlcswap;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kOk = 0, kInput = 1, kRejected = 2;

struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

SwapDigraph read_graph(const std::string& path) {
    try {
        return load_digraph(path);
    } catch (const std::exception& e) {
        throw InputError(path + ": " + e.what());
    }
}

std::string quote(const std::string& s) {
    if (!s.empty() && s.find_first_of(" \t'\"$\\") == std::string::npos) return s;
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

Step default_horizon_cap() {
    if (const char* v = std::getenv("HTLCSWAP_HORIZON_CAP")) {
        try {
            Step cap = std::stoi(v);
            if (cap > 0) return cap;
        } catch (const std::exception&) {
        }
        throw InputError(std::string("bad HTLCSWAP_HORIZON_CAP: ") + v);
    }
    return RunOptions{}.horizon_cap;
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

struct Common {
    std::uint64_t seed = 0;
    unsigned workers = 0;
};

struct ProtoFlags {
    std::string protocol = "rdp";
    std::string leader;
    bool eager = false;

    void add(CLI::App* app) {
        app->add_option("--protocol", protocol, "bdp, rdp or single-hashlock")
            ->check(CLI::IsMember({"bdp", "rdp", "single-hashlock"}));
        app->add_option("--leader", leader, "leader for bdp/single-hashlock");
        app->add_flag("--eager", eager, "claim incoming assets as soon as possible");
    }
    ProtocolSpec spec() const {
        ProtocolSpec p;
        p.kind = parse_protocol_kind(protocol);
        if (!leader.empty()) p.leader = leader;
        p.eager_claims = eager;
        return p;
    }
};

int cmd_recognize(const std::string& path) {
    auto g = read_graph(path);
    auto rec = reuniclus_decompose(g);
    if (!rec.accepted()) {
        ordered_json j;
        j["accepted"] = false;
        j["status"] = rec.status == Recognition::Status::NotStronglyConnected ? "not strongly connected" : "not reuniclus";
        j["reason"] = rec.reason;
        emit(j);
        std::cerr << "rejected: " << rec.reason << "\n";
        return kRejected;
    }
    ordered_json j;
    j["accepted"] = true;
    j["decomposition"] = decomposition_to_json(g, *rec.decomposition);
    j["distances"] = distances_to_json(g, compute_distances(g, *rec.decomposition));
    emit(j);
    return kOk;
}

int cmd_schedule(const std::string& path, const ProtoFlags& pf) {
    auto g = read_graph(path);
    try {
        emit(schedule_to_json(g, build_schedule(g, pf.spec())));
    } catch (const GraphError& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return kRejected;
    }
    return kOk;
}

int cmd_simulate(const std::string& path, const std::string& behaviors, const ProtoFlags& pf, Step horizon) {
    auto g = read_graph(path);
    BehaviorPlan plan = BehaviorPlan::conforming(g);
    if (!behaviors.empty()) {
        auto j = read_json(behaviors);
        try {
            plan = plan_from_json(g, j);
        } catch (const std::exception& e) {
            throw InputError(behaviors + ": " + e.what());
        }
    }
    Schedule s;
    try {
        s = build_schedule(g, pf.spec());
    } catch (const GraphError& e) {
        std::cerr << "rejected: " << e.what() << "\n";
        return kRejected;
    }
    RunOptions ro;
    ro.horizon_cap = default_horizon_cap();
    if (horizon > 0) ro.horizon = horizon;
    Trace t = simulate(g, s, plan, ro);
    std::cout << trace_to_jsonl(g, t);

    ordered_json report;
    report["horizon"] = t.horizon;
    report["traceHash"] = hex64(trace_hash(g, t));
    bool resolved = true;
    for (const auto& c : t.final_state.contracts)
        if (c.state == Contract::State::Escrowed) resolved = false;
    report["resolved"] = resolved;
    ordered_json outcomes = ordered_json::array();
    if (resolved) {
        for (Vertex v = 0; v < g.vertex_count(); ++v) outcomes.push_back(outcome_to_json(g, classify(g, t, {v})));
        auto dev = plan.deviators();
        if (!dev.empty()) report["coalition"] = outcome_to_json(g, classify(g, t, dev));
    }
    report["outcomes"] = outcomes;
    std::cout << ordered_json{{"report", report}}.dump() << "\n";
    return kOk;
}

struct CheckFlags {
    std::string suite = "liveness";
    std::string graph;
    bool exhaustive = false;
    int budget = 2;
    std::size_t trials = 1000;
    std::size_t coalition_size = 1;
    int n = 4;
    std::size_t max_counterexamples = 3;
};

int cmd_check(const CheckFlags& cf, const ProtoFlags& pf, const Common& common) {
    CheckOptions opts;
    opts.workers = common.workers;
    opts.max_counterexamples = cf.max_counterexamples;
    opts.horizon_cap = default_horizon_cap();

    if (cf.suite == "replay") {
        if (cf.graph.empty()) throw InputError("replay needs a bundle file");
        ReplayBundle b;
        try {
            b = bundle_from_json(read_json(cf.graph));
        } catch (const InputError&) {
            throw;
        } catch (const std::exception& e) {
            throw InputError(cf.graph + ": " + e.what());
        }
        auto r = replay(b);
        ordered_json j;
        j["property"] = b.property;
        j["failed"] = r.failed;
        j["reason"] = r.reason;
        j["traceHash"] = hex64(r.trace_hash);
        j["matchesBundle"] = r.trace_hash == b.trace_hash;
        emit(j);
        return r.failed ? kRejected : kOk;
    }

    CheckReport report;
    if (cf.suite == "enumerate") {
        if (cf.n < 2 || cf.n > 5) throw InputError("--n must be in 2..5");
        EnumerationOptions eo;
        eo.max_vertices = cf.n;
        eo.seed = common.seed;
        eo.safety_trials = cf.trials;
        report = enumerate_and_crosscheck(eo, opts);
    } else {
        if (cf.graph.empty()) throw InputError("--suite " + cf.suite + " needs a graph file");
        auto g = read_graph(cf.graph);
        Instance inst;
        try {
            inst = Instance::compile(g, pf.spec());
        } catch (const GraphError& e) {
            std::cerr << "rejected: " << e.what() << "\n";
            return kRejected;
        }
        AdversaryMode mode;
        mode.exhaustive = cf.exhaustive;
        mode.trials = cf.trials;
        mode.seed = common.seed;
        mode.max_coalition = cf.coalition_size;
        mode.budget = cf.budget;
        if (cf.suite == "liveness") {
            report = check_liveness(inst, opts);
        } else if (cf.suite == "safety") {
            report = check_safety(inst, mode, opts);
        } else if (cf.suite == "nogain") {
            report = check_coalition_no_gain(inst, mode, opts);
        } else {  // invariants
            RunOptions ro;
            ro.horizon_cap = opts.horizon_cap;
            Trace t = simulate(g, inst.schedule, BehaviorPlan::conforming(g), ro);
            report = check_trace_invariants(g, inst.schedule, t);
        }
    }
    report.seed = common.seed;
    emit(report_to_json(report));
    std::cerr << report.property << ": " << (report.pass ? "pass" : "FAIL") << " (" << report.instances
              << " instances, " << report.failures << " failures, " << report.runtime_ms << " ms)\n";
    return report.pass ? kOk : kRejected;
}

int cmd_clear(const std::string& path) {
    std::vector<Order> orders;
    try {
        orders = orders_from_json(read_json(path));
    } catch (const InputError&) {
        throw;
    } catch (const std::exception& e) {
        throw InputError(path + ": " + e.what());
    }
    ClearingResult r;
    try {
        r = clear(orders);
    } catch (const std::invalid_argument& e) {
        throw InputError(path + ": " + e.what());
    }
    ordered_json j;
    j["accepted"] = r.accepted();
    j["stage"] = to_string(r.stage);
    if (!r.accepted()) {
        j["reason"] = r.reason;
        emit(j);
        std::cerr << "rejected (" << to_string(r.stage) << "): " << r.reason << "\n";
        return kRejected;
    }
    const SwapDigraph& g = *r.graph;
    j["graph"] = to_graph_text(g);
    ordered_json arcs = ordered_json::array();
    for (const auto& [pair, tag] : r.tags) arcs.push_back({{"seller", pair.first}, {"buyer", pair.second}, {"tag", tag}});
    j["arcs"] = arcs;
    j["schedule"] = schedule_to_json(g, build_schedule(g, {}));
    emit(j);
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HTLC cross-chain swap toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    Common common;
    app.add_option("--seed", common.seed, "64-bit seed for all randomness")->default_val(0);
    app.add_option("--workers", common.workers, "worker threads, 0 for all cores")->default_val(0);

    std::string graph_path, behaviors_path;
    ProtoFlags pf;
    Step horizon = 0;
    CheckFlags cf;

    auto* rec = app.add_subcommand("recognize", "decompose a reuniclus digraph");
    rec->add_option("graph", graph_path, "edge list file")->required();

    auto* sch = app.add_subcommand("schedule", "compile a protocol schedule");
    sch->add_option("graph", graph_path, "edge list file")->required();
    pf.add(sch);

    auto* sim = app.add_subcommand("simulate", "run the protocol and print the trace");
    sim->add_option("graph", graph_path, "edge list file")->required();
    sim->add_option("behaviors", behaviors_path, "behavior script (JSON)");
    sim->add_option("--horizon", horizon, "fixed number of steps");
    pf.add(sim);

    auto* chk = app.add_subcommand("check", "run a property suite");
    chk->add_option("input", cf.graph, "graph file, or bundle file for --suite replay");
    chk->add_option("--suite", cf.suite)
        ->check(CLI::IsMember({"liveness", "safety", "nogain", "invariants", "enumerate", "replay"}));
    chk->add_flag("--exhaustive", cf.exhaustive, "enumerate every adversary within the budget");
    chk->add_option("--budget", cf.budget, "deviations per adversary")->check(CLI::Range(0, 8));
    chk->add_option("--trials", cf.trials, "randomized trials (per graph for enumerate)");
    chk->add_option("--coalition-size", cf.coalition_size)->check(CLI::Range(1, 16));
    chk->add_option("--n", cf.n, "largest vertex count for enumerate");
    chk->add_option("--max-counterexamples", cf.max_counterexamples);
    pf.add(chk);

    auto* clr = app.add_subcommand("clear", "turn orders into a swap digraph and schedule");
    clr->add_option("orders", graph_path, "orders file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kInput;
    }

    std::ostringstream line;
    line << "replay: htlcswap";
    bool has_seed = false;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        has_seed = has_seed || a == "--seed" || a.rfind("--seed=", 0) == 0;
        line << " " << quote(a);
    }
    if (!has_seed) line << " --seed " << common.seed;
    std::cerr << "seed: " << common.seed << "\n" << line.str() << "\n";

    try {
        if (*rec) return cmd_recognize(graph_path);
        if (*sch) return cmd_schedule(graph_path, pf);
        if (*sim) return cmd_simulate(graph_path, behaviors_path, pf, horizon);
        if (*chk) return cmd_check(cf, pf, common);
        if (*clr) return cmd_clear(graph_path);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
