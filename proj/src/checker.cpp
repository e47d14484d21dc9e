#include "htlcswap/checker.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <map>
#include <numeric>
#include <set>
#include <thread>

namespace htlcswap {

namespace {

template <typename F>
void parallel_for(std::size_t n, unsigned workers, F&& body) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::vector<std::string> names(const SwapDigraph& g, const std::vector<Vertex>& vs) {
    std::vector<std::string> out;
    for (Vertex v : vs) out.push_back(g.name(v));
    return out;
}

ReplayBundle make_bundle(const Instance& inst, const std::string& property, const std::vector<Vertex>& coalition,
                         const BehaviorPlan& plan, const Trace& t, std::uint64_t seed, std::string reason) {
    ReplayBundle b;
    b.property = property;
    b.graph_text = to_graph_text(inst.graph);
    b.protocol = inst.protocol;
    b.timeout_overrides = inst.timeout_overrides;
    b.coalition = names(inst.graph, coalition);
    b.behaviors = plan_to_json(inst.graph, plan);
    b.horizon = t.horizon;
    b.seed = seed;
    b.trace_hash = trace_hash(inst.graph, t);
    b.reason = std::move(reason);
    return b;
}

std::string liveness_failure(const SwapDigraph& g, const Schedule& s, const Trace& t) {
    for (const Contract& c : t.final_state.contracts) {
        if (c.state == Contract::State::Escrowed) return "unresolved contracts at horizon";
    }
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        auto o = classify(g, t, {v});
        if (o.cls != OutcomeClass::Deal) return "party " + g.name(v) + " ends " + to_string(o.cls);
    }
    auto v = trace_violations(g, s, t);
    return v.empty() ? "" : v.front();
}

struct Verdicts {
    std::string safety;
    std::string no_gain;
};

Verdicts judge(const SwapDigraph& g, const Trace& t, const std::vector<Vertex>& coalition) {
    Verdicts out;
    for (const Contract& c : t.final_state.contracts) {
        if (c.state == Contract::State::Escrowed) {
            out.safety = out.no_gain = "unresolved contracts at horizon";
            return out;
        }
    }
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (std::find(coalition.begin(), coalition.end(), v) != coalition.end()) continue;
        auto o = classify(g, t, {v});
        if (!o.acceptable()) {
            out.safety = "conforming party " + g.name(v) + " ends Underwater";
            break;
        }
    }
    if (!coalition.empty() && coalition.size() < g.vertex_count()) {
        auto o = classify(g, t, coalition);
        if (o.cls == OutcomeClass::Discount || o.cls == OutcomeClass::FreeRide) {
            out.no_gain = "coalition ends " + to_string(o.cls);
        }
    }
    return out;
}

std::vector<std::vector<Vertex>> coalitions_up_to(std::size_t n, std::size_t k) {
    std::vector<std::vector<Vertex>> out;
    k = std::min(k, n == 0 ? 0 : n - 1);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) > k) continue;
        std::vector<Vertex> c;
        for (Vertex v = 0; v < n; ++v)
            if (mask >> v & 1) c.push_back(v);
        out.push_back(c);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    return out;
}

std::vector<Vertex> random_coalition(std::size_t n, std::size_t max_size, std::uint64_t& state) {
    std::size_t cap = std::max<std::size_t>(1, std::min(max_size, n - 1));
    state = splitmix64(state);
    std::size_t k = 1 + state % cap;
    std::vector<Vertex> all(n);
    std::iota(all.begin(), all.end(), Vertex{0});
    for (std::size_t i = 0; i < k; ++i) {
        state = splitmix64(state);
        std::swap(all[i], all[i + state % (n - i)]);
    }
    std::vector<Vertex> c(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(c.begin(), c.end());
    return c;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bundles and reports

nlohmann::ordered_json bundle_to_json(const ReplayBundle& b) {
    nlohmann::ordered_json j;
    j["property"] = b.property;
    j["graph"] = b.graph_text;
    j["protocol"] = protocol_to_json(b.protocol);
    nlohmann::ordered_json ov = nlohmann::ordered_json::array();
    if (!b.timeout_overrides.empty()) {
        auto g = parse_digraph(b.graph_text);
        for (auto [a, tau] : b.timeout_overrides) {
            ov.push_back({{"arc", {g.name(g.arc(a).seller), g.name(g.arc(a).buyer)}}, {"timeout", tau}});
        }
    }
    j["timeoutOverrides"] = ov;
    j["coalition"] = b.coalition;
    j["behaviors"] = b.behaviors;
    j["horizon"] = b.horizon;
    j["seed"] = b.seed;
    j["traceHash"] = hex64(b.trace_hash);
    j["reason"] = b.reason;
    return j;
}

ReplayBundle bundle_from_json(const nlohmann::json& j) {
    ReplayBundle b;
    b.property = j.at("property").get<std::string>();
    b.graph_text = j.at("graph").get<std::string>();
    b.protocol = protocol_from_json(j.at("protocol"));
    auto g = parse_digraph(b.graph_text);
    for (const auto& o : j.value("timeoutOverrides", nlohmann::json::array())) {
        b.timeout_overrides.emplace_back(g.arc_id(o.at("arc")[0].get<std::string>(), o.at("arc")[1].get<std::string>()),
                                         o.at("timeout").get<Step>());
    }
    b.coalition = j.value("coalition", std::vector<std::string>{});
    b.behaviors = nlohmann::ordered_json::parse(j.value("behaviors", nlohmann::json::array()).dump());
    b.horizon = j.at("horizon").get<Step>();
    b.seed = j.value("seed", std::uint64_t{0});
    b.trace_hash = std::stoull(j.value("traceHash", std::string("0")), nullptr, 16);
    b.reason = j.value("reason", std::string());
    return b;
}

void CheckReport::merge(const CheckReport& other) {
    pass = pass && other.pass;
    instances += other.instances;
    failures += other.failures;
    runtime_ms += other.runtime_ms;
    for (const auto& c : other.counterexamples) counterexamples.push_back(c);
    for (const auto& n : other.notes) notes.push_back(n);
}

nlohmann::ordered_json report_to_json(const CheckReport& r, bool with_runtime) {
    nlohmann::ordered_json j;
    j["property"] = r.property;
    j["verdict"] = r.pass ? "pass" : "fail";
    j["instances"] = r.instances;
    j["failures"] = r.failures;
    j["seed"] = r.seed;
    if (with_runtime) j["runtimeMs"] = r.runtime_ms;
    j["notes"] = r.notes;
    nlohmann::ordered_json ce = nlohmann::ordered_json::array();
    for (const auto& b : r.counterexamples) ce.push_back(bundle_to_json(b));
    j["counterexamples"] = ce;
    return j;
}

Instance Instance::compile(const SwapDigraph& g, const ProtocolSpec& p) {
    return Instance{g, p, build_schedule(g, p), {}};
}

Instance Instance::with_timeout(ArcId arc, Step timeout) const {
    Instance out = *this;
    out.schedule = htlcswap::with_timeout(schedule, arc, timeout);
    out.timeout_overrides.emplace_back(arc, timeout);
    return out;
}

// ---------------------------------------------------------------------------
// Trace invariants

std::vector<std::string> trace_violations(const SwapDigraph& g, const Schedule& s, const Trace& t) {
    std::vector<std::string> out;
    for (const auto& v : validate_schedule_invariants(g, s).violations) out.push_back("schedule: " + v);

    const std::size_t m = g.arc_count();
    std::vector<std::optional<Step>> created(m), claimed(m);
    std::vector<std::optional<Step>> tau(m);
    std::vector<std::optional<Hashlock>> lock(m);
    Step last_create = -1, first_claim = INT32_MAX;

    // Knowledge each party may hold, rebuilt from provenance events only.
    std::vector<std::map<Secret, Step>> allowed(g.vertex_count());
    for (const Event& e : t.events) {
        if (e.kind == "rejected") out.push_back("rejected action by " + g.name(e.party) + ": " + e.note);
        if (e.kind == "abort") out.push_back(g.name(e.party) + " aborted: " + e.note);
        if (e.kind == "make_pair") allowed[e.party].emplace(*e.secret, e.step);
        if (e.kind == "share") allowed[*e.to].emplace(*e.secret, e.step);
        if (e.kind == "create") {
            created[*e.arc] = e.step;
            tau[*e.arc] = e.timeout;
            lock[*e.arc] = e.hashlock;
            last_create = std::max(last_create, e.step);
        }
        if (e.kind == "claim") {
            ArcId a = *e.arc;
            claimed[a] = e.step;
            first_claim = std::min(first_claim, e.step);
            auto it = allowed[e.party].find(*e.secret);
            if (it == allowed[e.party].end() || it->second >= e.step) {
                out.push_back("claim of " + g.arc_label(a) + " without prior knowledge of its preimage");
            }
            if (!tau[a] || e.step > *tau[a]) out.push_back("claim of " + g.arc_label(a) + " after its timeout");
            allowed[g.arc(a).seller].emplace(*e.secret, e.step);
        }
    }
    if (allowed != t.final_state.knowledge) out.push_back("knowledge without provenance");
    if (last_create >= first_claim) {
        out.push_back("claim at step " + std::to_string(first_claim) + " precedes creation at step " +
                      std::to_string(last_create));
    }

    for (ArcId a = 0; a < m; ++a) {
        if (t.final_state.holder(a) == Holder::Escrow) out.push_back(g.arc_label(a) + " still in escrow");
        if (!created[a]) {
            out.push_back(g.arc_label(a) + " never created");
            continue;
        }
        if (*created[a] != s.create_time[a]) out.push_back(g.arc_label(a) + " created off schedule");
        if (*tau[a] != s.timeout[a]) out.push_back(g.arc_label(a) + " created with an unscheduled timeout");
        if (*lock[a] != hash(secret_of(s.hashlock_owner[a]))) out.push_back(g.arc_label(a) + " has an unscheduled hashlock");
    }

    // Realized path orderings and learned-secret claims.
    for (ArcId in = 0; in < m; ++in) {
        Vertex v = g.arc(in).buyer;
        if (!created[in] || !lock[in]) continue;
        bool own = *lock[in] == hash(secret_of(v));
        for (ArcId next : g.out_arcs(v)) {
            if (!created[next] || *lock[next] == hash(secret_of(v))) continue;
            if (*created[in] >= *created[next]) out.push_back("realized creation steps do not increase along " + g.arc_label(in) + g.arc_label(next));
            if (*tau[in] <= *tau[next]) out.push_back("realized timeouts do not decrease along " + g.arc_label(in) + g.arc_label(next));
        }
        if (claimed[in] && !own) {
            bool learned = false;
            for (ArcId o : g.out_arcs(v)) {
                learned = learned || (claimed[o] && *claimed[o] < *claimed[in] && lock[o] == lock[in]);
            }
            if (!learned) out.push_back(g.arc_label(in) + " claimed before any outgoing contract revealed its secret");
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

CheckReport check_trace_invariants(const SwapDigraph& g, const Schedule& s, const Trace& t) {
    CheckReport r;
    r.property = "invariants";
    r.instances = 1;
    r.notes = trace_violations(g, s, t);
    r.failures = r.notes.empty() ? 0 : 1;
    r.pass = r.failures == 0;
    return r;
}

// ---------------------------------------------------------------------------
// Liveness and adversarial sweeps

CheckReport check_liveness(const Instance& inst, const CheckOptions& opts) {
    auto start = std::chrono::steady_clock::now();
    CheckReport r;
    r.property = "liveness";
    r.instances = 1;
    const auto plan = BehaviorPlan::conforming(inst.graph);
    RunOptions ro;
    ro.horizon_cap = opts.horizon_cap;
    Trace t = simulate(inst.graph, inst.schedule, plan, ro);
    std::string why = liveness_failure(inst.graph, inst.schedule, t);
    if (!why.empty()) {
        r.pass = false;
        r.failures = 1;
        if (opts.max_counterexamples > 0) r.counterexamples.push_back(make_bundle(inst, "liveness", {}, plan, t, 0, why));
    }
    r.runtime_ms = elapsed_ms(start);
    return r;
}

AdversarialReports check_adversarial(const Instance& inst, const AdversaryMode& mode, const CheckOptions& opts) {
    auto start = std::chrono::steady_clock::now();
    const SwapDigraph& g = inst.graph;
    const std::size_t n = g.vertex_count();

    struct Job {
        std::vector<Vertex> coalition;
        BehaviorPlan plan;
        std::uint64_t seed = 0;
    };
    std::vector<Job> jobs;
    std::size_t count = 0;
    if (mode.exhaustive) {
        auto coalitions = mode.coalitions.empty() ? coalitions_up_to(n, mode.max_coalition) : mode.coalitions;
        for (const auto& c : coalitions) {
            for_each_adversary(g, inst.schedule, c, mode.budget, [&](const BehaviorPlan& p) {
                jobs.push_back({c, p, mode.seed});
                return true;
            });
        }
        count = jobs.size();
    } else {
        count = n < 2 ? 0 : mode.trials;
    }

    struct Result {
        Verdicts v;
        std::optional<ReplayBundle> safety, no_gain;
    };
    std::vector<Result> results(count);
    parallel_for(count, opts.workers, [&](std::size_t i) {
        Job job;
        if (mode.exhaustive) {
            job = jobs[i];
        } else {
            std::uint64_t state = splitmix64(mode.seed ^ splitmix64(i + 1));
            job.coalition = mode.coalitions.empty() ? random_coalition(n, mode.max_coalition, state)
                                                    : mode.coalitions[i % mode.coalitions.size()];
            job.seed = splitmix64(state);
            job.plan = random_adversary(g, inst.schedule, job.seed, job.coalition, mode.budget);
        }
        RunOptions ro;
        ro.horizon_cap = opts.horizon_cap;
        Trace t = simulate(g, inst.schedule, job.plan, ro);
        Result& res = results[i];
        res.v = judge(g, t, job.coalition);
        if (!res.v.safety.empty()) res.safety = make_bundle(inst, "safety", job.coalition, job.plan, t, job.seed, res.v.safety);
        if (!res.v.no_gain.empty()) res.no_gain = make_bundle(inst, "no-gain", job.coalition, job.plan, t, job.seed, res.v.no_gain);
    });

    AdversarialReports out;
    out.safety.property = "safety";
    out.no_gain.property = "no-gain";
    for (CheckReport* r : {&out.safety, &out.no_gain}) {
        r->instances = count;
        r->seed = mode.seed;
        r->notes.push_back(std::string(mode.exhaustive ? "exhaustive" : "randomized") + ", budget " +
                           std::to_string(mode.budget) + ", coalitions up to " + std::to_string(mode.max_coalition));
    }
    for (const Result& res : results) {
        if (res.safety) {
            ++out.safety.failures;
            if (out.safety.counterexamples.size() < opts.max_counterexamples) out.safety.counterexamples.push_back(*res.safety);
        }
        if (res.no_gain) {
            ++out.no_gain.failures;
            if (out.no_gain.counterexamples.size() < opts.max_counterexamples) out.no_gain.counterexamples.push_back(*res.no_gain);
        }
    }
    out.safety.pass = out.safety.failures == 0;
    out.no_gain.pass = out.no_gain.failures == 0;
    out.safety.runtime_ms = out.no_gain.runtime_ms = elapsed_ms(start);
    return out;
}

CheckReport check_safety(const Instance& inst, const AdversaryMode& mode, const CheckOptions& opts) {
    return check_adversarial(inst, mode, opts).safety;
}

CheckReport check_coalition_no_gain(const Instance& inst, const AdversaryMode& mode, const CheckOptions& opts) {
    return check_adversarial(inst, mode, opts).no_gain;
}

ReplayResult replay(const ReplayBundle& b) {
    SwapDigraph g = parse_digraph(b.graph_text);
    Instance inst = Instance::compile(g, b.protocol);
    for (auto [a, tau] : b.timeout_overrides) inst = inst.with_timeout(a, tau);
    BehaviorPlan plan = plan_from_json(g, nlohmann::json::parse(b.behaviors.dump()));
    RunOptions ro;
    ro.horizon = b.horizon;
    Trace t = simulate(g, inst.schedule, plan, ro);

    ReplayResult r;
    r.trace_hash = trace_hash(g, t);
    if (b.property == "liveness") {
        r.reason = liveness_failure(g, inst.schedule, t);
    } else {
        std::vector<Vertex> coalition;
        for (const auto& name : b.coalition) coalition.push_back(g.vertex(name));
        auto v = judge(g, t, coalition);
        r.reason = b.property == "safety" ? v.safety : v.no_gain;
    }
    r.failed = !r.reason.empty();
    return r;
}

// ---------------------------------------------------------------------------
// Enumeration

SwapDigraph digraph_from_mask(int n, std::uint64_t mask) {
    std::vector<std::string> vs;
    for (int i = 0; i < n; ++i) vs.push_back("v" + std::to_string(i));
    std::vector<std::pair<std::string, std::string>> arcs;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && (mask >> (i * n + j) & 1)) arcs.emplace_back(vs[i], vs[j]);
    return SwapDigraph::from_arcs(arcs, vs);
}

namespace {

bool mask_strongly_connected(int n, std::uint64_t mask) {
    std::vector<std::uint32_t> out(n), in(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (mask >> (i * n + j) & 1) {
                out[i] |= 1u << j;
                in[j] |= 1u << i;
            }
    auto reach = [&](const std::vector<std::uint32_t>& adj) {
        std::uint32_t seen = 1, frontier = 1;
        while (frontier) {
            std::uint32_t next = 0;
            for (int v = 0; v < n; ++v)
                if (frontier >> v & 1) next |= adj[v];
            frontier = next & ~seen;
            seen |= next;
        }
        return seen == (1u << n) - 1;
    };
    return reach(out) && reach(in);
}

std::uint64_t permute(int n, std::uint64_t mask, const std::vector<int>& p) {
    std::uint64_t out = 0;
    while (mask) {
        int bit = std::countr_zero(mask);
        mask &= mask - 1;
        out |= std::uint64_t{1} << (p[bit / n] * n + p[bit % n]);
    }
    return out;
}

std::vector<std::uint64_t> offdiagonal_bits(int n) {
    std::vector<std::uint64_t> bits;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) bits.push_back(std::uint64_t{1} << (i * n + j));
    return bits;
}

std::uint64_t expand(std::uint64_t code, const std::vector<std::uint64_t>& bits) {
    std::uint64_t mask = 0;
    for (std::size_t k = 0; k < bits.size(); ++k)
        if (code >> k & 1) mask |= bits[k];
    return mask;
}

}  // namespace

std::vector<EnumeratedGraph> strongly_connected_up_to_isomorphism(int n) {
    if (n < 2 || n > 5) throw std::invalid_argument("enumeration supports 2 to 5 vertices");
    std::vector<std::vector<int>> perms;
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));

    const auto bits = offdiagonal_bits(n);
    std::vector<EnumeratedGraph> out;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits.size()); ++code) {
        std::uint64_t mask = expand(code, bits);
        if (!mask_strongly_connected(n, mask)) continue;
        bool minimal = true;
        std::size_t automorphisms = 0;
        for (const auto& q : perms) {
            std::uint64_t m = permute(n, mask, q);
            if (m < mask) {
                minimal = false;
                break;
            }
            automorphisms += m == mask;
        }
        if (minimal) out.push_back({mask, perms.size() / automorphisms});
    }
    return out;
}

std::size_t count_labeled_strongly_connected(int n) {
    const auto bits = offdiagonal_bits(n);
    std::size_t count = 0;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits.size()); ++code) {
        count += is_strongly_connected(digraph_from_mask(n, expand(code, bits)));
    }
    return count;
}

SwapDigraph random_reuniclus(std::mt19937_64& rng, int min_vertices, int max_vertices) {
    std::uniform_int_distribution<int> total_d(min_vertices, max_vertices);
    const int total = total_d(rng);
    std::vector<std::pair<int, int>> arcs;
    std::vector<bool> leads;  // per vertex: already leads a component
    int next = 0;

    auto add_component = [&](int leader, int fresh) {
        std::vector<int> order;
        for (int k = 0; k < fresh; ++k) order.push_back(next++);
        leads.resize(next, false);
        leads[leader] = true;
        std::bernoulli_distribution coin(0.4);
        // Arcs leader->x, x->leader and forward arcs along `order` only, so
        // every cycle passes through the leader.
        for (std::size_t i = 0; i < order.size(); ++i) {
            bool has_in = false, has_out = false;
            if (coin(rng) || i == 0) {
                arcs.emplace_back(leader, order[i]);
                has_in = true;
            }
            for (std::size_t j = 0; j < i; ++j)
                if (coin(rng)) {
                    arcs.emplace_back(order[j], order[i]);
                    has_in = true;
                }
            if (!has_in) {
                std::uniform_int_distribution<std::size_t> pick(0, i - 1);
                arcs.emplace_back(order[pick(rng)], order[i]);
            }
            (void)has_out;
        }
        for (std::size_t i = 0; i < order.size(); ++i) {
            bool has_out = std::any_of(arcs.begin(), arcs.end(), [&](const auto& a) { return a.first == order[i]; });
            if (coin(rng) || i + 1 == order.size() || !has_out) arcs.emplace_back(order[i], leader);
        }
    };

    const int root = next++;
    leads.assign(1, false);
    std::uniform_int_distribution<int> size_d(1, 3);
    add_component(root, std::min(size_d(rng), total - next));
    while (next < total) {
        std::vector<int> candidates;
        for (int v = 0; v < next; ++v)
            if (!leads[v]) candidates.push_back(v);
        if (candidates.empty()) candidates.push_back(next - 1);  // cannot happen: fresh vertices never lead
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        add_component(candidates[pick(rng)], std::min(size_d(rng), total - next));
    }

    std::vector<int> label(total);
    std::iota(label.begin(), label.end(), 0);
    std::shuffle(label.begin(), label.end(), rng);
    std::vector<std::pair<std::string, std::string>> named;
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : arcs) {
        if (seen.insert({u, v}).second) named.emplace_back("p" + std::to_string(label[u]), "p" + std::to_string(label[v]));
    }
    return SwapDigraph::from_arcs(named);
}

SwapDigraph random_strongly_connected_digraph(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> density(0.2, 0.6);
    for (;;) {
        std::bernoulli_distribution coin(density(rng));
        std::uint64_t mask = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && coin(rng)) mask |= std::uint64_t{1} << (i * n + j);
        if (mask_strongly_connected(n, mask)) return digraph_from_mask(n, mask);
    }
}

CheckReport enumerate_and_crosscheck(const EnumerationOptions& eo, const CheckOptions& opts) {
    auto start = std::chrono::steady_clock::now();
    CheckReport r;
    r.property = "enumerate";
    r.seed = eo.seed;

    struct Item {
        int n;
        EnumeratedGraph eg;
    };
    std::vector<Item> items;
    for (int n = 2; n <= eo.max_vertices; ++n) {
        auto classes = strongly_connected_up_to_isomorphism(n);
        std::size_t labeled = 0;
        for (const auto& c : classes) {
            labeled += c.orbit_size;
            items.push_back({n, c});
        }
        std::size_t direct = n <= 4 ? count_labeled_strongly_connected(n) : labeled;
        r.notes.push_back("n=" + std::to_string(n) + ": " + std::to_string(classes.size()) + " classes, " +
                          std::to_string(labeled) + " labeled");
        if (direct != labeled) {
            r.pass = false;
            ++r.failures;
            r.notes.push_back("n=" + std::to_string(n) + ": orbit sizes sum to " + std::to_string(labeled) +
                              " but direct count is " + std::to_string(direct));
        }
    }

    struct Result {
        bool reuniclus = false;
        std::string discrepancy;
        CheckReport live, safe, gain;
    };
    std::vector<Result> results(items.size());
    CheckOptions inner = opts;
    inner.workers = 1;
    parallel_for(items.size(), opts.workers, [&](std::size_t i) {
        const Item& it = items[i];
        SwapDigraph g = digraph_from_mask(it.n, it.eg.mask);
        auto rec = reuniclus_decompose(g);
        bool oracle = brute_force_reuniclus_oracle(g);
        Result& res = results[i];
        res.reuniclus = rec.accepted();
        if (rec.accepted() != oracle) {
            res.discrepancy = "recognizer " + std::string(rec.accepted() ? "accepts" : "rejects") +
                              " but the oracle " + (oracle ? "accepts" : "rejects") + ":\n" + to_graph_text(g);
            return;
        }
        if (rec.accepted() && !validate_decomposition(g, *rec.decomposition).empty()) {
            res.discrepancy = "invalid decomposition:\n" + to_graph_text(g);
            return;
        }
        if (!rec.accepted()) return;
        Instance inst = Instance::compile(g, {ProtocolSpec::Kind::Rdp, std::nullopt, false});
        res.live = check_liveness(inst, inner);
        if (eo.safety_trials > 0) {
            AdversaryMode mode;
            mode.trials = eo.safety_trials;
            mode.seed = splitmix64(eo.seed ^ i);
            mode.max_coalition = 2;
            auto adv = check_adversarial(inst, mode, inner);
            res.safe = adv.safety;
            res.gain = adv.no_gain;
        }
    });

    std::size_t accepted = 0, discrepancies = 0;
    for (const Result& res : results) {
        ++r.instances;
        if (!res.discrepancy.empty()) {
            ++discrepancies;
            r.pass = false;
            ++r.failures;
            if (r.notes.size() < 20) r.notes.push_back(res.discrepancy);
            continue;
        }
        if (!res.reuniclus) continue;
        ++accepted;
        for (const CheckReport* sub : {&res.live, &res.safe, &res.gain}) {
            if (sub->pass) continue;
            r.pass = false;
            ++r.failures;
            for (const auto& c : sub->counterexamples)
                if (r.counterexamples.size() < opts.max_counterexamples) r.counterexamples.push_back(c);
        }
    }
    r.notes.push_back(std::to_string(accepted) + " reuniclus classes, " + std::to_string(discrepancies) +
                      " recognizer/oracle discrepancies");
    r.runtime_ms = elapsed_ms(start);
    return r;
}

}  // namespace htlcswap
