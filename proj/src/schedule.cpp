#include "htlcswap/schedule.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <tuple>

namespace htlcswap {

namespace {

int kind_rank(const ActionBody& body) { return static_cast<int>(body.index()); }

void sort_actions(Schedule& s) {
    for (auto& actions : s.per_party) {
        std::stable_sort(actions.begin(), actions.end(), [](const TimedAction& a, const TimedAction& b) {
            return std::pair(a.time, kind_rank(a.body)) < std::pair(b.time, kind_rank(b.body));
        });
    }
}

Schedule compile_components(const SwapDigraph& g, const ReuniclusDecomposition& dec, const std::string& protocol,
                            CompileOptions opts) {
    const DistanceTable d = compute_distances(g, dec);
    const Step anchor = d.bstar;
    const Vertex main = dec.main_leader();

    Schedule s;
    s.protocol = protocol;
    s.main_leader = main;
    s.anchor = anchor;
    s.per_party.resize(g.vertex_count());
    s.hashlock_owner.resize(g.arc_count());
    s.timeout.resize(g.arc_count());
    s.create_time.resize(g.arc_count());
    s.claim_time.resize(g.arc_count());
    s.decomposition = dec;
    s.distances = d;
    s.eager_claims = opts.eager_claims;

    std::vector<std::size_t> arc_component(g.arc_count());
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        arc_component[a] = dec.component_of(g, a);
        const Arc& arc = g.arc(a);
        s.hashlock_owner[a] = dec.bottlenecks[arc_component[a]];
        s.timeout[a] = anchor + d.to_leader[arc.buyer];
        s.create_time[a] = dec.is_bottleneck_edge(g, a) ? 0 : d.sub_vertex[arc.seller];
        s.claim_time[a] = anchor + d.to_leader[arc.buyer];
    }

    auto create = [&](ArcId a, HashlockSource::Kind kind) {
        HashlockSource src{kind, 0, s.hashlock_owner[a]};
        return CreateContract{a, src, s.timeout[a]};
    };
    auto claim = [&](Vertex u, std::vector<ArcId> arcs, bool own, std::vector<ArcId> learned) {
        ClaimIncoming c{std::move(arcs), own, std::move(learned), anchor + d.to_leader[u], opts.eager_claims};
        Step when = opts.eager_claims && !own ? anchor : c.deadline;
        return TimedAction{when, c};
    };

    for (Vertex u = 0; u < g.vertex_count(); ++u) {
        auto& actions = s.per_party[u];
        auto led = dec.led_by(u);
        if (led) {
            actions.push_back({0, MakeSecretPair{}});
            for (ArcId a : g.out_arcs(u)) {
                if (arc_component[a] == *led) actions.push_back({0, create(a, HashlockSource::Kind::Own)});
            }
        }

        if (u == main) {
            VerifyIncoming verify;
            std::vector<ArcId> incoming;
            for (ArcId a : g.in_arcs(u)) {
                verify.checks.push_back({a, s.timeout[a], IncomingCheck::Rule::Own, 0});
                incoming.push_back(a);
            }
            actions.push_back({anchor, verify});
            actions.push_back(claim(u, incoming, true, {}));
        } else if (led) {
            // Non-main leader: home incomings carry its own hashlock, parent
            // incomings one common hashlock that it forwards upwards.
            VerifyIncoming verify;
            std::vector<ArcId> home_in, parent_in, parent_out;
            for (ArcId a : g.in_arcs(u)) {
                bool home = arc_component[a] == *led;
                verify.checks.push_back(
                    {a, s.timeout[a], home ? IncomingCheck::Rule::Own : IncomingCheck::Rule::Uniform, 0});
                (home ? home_in : parent_in).push_back(a);
            }
            actions.push_back({d.sub_vertex[u], verify});
            for (ArcId a : g.out_arcs(u)) {
                if (arc_component[a] != *led) {
                    actions.push_back({d.sub_vertex[u], create(a, HashlockSource::Kind::CopyGroup)});
                    parent_out.push_back(a);
                }
            }
            actions.push_back(claim(u, parent_in, false, parent_out));
            actions.push_back(claim(u, home_in, true, {}));
        } else {
            VerifyIncoming verify;
            std::vector<ArcId> incoming, outgoing;
            for (ArcId a : g.in_arcs(u)) {
                verify.checks.push_back({a, s.timeout[a], IncomingCheck::Rule::Uniform, 0});
                incoming.push_back(a);
            }
            actions.push_back({d.sub_vertex[u], verify});
            for (ArcId a : g.out_arcs(u)) {
                actions.push_back({d.sub_vertex[u], create(a, HashlockSource::Kind::CopyGroup)});
                outgoing.push_back(a);
            }
            actions.push_back(claim(u, incoming, false, outgoing));
        }
    }
    sort_actions(s);
    return s;
}

std::vector<int> bfs_levels(const SwapDigraph& g, Vertex source, bool forward) {
    std::vector<int> dist(g.vertex_count(), -1);
    std::deque<Vertex> queue{source};
    dist[source] = 0;
    while (!queue.empty()) {
        Vertex v = queue.front();
        queue.pop_front();
        for (ArcId a : forward ? g.out_arcs(v) : g.in_arcs(v)) {
            Vertex w = forward ? g.arc(a).buyer : g.arc(a).seller;
            if (dist[w] < 0) {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    return dist;
}

}  // namespace

Step Schedule::last_step() const {
    Step last = 0;
    for (const auto& actions : per_party) {
        for (const auto& ta : actions) {
            last = std::max(last, ta.time);
            if (const auto* c = std::get_if<ClaimIncoming>(&ta.body)) last = std::max(last, c->deadline);
        }
    }
    return last;
}

Step Schedule::max_timeout() const {
    return timeout.empty() ? 0 : *std::max_element(timeout.begin(), timeout.end());
}

std::vector<Vertex> Schedule::secret_owners() const {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < per_party.size(); ++v) {
        for (const auto& ta : per_party[v]) {
            if (std::holds_alternative<MakeSecretPair>(ta.body)) {
                out.push_back(v);
                break;
            }
        }
    }
    return out;
}

Schedule compile_bdp(const SwapDigraph& g, Vertex leader, CompileOptions opts) {
    if (!is_strongly_connected(g)) throw GraphError("digraph is not strongly connected");
    auto bottlenecks = bottleneck_vertices(g);
    if (!std::binary_search(bottlenecks.begin(), bottlenecks.end(), leader)) {
        throw GraphError(g.name(leader) + " is not a bottleneck vertex");
    }
    return compile_components(g, single_component(g, leader), "bdp", opts);
}

Schedule compile_rdp(const SwapDigraph& g, const ReuniclusDecomposition& dec, CompileOptions opts) {
    if (auto issues = validate_decomposition(g, dec); !issues.empty()) {
        throw GraphError("invalid decomposition: " + issues.front());
    }
    return compile_components(g, dec, "rdp", opts);
}

Schedule compile_single_hashlock(const SwapDigraph& g, Vertex leader) {
    if (!is_strongly_connected(g)) throw GraphError("digraph is not strongly connected");
    const auto from = bfs_levels(g, leader, true);
    const auto to = bfs_levels(g, leader, false);

    Schedule s;
    s.protocol = "single-hashlock";
    s.main_leader = leader;
    s.per_party.resize(g.vertex_count());
    s.hashlock_owner.assign(g.arc_count(), leader);
    s.timeout.resize(g.arc_count());
    s.create_time.resize(g.arc_count());
    s.claim_time.resize(g.arc_count());

    Step last_create = 0;
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        Vertex u = g.arc(a).seller;
        s.create_time[a] = u == leader ? 0 : from[u];
        last_create = std::max(last_create, s.create_time[a]);
    }
    const Step anchor = last_create + 1;
    s.anchor = anchor;
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        s.timeout[a] = anchor + to[g.arc(a).buyer];
        s.claim_time[a] = s.timeout[a];
    }

    for (Vertex u = 0; u < g.vertex_count(); ++u) {
        auto& actions = s.per_party[u];
        if (u == leader) {
            actions.push_back({0, MakeSecretPair{}});
            VerifyIncoming verify;
            std::vector<ArcId> incoming;
            for (ArcId a : g.out_arcs(u)) actions.push_back({0, CreateContract{a, {HashlockSource::Kind::Own, 0, leader}, s.timeout[a]}});
            for (ArcId a : g.in_arcs(u)) {
                verify.checks.push_back({a, s.timeout[a], IncomingCheck::Rule::Own, 0});
                incoming.push_back(a);
            }
            actions.push_back({anchor, verify});
            actions.push_back({anchor, ClaimIncoming{incoming, true, {}, anchor, false}});
            continue;
        }
        const Step at = from[u];
        VerifyIncoming verify;
        std::vector<ArcId> incoming, outgoing;
        for (ArcId a : g.in_arcs(u)) {
            incoming.push_back(a);
            if (s.create_time[a] < at) verify.checks.push_back({a, s.timeout[a], IncomingCheck::Rule::Uniform, 0});
        }
        actions.push_back({at, verify});
        for (ArcId a : g.out_arcs(u)) {
            actions.push_back({at, CreateContract{a, {HashlockSource::Kind::CopyGroup, 0, leader}, s.timeout[a]}});
            outgoing.push_back(a);
        }
        const Step claim_at = anchor + to[u];
        actions.push_back({claim_at, ClaimIncoming{incoming, false, outgoing, claim_at, false}});
    }
    sort_actions(s);
    return s;
}

std::string to_string(ProtocolSpec::Kind kind) {
    switch (kind) {
        case ProtocolSpec::Kind::Bdp: return "bdp";
        case ProtocolSpec::Kind::Rdp: return "rdp";
        case ProtocolSpec::Kind::SingleHashlock: return "single-hashlock";
    }
    return "?";
}

ProtocolSpec::Kind parse_protocol_kind(const std::string& name) {
    if (name == "bdp") return ProtocolSpec::Kind::Bdp;
    if (name == "rdp") return ProtocolSpec::Kind::Rdp;
    if (name == "single-hashlock") return ProtocolSpec::Kind::SingleHashlock;
    throw std::invalid_argument("unknown protocol " + name);
}

Schedule build_schedule(const SwapDigraph& g, const ProtocolSpec& spec) {
    CompileOptions opts{spec.eager_claims};
    switch (spec.kind) {
        case ProtocolSpec::Kind::Bdp: {
            if (spec.leader) return compile_bdp(g, g.vertex(*spec.leader), opts);
            auto bottlenecks = bottleneck_vertices(g);
            if (bottlenecks.empty()) throw GraphError("digraph has no bottleneck vertex");
            return compile_bdp(g, bottlenecks.front(), opts);
        }
        case ProtocolSpec::Kind::Rdp: {
            auto rec = reuniclus_decompose(g);
            if (!rec.accepted()) throw GraphError(rec.reason);
            return compile_rdp(g, *rec.decomposition, opts);
        }
        case ProtocolSpec::Kind::SingleHashlock:
            return compile_single_hashlock(g, spec.leader ? g.vertex(*spec.leader) : Vertex{0});
    }
    throw GraphError("unknown protocol");
}

nlohmann::ordered_json protocol_to_json(const ProtocolSpec& spec) {
    nlohmann::ordered_json j;
    j["kind"] = to_string(spec.kind);
    if (spec.leader) j["leader"] = *spec.leader;
    j["eager"] = spec.eager_claims;
    return j;
}

ProtocolSpec protocol_from_json(const nlohmann::json& j) {
    ProtocolSpec spec;
    if (j.is_string()) {
        spec.kind = parse_protocol_kind(j.get<std::string>());
        return spec;
    }
    spec.kind = parse_protocol_kind(j.at("kind").get<std::string>());
    if (j.contains("leader") && !j["leader"].is_null()) spec.leader = j["leader"].get<std::string>();
    spec.eager_claims = j.value("eager", false);
    return spec;
}

// ---------------------------------------------------------------------------
// Invariants

ScheduleReport validate_schedule_invariants(const SwapDigraph& g, const Schedule& s) {
    ScheduleReport report;
    auto& out = report.violations;
    auto protector = [&](ArcId a) { return s.hashlock_owner.at(a); };

    for (ArcId a = 0; a < g.arc_count(); ++a) {
        if (s.create_time[a] >= s.timeout[a]) {
            out.push_back("creation step of " + g.arc_label(a) + " is not before its timeout");
        }
        if (!s.eager_claims && s.claim_time[a] != s.timeout[a]) {
            out.push_back("claim step of " + g.arc_label(a) + " differs from its timeout");
        }
    }

    // Consecutive arcs (u,v),(v,w) with (v,w) not protected by v: creation
    // steps strictly increase and timeouts strictly decrease.
    for (ArcId in = 0; in < g.arc_count(); ++in) {
        Vertex v = g.arc(in).buyer;
        for (ArcId next : g.out_arcs(v)) {
            if (protector(next) == v) continue;
            if (s.create_time[in] >= s.create_time[next]) {
                out.push_back("creation steps do not increase along " + g.arc_label(in) + g.arc_label(next));
            }
            if (s.timeout[in] <= s.timeout[next]) {
                out.push_back("timeouts do not decrease along " + g.arc_label(in) + g.arc_label(next));
            }
        }
    }

    // Every cycle holds a contract protected by its seller.
    {
        std::vector<std::pair<std::string, std::string>> unprotected;
        for (ArcId a = 0; a < g.arc_count(); ++a) {
            if (protector(a) != g.arc(a).seller) {
                unprotected.emplace_back(g.name(g.arc(a).seller), g.name(g.arc(a).buyer));
            }
        }
        auto sub = SwapDigraph::from_arcs(unprotected, g.names());
        if (!is_acyclic(sub)) out.push_back("some cycle has no contract protected by its seller");
    }

    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        std::map<Vertex, std::vector<Step>> in_by, out_by;
        std::vector<Step> all_in;
        for (ArcId a : g.in_arcs(v)) {
            in_by[protector(a)].push_back(s.timeout[a]);
            all_in.push_back(s.timeout[a]);
        }
        for (ArcId a : g.out_arcs(v)) out_by[protector(a)].push_back(s.timeout[a]);

        std::set<Vertex> protectors;
        for (const auto& [x, _] : in_by) protectors.insert(x);
        for (const auto& [x, _] : out_by) protectors.insert(x);
        for (Vertex x : protectors) {
            if (in_by.count(x) != out_by.count(x)) {
                out.push_back(g.name(v) + " has contracts protected by " + g.name(x) + " on one side only");
            }
        }
        protectors.erase(v);
        if (protectors.size() > 1) out.push_back(g.name(v) + " is involved with more than one foreign protector");
        for (Vertex x : protectors) {
            if (!out_by.count(x) || all_in.empty()) continue;
            Step max_out = *std::max_element(out_by[x].begin(), out_by[x].end());
            Step min_in = *std::min_element(all_in.begin(), all_in.end());
            if (max_out >= min_in) {
                out.push_back(g.name(v) + ": outgoing timeout " + std::to_string(max_out) + " protected by " +
                              g.name(x) + " is not below incoming timeout " + std::to_string(min_in));
            }
        }
        if (in_by.count(v) && out_by.count(v)) {
            Step min_in = *std::min_element(in_by[v].begin(), in_by[v].end());
            Step min_out = *std::min_element(out_by[v].begin(), out_by[v].end());
            if (min_in >= min_out) {
                out.push_back(g.name(v) + ": no self-protected incoming timeout is below its self-protected outgoing ones");
            }
        }
    }

    // One secret pair per protecting party, none for the others.
    std::set<Vertex> protecting(s.hashlock_owner.begin(), s.hashlock_owner.end());
    auto owners = s.secret_owners();
    if (std::set<Vertex>(owners.begin(), owners.end()) != protecting) {
        out.push_back("secret pairs are not created exactly by the protecting parties");
    }
    for (Vertex v = 0; v < s.per_party.size(); ++v) {
        auto pairs = std::count_if(s.per_party[v].begin(), s.per_party[v].end(),
                                   [](const TimedAction& ta) { return std::holds_alternative<MakeSecretPair>(ta.body); });
        if (pairs > 1) out.push_back(g.name(v) + " creates more than one secret pair");
    }
    return report;
}

Schedule with_timeout(const Schedule& s, ArcId arc, Step timeout) {
    Schedule copy = s;
    copy.timeout.at(arc) = timeout;
    for (auto& actions : copy.per_party) {
        for (auto& ta : actions) {
            if (auto* c = std::get_if<CreateContract>(&ta.body); c && c->arc == arc) c->timeout = timeout;
            if (auto* v = std::get_if<VerifyIncoming>(&ta.body)) {
                for (auto& check : v->checks) {
                    if (check.arc == arc) check.timeout = timeout;
                }
            }
        }
    }
    return copy;
}

// ---------------------------------------------------------------------------
// Export

nlohmann::ordered_json schedule_actions_json(const SwapDigraph& g, const Schedule& s) {
    struct Row {
        Step time;
        Vertex party;
        int rank;
        std::optional<ArcId> arc;
        std::size_t seq;
        nlohmann::ordered_json json;
    };
    std::vector<Row> rows;
    auto arc_json = [&](ArcId a) { return nlohmann::ordered_json::array({g.name(g.arc(a).seller), g.name(g.arc(a).buyer)}); };
    auto add = [&](Step time, Vertex party, int rank, const std::string& action, std::optional<ArcId> arc,
                   std::optional<Vertex> owner, std::optional<Step> timeout) {
        nlohmann::ordered_json j;
        j["party"] = g.name(party);
        j["time"] = time;
        j["action"] = action;
        j["arc"] = arc ? arc_json(*arc) : nlohmann::ordered_json(nullptr);
        j["hashlockOwner"] = owner ? nlohmann::ordered_json(g.name(*owner)) : nlohmann::ordered_json(nullptr);
        j["timeout"] = timeout ? nlohmann::ordered_json(*timeout) : nlohmann::ordered_json(nullptr);
        rows.push_back({time, party, rank, arc, rows.size(), std::move(j)});
    };

    for (Vertex v = 0; v < s.per_party.size(); ++v) {
        for (const auto& ta : s.per_party[v]) {
            std::visit(
                [&](const auto& body) {
                    using T = std::decay_t<decltype(body)>;
                    if constexpr (std::is_same_v<T, MakeSecretPair>) {
                        add(ta.time, v, 0, "make_secret_pair", std::nullopt, v, std::nullopt);
                    } else if constexpr (std::is_same_v<T, VerifyIncoming>) {
                        for (const auto& c : body.checks) {
                            Vertex owner = c.rule == IncomingCheck::Rule::Own ? v : s.hashlock_owner[c.arc];
                            add(ta.time, v, 1, "verify_incoming", c.arc, owner, c.timeout);
                        }
                    } else if constexpr (std::is_same_v<T, CreateContract>) {
                        add(ta.time, v, 2, "create_contract", body.arc, body.hashlock.protector, body.timeout);
                    } else {
                        for (ArcId a : body.arcs) add(ta.time, v, 3, "claim_incoming", a, s.hashlock_owner[a], s.timeout[a]);
                    }
                },
                ta.body);
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
        auto key = [&](const Row& r) {
            return std::make_tuple(r.time, g.name(r.party), r.arc ? g.name(g.arc(*r.arc).seller) : std::string(),
                                   r.arc ? g.name(g.arc(*r.arc).buyer) : std::string(), r.rank);
        };
        return key(a) < key(b);
    });
    auto out = nlohmann::ordered_json::array();
    for (auto& r : rows) out.push_back(std::move(r.json));
    return out;
}

nlohmann::ordered_json schedule_to_json(const SwapDigraph& g, const Schedule& s) {
    nlohmann::ordered_json j;
    j["protocol"] = s.protocol;
    j["mainLeader"] = g.name(s.main_leader);
    j[s.protocol == "rdp" ? "Bstar" : "Dstar"] = s.anchor;
    if (s.decomposition) j["decomposition"] = decomposition_to_json(g, *s.decomposition);
    if (s.distances) j["distances"] = distances_to_json(g, *s.distances);
    j["arcs"] = nlohmann::ordered_json::array();
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        nlohmann::ordered_json row;
        row["arc"] = {g.name(g.arc(a).seller), g.name(g.arc(a).buyer)};
        row["hashlockOwner"] = g.name(s.hashlock_owner[a]);
        row["createTime"] = s.create_time[a];
        row["timeout"] = s.timeout[a];
        row["claimTime"] = s.claim_time[a];
        j["arcs"].push_back(row);
    }
    j["actions"] = schedule_actions_json(g, s);
    return j;
}

}  // namespace htlcswap
