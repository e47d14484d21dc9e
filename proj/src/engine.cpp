#include "htlcswap/engine.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace htlcswap {

Hashlock hash(Secret s) {
    std::uint64_t z = s.token;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return Hashlock{z ^ (z >> 31)};
}

Secret secret_of(Vertex party) { return Secret{static_cast<std::uint64_t>(party) + 1}; }

std::optional<Vertex> secret_owner(Secret s, std::size_t party_count) {
    if (s.token == 0 || s.token > party_count) return std::nullopt;
    return static_cast<Vertex>(s.token - 1);
}

WorldState WorldState::initial(const SwapDigraph& g) {
    WorldState w;
    w.contracts.resize(g.arc_count());
    w.knowledge.resize(g.vertex_count());
    w.pairs.resize(g.vertex_count());
    return w;
}

Holder WorldState::holder(ArcId a) const {
    switch (contracts.at(a).state) {
        case Contract::State::Escrowed: return Holder::Escrow;
        case Contract::State::Claimed: return Holder::Buyer;
        default: return Holder::Seller;
    }
}

std::optional<Vertex> WorldState::protector(ArcId a) const {
    const Contract& c = contracts.at(a);
    if (!c.placed()) return std::nullopt;
    for (Vertex v = 0; v < pairs.size(); ++v) {
        if (pairs[v] && hash(*pairs[v]) == c.hashlock) return v;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// PartyView

const Contract& PartyView::contract(ArcId a) const {
    const Arc& arc = g_.arc(a);
    if (arc.seller != self_ && arc.buyer != self_) {
        throw std::logic_error("party " + g_.name(self_) + " cannot read contract " + g_.arc_label(a));
    }
    return state_.contracts[a];
}

bool PartyView::knows(Secret s) const {
    const auto& k = state_.knowledge[self_];
    auto it = k.find(s);
    return it != k.end() && it->second < now_;
}

std::vector<Secret> PartyView::known_secrets() const {
    std::vector<Secret> out;
    for (const auto& [s, at] : state_.knowledge[self_]) {
        if (at < now_) out.push_back(s);
    }
    return out;
}

std::optional<Secret> PartyView::own_secret() const { return state_.pairs[self_]; }

std::optional<Hashlock> PartyView::published_hashlock(Vertex party) const {
    const auto& p = state_.pairs.at(party);
    if (!p) return std::nullopt;
    return hash(*p);
}

std::optional<Secret> PartyView::preimage_of(Hashlock h) const {
    for (Secret s : known_secrets()) {
        if (hash(s) == h) return s;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Execution

std::string to_string(Phase p) {
    switch (p) {
        case Phase::Secrets: return "secrets";
        case Phase::Create: return "create";
        case Phase::Claim: return "claim";
        case Phase::Expire: return "expire";
    }
    return "?";
}

namespace {

class Executor {
public:
    Executor(const SwapDigraph& g, Trace& trace) : g_(g), trace_(trace), w_(trace.final_state) {}

    void secrets(Vertex v, const Action& action) {
        const Step t = w_.clock;
        if (const auto* abort = std::get_if<Abort>(&action)) {
            Event e = base(Phase::Secrets, v, "abort");
            e.note = abort->reason;
            push(e);
        } else if (std::holds_alternative<MakePair>(action)) {
            if (w_.pairs[v]) return reject(Phase::Secrets, v, std::nullopt, "party already created a secret pair");
            Secret s = secret_of(v);
            w_.pairs[v] = s;
            w_.knowledge[v].emplace(s, t);
            Event e = base(Phase::Secrets, v, "make_pair");
            e.secret = s;
            e.hashlock = hash(s);
            push(e);
        } else if (const auto* share = std::get_if<Share>(&action)) {
            if (share->to >= g_.vertex_count() || share->to == v) {
                return reject(Phase::Secrets, v, std::nullopt, "invalid share recipient");
            }
            const auto& k = w_.knowledge[v];
            auto it = k.find(share->secret);
            bool own = w_.pairs[v] && *w_.pairs[v] == share->secret;
            if (it == k.end() || (it->second >= t && !own)) {
                return reject(Phase::Secrets, v, std::nullopt, "cannot share an unknown secret");
            }
            w_.knowledge[share->to].emplace(share->secret, t);
            Event e = base(Phase::Secrets, v, "share");
            e.secret = share->secret;
            e.to = share->to;
            push(e);
        }
    }

    void create(Vertex v, const Create& c) {
        const Step t = w_.clock;
        if (c.arc >= g_.arc_count()) return reject(Phase::Create, v, std::nullopt, "unknown arc");
        if (g_.arc(c.arc).seller != v) return reject(Phase::Create, v, c.arc, "only the seller may create");
        Contract& k = w_.contracts[c.arc];
        if (k.placed()) return reject(Phase::Create, v, c.arc, "contract already created");
        if (c.timeout < 0) return reject(Phase::Create, v, c.arc, "negative timeout");
        bool known_lock = std::any_of(w_.pairs.begin(), w_.pairs.end(),
                                      [&](const auto& p) { return p && hash(*p) == c.hashlock; });
        if (!known_lock) return reject(Phase::Create, v, c.arc, "hashlock of no secret pair");
        k.state = Contract::State::Escrowed;
        k.hashlock = c.hashlock;
        k.timeout = c.timeout;
        k.created_at = t;
        Event e = base(Phase::Create, v, "create");
        e.arc = c.arc;
        e.hashlock = c.hashlock;
        e.timeout = c.timeout;
        push(e);
    }

    void claim(Vertex v, const Claim& c) {
        const Step t = w_.clock;
        if (c.arc >= g_.arc_count()) return reject(Phase::Claim, v, std::nullopt, "unknown arc");
        if (g_.arc(c.arc).buyer != v) return reject(Phase::Claim, v, c.arc, "only the buyer may claim");
        Contract& k = w_.contracts[c.arc];
        if (k.state != Contract::State::Escrowed) return reject(Phase::Claim, v, c.arc, "contract not escrowed");
        if (t > k.timeout) return reject(Phase::Claim, v, c.arc, "claim after timeout");
        auto it = w_.knowledge[v].find(c.secret);
        if (it == w_.knowledge[v].end() || it->second >= t) return reject(Phase::Claim, v, c.arc, "secret not known");
        if (hash(c.secret) != k.hashlock) return reject(Phase::Claim, v, c.arc, "wrong preimage");
        k.state = Contract::State::Claimed;
        k.resolved_at = t;
        k.preimage = c.secret;
        w_.knowledge[g_.arc(c.arc).seller].emplace(c.secret, t);
        Event e = base(Phase::Claim, v, "claim");
        e.arc = c.arc;
        e.secret = c.secret;
        push(e);
    }

    void expire() {
        const Step t = w_.clock;
        for (ArcId a = 0; a < g_.arc_count(); ++a) {
            Contract& k = w_.contracts[a];
            if (k.state != Contract::State::Escrowed || k.timeout > t) continue;
            k.state = Contract::State::Expired;
            k.resolved_at = t + 1;
            Event e;
            e.step = t + 1;
            e.phase = Phase::Expire;
            e.party = g_.arc(a).seller;
            e.kind = "expire";
            e.arc = a;
            push(e);
        }
    }

private:
    Event base(Phase p, Vertex v, std::string kind) const {
        Event e;
        e.step = w_.clock;
        e.phase = p;
        e.party = v;
        e.kind = std::move(kind);
        return e;
    }
    void push(Event e) { trace_.events.push_back(std::move(e)); }
    void reject(Phase p, Vertex v, std::optional<ArcId> arc, const std::string& why) {
        Event e = base(p, v, "rejected");
        e.arc = arc;
        e.note = why;
        push(e);
    }

    const SwapDigraph& g_;
    Trace& trace_;
    WorldState& w_;
};

bool any_escrowed(const WorldState& w) {
    return std::any_of(w.contracts.begin(), w.contracts.end(),
                       [](const Contract& c) { return c.state == Contract::State::Escrowed; });
}

}  // namespace

Trace run(const SwapDigraph& g, std::vector<std::unique_ptr<Agent>> agents, const RunOptions& opts) {
    if (agents.size() != g.vertex_count()) throw std::invalid_argument("one agent per party required");
    Trace trace;
    trace.final_state = WorldState::initial(g);
    WorldState& w = trace.final_state;
    Executor exec(g, trace);

    Step last_active = 0;
    for (const auto& a : agents) last_active = std::max(last_active, a->last_active_step());

    for (Step t = 0;; ++t) {
        if (opts.horizon) {
            if (t >= *opts.horizon) break;
        } else if ((t > last_active && !any_escrowed(w)) || t >= opts.horizon_cap) {
            break;
        }
        w.clock = t;

        std::vector<std::vector<Action>> decided(g.vertex_count());
        for (Vertex v = 0; v < g.vertex_count(); ++v) decided[v] = agents[v]->act(PartyView(g, w, v, t));

        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            for (const Action& a : decided[v]) {
                if (std::holds_alternative<MakePair>(a) || std::holds_alternative<Abort>(a)) exec.secrets(v, a);
            }
        }
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            for (const Action& a : decided[v]) {
                if (std::holds_alternative<Share>(a)) exec.secrets(v, a);
            }
        }
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            for (const Action& a : decided[v]) {
                if (const auto* c = std::get_if<Create>(&a)) exec.create(v, *c);
            }
        }
        for (Vertex v = 0; v < g.vertex_count(); ++v) {
            for (const Action& a : decided[v]) {
                if (const auto* c = std::get_if<Claim>(&a)) exec.claim(v, *c);
            }
        }
        exec.expire();
        trace.horizon = t + 1;
    }
    w.clock = trace.horizon;
    return trace;
}

WorldState replay_events(const SwapDigraph& g, const std::vector<Event>& events) {
    WorldState w = WorldState::initial(g);
    Step last = 0;
    for (const Event& e : events) {
        last = std::max(last, e.phase == Phase::Expire ? e.step : e.step + 1);
        if (e.kind == "make_pair") {
            w.pairs[e.party] = *e.secret;
            w.knowledge[e.party].emplace(*e.secret, e.step);
        } else if (e.kind == "share") {
            w.knowledge[*e.to].emplace(*e.secret, e.step);
        } else if (e.kind == "create") {
            Contract& k = w.contracts[*e.arc];
            k.state = Contract::State::Escrowed;
            k.hashlock = *e.hashlock;
            k.timeout = *e.timeout;
            k.created_at = e.step;
        } else if (e.kind == "claim") {
            Contract& k = w.contracts[*e.arc];
            k.state = Contract::State::Claimed;
            k.resolved_at = e.step;
            k.preimage = e.secret;
            w.knowledge[g.arc(*e.arc).seller].emplace(*e.secret, e.step);
        } else if (e.kind == "expire") {
            Contract& k = w.contracts[*e.arc];
            k.state = Contract::State::Expired;
            k.resolved_at = e.step;
        }
    }
    w.clock = last;
    return w;
}

// ---------------------------------------------------------------------------
// Export

std::string hashlock_label(const SwapDigraph& g, Hashlock h) {
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (hash(secret_of(v)) == h) return "h(" + g.name(v) + ")";
    }
    return "h#" + hex64(h.value);
}

std::string secret_label(const SwapDigraph& g, Secret s) {
    if (auto owner = secret_owner(s, g.vertex_count())) return "s(" + g.name(*owner) + ")";
    return "s#" + std::to_string(s.token);
}

nlohmann::ordered_json event_to_json(const SwapDigraph& g, const Event& e) {
    nlohmann::ordered_json j;
    j["step"] = e.step;
    j["phase"] = to_string(e.phase);
    j["party"] = g.name(e.party);
    j["event"] = e.kind;
    if (e.arc) j["arc"] = {g.name(g.arc(*e.arc).seller), g.name(g.arc(*e.arc).buyer)};
    nlohmann::ordered_json detail = nlohmann::ordered_json::object();
    if (e.hashlock) detail["hashlock"] = hashlock_label(g, *e.hashlock);
    if (e.timeout) detail["timeout"] = *e.timeout;
    if (e.secret) detail["secret"] = secret_label(g, *e.secret);
    if (e.to) detail["to"] = g.name(*e.to);
    if (!e.note.empty()) detail["note"] = e.note;
    j["detail"] = detail;
    return j;
}

std::string trace_to_jsonl(const SwapDigraph& g, const Trace& t) {
    std::string out;
    for (const Event& e : t.events) {
        out += event_to_json(g, e).dump();
        out += '\n';
    }
    return out;
}

std::uint64_t trace_hash(const SwapDigraph& g, const Trace& t) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : trace_to_jsonl(g, t)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace htlcswap
