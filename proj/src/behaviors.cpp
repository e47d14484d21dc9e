#include "htlcswap/behaviors.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <set>
#include <stdexcept>

namespace htlcswap {

std::string to_string(Deviation::Kind k) {
    switch (k) {
        case Deviation::Kind::FollowUntil: return "follow_until";
        case Deviation::Kind::NeverCreate: return "never_create";
        case Deviation::Kind::DelayCreate: return "delay_create";
        case Deviation::Kind::WrongTimeout: return "wrong_timeout";
        case Deviation::Kind::WrongHashlock: return "wrong_hashlock";
        case Deviation::Kind::ShareSecret: return "share_secret";
        case Deviation::Kind::ClaimEagerly: return "claim_eagerly";
        case Deviation::Kind::WithholdClaim: return "withhold_claim";
    }
    return "?";
}

Deviation::Kind parse_deviation_kind(const std::string& name) {
    for (int k = 0; k <= static_cast<int>(Deviation::Kind::WithholdClaim); ++k) {
        auto kind = static_cast<Deviation::Kind>(k);
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown deviation " + name);
}

std::string describe(const SwapDigraph& g, const Deviation& d) {
    std::string s = to_string(d.kind);
    switch (d.kind) {
        case Deviation::Kind::FollowUntil: return s + "(" + std::to_string(d.at) + ")";
        case Deviation::Kind::NeverCreate:
        case Deviation::Kind::ClaimEagerly:
        case Deviation::Kind::WithholdClaim: return s + g.arc_label(d.arc);
        case Deviation::Kind::DelayCreate: return s + g.arc_label(d.arc) + "+" + std::to_string(d.delta);
        case Deviation::Kind::WrongTimeout: return s + g.arc_label(d.arc) + "=" + std::to_string(d.timeout);
        case Deviation::Kind::WrongHashlock: return s + g.arc_label(d.arc) + "=h(" + g.name(d.target) + ")";
        case Deviation::Kind::ShareSecret: return s + "(" + g.name(d.target) + "@" + std::to_string(d.at) + ")";
    }
    return s;
}

BehaviorPlan BehaviorPlan::conforming(const SwapDigraph& g) {
    BehaviorPlan p;
    p.parties.resize(g.vertex_count());
    return p;
}

std::size_t BehaviorPlan::deviation_count() const {
    std::size_t n = 0;
    for (const auto& p : parties) n += p.deviations.size();
    return n;
}

std::vector<Vertex> BehaviorPlan::deviators() const {
    std::vector<Vertex> out;
    for (Vertex v = 0; v < parties.size(); ++v) {
        const auto& p = parties[v];
        if (!p.conforming || !p.deviations.empty() || !p.raw.empty() || !p.pool_with.empty()) out.push_back(v);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Agent

namespace {

class PlanAgent : public Agent {
public:
    PlanAgent(const SwapDigraph& g, const Schedule& s, Vertex self, PartyPlan plan)
        : g_(g), s_(s), self_(self), plan_(std::move(plan)) {
        for (const Deviation& d : plan_.deviations) {
            switch (d.kind) {
                case Deviation::Kind::FollowUntil: stop_after_ = std::min(stop_after_, d.at); break;
                case Deviation::Kind::NeverCreate: never_.insert(d.arc); break;
                case Deviation::Kind::DelayCreate: delay_[d.arc] += d.delta; break;
                case Deviation::Kind::WrongTimeout: timeout_[d.arc] = d.timeout; break;
                case Deviation::Kind::WrongHashlock: lock_[d.arc] = d.target; break;
                case Deviation::Kind::ClaimEagerly: eager_.insert(d.arc); break;
                case Deviation::Kind::WithholdClaim: withhold_.insert(d.arc); break;
                case Deviation::Kind::ShareSecret: break;
            }
        }
        last_ = 0;
        if (plan_.conforming) {
            for (const auto& ta : s_.per_party[self_]) {
                last_ = std::max(last_, ta.time);
                if (const auto* c = std::get_if<ClaimIncoming>(&ta.body)) last_ = std::max(last_, c->deadline);
            }
            Step extra = 0;
            for (const auto& [arc, d] : delay_) extra = std::max(extra, d);
            last_ += extra;
        }
        for (const auto& r : plan_.raw) last_ = std::max(last_, r.step);
        for (const Deviation& d : plan_.deviations) {
            if (d.kind == Deviation::Kind::ShareSecret) last_ = std::max(last_, d.at);
        }
    }

    Step last_active_step() const override { return last_; }

    std::vector<Action> act(const PartyView& view) override {
        std::vector<Action> out;
        const Step t = view.now();

        for (Vertex partner : plan_.pool_with) share_all(view, partner, out);
        for (const Deviation& d : plan_.deviations) {
            if (d.kind == Deviation::Kind::ShareSecret && d.at == t) share_all(view, d.target, out);
        }
        for (const auto& r : plan_.raw) {
            if (r.step == t) out.push_back(r.action);
        }
        for (ArcId a : eager_) {
            const Contract& c = view.contract(a);
            if (c.state != Contract::State::Escrowed || t > c.timeout || claimed_.count(a)) continue;
            if (auto sec = view.preimage_of(c.hashlock)) {
                out.push_back(Claim{a, *sec});
                claimed_.insert(a);
            }
        }

        if (plan_.conforming && !aborted_ && t <= stop_after_) follow(view, out);
        return out;
    }

private:
    void share_all(const PartyView& view, Vertex to, std::vector<Action>& out) {
        std::vector<Secret> secrets = view.known_secrets();
        if (auto own = view.own_secret(); own && !view.knows(*own)) secrets.push_back(*own);
        for (Secret sec : secrets) {
            if (shared_.insert({to, sec.token}).second) out.push_back(Share{to, sec});
        }
    }

    void abort(std::vector<Action>& out, std::string why) {
        out.push_back(Abort{std::move(why)});
        aborted_ = true;
    }

    Hashlock own_lock() const { return hash(secret_of(self_)); }

    bool verify(const PartyView& view, const VerifyIncoming& v, std::string& why) {
        std::map<int, Hashlock> seen;
        for (const IncomingCheck& chk : v.checks) {
            const Contract& c = view.contract(chk.arc);
            if (c.state != Contract::State::Escrowed) {
                why = "incoming " + g_.arc_label(chk.arc) + " missing";
                return false;
            }
            if (c.timeout != chk.timeout) {
                why = "incoming " + g_.arc_label(chk.arc) + " has timeout " + std::to_string(c.timeout);
                return false;
            }
            std::optional<Hashlock> expected;
            if (chk.rule == IncomingCheck::Rule::Own) {
                expected = own_lock();
            } else {
                expected = view.published_hashlock(s_.hashlock_owner[chk.arc]);
                auto [it, fresh] = seen.emplace(chk.group, c.hashlock);
                if (!fresh && it->second != c.hashlock) {
                    why = "incoming hashlocks differ";
                    return false;
                }
            }
            if (!expected || c.hashlock != *expected) {
                why = "incoming " + g_.arc_label(chk.arc) + " has the wrong hashlock";
                return false;
            }
        }
        for (const auto& [group, h] : seen) group_lock_[group] = h;
        return true;
    }

    void follow(const PartyView& view, std::vector<Action>& out) {
        const Step t = view.now();
        const auto& program = s_.per_party[self_];
        for (std::size_t i = 0; i < program.size() && !aborted_; ++i) {
            const TimedAction& ta = program[i];
            if (std::holds_alternative<MakeSecretPair>(ta.body)) {
                if (ta.time == t) out.push_back(MakePair{});
            } else if (const auto* v = std::get_if<VerifyIncoming>(&ta.body)) {
                std::string why;
                if (ta.time == t && !verify(view, *v, why)) abort(out, why);
            } else if (const auto* c = std::get_if<CreateContract>(&ta.body)) {
                if (never_.count(c->arc)) continue;
                auto d = delay_.find(c->arc);
                if (ta.time + (d == delay_.end() ? 0 : d->second) != t) continue;
                Hashlock h;
                if (auto w = lock_.find(c->arc); w != lock_.end()) {
                    h = hash(secret_of(w->second));
                } else if (c->hashlock.kind == HashlockSource::Kind::Own) {
                    h = own_lock();
                } else if (auto g = group_lock_.find(c->hashlock.group); g != group_lock_.end()) {
                    h = g->second;
                } else {
                    h = hash(secret_of(c->hashlock.protector));
                }
                auto wt = timeout_.find(c->arc);
                out.push_back(Create{c->arc, h, wt == timeout_.end() ? c->timeout : wt->second});
            } else if (const auto* c = std::get_if<ClaimIncoming>(&ta.body)) {
                if (c->arcs.empty()) continue;
                bool active = c->eager ? (ta.time <= t && t <= c->deadline) : ta.time == t;
                if (!active) continue;
                bool any = false;
                for (ArcId a : c->arcs) {
                    if (withhold_.count(a)) continue;
                    const Contract& k = view.contract(a);
                    if (claimed_.count(a)) {
                        any = true;
                        continue;
                    }
                    if (k.state != Contract::State::Escrowed) continue;
                    std::optional<Secret> sec;
                    if (c->own_secret) {
                        if (view.knows(secret_of(self_)) && hash(secret_of(self_)) == k.hashlock) sec = secret_of(self_);
                    } else {
                        sec = view.preimage_of(k.hashlock);
                    }
                    if (sec) {
                        out.push_back(Claim{a, *sec});
                        claimed_.insert(a);
                        any = true;
                    }
                }
                if (!any && !c->own_secret && t == c->deadline) abort(out, "no secret learned");
            }
        }
    }

    const SwapDigraph& g_;
    const Schedule& s_;
    Vertex self_;
    PartyPlan plan_;

    Step stop_after_ = INT_MAX;
    std::set<ArcId> never_, eager_, withhold_;
    std::map<ArcId, Step> delay_, timeout_;
    std::map<ArcId, Vertex> lock_;
    Step last_ = 0;

    bool aborted_ = false;
    std::map<int, Hashlock> group_lock_;
    std::set<ArcId> claimed_;
    std::set<std::pair<Vertex, std::uint64_t>> shared_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(const SwapDigraph& g, const Schedule& s, Vertex party, const PartyPlan& plan) {
    return std::make_unique<PlanAgent>(g, s, party, plan);
}

std::vector<std::unique_ptr<Agent>> make_agents(const SwapDigraph& g, const Schedule& s, const BehaviorPlan& plan) {
    if (plan.parties.size() != g.vertex_count()) throw std::invalid_argument("plan does not cover every party");
    std::vector<std::unique_ptr<Agent>> agents;
    for (Vertex v = 0; v < g.vertex_count(); ++v) agents.push_back(make_agent(g, s, v, plan.parties[v]));
    return agents;
}

Trace simulate(const SwapDigraph& g, const Schedule& s, const BehaviorPlan& plan, const RunOptions& opts) {
    return run(g, make_agents(g, s, plan), opts);
}

// ---------------------------------------------------------------------------
// Adversaries

std::vector<Deviation> deviation_catalog(const SwapDigraph& g, const Schedule& s, Vertex party) {
    using K = Deviation::Kind;
    std::vector<Deviation> out;

    Step last = s.last_step();
    for (Step t = -1; t < last; ++t) out.push_back({K::FollowUntil, 0, t, 0, 0, 0});

    std::set<Step> timeouts(s.timeout.begin(), s.timeout.end());
    timeouts.insert(s.max_timeout() + 1);
    std::set<Vertex> locks(s.hashlock_owner.begin(), s.hashlock_owner.end());
    locks.insert(party);

    for (ArcId a : g.out_arcs(party)) {
        out.push_back({K::NeverCreate, a, 0, 0, 0, 0});
        for (Step d : {1, 2}) out.push_back({K::DelayCreate, a, 0, d, 0, 0});
        for (Step tau : timeouts) {
            if (tau != s.timeout[a]) out.push_back({K::WrongTimeout, a, 0, 0, tau, 0});
        }
        for (Vertex x : locks) {
            if (x != s.hashlock_owner[a]) out.push_back({K::WrongHashlock, a, 0, 0, 0, x});
        }
    }
    for (ArcId a : g.in_arcs(party)) {
        out.push_back({K::ClaimEagerly, a, 0, 0, 0, 0});
        out.push_back({K::WithholdClaim, a, 0, 0, 0, 0});
    }
    for (Vertex x = 0; x < g.vertex_count(); ++x) {
        if (x == party) continue;
        for (Step t = 0; t <= last; ++t) out.push_back({K::ShareSecret, 0, t, 0, 0, x});
    }
    return out;
}

BehaviorPlan coalition_plan(const SwapDigraph& g, const std::vector<Vertex>& coalition) {
    BehaviorPlan plan = BehaviorPlan::conforming(g);
    for (Vertex v : coalition) {
        for (Vertex w : coalition) {
            if (v != w) plan.parties.at(v).pool_with.push_back(w);
        }
    }
    return plan;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

BehaviorPlan random_adversary(const SwapDigraph& g, const Schedule& s, std::uint64_t seed,
                              const std::vector<Vertex>& coalition, int budget) {
    BehaviorPlan plan = coalition_plan(g, coalition);
    if (budget <= 0 || coalition.empty()) return plan;
    std::uint64_t state = seed;
    auto next = [&](std::uint64_t bound) {
        state = splitmix64(state);
        return bound == 0 ? 0 : state % bound;
    };
    std::vector<std::pair<Vertex, Deviation>> pool;
    for (Vertex v : coalition) {
        for (const Deviation& d : deviation_catalog(g, s, v)) pool.emplace_back(v, d);
    }
    int count = static_cast<int>(next(static_cast<std::uint64_t>(budget) + 1));
    for (int i = 0; i < count && !pool.empty(); ++i) {
        std::size_t pick = next(pool.size());
        plan.parties[pool[pick].first].deviations.push_back(pool[pick].second);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return plan;
}

std::size_t for_each_adversary(const SwapDigraph& g, const Schedule& s, const std::vector<Vertex>& coalition,
                               int budget, const std::function<bool(const BehaviorPlan&)>& visit) {
    std::vector<std::pair<Vertex, Deviation>> pool;
    for (Vertex v : coalition) {
        for (const Deviation& d : deviation_catalog(g, s, v)) pool.emplace_back(v, d);
    }
    const BehaviorPlan base = coalition_plan(g, coalition);
    std::size_t visited = 0;
    bool stop = false;
    std::vector<std::size_t> chosen;
    std::function<void(std::size_t, int)> rec = [&](std::size_t from, int left) {
        if (stop) return;
        if (left == 0) {
            BehaviorPlan plan = base;
            for (std::size_t i : chosen) plan.parties[pool[i].first].deviations.push_back(pool[i].second);
            ++visited;
            if (!visit(plan)) stop = true;
            return;
        }
        for (std::size_t i = from; i < pool.size() && !stop; ++i) {
            chosen.push_back(i);
            rec(i + 1, left - 1);
            chosen.pop_back();
        }
    };
    for (int k = 0; k <= budget && !stop; ++k) rec(0, k);
    return visited;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

ArcId arc_from_json(const SwapDigraph& g, const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("arc must be [seller, buyer]");
    return g.arc_id(j[0].get<std::string>(), j[1].get<std::string>());
}

nlohmann::ordered_json arc_to_json(const SwapDigraph& g, ArcId a) {
    return {g.name(g.arc(a).seller), g.name(g.arc(a).buyer)};
}

Secret secret_from_json(const SwapDigraph& g, const nlohmann::json& j) { return secret_of(g.vertex(j.get<std::string>())); }

Action action_from_json(const SwapDigraph& g, const std::string& name, const nlohmann::json& args) {
    if (name == "make_pair") return MakePair{};
    if (name == "share") return Share{g.vertex(args.at("to").get<std::string>()), secret_from_json(g, args.at("secret"))};
    if (name == "create") {
        return Create{arc_from_json(g, args.at("arc")), hash(secret_from_json(g, args.at("hashlock"))),
                      args.at("timeout").get<Step>()};
    }
    if (name == "claim") return Claim{arc_from_json(g, args.at("arc")), secret_from_json(g, args.at("secret"))};
    if (name == "abort") return Abort{args.value("reason", std::string("scripted"))};
    throw std::invalid_argument("unknown action " + name);
}

std::string owner_name(const SwapDigraph& g, Secret s) {
    auto owner = secret_owner(s, g.vertex_count());
    if (!owner) throw std::invalid_argument("secret without owner");
    return g.name(*owner);
}

std::string lock_owner_name(const SwapDigraph& g, Hashlock h) {
    for (Vertex v = 0; v < g.vertex_count(); ++v) {
        if (hash(secret_of(v)) == h) return g.name(v);
    }
    throw std::invalid_argument("hashlock without owner");
}

nlohmann::ordered_json action_to_json(const SwapDigraph& g, const Action& a, std::string& name) {
    nlohmann::ordered_json args = nlohmann::ordered_json::object();
    std::visit(
        [&](const auto& x) {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, MakePair>) {
                name = "make_pair";
            } else if constexpr (std::is_same_v<T, Share>) {
                name = "share";
                args["to"] = g.name(x.to);
                args["secret"] = owner_name(g, x.secret);
            } else if constexpr (std::is_same_v<T, Create>) {
                name = "create";
                args["arc"] = arc_to_json(g, x.arc);
                args["hashlock"] = lock_owner_name(g, x.hashlock);
                args["timeout"] = x.timeout;
            } else if constexpr (std::is_same_v<T, Claim>) {
                name = "claim";
                args["arc"] = arc_to_json(g, x.arc);
                args["secret"] = owner_name(g, x.secret);
            } else {
                name = "abort";
                args["reason"] = x.reason;
            }
        },
        a);
    return args;
}

}  // namespace

BehaviorPlan plan_from_json(const SwapDigraph& g, const nlohmann::json& j) {
    const nlohmann::json& list = j.is_object() ? j.at("behaviors") : j;
    if (!list.is_array()) throw std::invalid_argument("behaviors must be a list");
    BehaviorPlan plan = BehaviorPlan::conforming(g);
    std::vector<bool> explicit_conforming(g.vertex_count(), false);

    for (const auto& e : list) {
        if (e.contains("coalition")) {
            std::vector<Vertex> members;
            for (const auto& n : e["coalition"]) members.push_back(g.vertex(n.get<std::string>()));
            for (Vertex v : members) {
                for (Vertex w : members) {
                    auto& pool = plan.parties[v].pool_with;
                    if (v != w && std::find(pool.begin(), pool.end(), w) == pool.end()) pool.push_back(w);
                }
            }
            continue;
        }
        Vertex v = g.vertex(e.at("party").get<std::string>());
        PartyPlan& p = plan.parties[v];
        if (e.contains("conforming")) {
            p.conforming = e["conforming"].get<bool>();
            explicit_conforming[v] = true;
        }
        if (e.contains("deviation")) {
            Deviation d;
            d.kind = parse_deviation_kind(e["deviation"].get<std::string>());
            if (e.contains("arc")) d.arc = arc_from_json(g, e["arc"]);
            d.at = e.value("at", 0);
            d.delta = e.value("delta", 0);
            d.timeout = e.value("timeout", 0);
            if (e.contains("to")) d.target = g.vertex(e["to"].get<std::string>());
            if (e.contains("hashlock")) d.target = g.vertex(e["hashlock"].get<std::string>());
            p.deviations.push_back(d);
        }
        if (e.contains("action")) {
            p.raw.push_back({e.at("step").get<Step>(),
                             action_from_json(g, e["action"].get<std::string>(), e.value("args", nlohmann::json::object()))});
            if (!explicit_conforming[v]) p.conforming = false;
        }
    }
    return plan;
}

nlohmann::ordered_json plan_to_json(const SwapDigraph& g, const BehaviorPlan& plan) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    std::set<std::vector<Vertex>> coalitions;
    for (Vertex v = 0; v < plan.parties.size(); ++v) {
        const PartyPlan& p = plan.parties[v];
        const std::string& name = g.name(v);
        if (!p.conforming || !p.raw.empty()) list.push_back({{"party", name}, {"conforming", p.conforming}});
        for (const Deviation& d : p.deviations) {
            nlohmann::ordered_json e;
            e["party"] = name;
            e["deviation"] = to_string(d.kind);
            switch (d.kind) {
                case Deviation::Kind::FollowUntil: e["at"] = d.at; break;
                case Deviation::Kind::NeverCreate:
                case Deviation::Kind::ClaimEagerly:
                case Deviation::Kind::WithholdClaim: e["arc"] = arc_to_json(g, d.arc); break;
                case Deviation::Kind::DelayCreate:
                    e["arc"] = arc_to_json(g, d.arc);
                    e["delta"] = d.delta;
                    break;
                case Deviation::Kind::WrongTimeout:
                    e["arc"] = arc_to_json(g, d.arc);
                    e["timeout"] = d.timeout;
                    break;
                case Deviation::Kind::WrongHashlock:
                    e["arc"] = arc_to_json(g, d.arc);
                    e["hashlock"] = g.name(d.target);
                    break;
                case Deviation::Kind::ShareSecret:
                    e["to"] = g.name(d.target);
                    e["at"] = d.at;
                    break;
            }
            list.push_back(e);
        }
        for (const ScriptedAction& r : p.raw) {
            std::string action;
            auto args = action_to_json(g, r.action, action);
            list.push_back({{"party", name}, {"step", r.step}, {"action", action}, {"args", args}});
        }
        if (!p.pool_with.empty()) {
            std::vector<Vertex> members = p.pool_with;
            members.push_back(v);
            std::sort(members.begin(), members.end());
            coalitions.insert(members);
        }
    }
    for (const auto& members : coalitions) {
        nlohmann::ordered_json names = nlohmann::ordered_json::array();
        for (Vertex v : members) names.push_back(g.name(v));
        list.push_back({{"coalition", names}});
    }
    return list;
}

}  // namespace htlcswap
