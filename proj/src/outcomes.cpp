#include "htlcswap/outcomes.hpp"

#include <algorithm>
#include <stdexcept>

namespace htlcswap {

std::string to_string(OutcomeClass c) {
    switch (c) {
        case OutcomeClass::Deal: return "Deal";
        case OutcomeClass::NoDeal: return "NoDeal";
        case OutcomeClass::Discount: return "Discount";
        case OutcomeClass::FreeRide: return "FreeRide";
        case OutcomeClass::Underwater: return "Underwater";
    }
    return "?";
}

OutcomeClass classify_counts(std::size_t in, std::size_t all_in, std::size_t out, std::size_t all_out) {
    if (in == all_in && out == all_out) return OutcomeClass::Deal;
    if (in == 0 && out == 0) return OutcomeClass::NoDeal;
    if (in == all_in) return OutcomeClass::Discount;
    if (out == 0) return OutcomeClass::FreeRide;
    return OutcomeClass::Underwater;
}

Outcome classify(const SwapDigraph& g, const WorldState& w, std::vector<Vertex> parties) {
    std::sort(parties.begin(), parties.end());
    parties.erase(std::unique(parties.begin(), parties.end()), parties.end());
    if (parties.empty()) throw std::invalid_argument("empty subject");
    for (const Contract& c : w.contracts) {
        if (c.state == Contract::State::Escrowed) throw std::runtime_error("unresolved contracts at horizon");
    }
    auto member = [&](Vertex v) { return std::binary_search(parties.begin(), parties.end(), v); };

    Outcome o;
    o.subject = parties;
    for (ArcId a = 0; a < g.arc_count(); ++a) {
        bool s = member(g.arc(a).seller), b = member(g.arc(a).buyer);
        bool moved = w.contracts[a].state == Contract::State::Claimed;
        if (b && !s) {
            o.incoming.push_back(a);
            if (moved) o.transferred_in.push_back(a);
        } else if (s && !b) {
            o.outgoing.push_back(a);
            if (moved) o.transferred_out.push_back(a);
        }
    }
    o.cls = classify_counts(o.transferred_in.size(), o.incoming.size(), o.transferred_out.size(),
                            o.outgoing.size());
    return o;
}

bool dominates(const Outcome& a, const Outcome& b) {
    if (a.subject != b.subject) throw std::invalid_argument("outcomes of different subjects");
    auto subset = [](const std::vector<ArcId>& x, const std::vector<ArcId>& y) {
        return std::includes(y.begin(), y.end(), x.begin(), x.end());
    };
    bool differ = a.transferred_in != b.transferred_in || a.transferred_out != b.transferred_out;
    return subset(b.transferred_in, a.transferred_in) && subset(a.transferred_out, b.transferred_out) && differ;
}

nlohmann::ordered_json outcome_to_json(const SwapDigraph& g, const Outcome& o) {
    auto arcs = [&](const std::vector<ArcId>& list) {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (ArcId a : list) j.push_back({g.name(g.arc(a).seller), g.name(g.arc(a).buyer)});
        return j;
    };
    nlohmann::ordered_json subject = nlohmann::ordered_json::array();
    for (Vertex v : o.subject) subject.push_back(g.name(v));
    nlohmann::ordered_json j;
    j["subject"] = subject;
    j["in"] = arcs(o.transferred_in);
    j["out"] = arcs(o.transferred_out);
    j["class"] = to_string(o.cls);
    j["acceptable"] = o.acceptable();
    return j;
}

}  // namespace htlcswap
