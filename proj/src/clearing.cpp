#include "htlcswap/clearing.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>

namespace htlcswap {

std::string to_string(ClearingResult::Stage s) {
    switch (s) {
        case ClearingResult::Stage::Accepted: return "accepted";
        case ClearingResult::Stage::Unbalanced: return "unbalanced";
        case ClearingResult::Stage::ParallelArcConflict: return "parallel-arc conflict";
        case ClearingResult::Stage::NotStronglyConnected: return "not strongly connected";
        case ClearingResult::Stage::NotReuniclus: return "not reuniclus";
    }
    return "?";
}

namespace {

using ArcList = std::vector<std::pair<std::string, std::string>>;

struct TagSlots {
    std::string tag;
    std::vector<std::string> offers;  // one entry per offered instance, sorted
    std::vector<std::string> wants;
};

}  // namespace

ClearingResult clear(const std::vector<Order>& orders, const ClearingOptions& opts) {
    using Stage = ClearingResult::Stage;
    ClearingResult result;

    std::map<std::string, TagSlots> by_tag;
    std::set<std::string> parties;
    for (const Order& o : orders) {
        if (o.party.empty()) throw std::invalid_argument("order without party");
        if (!parties.insert(o.party).second) throw std::invalid_argument("duplicate order for " + o.party);
        for (const auto& t : o.offers) {
            if (t.empty()) throw std::invalid_argument("empty asset tag");
            by_tag[t].tag = t;
            by_tag[t].offers.push_back(o.party);
        }
        for (const auto& t : o.wants) {
            if (t.empty()) throw std::invalid_argument("empty asset tag");
            by_tag[t].tag = t;
            by_tag[t].wants.push_back(o.party);
        }
    }
    std::vector<TagSlots> tags;
    for (auto& [name, slots] : by_tag) {
        if (slots.offers.size() != slots.wants.size()) {
            result.stage = Stage::Unbalanced;
            result.reason = "tag " + name + " offered " + std::to_string(slots.offers.size()) + " times, wanted " +
                            std::to_string(slots.wants.size()) + " times";
            return result;
        }
        std::sort(slots.offers.begin(), slots.offers.end());
        std::sort(slots.wants.begin(), slots.wants.end());
        tags.push_back(slots);
    }

    // Backtrack over want instances, trying offers in party order.
    struct Slot {
        std::size_t tag;
        std::string buyer;
    };
    std::vector<Slot> slots;
    for (std::size_t t = 0; t < tags.size(); ++t)
        for (const auto& w : tags[t].wants) slots.push_back({t, w});

    std::set<std::pair<std::string, std::string>> used_pairs;
    std::vector<std::vector<bool>> used_offer(tags.size());
    for (std::size_t t = 0; t < tags.size(); ++t) used_offer[t].assign(tags[t].offers.size(), false);
    std::vector<std::pair<std::pair<std::string, std::string>, std::string>> chosen;  // arc, tag

    Stage furthest = Stage::ParallelArcConflict;
    std::string furthest_reason = "no matching avoids self-trades and parallel arcs";
    std::optional<ArcList> best;
    std::map<std::pair<std::string, std::string>, std::string> best_tags;
    std::set<ArcList> seen;

    auto evaluate = [&] {
        ArcList arcs;
        for (const auto& c : chosen) arcs.push_back(c.first);
        std::sort(arcs.begin(), arcs.end());
        if (!seen.insert(arcs).second) return;
        if (best && arcs >= *best) return;
        SwapDigraph g = SwapDigraph::from_arcs(arcs, std::vector<std::string>(parties.begin(), parties.end()));
        if (!is_strongly_connected(g)) {
            if (furthest < Stage::NotStronglyConnected) {
                furthest = Stage::NotStronglyConnected;
                furthest_reason = "matched swap digraph is not strongly connected";
            }
            return;
        }
        auto rec = reuniclus_decompose(g);
        if (!rec.accepted()) {
            if (furthest < Stage::NotReuniclus) {
                furthest = Stage::NotReuniclus;
                furthest_reason = rec.reason;
            }
            return;
        }
        best = arcs;
        best_tags.clear();
        for (const auto& c : chosen) best_tags[c.first] = c.second;
    };

    std::function<bool(std::size_t)> search = [&](std::size_t k) {
        if (k == slots.size()) {
            ++result.matchings_tried;
            evaluate();
            return result.matchings_tried < opts.search_cap;
        }
        const Slot& s = slots[k];
        const TagSlots& ts = tags[s.tag];
        std::string last_tried;
        for (std::size_t i = 0; i < ts.offers.size(); ++i) {
            const std::string& seller = ts.offers[i];
            if (used_offer[s.tag][i] || seller == s.buyer || seller == last_tried) continue;
            if (used_pairs.count({seller, s.buyer})) continue;
            last_tried = seller;  // instances of one party are interchangeable
            used_offer[s.tag][i] = true;
            used_pairs.insert({seller, s.buyer});
            chosen.push_back({{seller, s.buyer}, ts.tag});
            bool go_on = search(k + 1);
            chosen.pop_back();
            used_pairs.erase({seller, s.buyer});
            used_offer[s.tag][i] = false;
            if (!go_on) return false;
        }
        return true;
    };
    search(0);

    if (!best) {
        result.stage = furthest;
        result.reason = furthest_reason;
        return result;
    }
    result.graph = SwapDigraph::from_arcs(*best, std::vector<std::string>(parties.begin(), parties.end()));
    result.tags = best_tags;
    return result;
}

std::vector<Order> orders_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("orders must be a list");
    std::vector<Order> out;
    for (const auto& e : j) {
        Order o;
        o.party = e.at("party").get<std::string>();
        o.offers = e.value("offers", std::vector<std::string>{});
        o.wants = e.value("wants", std::vector<std::string>{});
        out.push_back(o);
    }
    return out;
}

}  // namespace htlcswap
