#include "mobisim/routing.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace mobisim {

std::string_view to_string(Family f) { return f == Family::ReactiveDV ? "DV" : "LS"; }

Family parse_family(std::string_view text) {
    std::string s(text);
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (s == "DV" || s == "REACTIVEDV") return Family::ReactiveDV;
    if (s == "LS" || s == "PROACTIVELS") return Family::ProactiveLS;
    throw ConfigError("unknown routing family '" + std::string(text) + "'");
}

std::string_view to_string(MsgKind k) {
    switch (k) {
        case MsgKind::RREQ: return "RREQ";
        case MsgKind::RREP: return "RREP";
        case MsgKind::RERR: return "RERR";
        case MsgKind::HELLO: return "HELLO";
        case MsgKind::TC: return "TC";
    }
    return "?";
}

std::uint32_t ControlMsg::size_bytes() const {
    const auto n = [](const std::vector<NodeId>& v) { return static_cast<std::uint32_t>(4 * v.size()); };
    switch (kind) {
        case MsgKind::RREQ: return 24 + n(hop_trace) + n(node_set);
        case MsgKind::RREP: return 20 + n(hop_trace);
        case MsgKind::RERR: return 12 + n(node_set);
        case MsgKind::HELLO: return 16 + n(node_set) + n(mpr_set);
        case MsgKind::TC: return 16 + n(node_set);
    }
    return 0;
}

ShortestPaths hop_shortest_paths(const Adjacency& g, NodeId src, const std::vector<bool>* transit_ok) {
    ShortestPaths sp;
    sp.dist.assign(g.size(), -1);
    sp.next_hop.assign(g.size(), kNoNode);
    if (src >= g.size()) return sp;
    std::deque<NodeId> frontier{src};
    sp.dist[src] = 0;
    while (!frontier.empty()) {
        const NodeId u = frontier.front();
        frontier.pop_front();
        if (u != src && transit_ok && !(*transit_ok)[u]) continue;
        for (NodeId w : g[u]) {
            const NodeId first = (u == src) ? w : sp.next_hop[u];
            if (sp.dist[w] < 0) {
                sp.dist[w] = sp.dist[u] + 1;
                sp.next_hop[w] = first;
                frontier.push_back(w);
            } else if (sp.dist[w] == sp.dist[u] + 1 && first < sp.next_hop[w]) {
                // Level d is fully expanded before any level d+1 node is, so
                // w's first hop is final by the time w itself is expanded.
                sp.next_hop[w] = first;
            }
        }
    }
    return sp;
}

MprSet mpr_select(NodeId selector, const std::map<NodeId, std::set<NodeId>>& neighbor_links,
                  const std::set<NodeId>& two_hop) {
    MprSet out;
    out.selector = selector;
    for (NodeId t : two_hop) {
        if (t == selector || neighbor_links.count(t))
            throw std::invalid_argument("mpr_select: 2-hop set overlaps 1-hop set or selector");
    }
    std::set<NodeId> uncovered = two_hop;
    while (!uncovered.empty()) {
        NodeId best = kNoNode;
        std::size_t best_cover = 0;
        for (const auto& [n, links] : neighbor_links) {  // ascending id
            if (out.relays.count(n)) continue;
            std::size_t cover = 0;
            for (NodeId m : links)
                if (uncovered.count(m)) ++cover;
            if (cover > best_cover) {
                best_cover = cover;
                best = n;
            }
        }
        if (best == kNoNode) throw std::invalid_argument("mpr_select: uncoverable 2-hop node");
        out.relays.insert(best);
        for (NodeId m : neighbor_links.at(best)) uncovered.erase(m);
    }
    return out;
}

}  // namespace mobisim
