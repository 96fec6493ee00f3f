#include "mobisim/ls_routing.hpp"

#include <algorithm>
#include <iterator>

namespace mobisim {

void LsConfig::validate() const {
    if (hello_interval <= SimTime::zero()) throw ConfigError("hello_interval must be positive");
    if (tc_interval <= SimTime::zero()) throw ConfigError("tc_interval must be positive");
    if (tc_start < SimTime::zero()) throw ConfigError("tc_start must be >= 0");
    if (hold_factor < 1) throw ConfigError("hold_factor must be >= 1");
}

LsRouting::LsRouting(NetworkServices& net, LsConfig cfg) : net_(net), cfg_(cfg), nodes_(net.node_count()) {
    cfg_.validate();
}

namespace {

SimTime random_phase(RngStream& rng, SimTime interval) {
    // Strictly inside (0, interval) so that a run of length D sees exactly
    // D / interval ticks.
    const auto span = interval.us();
    if (span <= 1) return SimTime::from_us(0);
    return SimTime::from_us(rng.uniform_int(1, span - 1));
}

}  // namespace

void LsRouting::start() {
    Engine& eng = net_.engine();
    for (NodeId n = 0; n < nodes_.size(); ++n) {
        auto& st = nodes_[n];
        for (NodeId m : net_.visible_neighbors(n)) st.neighbors[m].last_heard = eng.now();
        st.hello_phase = random_phase(net_.jitter_rng(), cfg_.hello_interval);
        st.first_tc = eng.now() + cfg_.tc_start + random_phase(net_.jitter_rng(), cfg_.tc_interval);
        eng.schedule(eng.now() + st.hello_phase, EventKind::TimerExpiry, n, "hello", [this, n] { hello_tick(n); });
        eng.schedule(st.first_tc, EventKind::TimerExpiry, n, "tc", [this, n] { tc_tick(n); });
    }
    for (NodeId n = 0; n < nodes_.size(); ++n) refresh(n);
}

std::set<NodeId> LsRouting::neighbors(NodeId n) const {
    std::set<NodeId> out;
    for (const auto& [m, _] : nodes_.at(n).neighbors) out.insert(m);
    return out;
}

std::set<NodeId> LsRouting::mpr_selectors(NodeId n) const {
    std::set<NodeId> out;
    for (const auto& [m, nb] : nodes_.at(n).neighbors)
        if (nb.selects_me) out.insert(m);
    return out;
}

void LsRouting::hello_tick(NodeId n) {
    Engine& eng = net_.engine();
    eng.schedule(eng.now() + cfg_.hello_interval, EventKind::TimerExpiry, n, "hello", [this, n] { hello_tick(n); });
    expire(n);
    auto& st = nodes_[n];
    ControlMsg m;
    m.kind = MsgKind::HELLO;
    m.origin = n;
    for (const auto& [nb, _] : st.neighbors) m.node_set.push_back(nb);
    m.mpr_set.assign(st.mprs.begin(), st.mprs.end());
    ++st.hellos;
    net_.broadcast(n, m);
    // Stability classes drift over time; successor filtering must follow.
    if (net_.ssld_active()) recompute_routes(n);
}

void LsRouting::tc_tick(NodeId n) {
    Engine& eng = net_.engine();
    eng.schedule(eng.now() + cfg_.tc_interval, EventKind::TimerExpiry, n, "tc", [this, n] { tc_tick(n); });
    auto& st = nodes_[n];
    if (mpr_selectors(n).empty()) return;
    ControlMsg m;
    m.kind = MsgKind::TC;
    m.origin = n;
    m.seq = ++st.tc_seq;
    for (const auto& [nb, _] : st.neighbors) m.node_set.push_back(nb);
    st.tc_seen.insert({n, m.seq});
    st.tc_relayed.insert({n, m.seq});
    ++st.tc_originated;
    net_.broadcast(n, m);
}

void LsRouting::expire(NodeId n) {
    auto& st = nodes_[n];
    const SimTime now = net_.engine().now();
    const SimTime nb_hold = cfg_.hello_interval * cfg_.hold_factor;
    bool changed = false;
    for (auto it = st.neighbors.begin(); it != st.neighbors.end();) {
        if (now - it->second.last_heard > nb_hold) {
            it = st.neighbors.erase(it);
            changed = true;
        } else {
            ++it;
        }
    }
    for (auto it = st.topology.begin(); it != st.topology.end();) {
        if (it->second.expires < now) {
            it = st.topology.erase(it);
            changed = true;
        } else {
            ++it;
        }
    }
    if (changed) refresh(n);
}

void LsRouting::on_link_up(NodePair link) {
    const SimTime now = net_.engine().now();
    for (NodeId x : {link.lo, link.hi}) {
        nodes_[x].neighbors[link.other(x)].last_heard = now;
        refresh(x);
    }
}

void LsRouting::on_link_down(NodePair link) {
    for (NodeId x : {link.lo, link.hi}) {
        if (nodes_[x].neighbors.erase(link.other(x))) refresh(x);
    }
}

void LsRouting::on_control(NodeId at, NodeId from, const ControlMsg& msg) {
    if (msg.kind == MsgKind::HELLO) on_hello(at, from, msg);
    else if (msg.kind == MsgKind::TC) on_tc(at, from, msg);
}

void LsRouting::on_hello(NodeId at, NodeId from, const ControlMsg& msg) {
    auto& nb = nodes_[at].neighbors[from];
    nb.last_heard = net_.engine().now();
    std::set<NodeId> adv(msg.node_set.begin(), msg.node_set.end());
    adv.erase(at);
    const bool selects = std::find(msg.mpr_set.begin(), msg.mpr_set.end(), at) != msg.mpr_set.end();
    if (adv == nb.advertised && selects == nb.selects_me) return;
    nb.advertised = std::move(adv);
    nb.selects_me = selects;
    refresh(at);
}

void LsRouting::on_tc(NodeId at, NodeId from, const ControlMsg& msg) {
    auto& st = nodes_[at];
    if (msg.origin == at) return;
    if (st.tc_seen.insert({msg.origin, msg.seq}).second) {
        auto& entry = st.topology[msg.origin];
        if (msg.seq >= entry.seq) {
            std::set<NodeId> adv(msg.node_set.begin(), msg.node_set.end());
            const bool differs = adv != entry.advertised || entry.seq == 0;
            entry.seq = msg.seq;
            entry.advertised = std::move(adv);
            entry.expires = net_.engine().now() + cfg_.tc_interval * cfg_.hold_factor;
            if (differs) refresh(at, false);
        }
    }
    auto sender = st.neighbors.find(from);
    if (sender == st.neighbors.end() || !sender->second.selects_me) return;
    if (!st.tc_relayed.insert({msg.origin, msg.seq}).second) return;
    ++st.tc_forwarded;
    net_.broadcast(at, msg);
}

void LsRouting::refresh(NodeId n, bool neighborhood) {
    auto& st = nodes_[n];
    const std::size_t count = nodes_.size();

    if (neighborhood) {
        std::map<NodeId, std::set<NodeId>> links;
        std::set<NodeId> two_hop;
        for (const auto& [m, nb] : st.neighbors) {
            auto& l = links[m];
            for (NodeId k : nb.advertised)
                if (k != n) l.insert(k);
        }
        for (const auto& [m, l] : links)
            for (NodeId k : l)
                if (!links.count(k)) two_hop.insert(k);
        st.mprs = mpr_select(n, links, two_hop).relays;
    }

    // Edges touching n come only from n's own neighbour table.
    std::vector<char> view(count * count, 0);
    const auto add = [&view, count](NodeId a, NodeId b) {
        if (a == b) return;
        view[a * count + b] = 1;
        view[b * count + a] = 1;
    };
    for (const auto& [m, nb] : st.neighbors) {
        add(n, m);
        for (NodeId k : nb.advertised)
            if (k != n) add(m, k);
    }
    for (const auto& [o, entry] : st.topology) {
        if (o == n) continue;
        for (NodeId k : entry.advertised)
            if (k != n) add(o, k);
    }
    if (st.view.size() != view.size()) st.view.assign(view.size(), 0);
    bool lost_edge = false, changed = false;
    for (std::size_t i = 0; i < view.size(); ++i) {
        if (view[i] == st.view[i]) continue;
        changed = true;
        lost_edge |= st.view[i] != 0;
    }
    if (!changed) return;
    st.view = std::move(view);
    if (lost_edge) net_.count_recomputation(n);
    recompute_routes(n);
}

void LsRouting::recompute_routes(NodeId n) {
    auto& st = nodes_[n];
    const std::size_t count = nodes_.size();
    Adjacency g(count);
    for (NodeId a = 0; a < count; ++a)
        for (NodeId b = 0; b < count; ++b)
            if (st.view[a * count + b]) g[a].push_back(b);

    ShortestPaths plain = hop_shortest_paths(g, n);
    ShortestPaths filtered;
    bool use_filter = false;
    if (net_.ssld_active()) {
        std::vector<bool> ok(count, true);
        for (NodeId v = 0; v < count; ++v)
            if (v != n && !successor_eligible(net_.stability(v))) {
                ok[v] = false;
                use_filter = true;
            }
        if (use_filter) filtered = hop_shortest_paths(g, n, &ok);
    }

    const SimTime now = net_.engine().now();
    std::map<NodeId, RouteEntry> routes;
    for (NodeId d = 0; d < count; ++d) {
        if (d == n || plain.dist[d] < 0) continue;
        const ShortestPaths& sp = (use_filter && filtered.dist[d] > 0) ? filtered : plain;
        RouteEntry e{d, sp.next_hop[d], sp.dist[d], now, true};
        auto old = st.routes.find(d);
        if (old != st.routes.end() && old->second.next_hop == e.next_hop && old->second.hop_count == e.hop_count)
            e.installed_at = old->second.installed_at;
        routes.emplace(d, e);
    }
    st.routes = std::move(routes);
}

void LsRouting::route_data(NodeId at, DataPacket pkt) {
    auto it = nodes_[at].routes.find(pkt.dst);
    if (it == nodes_[at].routes.end() || !net_.link_visible(at, it->second.next_hop)) {
        net_.drop_data(pkt, DropReason::NoRoute);
        return;
    }
    if (!net_.send_data(at, it->second.next_hop, pkt)) net_.drop_data(pkt, DropReason::LinkDown);
}

std::optional<RouteEntry> LsRouting::route(NodeId at, NodeId dst) const {
    const auto& routes = nodes_.at(at).routes;
    auto it = routes.find(dst);
    if (it == routes.end()) return std::nullopt;
    return it->second;
}

}  // namespace mobisim
