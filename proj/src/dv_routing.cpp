#include "mobisim/dv_routing.hpp"

#include <algorithm>

namespace mobisim {

void DvConfig::validate() const {
    if (rreq_timeout <= SimTime::zero()) throw ConfigError("rreq_timeout must be positive");
    if (rreq_retries < 0) throw ConfigError("rreq_retries must be >= 0");
    if (buffer_limit == 0) throw ConfigError("buffer_limit must be positive");
    if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
}

DvRouting::DvRouting(NetworkServices& net, DvConfig cfg) : net_(net), cfg_(cfg), nodes_(net.node_count()) {
    cfg_.validate();
}

bool DvRouting::usable(NodeId at, const Entry& e) const {
    return e.route.active && net_.link_visible(at, e.route.next_hop);
}

std::optional<RouteEntry> DvRouting::route(NodeId at, NodeId dst) const {
    const auto& routes = nodes_.at(at).routes;
    auto it = routes.find(dst);
    if (it == routes.end() || !it->second.route.active) return std::nullopt;
    return it->second.route;
}

void DvRouting::install_route(NodeId at, NodeId dst, NodeId next_hop, int hop_count) {
    auto& e = nodes_.at(at).routes[dst];
    e.route = RouteEntry{dst, next_hop, hop_count, net_.engine().now(), true};
}

bool DvRouting::discovering(NodeId src, NodeId dst) const { return nodes_.at(src).discoveries.count(dst) != 0; }

void DvRouting::discover(NodeId src, NodeId dst) {
    auto& st = nodes_.at(src);
    if (st.discoveries.count(dst)) return;
    Discovery& d = st.discoveries[dst];
    d.started = net_.engine().now();
    send_rreq(src, dst, d);
}

std::vector<NodeId> DvRouting::excluded_transit(NodeId src, NodeId dst) const {
    if (!net_.ssld_active()) return {};
    const std::size_t n = net_.node_count();
    std::vector<bool> ok(n, true);
    std::vector<NodeId> excluded;
    for (NodeId v = 0; v < n; ++v) {
        if (v == src || v == dst) continue;
        if (!successor_eligible(net_.stability(v))) {
            ok[v] = false;
            excluded.push_back(v);
        }
    }
    if (excluded.empty()) return {};
    Adjacency g(n);
    for (NodeId v = 0; v < n; ++v) g[v] = net_.visible_neighbors(v);
    // The filter may only narrow the choice, never disconnect the pair.
    if (hop_shortest_paths(g, src, &ok).dist[dst] < 0) return {};
    return excluded;
}

void DvRouting::send_rreq(NodeId src, NodeId dst, Discovery& d) {
    auto& st = nodes_.at(src);
    ++d.attempts;
    d.seq = st.next_seq++;
    st.seen.insert({src, d.seq});
    ControlMsg m;
    m.kind = MsgKind::RREQ;
    m.origin = src;
    m.target = dst;
    m.seq = d.seq;
    m.hop_trace = {src};
    m.node_set = excluded_transit(src, dst);
    const std::uint32_t seq = d.seq;
    d.timer = net_.engine().schedule(net_.engine().now() + cfg_.rreq_timeout, EventKind::TimerExpiry, src,
                                     "rreq_timeout", [this, src, dst, seq] { on_timeout(src, dst, seq); });
    net_.broadcast(src, m);
}

void DvRouting::on_timeout(NodeId src, NodeId dst, std::uint32_t seq) {
    auto& st = nodes_.at(src);
    auto it = st.discoveries.find(dst);
    if (it == st.discoveries.end() || it->second.seq != seq) return;
    if (it->second.attempts <= cfg_.rreq_retries) {
        send_rreq(src, dst, it->second);
        return;
    }
    st.discoveries.erase(it);
    net_.record_discovery_failure();
    auto buf = st.buffer.find(dst);
    if (buf != st.buffer.end()) {
        for (const auto& p : buf->second) net_.drop_data(p, DropReason::DiscoveryFailed);
        st.buffer.erase(buf);
    }
}

void DvRouting::on_control(NodeId at, NodeId from, const ControlMsg& msg) {
    switch (msg.kind) {
        case MsgKind::RREQ: on_rreq(at, from, msg); break;
        case MsgKind::RREP: on_rrep(at, from, msg); break;
        case MsgKind::RERR: on_rerr(at, from, msg); break;
        default: break;
    }
}

void DvRouting::on_rreq(NodeId at, NodeId from, const ControlMsg& msg) {
    auto& st = nodes_.at(at);
    if (!st.seen.insert({msg.origin, msg.seq}).second) return;
    ControlMsg fwd = msg;
    fwd.hop_trace.push_back(at);
    if (static_cast<int>(fwd.hop_trace.size()) - 1 > cfg_.max_hops) return;

    if (at == msg.target) {
        ControlMsg rep;
        rep.kind = MsgKind::RREP;
        rep.origin = msg.origin;
        rep.target = msg.target;
        rep.seq = msg.seq;
        rep.hop_trace = std::move(fwd.hop_trace);
        rep.hop_count = 0;
        net_.unicast(at, from, rep);
        return;
    }
    if (std::find(msg.node_set.begin(), msg.node_set.end(), at) != msg.node_set.end()) return;

    auto it = st.routes.find(msg.target);
    if (it != st.routes.end() && usable(at, it->second) &&
        std::find(fwd.hop_trace.begin(), fwd.hop_trace.end(), it->second.route.next_hop) == fwd.hop_trace.end()) {
        it->second.precursors.insert(from);
        ControlMsg rep;
        rep.kind = MsgKind::RREP;
        rep.origin = msg.origin;
        rep.target = msg.target;
        rep.seq = msg.seq;
        rep.hop_trace = std::move(fwd.hop_trace);
        rep.hop_count = it->second.route.hop_count;
        net_.unicast(at, from, rep);
        return;
    }
    net_.broadcast(at, fwd);
}

void DvRouting::on_rrep(NodeId at, NodeId from, const ControlMsg& msg) {
    const auto& trace = msg.hop_trace;
    auto pos = std::find(trace.begin(), trace.end(), at);
    if (pos == trace.end() || pos + 1 == trace.end() || *(pos + 1) != from) return;
    if (!net_.link_visible(at, from)) return;
    const auto i = static_cast<int>(pos - trace.begin());
    const int k = static_cast<int>(trace.size()) - 1;

    auto& st = nodes_.at(at);
    auto& e = st.routes[msg.target];
    e.route = RouteEntry{msg.target, from, (k - i) + msg.hop_count, net_.engine().now(), true};
    if (i > 0) {
        const NodeId prev = trace[static_cast<std::size_t>(i - 1)];
        e.precursors.insert(prev);
        net_.unicast(at, prev, msg);
        return;
    }
    auto d = st.discoveries.find(msg.target);
    if (d != st.discoveries.end()) {
        net_.record_discovery(net_.engine().now() - d->second.started);
        net_.engine().cancel(d->second.timer);
        st.discoveries.erase(d);
    }
    flush(at, msg.target);
}

void DvRouting::flush(NodeId src, NodeId dst) {
    auto& st = nodes_.at(src);
    auto it = st.buffer.find(dst);
    if (it == st.buffer.end()) return;
    std::deque<DataPacket> pending = std::move(it->second);
    st.buffer.erase(it);
    for (auto& p : pending) route_data(src, std::move(p));
}

void DvRouting::route_data(NodeId at, DataPacket pkt) {
    auto& st = nodes_.at(at);
    auto it = st.routes.find(pkt.dst);
    if (it != st.routes.end() && usable(at, it->second)) {
        if (net_.send_data(at, it->second.route.next_hop, pkt)) return;
        net_.drop_data(pkt, DropReason::LinkDown);
        return;
    }
    if (at != pkt.src) {
        net_.drop_data(pkt, DropReason::NoRoute);
        return;
    }
    const NodeId dst = pkt.dst;
    auto& q = st.buffer[dst];
    if (q.size() >= cfg_.buffer_limit) {
        net_.drop_data(pkt, DropReason::BufferOverflow);
    } else {
        q.push_back(std::move(pkt));
    }
    discover(at, dst);
}

void DvRouting::on_link_down(NodePair link) {
    for (NodeId x : {link.lo, link.hi}) {
        const NodeId y = link.other(x);
        std::vector<NodeId> dests;
        for (const auto& [dst, e] : nodes_.at(x).routes)
            if (e.route.active && e.route.next_hop == y) dests.push_back(dst);
        if (!dests.empty()) invalidate(x, dests);
    }
}

void DvRouting::on_rerr(NodeId at, NodeId from, const ControlMsg& msg) {
    std::vector<NodeId> dests;
    auto& routes = nodes_.at(at).routes;
    for (NodeId d : msg.node_set) {
        auto it = routes.find(d);
        if (it != routes.end() && it->second.route.active && it->second.route.next_hop == from) dests.push_back(d);
    }
    if (!dests.empty()) invalidate(at, dests);
}

void DvRouting::invalidate(NodeId at, const std::vector<NodeId>& dests) {
    auto& routes = nodes_.at(at).routes;
    std::map<NodeId, std::vector<NodeId>> notify;
    for (NodeId d : dests) {
        Entry& e = routes.at(d);
        e.route.active = false;
        for (NodeId p : e.precursors) notify[p].push_back(d);
        e.precursors.clear();
    }
    for (const auto& [p, lost] : notify) {
        if (!net_.link_visible(at, p)) continue;
        ControlMsg err;
        err.kind = MsgKind::RERR;
        err.origin = at;
        err.node_set = lost;
        net_.unicast(at, p, err);
    }
    for (NodeId d : dests) {
        if (!net_.is_flow_source(at, d)) continue;
        net_.count_recomputation(at);
        if (net_.flow_active(at, d)) discover(at, d);
    }
}

}  // namespace mobisim
