#pragma once

#include "mobisim/routing.hpp"

#include <deque>
#include <map>
#include <set>
#include <utility>
#include <vector>

namespace mobisim {

struct DvConfig {
    SimTime rreq_timeout = SimTime::from_ms(200);
    int rreq_retries = 2;
    std::size_t buffer_limit = 64;
    int max_hops = 32;

    void validate() const;
};

/// On-demand distance-vector routing: flooded route requests, replies sent
/// back along the recorded hop trace, and error messages to precursors when a
/// next hop is declared down.
class DvRouting final : public RoutingProtocol {
public:
    DvRouting(NetworkServices& net, DvConfig cfg);

    Family family() const override { return Family::ReactiveDV; }
    void start() override {}
    void on_link_up(NodePair) override {}
    void on_link_down(NodePair link) override;
    void on_control(NodeId at, NodeId from, const ControlMsg& msg) override;
    void route_data(NodeId at, DataPacket pkt) override;
    std::optional<RouteEntry> route(NodeId at, NodeId dst) const override;

    /// Starts a discovery unless one is already running for (src, dst).
    void discover(NodeId src, NodeId dst);
    bool discovering(NodeId src, NodeId dst) const;

    /// Writes a route directly; for tests that need hand-built tables.
    void install_route(NodeId at, NodeId dst, NodeId next_hop, int hop_count);

    /// Number of distinct RREQs node `n` processed (first copies only).
    std::size_t rreqs_processed(NodeId n) const { return nodes_.at(n).seen.size(); }

private:
    struct Entry {
        RouteEntry route;
        std::set<NodeId> precursors;
    };
    struct Discovery {
        SimTime started;
        int attempts = 0;
        std::uint32_t seq = 0;
        EventHandle timer;
    };
    struct NodeState {
        std::map<NodeId, Entry> routes;
        std::uint32_t next_seq = 1;
        std::set<std::pair<NodeId, std::uint32_t>> seen;
        std::map<NodeId, Discovery> discoveries;
        std::map<NodeId, std::deque<DataPacket>> buffer;
    };

    void send_rreq(NodeId src, NodeId dst, Discovery& d);
    std::vector<NodeId> excluded_transit(NodeId src, NodeId dst) const;
    void on_rreq(NodeId at, NodeId from, const ControlMsg& msg);
    void on_rrep(NodeId at, NodeId from, const ControlMsg& msg);
    void on_rerr(NodeId at, NodeId from, const ControlMsg& msg);
    void on_timeout(NodeId src, NodeId dst, std::uint32_t seq);
    void invalidate(NodeId at, const std::vector<NodeId>& dests);
    void flush(NodeId src, NodeId dst);
    bool usable(NodeId at, const Entry& e) const;

    NetworkServices& net_;
    DvConfig cfg_;
    std::vector<NodeState> nodes_;
};

}  // namespace mobisim
