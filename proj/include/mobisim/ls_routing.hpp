#pragma once

#include "mobisim/routing.hpp"

#include <map>
#include <set>
#include <utility>
#include <vector>

namespace mobisim {

struct LsConfig {
    SimTime hello_interval = SimTime::from_seconds(1.0);
    SimTime tc_interval = SimTime::from_seconds(2.0);
    /// First TC tick is at tc_start plus a random phase in (0, tc_interval).
    SimTime tc_start = SimTime::from_seconds(3.0);
    int hold_factor = 3;

    void validate() const;
};

/// Proactive link-state routing: periodic HELLOs build 1- and 2-hop
/// neighbourhoods, TCs flooded through multipoint relays spread the rest of
/// the topology, and every node runs a hop-count shortest-path sweep over its
/// own view.
class LsRouting final : public RoutingProtocol {
public:
    LsRouting(NetworkServices& net, LsConfig cfg);

    Family family() const override { return Family::ProactiveLS; }
    void start() override;
    void on_link_up(NodePair link) override;
    void on_link_down(NodePair link) override;
    void on_control(NodeId at, NodeId from, const ControlMsg& msg) override;
    void route_data(NodeId at, DataPacket pkt) override;
    std::optional<RouteEntry> route(NodeId at, NodeId dst) const override;

    const std::set<NodeId>& mprs(NodeId n) const { return nodes_.at(n).mprs; }
    std::set<NodeId> mpr_selectors(NodeId n) const;
    std::set<NodeId> neighbors(NodeId n) const;
    SimTime hello_phase(NodeId n) const { return nodes_.at(n).hello_phase; }
    SimTime first_tc(NodeId n) const { return nodes_.at(n).first_tc; }
    std::uint64_t tc_originated(NodeId n) const { return nodes_.at(n).tc_originated; }
    std::uint64_t tc_forwarded(NodeId n) const { return nodes_.at(n).tc_forwarded; }
    std::uint64_t hellos_sent(NodeId n) const { return nodes_.at(n).hellos; }

private:
    struct Neighbor {
        SimTime last_heard;
        std::set<NodeId> advertised;
        bool selects_me = false;
    };
    struct TopologyEntry {
        std::uint32_t seq = 0;
        std::set<NodeId> advertised;
        SimTime expires;
    };
    struct NodeState {
        std::map<NodeId, Neighbor> neighbors;
        std::set<NodeId> mprs;
        std::map<NodeId, TopologyEntry> topology;
        std::vector<char> view;  // n x n adjacency of the topology view
        std::map<NodeId, RouteEntry> routes;
        std::uint32_t tc_seq = 0;
        std::set<std::pair<NodeId, std::uint32_t>> tc_seen;
        std::set<std::pair<NodeId, std::uint32_t>> tc_relayed;
        SimTime hello_phase;
        SimTime first_tc;
        std::uint64_t hellos = 0, tc_originated = 0, tc_forwarded = 0;
    };

    void hello_tick(NodeId n);
    void tc_tick(NodeId n);
    void on_hello(NodeId at, NodeId from, const ControlMsg& msg);
    void on_tc(NodeId at, NodeId from, const ControlMsg& msg);
    void expire(NodeId n);
    /// Rebuilds the view (and MPRs if the neighbourhood changed), then routes.
    /// Counts a recomputation if the view lost an edge.
    void refresh(NodeId n, bool neighborhood = true);
    void recompute_routes(NodeId n);

    NetworkServices& net_;
    LsConfig cfg_;
    std::vector<NodeState> nodes_;
};

}  // namespace mobisim
