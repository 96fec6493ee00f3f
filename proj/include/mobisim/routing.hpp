#pragma once

#include "mobisim/common.hpp"
#include "mobisim/engine.hpp"
#include "mobisim/heuristics.hpp"
#include "mobisim/link_model.hpp"
#include "mobisim/rng.hpp"
#include "mobisim/sim_time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

namespace mobisim {

enum class Family { ReactiveDV, ProactiveLS };
std::string_view to_string(Family f);
Family parse_family(std::string_view text);

struct RouteEntry {
    NodeId dest = kNoNode;
    NodeId next_hop = kNoNode;
    int hop_count = 0;
    SimTime installed_at;
    bool active = false;
};

enum class MsgKind { RREQ, RREP, RERR, HELLO, TC };
std::string_view to_string(MsgKind k);

struct ControlMsg {
    MsgKind kind = MsgKind::HELLO;
    NodeId origin = kNoNode;
    NodeId target = kNoNode;
    std::uint32_t seq = 0;
    std::vector<NodeId> hop_trace;  // RREQ: path so far; RREP: src .. replier
    std::vector<NodeId> node_set;   // HELLO/TC: neighbours; RREQ: excluded transit nodes; RERR: lost destinations
    std::vector<NodeId> mpr_set;    // HELLO only
    int hop_count = 0;              // RREP: replier's distance to target

    std::uint32_t size_bytes() const;
};

struct DataPacket {
    std::uint64_t id = 0;
    std::uint32_t flow = 0;
    NodeId src = kNoNode;
    NodeId dst = kNoNode;
    std::uint32_t size_bytes = 0;
    SimTime created;
    int ttl = 32;
    int hops = 0;
};

enum class DropReason { NoRoute, LinkDown, Ttl, BufferOverflow, DiscoveryFailed };

/// What the network offers a routing protocol. Implemented by Simulation.
class NetworkServices {
public:
    virtual ~NetworkServices() = default;

    virtual Engine& engine() = 0;
    virtual std::size_t node_count() const = 0;
    virtual RngStream& jitter_rng() = 0;

    virtual std::vector<NodeId> visible_neighbors(NodeId n) const = 0;
    virtual bool link_visible(NodeId a, NodeId b) const = 0;

    /// One control emission each, whatever the number of receivers.
    virtual void broadcast(NodeId from, const ControlMsg& msg) = 0;
    /// False (and nothing sent) if the link's verdict is Down.
    virtual bool unicast(NodeId from, NodeId to, const ControlMsg& msg) = 0;
    virtual bool send_data(NodeId from, NodeId to, DataPacket pkt) = 0;
    virtual void drop_data(const DataPacket& pkt, DropReason why) = 0;

    /// Successor eligibility inputs; always Robust unless SSLD is active.
    virtual bool ssld_active() const = 0;
    virtual StabilityClass stability(NodeId n) const = 0;

    virtual bool is_flow_source(NodeId src, NodeId dst) const = 0;
    virtual bool flow_active(NodeId src, NodeId dst) const = 0;

    virtual void count_recomputation(NodeId at) = 0;
    virtual void record_discovery(SimTime latency) = 0;
    virtual void record_discovery_failure() = 0;
};

class RoutingProtocol {
public:
    virtual ~RoutingProtocol() = default;

    virtual Family family() const = 0;
    virtual void start() = 0;
    /// Routing-visible link transitions, as decided by the heuristic.
    virtual void on_link_up(NodePair link) = 0;
    virtual void on_link_down(NodePair link) = 0;
    virtual void on_control(NodeId at, NodeId from, const ControlMsg& msg) = 0;
    /// A data packet at `at` (its origin or a transit node) needs forwarding.
    virtual void route_data(NodeId at, DataPacket pkt) = 0;
    virtual std::optional<RouteEntry> route(NodeId at, NodeId dst) const = 0;
};

// ---------------------------------------------------------------------------
// Graph utilities

using Adjacency = std::vector<std::vector<NodeId>>;

struct ShortestPaths {
    std::vector<int> dist;          // -1 when unreachable
    std::vector<NodeId> next_hop;   // kNoNode when unreachable or for the source itself
};

/// Breadth-first hop-count paths from `src`. Among equal-length paths the one
/// with the smallest first hop wins. Nodes with transit_ok[n] == false can be
/// reached but are never relayed through.
ShortestPaths hop_shortest_paths(const Adjacency& g, NodeId src, const std::vector<bool>* transit_ok = nullptr);

struct MprSet {
    NodeId selector = kNoNode;
    std::set<NodeId> relays;
};

/// Greedy multipoint-relay cover: repeatedly takes the neighbour covering the
/// most still-uncovered 2-hop nodes (smallest id on ties).
/// `neighbor_links[n]` is the neighbour set that 1-hop neighbour n reports.
/// Throws std::invalid_argument when a 2-hop node cannot be covered or the
/// 2-hop set contains the selector or a 1-hop neighbour.
MprSet mpr_select(NodeId selector, const std::map<NodeId, std::set<NodeId>>& neighbor_links,
                  const std::set<NodeId>& two_hop);

}  // namespace mobisim
