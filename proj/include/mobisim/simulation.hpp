#pragma once

#include "mobisim/dv_routing.hpp"
#include "mobisim/engine.hpp"
#include "mobisim/heuristics.hpp"
#include "mobisim/link_model.hpp"
#include "mobisim/ls_routing.hpp"
#include "mobisim/metrics.hpp"
#include "mobisim/mobility.hpp"
#include "mobisim/rng.hpp"
#include "mobisim/routing.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace mobisim {

struct FlowSpec {
    NodeId src = 0;
    NodeId dst = 0;
    SimTime start = SimTime::from_seconds(5.0);
    std::optional<SimTime> stop;  // defaults to the end of the run
    SimTime interval = SimTime::from_ms(100);
    std::uint32_t size_bytes = 512;
};

struct TransmitConfig {
    SimTime base_tx_delay = SimTime::from_ms(2);
    /// Latency grows by this fraction per busy transmitter in range.
    double contention = 0.1;
    /// Broadcast control messages get a uniform offset in [-jitter, +jitter].
    SimTime jitter = SimTime::from_us(500);
    int data_ttl = 32;

    void validate() const;
};

/// Per-hop latency with `active_transmitters` other busy senders in range.
SimTime hop_latency(const TransmitConfig& tx, int active_transmitters);

struct Scenario {
    std::string name = "scenario";
    SimTime duration = SimTime::from_seconds(60.0);
    SimTime tick = SimTime::from_ms(1);
    RadioConfig radio;
    HeuristicConfig heuristic;
    MetricsConfig metrics;
    Family family = Family::ReactiveDV;
    DvConfig dv;
    LsConfig ls;
    TransmitConfig tx;
    std::vector<MobilitySpec> nodes;
    std::vector<FlowSpec> flows;

    void validate() const;
};

struct RunResult {
    std::uint64_t recomputations = 0;
    std::uint64_t control_msgs = 0;
    std::uint64_t control_bytes = 0;
    std::uint64_t pkts_sent = 0;
    std::uint64_t pkts_delivered = 0;
    std::uint64_t pkts_dropped = 0;
    std::uint64_t bytes_delivered = 0;
    double mean_delay_s = 0.0;
    double mean_hops = 0.0;
    double throughput_bps = 0.0;
    std::uint64_t discoveries = 0;
    std::uint64_t discovery_failures = 0;
    double mean_discovery_latency_s = 0.0;
    std::uint64_t phys_breaks = 0;
    std::uint64_t visible_breaks = 0;
    std::uint64_t suppressed_episodes = 0;
    std::uint64_t ld_closed = 0;
    double ld_mean_s = 0.0;
    std::uint64_t ld_censored = 0;
    double mean_abs_nds = 0.0;
    double mean_alb = 0.0;
    double total_pause_s = 0.0;
    double mean_static_ratio = 0.0;
    std::map<DropReason, std::uint64_t> drops;
};

/// A recomputation counted at a node, and the time it happened.
struct RecomputationRecord {
    SimTime t;
    NodeId node = 0;
};

/// One run: mobility, link detection, heuristic verdicts, a routing protocol
/// and constant-rate traffic on a single engine.
class Simulation final : public NetworkServices, public VerdictListener {
public:
    Simulation(Scenario scenario, std::uint64_t seed);
    ~Simulation() override;
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Advances to t (starting the run on first use).
    void run_until(SimTime t);
    /// Runs to the scenario's end and summarizes.
    RunResult run();
    RunResult result() const;

    /// Forces a link physically down from now on, whatever the geometry.
    void block_link(NodePair link);
    /// Replaces the SSLD classifier (testing hook).
    void set_stability_override(std::function<StabilityClass(NodeId)> fn) { stability_override_ = std::move(fn); }

    void set_event_trace(std::ostream* out) { engine_.set_trace(out); }
    /// `time_ms,kind,from,to,origin,seq,size_bytes`; `to` is `*` for broadcasts.
    void set_message_trace(std::ostream* out);

    const Scenario& scenario() const { return scenario_; }
    RoutingProtocol& protocol() { return *protocol_; }
    const LinkTable& links() const { return links_; }
    const MetricsCollector& metrics() const { return metrics_; }
    const LinkVerdicts& verdicts() const { return *verdicts_; }
    const std::vector<RecomputationRecord>& recomputation_log() const { return recomputation_log_; }
    Vec2 position(NodeId n) const { return poses_.at(n).position; }
    std::uint64_t control_msgs() const { return control_msgs_; }
    std::uint64_t control_msgs_from(NodeId n) const { return control_by_node_.at(n); }
    std::uint64_t control_msgs_since(SimTime t) const;

    // NetworkServices
    Engine& engine() override { return engine_; }
    std::size_t node_count() const override { return scenario_.nodes.size(); }
    RngStream& jitter_rng() override { return jitter_rng_; }
    std::vector<NodeId> visible_neighbors(NodeId n) const override;
    bool link_visible(NodeId a, NodeId b) const override;
    void broadcast(NodeId from, const ControlMsg& msg) override;
    bool unicast(NodeId from, NodeId to, const ControlMsg& msg) override;
    bool send_data(NodeId from, NodeId to, DataPacket pkt) override;
    void drop_data(const DataPacket& pkt, DropReason why) override;
    bool ssld_active() const override { return scenario_.heuristic.kind == HeuristicKind::SSLD; }
    StabilityClass stability(NodeId n) const override;
    bool is_flow_source(NodeId src, NodeId dst) const override;
    bool flow_active(NodeId src, NodeId dst) const override;
    void count_recomputation(NodeId at) override;
    void record_discovery(SimTime latency) override;
    void record_discovery_failure() override { ++discovery_failures_; }

    // VerdictListener
    void on_verdict_down(NodePair link, SimTime t) override;
    void on_verdict_up(NodePair link, SimTime t) override;
    void on_tentative_recovered(NodePair link, SimTime t) override;

private:
    struct Frame {
        bool is_data = false;
        ControlMsg control;
        DataPacket data;
    };
    struct Parked {
        NodeId from;
        NodeId to;
        Frame frame;
    };

    void start();
    void mobility_tick();
    void update_link(NodePair p, bool up, SimTime t);
    bool geometric_up(NodeId a, NodeId b) const;
    SimTime occupy_channel(NodeId from);
    void deliver(NodeId from, NodeId to, Frame frame, bool broadcast);
    void receive(NodeId at, NodeId from, Frame frame);
    void send_frame(NodeId from, NodeId to, Frame frame);
    void generate(std::size_t flow_index);
    void sample_metrics();
    void log_message(const std::string& kind, NodeId from, std::optional<NodeId> to, NodeId origin,
                     std::uint64_t seq, std::uint32_t size);

    Scenario scenario_;
    std::uint64_t seed_;
    Engine engine_;
    LinkTable links_;
    MetricsCollector metrics_;
    std::unique_ptr<LinkVerdicts> verdicts_;
    std::unique_ptr<RoutingProtocol> protocol_;
    RngStream jitter_rng_;
    std::vector<Trajectory> trajectories_;
    std::vector<NodePose> poses_;
    std::vector<NodeId> mobile_;
    std::vector<bool> is_mobile_;
    std::set<NodePair> blocked_;
    std::vector<SimTime> busy_until_;
    std::map<NodePair, std::vector<Parked>> parked_;
    std::function<StabilityClass(NodeId)> stability_override_;
    std::ostream* msg_trace_ = nullptr;
    bool started_ = false;
    SimTime next_sample_;

    std::uint64_t next_packet_id_ = 1;
    std::uint64_t recomputations_ = 0;
    std::vector<RecomputationRecord> recomputation_log_;
    std::uint64_t control_msgs_ = 0;
    std::uint64_t control_bytes_ = 0;
    std::vector<std::uint64_t> control_by_node_;
    std::vector<SimTime> control_times_;
    std::uint64_t pkts_sent_ = 0;
    std::uint64_t pkts_delivered_ = 0;
    std::uint64_t bytes_delivered_ = 0;
    std::map<DropReason, std::uint64_t> drops_;
    double delay_sum_s_ = 0.0;
    std::uint64_t hop_sum_ = 0;
    std::uint64_t discoveries_ = 0;
    std::uint64_t discovery_failures_ = 0;
    double discovery_latency_sum_s_ = 0.0;
    double static_ratio_sum_ = 0.0;
    std::uint64_t static_ratio_samples_ = 0;
};

std::string_view to_string(DropReason r);

}  // namespace mobisim
