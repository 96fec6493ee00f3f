#include "mobisim/simulation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace mobisim {

std::string_view to_string(DropReason r) {
    switch (r) {
        case DropReason::NoRoute: return "no_route";
        case DropReason::LinkDown: return "link_down";
        case DropReason::Ttl: return "ttl";
        case DropReason::BufferOverflow: return "buffer_overflow";
        case DropReason::DiscoveryFailed: return "discovery_failed";
    }
    return "?";
}

void TransmitConfig::validate() const {
    if (base_tx_delay <= SimTime::zero()) throw ConfigError("base_tx_delay must be positive");
    if (contention < 0.0) throw ConfigError("contention must be >= 0");
    if (jitter < SimTime::zero() || jitter >= base_tx_delay) throw ConfigError("jitter must be in [0, base_tx_delay)");
    if (data_ttl < 1) throw ConfigError("data_ttl must be >= 1");
}

void Scenario::validate() const {
    if (nodes.size() < 2) throw ConfigError("scenario needs at least two nodes");
    if (duration <= SimTime::zero()) throw ConfigError("duration must be positive");
    if (tick <= SimTime::zero()) throw ConfigError("tick must be positive");
    radio.validate();
    heuristic.validate();
    if (heuristic.kind == HeuristicKind::RLD && heuristic.rld_delta_t < tick)
        throw ConfigError("rld_delta_t must be at least one tick");
    dv.validate();
    ls.validate();
    tx.validate();
    if (metrics.nds_interval <= SimTime::zero() || metrics.alb_window <= SimTime::zero())
        throw ConfigError("metric intervals must be positive");
    if (metrics.nds_interval.us() % tick.us() != 0) throw ConfigError("nds interval must be a whole number of ticks");
    for (const auto& n : nodes) mobisim::validate(n);
    for (const auto& f : flows) {
        if (f.src >= nodes.size() || f.dst >= nodes.size() || f.src == f.dst)
            throw ConfigError(fmt::format("bad flow endpoints {} -> {}", f.src, f.dst));
        if (f.interval <= SimTime::zero()) throw ConfigError("flow interval must be positive");
        if (f.size_bytes == 0) throw ConfigError("flow packet size must be positive");
    }
}

Simulation::Simulation(Scenario scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)),
      seed_(seed),
      links_((scenario_.validate(), scenario_.nodes.size())),
      metrics_(scenario_.nodes.size(), scenario_.metrics),
      jitter_rng_(seed, streams::jitter) {
    const std::size_t n = scenario_.nodes.size();
    verdicts_ = std::make_unique<LinkVerdicts>(engine_, links_, scenario_.heuristic, *this);
    if (scenario_.family == Family::ReactiveDV)
        protocol_ = std::make_unique<DvRouting>(*this, scenario_.dv);
    else
        protocol_ = std::make_unique<LsRouting>(*this, scenario_.ls);
    trajectories_.reserve(n);
    is_mobile_.assign(n, false);
    for (NodeId i = 0; i < n; ++i) {
        trajectories_.emplace_back(scenario_.nodes[i], RngStream(seed, streams::mobility, i));
        poses_.push_back(trajectories_.back().pose_at(SimTime::zero()));
        if (!is_static(scenario_.nodes[i])) {
            mobile_.push_back(i);
            is_mobile_[i] = true;
        }
    }
    busy_until_.assign(n, SimTime::zero());
    control_by_node_.assign(n, 0);
}

Simulation::~Simulation() = default;

void Simulation::set_message_trace(std::ostream* out) {
    msg_trace_ = out;
    if (out) *out << "time_ms,kind,from,to,origin,seq,size_bytes\n";
}

bool Simulation::geometric_up(NodeId a, NodeId b) const {
    if (blocked_.count(NodePair{a, b})) return false;
    return phys_link_up(poses_[a].position, poses_[b].position, scenario_.radio);
}

void Simulation::start() {
    started_ = true;
    const std::size_t n = node_count();
    const SimTime t0 = engine_.now();
    for (NodeId i = 0; i < n; ++i) metrics_.observe_motion(i, t0, is_stationary(poses_[i]));
    for (auto& st : links_.all()) {
        if (!geometric_up(st.endpoints.lo, st.endpoints.hi)) continue;
        st.phys_up = true;
        st.up_since = t0;
        st.verdict = VerdictKind::Up;
        metrics_.on_link_event(st.endpoints, LinkEventKind::Up, t0);
    }
    protocol_->start();
    if (!mobile_.empty())
        engine_.schedule(t0 + scenario_.tick, EventKind::MobilityUpdate, kNoNode, {}, [this] { mobility_tick(); });
    next_sample_ = t0;
    sample_metrics();
    for (std::size_t f = 0; f < scenario_.flows.size(); ++f) {
        const auto& flow = scenario_.flows[f];
        engine_.schedule(std::max(flow.start, t0), EventKind::TrafficGen, flow.src, {}, [this, f] { generate(f); });
    }
}

void Simulation::run_until(SimTime t) {
    if (!started_) start();
    engine_.run_until(t);
}

RunResult Simulation::run() {
    run_until(scenario_.duration);
    metrics_.finalize(engine_.now());
    return result();
}

void Simulation::mobility_tick() {
    const SimTime t = engine_.now();
    for (NodeId m : mobile_) {
        poses_[m] = trajectories_[m].pose_at(t);
        metrics_.observe_motion(m, t, is_stationary(poses_[m]));
    }
    const std::size_t n = node_count();
    // Pair order (lo, hi) ascending; a pair is checked once even when both ends move.
    for (NodeId a = 0; a < n; ++a) {
        for (NodeId b = a + 1; b < n; ++b) {
            if (!is_mobile_[a] && !is_mobile_[b]) continue;
            const NodePair p{a, b};
            const bool up = geometric_up(a, b);
            if (up != links_.at(p).phys_up) update_link(p, up, t);
        }
    }
    // Samples see this instant's link changes.
    if (t == next_sample_) sample_metrics();
    // Scheduled after this tick's link events so timers set earlier win exact ties.
    engine_.schedule(t + scenario_.tick, EventKind::MobilityUpdate, kNoNode, {}, [this] { mobility_tick(); });
}

void Simulation::update_link(NodePair p, bool up, SimTime t) {
    if (up) {
        metrics_.on_link_event(p, LinkEventKind::Up, t);
        verdicts_->on_phys_up(p, t);
    } else {
        metrics_.on_link_event(p, LinkEventKind::Down, t);
        verdicts_->on_phys_down(p, t);
    }
}

void Simulation::block_link(NodePair link) {
    blocked_.insert(link);
    if (started_ && links_.at(link).phys_up) update_link(link, false, engine_.now());
}

void Simulation::sample_metrics() {
    const SimTime t = engine_.now();
    metrics_.sample_all(t);
    static_ratio_sum_ += metrics_.static_moving_ratio(t).ratio;
    ++static_ratio_samples_;
    next_sample_ = t + scenario_.metrics.nds_interval;
    // With mobile nodes the mobility tick takes the sample.
    if (mobile_.empty())
        engine_.schedule(next_sample_, EventKind::MetricSample, kNoNode, {}, [this] { sample_metrics(); });
}

// ---------------------------------------------------------------------------
// Link layer

std::vector<NodeId> Simulation::visible_neighbors(NodeId n) const { return links_.visible_neighbors(n); }

bool Simulation::link_visible(NodeId a, NodeId b) const {
    if (a == b) return false;
    return links_.at(NodePair{a, b}).verdict != VerdictKind::Down;
}

SimTime hop_latency(const TransmitConfig& tx, int active_transmitters) {
    const double us = static_cast<double>(tx.base_tx_delay.us()) * (1.0 + tx.contention * active_transmitters);
    return SimTime::from_us(static_cast<SimTime::rep>(std::llround(us)));
}

SimTime Simulation::occupy_channel(NodeId from) {
    const SimTime now = engine_.now();
    int active = 0;
    for (NodeId m = 0; m < node_count(); ++m) {
        if (m == from || busy_until_[m] <= now) continue;
        if (phys_link_up(poses_[from].position, poses_[m].position, scenario_.radio)) ++active;
    }
    const SimTime latency = hop_latency(scenario_.tx, active);
    busy_until_[from] = std::max(busy_until_[from], now + latency);
    return latency;
}

void Simulation::log_message(const std::string& kind, NodeId from, std::optional<NodeId> to, NodeId origin,
                             std::uint64_t seq, std::uint32_t size) {
    if (!msg_trace_) return;
    *msg_trace_ << fmt::format("{},{},{},{},{},{},{}\n", format_ms(engine_.now()), kind, from,
                               to ? fmt::format("{}", *to) : std::string{"*"}, origin, seq, size);
}

void Simulation::broadcast(NodeId from, const ControlMsg& msg) {
    ++control_msgs_;
    ++control_by_node_[from];
    control_times_.push_back(engine_.now());
    control_bytes_ += msg.size_bytes();
    log_message(std::string(to_string(msg.kind)), from, std::nullopt, msg.origin, msg.seq, msg.size_bytes());

    SimTime latency = occupy_channel(from);
    const auto j = scenario_.tx.jitter.us();
    if (j > 0) latency += SimTime::from_us(jitter_rng_.uniform_int(-j, j));
    Frame frame;
    frame.control = msg;
    for (NodeId to : links_.visible_neighbors(from)) {
        if (links_.at(NodePair{from, to}).verdict != VerdictKind::Up) continue;
        engine_.schedule(engine_.now() + latency, EventKind::MsgDeliver, to,
                         engine_.tracing() ? fmt::format("{} {}->{}", to_string(msg.kind), from, to) : std::string{},
                         [this, from, to, frame] { deliver(from, to, frame, true); });
    }
}

void Simulation::send_frame(NodeId from, NodeId to, Frame frame) {
    const SimTime latency = occupy_channel(from);
    const std::string detail =
        engine_.tracing()
            ? fmt::format("{} {}->{}", frame.is_data ? std::string{"DATA"} : std::string(to_string(frame.control.kind)),
                          from, to)
            : std::string{};
    engine_.schedule(engine_.now() + latency, EventKind::MsgDeliver, to, detail,
                     [this, from, to, f = std::move(frame)] { deliver(from, to, f, false); });
}

bool Simulation::unicast(NodeId from, NodeId to, const ControlMsg& msg) {
    if (!link_visible(from, to)) return false;
    ++control_msgs_;
    ++control_by_node_[from];
    control_times_.push_back(engine_.now());
    control_bytes_ += msg.size_bytes();
    log_message(std::string(to_string(msg.kind)), from, to, msg.origin, msg.seq, msg.size_bytes());
    Frame frame;
    frame.control = msg;
    const NodePair p{from, to};
    if (links_.at(p).verdict == VerdictKind::TentativeDown) {
        parked_[p].push_back(Parked{from, to, std::move(frame)});
        return true;
    }
    send_frame(from, to, std::move(frame));
    return true;
}

bool Simulation::send_data(NodeId from, NodeId to, DataPacket pkt) {
    if (!link_visible(from, to)) return false;
    log_message("DATA", from, to, pkt.src, pkt.id, pkt.size_bytes);
    Frame frame;
    frame.is_data = true;
    frame.data = std::move(pkt);
    const NodePair p{from, to};
    if (links_.at(p).verdict == VerdictKind::TentativeDown) {
        parked_[p].push_back(Parked{from, to, std::move(frame)});
        return true;
    }
    send_frame(from, to, std::move(frame));
    return true;
}

void Simulation::deliver(NodeId from, NodeId to, Frame frame, bool broadcast) {
    const NodePair p{from, to};
    const VerdictKind v = links_.at(p).verdict;
    if (v == VerdictKind::Up) {
        receive(to, from, std::move(frame));
        return;
    }
    if (broadcast) return;  // lost in the air
    if (v == VerdictKind::TentativeDown) {
        parked_[p].push_back(Parked{from, to, std::move(frame)});
        return;
    }
    if (frame.is_data) drop_data(frame.data, DropReason::LinkDown);
}

void Simulation::receive(NodeId at, NodeId from, Frame frame) {
    if (!frame.is_data) {
        protocol_->on_control(at, from, frame.control);
        return;
    }
    DataPacket& pkt = frame.data;
    ++pkt.hops;
    if (pkt.dst == at) {
        ++pkts_delivered_;
        bytes_delivered_ += pkt.size_bytes;
        delay_sum_s_ += (engine_.now() - pkt.created).seconds();
        hop_sum_ += static_cast<std::uint64_t>(pkt.hops);
        return;
    }
    if (--pkt.ttl <= 0) {
        drop_data(pkt, DropReason::Ttl);
        return;
    }
    protocol_->route_data(at, std::move(pkt));
}

void Simulation::drop_data(const DataPacket&, DropReason why) { ++drops_[why]; }

// ---------------------------------------------------------------------------
// Verdicts

void Simulation::on_verdict_down(NodePair link, SimTime) {
    if (auto it = parked_.find(link); it != parked_.end()) {
        for (auto& pk : it->second)
            if (pk.frame.is_data) drop_data(pk.frame.data, DropReason::LinkDown);
        parked_.erase(it);
    }
    protocol_->on_link_down(link);
}

void Simulation::on_verdict_up(NodePair link, SimTime) { protocol_->on_link_up(link); }

void Simulation::on_tentative_recovered(NodePair link, SimTime) {
    auto it = parked_.find(link);
    if (it == parked_.end()) return;
    auto pending = std::move(it->second);
    parked_.erase(it);
    for (auto& pk : pending) send_frame(pk.from, pk.to, std::move(pk.frame));
}

// ---------------------------------------------------------------------------
// Traffic and heuristics inputs

void Simulation::generate(std::size_t flow_index) {
    const auto& flow = scenario_.flows[flow_index];
    const SimTime now = engine_.now();
    const SimTime stop = flow.stop.value_or(scenario_.duration);
    if (now >= stop) return;
    DataPacket pkt;
    pkt.id = next_packet_id_++;
    pkt.flow = static_cast<std::uint32_t>(flow_index);
    pkt.src = flow.src;
    pkt.dst = flow.dst;
    pkt.size_bytes = flow.size_bytes;
    pkt.created = now;
    pkt.ttl = scenario_.tx.data_ttl;
    ++pkts_sent_;
    engine_.schedule(now + flow.interval, EventKind::TrafficGen, flow.src, {}, [this, flow_index] { generate(flow_index); });
    protocol_->route_data(flow.src, std::move(pkt));
}

StabilityClass Simulation::stability(NodeId n) const {
    if (stability_override_) return stability_override_(n);
    return ssld_classify(metrics_, n, engine_.now(), scenario_.heuristic);
}

bool Simulation::is_flow_source(NodeId src, NodeId dst) const {
    return std::any_of(scenario_.flows.begin(), scenario_.flows.end(),
                       [&](const FlowSpec& f) { return f.src == src && f.dst == dst; });
}

bool Simulation::flow_active(NodeId src, NodeId dst) const {
    const SimTime now = engine_.now();
    return std::any_of(scenario_.flows.begin(), scenario_.flows.end(), [&](const FlowSpec& f) {
        return f.src == src && f.dst == dst && now >= f.start && now < f.stop.value_or(scenario_.duration);
    });
}

void Simulation::count_recomputation(NodeId at) {
    ++recomputations_;
    recomputation_log_.push_back({engine_.now(), at});
}

void Simulation::record_discovery(SimTime latency) {
    ++discoveries_;
    discovery_latency_sum_s_ += latency.seconds();
}

std::uint64_t Simulation::control_msgs_since(SimTime t) const {
    return static_cast<std::uint64_t>(control_times_.end() -
                                      std::lower_bound(control_times_.begin(), control_times_.end(), t));
}

RunResult Simulation::result() const {
    RunResult r;
    const SimTime horizon = engine_.now();
    r.recomputations = recomputations_;
    r.control_msgs = control_msgs_;
    r.control_bytes = control_bytes_;
    r.pkts_sent = pkts_sent_;
    r.pkts_delivered = pkts_delivered_;
    r.bytes_delivered = bytes_delivered_;
    for (const auto& [why, count] : drops_) r.pkts_dropped += count;
    r.drops = drops_;
    if (pkts_delivered_ > 0) {
        r.mean_delay_s = delay_sum_s_ / static_cast<double>(pkts_delivered_);
        r.mean_hops = static_cast<double>(hop_sum_) / static_cast<double>(pkts_delivered_);
    }
    if (horizon > SimTime::zero()) r.throughput_bps = 8.0 * static_cast<double>(bytes_delivered_) / horizon.seconds();
    r.discoveries = discoveries_;
    r.discovery_failures = discovery_failures_;
    if (discoveries_ > 0) r.mean_discovery_latency_s = discovery_latency_sum_s_ / static_cast<double>(discoveries_);

    r.phys_breaks = verdicts_->episodes().size();
    r.visible_breaks = verdicts_->visible_breaks();
    for (const auto& e : verdicts_->episodes())
        if (e.suppressed()) ++r.suppressed_episodes;

    double ld_sum = 0.0;
    for (const auto& rec : metrics_.ld_records()) {
        if (rec.open()) {
            ++r.ld_censored;
        } else {
            ++r.ld_closed;
            ld_sum += rec.duration(horizon).seconds();
        }
    }
    if (r.ld_closed > 0) r.ld_mean_s = ld_sum / static_cast<double>(r.ld_closed);

    double nds_sum = 0.0, alb_sum = 0.0;
    for (const auto& row : metrics_.rows()) {
        nds_sum += std::abs(row.nds);
        alb_sum += row.alb;
    }
    if (!metrics_.rows().empty()) {
        r.mean_abs_nds = nds_sum / static_cast<double>(metrics_.rows().size());
        r.mean_alb = alb_sum / static_cast<double>(metrics_.rows().size());
    }
    for (NodeId n = 0; n < node_count(); ++n) {
        for (const auto& iv : metrics_.pause_intervals(n)) r.total_pause_s += (iv.end - iv.start).seconds();
    }
    if (static_ratio_samples_ > 0) r.mean_static_ratio = static_ratio_sum_ / static_cast<double>(static_ratio_samples_);
    return r;
}

}  // namespace mobisim
