#include "mobisim/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <ostream>

namespace mobisim {

MetricsCollector::MetricsCollector(std::size_t node_count, MetricsConfig cfg)
    : cfg_(cfg), degree_(node_count, 0), breaks_(node_count), nds_(node_count), pause_(node_count) {
    if (cfg_.nds_interval <= SimTime::zero() || cfg_.alb_window <= SimTime::zero())
        throw ConfigError("metrics: sampling interval and ALB window must be > 0");
}

void MetricsCollector::on_link_event(NodePair link, LinkEventKind kind, SimTime t) {
    auto it = open_.find(link);
    if (kind == LinkEventKind::Up) {
        if (it != open_.end()) throw SimError("metrics: double Up for link " + link.str());
        open_.emplace(link, records_.size());
        records_.push_back(LdRecord{link, t, std::nullopt});
        ++degree_[link.lo];
        ++degree_[link.hi];
    } else {
        if (it == open_.end()) throw SimError("metrics: Down without Up for link " + link.str());
        records_[it->second].end = t;
        open_.erase(it);
        --degree_[link.lo];
        --degree_[link.hi];
        breaks_[link.lo].push_back(t);
        breaks_[link.hi].push_back(t);
    }
}

void MetricsCollector::observe_motion(NodeId node, SimTime t, bool stationary) {
    auto& p = pause_[node];
    if (p.stationary == stationary) return;
    if (stationary) {
        p.current_start = t;
    } else if (p.current_start) {
        p.intervals.push_back({*p.current_start, t});
        p.current_start.reset();
    }
    p.stationary = stationary;
}

NdsSample MetricsCollector::sample_nds(NodeId node, SimTime t) {
    auto& series = nds_[node];
    NdsSample s;
    s.node = node;
    s.t = t;
    s.nd_now = degree_[node];
    s.nd_prev = series.empty() ? s.nd_now : series.back().nd_now;
    s.nds = s.nd_prev - s.nd_now;
    series.push_back(s);
    return s;
}

void MetricsCollector::sample_all(SimTime t) {
    for (NodeId n = 0; n < degree_.size(); ++n) {
        const auto s = sample_nds(n, t);
        const auto& p = pause_[n];
        rows_.push_back(MetricRow{t, n, s.nd_now, s.nds, alb(n, t, cfg_.alb_window), p.stationary.value_or(true)});
    }
}

std::size_t MetricsCollector::breaks_in(NodeId node, SimTime from_exclusive, SimTime to_inclusive) const {
    const auto& b = breaks_[node];
    const auto lo = std::upper_bound(b.begin(), b.end(), from_exclusive);
    const auto hi = std::upper_bound(b.begin(), b.end(), to_inclusive);
    return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

double MetricsCollector::alb(NodeId node, SimTime t, SimTime window) const {
    return static_cast<double>(breaks_in(node, t - window, t)) / window.seconds();
}

std::optional<double> MetricsCollector::mean_abs_nds(NodeId node, SimTime t, SimTime window) const {
    const auto& series = nds_[node];
    long sum = 0;
    long count = 0;
    for (auto it = series.rbegin(); it != series.rend(); ++it) {
        if (it->t > t) continue;
        if (it->t <= t - window) break;
        sum += std::abs(it->nds);
        ++count;
    }
    if (count == 0) return std::nullopt;
    return static_cast<double>(sum) / static_cast<double>(count);
}

MobilityRatio MetricsCollector::static_moving_ratio(SimTime t) const {
    MobilityRatio r;
    r.t = t;
    // A pause that began at time zero covers everything before it.
    for (const auto& p : pause_) {
        const bool still = p.stationary.value_or(true) && (!p.current_start || *p.current_start <= std::max(t - cfg_.nds_interval, SimTime::zero()));
        if (still) ++r.n_static;
        else ++r.n_moving;
    }
    r.ratio = static_cast<double>(r.n_static) / static_cast<double>(std::max(r.n_moving, 1));
    return r;
}

PauseStats MetricsCollector::pause_time_stats(NodeId node) const {
    PauseStats s;
    const auto& iv = pause_[node].intervals;
    for (const auto& i : iv) s.total_pause_s += (i.end - i.start).seconds();
    s.intervals = iv.size();
    s.mean_pause_s = iv.empty() ? 0.0 : s.total_pause_s / static_cast<double>(iv.size());
    return s;
}

void MetricsCollector::finalize(SimTime t_end) {
    for (auto& p : pause_) {
        if (p.current_start) {
            if (t_end > *p.current_start) p.intervals.push_back({*p.current_start, t_end});
            p.current_start.reset();
        }
    }
}

void write_links_csv(std::ostream& out, const std::vector<LdRecord>& records, SimTime horizon) {
    out << "link,start_ms,end_ms,duration_ms,censored\n";
    for (const auto& r : records) {
        const auto end = r.end ? *r.end : horizon;
        out << fmt::format("{},{},{},{},{}\n", r.link.str(), format_ms(r.start), format_ms(end),
                           format_ms(end - r.start), r.open() ? 1 : 0);
    }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows) {
    out << "time_ms,node_id,nd,nds,alb,paused\n";
    for (const auto& r : rows)
        out << fmt::format("{},{},{},{},{:.6f},{}\n", format_ms(r.t), r.node, r.nd, r.nds, r.alb, r.paused ? 1 : 0);
}

}  // namespace mobisim
