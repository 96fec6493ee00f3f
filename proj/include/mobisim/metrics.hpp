#pragma once

#include "mobisim/common.hpp"
#include "mobisim/link_model.hpp"
#include "mobisim/sim_time.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

namespace mobisim {

enum class LinkEventKind { Up, Down };

struct LdRecord {
    NodePair link;
    SimTime start;
    std::optional<SimTime> end;

    bool open() const { return !end.has_value(); }
    /// Closed: end - start. Open: censored at `horizon`.
    SimTime duration(SimTime horizon) const { return (end ? *end : horizon) - start; }
};

struct NdsSample {
    NodeId node = 0;
    SimTime t;
    int nd_prev = 0;
    int nd_now = 0;
    int nds = 0;  // nd_prev - nd_now
};

struct PauseInterval {
    SimTime start;
    SimTime end;
};

struct PauseStats {
    double mean_pause_s = 0.0;
    double total_pause_s = 0.0;
    std::size_t intervals = 0;
};

struct MobilityRatio {
    SimTime t;
    int n_static = 0;
    int n_moving = 0;
    double ratio = 0.0;  // n_static / max(n_moving, 1)
};

/// One row of the per-sample metrics export.
struct MetricRow {
    SimTime t;
    NodeId node = 0;
    int nd = 0;
    int nds = 0;
    double alb = 0.0;
    bool paused = false;
};

struct MetricsConfig {
    SimTime nds_interval = SimTime::from_ms(1000);
    SimTime alb_window = SimTime::from_ms(10000);
};

/// Online mobility-tracking parameters fed by physical link events and node
/// motion observations: link duration, node degree stability, link-break
/// rate, pause time and the static/moving ratio.
class MetricsCollector {
public:
    MetricsCollector(std::size_t node_count, MetricsConfig cfg = {});

    /// Opens (Up) or closes (Down) the link's duration record. A repeated
    /// Up or Down for the same link is an engine bug and throws SimError.
    void on_link_event(NodePair link, LinkEventKind kind, SimTime t);

    /// Records a motion observation; only changes of state matter, so static
    /// nodes need a single call.
    void observe_motion(NodeId node, SimTime t, bool stationary);

    NdsSample sample_nds(NodeId node, SimTime t);
    /// Samples every node, appending to rows(). Called once per interval.
    void sample_all(SimTime t);

    /// Incident-link breaks in (t - window, t], divided by the window length.
    double alb(NodeId node, SimTime t, SimTime window) const;
    std::size_t breaks_in(NodeId node, SimTime from_exclusive, SimTime to_inclusive) const;
    /// Mean |nds| over samples taken in (t - window, t]; nullopt when none.
    std::optional<double> mean_abs_nds(NodeId node, SimTime t, SimTime window) const;

    MobilityRatio static_moving_ratio(SimTime t) const;
    PauseStats pause_time_stats(NodeId node) const;
    const std::vector<PauseInterval>& pause_intervals(NodeId node) const { return pause_[node].intervals; }

    /// Closes open pause intervals at t_end. LD records stay open (censored).
    void finalize(SimTime t_end);

    int degree(NodeId node) const { return degree_[node]; }
    std::size_t node_count() const { return degree_.size(); }
    const MetricsConfig& config() const { return cfg_; }
    const std::vector<LdRecord>& ld_records() const { return records_; }
    const std::vector<NdsSample>& nds_samples(NodeId node) const { return nds_[node]; }
    const std::vector<MetricRow>& rows() const { return rows_; }
    const std::vector<SimTime>& break_times(NodeId node) const { return breaks_[node]; }

private:
    struct PauseTracker {
        std::optional<SimTime> current_start;
        std::optional<bool> stationary;
        std::vector<PauseInterval> intervals;
    };

    MetricsConfig cfg_;
    std::vector<int> degree_;
    std::vector<std::vector<SimTime>> breaks_;
    std::vector<std::vector<NdsSample>> nds_;
    std::vector<PauseTracker> pause_;
    std::map<NodePair, std::size_t> open_;
    std::vector<LdRecord> records_;
    std::vector<MetricRow> rows_;
};

/// Link CSV: `link,start_ms,end_ms,duration_ms,censored`.
void write_links_csv(std::ostream& out, const std::vector<LdRecord>& records, SimTime horizon);
/// Metrics CSV: `time_ms,node_id,nd,nds,alb,paused`.
void write_metrics_csv(std::ostream& out, const std::vector<MetricRow>& rows);

}  // namespace mobisim
