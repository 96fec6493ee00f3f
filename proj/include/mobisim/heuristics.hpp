#pragma once

#include "mobisim/engine.hpp"
#include "mobisim/link_model.hpp"
#include "mobisim/metrics.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string_view>
#include <vector>

namespace mobisim {

enum class HeuristicKind { LD, RLD, SSLD };

std::string_view to_string(HeuristicKind kind);
HeuristicKind parse_heuristic(std::string_view text);

struct HeuristicConfig {
    HeuristicKind kind = HeuristicKind::LD;
    /// RLD tolerance interval: how long a physical loss is held before routing sees it.
    SimTime rld_delta_t = SimTime::from_ms(500);
    /// SSLD: windowed mean |NDS| at or above this is "High".
    double ssld_nds_threshold = 0.5;
    /// SSLD: ALB (breaks/second) at or above this is "High".
    double ssld_alb_threshold = 0.1;
    SimTime ssld_window = SimTime::from_ms(10000);

    void validate() const;
};

/// NDS/ALB quadrants.
enum class StabilityClass { Robust, RuleOut, GroupStable, Volatile };
enum class Level { Low, High };

std::string_view to_string(StabilityClass c);

/// (Low,Low) Robust, (Low,High) RuleOut, (High,Low) GroupStable, (High,High) Volatile.
constexpr StabilityClass stability_class(Level nds, Level alb) {
    if (nds == Level::Low) return alb == Level::Low ? StabilityClass::Robust : StabilityClass::RuleOut;
    return alb == Level::Low ? StabilityClass::GroupStable : StabilityClass::Volatile;
}

/// Threshold classifier on already-windowed inputs.
StabilityClass classify_levels(double mean_abs_nds, double alb, const HeuristicConfig& cfg);

/// Reads the node's windowed |NDS| and ALB from the metrics. Nodes with less
/// than one window of history are Robust.
StabilityClass ssld_classify(const MetricsCollector& metrics, NodeId node, SimTime t, const HeuristicConfig& cfg);

/// Robust and GroupStable nodes may be successors. RuleOut and Volatile nodes
/// are excluded unless no alternative path exists.
constexpr bool successor_eligible(StabilityClass c, bool has_alternative = true) {
    if (c == StabilityClass::Robust || c == StabilityClass::GroupStable) return true;
    return !has_alternative;
}

class VerdictListener {
public:
    virtual ~VerdictListener() = default;
    virtual void on_verdict_down(NodePair link, SimTime t) = 0;
    virtual void on_verdict_up(NodePair link, SimTime t) = 0;
    /// A TentativeDown link came back before its deadline; routing never saw the loss.
    virtual void on_tentative_recovered(NodePair /*link*/, SimTime /*t*/) {}
};

/// A physical loss of a link and how routing got to see it.
struct Episode {
    NodePair link;
    SimTime phys_down;
    std::optional<SimTime> phys_up;
    std::optional<SimTime> verdict_down;

    bool suppressed() const { return phys_up.has_value() && !verdict_down.has_value(); }
};

/// Turns physical link transitions into routing-visible verdicts.
///
/// LD and SSLD report a loss immediately. RLD holds the link as
/// TentativeDown for rld_delta_t and reports nothing if it comes back in
/// time; the deadline timer is scheduled at the moment of loss, so on an
/// exact tie with a recovery the timer fires first.
class LinkVerdicts {
public:
    LinkVerdicts(Engine& engine, LinkTable& links, HeuristicConfig cfg, VerdictListener& listener);

    void on_phys_down(NodePair link, SimTime t);
    void on_phys_up(NodePair link, SimTime t);

    VerdictKind verdict(NodePair link) const { return links_.at(link).verdict; }
    const std::vector<Episode>& episodes() const { return episodes_; }
    const HeuristicConfig& config() const { return cfg_; }
    std::size_t visible_breaks() const { return visible_breaks_; }

private:
    void on_deadline(NodePair link);

    Engine& engine_;
    LinkTable& links_;
    HeuristicConfig cfg_;
    VerdictListener& listener_;
    std::map<NodePair, EventHandle> timers_;
    std::map<NodePair, std::size_t> open_episode_;
    std::vector<Episode> episodes_;
    std::size_t visible_breaks_ = 0;
};

/// Episode CSV: `link,phys_down_ms,phys_up_ms,verdict_down_ms,heuristic`,
/// with `never` and `suppressed` placeholders.
void write_episodes_csv(std::ostream& out, const std::vector<Episode>& episodes, HeuristicKind kind);

}  // namespace mobisim
