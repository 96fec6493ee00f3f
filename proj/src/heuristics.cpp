#include "mobisim/heuristics.hpp"

#include <fmt/format.h>

#include <ostream>
#include <string>

namespace mobisim {

std::string_view to_string(HeuristicKind kind) {
    switch (kind) {
        case HeuristicKind::LD: return "LD";
        case HeuristicKind::RLD: return "RLD";
        case HeuristicKind::SSLD: return "SSLD";
    }
    return "?";
}

HeuristicKind parse_heuristic(std::string_view text) {
    std::string s(text);
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (s == "LD") return HeuristicKind::LD;
    if (s == "RLD") return HeuristicKind::RLD;
    if (s == "SSLD") return HeuristicKind::SSLD;
    throw ConfigError("unknown heuristic '" + std::string(text) + "'");
}

std::string_view to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::Robust: return "Robust";
        case StabilityClass::RuleOut: return "RuleOut";
        case StabilityClass::GroupStable: return "GroupStable";
        case StabilityClass::Volatile: return "Volatile";
    }
    return "?";
}

void HeuristicConfig::validate() const {
    if (kind == HeuristicKind::RLD && rld_delta_t <= SimTime::zero())
        throw ConfigError("heuristic: rld_delta_t must be > 0 for RLD");
    if (kind == HeuristicKind::SSLD) {
        if (!(ssld_nds_threshold > 0.0) || !(ssld_alb_threshold > 0.0))
            throw ConfigError("heuristic: SSLD thresholds must be > 0");
        if (ssld_window <= SimTime::zero()) throw ConfigError("heuristic: ssld_window must be > 0");
    }
}

StabilityClass classify_levels(double mean_abs_nds, double alb, const HeuristicConfig& cfg) {
    const Level nds = mean_abs_nds >= cfg.ssld_nds_threshold ? Level::High : Level::Low;
    const Level breaks = alb >= cfg.ssld_alb_threshold ? Level::High : Level::Low;
    return stability_class(nds, breaks);
}

StabilityClass ssld_classify(const MetricsCollector& metrics, NodeId node, SimTime t, const HeuristicConfig& cfg) {
    if (t < cfg.ssld_window) return StabilityClass::Robust;
    const double nds = metrics.mean_abs_nds(node, t, cfg.ssld_window).value_or(0.0);
    return classify_levels(nds, metrics.alb(node, t, cfg.ssld_window), cfg);
}

LinkVerdicts::LinkVerdicts(Engine& engine, LinkTable& links, HeuristicConfig cfg, VerdictListener& listener)
    : engine_(engine), links_(links), cfg_(cfg), listener_(listener) {
    cfg_.validate();
}

void LinkVerdicts::on_phys_down(NodePair link, SimTime t) {
    auto& st = links_.at(link);
    if (!st.phys_up) throw SimError("verdicts: phys down on a link that is not up: " + link.str());
    st.phys_up = false;
    open_episode_[link] = episodes_.size();
    episodes_.push_back(Episode{link, t, std::nullopt, std::nullopt});

    if (st.verdict != VerdictKind::Up) throw SimError("verdicts: phys down while verdict is not Up: " + link.str());

    if (cfg_.kind == HeuristicKind::RLD) {
        st.verdict = VerdictKind::TentativeDown;
        st.deadline = t + cfg_.rld_delta_t;
        timers_[link] = engine_.schedule(st.deadline, EventKind::TimerExpiry, link.lo,
                                         engine_.tracing() ? "rld-deadline " + link.str() : std::string{},
                                         [this, link] { on_deadline(link); });
        return;
    }
    st.verdict = VerdictKind::Down;
    episodes_.back().verdict_down = t;
    ++visible_breaks_;
    listener_.on_verdict_down(link, t);
}

void LinkVerdicts::on_deadline(NodePair link) {
    timers_.erase(link);
    auto& st = links_.at(link);
    if (st.verdict != VerdictKind::TentativeDown) return;
    st.verdict = VerdictKind::Down;
    const auto t = engine_.now();
    if (auto it = open_episode_.find(link); it != open_episode_.end()) episodes_[it->second].verdict_down = t;
    ++visible_breaks_;
    listener_.on_verdict_down(link, t);
}

void LinkVerdicts::on_phys_up(NodePair link, SimTime t) {
    auto& st = links_.at(link);
    if (st.phys_up) throw SimError("verdicts: phys up on a link that is already up: " + link.str());
    st.phys_up = true;
    st.up_since = t;
    if (auto it = open_episode_.find(link); it != open_episode_.end()) {
        episodes_[it->second].phys_up = t;
        open_episode_.erase(it);
    }

    if (st.verdict == VerdictKind::TentativeDown && t <= st.deadline) {
        if (auto it = timers_.find(link); it != timers_.end()) {
            engine_.cancel(it->second);
            timers_.erase(it);
        }
        st.verdict = VerdictKind::Up;
        listener_.on_tentative_recovered(link, t);
        return;
    }
    st.verdict = VerdictKind::Up;
    listener_.on_verdict_up(link, t);
}

void write_episodes_csv(std::ostream& out, const std::vector<Episode>& episodes, HeuristicKind kind) {
    out << "link,phys_down_ms,phys_up_ms,verdict_down_ms,heuristic\n";
    for (const auto& e : episodes) {
        out << fmt::format("{},{},{},{},{}\n", e.link.str(), format_ms(e.phys_down),
                           e.phys_up ? format_ms(*e.phys_up) : std::string{"never"},
                           e.verdict_down ? format_ms(*e.verdict_down) : std::string{"suppressed"}, to_string(kind));
    }
}

}  // namespace mobisim
