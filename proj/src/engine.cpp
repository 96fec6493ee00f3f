#include "mobisim/engine.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace mobisim {

std::string format_ms(SimTime t) {
    const auto us = t.us();
    const char* sign = us < 0 ? "-" : "";
    const auto a = us < 0 ? -us : us;
    return fmt::format("{}{}.{:03}", sign, a / 1000, a % 1000);
}

SimTime parse_ms(std::string_view text) {
    bool neg = false;
    if (!text.empty() && text.front() == '-') {
        neg = true;
        text.remove_prefix(1);
    }
    SimTime::rep whole = 0;
    SimTime::rep frac = 0;
    int frac_digits = 0;
    bool seen_dot = false;
    bool any = false;
    for (char c : text) {
        if (c == '.' && !seen_dot) {
            seen_dot = true;
        } else if (c >= '0' && c <= '9') {
            any = true;
            if (seen_dot) {
                if (++frac_digits > 3) throw std::invalid_argument("parse_ms: more than 3 decimals");
                frac = frac * 10 + (c - '0');
            } else {
                whole = whole * 10 + (c - '0');
            }
        } else {
            throw std::invalid_argument("parse_ms: bad character in '" + std::string(text) + "'");
        }
    }
    if (!any) throw std::invalid_argument("parse_ms: empty");
    while (frac_digits++ < 3) frac *= 10;
    const auto us = whole * 1000 + frac;
    return SimTime::from_us(neg ? -us : us);
}

std::string_view to_string(EventKind kind) {
    switch (kind) {
        case EventKind::MobilityUpdate: return "MobilityUpdate";
        case EventKind::MsgDeliver: return "MsgDeliver";
        case EventKind::TimerExpiry: return "TimerExpiry";
        case EventKind::MetricSample: return "MetricSample";
        case EventKind::TrafficGen: return "TrafficGen";
    }
    return "?";
}

EventHandle Engine::schedule(Event event) {
    if (event.fire_at < now_) {
        throw SimError(fmt::format("schedule in the past: fire_at={} now={}", format_ms(event.fire_at),
                                   format_ms(now_)));
    }
    const EventHandle handle{event.fire_at, next_seq_++};
    queue_.emplace(Key{handle.fire_at, handle.seq}, std::move(event));
    return handle;
}

EventHandle Engine::schedule(SimTime at, EventKind kind, NodeId node, std::string detail,
                             std::function<void()> action) {
    return schedule(Event{at, kind, node, std::move(detail), std::move(action)});
}

bool Engine::cancel(EventHandle handle) {
    if (!handle.valid()) return false;
    return queue_.erase(Key{handle.fire_at, handle.seq}) > 0;
}

void Engine::run_until(SimTime t_end) {
    if (t_end < now_) throw SimError("run_until: t_end before current clock");
    while (!queue_.empty()) {
        auto it = queue_.begin();
        if (it->first.first > t_end) break;
        const auto seq = it->first.second;
        Event ev = std::move(it->second);
        queue_.erase(it);
        now_ = ev.fire_at;
        ++fired_;
        if (trace_) {
            *trace_ << format_ms(now_) << '\t' << seq << '\t' << to_string(ev.kind) << '\t';
            if (ev.node == kNoNode) *trace_ << '-';
            else *trace_ << ev.node;
            *trace_ << '\t' << ev.detail << '\n';
        }
        if (ev.action) ev.action();
    }
    now_ = t_end;
}

}  // namespace mobisim
