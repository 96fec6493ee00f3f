#pragma once

#include "mobisim/common.hpp"
#include "mobisim/sim_time.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <string_view>

namespace mobisim {

enum class EventKind { MobilityUpdate, MsgDeliver, TimerExpiry, MetricSample, TrafficGen };

std::string_view to_string(EventKind kind);

struct Event {
    SimTime fire_at;
    EventKind kind = EventKind::TimerExpiry;
    NodeId node = kNoNode;
    std::string detail;
    std::function<void()> action;
};

/// Identifies a scheduled event; valid until it fires or is cancelled.
struct EventHandle {
    SimTime fire_at;
    std::uint64_t seq = 0;
    bool valid() const { return seq != 0; }
};

/// Deterministic discrete-event core.
///
/// Events fire in (fire_at, seq) order where seq is the insertion counter, so
/// equal-time events run FIFO. Handlers may schedule further events, including
/// at the current instant. Single-threaded; one Engine per run.
class Engine {
public:
    EventHandle schedule(Event event);
    EventHandle schedule(SimTime at, EventKind kind, NodeId node, std::string detail, std::function<void()> action);

    /// Removes a pending event. False if it already fired or was cancelled.
    bool cancel(EventHandle handle);

    /// Fires every event with fire_at <= t_end, then sets the clock to t_end.
    void run_until(SimTime t_end);

    SimTime now() const { return now_; }
    std::size_t pending() const { return queue_.size(); }
    std::uint64_t fired() const { return fired_; }

    /// Optional trace sink: one tab-separated line per fired event,
    /// `time_ms  seq  kind  node  detail`.
    void set_trace(std::ostream* out) { trace_ = out; }
    bool tracing() const { return trace_ != nullptr; }

private:
    using Key = std::pair<SimTime, std::uint64_t>;

    SimTime now_ = SimTime::zero();
    std::uint64_t next_seq_ = 1;
    std::uint64_t fired_ = 0;
    std::map<Key, Event> queue_;
    std::ostream* trace_ = nullptr;
};

}  // namespace mobisim
