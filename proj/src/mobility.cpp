#include "mobisim/mobility.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

namespace mobisim {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Rounded up so the realised speed never exceeds the nominal one.
SimTime travel_time(double dist, double speed) {
    return SimTime::from_us(static_cast<SimTime::rep>(std::ceil(dist / speed * 1e6 - 1e-6)));
}

}  // namespace

void validate(const MobilitySpec& spec) {
    std::visit(overloaded{
                   [](const StaticSpec&) {},
                   [](const ConfinedSpec& s) {
                       if (!(s.radius > 0.0)) throw ConfigError("confined: radius must be > 0");
                       if (!(s.leg_speed > 0.0)) throw ConfigError("confined: leg_speed must be > 0");
                       if (s.move_period <= SimTime::zero()) throw ConfigError("confined: move_period must be > 0");
                   },
                   [](const PingPongSpec& s) {
                       if (s.pos_a == s.pos_b) throw ConfigError("pingpong: pos_a and pos_b must differ");
                       if (!(s.transit_speed > 0.0)) throw ConfigError("pingpong: transit_speed must be > 0");
                       if (s.dwell_a < SimTime::zero() || s.dwell_b < SimTime::zero())
                           throw ConfigError("pingpong: dwell must be >= 0");
                       if (travel_time(distance(s.pos_a, s.pos_b), s.transit_speed) <= SimTime::zero())
                           throw ConfigError("pingpong: transit shorter than 1 us");
                   },
                   [](const FreeWaypointSpec& s) {
                       if (!(s.speed_min > 0.0)) throw ConfigError("free: speed_min must be > 0");
                       if (s.speed_min > s.speed_max) throw ConfigError("free: speed_min > speed_max");
                       if (s.pause_min < SimTime::zero() || s.pause_min > s.pause_max)
                           throw ConfigError("free: need 0 <= pause_min <= pause_max");
                       if (!(s.area.x_max > s.area.x_min && s.area.y_max > s.area.y_min))
                           throw ConfigError("free: empty area");
                       if (!s.area.contains(s.start)) throw ConfigError("free: start outside area");
                   },
               },
               spec);
}

std::string_view pattern_name(const MobilitySpec& spec) {
    return std::visit(overloaded{
                          [](const StaticSpec&) { return std::string_view{"static"}; },
                          [](const ConfinedSpec&) { return std::string_view{"confined"}; },
                          [](const PingPongSpec&) { return std::string_view{"pingpong"}; },
                          [](const FreeWaypointSpec&) { return std::string_view{"free"}; },
                      },
                      spec);
}

Vec2 initial_position(const MobilitySpec& spec) {
    return std::visit(overloaded{
                          [](const StaticSpec& s) { return s.home; },
                          [](const ConfinedSpec& s) { return s.home; },
                          [](const PingPongSpec& s) { return s.pos_a; },
                          [](const FreeWaypointSpec& s) { return s.start; },
                      },
                      spec);
}

double max_speed(const MobilitySpec& spec) {
    return std::visit(overloaded{
                          [](const StaticSpec&) { return 0.0; },
                          [](const ConfinedSpec& s) { return s.leg_speed; },
                          [](const PingPongSpec& s) { return s.transit_speed; },
                          [](const FreeWaypointSpec& s) { return s.speed_max; },
                      },
                      spec);
}

bool is_static(const MobilitySpec& spec) { return std::holds_alternative<StaticSpec>(spec); }

Trajectory::Trajectory(MobilitySpec spec, RngStream rng) : spec_(std::move(spec)), rng_(std::move(rng)) {
    validate(spec_);
    const Vec2 p0 = initial_position(spec_);
    if (auto* c = std::get_if<ConfinedSpec>(&spec_)) {
        const auto phase = SimTime::from_us(rng_.uniform_int(0, c->move_period.us() - 1));
        legs_.push_back({SimTime::zero(), phase, p0, p0});
        confined_next_slot_ = phase;
    } else if (auto* f = std::get_if<FreeWaypointSpec>(&spec_)) {
        const auto pause = SimTime::from_us(rng_.uniform_int(f->pause_min.us(), f->pause_max.us()));
        legs_.push_back({SimTime::zero(), pause, p0, p0});
    } else if (auto* pp = std::get_if<PingPongSpec>(&spec_)) {
        pingpong_transit_ = travel_time(distance(pp->pos_a, pp->pos_b), pp->transit_speed);
    }
}

SimTime Trajectory::period() const {
    if (auto* pp = std::get_if<PingPongSpec>(&spec_)) return pp->dwell_a + pp->dwell_b + 2 * pingpong_transit_;
    return SimTime::zero();
}

NodePose Trajectory::eval(const Leg& leg, SimTime t) {
    if (leg.from == leg.to) return NodePose{leg.from, {}, true};
    const double dur = (leg.end - leg.start).seconds();
    const double frac = static_cast<double>((t - leg.start).us()) / static_cast<double>((leg.end - leg.start).us());
    const Vec2 delta = leg.to - leg.from;
    return NodePose{leg.from + delta * frac, delta * (1.0 / dur), false};
}

NodePose Trajectory::pingpong_pose(SimTime t) const {
    const auto& s = std::get<PingPongSpec>(spec_);
    const auto p = period().us();
    auto phase = SimTime::from_us(t.us() % p);
    if (phase < s.dwell_a) return NodePose{s.pos_a, {}, true};
    phase -= s.dwell_a;
    if (phase < pingpong_transit_) return eval(Leg{SimTime::zero(), pingpong_transit_, s.pos_a, s.pos_b}, phase);
    phase -= pingpong_transit_;
    if (phase < s.dwell_b) return NodePose{s.pos_b, {}, true};
    phase -= s.dwell_b;
    return eval(Leg{SimTime::zero(), pingpong_transit_, s.pos_b, s.pos_a}, phase);
}

void Trajectory::push_pause(SimTime until) {
    const auto& last = legs_.back();
    if (until > last.end) legs_.push_back({last.end, until, last.to, last.to});
}

void Trajectory::push_move(Vec2 target, double speed, SimTime not_before) {
    push_pause(not_before);
    const auto& last = legs_.back();
    const auto dur = travel_time(distance(last.to, target), speed);
    if (dur <= SimTime::zero()) return;
    legs_.push_back({last.end, last.end + dur, last.to, target});
}

void Trajectory::extend_to(SimTime t) {
    while (legs_.back().end <= t) {
        const std::size_t before = legs_.size();
        if (auto* c = std::get_if<ConfinedSpec>(&spec_)) {
            const double r = c->radius * std::sqrt(rng_.uniform01());
            const double theta = 2.0 * std::numbers::pi * rng_.uniform01();
            const Vec2 target = c->home + Vec2{r * std::cos(theta), r * std::sin(theta)};
            push_move(target, c->leg_speed, confined_next_slot_);
            const auto arrival = legs_.back().end;
            const auto period = c->move_period.us();
            const auto elapsed = (arrival - confined_next_slot_).us();
            const auto slots = std::max<SimTime::rep>(1, (elapsed + period - 1) / period);
            confined_next_slot_ = confined_next_slot_ + c->move_period * slots;
            push_pause(confined_next_slot_);
        } else if (auto* f = std::get_if<FreeWaypointSpec>(&spec_)) {
            const Vec2 target{rng_.uniform(f->area.x_min, f->area.x_max), rng_.uniform(f->area.y_min, f->area.y_max)};
            const double speed = rng_.uniform(f->speed_min, f->speed_max);
            push_move(target, speed, legs_.back().end);
            const auto pause = SimTime::from_us(rng_.uniform_int(f->pause_min.us(), f->pause_max.us()));
            push_pause(legs_.back().end + pause);
        }
        if (legs_.size() == before) {
            // Zero-length move and zero pause: advance by one microsecond of rest.
            push_pause(legs_.back().end + SimTime::from_us(1));
        }
    }
}

NodePose Trajectory::pose_at(SimTime t) {
    if (t < SimTime::zero()) throw std::invalid_argument("pose_at: negative time");
    if (auto* s = std::get_if<StaticSpec>(&spec_)) return NodePose{s->home, {}, true};
    if (std::holds_alternative<PingPongSpec>(spec_)) return pingpong_pose(t);

    extend_to(t);
    if (cursor_ >= legs_.size() || legs_[cursor_].start > t) {
        auto it = std::upper_bound(legs_.begin(), legs_.end(), t,
                                   [](SimTime v, const Leg& leg) { return v < leg.start; });
        cursor_ = static_cast<std::size_t>(std::distance(legs_.begin(), it)) - 1;
    }
    while (legs_[cursor_].end <= t) ++cursor_;
    return eval(legs_[cursor_], t);
}

NodePose pose_at(const MobilitySpec& spec, const RngStream& rng, SimTime t) {
    Trajectory traj(spec, rng);
    return traj.pose_at(t);
}

void write_mobility_csv(std::ostream& out, const std::vector<MobilitySample>& samples) {
    out << "time_ms,node_id,x_m,y_m,vx,vy\n";
    for (const auto& s : samples) {
        out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n", format_ms(s.t), s.node, s.pose.position.x,
                           s.pose.position.y, s.pose.velocity.x, s.pose.velocity.y);
    }
}

std::vector<MobilitySample> read_mobility_csv(std::istream& in) {
    std::vector<MobilitySample> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell[6];
        for (auto& c : cell) std::getline(row, c, ',');
        MobilitySample s;
        s.t = parse_ms(cell[0]);
        s.node = static_cast<NodeId>(std::stoul(cell[1]));
        s.pose.position = {std::stod(cell[2]), std::stod(cell[3])};
        s.pose.velocity = {std::stod(cell[4]), std::stod(cell[5])};
        s.pose.is_paused = is_stationary(s.pose);
        out.push_back(s);
    }
    return out;
}

}  // namespace mobisim
