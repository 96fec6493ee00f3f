#pragma once

#include "mobisim/common.hpp"
#include "mobisim/geometry.hpp"
#include "mobisim/rng.hpp"
#include "mobisim/sim_time.hpp"

#include <iosfwd>
#include <string_view>
#include <variant>
#include <vector>

namespace mobisim {

struct StaticSpec {
    Vec2 home;
};

/// Moves inside a disc around `home`: a uniform-random target in the disc is
/// picked every `move_period` (first pick at a seeded phase) and reached at
/// `leg_speed`. A leg longer than the period delays the next pick to the
/// following period boundary.
struct ConfinedSpec {
    Vec2 home;
    double radius = 0.0;
    SimTime move_period;
    double leg_speed = 0.0;
};

/// Dwell at A, transit to B, dwell at B, transit back; repeats forever.
struct PingPongSpec {
    Vec2 pos_a;
    Vec2 pos_b;
    SimTime dwell_a;
    SimTime dwell_b;
    double transit_speed = 0.0;
};

/// Random waypoint inside `area`, starting with a pause at `start`.
struct FreeWaypointSpec {
    Vec2 start;
    Rect area;
    double speed_min = 0.0;
    double speed_max = 0.0;
    SimTime pause_min;
    SimTime pause_max;
};

using MobilitySpec = std::variant<StaticSpec, ConfinedSpec, PingPongSpec, FreeWaypointSpec>;

/// Throws ConfigError when a spec violates its invariants.
void validate(const MobilitySpec& spec);
std::string_view pattern_name(const MobilitySpec& spec);
Vec2 initial_position(const MobilitySpec& spec);
double max_speed(const MobilitySpec& spec);
bool is_static(const MobilitySpec& spec);

struct NodePose {
    Vec2 position;
    Vec2 velocity;
    bool is_paused = true;
};

inline bool is_stationary(const NodePose& pose) { return pose.velocity.x == 0.0 && pose.velocity.y == 0.0; }

/// Piecewise-linear trajectory generated lazily from a spec and its stream.
///
/// Queries are cheapest when made in nondecreasing time order (the engine's
/// pattern) but any order is answered identically.
class Trajectory {
public:
    Trajectory(MobilitySpec spec, RngStream rng);

    NodePose pose_at(SimTime t);

    const MobilitySpec& spec() const { return spec_; }

    /// PingPong period; zero for other patterns.
    SimTime period() const;

private:
    struct Leg {
        SimTime start;
        SimTime end;
        Vec2 from;
        Vec2 to;
    };

    void extend_to(SimTime t);
    void push_pause(SimTime until);
    void push_move(Vec2 target, double speed, SimTime not_before);
    NodePose pingpong_pose(SimTime t) const;
    static NodePose eval(const Leg& leg, SimTime t);

    MobilitySpec spec_;
    RngStream rng_;
    std::vector<Leg> legs_;
    std::size_t cursor_ = 0;
    SimTime confined_next_slot_;
    SimTime pingpong_transit_;
};

/// Stateless form: a deterministic function of (spec, stream seed, t).
NodePose pose_at(const MobilitySpec& spec, const RngStream& rng, SimTime t);

struct MobilitySample {
    SimTime t;
    NodeId node = 0;
    NodePose pose;
};

/// CSV `time_ms,node_id,x_m,y_m,vx,vy`; coordinates printed round-trip exact.
void write_mobility_csv(std::ostream& out, const std::vector<MobilitySample>& samples);
std::vector<MobilitySample> read_mobility_csv(std::istream& in);

}  // namespace mobisim
