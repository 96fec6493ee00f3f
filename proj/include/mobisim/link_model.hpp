#pragma once

#include "mobisim/common.hpp"
#include "mobisim/geometry.hpp"
#include "mobisim/mobility.hpp"
#include "mobisim/sim_time.hpp"

#include <compare>
#include <optional>
#include <string>
#include <vector>

namespace mobisim {

/// Radio parameters. Log-distance path loss without fading.
///
/// When `snr_threshold_db` is unset the threshold is calibrated to
/// snr_db(range_m), and the SNR predicate is then the unit-disk predicate
/// distance <= range_m exactly (closed boundary).
struct RadioConfig {
    double range_m = 50.0;
    double ref_snr_db = 60.0;
    double pathloss_exp = 3.0;
    std::optional<double> snr_threshold_db;
    double short_link_fraction = 0.5;

    void validate() const;
    double threshold_db() const;
};

double snr_db(double distance_m, const RadioConfig& cfg);

/// Distance below (or at) which the SNR stays at or above the threshold.
double link_range(const RadioConfig& cfg);

bool phys_link_up(Vec2 a, Vec2 b, const RadioConfig& cfg);
inline bool phys_link_up(const NodePose& a, const NodePose& b, const RadioConfig& cfg) {
    return phys_link_up(a.position, b.position, cfg);
}

enum class LinkLength { Short, Long };

/// Short iff distance <= short_link_fraction * range. Throws std::domain_error
/// when the distance is beyond range (no link to classify).
LinkLength classify_length(double distance_m, const RadioConfig& cfg);

/// Unordered node pair, stored with lo < hi.
struct NodePair {
    NodeId lo = 0;
    NodeId hi = 0;

    NodePair() = default;
    NodePair(NodeId a, NodeId b) : lo(a < b ? a : b), hi(a < b ? b : a) {}

    NodeId other(NodeId n) const { return n == lo ? hi : lo; }
    bool contains(NodeId n) const { return n == lo || n == hi; }
    auto operator<=>(const NodePair&) const = default;
    std::string str() const;
};

enum class VerdictKind { Up, TentativeDown, Down };

struct LinkState {
    NodePair endpoints;
    bool phys_up = false;
    std::optional<SimTime> up_since;
    VerdictKind verdict = VerdictKind::Down;
    SimTime deadline;  // meaningful only for TentativeDown
};

/// Dense table of all node pairs.
class LinkTable {
public:
    explicit LinkTable(std::size_t node_count);

    std::size_t node_count() const { return n_; }
    LinkState& at(NodePair p) { return links_[index(p)]; }
    const LinkState& at(NodePair p) const { return links_[index(p)]; }
    std::vector<LinkState>& all() { return links_; }
    const std::vector<LinkState>& all() const { return links_; }

    /// Routing-visible neighbours: verdict Up or TentativeDown.
    std::vector<NodeId> visible_neighbors(NodeId n) const;
    std::vector<NodeId> phys_neighbors(NodeId n) const;
    bool visible(NodeId a, NodeId b) const;

private:
    std::size_t index(NodePair p) const;
    std::size_t n_;
    std::vector<LinkState> links_;
};

}  // namespace mobisim
