#include "mobisim/link_model.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mobisim {

void RadioConfig::validate() const {
    if (!(range_m >= 1.0)) throw ConfigError("radio: range_m must be >= 1 m");
    if (!(pathloss_exp >= 2.0)) throw ConfigError("radio: pathloss_exp must be >= 2");
    if (!(short_link_fraction > 0.0 && short_link_fraction < 1.0))
        throw ConfigError("radio: short_link_fraction must be in (0,1)");
}

double snr_db(double distance_m, const RadioConfig& cfg) {
    if (distance_m < 0.0) throw std::invalid_argument("snr_db: negative distance");
    return cfg.ref_snr_db - 10.0 * cfg.pathloss_exp * std::log10(std::max(distance_m, 1.0));
}

double RadioConfig::threshold_db() const { return snr_threshold_db ? *snr_threshold_db : snr_db(range_m, *this); }

double link_range(const RadioConfig& cfg) {
    if (!cfg.snr_threshold_db) return cfg.range_m;
    const double margin = cfg.ref_snr_db - *cfg.snr_threshold_db;
    if (margin < 0.0) return -1.0;  // threshold above the 1 m reference: never up
    return std::pow(10.0, margin / (10.0 * cfg.pathloss_exp));
}

bool phys_link_up(Vec2 a, Vec2 b, const RadioConfig& cfg) {
    const double r = link_range(cfg);
    if (r < 0.0) return false;
    // r >= 1 whenever reachable, so max(d, 1) <= r reduces to d <= r.
    return distance(a, b) <= r;
}

LinkLength classify_length(double distance_m, const RadioConfig& cfg) {
    if (distance_m > link_range(cfg)) throw std::domain_error("classify_length: distance beyond range");
    return distance_m <= cfg.short_link_fraction * link_range(cfg) ? LinkLength::Short : LinkLength::Long;
}

std::string NodePair::str() const { return fmt::format("{}-{}", lo, hi); }

LinkTable::LinkTable(std::size_t node_count) : n_(node_count) {
    links_.reserve(n_ * (n_ - (n_ > 0 ? 1 : 0)) / 2);
    for (NodeId i = 0; i < n_; ++i)
        for (NodeId j = i + 1; j < n_; ++j) {
            LinkState s;
            s.endpoints = NodePair{i, j};
            links_.push_back(s);
        }
}

std::size_t LinkTable::index(NodePair p) const {
    if (p.lo == p.hi || p.hi >= n_) throw SimError("LinkTable: bad pair " + p.str());
    // Row-major upper triangle without the diagonal.
    const std::size_t i = p.lo;
    const std::size_t j = p.hi;
    return i * (2 * n_ - i - 1) / 2 + (j - i - 1);
}

bool LinkTable::visible(NodeId a, NodeId b) const {
    if (a == b) return false;
    return at(NodePair{a, b}).verdict != VerdictKind::Down;
}

std::vector<NodeId> LinkTable::visible_neighbors(NodeId n) const {
    std::vector<NodeId> out;
    for (NodeId m = 0; m < n_; ++m)
        if (m != n && visible(n, m)) out.push_back(m);
    return out;
}

std::vector<NodeId> LinkTable::phys_neighbors(NodeId n) const {
    std::vector<NodeId> out;
    for (NodeId m = 0; m < n_; ++m)
        if (m != n && at(NodePair{n, m}).phys_up) out.push_back(m);
    return out;
}

}  // namespace mobisim
