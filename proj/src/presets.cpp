#include "mobisim/presets.hpp"

#include "mobisim/common.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace mobisim {

namespace {

const std::vector<Presets::Entry>& builtin() {
    static const std::vector<Presets::Entry> table = {
        {"radio.range_m", "50", "unit-disk link range R"},
        {"radio.ref_snr_db", "60", "SNR at 1 m"},
        {"radio.pathloss_exp", "3", "log-distance path-loss exponent"},
        {"radio.short_link_fraction", "0.5", "links up to this fraction of R are Short"},

        {"grid.area_m", "300", "side of the square deployment area"},
        {"grid.nodes_low", "10", "node count for Low density"},
        {"grid.nodes_high", "40", "node count for High density"},
        {"grid.spacing_short", "0.3", "grid spacing as a fraction of R, Short links"},
        {"grid.spacing_long", "0.9", "grid spacing as a fraction of R, Long links"},
        {"grid.mobile_fraction", "0.3", "share of nodes carrying the cell's mobility pattern"},

        {"run.duration_s", "120", "simulated seconds per run"},
        {"run.tick_ms", "1", "mobility and link sampling step"},

        {"traffic.flow_start_s", "5", "flows start here"},
        {"traffic.packet_interval_ms", "100", "constant-rate packet spacing"},
        {"traffic.packet_bytes", "512", "data packet size"},

        {"confined.radius_fraction", "0.2", "confinement radius as a fraction of R"},
        {"confined.leg_speed", "5", "m/s inside the confinement disc"},
        {"confined.period_low_s", "60", "move period, Low frequency"},
        {"confined.period_high_s", "2", "move period, High frequency"},

        {"pingpong.offset_fraction", "0.5", "|AB| as a fraction of R"},
        {"pingpong.period_low_s", "60", "full cycle, Low frequency"},
        {"pingpong.period_high_s", "2", "full cycle, High frequency"},
        {"pingpong.dwell_b_share", "0.1", "share of the cycle spent at B"},
        {"pingpong.transit_share", "0.05", "share of the cycle per transit leg"},

        {"free.speed_min", "1", "m/s"},
        {"free.speed_max", "5", "m/s"},
        {"free.pause_low_min_s", "30", "pause range, Low frequency"},
        {"free.pause_low_max_s", "60", ""},
        {"free.pause_high_min_s", "0", "pause range, High frequency"},
        {"free.pause_high_max_s", "2", ""},

        {"heuristic.rld_delta_t_s", "0.5", "RLD tolerance interval in the table2 preset"},
        {"heuristic.rld_sweep_s", "0.1 0.5 2.0", "tolerance intervals of the rld_sweep preset"},
        {"heuristic.ssld_nds_threshold", "0.5", "windowed mean |NDS| at or above this is High"},
        {"heuristic.ssld_alb_threshold", "0.1", "breaks per second at or above this is High"},
        {"heuristic.ssld_window_s", "10", "SSLD observation window"},

        {"metrics.nds_interval_s", "1", "degree sampling interval"},
        {"metrics.alb_window_s", "10", "break-rate window"},

        {"dv.rreq_timeout_ms", "200", "wait for a reply before retrying"},
        {"dv.rreq_retries", "2", "retries before a discovery fails"},
        {"dv.buffer_limit", "64", "packets held per destination during discovery"},

        {"ls.hello_interval_s", "1", ""},
        {"ls.tc_interval_s", "2", ""},
        {"ls.tc_start_s", "3", "first TC no earlier than this (plus a random phase)"},

        {"tx.base_tx_delay_ms", "2", "per-hop latency without contention"},
        {"tx.contention", "0.1", "latency growth per busy transmitter in range"},
        {"tx.jitter_ms", "0.5", "broadcast delivery jitter magnitude"},
        {"tx.data_ttl", "32", "hop limit for data packets"},
    };
    return table;
}

double parse_number(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || value.find_first_not_of(" \t", used) != std::string::npos || !std::isfinite(v))
        throw ConfigError("preset " + key + ": not a number: '" + value + "'");
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Presets::Presets() : entries_(builtin()) {
    for (std::size_t i = 0; i < entries_.size(); ++i) index_[entries_[i].key] = i;
}

Presets::Entry& Presets::find(const std::string& key) {
    auto it = index_.find(key);
    if (it == index_.end()) throw ConfigError("unknown preset key '" + key + "'");
    return entries_[it->second];
}

const Presets::Entry& Presets::find(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw ConfigError("unknown preset key '" + key + "'");
    return entries_[it->second];
}

void Presets::set(const std::string& key, const std::string& value) { find(trim(key)).value = trim(value); }

void Presets::set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + assignment + "'");
    set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

void Presets::load_ini(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("defaults file: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("defaults file: key outside a section: " + section);
        for (const auto& [name, value] : body) set(section + "." + name, value.data());
    }
}

void Presets::write_ini(std::ostream& out) const {
    std::string section;
    for (const auto& e : entries_) {
        const auto dot = e.key.find('.');
        const std::string s = e.key.substr(0, dot);
        if (s != section) {
            if (!section.empty()) out << '\n';
            out << '[' << s << "]\n";
            section = s;
        }
        if (!e.doc.empty()) out << "; " << e.doc << '\n';
        out << e.key.substr(dot + 1) << " = " << e.value << '\n';
    }
}

const std::string& Presets::raw(const std::string& key) const { return find(key).value; }

double Presets::number(const std::string& key) const { return parse_number(key, raw(key)); }

long Presets::integer(const std::string& key) const {
    const double v = number(key);
    if (v != std::floor(v)) throw ConfigError("preset " + key + " must be an integer");
    return static_cast<long>(v);
}

SimTime Presets::seconds(const std::string& key) const { return SimTime::from_seconds(number(key)); }

SimTime Presets::millis(const std::string& key) const { return SimTime::from_seconds(number(key) / 1000.0); }

std::vector<double> Presets::numbers(const std::string& key) const {
    std::istringstream in(raw(key));
    std::vector<double> out;
    std::string tok;
    while (in >> tok) out.push_back(parse_number(key, tok));
    if (out.empty()) throw ConfigError("preset " + key + " is empty");
    return out;
}

}  // namespace mobisim
