#include "mobisim/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mobisim {

namespace pt = boost::property_tree;

std::string_view to_string(Pattern p) {
    switch (p) {
        case Pattern::Confined: return "confined";
        case Pattern::PingPong: return "pingpong";
        case Pattern::Free: return "free";
    }
    return "?";
}
std::string_view to_string(Density d) { return d == Density::Low ? "low" : "high"; }
std::string_view to_string(Frequency f) { return f == Frequency::Low ? "low" : "high"; }
std::string_view to_string(LinkLength l) { return l == LinkLength::Short ? "short" : "long"; }

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

template <class E>
E parse_enum(std::string_view text, std::initializer_list<E> values, const char* what) {
    const std::string t = lower(text);
    for (E v : values)
        if (lower(to_string(v)) == t) return v;
    throw ConfigError(fmt::format("unknown {} '{}'", what, text));
}

std::string seconds_str(SimTime t) { return fmt::format("{}", static_cast<double>(t.us()) / 1e6); }
std::string millis_str(SimTime t) { return fmt::format("{}", static_cast<double>(t.us()) / 1e3); }

}  // namespace

std::string MatrixCell::key() const {
    std::string k = fmt::format("{}-{}-{}-{}-{}-{}", to_string(pattern), to_string(density), to_string(frequency),
                                to_string(link_length), lower(to_string(heuristic)), lower(to_string(family)));
    if (rld_delta_t) k += "-dt" + seconds_str(*rld_delta_t);
    return k;
}

MatrixCell parse_cell_key(std::string_view key) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : key) {
        if (c == '-') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 6 && parts.size() != 7) throw ConfigError(fmt::format("bad cell key '{}'", key));
    MatrixCell c;
    c.pattern = parse_enum(parts[0], {Pattern::Confined, Pattern::PingPong, Pattern::Free}, "pattern");
    c.density = parse_enum(parts[1], {Density::Low, Density::High}, "density");
    c.frequency = parse_enum(parts[2], {Frequency::Low, Frequency::High}, "frequency");
    c.link_length = parse_enum(parts[3], {LinkLength::Short, LinkLength::Long}, "link length");
    c.heuristic = parse_heuristic(parts[4]);
    c.family = parse_family(parts[5]);
    if (parts.size() == 7) {
        if (parts[6].rfind("dt", 0) != 0) throw ConfigError(fmt::format("bad cell key '{}'", key));
        c.rld_delta_t = SimTime::from_seconds(std::stod(parts[6].substr(2)));
    }
    return c;
}

std::vector<MatrixCell> table2_cells() {
    std::vector<MatrixCell> cells;
    for (Pattern p : {Pattern::Confined, Pattern::PingPong, Pattern::Free})
        for (Density d : {Density::Low, Density::High})
            for (Frequency f : {Frequency::Low, Frequency::High})
                for (LinkLength l : {LinkLength::Short, LinkLength::Long})
                    for (HeuristicKind h : {HeuristicKind::LD, HeuristicKind::RLD, HeuristicKind::SSLD})
                        for (Family fam : {Family::ReactiveDV, Family::ProactiveLS})
                            cells.push_back(MatrixCell{p, d, f, l, h, fam, std::nullopt});
    return cells;
}

std::vector<MatrixCell> rld_sweep_cells(const Presets& presets) {
    std::vector<MatrixCell> cells;
    const auto sweep = presets.numbers("heuristic.rld_sweep_s");
    for (Density d : {Density::Low, Density::High})
        for (Frequency f : {Frequency::Low, Frequency::High})
            for (LinkLength l : {LinkLength::Short, LinkLength::Long})
                for (Family fam : {Family::ReactiveDV, Family::ProactiveLS}) {
                    cells.push_back(MatrixCell{Pattern::PingPong, d, f, l, HeuristicKind::LD, fam, std::nullopt});
                    for (double dt : sweep)
                        cells.push_back(MatrixCell{Pattern::PingPong, d, f, l, HeuristicKind::RLD, fam,
                                                   SimTime::from_seconds(dt)});
                }
    return cells;
}

GridLayout grid_layout(std::size_t n, double spacing, double area_side) {
    GridLayout g;
    g.cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
    g.rows = (n + g.cols - 1) / g.cols;
    g.spacing = spacing;
    const double w = static_cast<double>(g.cols - 1) * spacing;
    const double h = static_cast<double>(g.rows - 1) * spacing;
    if (w > area_side || h > area_side)
        throw ConfigError(fmt::format("grid of {} nodes at {} m spacing does not fit a {} m area", n, spacing, area_side));
    g.origin = {(area_side - w) / 2.0, (area_side - h) / 2.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double c = static_cast<double>(i % g.cols);
        const double r = static_cast<double>(i / g.cols);
        g.positions.push_back({g.origin.x + c * spacing, g.origin.y + r * spacing});
    }
    return g;
}

std::vector<std::pair<NodeId, NodeId>> grid_flow_pairs(const GridLayout& grid, std::size_t n) {
    std::vector<std::pair<NodeId, NodeId>> flows{{0, static_cast<NodeId>(n - 1)}};
    const auto a = static_cast<NodeId>(grid.cols - 1);
    const auto b = static_cast<NodeId>(n - grid.cols);
    if (n >= 4 && a != b && a != 0 && b != n - 1 && a != n - 1 && b != 0) flows.emplace_back(a, b);
    return flows;
}

Scenario build_scenario(const MatrixCell& cell, const Presets& P, std::uint64_t seed) {
    Scenario s;
    s.name = cell.key();
    s.duration = P.seconds("run.duration_s");
    s.tick = P.millis("run.tick_ms");
    s.family = cell.family;

    s.radio.range_m = P.number("radio.range_m");
    s.radio.ref_snr_db = P.number("radio.ref_snr_db");
    s.radio.pathloss_exp = P.number("radio.pathloss_exp");
    s.radio.short_link_fraction = P.number("radio.short_link_fraction");
    const double R = s.radio.range_m;

    s.heuristic.kind = cell.heuristic;
    s.heuristic.rld_delta_t = cell.rld_delta_t.value_or(P.seconds("heuristic.rld_delta_t_s"));
    s.heuristic.ssld_nds_threshold = P.number("heuristic.ssld_nds_threshold");
    s.heuristic.ssld_alb_threshold = P.number("heuristic.ssld_alb_threshold");
    s.heuristic.ssld_window = P.seconds("heuristic.ssld_window_s");
    s.metrics.nds_interval = P.seconds("metrics.nds_interval_s");
    s.metrics.alb_window = P.seconds("metrics.alb_window_s");

    s.dv.rreq_timeout = P.millis("dv.rreq_timeout_ms");
    s.dv.rreq_retries = static_cast<int>(P.integer("dv.rreq_retries"));
    s.dv.buffer_limit = static_cast<std::size_t>(P.integer("dv.buffer_limit"));
    s.ls.hello_interval = P.seconds("ls.hello_interval_s");
    s.ls.tc_interval = P.seconds("ls.tc_interval_s");
    s.ls.tc_start = P.seconds("ls.tc_start_s");
    s.tx.base_tx_delay = P.millis("tx.base_tx_delay_ms");
    s.tx.contention = P.number("tx.contention");
    s.tx.jitter = P.millis("tx.jitter_ms");
    s.tx.data_ttl = static_cast<int>(P.integer("tx.data_ttl"));
    s.dv.max_hops = s.tx.data_ttl;

    const auto n = static_cast<std::size_t>(P.integer(cell.density == Density::Low ? "grid.nodes_low" : "grid.nodes_high"));
    const double spacing = R * P.number(cell.link_length == LinkLength::Short ? "grid.spacing_short" : "grid.spacing_long");
    const double area = P.number("grid.area_m");
    const GridLayout grid = grid_layout(n, spacing, area);

    std::set<NodeId> endpoints;
    for (auto [a, b] : grid_flow_pairs(grid, n)) {
        FlowSpec f;
        f.src = a;
        f.dst = b;
        f.start = P.seconds("traffic.flow_start_s");
        f.interval = P.millis("traffic.packet_interval_ms");
        f.size_bytes = static_cast<std::uint32_t>(P.integer("traffic.packet_bytes"));
        s.flows.push_back(f);
        endpoints.insert(a);
        endpoints.insert(b);
    }

    // Flow endpoints stay put; the mobile subset is a seeded draw from the rest.
    RngStream placement(seed, streams::placement);
    std::vector<NodeId> candidates;
    for (NodeId i = 0; i < n; ++i)
        if (!endpoints.count(i)) candidates.push_back(i);
    const auto want = static_cast<std::size_t>(std::llround(P.number("grid.mobile_fraction") * static_cast<double>(n)));
    const std::size_t k = std::min(want, candidates.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = static_cast<std::size_t>(placement.uniform_int(static_cast<std::int64_t>(i),
                                                                      static_cast<std::int64_t>(candidates.size() - 1)));
        std::swap(candidates[i], candidates[j]);
    }
    std::vector<NodeId> mobile(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(mobile.begin(), mobile.end());

    const bool high = cell.frequency == Frequency::High;
    for (NodeId i = 0; i < n; ++i) s.nodes.push_back(StaticSpec{grid.positions[i]});
    for (NodeId m : mobile) {
        const Vec2 home = grid.positions[m];
        switch (cell.pattern) {
            case Pattern::Confined: {
                ConfinedSpec c;
                c.home = home;
                c.radius = R * P.number("confined.radius_fraction");
                c.leg_speed = P.number("confined.leg_speed");
                c.move_period = P.seconds(high ? "confined.period_high_s" : "confined.period_low_s");
                s.nodes[m] = c;
                break;
            }
            case Pattern::PingPong: {
                const SimTime period = P.seconds(high ? "pingpong.period_high_s" : "pingpong.period_low_s");
                const double offset = R * P.number("pingpong.offset_fraction");
                const double theta = 2.0 * std::numbers::pi * placement.uniform01();
                PingPongSpec pp;
                pp.pos_a = home;
                pp.pos_b = home + Vec2{offset * std::cos(theta), offset * std::sin(theta)};
                const SimTime transit = SimTime::from_seconds(period.seconds() * P.number("pingpong.transit_share"));
                pp.dwell_b = SimTime::from_seconds(period.seconds() * P.number("pingpong.dwell_b_share"));
                pp.dwell_a = period - pp.dwell_b - transit * 2;
                pp.transit_speed = offset / transit.seconds();
                if (pp.dwell_a < SimTime::zero()) throw ConfigError("pingpong shares exceed the period");
                s.nodes[m] = pp;
                break;
            }
            case Pattern::Free: {
                FreeWaypointSpec f;
                f.start = home;
                f.area = Rect{0.0, 0.0, area, area};
                f.speed_min = P.number("free.speed_min");
                f.speed_max = P.number("free.speed_max");
                f.pause_min = P.seconds(high ? "free.pause_high_min_s" : "free.pause_low_min_s");
                f.pause_max = P.seconds(high ? "free.pause_high_max_s" : "free.pause_low_max_s");
                s.nodes[m] = f;
                break;
            }
        }
    }
    s.validate();
    return s;
}

Scenario example_topology(Family family, HeuristicKind heuristic) {
    Scenario s;
    s.name = "example-topology";
    s.duration = SimTime::from_seconds(20.0);
    s.family = family;
    s.heuristic.kind = heuristic;
    // R = 50 m; distances chosen so exactly the listed pairs are within range.
    const Vec2 pos[] = {{0, 0}, {10, 42}, {58, 38}, {40, 0}, {80, 0}, {5, -45}, {40, -60}, {78, -45}};
    for (const Vec2& p : pos) s.nodes.push_back(StaticSpec{p});
    FlowSpec f;
    f.src = kExS;
    f.dst = kExD;
    f.start = SimTime::from_seconds(1.0);
    s.flows.push_back(f);
    return s;
}

// ---------------------------------------------------------------------------
// Scenario files

namespace {

class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    std::optional<std::string> get(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return *v;
    }
    std::string require(const std::string& key) {
        auto v = get(key);
        if (!v) throw ConfigError(fmt::format("[{}] missing key '{}'", name_, key));
        return *v;
    }
    double num(const std::string& key, double fallback) {
        auto v = get(key);
        return v ? to_num(key, *v) : fallback;
    }
    double num(const std::string& key) { return to_num(key, require(key)); }
    SimTime secs(const std::string& key, SimTime fallback) {
        auto v = get(key);
        return v ? SimTime::from_seconds(to_num(key, *v)) : fallback;
    }
    SimTime millis(const std::string& key, SimTime fallback) {
        auto v = get(key);
        return v ? SimTime::from_seconds(to_num(key, *v) / 1000.0) : fallback;
    }
    long integer(const std::string& key, long fallback) {
        const double v = num(key, static_cast<double>(fallback));
        if (v != std::floor(v)) throw ConfigError(fmt::format("[{}] {} must be an integer", name_, key));
        return static_cast<long>(v);
    }
    void finish() const {
        if (!tree_) return;
        for (const auto& [k, _] : *tree_)
            if (!used_.count(k)) throw ConfigError(fmt::format("[{}] unknown key '{}'", name_, k));
    }

private:
    double to_num(const std::string& key, const std::string& text) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used == text.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        throw ConfigError(fmt::format("[{}] {}: not a number: '{}'", name_, key, text));
    }

    const pt::ptree* tree_;
    std::string name_;
    std::set<std::string> used_;
};

std::vector<double> numbers_of(const std::string& text) {
    std::istringstream in(text);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    return out;
}

MobilitySpec parse_node(Section& sec) {
    const std::string pattern = lower(sec.require("pattern"));
    if (pattern == "static") return StaticSpec{{sec.num("x"), sec.num("y")}};
    if (pattern == "confined") {
        ConfinedSpec c;
        c.home = {sec.num("x"), sec.num("y")};
        c.radius = sec.num("radius");
        c.move_period = SimTime::from_seconds(sec.num("period_s"));
        c.leg_speed = sec.num("speed");
        return c;
    }
    if (pattern == "pingpong") {
        PingPongSpec p;
        p.pos_a = {sec.num("ax"), sec.num("ay")};
        p.pos_b = {sec.num("bx"), sec.num("by")};
        p.dwell_a = SimTime::from_seconds(sec.num("dwell_a_s"));
        p.dwell_b = SimTime::from_seconds(sec.num("dwell_b_s"));
        p.transit_speed = sec.num("speed");
        return p;
    }
    if (pattern == "free") {
        FreeWaypointSpec f;
        f.start = {sec.num("x"), sec.num("y")};
        const auto a = numbers_of(sec.require("area"));
        if (a.size() != 4) throw ConfigError("free node: area needs four numbers x_min y_min x_max y_max");
        f.area = Rect{a[0], a[1], a[2], a[3]};
        f.speed_min = sec.num("speed_min");
        f.speed_max = sec.num("speed_max");
        f.pause_min = SimTime::from_seconds(sec.num("pause_min_s"));
        f.pause_max = SimTime::from_seconds(sec.num("pause_max_s"));
        return f;
    }
    throw ConfigError("unknown mobility pattern '" + pattern + "'");
}

std::optional<std::size_t> indexed(const std::string& section, const std::string& prefix) {
    if (section.rfind(prefix + " ", 0) != 0) return std::nullopt;
    const std::string idx = section.substr(prefix.size() + 1);
    if (idx.empty() || idx.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError("bad section name [" + section + "]");
    return std::stoul(idx);
}

}  // namespace

Scenario read_scenario(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("scenario file: ") + e.what());
    }
    const auto child = [&tree](const std::string& name) -> const pt::ptree* {
        auto it = tree.find(name);
        return it == tree.not_found() ? nullptr : &it->second;
    };

    Scenario s;
    {
        Section sec(child("scenario"), "scenario");
        s.name = sec.get("name").value_or(s.name);
        s.duration = sec.secs("duration_s", s.duration);
        s.tick = sec.millis("tick_ms", s.tick);
        if (auto f = sec.get("family")) s.family = parse_family(*f);
        sec.finish();
    }
    {
        Section sec(child("radio"), "radio");
        s.radio.range_m = sec.num("range_m", s.radio.range_m);
        s.radio.ref_snr_db = sec.num("ref_snr_db", s.radio.ref_snr_db);
        s.radio.pathloss_exp = sec.num("pathloss_exp", s.radio.pathloss_exp);
        if (sec.get("snr_threshold_db")) s.radio.snr_threshold_db = sec.num("snr_threshold_db");
        s.radio.short_link_fraction = sec.num("short_link_fraction", s.radio.short_link_fraction);
        sec.finish();
    }
    {
        Section sec(child("heuristic"), "heuristic");
        if (auto k = sec.get("kind")) s.heuristic.kind = parse_heuristic(*k);
        s.heuristic.rld_delta_t = sec.secs("rld_delta_t_s", s.heuristic.rld_delta_t);
        s.heuristic.ssld_nds_threshold = sec.num("ssld_nds_threshold", s.heuristic.ssld_nds_threshold);
        s.heuristic.ssld_alb_threshold = sec.num("ssld_alb_threshold", s.heuristic.ssld_alb_threshold);
        s.heuristic.ssld_window = sec.secs("ssld_window_s", s.heuristic.ssld_window);
        sec.finish();
    }
    {
        Section sec(child("metrics"), "metrics");
        s.metrics.nds_interval = sec.secs("nds_interval_s", s.metrics.nds_interval);
        s.metrics.alb_window = sec.secs("alb_window_s", s.metrics.alb_window);
        sec.finish();
    }
    {
        Section sec(child("protocol"), "protocol");
        s.dv.rreq_timeout = sec.millis("rreq_timeout_ms", s.dv.rreq_timeout);
        s.dv.rreq_retries = static_cast<int>(sec.integer("rreq_retries", s.dv.rreq_retries));
        s.dv.buffer_limit = static_cast<std::size_t>(sec.integer("buffer_limit", static_cast<long>(s.dv.buffer_limit)));
        s.ls.hello_interval = sec.secs("hello_interval_s", s.ls.hello_interval);
        s.ls.tc_interval = sec.secs("tc_interval_s", s.ls.tc_interval);
        s.ls.tc_start = sec.secs("tc_start_s", s.ls.tc_start);
        sec.finish();
    }
    {
        Section sec(child("tx"), "tx");
        s.tx.base_tx_delay = sec.millis("base_tx_delay_ms", s.tx.base_tx_delay);
        s.tx.contention = sec.num("contention", s.tx.contention);
        s.tx.jitter = sec.millis("jitter_ms", s.tx.jitter);
        s.tx.data_ttl = static_cast<int>(sec.integer("data_ttl", s.tx.data_ttl));
        s.dv.max_hops = s.tx.data_ttl;
        sec.finish();
    }

    std::map<std::size_t, MobilitySpec> nodes;
    std::map<std::size_t, FlowSpec> flows;
    static const std::set<std::string> fixed = {"scenario", "radio", "heuristic", "metrics", "protocol", "tx"};
    for (const auto& [name, body] : tree) {
        if (fixed.count(name)) continue;
        if (auto i = indexed(name, "node")) {
            Section sec(&body, name);
            nodes[*i] = parse_node(sec);
            sec.finish();
        } else if (auto j = indexed(name, "flow")) {
            Section sec(&body, name);
            FlowSpec f;
            f.src = static_cast<NodeId>(sec.integer("src", -1));
            f.dst = static_cast<NodeId>(sec.integer("dst", -1));
            f.start = sec.secs("start_s", f.start);
            if (sec.get("stop_s")) f.stop = SimTime::from_seconds(sec.num("stop_s"));
            f.interval = sec.millis("interval_ms", f.interval);
            f.size_bytes = static_cast<std::uint32_t>(sec.integer("size_bytes", f.size_bytes));
            sec.finish();
            flows[*j] = f;
        } else {
            throw ConfigError("unknown section [" + name + "]");
        }
    }
    std::size_t expect = 0;
    for (auto& [i, spec] : nodes) {
        if (i != expect++) throw ConfigError(fmt::format("node ids must be 0..n-1 without gaps (missing {})", expect - 1));
        s.nodes.push_back(std::move(spec));
    }
    for (auto& [_, f] : flows) s.flows.push_back(f);
    s.validate();
    return s;
}

Scenario read_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file " + path.string());
    return read_scenario(in);
}

void write_scenario(std::ostream& out, const Scenario& s) {
    out << "[scenario]\n";
    out << "name = " << s.name << '\n';
    out << "duration_s = " << seconds_str(s.duration) << '\n';
    out << "tick_ms = " << millis_str(s.tick) << '\n';
    out << "family = " << to_string(s.family) << "\n\n";

    out << "[radio]\n";
    out << fmt::format("range_m = {}\nref_snr_db = {}\npathloss_exp = {}\n", s.radio.range_m, s.radio.ref_snr_db,
                       s.radio.pathloss_exp);
    if (s.radio.snr_threshold_db) out << fmt::format("snr_threshold_db = {}\n", *s.radio.snr_threshold_db);
    out << fmt::format("short_link_fraction = {}\n\n", s.radio.short_link_fraction);

    out << "[heuristic]\n";
    out << "kind = " << to_string(s.heuristic.kind) << '\n';
    out << "rld_delta_t_s = " << seconds_str(s.heuristic.rld_delta_t) << '\n';
    out << fmt::format("ssld_nds_threshold = {}\nssld_alb_threshold = {}\n", s.heuristic.ssld_nds_threshold,
                       s.heuristic.ssld_alb_threshold);
    out << "ssld_window_s = " << seconds_str(s.heuristic.ssld_window) << "\n\n";

    out << "[metrics]\n";
    out << "nds_interval_s = " << seconds_str(s.metrics.nds_interval) << '\n';
    out << "alb_window_s = " << seconds_str(s.metrics.alb_window) << "\n\n";

    out << "[protocol]\n";
    out << "rreq_timeout_ms = " << millis_str(s.dv.rreq_timeout) << '\n';
    out << "rreq_retries = " << s.dv.rreq_retries << '\n';
    out << "buffer_limit = " << s.dv.buffer_limit << '\n';
    out << "hello_interval_s = " << seconds_str(s.ls.hello_interval) << '\n';
    out << "tc_interval_s = " << seconds_str(s.ls.tc_interval) << '\n';
    out << "tc_start_s = " << seconds_str(s.ls.tc_start) << "\n\n";

    out << "[tx]\n";
    out << "base_tx_delay_ms = " << millis_str(s.tx.base_tx_delay) << '\n';
    out << fmt::format("contention = {}\n", s.tx.contention);
    out << "jitter_ms = " << millis_str(s.tx.jitter) << '\n';
    out << "data_ttl = " << s.tx.data_ttl << '\n';

    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
        out << fmt::format("\n[node {}]\n", i);
        std::visit(
            [&out](const auto& spec) {
                using T = std::decay_t<decltype(spec)>;
                if constexpr (std::is_same_v<T, StaticSpec>) {
                    out << fmt::format("pattern = static\nx = {}\ny = {}\n", spec.home.x, spec.home.y);
                } else if constexpr (std::is_same_v<T, ConfinedSpec>) {
                    out << fmt::format("pattern = confined\nx = {}\ny = {}\nradius = {}\nperiod_s = {}\nspeed = {}\n",
                                       spec.home.x, spec.home.y, spec.radius, seconds_str(spec.move_period),
                                       spec.leg_speed);
                } else if constexpr (std::is_same_v<T, PingPongSpec>) {
                    out << fmt::format(
                        "pattern = pingpong\nax = {}\nay = {}\nbx = {}\nby = {}\ndwell_a_s = {}\ndwell_b_s = {}\n"
                        "speed = {}\n",
                        spec.pos_a.x, spec.pos_a.y, spec.pos_b.x, spec.pos_b.y, seconds_str(spec.dwell_a),
                        seconds_str(spec.dwell_b), spec.transit_speed);
                } else {
                    out << fmt::format(
                        "pattern = free\nx = {}\ny = {}\narea = {} {} {} {}\nspeed_min = {}\nspeed_max = {}\n"
                        "pause_min_s = {}\npause_max_s = {}\n",
                        spec.start.x, spec.start.y, spec.area.x_min, spec.area.y_min, spec.area.x_max,
                        spec.area.y_max, spec.speed_min, spec.speed_max, seconds_str(spec.pause_min),
                        seconds_str(spec.pause_max));
                }
            },
            s.nodes[i]);
    }
    for (std::size_t i = 0; i < s.flows.size(); ++i) {
        const auto& f = s.flows[i];
        out << fmt::format("\n[flow {}]\nsrc = {}\ndst = {}\nstart_s = {}\n", i, f.src, f.dst, seconds_str(f.start));
        if (f.stop) out << "stop_s = " << seconds_str(*f.stop) << '\n';
        out << "interval_ms = " << millis_str(f.interval) << '\n';
        out << "size_bytes = " << f.size_bytes << '\n';
    }
}

// ---------------------------------------------------------------------------
// Runs

namespace {

const char* const kColumns[] = {
    "run_id",          "pattern",       "density",       "frequency",         "link_length",
    "heuristic",       "family",        "delta_t_s",     "seed",              "recomputations",
    "control_msgs",    "control_bytes", "pkts_sent",     "pkts_delivered",    "pkts_dropped",
    "mean_delay_s",    "mean_hops",     "throughput_bps", "discoveries",      "discovery_failures",
    "mean_discovery_latency_s",         "phys_breaks",   "visible_breaks",    "suppressed_episodes",
    "ld_closed",       "ld_mean_s",     "ld_censored",   "mean_abs_nds",      "mean_alb",
    "total_pause_s",   "mean_static_ratio",
};

std::string num(double v) { return fmt::format("{:.9g}", v); }

}  // namespace

std::string runs_csv_header() {
    std::string h;
    for (const char* c : kColumns) {
        if (!h.empty()) h += ',';
        h += c;
    }
    return h;
}

std::string runs_csv_row(const RunRow& row) {
    const auto& c = row.cell;
    const auto& r = row.result;
    const std::string dt = c.heuristic == HeuristicKind::RLD ? num(c.rld_delta_t.value_or(SimTime::zero()).seconds())
                                                             : std::string{};
    return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                       row.run_id, to_string(c.pattern), to_string(c.density), to_string(c.frequency),
                       to_string(c.link_length), to_string(c.heuristic), to_string(c.family), dt, row.seed,
                       r.recomputations, r.control_msgs, r.control_bytes, r.pkts_sent, r.pkts_delivered,
                       r.pkts_dropped, num(r.mean_delay_s), num(r.mean_hops), num(r.throughput_bps), r.discoveries,
                       r.discovery_failures, num(r.mean_discovery_latency_s), r.phys_breaks, r.visible_breaks,
                       r.suppressed_episodes, r.ld_closed, num(r.ld_mean_s), r.ld_censored, num(r.mean_abs_nds),
                       num(r.mean_alb), num(r.total_pause_s), num(r.mean_static_ratio));
}

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows) {
    out << runs_csv_header() << '\n';
    for (const auto& r : rows) out << runs_csv_row(r) << '\n';
}

std::vector<RunRow> read_runs_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != runs_csv_header())
        throw ConfigError("runs.csv: unexpected header");
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != std::size(kColumns)) throw ConfigError("runs.csv: wrong column count in '" + line + "'");
        RunRow r;
        r.run_id = f[0];
        r.cell.pattern = parse_enum(f[1], {Pattern::Confined, Pattern::PingPong, Pattern::Free}, "pattern");
        r.cell.density = parse_enum(f[2], {Density::Low, Density::High}, "density");
        r.cell.frequency = parse_enum(f[3], {Frequency::Low, Frequency::High}, "frequency");
        r.cell.link_length = parse_enum(f[4], {LinkLength::Short, LinkLength::Long}, "link length");
        r.cell.heuristic = parse_heuristic(f[5]);
        r.cell.family = parse_family(f[6]);
        if (!f[7].empty()) r.cell.rld_delta_t = SimTime::from_seconds(std::stod(f[7]));
        r.seed = std::stoull(f[8]);
        auto& x = r.result;
        x.recomputations = std::stoull(f[9]);
        x.control_msgs = std::stoull(f[10]);
        x.control_bytes = std::stoull(f[11]);
        x.pkts_sent = std::stoull(f[12]);
        x.pkts_delivered = std::stoull(f[13]);
        x.pkts_dropped = std::stoull(f[14]);
        x.mean_delay_s = std::stod(f[15]);
        x.mean_hops = std::stod(f[16]);
        x.throughput_bps = std::stod(f[17]);
        x.discoveries = std::stoull(f[18]);
        x.discovery_failures = std::stoull(f[19]);
        x.mean_discovery_latency_s = std::stod(f[20]);
        x.phys_breaks = std::stoull(f[21]);
        x.visible_breaks = std::stoull(f[22]);
        x.suppressed_episodes = std::stoull(f[23]);
        x.ld_closed = std::stoull(f[24]);
        x.ld_mean_s = std::stod(f[25]);
        x.ld_censored = std::stoull(f[26]);
        x.mean_abs_nds = std::stod(f[27]);
        x.mean_alb = std::stod(f[28]);
        x.total_pause_s = std::stod(f[29]);
        x.mean_static_ratio = std::stod(f[30]);
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_result_csv(std::ostream& out, const RunResult& r) {
    out << "counter,value\n";
    const auto row = [&out](const char* k, const auto& v) { out << k << ',' << v << '\n'; };
    row("recomputations", r.recomputations);
    row("control_msgs", r.control_msgs);
    row("control_bytes", r.control_bytes);
    row("pkts_sent", r.pkts_sent);
    row("pkts_delivered", r.pkts_delivered);
    row("pkts_dropped", r.pkts_dropped);
    for (const auto& [why, n] : r.drops) out << "dropped_" << to_string(why) << ',' << n << '\n';
    row("mean_delay_s", num(r.mean_delay_s));
    row("mean_hops", num(r.mean_hops));
    row("throughput_bps", num(r.throughput_bps));
    row("discoveries", r.discoveries);
    row("discovery_failures", r.discovery_failures);
    row("mean_discovery_latency_s", num(r.mean_discovery_latency_s));
    row("phys_breaks", r.phys_breaks);
    row("visible_breaks", r.visible_breaks);
    row("suppressed_episodes", r.suppressed_episodes);
    row("ld_closed", r.ld_closed);
    row("ld_mean_s", num(r.ld_mean_s));
    row("ld_censored", r.ld_censored);
    row("mean_abs_nds", num(r.mean_abs_nds));
    row("mean_alb", num(r.mean_alb));
    row("total_pause_s", num(r.total_pause_s));
    row("mean_static_ratio", num(r.mean_static_ratio));
}

void write_run_files(const Simulation& sim, const std::filesystem::path& dir, const std::string& run_id) {
    std::filesystem::create_directories(dir);
    const auto open = [&](const std::string& stem) {
        std::ofstream f(dir / (stem + "_" + run_id + ".csv"));
        if (!f) throw std::runtime_error("cannot write " + (dir / (stem + "_" + run_id + ".csv")).string());
        return f;
    };
    {
        auto f = open("metrics");
        write_metrics_csv(f, sim.metrics().rows());
    }
    {
        auto f = open("links");
        write_links_csv(f, sim.metrics().ld_records(), sim.scenario().duration);
    }
    {
        auto f = open("episodes");
        write_episodes_csv(f, sim.verdicts().episodes(), sim.scenario().heuristic.kind);
    }
}

std::vector<RunRow> run_matrix(const std::vector<MatrixCell>& cells, const std::vector<std::uint64_t>& seeds,
                               const Presets& presets, const std::filesystem::path& out_dir, MatrixOptions opts) {
    std::vector<RunRow> rows;
    rows.reserve(cells.size() * seeds.size());
    for (const auto& cell : cells) {
        for (std::uint64_t seed : seeds) {
            RunRow row;
            row.cell = cell;
            if (cell.heuristic == HeuristicKind::RLD && !row.cell.rld_delta_t)
                row.cell.rld_delta_t = presets.seconds("heuristic.rld_delta_t_s");
            row.seed = seed;
            row.run_id = fmt::format("{}-s{}", cell.key(), seed);
            try {
                Simulation sim(build_scenario(cell, presets, seed), seed);
                row.result = sim.run();
                if (opts.per_run_files) write_run_files(sim, out_dir, row.run_id);
            } catch (const std::exception& e) {
                throw std::runtime_error(fmt::format("run {} failed: {}", row.run_id, e.what()));
            }
            if (opts.progress) *opts.progress << row.run_id << '\n' << std::flush;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Ordering checks

namespace {

MatrixCell with(MatrixCell c, HeuristicKind h) {
    c.heuristic = h;
    c.rld_delta_t.reset();
    return c;
}

}  // namespace

std::vector<OrderingCheck> ordering_checks(const std::vector<RunRow>& rows) {
    std::set<std::uint64_t> seeds;
    for (const auto& r : rows) seeds.insert(r.seed);
    // RLD rows carry their Δt; the first row of a matching cell wins.
    const auto find_any_dt = [&](const MatrixCell& c, std::uint64_t seed) -> const RunRow* {
        for (const auto& r : rows)
            if (r.seed == seed && r.cell.pattern == c.pattern && r.cell.density == c.density &&
                r.cell.frequency == c.frequency && r.cell.link_length == c.link_length &&
                r.cell.heuristic == c.heuristic && r.cell.family == c.family)
                return &r;
        return nullptr;
    };

    std::vector<OrderingCheck> out;

    // Ping-pong: RLD recomputes less than LD, paired per seed over all ping-pong
    // cells, at the largest tolerance interval present.
    for (Family fam : {Family::ReactiveDV, Family::ProactiveLS}) {
        std::optional<SimTime> dt_max;
        for (const auto& r : rows)
            if (r.cell.pattern == Pattern::PingPong && r.cell.family == fam && r.cell.heuristic == HeuristicKind::RLD &&
                r.cell.rld_delta_t && (!dt_max || *r.cell.rld_delta_t > *dt_max))
                dt_max = r.cell.rld_delta_t;
        OrderingCheck chk;
        chk.name = fmt::format("pingpong recomputations RLD < LD ({}{})", to_string(fam),
                               dt_max ? fmt::format(", dt {}s", seconds_str(*dt_max)) : std::string{});
        chk.passed = true;
        std::string detail;
        for (std::uint64_t seed : seeds) {
            std::uint64_t ld = 0, rld = 0;
            bool any = false;
            for (Density d : {Density::Low, Density::High})
                for (Frequency f : {Frequency::Low, Frequency::High})
                    for (LinkLength l : {LinkLength::Short, LinkLength::Long}) {
                        MatrixCell c{Pattern::PingPong, d, f, l, HeuristicKind::LD, fam, std::nullopt};
                        const RunRow* a = find_any_dt(c, seed);
                        MatrixCell want = with(c, HeuristicKind::RLD);
                        want.rld_delta_t = dt_max;
                        const RunRow* b = nullptr;
                        for (const auto& r : rows)
                            if (r.seed == seed && r.cell == want) {
                                b = &r;
                                break;
                            }
                        if (!a || !b) continue;
                        any = true;
                        ld += a->result.recomputations;
                        rld += b->result.recomputations;
                    }
            if (!any) continue;
            chk.applicable = true;
            if (!(rld < ld)) chk.passed = false;
            detail += fmt::format(" seed {}: RLD {} vs LD {};", seed, rld, ld);
        }
        chk.detail = detail;
        out.push_back(chk);
    }

    // Confined, short spacing, low density and frequency: no heuristic recomputes; deliveries agree.
    {
        OrderingCheck chk;
        chk.name = "confined short-link neutrality (DV, low density, low frequency)";
        chk.passed = true;
        for (std::uint64_t seed : seeds) {
            MatrixCell c{Pattern::Confined, Density::Low, Frequency::Low, LinkLength::Short, HeuristicKind::LD,
                         Family::ReactiveDV, std::nullopt};
            const RunRow* r[3] = {find_any_dt(c, seed), find_any_dt(with(c, HeuristicKind::RLD), seed),
                                  find_any_dt(with(c, HeuristicKind::SSLD), seed)};
            if (!r[0] || !r[1] || !r[2]) continue;
            chk.applicable = true;
            bool ok = true;
            for (auto* x : r) ok = ok && x->result.recomputations == 0;
            ok = ok && r[0]->result.pkts_delivered == r[1]->result.pkts_delivered &&
                 r[0]->result.pkts_delivered == r[2]->result.pkts_delivered;
            if (!ok) chk.passed = false;
            chk.detail += fmt::format(" seed {}: recomp {}/{}/{} delivered {}/{}/{};", seed,
                                      r[0]->result.recomputations, r[1]->result.recomputations,
                                      r[2]->result.recomputations, r[0]->result.pkts_delivered,
                                      r[1]->result.pkts_delivered, r[2]->result.pkts_delivered);
        }
        out.push_back(chk);
    }

    // Confined, high frequency, LD: long spacing recomputes more than short spacing.
    for (Density d : {Density::Low, Density::High}) {
        OrderingCheck chk;
        chk.name = fmt::format("confined high-frequency LD long > short ({} density, DV)", to_string(d));
        chk.passed = true;
        for (std::uint64_t seed : seeds) {
            MatrixCell s{Pattern::Confined, d, Frequency::High, LinkLength::Short, HeuristicKind::LD,
                         Family::ReactiveDV, std::nullopt};
            MatrixCell l = s;
            l.link_length = LinkLength::Long;
            const RunRow* a = find_any_dt(s, seed);
            const RunRow* b = find_any_dt(l, seed);
            if (!a || !b) continue;
            chk.applicable = true;
            if (!(b->result.recomputations > a->result.recomputations)) chk.passed = false;
            chk.detail +=
                fmt::format(" seed {}: long {} vs short {};", seed, b->result.recomputations, a->result.recomputations);
        }
        out.push_back(chk);
    }

    // RLD never shows routing more breaks than LD on the same mobility.
    {
        OrderingCheck chk;
        chk.name = "visible breaks RLD <= LD, identical physical breaks";
        chk.passed = true;
        std::size_t pairs = 0, bad = 0;
        for (const auto& r : rows) {
            if (r.cell.heuristic != HeuristicKind::RLD) continue;
            const RunRow* ld = find_any_dt(with(r.cell, HeuristicKind::LD), r.seed);
            if (!ld) continue;
            ++pairs;
            if (r.result.visible_breaks > ld->result.visible_breaks || r.result.phys_breaks != ld->result.phys_breaks) {
                ++bad;
                chk.detail += " " + r.run_id + ";";
            }
        }
        chk.applicable = pairs > 0;
        chk.passed = bad == 0;
        chk.detail = fmt::format(" {} pairs, {} violations;", pairs, bad) + chk.detail;
        out.push_back(chk);
    }

    // Sweep: a longer tolerance interval never shows more breaks.
    {
        OrderingCheck chk;
        chk.name = "visible breaks non-increasing in the RLD tolerance interval";
        chk.passed = true;
        std::map<std::pair<std::string, std::uint64_t>, std::map<SimTime, std::uint64_t>> series;
        for (const auto& r : rows) {
            if (r.cell.heuristic != HeuristicKind::RLD || !r.cell.rld_delta_t) continue;
            MatrixCell base = r.cell;
            base.rld_delta_t.reset();
            series[{base.key(), r.seed}][*r.cell.rld_delta_t] = r.result.visible_breaks;
        }
        std::size_t checked = 0;
        for (const auto& [key, s] : series) {
            if (s.size() < 2) continue;
            ++checked;
            std::uint64_t prev = UINT64_MAX;
            for (const auto& [dt, v] : s) {
                if (v > prev) {
                    chk.passed = false;
                    chk.detail += fmt::format(" {} s{} at dt {};", key.first, key.second, format_ms(dt));
                }
                prev = v;
            }
        }
        chk.applicable = checked > 0;
        chk.detail = fmt::format(" {} series;", checked) + chk.detail;
        out.push_back(chk);
    }
    return out;
}

void write_ordering_report(std::ostream& out, const std::vector<OrderingCheck>& checks) {
    for (const auto& c : checks) {
        const char* tag = !c.applicable ? "SKIP" : (c.passed ? "PASS" : "FAIL");
        out << tag << "  " << c.name << " |" << c.detail << '\n';
    }
}

bool all_passed(const std::vector<OrderingCheck>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const OrderingCheck& c) { return !c.applicable || c.passed; });
}

}  // namespace mobisim
