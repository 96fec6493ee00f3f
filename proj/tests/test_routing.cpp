#include "mobisim/harness.hpp"
#include "mobisim/simulation.hpp"

#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

using namespace mobisim;
using namespace mobisim::literals;

namespace {

Adjacency random_graph(RngStream& r, std::size_t n, double p) {
    Adjacency g(n);
    for (NodeId a = 0; a < n; ++a)
        for (NodeId b = a + 1; b < n; ++b)
            if (r.uniform01() < p) {
                g[a].push_back(b);
                g[b].push_back(a);
            }
    return g;
}

std::vector<std::vector<int>> floyd_warshall(const Adjacency& g) {
    const std::size_t n = g.size();
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (NodeId j : g[i]) d[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (auto& row : d)
        for (auto& x : row)
            if (x >= inf) x = -1;
    return d;
}

Scenario static_scenario(const std::vector<Vec2>& pos, Family family) {
    Scenario s;
    s.family = family;
    for (auto p : pos) s.nodes.push_back(StaticSpec{p});
    return s;
}

std::size_t count_kind(const std::string& trace, const std::string& kind) {
    std::istringstream in(trace);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line))
        if (line.find("," + kind + ",") != std::string::npos) ++n;
    return n;
}

}  // namespace

TEST_CASE("hop shortest paths match an all-pairs oracle on random graphs") {
    RngStream r(7, "bfs-graphs");
    for (int trial = 0; trial < 50; ++trial) {
        const auto n = static_cast<std::size_t>(r.uniform_int(2, 25));
        const auto g = random_graph(r, n, r.uniform(0.05, 0.5));
        const auto d = floyd_warshall(g);
        for (NodeId src = 0; src < n; ++src) {
            const auto sp = hop_shortest_paths(g, src);
            for (NodeId dst = 0; dst < n; ++dst) {
                CHECK(sp.dist[dst] == d[src][dst]);
                if (dst == src || d[src][dst] < 0) {
                    CHECK(sp.next_hop[dst] == kNoNode);
                    continue;
                }
                NodeId best = kNoNode;
                for (NodeId v : g[src])
                    if (d[v][dst] == d[src][dst] - 1) best = std::min(best, v);
                CHECK(sp.next_hop[dst] == best);
            }
        }
    }
}

TEST_CASE("equal-length paths: smallest first hop wins") {
    Adjacency g(10);
    auto edge = [&](NodeId a, NodeId b) {
        g[a].push_back(b);
        g[b].push_back(a);
    };
    edge(0, 7);
    edge(0, 4);
    edge(7, 9);
    edge(4, 9);
    const auto sp = hop_shortest_paths(g, 0);
    CHECK(sp.dist[9] == 2);
    CHECK(sp.next_hop[9] == 4);
}

TEST_CASE("transit filter keeps endpoints reachable but not relayed through") {
    Adjacency g(3);
    g[0] = {1};
    g[1] = {0, 2};
    g[2] = {1};
    std::vector<bool> ok{true, false, true};
    const auto sp = hop_shortest_paths(g, 0, &ok);
    CHECK(sp.dist[1] == 1);
    CHECK(sp.dist[2] == -1);
}

TEST_CASE("MPR selection examples") {
    CHECK(mpr_select(0, {{1, {0}}, {2, {0}}}, {}).relays.empty());
    const auto single = mpr_select(0, {{1, {0, 5, 6}}, {2, {0, 5}}}, {5, 6});
    CHECK(single.relays == std::set<NodeId>{1});
    const auto both = mpr_select(0, {{1, {0, 5}}, {2, {0, 6}}}, {5, 6});
    CHECK(both.relays == std::set<NodeId>{1, 2});
    const auto tie = mpr_select(0, {{3, {0, 9}}, {2, {0, 9}}}, {9});
    CHECK(tie.relays == std::set<NodeId>{2});
    CHECK_THROWS_AS(mpr_select(0, {{1, {0}}}, {5}), std::invalid_argument);
    CHECK_THROWS_AS(mpr_select(0, {{1, {0, 2}}, {2, {0, 1}}}, {2}), std::invalid_argument);
}

TEST_CASE("property: greedy MPR set covers every 2-hop node on random graphs") {
    RngStream r(11, "mpr-graphs");
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = static_cast<std::size_t>(r.uniform_int(2, 20));
        const auto g = random_graph(r, n, r.uniform(0.1, 0.6));
        const NodeId self = 0;
        std::set<NodeId> one(g[self].begin(), g[self].end());
        std::map<NodeId, std::set<NodeId>> links;
        std::set<NodeId> two;
        for (NodeId v : one) {
            links[v] = std::set<NodeId>(g[v].begin(), g[v].end());
            for (NodeId w : g[v])
                if (w != self && !one.count(w)) two.insert(w);
        }
        const auto m = mpr_select(self, links, two);
        for (NodeId relay : m.relays) CHECK(one.count(relay));
        for (NodeId w : two) {
            bool covered = false;
            for (NodeId relay : m.relays) covered |= links[relay].count(w) > 0;
            CHECK(covered);
        }
    }
}

TEST_CASE("DV: 3-node chain discovers a 2-hop route and delivers") {
    auto s = static_scenario({{0, 0}, {40, 0}, {80, 0}}, Family::ReactiveDV);
    s.duration = 10_s;
    s.flows.push_back(FlowSpec{0, 2, 1_s, std::nullopt, 100_ms, 512});
    Simulation sim(s, 1);
    const auto r = sim.run();
    const auto route = sim.protocol().route(0, 2);
    REQUIRE(route);
    CHECK(route->next_hop == 1);
    CHECK(route->hop_count == 2);
    CHECK(r.discoveries == 1);
    CHECK(r.pkts_delivered == r.pkts_sent);
    CHECK(r.mean_hops == doctest::Approx(2.0));
}

TEST_CASE("DV: partitioned pair fails after the configured retries") {
    auto s = static_scenario({{0, 0}, {200, 0}}, Family::ReactiveDV);
    s.duration = 2_s;
    s.flows.push_back(FlowSpec{0, 1, 1_s, 1001_ms, 100_ms, 512});
    std::ostringstream trace;
    Simulation sim(s, 1);
    sim.set_message_trace(&trace);
    const auto r = sim.run();
    CHECK(count_kind(trace.str(), "RREQ") == 1 + static_cast<std::size_t>(s.dv.rreq_retries));
    CHECK(r.discovery_failures == 1);
    CHECK(r.pkts_delivered == 0);
    CHECK(r.drops.at(DropReason::DiscoveryFailed) == r.pkts_sent);
}

TEST_CASE("DV: a broken chain link sends RERR and rediscovery fails") {
    auto s = static_scenario({{0, 0}, {40, 0}, {80, 0}}, Family::ReactiveDV);
    s.duration = 6_s;
    s.flows.push_back(FlowSpec{0, 2, 1_s, std::nullopt, 100_ms, 512});
    std::ostringstream trace;
    Simulation sim(s, 1);
    sim.set_message_trace(&trace);
    sim.run_until(3_s);
    CHECK(sim.protocol().route(0, 2));
    sim.block_link({1, 2});
    const auto r = sim.run();
    CHECK(count_kind(trace.str(), "RERR") >= 1);
    CHECK(r.recomputations >= 1);
    CHECK(r.discovery_failures >= 1);
    CHECK_FALSE(sim.protocol().route(0, 2));
}

TEST_CASE("example topology: S reaches D via C, then via A-B after C-D is removed") {
    for (Family fam : {Family::ReactiveDV, Family::ProactiveLS}) {
        CAPTURE(to_string(fam));
        auto s = example_topology(fam, HeuristicKind::LD);
        s.tx.jitter = SimTime::zero();
        Simulation sim(s, 1);
        sim.run_until(8_s);
        auto r = sim.protocol().route(kExS, kExD);
        REQUIRE(r);
        CHECK(r->next_hop == kExC);
        CHECK(r->hop_count == 2);
        sim.block_link({kExC, kExD});
        sim.run_until(16_s);
        r = sim.protocol().route(kExS, kExD);
        REQUIRE(r);
        CHECK(r->hop_count == 3);
        CHECK(r->next_hop == kExA);
        const auto a = sim.protocol().route(kExA, kExD);
        REQUIRE(a);
        CHECK(a->next_hop == kExB);
    }
}

TEST_CASE("LS: two nodes exchange one HELLO per interval") {
    auto s = static_scenario({{0, 0}, {30, 0}}, Family::ProactiveLS);
    s.duration = 20_s;
    Simulation sim(s, 3);
    sim.run_until(10_s);
    auto& ls = dynamic_cast<LsRouting&>(sim.protocol());
    CHECK(ls.hellos_sent(0) == 10);
    CHECK(ls.hellos_sent(1) == 10);
    CHECK(ls.tc_originated(0) == 0);
    CHECK(sim.control_msgs() == 20);
    CHECK(ls.neighbors(0) == std::set<NodeId>{1});
}

TEST_CASE("LS: full mesh selects no relays, star leaves select the centre") {
    {
        auto s = static_scenario({{0, 0}, {20, 0}, {0, 20}, {20, 20}}, Family::ProactiveLS);
        Simulation sim(s, 1);
        sim.run_until(5_s);
        auto& ls = dynamic_cast<LsRouting&>(sim.protocol());
        for (NodeId n = 0; n < 4; ++n) CHECK(ls.mprs(n).empty());
    }
    {
        auto s = static_scenario({{0, 0}, {45, 0}, {-45, 0}, {0, 45}}, Family::ProactiveLS);
        Simulation sim(s, 1);
        sim.run_until(5_s);
        auto& ls = dynamic_cast<LsRouting&>(sim.protocol());
        CHECK(ls.mprs(0).empty());
        for (NodeId leaf = 1; leaf < 4; ++leaf) CHECK(ls.mprs(leaf) == std::set<NodeId>{0});
        CHECK(ls.mpr_selectors(0) == std::set<NodeId>{1, 2, 3});
        const auto r = sim.protocol().route(1, 2);
        REQUIRE(r);
        CHECK(r->next_hop == 0);
        CHECK(r->hop_count == 2);
    }
}

TEST_CASE("per-hop latency formula") {
    TransmitConfig tx;
    tx.base_tx_delay = 2_ms;
    tx.contention = 0.1;
    CHECK(hop_latency(tx, 0) == 2_ms);
    CHECK(2 * hop_latency(tx, 0) == 4_ms);
    CHECK(hop_latency(tx, 9) == 3800_us);
}

TEST_CASE("2-hop path without contention takes 4 ms end to end") {
    auto s = static_scenario({{0, 0}, {40, 0}, {80, 0}}, Family::ReactiveDV);
    s.duration = 3_s;
    s.flows.push_back(FlowSpec{0, 2, 1_s, std::nullopt, 100_ms, 512});
    Simulation sim(s, 1);
    sim.run_until(SimTime::zero());
    auto& dv = dynamic_cast<DvRouting&>(sim.protocol());
    dv.install_route(0, 2, 1, 2);
    dv.install_route(1, 2, 2, 1);
    const auto r = sim.run();
    CHECK(r.pkts_delivered == r.pkts_sent);
    CHECK(r.mean_delay_s == doctest::Approx(0.004).epsilon(1e-12));
    CHECK(sim.control_msgs() == 0);
}

TEST_CASE("a hand-built routing loop is dropped at TTL") {
    auto s = static_scenario({{0, 0}, {40, 0}, {300, 0}}, Family::ReactiveDV);
    s.duration = 2_s;
    Simulation sim(s, 1);
    sim.run_until(SimTime::zero());
    auto& dv = dynamic_cast<DvRouting&>(sim.protocol());
    dv.install_route(0, 2, 1, 2);
    dv.install_route(1, 2, 0, 2);
    DataPacket p;
    p.id = 1;
    p.src = 0;
    p.dst = 2;
    p.size_bytes = 100;
    p.ttl = 32;
    dv.route_data(0, p);
    const auto r = sim.run();
    CHECK(r.drops.at(DropReason::Ttl) == 1);
    CHECK(r.pkts_delivered == 0);
}

TEST_CASE("duplicate suppression: one rebroadcast per node per request") {
    RngStream r(5, "dense");
    std::vector<Vec2> pos;
    for (int i = 0; i < 15; ++i) pos.push_back({r.uniform(0, 120), r.uniform(0, 120)});
    auto s = static_scenario(pos, Family::ReactiveDV);
    s.duration = 5_s;
    for (NodeId d = 1; d < 15; d += 3) s.flows.push_back(FlowSpec{0, d, 1_s, std::nullopt, 200_ms, 256});
    std::ostringstream trace;
    Simulation sim(s, 1);
    sim.set_message_trace(&trace);
    sim.run();
    std::istringstream in(trace.str());
    std::string line;
    std::set<std::tuple<std::string, std::string, std::string>> seen;
    std::size_t rreqs = 0;
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string x;
        while (std::getline(ls, x, ',')) f.push_back(x);
        if (f.size() < 7 || f[1] != "RREQ") continue;
        ++rreqs;
        CHECK(seen.insert({f[2], f[4], f[5]}).second);
    }
    CHECK(rreqs > 0);
}

TEST_CASE("hop optimality on static graphs, both families") {
    RngStream r(21, "hop-opt");
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Vec2> pos;
        for (int i = 0; i < 12; ++i) pos.push_back({r.uniform(0, 150), r.uniform(0, 150)});
        Adjacency g(pos.size());
        for (NodeId a = 0; a < pos.size(); ++a)
            for (NodeId b = a + 1; b < pos.size(); ++b)
                if (phys_link_up(pos[a], pos[b], RadioConfig{})) {
                    g[a].push_back(b);
                    g[b].push_back(a);
                }
        const auto d = floyd_warshall(g);
        for (Family fam : {Family::ReactiveDV, Family::ProactiveLS}) {
            auto s = static_scenario(pos, fam);
            s.duration = 15_s;
            for (NodeId dst = 1; dst < pos.size(); ++dst) s.flows.push_back(FlowSpec{0, dst, 1_s, std::nullopt, 1_s, 64});
            Simulation sim(s, static_cast<std::uint64_t>(trial + 1));
            sim.run();
            for (NodeId dst = 1; dst < pos.size(); ++dst) {
                const auto rt = sim.protocol().route(0, dst);
                if (d[0][dst] < 0) {
                    CHECK_FALSE(rt);
                    continue;
                }
                REQUIRE(rt);
                CHECK(rt->hop_count == d[0][dst]);
            }
        }
    }
}

TEST_CASE("reactive silence and proactive growth on a static network") {
    RngStream r(3, "silence");
    std::vector<Vec2> pos;
    for (int i = 0; i < 10; ++i) pos.push_back({40.0 * (i % 4), 40.0 * (i / 4)});
    for (Family fam : {Family::ReactiveDV, Family::ProactiveLS}) {
        auto s = static_scenario(pos, fam);
        s.duration = 60_s;
        s.flows.push_back(FlowSpec{0, 9, 5_s, std::nullopt, 100_ms, 512});
        Simulation sim(s, 1);
        sim.run_until(20_s);
        const auto at20 = sim.control_msgs();
        sim.run_until(40_s);
        const auto at40 = sim.control_msgs();
        sim.run_until(60_s);
        const auto at60 = sim.control_msgs();
        if (fam == Family::ReactiveDV) {
            CHECK(sim.control_msgs_since(10_s) == 0);
        } else {
            CHECK(at40 > at20);
            const auto a = static_cast<long>(at40 - at20), b = static_cast<long>(at60 - at40);
            CHECK(std::abs(a - b) <= 12);
        }
    }
}

TEST_CASE("heuristic transparency on static networks") {
    RngStream r(9, "transparency");
    std::vector<Vec2> pos;
    for (int i = 0; i < 12; ++i) pos.push_back({r.uniform(0, 120), r.uniform(0, 120)});
    for (Family fam : {Family::ReactiveDV, Family::ProactiveLS}) {
        std::vector<std::uint64_t> msgs;
        std::vector<std::vector<std::optional<RouteEntry>>> tables;
        for (HeuristicKind h : {HeuristicKind::LD, HeuristicKind::RLD, HeuristicKind::SSLD}) {
            auto s = static_scenario(pos, fam);
            s.duration = 20_s;
            s.heuristic.kind = h;
            s.flows.push_back(FlowSpec{0, 11, 2_s, std::nullopt, 100_ms, 512});
            s.flows.push_back(FlowSpec{5, 3, 2_s, std::nullopt, 100_ms, 512});
            Simulation sim(s, 4);
            sim.run();
            msgs.push_back(sim.control_msgs());
            std::vector<std::optional<RouteEntry>> t;
            for (NodeId a = 0; a < pos.size(); ++a)
                for (NodeId b = 0; b < pos.size(); ++b) t.push_back(sim.protocol().route(a, b));
            tables.push_back(t);
        }
        CHECK(msgs[0] == msgs[1]);
        CHECK(msgs[0] == msgs[2]);
        for (std::size_t i = 0; i < tables[0].size(); ++i) {
            for (int k = 1; k < 3; ++k) {
                CHECK(tables[0][i].has_value() == tables[k][i].has_value());
                if (tables[0][i] && tables[k][i]) {
                    CHECK(tables[0][i]->next_hop == tables[k][i]->next_hop);
                    CHECK(tables[0][i]->hop_count == tables[k][i]->hop_count);
                }
            }
        }
    }
}

TEST_CASE("example topology geometry gives exactly the listed adjacency") {
    const auto s = example_topology(Family::ReactiveDV, HeuristicKind::LD);
    std::set<NodePair> want{{kExS, kExA}, {kExS, kExC}, {kExS, kExE}, {kExA, kExB}, {kExB, kExC},
                            {kExB, kExD}, {kExC, kExD}, {kExE, kExF}, {kExF, kExG}, {kExG, kExD}};
    std::set<NodePair> got;
    for (NodeId a = 0; a < s.nodes.size(); ++a)
        for (NodeId b = a + 1; b < s.nodes.size(); ++b)
            if (phys_link_up(initial_position(s.nodes[a]), initial_position(s.nodes[b]), s.radio)) got.insert({a, b});
    CHECK(got == want);
}

TEST_CASE("example topology with default jitter: DV finds a 3-hop shortest path after C-D is removed") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Simulation sim(example_topology(Family::ReactiveDV, HeuristicKind::LD), seed);
        sim.run_until(8_s);
        sim.block_link({kExC, kExD});
        sim.run_until(16_s);
        const auto r = sim.protocol().route(kExS, kExD);
        REQUIRE(r);
        CHECK(r->hop_count == 3);
        CHECK((r->next_hop == kExA || r->next_hop == kExC));
        const auto next = sim.protocol().route(r->next_hop, kExD);
        REQUIRE(next);
        CHECK(next->next_hop == kExB);
    }
}
