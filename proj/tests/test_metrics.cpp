#include "mobisim/metrics.hpp"
#include "mobisim/mobility.hpp"
#include "mobisim/rng.hpp"

#include <doctest.h>

#include <map>
#include <sstream>

using namespace mobisim;
using namespace mobisim::literals;

TEST_CASE("link duration, closed and censored") {
    MetricsCollector m(3);
    m.on_link_event({0, 1}, LinkEventKind::Up, 2_s);
    m.on_link_event({0, 1}, LinkEventKind::Down, 7500_ms);
    m.on_link_event({1, 2}, LinkEventKind::Up, 2_s);
    REQUIRE(m.ld_records().size() == 2);
    CHECK(m.ld_records()[0].duration(10_s) == 5500_ms);
    CHECK_FALSE(m.ld_records()[0].open());
    CHECK(m.ld_records()[1].open());
    CHECK(m.ld_records()[1].duration(10_s) == 8_s);
    m.finalize(10_s);
    CHECK(m.ld_records()[1].open());
}

TEST_CASE("double Up or Down without Up is an engine bug") {
    MetricsCollector m(2);
    m.on_link_event({0, 1}, LinkEventKind::Up, 1_s);
    CHECK_THROWS_AS(m.on_link_event({0, 1}, LinkEventKind::Up, 2_s), SimError);
    m.on_link_event({0, 1}, LinkEventKind::Down, 3_s);
    CHECK_THROWS_AS(m.on_link_event({0, 1}, LinkEventKind::Down, 4_s), SimError);
}

TEST_CASE("NDS is the signed decrease in degree") {
    MetricsCollector m(8);
    for (NodeId j = 1; j <= 5; ++j) m.on_link_event({0, j}, LinkEventKind::Up, 0_s);
    const auto first = m.sample_nds(0, 0_s);
    CHECK(first.nd_prev == 5);
    CHECK(first.nds == 0);
    m.on_link_event({0, 1}, LinkEventKind::Down, 500_ms);
    m.on_link_event({0, 2}, LinkEventKind::Down, 600_ms);
    const auto s = m.sample_nds(0, 1_s);
    CHECK(s.nd_prev == 5);
    CHECK(s.nd_now == 3);
    CHECK(s.nds == 2);
    m.on_link_event({0, 1}, LinkEventKind::Up, 1100_ms);
    m.on_link_event({0, 2}, LinkEventKind::Up, 1200_ms);
    m.on_link_event({0, 6}, LinkEventKind::Up, 1300_ms);
    m.on_link_event({0, 2}, LinkEventKind::Down, 1400_ms);
    m.on_link_event({0, 2}, LinkEventKind::Up, 1500_ms);
    const auto t = m.sample_nds(0, 2_s);
    CHECK(t.nd_prev == 3);
    CHECK(t.nd_now == 6);
    CHECK(t.nds == -3);
}

TEST_CASE("static full topology: all NDS and ALB zero") {
    MetricsCollector m(4);
    for (NodeId a = 0; a < 4; ++a)
        for (NodeId b = a + 1; b < 4; ++b) m.on_link_event({a, b}, LinkEventKind::Up, 0_s);
    for (SimTime t = 0_s; t <= 30_s; t += 1_s) m.sample_all(t);
    for (const auto& row : m.rows()) {
        CHECK(row.nds == 0);
        CHECK(row.alb == 0.0);
        CHECK(row.nd == 3);
    }
}

TEST_CASE("ALB counts incident breaks in the half-open window") {
    MetricsCollector m(4);
    for (NodeId j = 1; j <= 3; ++j) m.on_link_event({0, j}, LinkEventKind::Up, 0_s);
    m.on_link_event({0, 1}, LinkEventKind::Down, 2_s);
    m.on_link_event({0, 2}, LinkEventKind::Down, 5_s);
    m.on_link_event({0, 3}, LinkEventKind::Down, 11_s);
    CHECK(m.alb(0, 11_s, 10_s) == doctest::Approx(0.3));
    CHECK(m.alb(0, 12_s, 10_s) == doctest::Approx(0.2));  // the break at 2 s is outside (2, 12]
    CHECK(m.alb(0, 1_s, 10_s) == 0.0);
    CHECK(m.alb(3, 11_s, 10_s) == doctest::Approx(0.1));
}

TEST_CASE("static/moving ratio") {
    MetricsConfig cfg;
    cfg.nds_interval = 1_s;
    MetricsCollector m(3, cfg);
    for (NodeId n = 0; n < 3; ++n) m.observe_motion(n, 0_s, true);
    auto r = m.static_moving_ratio(500_ms);
    CHECK(r.n_static == 3);
    CHECK(r.n_moving == 0);
    CHECK(r.ratio == doctest::Approx(3.0));
    m.observe_motion(1, 2_s, false);
    m.observe_motion(1, 3_s, true);  // stopped at 3 s
    r = m.static_moving_ratio(3500_ms);
    CHECK(r.n_static == 2);  // node 1 was moving during (2.5, 3.5]
    CHECK(r.n_moving == 1);
    r = m.static_moving_ratio(4_s);
    CHECK(r.n_static == 3);
    MetricsCollector all_moving(2, cfg);
    all_moving.observe_motion(0, 0_s, false);
    all_moving.observe_motion(1, 0_s, false);
    r = all_moving.static_moving_ratio(5_s);
    CHECK(r.n_static == 0);
    CHECK(r.ratio == 0.0);
}

TEST_CASE("pause time: static node and ping-pong dwell arithmetic") {
    MetricsCollector m(2);
    m.observe_motion(0, 0_s, true);
    PingPongSpec pp;
    pp.pos_a = {0, 0};
    pp.pos_b = {10, 0};
    pp.dwell_a = 1_s;
    pp.dwell_b = 1_s;
    pp.transit_speed = 10;
    Trajectory t(pp, RngStream(1, streams::mobility));
    for (SimTime x = 0_s; x < 40_s; x += 1_ms) m.observe_motion(1, x, is_stationary(t.pose_at(x)));
    m.finalize(40_s);
    const auto s0 = m.pause_time_stats(0);
    CHECK(s0.total_pause_s == doctest::Approx(40.0));
    CHECK(s0.intervals == 1);
    const auto s1 = m.pause_time_stats(1);
    CHECK(s1.total_pause_s == doctest::Approx(20.0));
    CHECK(s1.intervals == 20);
    CHECK(s1.mean_pause_s == doctest::Approx(1.0));
}

TEST_CASE("property: free waypoint pause totals match a dense-sampling oracle within one tick per interval") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        FreeWaypointSpec f;
        f.area = Rect{0, 0, 200, 200};
        f.start = {100, 100};
        f.speed_min = 1;
        f.speed_max = 5;
        f.pause_min = 0_s;
        f.pause_max = 10_s;
        Trajectory online(f, RngStream(seed, streams::mobility));
        MetricsCollector m(1);
        const SimTime tick = 1_ms, end = 200_s;
        for (SimTime x = 0_s; x < end; x += tick) m.observe_motion(0, x, is_stationary(online.pose_at(x)));
        m.finalize(end);

        // Oracle: replay the exported trajectory at 0.1 ms and integrate stationary time.
        Trajectory replay(f, RngStream(seed, streams::mobility));
        const SimTime fine = SimTime::from_us(100);
        double still = 0.0;
        for (SimTime x = 0_s; x < end; x += fine)
            if (is_stationary(replay.pose_at(x))) still += fine.seconds();
        const auto s = m.pause_time_stats(0);
        CHECK(std::abs(s.total_pause_s - still) <= tick.seconds() * static_cast<double>(s.intervals + 1));
    }
}

TEST_CASE("property: online NDS and ALB equal brute-force recomputation from random event logs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        RngStream r(seed, "metric-log");
        const std::size_t n = 8;
        MetricsConfig cfg;
        cfg.nds_interval = 1_s;
        cfg.alb_window = 5_s;
        MetricsCollector m(n, cfg);
        std::map<NodePair, bool> up;
        struct Ev {
            SimTime t;
            NodePair p;
            bool up;
        };
        std::vector<Ev> log;
        SimTime now = 0_s;
        SimTime next_sample = 0_s;
        while (now < 60_s) {
            now += SimTime::from_us(r.uniform_int(1, 400'000));
            while (next_sample < now) {
                m.sample_all(next_sample);
                next_sample += cfg.nds_interval;
            }
            const auto a = static_cast<NodeId>(r.uniform_int(0, n - 1));
            auto b = static_cast<NodeId>(r.uniform_int(0, n - 2));
            if (b >= a) ++b;
            const NodePair p{a, b};
            const bool to_up = !up[p];
            up[p] = to_up;
            m.on_link_event(p, to_up ? LinkEventKind::Up : LinkEventKind::Down, now);
            log.push_back({now, p, to_up});
        }
        for (const auto& row : m.rows()) {
            int deg_now = 0, deg_prev = 0, breaks = 0;
            const SimTime prev_t = row.t - cfg.nds_interval;
            std::map<NodePair, bool> s_now, s_prev;
            for (const auto& e : log) {
                if (!e.p.contains(row.node)) continue;
                if (e.t <= row.t) s_now[e.p] = e.up;
                if (e.t <= prev_t) s_prev[e.p] = e.up;
                if (!e.up && e.t > row.t - cfg.alb_window && e.t <= row.t) ++breaks;
            }
            for (auto& [_, v] : s_now) deg_now += v;
            for (auto& [_, v] : s_prev) deg_prev += v;
            if (row.t == 0_s) deg_prev = deg_now;
            CHECK(row.nd == deg_now);
            CHECK(row.nds == deg_prev - deg_now);
            CHECK(row.alb == static_cast<double>(breaks) / cfg.alb_window.seconds());
        }
    }
}

TEST_CASE("csv exports") {
    MetricsCollector m(2);
    m.on_link_event({0, 1}, LinkEventKind::Up, 1_s);
    m.sample_all(2_s);
    std::ostringstream links, metrics;
    write_links_csv(links, m.ld_records(), 5_s);
    write_metrics_csv(metrics, m.rows());
    CHECK(links.str() == "link,start_ms,end_ms,duration_ms,censored\n0-1,1000.000,5000.000,4000.000,1\n");
    CHECK(metrics.str().rfind("time_ms,node_id,nd,nds,alb,paused\n", 0) == 0);
}
