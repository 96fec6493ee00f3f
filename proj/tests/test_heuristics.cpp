#include "mobisim/heuristics.hpp"
#include "mobisim/rng.hpp"

#include <doctest.h>

#include <sstream>

using namespace mobisim;
using namespace mobisim::literals;

namespace {

struct Recorder : VerdictListener {
    std::vector<std::pair<NodePair, SimTime>> downs, ups, recovered;
    void on_verdict_down(NodePair l, SimTime t) override { downs.emplace_back(l, t); }
    void on_verdict_up(NodePair l, SimTime t) override { ups.emplace_back(l, t); }
    void on_tentative_recovered(NodePair l, SimTime t) override { recovered.emplace_back(l, t); }
};

// Link (0,1) starts Up at 0 and flips at the given instants (down, up, down, ...).
struct Bench {
    Engine engine;
    LinkTable links{2};
    Recorder rec;
    LinkVerdicts verdicts;
    NodePair link{0, 1};

    explicit Bench(HeuristicConfig cfg) : verdicts(engine, links, cfg, rec) {
        auto& st = links.at(link);
        st.phys_up = true;
        st.verdict = VerdictKind::Up;
        st.up_since = 0_s;
    }

    // Each flip is scheduled by the previous one, the way mobility ticks are,
    // so a timer set at a flip precedes the next flip at the same instant.
    void flips(std::vector<SimTime> at) {
        plan = std::move(at);
        if (!plan.empty()) schedule_flip(0);
    }

    std::vector<SimTime> plan;

    void schedule_flip(std::size_t i) {
        engine.schedule(plan[i], EventKind::MobilityUpdate, 0, "", [this, i] {
            if (i % 2 == 0) verdicts.on_phys_down(link, plan[i]);
            else verdicts.on_phys_up(link, plan[i]);
            if (i + 1 < plan.size()) schedule_flip(i + 1);
        });
    }
};

HeuristicConfig rld(SimTime dt) {
    HeuristicConfig c;
    c.kind = HeuristicKind::RLD;
    c.rld_delta_t = dt;
    return c;
}

}  // namespace

TEST_CASE("RLD suppresses a loss that recovers inside the interval") {
    Bench b(rld(1_s));
    b.flips({10_s, 10400_ms});
    b.engine.run_until(10200_ms);
    CHECK(b.verdicts.verdict(b.link) == VerdictKind::TentativeDown);
    CHECK(b.links.visible(0, 1));
    b.engine.run_until(20_s);
    CHECK(b.rec.downs.empty());
    CHECK(b.rec.recovered.size() == 1);
    CHECK(b.verdicts.verdict(b.link) == VerdictKind::Up);
    REQUIRE(b.verdicts.episodes().size() == 1);
    CHECK(b.verdicts.episodes()[0].suppressed());
    CHECK(b.verdicts.visible_breaks() == 0);
}

TEST_CASE("RLD with a short interval reports the loss at the deadline") {
    Bench b(rld(200_ms));
    b.flips({10_s, 10400_ms});
    b.engine.run_until(20_s);
    REQUIRE(b.rec.downs.size() == 1);
    CHECK(b.rec.downs[0].second == 10200_ms);
    REQUIRE(b.rec.ups.size() == 1);
    CHECK(b.rec.ups[0].second == 10400_ms);
    CHECK(b.verdicts.episodes()[0].verdict_down == 10200_ms);
}

TEST_CASE("RLD permanent loss: Down exactly at the deadline") {
    Bench b(rld(1_s));
    b.flips({10_s});
    b.engine.run_until(60_s);
    REQUIRE(b.rec.downs.size() == 1);
    CHECK(b.rec.downs[0].second == 11_s);
    CHECK(b.verdicts.verdict(b.link) == VerdictKind::Down);
    CHECK_FALSE(b.links.visible(0, 1));
}

TEST_CASE("RLD tie: recovery at exactly the deadline loses to the timer") {
    Bench b(rld(1_s));
    b.flips({10_s, 11_s});
    b.engine.run_until(20_s);
    REQUIRE(b.rec.downs.size() == 1);
    CHECK(b.rec.downs[0].second == 11_s);
    CHECK(b.rec.ups.size() == 1);
    CHECK(b.rec.recovered.empty());
}

TEST_CASE("LD reports both transitions immediately") {
    Bench b(HeuristicConfig{});
    b.flips({10_s, 10400_ms});
    b.engine.run_until(20_s);
    REQUIRE(b.rec.downs.size() == 1);
    CHECK(b.rec.downs[0].second == 10_s);
    REQUIRE(b.rec.ups.size() == 1);
    CHECK(b.rec.ups[0].second == 10400_ms);
}

TEST_CASE("invalid transitions throw") {
    Bench b(HeuristicConfig{});
    CHECK_THROWS_AS(b.verdicts.on_phys_up(b.link, 1_s), SimError);
    b.verdicts.on_phys_down(b.link, 2_s);
    CHECK_THROWS_AS(b.verdicts.on_phys_down(b.link, 3_s), SimError);
}

TEST_CASE("config validation") {
    HeuristicConfig c = rld(SimTime::zero());
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = HeuristicConfig{};
    c.kind = HeuristicKind::SSLD;
    c.ssld_alb_threshold = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_heuristic("rld") == HeuristicKind::RLD);
    CHECK_THROWS_AS(parse_heuristic("xyz"), ConfigError);
}

TEST_CASE("property: RLD suppression and delay laws on random flip sequences") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        RngStream r(seed, "rld-flips");
        const SimTime dt = SimTime::from_ms(r.uniform_int(1, 3000));
        std::vector<SimTime> at;
        SimTime t = 0_s;
        const auto flips = r.uniform_int(1, 20);
        for (int i = 0; i < flips; ++i) {
            t += SimTime::from_ms(r.uniform_int(1, 4000));
            at.push_back(t);
        }
        Bench b(rld(dt));
        b.flips(at);
        b.engine.run_until(t + 10_s);

        // Oracle straight from the definition: a down at d with recovery at u
        // is suppressed iff u < d + dt, otherwise routing sees it at d + dt.
        std::vector<SimTime> expected_downs;
        std::size_t suppressed = 0;
        for (std::size_t i = 0; i < at.size(); i += 2) {
            const SimTime d = at[i];
            const bool recovers = i + 1 < at.size();
            if (recovers && at[i + 1] < d + dt) ++suppressed;
            else expected_downs.push_back(d + dt);
        }
        REQUIRE(b.rec.downs.size() == expected_downs.size());
        for (std::size_t i = 0; i < expected_downs.size(); ++i) CHECK(b.rec.downs[i].second == expected_downs[i]);
        CHECK(b.rec.recovered.size() == suppressed);
        std::size_t eps = 0;
        for (const auto& e : b.verdicts.episodes()) eps += e.suppressed();
        CHECK(eps == suppressed);
        CHECK(b.verdicts.visible_breaks() == expected_downs.size());
    }
}

TEST_CASE("property: LD and SSLD produce identical break times") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        RngStream r(seed, "ld-ssld");
        std::vector<SimTime> at;
        SimTime t = 0_s;
        for (int i = 0; i < 15; ++i) {
            t += SimTime::from_ms(r.uniform_int(1, 2000));
            at.push_back(t);
        }
        HeuristicConfig ssld;
        ssld.kind = HeuristicKind::SSLD;
        Bench a(HeuristicConfig{}), s(ssld);
        a.flips(at);
        s.flips(at);
        a.engine.run_until(t + 1_s);
        s.engine.run_until(t + 1_s);
        CHECK(a.rec.downs == s.rec.downs);
        CHECK(a.rec.ups == s.rec.ups);
    }
}

TEST_CASE("quadrant mapping") {
    CHECK(stability_class(Level::Low, Level::Low) == StabilityClass::Robust);
    CHECK(stability_class(Level::Low, Level::High) == StabilityClass::RuleOut);
    CHECK(stability_class(Level::High, Level::Low) == StabilityClass::GroupStable);
    CHECK(stability_class(Level::High, Level::High) == StabilityClass::Volatile);
    HeuristicConfig c;
    c.ssld_nds_threshold = 0.5;
    c.ssld_alb_threshold = 0.1;
    CHECK(classify_levels(0.0, 0.0, c) == StabilityClass::Robust);
    CHECK(classify_levels(0.5, 0.0, c) == StabilityClass::GroupStable);
    CHECK(classify_levels(0.49, 0.1, c) == StabilityClass::RuleOut);
    CHECK(classify_levels(2.0, 0.3, c) == StabilityClass::Volatile);
    CHECK(successor_eligible(StabilityClass::Robust));
    CHECK(successor_eligible(StabilityClass::GroupStable));
    CHECK_FALSE(successor_eligible(StabilityClass::RuleOut));
    CHECK_FALSE(successor_eligible(StabilityClass::Volatile));
    CHECK(successor_eligible(StabilityClass::Volatile, false));
}

TEST_CASE("SSLD classifier reads windowed metrics") {
    HeuristicConfig c;
    c.kind = HeuristicKind::SSLD;
    c.ssld_window = 10_s;
    MetricsConfig mc;
    mc.nds_interval = 1_s;
    mc.alb_window = 10_s;
    MetricsCollector m(4, mc);
    for (NodeId j = 1; j < 4; ++j) m.on_link_event({0, j}, LinkEventKind::Up, 0_s);
    m.on_link_event({0, 1}, LinkEventKind::Down, 3_s);
    m.on_link_event({0, 2}, LinkEventKind::Down, 6_s);
    for (SimTime t = 0_s; t <= 12_s; t += 1_s) m.sample_all(t);
    CHECK(ssld_classify(m, 0, 5_s, c) == StabilityClass::Robust);  // less than a window of history
    // Two breaks in 10 s -> ALB 0.2 (High); |NDS| mean over 10 samples 0.2 (Low).
    CHECK(ssld_classify(m, 0, 12_s, c) == StabilityClass::RuleOut);
    CHECK(ssld_classify(m, 3, 12_s, c) == StabilityClass::Robust);
}

TEST_CASE("episodes csv") {
    Bench b(rld(1_s));
    b.flips({10_s, 10400_ms, 20_s});
    b.engine.run_until(30_s);
    std::ostringstream out;
    write_episodes_csv(out, b.verdicts.episodes(), HeuristicKind::RLD);
    CHECK(out.str() ==
          "link,phys_down_ms,phys_up_ms,verdict_down_ms,heuristic\n"
          "0-1,10000.000,10400.000,suppressed,RLD\n"
          "0-1,20000.000,never,21000.000,RLD\n");
}
