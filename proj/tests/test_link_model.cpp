#include "mobisim/link_model.hpp"
#include "mobisim/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mobisim;

TEST_CASE("snr at the reference distance and by formula") {
    RadioConfig cfg;
    cfg.ref_snr_db = 60;
    CHECK(snr_db(1.0, cfg) == doctest::Approx(60.0));
    cfg.pathloss_exp = 2;
    CHECK(snr_db(10.0, cfg) == doctest::Approx(40.0));
    CHECK(snr_db(0.0, cfg) == doctest::Approx(60.0));  // clamped at 1 m
}

TEST_CASE("property: snr is nonincreasing in distance") {
    RadioConfig cfg;
    RngStream r(5, "snr");
    for (int i = 0; i < 1000; ++i) {
        const double a = r.uniform(0, 500), b = r.uniform(0, 500);
        CHECK(snr_db(std::min(a, b), cfg) >= snr_db(std::max(a, b), cfg));
    }
}

TEST_CASE("unit-disk predicate: coincident, closed boundary, far") {
    RadioConfig cfg;
    cfg.range_m = 50;
    CHECK(phys_link_up(Vec2{1, 1}, Vec2{1, 1}, cfg));
    CHECK(phys_link_up(Vec2{0, 0}, Vec2{50, 0}, cfg));
    CHECK(phys_link_up(Vec2{0, 0}, Vec2{30, 40}, cfg));
    CHECK_FALSE(phys_link_up(Vec2{0, 0}, Vec2{100, 0}, cfg));
    CHECK_FALSE(phys_link_up(Vec2{0, 0}, Vec2{50.000001, 0}, cfg));
}

TEST_CASE("property: symmetry and threshold equivalence") {
    RadioConfig disk;
    disk.range_m = 50;
    RadioConfig snr = disk;
    snr.snr_threshold_db = disk.ref_snr_db - 10.0 * disk.pathloss_exp * std::log10(disk.range_m);
    CHECK(link_range(snr) == doctest::Approx(50.0));
    RngStream r(8, "links");
    int agree = 0;
    for (int i = 0; i < 2000; ++i) {
        const Vec2 a{r.uniform(0, 120), r.uniform(0, 120)}, b{r.uniform(0, 120), r.uniform(0, 120)};
        CHECK(phys_link_up(a, b, disk) == phys_link_up(b, a, disk));
        // Away from float noise at the boundary the two forms must agree.
        if (std::abs(distance(a, b) - 50.0) > 1e-9) {
            CHECK(phys_link_up(a, b, disk) == phys_link_up(a, b, snr));
            CHECK(phys_link_up(a, b, disk) == (snr_db(distance(a, b), snr) >= *snr.snr_threshold_db));
            ++agree;
        }
    }
    CHECK(agree > 1900);
}

TEST_CASE("classify_length") {
    RadioConfig cfg;
    cfg.range_m = 100;
    cfg.short_link_fraction = 0.5;
    CHECK(classify_length(30, cfg) == LinkLength::Short);
    CHECK(classify_length(50, cfg) == LinkLength::Short);
    CHECK(classify_length(80, cfg) == LinkLength::Long);
    CHECK_THROWS_AS(classify_length(120, cfg), std::domain_error);
}

TEST_CASE("property: a short link survives any single-node displacement below (1-beta)R") {
    RadioConfig cfg;
    cfg.range_m = 50;
    cfg.short_link_fraction = 0.5;
    RngStream r(13, "short-tolerance");
    for (int i = 0; i < 2000; ++i) {
        const Vec2 a{r.uniform(-100, 100), r.uniform(-100, 100)};
        const double d = r.uniform(0, 25.0);
        const double th = r.uniform(0, 2 * std::numbers::pi);
        const Vec2 b = a + Vec2{d * std::cos(th), d * std::sin(th)};
        REQUIRE(classify_length(distance(a, b), cfg) == LinkLength::Short);
        const double m = r.uniform(0, 25.0 - 1e-9);
        const double phi = r.uniform(0, 2 * std::numbers::pi);
        CHECK(phys_link_up(a, b + Vec2{m * std::cos(phi), m * std::sin(phi)}, cfg));
    }
}

TEST_CASE("radio config validation") {
    RadioConfig cfg;
    cfg.pathloss_exp = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RadioConfig{};
    cfg.short_link_fraction = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = RadioConfig{};
    cfg.range_m = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("link table indexing and neighbor queries") {
    LinkTable t(5);
    CHECK(t.all().size() == 10);
    for (NodeId a = 0; a < 5; ++a)
        for (NodeId b = a + 1; b < 5; ++b) CHECK(t.at(NodePair{a, b}).endpoints == NodePair{a, b});
    CHECK(NodePair{3, 1} == NodePair{1, 3});
    t.at(NodePair{1, 3}).phys_up = true;
    t.at(NodePair{1, 3}).verdict = VerdictKind::Up;
    t.at(NodePair{1, 4}).verdict = VerdictKind::TentativeDown;
    CHECK(t.phys_neighbors(1) == std::vector<NodeId>{3});
    CHECK(t.visible_neighbors(1) == std::vector<NodeId>{3, 4});
    CHECK(t.visible(4, 1));
    CHECK_FALSE(t.visible(0, 1));
    CHECK_THROWS_AS(t.at(NodePair{2, 2}), SimError);
}
