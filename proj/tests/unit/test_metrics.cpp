#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_scene.hpp"
#include "vlc/scale.hpp"

#include <cmath>

using namespace vlc;
using namespace vlc::geometry;
using namespace vlc::metrics;

namespace {

struct Straight {
    Scene scene;
    NavPath path;
};

// 10 m x 2 m corridor along the x axis.
Straight straight(std::vector<Obstacle> obstacles = {}) {
    Straight s;
    s.scene.bounds = {{-5, -5}, {15, 5}};
    s.scene.corridors.push_back({"c0", {0, 0}, {10, 0}, 2.0, 3.0});
    s.scene.obstacles = std::move(obstacles);
    s.path = make_nav_path(s.scene, Polyline{{{0, 0}, {10, 0}}});
    return s;
}

Obstacle square(const std::string& id, Point2 c, double side) {
    return {id, testing::box(c, side, side), 1.0, "", true};
}

} // namespace

TEST_CASE("rotation counts turns above the threshold and accumulates all angles") {
    const auto doc = testing::load_fixture("l_corridor");
    const auto path = testing::nav_of(doc);
    const auto r = rotation_metric(path);
    CHECK(r.turn_count == 1);
    CHECK(r.accumulated_degrees == doctest::Approx(90.0));
    CHECK(rotation_metric(path, 0).accumulated_degrees == doctest::Approx(90.0));
    CHECK(rotation_metric(path, 1).accumulated_degrees == doctest::Approx(0.0));
    CHECK(rotation_metric(testing::nav_of(testing::load_fixture("zigzag"))).turn_count == 3);
}

TEST_CASE("size is the length-weighted corridor cross-section") {
    Scene s;
    s.bounds = {{-5, -5}, {40, 5}};
    s.corridors.push_back({"a", {0, 0}, {10, 0}, 2.0, 3.0});
    s.corridors.push_back({"b", {10, 0}, {40, 0}, 4.0, 5.0});
    const auto path = make_nav_path(s, Polyline{{{0, 0}, {10, 0}, {40, 0}}});
    const auto m = size_metric(s, path);
    CHECK(m.mean_width == doctest::Approx(3.5));
    CHECK(m.mean_height == doctest::Approx(4.5));

    s.corridors.pop_back();
    const auto broken = make_nav_path(s, Polyline{{{0, 0}, {10, 0}, {40, 0}}});
    try {
        (void)size_metric(s, broken);
        FAIL("expected MissingCorridor");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingCorridor);
    }
}

TEST_CASE("visibility on the simple fixtures matches the raster oracle") {
    for (const char* name : {"empty_corridor", "l_corridor", "zigzag"}) {
        CAPTURE(name);
        const auto doc = testing::load_fixture(name);
        const auto path = testing::nav_of(doc);
        const auto v = visibility_metric(doc.scene, path);
        CHECK(v.visible_fraction == doctest::Approx(oracle::visibility(doc.scene, path, 1.0).fraction).epsilon(0.02));
    }
    // frozen from the oracle: 11 of 20 samples see the end of the L
    const auto doc = testing::load_fixture("l_corridor");
    CHECK(visibility_metric(doc.scene, testing::nav_of(doc)).visible_fraction == doctest::Approx(0.55));
}

TEST_CASE("remaining-path visibility is never below the endpoint-only value on a straight corridor") {
    auto s = straight({square("o", {5, 0.5}, 0.5)});
    const auto e = visibility_metric(s.scene, s.path, 1.0, VisibilityMode::Endpoint);
    const auto r = visibility_metric(s.scene, s.path, 1.0, VisibilityMode::RemainingPath);
    CHECK(e.visible_fraction == doctest::Approx(1.0));
    CHECK(r.visible_fraction == doctest::Approx(1.0));
    auto blocked = straight({square("o", {4.5, 0}, 0.5)});
    CHECK(visibility_metric(blocked.scene, blocked.path).visible_fraction == doctest::Approx(0.5));
}

TEST_CASE("clutter is obstacle area over band area") {
    auto s = straight({square("o", {5, 0}, 1.0)});
    CHECK(clutter_metric(s.scene, s.path).coverage_fraction == doctest::Approx(0.05));
    // half outside the band counts half
    auto edge = straight({square("o", {5, 1.0}, 1.0)});
    CHECK(clutter_metric(edge.scene, edge.path).coverage_fraction == doctest::Approx(0.025));
    CHECK(clutter_metric(straight().scene, straight().path).coverage_fraction == doctest::Approx(0.0));
}

TEST_CASE("symmetry of mirrored and lopsided layouts") {
    auto pair = straight({square("a", {3, 0.6}, 0.5), square("b", {3, -0.6}, 0.5)});
    CHECK(symmetry_metric(pair.scene, pair.path).best_score == doctest::Approx(1.0));
    auto lopsided = straight({square("a", {3, 0.6}, 0.6), {"b", testing::box({7, -0.5}, 1.5, 0.3, 0.4), 1.0, "", true}});
    const double s = symmetry_metric(lopsided.scene, lopsided.path).best_score;
    CHECK(s < 0.9);
    CHECK(s == doctest::Approx(oracle::symmetry(lopsided.scene, lopsided.path).score).epsilon(0.01));
    CHECK(symmetry_metric(straight().scene, straight().path).best_score == doctest::Approx(1.0));
}

TEST_CASE("template fits recognise lines, grids and circles") {
    const double tol = kDefaultResidualTolerance;
    std::vector<Point2> line;
    for (int i = 0; i < 8; ++i) {
        line.push_back({1.3 * i, 0.5 * i});
    }
    const auto fl = fit_order_templates(line, tol, {1, 0});
    CHECK(fl.ordered == line.size());

    std::vector<Point2> grid;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 3; ++j) {
            grid.push_back(Point2{1.5 * i, 1.5 * j} + Point2{0.02 * ((i + j) % 2), 0.0});
        }
    }
    const auto fg = fit_order_templates(grid, tol, {1, 0});
    CHECK(fg.kind == OrderTemplate::Grid);
    CHECK(fg.ordered == grid.size());

    std::vector<Point2> circle;
    for (int i = 0; i < 9; ++i) {
        const double a = 0.5 + i * 0.6;
        circle.push_back({4 + 3 * std::cos(a), -2 + 3 * std::sin(a)});
    }
    const auto fc = fit_order_templates(circle, tol, {1, 0});
    CHECK(fc.kind == OrderTemplate::Circle);
    CHECK(fc.ordered == circle.size());
    CHECK(fc.radius == doctest::Approx(3.0).epsilon(0.01));

    CHECK(fit_order_templates(std::vector<Point2>{}, tol, {1, 0}).ordered == 0);
    CHECK_THROWS_AS(fit_order_templates(line, 0.0, {1, 0}), Error);
}

TEST_CASE("a fit's ordered count equals the points within tolerance of its nearest template position") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
        std::mt19937_64 rng(seed);
        std::vector<Point2> pts;
        const int n = std::uniform_int_distribution<int>(3, 14)(rng);
        for (int i = 0; i < n; ++i) {
            if (i % 3 == 0) {
                pts.push_back({testing::uniform(rng, 0, 8), testing::uniform(rng, 0, 4)});
            } else {
                pts.push_back({1.2 * (i % 5), 1.2 * (i / 5)});
            }
        }
        const auto fit = fit_order_templates(pts, kDefaultResidualTolerance, {1, 0});
        std::size_t within = 0;
        for (const Point2 p : pts) {
            within += distance(p, fit.nearest(p)) <= kDefaultResidualTolerance + 1e-9 ? 1 : 0;
        }
        CAPTURE(seed);
        CHECK(within == fit.ordered);
    }
}

TEST_CASE("order fraction per fixture and empty scenes") {
    CHECK(order_metric(straight().scene, straight().path).ordered_fraction == doctest::Approx(1.0));
    const auto doc = testing::load_fixture("new_parkland");
    const auto om = order_metric(doc.scene, testing::nav_of(doc));
    CHECK(om.per_segment_fractions[1] == doctest::Approx(1.0));
    CHECK(om.per_segment_templates[1] == OrderTemplate::Grid);
}

TEST_CASE("the memo cache never changes a result") {
    for (const char* name : testing::kFixtures) {
        CAPTURE(name);
        const auto doc = testing::load_fixture(name);
        const auto path = testing::nav_of(doc);
        MetricCache cache;
        for (int pass = 0; pass < 2; ++pass) {
            CHECK(symmetry_metric(doc.scene, path, &cache).best_score == symmetry_metric(doc.scene, path).best_score);
            CHECK(clutter_metric(doc.scene, path, &cache).coverage_fraction ==
                  clutter_metric(doc.scene, path).coverage_fraction);
            CHECK(order_metric(doc.scene, path, kDefaultResidualTolerance, &cache).ordered_fraction ==
                  order_metric(doc.scene, path).ordered_fraction);
        }
        CHECK(cache.hits() > 0);
    }
}

TEST_CASE("evaluate_attribute agrees with identify for every attribute and segment") {
    const scale::ScaleConfig config;
    for (const char* name : testing::kFixtures) {
        CAPTURE(name);
        const auto doc = testing::load_fixture(name);
        const auto path = testing::nav_of(doc);
        const auto report = scale::identify(doc.scene, path, config);
        for (const auto a : scale::kAllAttributes) {
            CAPTURE(scale::to_string(a));
            const auto whole = scale::evaluate_attribute(doc.scene, path, a, std::nullopt, config);
            CHECK(whole.score == doctest::Approx(report[a].score));
            CHECK(whole.cls == report[a].cls);
            for (std::size_t s = 0; s < path.segments.size(); ++s) {
                const auto seg = scale::evaluate_attribute(doc.scene, path, a, s, config);
                CHECK(seg.cls == report.segments[s].attributes[scale::index_of(a)].cls);
            }
        }
    }
}

TEST_CASE("fixture classes") {
    // frozen from the raster oracles and the scale arithmetic
    const std::vector<std::pair<const char*, int>> expected{
        {"empty_corridor", 1}, {"l_corridor", 2}, {"zigzag", 2}, {"old_parkland", 4}, {"new_parkland", 2}};
    for (const auto& [name, cls] : expected) {
        CAPTURE(name);
        const auto doc = testing::load_fixture(name);
        CHECK(scale::identify(doc.scene, doc.paths.front().line, {}).overall_class.value() == cls);
    }
}
