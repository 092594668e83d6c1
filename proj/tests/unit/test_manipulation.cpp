#include <doctest.h>

#include "fixtures.hpp"
#include "random_scene.hpp"
#include "vlc/io.hpp"
#include "vlc/manipulation.hpp"

using namespace vlc;
using namespace vlc::manip;
using geometry::Point2;

namespace {

Morphology small() {
    Morphology m;
    m.scene.bounds = {{-5, -5}, {25, 25}};
    m.scene.corridors = {{"c0", {0, 0}, {10, 0}, 2.0, 3.0}, {"c1", {10, 0}, {10, 10}, 4.0, 3.0}};
    m.scene.obstacles = {{"o1", testing::box({5, 0.5}, 0.5, 0.5), 1.0, "seat", true},
                         {"pillar", testing::box({9, 8}, 0.5, 0.5), 3.0, "column", false}};
    m.scene.walls = {{"w1", testing::box({5, 1.5}, 4.0, 0.2), true}};
    m.path.vertices = {{0, 0}, {10, 0}, {10, 10}};
    return m;
}

OperatorContext context() {
    OperatorContext ctx;
    return ctx;
}

std::string log_text(const ChangeLog& log) {
    return io::to_json(log).dump();
}

} // namespace

TEST_CASE("primitive edits") {
    auto m = small();
    apply_edit(m, MoveObstacle{"o1", {1.0, 0.0}});
    CHECK(geometry::centroid(m.scene.obstacles[0].footprint).x == doctest::Approx(6.0));
    apply_edit(m, RemoveObstacle{"o1"});
    CHECK(m.scene.obstacles.size() == 1);
    apply_edit(m, InsertObstacle{{"n", testing::box({2, 0}, 0.4, 0.4), 1.0, "", true}});
    CHECK(m.scene.obstacles.back().id == "n");
    apply_edit(m, SetCorridorSize{"c1", 3.0, 2.8});
    CHECK(m.scene.corridors[1].width == 3.0);
    apply_edit(m, RemoveWall{"w1"});
    CHECK(m.scene.walls.empty());
    apply_edit(m, MovePathVertex{1, {9, 1}});
    CHECK(m.path.vertices[1] == Point2{9, 1});
    CHECK(m.scene.corridors[0].b == Point2{9, 1});
    CHECK(m.scene.corridors[1].a == Point2{9, 1});

    try {
        apply_edit(m, RemoveObstacle{"ghost"});
        FAIL("expected NotFound");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotFound);
    }
    CHECK_THROWS_AS(apply_edit(m, MovePathVertex{7, {0, 0}}), Error);
}

TEST_CASE("removing a path vertex merges its corridors by length") {
    auto m = small();
    apply_edit(m, RemovePathVertex{1});
    REQUIRE(m.path.vertices.size() == 2);
    REQUIRE(m.scene.corridors.size() == 1);
    // equal lengths: mean of 2 and 4
    CHECK(m.scene.corridors[0].width == doctest::Approx(3.0));
    CHECK(m.scene.corridors[0].a == Point2{0, 0});
    CHECK(m.scene.corridors[0].b == Point2{10, 10});
}

TEST_CASE("replay applies a log in order") {
    const auto m0 = small();
    ChangeLog log{{"t", MoveObstacle{"o1", {0.5, 0}}}, {"t", SetCorridorSize{"c0", 2.5, 3}},
                  {"t", RemoveWall{"w1"}}};
    auto m = m0;
    for (const auto& s : log) {
        apply_edit(m, s.edit);
    }
    CHECK(replay(m0, log) == m);
}

TEST_CASE("constraint violations") {
    const auto m0 = small();
    ConstraintSet c;
    CHECK(violations(m0, m0, c) == 0);
    auto m = m0;
    apply_edit(m, MovePathVertex{0, {1, 0}});
    CHECK(violations(m, m0, c) >= 1);
    m = m0;
    apply_edit(m, SetCorridorSize{"c0", 0.5, 3});
    CHECK(violations(m, m0, c) == 1);
    m = m0;
    apply_edit(m, RemoveObstacle{"pillar"});
    CHECK(violations(m, m0, c) == 1);
    c.immovable_tags = {"seat"};
    CHECK_FALSE(is_movable(m0.scene.obstacles[0], c));
    c = {};
    c.max_objects = 1;
    CHECK(violations(m0, m0, c) == 1);

    ConstraintSet bad;
    bad.min_width = 5;
    bad.max_width = 4;
    CHECK_THROWS_AS(check_feasible(bad, m0), Error);
}

TEST_CASE("operators are identities when the attribute already sits at the target") {
    const auto doc = testing::load_fixture("old_parkland");
    const auto m0 = testing::morphology_of(doc);
    const auto ctx = context();
    std::mt19937_64 rng(1);
    for (const auto a : scale::kAllAttributes) {
        CAPTURE(scale::to_string(a));
        auto m = m0;
        ChangeLog log;
        const int cls = probe(m, a, ctx).cls.value();
        std::size_t n = 0;
        switch (a) {
        case Attribute::Rotation:
            n = op_rotation_simplify(m, log, cls, ctx);
            break;
        case Attribute::Size:
            n = op_size_fit(m, log, cls, ctx);
            break;
        case Attribute::Visibility:
            n = op_visibility_step(m, log, cls, ctx);
            break;
        case Attribute::Symmetry:
            n = op_symmetrize(m, log, cls, rng, ctx);
            break;
        case Attribute::Clutter:
            n = op_clutter_adjust(m, log, cls, rng, ctx);
            break;
        case Attribute::Order:
            n = op_order_impose(m, log, cls, rng, ctx);
            break;
        }
        CHECK(n == 0);
        CHECK(log.empty());
        CHECK(m == m0);
    }
}

TEST_CASE("operators move their attribute toward the target") {
    const auto doc = testing::load_fixture("old_parkland");
    const auto m0 = testing::morphology_of(doc);
    const auto ctx = context();
    std::mt19937_64 rng(7);

    SUBCASE("size: widen narrow corridors") {
        auto m = m0;
        ChangeLog log;
        CHECK(op_size_fit(m, log, 1, ctx) > 0);
        CHECK(probe(m, Attribute::Size, ctx).cls.value() == 1);
        CHECK(replay(m0, log) == m);
    }
    SUBCASE("clutter: remove objects") {
        auto m = m0;
        ChangeLog log;
        CHECK(op_clutter_adjust(m, log, 3, rng, ctx) > 0);
        CHECK(probe(m, Attribute::Clutter, ctx).cls.value() <= 3);
        CHECK(m.scene.obstacles.size() < m0.scene.obstacles.size());
        CHECK(violations(m, m0, ctx.constraints) == 0);
    }
    SUBCASE("clutter: add objects") {
        // the old layout's 1.4 m corridors have no free slot left, the new one does
        const auto n0 = testing::morphology_of(testing::load_fixture("new_parkland"));
        auto m = n0;
        ChangeLog log;
        const int before = probe(m, Attribute::Clutter, ctx).cls.value();
        CHECK(op_clutter_adjust(m, log, 4, rng, ctx) > 0);
        CHECK(probe(m, Attribute::Clutter, ctx).cls.value() > before);
        CHECK(replay(n0, log) == m);
    }
    SUBCASE("visibility: open walls") {
        const auto l = testing::morphology_of(testing::load_fixture("l_corridor"));
        auto m = l;
        ChangeLog log;
        const int before = probe(m, Attribute::Visibility, ctx).cls.value();
        op_visibility_step(m, log, 1, ctx);
        CHECK(probe(m, Attribute::Visibility, ctx).cls.value() < before);
    }
    SUBCASE("order: impose a template") {
        auto m = m0;
        ChangeLog log;
        const int before = probe(m, Attribute::Order, ctx).cls.value();
        CHECK(op_order_impose(m, log, 1, rng, ctx) > 0);
        CHECK(probe(m, Attribute::Order, ctx).cls.value() < before);
        CHECK(replay(m0, log) == m);
    }
    SUBCASE("symmetry: mirror partners") {
        auto m = m0;
        ChangeLog log;
        const double before = probe(m, Attribute::Symmetry, ctx).score;
        op_symmetrize(m, log, 1, rng, ctx);
        CHECK(probe(m, Attribute::Symmetry, ctx).score <= before);
    }
}

TEST_CASE("rotation simplification drops small kinks in open space") {
    Morphology m;
    m.scene.bounds = {{-5, -10}, {40, 10}};
    m.path.vertices = {{0, 0}, {10, 0}, {12, 1}, {14, 0}, {30, 0}};
    for (std::size_t i = 0; i + 1 < m.path.vertices.size(); ++i) {
        m.scene.corridors.push_back({"c" + std::to_string(i), m.path.vertices[i], m.path.vertices[i + 1], 3.0, 3.0});
    }
    const auto ctx = context();
    const double before = probe(m, Attribute::Rotation, ctx).score;
    ChangeLog log;
    const auto m0 = m;
    CHECK(op_rotation_simplify(m, log, 1, ctx) > 0);
    CHECK(probe(m, Attribute::Rotation, ctx).score < before);
    CHECK(m.path.vertices.front() == m0.path.vertices.front());
    CHECK(m.path.vertices.back() == m0.path.vertices.back());
    CHECK(replay(m0, log) == m);
}

TEST_CASE("manipulate validates its request") {
    const auto m = testing::morphology_of(testing::load_fixture("l_corridor"));
    const scale::ScaleConfig config;
    auto code = [&](const auto& req) {
        try {
            if constexpr (std::is_same_v<std::decay_t<decltype(req)>, SegmentRequest>) {
                (void)manipulate_segment(m, req, config);
            } else {
                (void)manipulate(m, req, config);
            }
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::NotFound;
    };
    ManipulationRequest r;
    r.target_class = 0;
    CHECK(code(r) == ErrorCode::ValidationError);
    r = {};
    r.budget = 0;
    CHECK(code(r) == ErrorCode::ValidationError);
    r = {};
    r.attributes.clear();
    CHECK(code(r) == ErrorCode::ValidationError);
    r = {};
    r.segments = {9};
    CHECK(code(r) == ErrorCode::ValidationError);
    r = {};
    r.constraints.min_width = 4;
    r.constraints.max_width = 3;
    CHECK(code(r) == ErrorCode::InfeasibleRequest);

    SegmentRequest s;
    s.segment = 5;
    CHECK(code(s) == ErrorCode::ValidationError);
    const auto single = testing::morphology_of(testing::load_fixture("empty_corridor"));
    s = {};
    s.segment_target = 4;
    s.overall_target = 2;
    CHECK_THROWS_AS(manipulate_segment(single, s, config), Error);
}

TEST_CASE("manipulation results are deterministic, valid and replayable") {
    const auto m0 = testing::morphology_of(testing::load_fixture("old_parkland"));
    const scale::ScaleConfig config;
    ManipulationRequest req;
    req.budget = 400;
    const auto a = manipulate(m0, req, config);
    const auto b = manipulate(m0, req, config);
    CHECK(log_text(a.log) == log_text(b.log));
    CHECK(a.morphology == b.morphology);
    CHECK(replay(m0, a.log) == a.morphology);
    CHECK(replay(m0, io::change_log_from_json(io::to_json(a.log))) == a.morphology);
    CHECK(violations(a.morphology, m0, req.constraints) == 0);
    CHECK(a.evaluations <= req.budget + kChildren);

    // the embedded after-report is the report of the returned morphology
    const auto fresh = scale::identify(a.morphology.scene, a.morphology.path, config);
    CHECK(fresh.aggregate_mean == doctest::Approx(a.after.aggregate_mean));
    for (const auto attr : scale::kAllAttributes) {
        CHECK(fresh[attr].score == doctest::Approx(a.after[attr].score));
    }

    for (std::size_t i = 1; i < a.history.size(); ++i) {
        CHECK(a.history[i].best_objective <= a.history[i - 1].best_objective);
    }
}

TEST_CASE("a different seed may take a different route but stays valid") {
    const auto m0 = testing::morphology_of(testing::load_fixture("old_parkland"));
    ManipulationRequest req;
    req.seed = 7;
    req.budget = 300;
    req.constraints.immovable_tags = {"furniture"};
    const auto r = manipulate(m0, req, {});
    CHECK(violations(r.morphology, m0, req.constraints) == 0);
    for (const auto& step : r.log) {
        if (const auto* rm = std::get_if<RemoveObstacle>(&step.edit)) {
            CHECK(rm->id.rfind("ins-", 0) == 0);
        }
    }
}

TEST_CASE("restricting attributes leaves the others untouched") {
    const auto m0 = testing::morphology_of(testing::load_fixture("old_parkland"));
    ManipulationRequest req;
    req.attributes = {Attribute::Size};
    req.budget = 200;
    const auto r = manipulate(m0, req, {});
    for (const auto& step : r.log) {
        CHECK((step.op == "size_fit" || step.op == "repair"));
    }
}

TEST_CASE("a stop request ends the search early") {
    const auto m0 = testing::morphology_of(testing::load_fixture("old_parkland"));
    std::stop_source stop;
    stop.request_stop();
    ManipulationRequest req;
    req.target_class = 1;
    const auto r = manipulate(m0, req, {}, stop.get_token());
    CHECK(r.evaluations <= 1 + kChildren);
    CHECK(replay(m0, r.log) == r.morphology);
}

TEST_CASE("visibility search reaches a lower class by opening walls") {
    const auto m0 = testing::morphology_of(testing::load_fixture("l_corridor"));
    const auto ctx = context();
    const auto r = op_visibility_search(m0, 1, ctx, 42, 300);
    CHECK(r.after[Attribute::Visibility].cls.value() < r.before[Attribute::Visibility].cls.value());
    CHECK(replay(m0, r.log) == r.morphology);
}
