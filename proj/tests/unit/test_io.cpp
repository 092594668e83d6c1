#include <doctest.h>

#include "fixtures.hpp"
#include "vlc/io.hpp"

using namespace vlc;
using io::json;

namespace {

json minimal() {
    return json::parse(R"({
        "format_version": "1",
        "units": "meters",
        "bounds": {"min": [0, 0], "max": [20, 10]},
        "walls": [],
        "obstacles": [],
        "corridors": [{"id": "c0", "axis": [[1, 5], [19, 5]], "width": 2.0, "height": 3.0}],
        "paths": [{"name": "main", "vertices": [[1, 5], [19, 5]]}]
    })");
}

Error error_of(const json& j) {
    try {
        (void)io::scene_from_json(j);
    } catch (const Error& e) {
        return e;
    }
    return Error(ErrorCode::NotFound, "no error");
}

} // namespace

TEST_CASE("minimal scene document loads") {
    const auto doc = io::scene_from_json(minimal());
    CHECK(doc.scene.corridors.size() == 1);
    CHECK(doc.path("main").line.vertices.size() == 2);
    CHECK_THROWS_AS((void)doc.path("other"), Error);
}

TEST_CASE("schema errors carry a JSON pointer") {
    json j = minimal();
    j.erase("units");
    const Error e = error_of(j);
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.pointer() == "/units");

    j = minimal();
    j["format_version"] = "7";
    CHECK(error_of(j).code() == ErrorCode::ParseError);

    j = minimal();
    j["corridors"][0]["width"] = "wide";
    CHECK(error_of(j).pointer() == "/corridors/0/width");

    CHECK_THROWS_AS(io::parse_scene("{not json"), Error);
}

TEST_CASE("self-intersecting wall is a validation error naming the wall") {
    json j = minimal();
    j["walls"].push_back({{"id", "bowtie"}, {"ring", {{2, 2}, {4, 4}, {4, 2}, {2, 4}}}});
    const Error e = error_of(j);
    CHECK(e.code() == ErrorCode::ValidationError);
    CHECK(std::string(e.what()).find("bowtie") != std::string::npos);
}

TEST_CASE("load, save, load is the identity") {
    for (const char* name : testing::kFixtures) {
        CAPTURE(name);
        const auto doc = testing::load_fixture(name);
        const auto again = io::parse_scene(io::pretty(io::to_json(doc)));
        CHECK(again == doc);
        CHECK(io::scene_hash(again) == io::scene_hash(doc));
    }
}

TEST_CASE("scene hash changes with any coordinate") {
    auto doc = testing::load_fixture("l_corridor");
    const auto before = io::scene_hash(doc);
    doc.paths.front().line.vertices[1].x += 1e-9;
    CHECK(io::scene_hash(doc) != before);
}

TEST_CASE("config round trip and hash") {
    scale::ScaleConfig c;
    c.weights[2] = 2.0;
    c.visibility_mode = metrics::VisibilityMode::RemainingPath;
    const auto back = io::config_from_json(io::to_json(c));
    CHECK(io::config_hash(back) == io::config_hash(c));
    CHECK(io::config_hash(back) != io::config_hash(scale::ScaleConfig{}));
    CHECK_THROWS_AS(io::parse_config(R"({"bin_edges": [0.5, 0.4, 0.6, 0.8]})"), Error);
}

TEST_CASE("report document carries provenance") {
    const auto doc = testing::load_fixture("empty_corridor");
    const auto report = scale::identify(doc.scene, doc.paths.front().line, {});
    const auto j = io::report_document(report, {io::config_hash({}), io::scene_hash(doc), "0.1.0", {}});
    CHECK(j["report"]["overall_class"] == 1);
    CHECK(j["provenance"]["scene_hash"] == io::scene_hash(doc));
    CHECK(j["provenance"]["timestamp"].is_null());
    CHECK(j["report"]["segments"].size() == 1);
}

TEST_CASE("timestamps honour an override") {
    CHECK(io::timestamp_now("2020-01-01T00:00:00Z") == "2020-01-01T00:00:00Z");
    CHECK(io::timestamp_now().size() == 20);
}

TEST_CASE("change logs survive JSON") {
    manip::ChangeLog log;
    log.push_back({"a", manip::RemoveObstacle{"o1"}});
    log.push_back({"b", manip::InsertObstacle{{"n", geometry::Polygon({{0, 0}, {1, 0}, {1, 1}}), 1.5, "t", false}}});
    log.push_back({"c", manip::MoveObstacle{"o2", {0.25, -1.0}}});
    log.push_back({"d", manip::ReplaceObstacle{"o3", geometry::Polygon({{0, 0}, {2, 0}, {2, 1}, {0, 1}})}});
    log.push_back({"e", manip::SetCorridorSize{"c0", 2.5, 3.1}});
    log.push_back({"f", manip::MovePathVertex{2, {1.0 / 3.0, 7.0}}});
    log.push_back({"g", manip::RemovePathVertex{1}});
    log.push_back({"h", manip::RemoveWall{"w"}});
    log.push_back({"i", manip::InsertWall{{"w2", geometry::Polygon({{0, 0}, {1, 0}, {1, 1}}), true}}});
    const auto back = io::change_log_from_json(json::parse(io::to_json(log).dump()));
    REQUIRE(back.size() == log.size());
    for (std::size_t i = 0; i < log.size(); ++i) {
        CHECK(back[i].op == log[i].op);
        CHECK(io::to_json(back[i].edit) == io::to_json(log[i].edit));
        CHECK(back[i].edit.index() == log[i].edit.index());
    }
    CHECK_THROWS_AS(io::edit_from_json(json{{"type", "teleport"}}), Error);
}

TEST_CASE("request JSON selects global or segment mode") {
    const auto global = io::request_from_json(json::parse(R"({"target_class": 2, "attributes": ["clutter", "order"]})"));
    REQUIRE(std::holds_alternative<manip::ManipulationRequest>(global));
    const auto& g = std::get<manip::ManipulationRequest>(global);
    CHECK(g.target_class == 2.0);
    CHECK(g.attributes.size() == 2);
    CHECK(g.seed == 42);
    CHECK(g.budget == 5000);

    const auto seg = io::request_from_json(
        json::parse(R"({"segment": 1, "attribute": "clutter", "target_class": 4, "constraints": {"min_width": 2}})"));
    REQUIRE(std::holds_alternative<manip::SegmentRequest>(seg));
    const auto& s = std::get<manip::SegmentRequest>(seg);
    CHECK(s.segment == 1);
    CHECK(s.segment_target == 4.0);
    CHECK(s.overall_target == 3.0);
    CHECK(s.constraints.min_width == 2.0);
    CHECK(io::request_from_json(io::to_json(seg)).index() == 1);

    CHECK_THROWS_AS(io::request_from_json(json::parse(R"({"attributes": ["mood"]})")), Error);
    CHECK_THROWS_AS(io::request_from_json(json::parse(R"({"seed": -1})")), Error);
}

TEST_CASE("profile SVG has one band row per attribute plus overall along chainage") {
    const auto doc = testing::load_fixture("old_parkland");
    const auto report = scale::identify(doc.scene, doc.paths.front().line, {});
    const std::string svg = io::profile_svg(report, "old");
    CHECK(svg.rfind("<svg", 0) == 0);
    std::size_t rects = 0;
    for (auto pos = svg.find("<rect x="); pos != std::string::npos; pos = svg.find("<rect x=", pos + 1)) {
        ++rects;
    }
    CHECK(rects == 7 * report.segments.size());
    for (const auto a : scale::kAllAttributes) {
        CHECK(svg.find(">" + std::string(scale::to_string(a)) + "<") != std::string::npos);
    }
    CHECK(svg.find("chainage (m)") != std::string::npos);
    CHECK(svg == io::profile_svg(report, "old"));
}
