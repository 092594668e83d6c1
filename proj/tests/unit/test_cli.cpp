#include <doctest.h>

#include "cli.hpp"
#include "fixtures.hpp"
#include "random_scene.hpp"

#include <filesystem>
#include <sstream>

using namespace vlc;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "vlc");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = app::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("vlc-cli-" + name + "-" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("identify writes a report and an SVG profile") {
    const auto dir = scratch("identify");
    const auto r = cli({"identify", testing::fixture_path("empty_corridor"), "--path", "main", "--out",
                        (dir / "r.json").string(), "--svg", (dir / "p.svg").string()});
    REQUIRE(r.code == 0);
    const auto doc = io::json::parse(io::read_file(dir / "r.json"));
    CHECK(doc["report"]["overall_class"] == 1);
    CHECK(doc["provenance"]["scene_hash"] == io::scene_hash(testing::load_fixture("empty_corridor")));
    const auto svg = io::read_file(dir / "p.svg");
    CHECK(svg.find("chainage (m)") != std::string::npos);
    CHECK(svg.find(">visibility<") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("identify error exits") {
    auto r = cli({"identify", testing::fixture_path("empty_corridor"), "--path", "nope"});
    CHECK(r.code == 2);
    CHECK(r.err.find("path not found") != std::string::npos);
    r = cli({"identify", "/nonexistent/scene.json", "--path", "main"});
    CHECK(r.code == 2);
    r = cli({"identify"});
    CHECK(r.code == 2);
    r = cli({"frobnicate"});
    CHECK(r.code == 2);
}

TEST_CASE("config init writes the defaults and VLC_CONFIG is honoured") {
    const auto dir = scratch("config");
    const auto path = (dir / "cfg.json").string();
    REQUIRE(cli({"config", "init", "--out", path}).code == 0);
    const auto config = io::parse_config(io::read_file(path));
    CHECK(io::config_hash(config) == io::config_hash(scale::ScaleConfig{}));

    auto j = io::json::parse(io::read_file(path));
    j["bin_edges"] = {0.05, 0.1, 0.15, 0.2};
    io::write_file_atomic(path, j.dump());
    ::setenv("VLC_CONFIG", path.c_str(), 1);
    const auto r = cli({"identify", testing::fixture_path("l_corridor"), "--path", "main"});
    ::unsetenv("VLC_CONFIG");
    REQUIRE(r.code == 0);
    CHECK(io::json::parse(r.out)["provenance"]["config_hash"] == io::config_hash(io::parse_config(j.dump())));
    fs::remove_all(dir);
}

TEST_CASE("compare reports per-attribute deltas") {
    auto r = cli({"compare", testing::fixture_path("old_parkland"), testing::fixture_path("old_parkland"), "--path",
                  "main"});
    REQUIRE(r.code == 0);
    auto j = io::json::parse(r.out);
    for (const auto& a : j["attributes"]) {
        CHECK(a["class_delta"] == 0);
        CHECK(a["score_delta"] == 0.0);
    }
    CHECK(j["aggregate_delta"] == 0.0);

    r = cli({"compare", testing::fixture_path("old_parkland"), testing::fixture_path("new_parkland"), "--path",
             "main"});
    REQUIRE(r.code == 0);
    j = io::json::parse(r.out);
    CHECK(j["a"]["overall_class"] == 4);
    CHECK(j["b"]["overall_class"] == 2);

    // B = A plus obstacles
    const auto dir = scratch("compare");
    auto doc = testing::load_fixture("l_corridor");
    doc.scene.obstacles.push_back({"extra", testing::box({6, 2.3}, 0.6, 0.6), 1.0, "", true});
    io::write_file_atomic(dir / "more.json", io::pretty(io::to_json(doc)));
    r = cli({"compare", testing::fixture_path("l_corridor"), (dir / "more.json").string(), "--path", "main"});
    REQUIRE(r.code == 0);
    j = io::json::parse(r.out);
    CHECK(j["attributes"][4]["attribute"] == "clutter");
    CHECK(j["attributes"][4]["score_delta"].get<double>() > 0.0);

    r = cli({"compare", testing::fixture_path("l_corridor"), (dir / "more.json").string(), "--path", "main", "--text"});
    CHECK(r.out.find("clutter") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("manipulate writes all outputs and maps failures to exit codes") {
    const auto dir = scratch("manip");
    auto r = cli({"manipulate", testing::fixture_path("old_parkland"), "--path", "main", "--target", "3", "--budget",
                  "300", "--out-dir", dir.string()});
    REQUIRE(r.code == 0);
    for (const char* f : {"scene.json", "report.json", "change_log.json", "result.json", "before.svg", "after.svg"}) {
        CHECK(fs::exists(dir / f));
    }
    const auto edited = io::parse_scene(io::read_file(dir / "scene.json"));
    const auto log = io::change_log_from_json(io::json::parse(io::read_file(dir / "change_log.json")));
    const auto replayed = manip::replay(testing::morphology_of(testing::load_fixture("old_parkland")), log);
    CHECK(replayed.scene == edited.scene);
    CHECK(replayed.path == edited.paths.front().line);
    const auto report = io::json::parse(io::read_file(dir / "report.json"));
    CHECK(report["provenance"]["scene_hash"] == io::scene_hash(edited));

    const auto bad = dir / "bad.json";
    io::write_file_atomic(bad, R"({"min_width": 6, "max_width": 3})");
    r = cli({"manipulate", testing::fixture_path("old_parkland"), "--path", "main", "--constraints", bad.string(),
             "--out-dir", dir.string()});
    CHECK(r.code == 3);
    r = cli({"manipulate", testing::fixture_path("old_parkland"), "--path", "main", "--target", "9", "--out-dir",
             dir.string()});
    CHECK(r.code == 2);
    r = cli({"manipulate", testing::fixture_path("old_parkland"), "--path", "main", "--attributes", "mood",
             "--out-dir", dir.string()});
    CHECK(r.code == 2);
    fs::remove_all(dir);
}
