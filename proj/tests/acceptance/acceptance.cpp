// One PASS/FAIL line per primary acceptance criterion.

#include "fixtures.hpp"
#include "oracles.hpp"
#include "random_scene.hpp"
#include "service.hpp"
#include "workspace.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>

using namespace vlc;
using geometry::Point2;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects the first few failures of a criterion.
struct Verdict {
    std::vector<std::string> failures;
    std::ostringstream notes;

    void require(bool ok, const std::string& what) {
        if (!ok && failures.size() < 8) {
            failures.push_back(what);
        }
    }
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Verdict metric_oracles() {
    Verdict v;
    const auto t0 = Clock::now();
    double worst_vis = 0.0;
    double worst_clut = 0.0;
    double worst_sym = 0.0;
    for (const char* name : testing::kFixtures) {
        const auto doc = testing::load_fixture(name);
        const auto path = testing::nav_of(doc);
        const double vis = metrics::visibility_metric(doc.scene, path).visible_fraction;
        const double clut = metrics::clutter_metric(doc.scene, path).coverage_fraction;
        const double sym = metrics::symmetry_metric(doc.scene, path).best_score;
        const double dv = std::abs(vis - oracle::visibility(doc.scene, path, 1.0, 0.05).fraction);
        const double dc = std::abs(clut - oracle::clutter(doc.scene, path, 0.02).fraction);
        const double ds = std::abs(sym - oracle::symmetry(doc.scene, path, 0.02).score);
        v.require(dv <= 0.02, std::string(name) + " visibility off by " + fmt(dv));
        v.require(dc <= 0.01, std::string(name) + " clutter off by " + fmt(dc));
        v.require(ds <= 0.01, std::string(name) + " symmetry off by " + fmt(ds));
        worst_vis = std::max(worst_vis, dv);
        worst_clut = std::max(worst_clut, dc);
        worst_sym = std::max(worst_sym, ds);
    }
    const double dt = seconds_since(t0);
    v.require(dt < 60.0, "runtime " + fmt(dt, 1) + " s");
    v.notes << "max |d| visibility " << fmt(worst_vis) << ", clutter " << fmt(worst_clut) << ", symmetry "
            << fmt(worst_sym) << ", " << fmt(dt, 1) << " s";
    return v;
}

std::array<double, 6> raw_metrics(const geometry::Scene& s, const geometry::Polyline& line) {
    const auto p = geometry::make_nav_path(s, line);
    return {metrics::rotation_metric(p).accumulated_degrees,
            metrics::size_metric(s, p).mean_width,
            metrics::visibility_metric(s, p).visible_fraction,
            metrics::symmetry_metric(s, p).best_score,
            metrics::clutter_metric(s, p).coverage_fraction,
            metrics::order_metric(s, p).ordered_fraction};
}

Verdict invariance() {
    Verdict v;
    std::mt19937_64 rng(20240607);
    double worst = 0.0;
    for (const char* name : testing::kFixtures) {
        const auto doc = testing::load_fixture(name);
        const auto& line = doc.paths.front().line;
        const auto base = raw_metrics(doc.scene, line);
        for (int k = 0; k < 20; ++k) {
            const geometry::RigidTransform t{testing::uniform(rng, -3.1416, 3.1416),
                                             {testing::uniform(rng, -500, 500), testing::uniform(rng, -500, 500)}};
            const auto moved = raw_metrics(geometry::transform(doc.scene, t), geometry::transform(line, t));
            for (std::size_t i = 0; i < 6; ++i) {
                const double d = std::abs(moved[i] - base[i]);
                worst = std::max(worst, d);
                v.require(d <= 1e-6, std::string(name) + " transform " + std::to_string(k) + " attribute " +
                                         std::string(scale::to_string(scale::kAllAttributes[i])) + " drifts " +
                                         std::to_string(d));
            }
        }
    }

    std::size_t checked = 0;
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
        auto rs = testing::random_scene(seed);
        const auto p = geometry::make_nav_path(rs.scene, rs.path);
        const double c0 = metrics::clutter_metric(rs.scene, p).coverage_fraction;
        const double v0 = metrics::visibility_metric(rs.scene, p).visible_fraction;
        std::mt19937_64 local(seed ^ 0x9e3779b97f4a7c15ULL);
        const auto& cor = rs.scene.corridors[local() % rs.scene.corridors.size()];
        const Point2 at = cor.a + (cor.b - cor.a) * testing::uniform(local, 0.1, 0.9) +
                          geometry::perp(geometry::normalized(cor.b - cor.a)) *
                              testing::uniform(local, -0.5, 0.5) * cor.width;
        rs.scene.obstacles.push_back(
            {"added", testing::box(at, testing::uniform(local, 0.3, 1.5), testing::uniform(local, 0.3, 1.5),
                                   testing::uniform(local, 0.0, 3.1)),
             1.0, "", true});
        const double c1 = metrics::clutter_metric(rs.scene, p).coverage_fraction;
        const double v1 = metrics::visibility_metric(rs.scene, p).visible_fraction;
        v.require(c1 >= c0 - 1e-12, "clutter decreased on random scene " + std::to_string(seed));
        v.require(v1 <= v0 + 1e-12, "visibility increased on random scene " + std::to_string(seed));
        ++checked;
    }
    v.notes << "100 transforms, max drift " << worst << "; " << checked << " random scenes monotone";
    return v;
}

Verdict scale_correctness() {
    Verdict v;
    const scale::ScaleConfig config;
    int prev = 1;
    for (int i = 0; i <= 1000; ++i) {
        const int c = scale::classify(i * 0.001, config).value();
        v.require(c >= prev, "classify drops at score " + fmt(i * 0.001, 3));
        prev = c;
    }
    for (int k = 1; k <= 5; ++k) {
        const std::vector<scale::ComplexityClass> six(6, scale::ComplexityClass(k));
        const auto agg = scale::aggregate(six);
        v.require(agg.overall.value() == k && agg.mean == k, "aggregate of six " + std::to_string(k) + "s");
    }
    double best = -1.0;
    double arg = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double x = 1.0 + i * 0.01;
        const double p = scale::preference_score(x);
        if (p > best) {
            best = p;
            arg = x;
        }
    }
    v.require(std::abs(arg - 3.0) < 1e-9, "preference argmax at " + fmt(arg, 2));
    v.notes << "1001-point sweep monotone, preference argmax " << fmt(arg, 2);
    return v;
}

Verdict scenario_a() {
    Verdict v;
    const auto doc = testing::load_fixture("old_parkland");
    const auto m0 = testing::morphology_of(doc);
    const scale::ScaleConfig config;
    const auto before = scale::identify(m0.scene, m0.path, config);
    v.require(before.overall_class.value() == 4, "initial class " + std::to_string(before.overall_class.value()));
    manip::ManipulationRequest req;
    req.target_class = 3;
    req.seed = 42;
    req.budget = 5000;
    const auto t0 = Clock::now();
    const auto r = manip::manipulate(m0, req, config);
    const double dt = seconds_since(t0);
    const auto after = scale::identify(r.morphology.scene, r.morphology.path, config);
    v.require(std::abs(after.aggregate_mean - 3.0) <= 0.25, "aggregate " + fmt(after.aggregate_mean, 3));
    v.require(dt < 30.0, "took " + fmt(dt, 1) + " s");
    const auto bad = manip::violations(r.morphology, m0, req.constraints);
    v.require(bad == 0, std::to_string(bad) + " constraint violations");
    v.notes << "class " << before.overall_class.value() << " -> aggregate " << fmt(after.aggregate_mean, 3) << " in "
            << r.evaluations << " evaluations, " << fmt(dt, 2) << " s, 0 violations";
    return v;
}

Verdict scenario_b() {
    Verdict v;
    const auto doc = testing::load_fixture("new_parkland");
    const auto m0 = testing::morphology_of(doc);
    const scale::ScaleConfig config;
    const auto before = scale::identify(m0.scene, m0.path, config);
    v.require(before.overall_class.value() == 2, "initial class " + std::to_string(before.overall_class.value()));
    manip::SegmentRequest req;
    req.segment = 1;
    req.attribute = scale::Attribute::Clutter;
    req.segment_target = 4;
    req.overall_target = 3;
    const auto t0 = Clock::now();
    const auto r = manip::manipulate_segment(m0, req, config);
    const double dt = seconds_since(t0);
    const auto after = scale::identify(r.morphology.scene, r.morphology.path, config);
    const int lobby = after.segments.at(1).attributes[scale::index_of(scale::Attribute::Clutter)].cls.value();
    v.require(lobby == 4, "lobby clutter class " + std::to_string(lobby));
    v.require(after.aggregate_mean >= 2.75 && after.aggregate_mean <= 3.25,
              "aggregate " + fmt(after.aggregate_mean, 3));
    v.require(manip::violations(r.morphology, m0, req.constraints) == 0, "constraint violations");
    v.notes << "lobby clutter class "
            << before.segments.at(1).attributes[scale::index_of(scale::Attribute::Clutter)].cls.value() << " -> "
            << lobby << ", aggregate " << fmt(before.aggregate_mean, 3) << " -> " << fmt(after.aggregate_mean, 3)
            << ", " << r.evaluations << " evaluations, " << fmt(dt, 1) << " s";
    return v;
}

int run_binary(const std::vector<std::string>& args) {
    std::string cmd = VLC_CLI_BINARY;
    for (const auto& a : args) {
        cmd += " '" + a + "'";
    }
    cmd += " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict determinism() {
    Verdict v;
    const auto root = fs::temp_directory_path() / ("vlc-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    const std::string scene = testing::fixture_path("old_parkland");
    for (const char* run : {"one", "two"}) {
        const int code = run_binary({"manipulate", scene, "--path", "main", "--target", "3", "--seed", "42",
                                     "--budget", "5000", "--out-dir", (root / run).string()});
        v.require(code == 0, std::string("run ") + run + " exited " + std::to_string(code));
    }
    for (const char* f : {"scene.json", "report.json", "change_log.json", "result.json"}) {
        const bool same = fs::exists(root / "one" / f) &&
                          io::read_file(root / "one" / f) == io::read_file(root / "two" / f);
        v.require(same, std::string(f) + " differs between runs");
    }
    std::size_t steps = 0;
    if (fs::exists(root / "one" / "change_log.json")) {
        const auto log = io::change_log_from_json(io::json::parse(io::read_file(root / "one" / "change_log.json")));
        steps = log.size();
        const auto out = io::parse_scene(io::read_file(root / "one" / "scene.json"));
        const auto replayed = manip::replay(testing::morphology_of(testing::load_fixture("old_parkland")), log);
        v.require(replayed == testing::morphology_of(out), "replayed change log does not reproduce the scene");
        v.require(io::scene_hash(app::with_morphology(out, "main", replayed)) == io::scene_hash(out), "replayed scene hash differs");
    }
    fs::remove_all(root);
    v.notes << "two CLI runs byte-identical; " << steps << "-step change log replays exactly";
    return v;
}

Verdict service_contract() {
    Verdict v;
    std::promise<void> started;
    std::promise<void> release;
    auto gate = release.get_future().share();
    std::atomic<int> runs{0};
    app::ServiceOptions options;
    options.on_manipulate_start = [&, gate] {
        if (runs++ == 1) {
            started.set_value();
            gate.wait();
        }
    };
    app::Service service(options);
    const int port = service.bind_any_port("127.0.0.1");
    std::thread server([&] { service.listen_after_bind(); });
    service.server().wait_until_ready();
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(120, 0);

    auto status_of = [](const httplib::Result& r) { return r ? r->status : -1; };
    auto json_of = [](const httplib::Result& r) { return r ? io::json::parse(r->body) : io::json(); };
    const auto original = testing::load_fixture("old_parkland");
    const io::json upload{{"scene", io::to_json(original)}, {"path", "main"}};

    auto created = c.Post("/api/sessions", upload.dump(), "application/json");
    v.require(status_of(created) == 201, "create -> " + std::to_string(status_of(created)));
    const std::string id = created ? json_of(created).value("session_id", "") : "";
    const std::string base = "/api/sessions/" + id;
    const auto initial_report = json_of(created).value("report", io::json());
    v.require(json_of(c.Get(base + "/report")) == initial_report, "fresh report differs from creation report");
    v.require(status_of(c.Post(base + "/undo", "", "application/json")) == 409, "undo at initial state");

    auto m1 = c.Post(base + "/manipulate", io::json{{"target_class", 3}}.dump(), "application/json");
    v.require(status_of(m1) == 200, "manipulate -> " + std::to_string(status_of(m1)));
    const auto r1 = json_of(m1);
    const double agg = r1.contains("after") ? r1["after"]["report"]["aggregate_mean"].get<double>() : 0.0;
    v.require(std::abs(agg - 3.0) <= 0.25, "after aggregate " + fmt(agg, 3));
    const auto report1 = json_of(c.Get(base + "/report"));
    v.require(report1 == r1.value("after", io::json()), "report after manipulate is stale");
    const auto scene1 = json_of(c.Get(base + "/scene"));
    v.require(io::scene_hash(io::scene_from_json(scene1)) == report1["provenance"]["scene_hash"],
              "scene and report hashes skew");

    // concurrent manipulate -> 409 while the first run is held open
    auto held = std::async(std::launch::async, [&] {
        httplib::Client c2("127.0.0.1", port);
        c2.set_read_timeout(120, 0);
        return c2.Post(base + "/manipulate", io::json{{"target_class", 2}, {"budget", 300}}.dump(),
                       "application/json");
    });
    started.get_future().wait();
    const int conflict = status_of(c.Post(base + "/manipulate", io::json{{"target_class", 3}}.dump(),
                                          "application/json"));
    v.require(conflict == 409, "concurrent manipulate -> " + std::to_string(conflict));
    v.require(json_of(c.Get(base + "/report")) == report1, "read during a run saw partial state");
    release.set_value();
    v.require(status_of(held.get()) == 200, "held manipulation failed");

    v.require(status_of(c.Post(base + "/undo", "", "application/json")) == 200, "first undo");
    v.require(json_of(c.Get(base + "/scene")) == scene1, "undo did not restore the previous scene");
    auto undo2 = c.Post(base + "/undo", "", "application/json");
    v.require(status_of(undo2) == 200, "second undo");
    const auto scene0 = json_of(c.Get(base + "/scene"));
    v.require(io::scene_hash(io::scene_from_json(scene0)) == io::scene_hash(original),
              "two undos did not return to the original scene");
    v.require(json_of(c.Get(base + "/report")) == initial_report, "report after undo differs from initial");
    v.require(status_of(c.Post(base + "/undo", "", "application/json")) == 409, "undo past initial state");
    v.require(status_of(c.Get("/api/sessions/unknown/report")) == 404, "unknown session");
    v.require(status_of(c.Post("/api/sessions", "{", "application/json")) == 400, "malformed JSON");

    service.stop();
    server.join();
    v.notes << "create/report/manipulate/undo/scene, 409 on concurrent manipulate and undo at root";
    return v;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"metric-oracle-equivalence", metric_oracles},
        {"invariance-suite", invariance},
        {"scale-correctness", scale_correctness},
        {"scenario-a-old-parkland-to-class-3", scenario_a},
        {"scenario-b-lobby-clutter-class-4", scenario_b},
        {"determinism", determinism},
        {"service-contract", service_contract},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.failures.push_back(std::string("exception: ") + e.what());
        }
        if (v.failures.empty()) {
            std::cout << "PASS " << name << ": " << v.notes.str() << std::endl;
        } else {
            ++failed;
            std::cout << "FAIL " << name << ":";
            for (const auto& f : v.failures) {
                std::cout << " [" << f << "]";
            }
            std::cout << std::endl;
        }
    }
    return failed == 0 ? 0 : 1;
}
