#include "cli.hpp"

#include "workspace.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace vlc::app {

namespace {

namespace fs = std::filesystem;

std::string stamp(const std::optional<std::string>& flag) {
    if (flag) {
        return *flag == "now" ? io::timestamp_now() : *flag;
    }
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        return io::timestamp_now();
    }
    return {};
}

std::string two(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

void emit(const std::optional<std::string>& path, const std::string& content, std::ostream& out) {
    if (path && *path != "-") {
        io::write_file_atomic(*path, content);
    } else {
        out << content;
    }
}

struct IdentifyArgs {
    std::string scene;
    std::string path;
    std::optional<std::string> config;
    std::optional<std::string> out;
    std::optional<std::string> svg;
    std::optional<std::string> timestamp;
};

int identify_cmd(const IdentifyArgs& a, std::ostream& out) {
    const auto config = resolve_config(a.config);
    const auto doc = io::parse_scene(io::read_file(a.scene));
    const auto report = identify(doc, a.path, config);
    const io::Provenance prov{io::config_hash(config), io::scene_hash(doc), std::string(io::kToolVersion),
                              stamp(a.timestamp)};
    emit(a.out, io::pretty(io::report_document(report, prov)), out);
    if (a.svg) {
        io::write_file_atomic(*a.svg, io::profile_svg(report, a.path));
    }
    return 0;
}

struct ManipulateArgs {
    std::string scene;
    std::string path;
    std::optional<std::string> config;
    std::optional<std::string> request;
    std::optional<std::string> constraints;
    std::optional<double> target;
    std::vector<std::string> attributes;
    std::optional<std::size_t> segment;
    std::optional<double> overall_target;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> budget;
    std::string out_dir;
    std::optional<std::string> timestamp;
};

io::AnyRequest build_request(const ManipulateArgs& a) {
    io::json j = io::json::object();
    if (a.request) {
        j = io::json::parse(io::read_file(*a.request), nullptr, false);
        if (j.is_discarded()) {
            throw Error(ErrorCode::ParseError, *a.request + ": malformed JSON", "");
        }
    }
    if (a.constraints) {
        const auto c = io::json::parse(io::read_file(*a.constraints), nullptr, false);
        if (c.is_discarded()) {
            throw Error(ErrorCode::ParseError, *a.constraints + ": malformed JSON", "");
        }
        j["constraints"] = c;
    }
    if (a.target) {
        j["target_class"] = *a.target;
    }
    if (!a.attributes.empty()) {
        j["attributes"] = a.attributes;
    }
    if (a.segment) {
        j["segment"] = *a.segment;
    }
    if (a.overall_target) {
        j["overall_target"] = *a.overall_target;
    }
    if (a.seed) {
        j["seed"] = *a.seed;
    }
    if (a.budget) {
        j["budget"] = *a.budget;
    }
    return io::request_from_json(j);
}

int manipulate_cmd(const ManipulateArgs& a, std::ostream& out, std::ostream& err) {
    const auto config = resolve_config(a.config);
    const auto doc = io::parse_scene(io::read_file(a.scene));
    const auto request = build_request(a);
    const auto initial = morphology_of(doc, a.path);

    const auto result = std::visit(
        [&](const auto& r) {
            if constexpr (std::is_same_v<std::decay_t<decltype(r)>, manip::SegmentRequest>) {
                return manip::manipulate_segment(initial, r, config);
            } else {
                return manip::manipulate(initial, r, config);
            }
        },
        request);

    const auto edited = with_morphology(doc, a.path, result.morphology);
    const std::string ts = stamp(a.timestamp);
    const io::Provenance prov{io::config_hash(config), io::scene_hash(edited), std::string(io::kToolVersion), ts};

    io::json result_doc = io::to_json(result);
    result_doc["format_version"] = io::kFormatVersion;
    result_doc["request"] = io::to_json(request);
    result_doc["provenance"] = {{"config_hash", prov.config_hash},
                                {"input_scene_hash", io::scene_hash(doc)},
                                {"output_scene_hash", prov.scene_hash},
                                {"tool_version", prov.tool_version},
                                {"timestamp", ts.empty() ? io::json(nullptr) : io::json(ts)}};

    const fs::path dir(a.out_dir);
    fs::create_directories(dir);
    io::write_file_atomic(dir / "scene.json", io::pretty(io::to_json(edited)));
    io::write_file_atomic(dir / "report.json", io::pretty(io::report_document(result.after, prov)));
    io::write_file_atomic(dir / "change_log.json", io::pretty(io::to_json(result.log)));
    io::write_file_atomic(dir / "result.json", io::pretty(result_doc));
    io::write_file_atomic(dir / "before.svg", io::profile_svg(result.before, a.path + " (before)"));
    io::write_file_atomic(dir / "after.svg", io::profile_svg(result.after, a.path + " (after)"));

    out << "aggregate " << two(result.before.aggregate_mean) << " -> " << two(result.after.aggregate_mean)
        << " (class " << result.before.overall_class.value() << " -> " << result.after.overall_class.value()
        << "), objective " << two(result.objective) << ", " << result.evaluations << " evaluations, "
        << result.log.size() << " edits\n";
    if (!result.converged) {
        err << "warning: budget exhausted before reaching the target\n";
    }
    return 0;
}

struct CompareArgs {
    std::string a;
    std::string b;
    std::string path;
    std::optional<std::string> config;
    std::optional<std::string> out;
    bool text = false;
};

int compare_cmd(const CompareArgs& args, std::ostream& out) {
    const auto config = resolve_config(args.config);
    const auto doc_a = io::parse_scene(io::read_file(args.a));
    const auto doc_b = io::parse_scene(io::read_file(args.b));
    const auto ra = identify(doc_a, args.path, config);
    const auto rb = identify(doc_b, args.path, config);

    io::json attrs = io::json::array();
    std::ostringstream table;
    table << "attribute   A  B  delta  score A  score B\n";
    for (const auto attr : scale::kAllAttributes) {
        const auto& x = ra[attr];
        const auto& y = rb[attr];
        const int dc = y.cls.value() - x.cls.value();
        attrs.push_back({{"attribute", scale::to_string(attr)},
                         {"class_a", x.cls.value()},
                         {"class_b", y.cls.value()},
                         {"class_delta", dc},
                         {"score_a", x.score},
                         {"score_b", y.score},
                         {"score_delta", y.score - x.score}});
        char line[96];
        std::snprintf(line, sizeof line, "%-10s  %d  %d  %+d     %.3f    %.3f\n",
                      std::string(scale::to_string(attr)).c_str(), x.cls.value(), y.cls.value(), dc, x.score,
                      y.score);
        table << line;
    }
    char line[96];
    std::snprintf(line, sizeof line, "overall     %d  %d  %+d     %.3f    %.3f\n", ra.overall_class.value(),
                  rb.overall_class.value(), rb.overall_class.value() - ra.overall_class.value(), ra.aggregate_mean,
                  rb.aggregate_mean);
    table << line;

    if (args.text) {
        emit(args.out, table.str(), out);
        return 0;
    }
    const io::json doc = {
        {"format_version", io::kFormatVersion},
        {"path", args.path},
        {"a", {{"scene_hash", io::scene_hash(doc_a)},
               {"overall_class", ra.overall_class.value()},
               {"aggregate_mean", ra.aggregate_mean}}},
        {"b", {{"scene_hash", io::scene_hash(doc_b)},
               {"overall_class", rb.overall_class.value()},
               {"aggregate_mean", rb.aggregate_mean}}},
        {"attributes", attrs},
        {"overall_delta", rb.overall_class.value() - ra.overall_class.value()},
        {"aggregate_delta", rb.aggregate_mean - ra.aggregate_mean},
        {"config_hash", io::config_hash(config)},
    };
    emit(args.out, io::pretty(doc), out);
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Visuo-locomotive complexity: identify and manipulate path morphologies", "vlc"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::kToolVersion));

    IdentifyArgs ia;
    auto* identify_app = app.add_subcommand("identify", "Compute the complexity report of a path");
    identify_app->add_option("scene", ia.scene, "SceneDocument file")->required();
    identify_app->add_option("--path", ia.path, "Path name inside the scene")->required();
    identify_app->add_option("--config", ia.config, "Scale config (default: $VLC_CONFIG, then built-in)");
    identify_app->add_option("--out", ia.out, "Report file (default: stdout)");
    identify_app->add_option("--svg", ia.svg, "Write the per-segment class profile as SVG");
    identify_app->add_option("--timestamp", ia.timestamp, "Provenance timestamp, RFC 3339 or 'now'");

    ManipulateArgs ma;
    auto* manip_app = app.add_subcommand("manipulate", "Edit the morphology toward a target class");
    manip_app->add_option("scene", ma.scene, "SceneDocument file")->required();
    manip_app->add_option("--path", ma.path, "Path name inside the scene")->required();
    manip_app->add_option("--config", ma.config, "Scale config (default: $VLC_CONFIG, then built-in)");
    manip_app->add_option("--request", ma.request, "Request JSON; flags override its fields");
    manip_app->add_option("--constraints", ma.constraints, "Constraint set JSON");
    manip_app->add_option("--target", ma.target, "Target class (segment target with --segment)");
    manip_app->add_option("--attributes", ma.attributes, "Attributes to manipulate")->delimiter(',');
    manip_app->add_option("--segment", ma.segment, "Manipulate one segment");
    manip_app->add_option("--overall-target", ma.overall_target, "Overall target in segment mode (default 3)");
    manip_app->add_option("--seed", ma.seed, "Random seed (default 42)");
    manip_app->add_option("--budget", ma.budget, "Evaluation budget (default 5000)");
    manip_app->add_option("--out-dir", ma.out_dir, "Directory for scene, report, result, change log and SVGs")
        ->required();
    manip_app->add_option("--timestamp", ma.timestamp, "Provenance timestamp, RFC 3339 or 'now'");

    CompareArgs ca;
    auto* compare_app = app.add_subcommand("compare", "Compare two versions of a design along one path");
    compare_app->add_option("a", ca.a, "First SceneDocument")->required();
    compare_app->add_option("b", ca.b, "Second SceneDocument")->required();
    compare_app->add_option("--path", ca.path, "Path name present in both scenes")->required();
    compare_app->add_option("--config", ca.config, "Scale config (default: $VLC_CONFIG, then built-in)");
    compare_app->add_option("--out", ca.out, "Output file (default: stdout)");
    compare_app->add_flag("--text", ca.text, "Plain-text table instead of JSON");

    std::optional<std::string> config_out;
    auto* config_app = app.add_subcommand("config", "Scale configuration helpers");
    config_app->require_subcommand(1);
    auto* init_app = config_app->add_subcommand("init", "Write the default scale config");
    init_app->add_option("--out", config_out, "Output file (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << io::kToolVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*identify_app) {
            return identify_cmd(ia, out);
        }
        if (*manip_app) {
            return manipulate_cmd(ma, out, err);
        }
        if (*compare_app) {
            return compare_cmd(ca, out);
        }
        if (*init_app) {
            emit(config_out, io::pretty(io::to_json(scale::ScaleConfig{})), out);
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace vlc::app
