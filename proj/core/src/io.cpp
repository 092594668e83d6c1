#include "vlc/io.hpp"

#include "json_cursor.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace vlc::io {

using geometry::Point2;

using detail::Node;
using detail::escape_token;
using detail::parse_fail;
using detail::points_json;
using detail::polygon_for;

json point_json(Point2 p) {
    return json::array({p.x, p.y});
}

const NamedPath& SceneDocument::path(std::string_view name) const {
    for (const auto& p : paths) {
        if (p.name == name) {
            return p;
        }
    }
    throw Error(ErrorCode::NotFound, "path not found: " + std::string(name));
}

NamedPath& SceneDocument::path(std::string_view name) {
    return const_cast<NamedPath&>(std::as_const(*this).path(name));
}

SceneDocument parse_scene(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what(), "");
    }
    return scene_from_json(doc);
}

SceneDocument scene_from_json(const json& j) {
    const Node root(j, "");
    root.expect_object();
    if (root.at("format_version").string() != kFormatVersion) {
        parse_fail("/format_version", "unsupported format version");
    }
    if (root.at("units").string() != "meters") {
        parse_fail("/units", "units must be \"meters\"");
    }

    SceneDocument out;
    auto& scene = out.scene;
    const Node bounds = root.at("bounds");
    scene.bounds = {bounds.at("min").point(), bounds.at("max").point()};

    if (root.has("walls")) {
        const Node walls = root.at("walls");
        for (std::size_t i = 0; i < walls.size(); ++i) {
            const Node w = walls.at(i);
            geometry::Wall wall;
            wall.id = w.at("id").string();
            wall.shape = polygon_for("wall", wall.id, w.at("ring").points());
            if (w.has("movable")) {
                wall.movable = w.at("movable").boolean();
            }
            scene.walls.push_back(std::move(wall));
        }
    }
    if (root.has("obstacles")) {
        const Node obstacles = root.at("obstacles");
        for (std::size_t i = 0; i < obstacles.size(); ++i) {
            const Node o = obstacles.at(i);
            geometry::Obstacle ob;
            ob.id = o.at("id").string();
            ob.footprint = polygon_for("obstacle", ob.id, o.at("footprint").points());
            if (o.has("height")) {
                ob.height = o.at("height").number();
            }
            if (o.has("tag")) {
                ob.tag = o.at("tag").string();
            }
            if (o.has("movable")) {
                ob.movable = o.at("movable").boolean();
            }
            scene.obstacles.push_back(std::move(ob));
        }
    }
    const Node corridors = root.at("corridors");
    for (std::size_t i = 0; i < corridors.size(); ++i) {
        const Node c = corridors.at(i);
        geometry::CorridorSegment seg;
        seg.id = c.at("id").string();
        const Node axis = c.at("axis");
        if (axis.size() != 2) {
            parse_fail(axis.pointer(), "corridor axis needs exactly two points");
        }
        seg.a = axis.at(0).point();
        seg.b = axis.at(1).point();
        seg.width = c.at("width").number();
        seg.height = c.at("height").number();
        scene.corridors.push_back(std::move(seg));
    }
    geometry::validate(scene);

    const Node paths = root.at("paths");
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const Node p = paths.at(i);
        NamedPath np;
        np.name = p.at("name").string();
        np.line.vertices = p.at("vertices").points();
        for (const auto& prev : out.paths) {
            if (prev.name == np.name) {
                throw Error(ErrorCode::ValidationError, "duplicate path name '" + np.name + "'");
            }
        }
        try {
            geometry::validate(np.line);
        } catch (const Error& e) {
            throw Error(ErrorCode::ValidationError, "path '" + np.name + "': " + e.what());
        }
        for (const Point2 v : np.line.vertices) {
            if (!scene.bounds.contains(v)) {
                throw Error(ErrorCode::ValidationError, "path '" + np.name + "' leaves the bounds");
            }
        }
        out.paths.push_back(std::move(np));
    }
    return out;
}

json to_json(const SceneDocument& doc) {
    const auto& scene = doc.scene;
    json j;
    j["format_version"] = kFormatVersion;
    j["units"] = "meters";
    j["bounds"] = {{"min", point_json(scene.bounds.min)}, {"max", point_json(scene.bounds.max)}};
    j["walls"] = json::array();
    for (const auto& w : scene.walls) {
        j["walls"].push_back({{"id", w.id}, {"ring", points_json(w.shape.ring())}, {"movable", w.movable}});
    }
    j["obstacles"] = json::array();
    for (const auto& o : scene.obstacles) {
        j["obstacles"].push_back({{"id", o.id},
                                  {"footprint", points_json(o.footprint.ring())},
                                  {"height", o.height},
                                  {"tag", o.tag},
                                  {"movable", o.movable}});
    }
    j["corridors"] = json::array();
    for (const auto& c : scene.corridors) {
        j["corridors"].push_back({{"id", c.id},
                                  {"axis", json::array({point_json(c.a), point_json(c.b)})},
                                  {"width", c.width},
                                  {"height", c.height}});
    }
    j["paths"] = json::array();
    for (const auto& p : doc.paths) {
        j["paths"].push_back({{"name", p.name}, {"vertices", points_json(p.line.vertices)}});
    }
    return j;
}

std::string canonical(const json& j) {
    return j.dump();
}

std::string pretty(const json& j) {
    return j.dump(2) + "\n";
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[md[i] >> 4];
        out += kHex[md[i] & 0xf];
    }
    return out;
}

std::string scene_hash(const SceneDocument& doc) {
    return sha256_hex(canonical(to_json(doc)));
}

scale::ScaleConfig parse_config(std::string_view bytes) {
    json doc;
    try {
        doc = json::parse(bytes.begin(), bytes.end());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed JSON: ") + e.what(), "");
    }
    return config_from_json(doc);
}

scale::ScaleConfig config_from_json(const json& j) {
    const Node root(j, "");
    root.expect_object();
    scale::ScaleConfig c;
    if (root.has("format_version") && root.at("format_version").string() != kFormatVersion) {
        parse_fail("/format_version", "unsupported format version");
    }
    auto num = [&](std::string_view key, double& field) {
        if (root.has(key)) {
            field = root.at(key).number();
        }
    };
    auto band = [&](std::string_view key, scale::ComfortBand& field) {
        if (root.has(key)) {
            const Node b = root.at(key);
            field = {b.at("lo").number(), b.at("hi").number()};
        }
    };
    num("rotation_degrees_cap", c.rotation_degrees_cap);
    num("clutter_cap", c.clutter_cap);
    band("width_band", c.width_band);
    band("height_band", c.height_band);
    num("size_deviation_cap", c.size_deviation_cap);
    if (root.has("bin_edges")) {
        const Node e = root.at("bin_edges");
        if (e.size() != c.bin_edges.size()) {
            parse_fail(e.pointer(), "expected four bin edges");
        }
        for (std::size_t i = 0; i < c.bin_edges.size(); ++i) {
            c.bin_edges[i] = e.at(i).number();
        }
    }
    if (root.has("weights")) {
        const Node w = root.at("weights");
        w.expect_object();
        for (const auto& [key, value] : w.raw().items()) {
            scale::Attribute a{};
            try {
                a = scale::attribute_from_string(key);
            } catch (const Error&) {
                parse_fail(w.pointer() + "/" + escape_token(key), "unknown attribute");
            }
            c.weights[scale::index_of(a)] = w.at(key).number();
        }
    }
    num("turn_threshold_deg", c.turn_threshold_deg);
    num("sample_spacing", c.sample_spacing);
    if (root.has("visibility_mode")) {
        const Node m = root.at("visibility_mode");
        try {
            c.visibility_mode = metrics::visibility_mode_from_string(m.string());
        } catch (const Error&) {
            parse_fail(m.pointer(), "visibility mode must be \"endpoint\" or \"remaining_path\"");
        }
    }
    num("order_residual_tolerance", c.order_residual_tolerance);
    scale::validate(c);
    return c;
}

json to_json(const scale::ScaleConfig& c) {
    json weights = json::object();
    for (const auto a : scale::kAllAttributes) {
        weights[std::string(scale::to_string(a))] = c.weights[scale::index_of(a)];
    }
    return {
        {"format_version", kFormatVersion},
        {"rotation_degrees_cap", c.rotation_degrees_cap},
        {"clutter_cap", c.clutter_cap},
        {"width_band", {{"lo", c.width_band.lo}, {"hi", c.width_band.hi}}},
        {"height_band", {{"lo", c.height_band.lo}, {"hi", c.height_band.hi}}},
        {"size_deviation_cap", c.size_deviation_cap},
        {"bin_edges", c.bin_edges},
        {"weights", weights},
        {"turn_threshold_deg", c.turn_threshold_deg},
        {"sample_spacing", c.sample_spacing},
        {"visibility_mode", metrics::to_string(c.visibility_mode)},
        {"order_residual_tolerance", c.order_residual_tolerance},
    };
}

std::string config_hash(const scale::ScaleConfig& config) {
    return sha256_hex(canonical(to_json(config)));
}

namespace {

json attributes_json(const scale::AttributeResults& results) {
    json j = json::object();
    for (const auto a : scale::kAllAttributes) {
        const auto& r = results[scale::index_of(a)];
        j[std::string(scale::to_string(a))] = {{"raw", r.raw}, {"score", r.score}, {"class", r.cls.value()}};
    }
    return j;
}

} // namespace

json to_json(const scale::ComplexityReport& r) {
    json segments = json::array();
    for (const auto& s : r.segments) {
        segments.push_back({{"index", s.index},
                            {"chainage_start", s.chainage_start},
                            {"chainage_end", s.chainage_end},
                            {"aggregate_mean", s.aggregate_mean},
                            {"overall_class", s.overall.value()},
                            {"attributes", attributes_json(s.attributes)}});
    }
    json axis = nullptr;
    if (r.symmetry.best_axis) {
        axis = {{"point", point_json(r.symmetry.best_axis->point)},
                {"direction", point_json(r.symmetry.best_axis->direction)}};
    }
    json templates = json::array();
    for (const auto t : r.order.per_segment_templates) {
        templates.push_back(metrics::to_string(t));
    }
    return {
        {"path_length", r.path_length},
        {"aggregate_mean", r.aggregate_mean},
        {"overall_class", r.overall_class.value()},
        {"preference", r.preference},
        {"attributes", attributes_json(r.attributes)},
        {"segments", segments},
        {"details",
         {
             {"rotation", {{"turn_count", r.rotation.turn_count}, {"accumulated_degrees", r.rotation.accumulated_degrees}}},
             {"size",
              {{"mean_width", r.size.mean_width},
               {"mean_height", r.size.mean_height},
               {"total_length", r.size.total_length}}},
             {"visibility",
              {{"visible_fraction", r.visibility.visible_fraction},
               {"sample_count", r.visibility.sample_count},
               {"per_segment", r.visibility.per_segment_fractions}}},
             {"symmetry", {{"best_score", r.symmetry.best_score}, {"best_axis", axis}}},
             {"clutter",
              {{"coverage_fraction", r.clutter.coverage_fraction}, {"per_segment", r.clutter.per_segment_fractions}}},
             {"order",
              {{"ordered_fraction", r.order.ordered_fraction},
               {"best_template", metrics::to_string(r.order.best_template)},
               {"object_count", r.order.object_count},
               {"per_segment", r.order.per_segment_fractions},
               {"per_segment_templates", templates}}},
         }},
    };
}

json report_document(const scale::ComplexityReport& report, const Provenance& p) {
    return {
        {"format_version", kFormatVersion},
        {"report", to_json(report)},
        {"provenance",
         {{"config_hash", p.config_hash},
          {"scene_hash", p.scene_hash},
          {"tool_version", p.tool_version},
          {"timestamp", p.timestamp.empty() ? json(nullptr) : json(p.timestamp)}}},
    };
}

std::string timestamp_now(std::string_view override_value) {
    if (!override_value.empty()) {
        return std::string(override_value);
    }
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::NotFound, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

} // namespace vlc::io
