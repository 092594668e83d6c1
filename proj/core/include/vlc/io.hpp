#pragma once

#include "vlc/manipulation.hpp"
#include "vlc/scale.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vlc::io {

using nlohmann::json;

inline constexpr std::string_view kFormatVersion = "1";
inline constexpr std::string_view kToolVersion = "0.1.0";

struct NamedPath {
    std::string name;
    geometry::Polyline line;

    friend bool operator==(const NamedPath&, const NamedPath&) = default;
};

struct SceneDocument {
    geometry::Scene scene;
    std::vector<NamedPath> paths;

    // Throws NotFound ("path not found: ...").
    [[nodiscard]] const NamedPath& path(std::string_view name) const;
    [[nodiscard]] NamedPath& path(std::string_view name);

    friend bool operator==(const SceneDocument&, const SceneDocument&) = default;
};

// Schema problems raise ParseError with a JSON pointer; geometry problems
// raise ValidationError (or DegenerateGeometry) naming the element.
SceneDocument parse_scene(std::string_view bytes);
SceneDocument scene_from_json(const json& doc);
json to_json(const SceneDocument& doc);

// Canonical compact form: sorted keys, shortest round-trip doubles.
std::string canonical(const json& j);
// Pretty form used for files; parses back to the same document.
std::string pretty(const json& j);

std::string sha256_hex(std::string_view bytes);
std::string scene_hash(const SceneDocument& doc);

scale::ScaleConfig parse_config(std::string_view bytes);
scale::ScaleConfig config_from_json(const json& doc);
json to_json(const scale::ScaleConfig& config);
std::string config_hash(const scale::ScaleConfig& config);

json to_json(const scale::ComplexityReport& report);

struct Provenance {
    std::string config_hash;
    std::string scene_hash;
    std::string tool_version{kToolVersion};
    std::string timestamp; // empty = omitted (null), keeps outputs reproducible
};

json report_document(const scale::ComplexityReport& report, const Provenance& provenance);

// RFC 3339 UTC; falls back to SOURCE_DATE_EPOCH, then the wall clock, when
// `override_value` is empty.
std::string timestamp_now(std::string_view override_value = {});

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

json point_json(geometry::Point2 p);

// Change logs: one object per step, {"op", "type", ...edit parameters}.
json to_json(const manip::Edit& edit);
manip::Edit edit_from_json(const json& j);
json to_json(const manip::ChangeLog& log);
manip::ChangeLog change_log_from_json(const json& j);

json to_json(const manip::ConstraintSet& c);
manip::ConstraintSet constraints_from_json(const json& j);

// A request with a "segment" field is a segment request: "target_class" is
// the segment target and the first of "attributes" the segment attribute.
using AnyRequest = std::variant<manip::ManipulationRequest, manip::SegmentRequest>;
AnyRequest request_from_json(const json& j);
json to_json(const AnyRequest& request);

// Everything but the modified scene, which travels as its own document.
json to_json(const manip::ManipulationResult& result);

// Per-segment class bands along the path (one row per attribute plus the
// overall class), x = chainage in meters.
std::string profile_svg(const scale::ComplexityReport& report, std::string_view title = {});

} // namespace vlc::io
