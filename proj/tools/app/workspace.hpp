#pragma once

// Glue shared by the CLI and the service: named-path morphologies, config
// resolution and error-code mapping.

#include "vlc/io.hpp"

#include <optional>
#include <string>

namespace vlc::app {

manip::Morphology morphology_of(const io::SceneDocument& doc, std::string_view path_name);

// Copy of `doc` carrying the edited scene and the edited path under `path_name`.
io::SceneDocument with_morphology(io::SceneDocument doc, std::string_view path_name, const manip::Morphology& m);

// Explicit file, else $VLC_CONFIG, else built-in defaults.
scale::ScaleConfig resolve_config(const std::optional<std::string>& explicit_path);

scale::ComplexityReport identify(const io::SceneDocument& doc, std::string_view path_name,
                                 const scale::ScaleConfig& config);

// 2 for input problems, 3 for infeasible requests, 1 otherwise.
int exit_code(ErrorCode code);
// 400 for schema problems (anything carrying a JSON pointer), 422 for
// geometry and infeasible requests.
int http_status(const Error& e);

} // namespace vlc::app
