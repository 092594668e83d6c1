#pragma once

#include "vlc/io.hpp"

#include <string>

#ifndef VLC_FIXTURE_DIR
#error "VLC_FIXTURE_DIR must point at the fixture corpus"
#endif

namespace vlc::testing {

inline constexpr std::array<const char*, 5> kFixtures{"empty_corridor", "l_corridor", "zigzag", "old_parkland",
                                                      "new_parkland"};

inline std::string fixture_path(std::string_view name) {
    return std::string(VLC_FIXTURE_DIR) + "/" + std::string(name) + ".json";
}

inline io::SceneDocument load_fixture(std::string_view name) {
    return io::parse_scene(io::read_file(fixture_path(name)));
}

inline geometry::NavPath nav_of(const io::SceneDocument& doc, const scale::ScaleConfig& config = {}) {
    return geometry::make_nav_path(doc.scene, doc.paths.front().line, config.turn_threshold_deg);
}

inline manip::Morphology morphology_of(const io::SceneDocument& doc) {
    return {doc.scene, doc.paths.front().line};
}

} // namespace vlc::testing
