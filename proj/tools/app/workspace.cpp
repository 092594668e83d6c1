#include "workspace.hpp"

#include <cstdlib>

namespace vlc::app {

manip::Morphology morphology_of(const io::SceneDocument& doc, std::string_view path_name) {
    return {doc.scene, doc.path(path_name).line};
}

io::SceneDocument with_morphology(io::SceneDocument doc, std::string_view path_name, const manip::Morphology& m) {
    doc.scene = m.scene;
    doc.path(path_name).line = m.path;
    return doc;
}

scale::ScaleConfig resolve_config(const std::optional<std::string>& explicit_path) {
    if (explicit_path) {
        return io::parse_config(io::read_file(*explicit_path));
    }
    if (const char* env = std::getenv("VLC_CONFIG"); env != nullptr && *env != '\0') {
        return io::parse_config(io::read_file(env));
    }
    return {};
}

scale::ComplexityReport identify(const io::SceneDocument& doc, std::string_view path_name,
                                 const scale::ScaleConfig& config) {
    return scale::identify(doc.scene, doc.path(path_name).line, config);
}

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::InfeasibleRequest:
        return 3;
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::OutOfBounds:
    case ErrorCode::MissingCorridor:
    case ErrorCode::UnknownAttribute:
    case ErrorCode::NotFound:
        return 2;
    case ErrorCode::InvalidScore:
    case ErrorCode::EmptyReport:
        break;
    }
    return 1;
}

int http_status(const Error& e) {
    if (!e.pointer().empty()) {
        return 400;
    }
    switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::UnknownAttribute:
        return 400;
    case ErrorCode::ValidationError:
    case ErrorCode::DegenerateGeometry:
    case ErrorCode::OutOfBounds:
    case ErrorCode::MissingCorridor:
    case ErrorCode::InfeasibleRequest:
    case ErrorCode::NotFound:
        return 422;
    case ErrorCode::InvalidScore:
    case ErrorCode::EmptyReport:
        break;
    }
    return 500;
}

} // namespace vlc::app
