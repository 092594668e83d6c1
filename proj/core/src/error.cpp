#include "vlc/error.hpp"

namespace vlc {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::DegenerateGeometry:
        return "degenerate_geometry";
    case ErrorCode::OutOfBounds:
        return "out_of_bounds";
    case ErrorCode::MissingCorridor:
        return "missing_corridor";
    case ErrorCode::UnknownAttribute:
        return "unknown_attribute";
    case ErrorCode::InvalidScore:
        return "invalid_score";
    case ErrorCode::EmptyReport:
        return "empty_report";
    case ErrorCode::InfeasibleRequest:
        return "infeasible_request";
    case ErrorCode::ParseError:
        return "parse_error";
    case ErrorCode::ValidationError:
        return "validation_error";
    case ErrorCode::NotFound:
        break;
    }
    return "not_found";
}

} // namespace vlc
