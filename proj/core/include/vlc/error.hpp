#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vlc {

enum class ErrorCode {
    DegenerateGeometry,
    OutOfBounds,
    MissingCorridor,
    UnknownAttribute,
    InvalidScore,
    EmptyReport,
    InfeasibleRequest,
    ParseError,
    ValidationError,
    NotFound,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the engine carries one of the codes above so the CLI
// and service can map it to exit codes / HTTP statuses without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), m_code(code) {}

    // ParseError / ValidationError may point at the offending JSON node.
    Error(ErrorCode code, const std::string& message, std::string pointer)
        : std::runtime_error(message), m_code(code), m_pointer(std::move(pointer)) {}

    [[nodiscard]] ErrorCode code() const noexcept { return m_code; }
    [[nodiscard]] const std::string& pointer() const noexcept { return m_pointer; }

private:
    ErrorCode m_code;
    std::string m_pointer;
};

} // namespace vlc
