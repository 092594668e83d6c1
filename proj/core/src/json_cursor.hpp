#pragma once

// JSON cursor shared by the readers in io.cpp and manip_io.cpp.

#include "vlc/io.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vlc::io::detail {

using geometry::Point2;

[[noreturn]] inline void parse_fail(const std::string& pointer, const std::string& what) {
    throw Error(ErrorCode::ParseError, pointer + ": " + what, pointer);
}

inline std::string escape_token(std::string_view key) {
    std::string out;
    for (const char c : key) {
        if (c == '~') {
            out += "~0";
        } else if (c == '/') {
            out += "~1";
        } else {
            out += c;
        }
    }
    return out;
}

// Thin cursor over a JSON node that remembers its pointer for error messages.
class Node {
public:
    Node(const json& j, std::string pointer) : m_j(j), m_ptr(std::move(pointer)) {}

    [[nodiscard]] const std::string& pointer() const { return m_ptr; }
    [[nodiscard]] const json& raw() const { return m_j; }

    [[nodiscard]] bool has(std::string_view key) const {
        return m_j.is_object() && m_j.contains(std::string(key));
    }

    [[nodiscard]] Node at(std::string_view key) const {
        expect_object();
        const std::string k(key);
        if (!m_j.contains(k)) {
            parse_fail(child_ptr(key), "required field is missing");
        }
        return {m_j.at(k), child_ptr(key)};
    }

    [[nodiscard]] Node at(std::size_t i) const { return {m_j.at(i), m_ptr + "/" + std::to_string(i)}; }

    [[nodiscard]] std::size_t size() const {
        if (!m_j.is_array()) {
            parse_fail(m_ptr, "expected an array");
        }
        return m_j.size();
    }

    [[nodiscard]] double number() const {
        if (!m_j.is_number()) {
            parse_fail(m_ptr, "expected a number");
        }
        return m_j.get<double>();
    }

    [[nodiscard]] std::string string() const {
        if (!m_j.is_string()) {
            parse_fail(m_ptr, "expected a string");
        }
        return m_j.get<std::string>();
    }

    [[nodiscard]] bool boolean() const {
        if (!m_j.is_boolean()) {
            parse_fail(m_ptr, "expected a boolean");
        }
        return m_j.get<bool>();
    }

    [[nodiscard]] Point2 point() const {
        if (size() != 2) {
            parse_fail(m_ptr, "expected an [x, y] pair");
        }
        return {at(0).number(), at(1).number()};
    }

    [[nodiscard]] std::vector<Point2> points() const {
        std::vector<Point2> out;
        for (std::size_t i = 0; i < size(); ++i) {
            out.push_back(at(i).point());
        }
        return out;
    }

    void expect_object() const {
        if (!m_j.is_object()) {
            parse_fail(m_ptr, "expected an object");
        }
    }

private:
    [[nodiscard]] std::string child_ptr(std::string_view key) const { return m_ptr + "/" + escape_token(key); }

    const json& m_j;
    std::string m_ptr;
};

inline geometry::Polygon polygon_for(const std::string& kind, const std::string& id, std::vector<Point2> ring) {
    try {
        return geometry::Polygon(std::move(ring));
    } catch (const Error& e) {
        throw Error(ErrorCode::ValidationError, kind + " '" + id + "': " + e.what());
    }
}

inline json points_json(const std::vector<Point2>& pts) {
    json a = json::array();
    for (const Point2 p : pts) {
        a.push_back(point_json(p));
    }
    return a;
}

} // namespace vlc::io::detail
