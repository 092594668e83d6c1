#include "vlc/io.hpp"

#include <array>
#include <cstdio>

namespace vlc::io {

namespace {

// Sequential yellow-green-blue ramp, class 1 lightest.
constexpr std::array<const char*, 5> kRamp{"#ffffcc", "#a1dab4", "#41b6c4", "#2c7fb8", "#253494"};

constexpr double kLeft = 110.0;
constexpr double kTop = 40.0;
constexpr double kPlotWidth = 720.0;
constexpr double kRowHeight = 28.0;
constexpr double kRowGap = 6.0;

std::string fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escaped(std::string_view s) {
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

} // namespace

std::string profile_svg(const scale::ComplexityReport& report, std::string_view title) {
    const std::size_t rows = scale::kAllAttributes.size() + 1;
    const double height = kTop + static_cast<double>(rows) * (kRowHeight + kRowGap) + 50.0;
    const double width = kLeft + kPlotWidth + 30.0;
    const double length = report.path_length > 0.0 ? report.path_length : 1.0;
    auto x_of = [&](double chainage) { return kLeft + kPlotWidth * chainage / length; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed(width) + "\" height=\"" + fixed(height) +
         "\" viewBox=\"0 0 " + fixed(width) + " " + fixed(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    if (!title.empty()) {
        s += "<text x=\"" + fixed(kLeft) + "\" y=\"22\" font-size=\"14\">" + escaped(title) + "</text>\n";
    }

    for (std::size_t r = 0; r < rows; ++r) {
        const bool overall = r == scale::kAllAttributes.size();
        const double y = kTop + static_cast<double>(r) * (kRowHeight + kRowGap);
        const std::string label = overall ? "overall" : std::string(scale::to_string(scale::kAllAttributes[r]));
        s += "<text x=\"" + fixed(kLeft - 8.0) + "\" y=\"" + fixed(y + kRowHeight * 0.65) + "\" text-anchor=\"end\">" +
             label + "</text>\n";
        for (const auto& seg : report.segments) {
            const int cls = overall ? seg.overall.value() : seg.attributes[r].cls.value();
            const double x0 = x_of(seg.chainage_start);
            const double x1 = x_of(seg.chainage_end);
            s += "<rect x=\"" + fixed(x0) + "\" y=\"" + fixed(y) + "\" width=\"" + fixed(x1 - x0) + "\" height=\"" +
                 fixed(kRowHeight) + "\" fill=\"" + kRamp[static_cast<std::size_t>(cls - 1)] +
                 "\" stroke=\"#555555\" stroke-width=\"0.5\"><title>segment " + std::to_string(seg.index) + ": " +
                 label + " class " + std::to_string(cls) + "</title></rect>\n";
            if (x1 - x0 >= 14.0) {
                s += "<text x=\"" + fixed((x0 + x1) / 2.0) + "\" y=\"" + fixed(y + kRowHeight * 0.65) +
                     "\" text-anchor=\"middle\" fill=\"" + (cls >= 3 ? "#ffffff" : "#000000") + "\">" +
                     std::to_string(cls) + "</text>\n";
            }
        }
    }

    const double axis_y = kTop + static_cast<double>(rows) * (kRowHeight + kRowGap) + 4.0;
    s += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(axis_y) + "\" x2=\"" + fixed(kLeft + kPlotWidth) +
         "\" y2=\"" + fixed(axis_y) + "\" stroke=\"#000000\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double c = length * i / 4.0;
        const double x = x_of(c);
        s += "<line x1=\"" + fixed(x) + "\" y1=\"" + fixed(axis_y) + "\" x2=\"" + fixed(x) + "\" y2=\"" +
             fixed(axis_y + 5.0) + "\" stroke=\"#000000\"/>\n";
        s += "<text x=\"" + fixed(x) + "\" y=\"" + fixed(axis_y + 18.0) + "\" text-anchor=\"middle\">" + fixed(c) +
             "</text>\n";
    }
    s += "<text x=\"" + fixed(kLeft + kPlotWidth / 2.0) + "\" y=\"" + fixed(axis_y + 36.0) +
         "\" text-anchor=\"middle\">chainage (m)</text>\n";
    s += "</svg>\n";
    return s;
}

} // namespace vlc::io
