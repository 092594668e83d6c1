#pragma once

#include "vlc/metrics.hpp"

#include <array>
#include <span>
#include <string_view>
#include <vector>

namespace vlc::scale {

enum class Attribute { Rotation, Size, Visibility, Symmetry, Clutter, Order };

inline constexpr std::array<Attribute, 6> kAllAttributes{Attribute::Rotation,   Attribute::Size,
                                                         Attribute::Visibility, Attribute::Symmetry,
                                                         Attribute::Clutter,    Attribute::Order};

std::string_view to_string(Attribute a);
// Throws UnknownAttribute.
Attribute attribute_from_string(std::string_view id);

inline constexpr std::size_t index_of(Attribute a) { return static_cast<std::size_t>(a); }

// How the raw attribute relates to complexity.
enum class Direction { Increases, Decreases, UShaped };

constexpr Direction direction_of(Attribute a) {
    switch (a) {
    case Attribute::Rotation:
    case Attribute::Clutter:
        return Direction::Increases;
    case Attribute::Size:
        return Direction::UShaped;
    case Attribute::Visibility:
    case Attribute::Symmetry:
    case Attribute::Order:
        break;
    }
    return Direction::Decreases;
}

struct ComfortBand {
    double lo = 0.0;
    double hi = 0.0;
};

struct ScaleConfig {
    double rotation_degrees_cap = 360.0; // degrees per 100 m
    double clutter_cap = 0.5;
    ComfortBand width_band{1.8, 6.0};
    ComfortBand height_band{2.4, 5.0};
    double size_deviation_cap = 1.0;
    std::array<double, 4> bin_edges{0.2, 0.4, 0.6, 0.8};
    std::array<double, 6> weights{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    double turn_threshold_deg = geometry::kDefaultTurnThresholdDeg;
    double sample_spacing = metrics::kDefaultSampleSpacing;
    metrics::VisibilityMode visibility_mode = metrics::VisibilityMode::Endpoint;
    double order_residual_tolerance = metrics::kDefaultResidualTolerance;
};

// Throws ValidationError.
void validate(const ScaleConfig& config);

class ComplexityClass {
public:
    // Throws InvalidScore outside [1, 5].
    explicit ComplexityClass(int value);

    [[nodiscard]] int value() const noexcept { return m_value; }
    friend auto operator<=>(const ComplexityClass&, const ComplexityClass&) = default;

private:
    int m_value;
};

// Extra inputs some normalisations need.
struct PathContext {
    double length = 0.0;      // metres, for the rotation rate
    double mean_height = 0.0; // metres, for size (raw value is the mean width)
};

// raw value per attribute: rotation = accumulated degrees, size = mean width,
// the rest are the metric fractions.
double normalize(Attribute a, double raw, const ScaleConfig& config, const PathContext& context);
double normalize(std::string_view attribute_id, double raw, const ScaleConfig& config, const PathContext& context);

double rotation_rate(double accumulated_degrees, double length);
double size_deviation(double mean_width, double mean_height, const ScaleConfig& config);

ComplexityClass classify(double score, const ScaleConfig& config);

// Score interval [lo, hi) that maps to `cls` (hi is 1 for class 5).
std::pair<double, double> score_range(ComplexityClass cls, const ScaleConfig& config);

struct Aggregate {
    double mean = 0.0;
    ComplexityClass overall{1};
};

Aggregate aggregate(std::span<const ComplexityClass> classes);
Aggregate aggregate(std::span<const ComplexityClass> classes, std::span<const double> weights);

int round_half_up(double mean);

double preference_score(double aggregate_mean);

struct AttributeResult {
    double raw = 0.0;
    double score = 0.0;
    ComplexityClass cls{1};
};

using AttributeResults = std::array<AttributeResult, 6>;

struct SegmentReport {
    std::size_t index = 0;
    double chainage_start = 0.0;
    double chainage_end = 0.0;
    AttributeResults attributes;
    double aggregate_mean = 1.0;
    ComplexityClass overall{1};
};

struct ComplexityReport {
    double path_length = 0.0;
    AttributeResults attributes;
    std::vector<SegmentReport> segments;
    double aggregate_mean = 1.0;
    ComplexityClass overall_class{1};
    double preference = 0.0;

    metrics::RotationMeasure rotation;
    metrics::SizeMeasure size;
    metrics::VisibilityMeasure visibility;
    metrics::SymmetryMeasure symmetry;
    metrics::ClutterMeasure clutter;
    metrics::OrderMeasure order;

    [[nodiscard]] const AttributeResult& operator[](Attribute a) const { return attributes[index_of(a)]; }
};

ComplexityReport identify(const geometry::Scene& scene, const geometry::NavPath& path, const ScaleConfig& config,
                          metrics::MetricCache* cache = nullptr);

// One attribute of the report (path level, or one segment's entry) without
// computing the other five metrics. Matches identify exactly.
AttributeResult evaluate_attribute(const geometry::Scene& scene, const geometry::NavPath& path, Attribute a,
                                   std::optional<std::size_t> segment, const ScaleConfig& config,
                                   metrics::MetricCache* cache = nullptr);

// Builds the NavPath with the configured turn threshold first.
ComplexityReport identify(const geometry::Scene& scene, const geometry::Polyline& line, const ScaleConfig& config);

} // namespace vlc::scale
