#pragma once

#include "vlc/geometry.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace vlc::metrics {

using geometry::Axis;
using geometry::NavPath;
using geometry::Point2;
using geometry::Scene;

struct RotationMeasure {
    int turn_count = 0;
    double accumulated_degrees = 0.0;
};

struct SizeMeasure {
    double mean_width = 0.0;
    double mean_height = 0.0;
    double total_length = 0.0;
};

enum class VisibilityMode { Endpoint, RemainingPath };

std::string_view to_string(VisibilityMode mode);
VisibilityMode visibility_mode_from_string(std::string_view s);

struct VisibilityMeasure {
    double visible_fraction = 1.0;
    std::vector<double> per_segment_fractions;
    std::size_t sample_count = 0;
};

struct SegmentSymmetry {
    double score = 1.0;
    Axis axis;
    // area of the solid geometry clipped to the segment band
    double geometry_area = 0.0;
};

struct SymmetryMeasure {
    double best_score = 1.0;
    std::optional<Axis> best_axis;
    std::vector<SegmentSymmetry> per_segment;
};

struct ClutterMeasure {
    double coverage_fraction = 0.0;
    std::vector<double> per_segment_fractions;
};

enum class OrderTemplate { None, Line, Grid, Circle };

std::string_view to_string(OrderTemplate t);

struct OrderMeasure {
    double ordered_fraction = 1.0;
    OrderTemplate best_template = OrderTemplate::None;
    std::vector<double> per_segment_fractions;
    std::vector<OrderTemplate> per_segment_templates;
    std::size_t object_count = 0;
};

// Rotation over the whole path, or over one segment when `segment` is set. A
// segment owns its interior vertices plus the turn at its closing vertex.
RotationMeasure rotation_metric(const NavPath& path, std::optional<std::size_t> segment = std::nullopt);

SizeMeasure size_metric(const Scene& scene, const NavPath& path, std::optional<std::size_t> segment = std::nullopt);

inline constexpr double kDefaultSampleSpacing = 1.0;

VisibilityMeasure visibility_metric(const Scene& scene, const NavPath& path,
                                    double sample_spacing = kDefaultSampleSpacing,
                                    VisibilityMode mode = VisibilityMode::Endpoint);

// Memo for the costly per-segment pieces (symmetry clip and axis search,
// clutter clips, order fits), keyed on the exact bits of their inputs so a hit
// returns what recomputation would. Not thread-safe; one per evaluation loop.
class MetricCache {
public:
    explicit MetricCache(std::size_t capacity = 1 << 15);
    ~MetricCache();
    MetricCache(const MetricCache&) = delete;
    MetricCache& operator=(const MetricCache&) = delete;

    [[nodiscard]] std::size_t hits() const noexcept;
    [[nodiscard]] std::size_t misses() const noexcept;

private:
    friend struct CacheAccess;
    struct Impl;
    std::unique_ptr<Impl> m_impl;
};

SymmetryMeasure symmetry_metric(const Scene& scene, const NavPath& path, MetricCache* cache = nullptr);

// Axes tried for one segment: the band's midlines (along the segment chord and
// across it) followed by the principal axes of the clipped geometry.
std::vector<Axis> symmetry_candidate_axes(const Scene& scene, const NavPath& path, std::size_t segment);

ClutterMeasure clutter_metric(const Scene& scene, const NavPath& path, MetricCache* cache = nullptr);

inline constexpr double kDefaultResidualTolerance = 0.15;

OrderMeasure order_metric(const Scene& scene, const NavPath& path,
                          double residual_tolerance = kDefaultResidualTolerance, MetricCache* cache = nullptr);

// Best template instance for a point set. Grid rotations are searched relative
// to `reference_direction`, so the fit follows the scene under rigid motion.
struct TemplateFit {
    OrderTemplate kind = OrderTemplate::None;
    std::size_t ordered = 0;
    std::vector<double> residuals;

    Point2 origin;             // line point, grid anchor, circle centre
    Point2 direction{1.0, 0.0}; // line / grid u axis
    double spacing = 0.0;       // grid
    double radius = 0.0;        // circle

    // Closest position on the template instance.
    [[nodiscard]] Point2 nearest(Point2 p) const;
};

TemplateFit fit_order_templates(std::span<const Point2> points, double residual_tolerance,
                                Point2 reference_direction);

// The fit order_metric uses for one segment (same cache entries).
TemplateFit segment_order_fit(const Scene& scene, const NavPath& path, std::size_t segment,
                              double residual_tolerance = kDefaultResidualTolerance, MetricCache* cache = nullptr);

// Obstacles whose footprint centroid lies in the band of the given segment.
std::vector<std::size_t> obstacles_in_segment(const Scene& scene, const NavPath& path, std::size_t segment);

// Unit vector from the first to the last vertex of a segment.
Point2 segment_chord(const NavPath& path, std::size_t segment);

} // namespace vlc::metrics
