#pragma once

#include "vlc/error.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vlc::geometry {

// Coincidence tests (vertices, intersections) vs. metric comparisons.
inline constexpr double kCoincidenceEps = 1e-9;
inline constexpr double kMetricEps = 1e-6;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
constexpr Point2 operator*(Point2 a, double s) { return {a.x * s, a.y * s}; }
constexpr Point2 operator*(double s, Point2 a) { return {a.x * s, a.y * s}; }
constexpr Point2 operator/(Point2 a, double s) { return {a.x / s, a.y / s}; }
constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
constexpr Point2 perp(Point2 a) { return {-a.y, a.x}; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline double distance(Point2 a, Point2 b) { return norm(b - a); }
inline bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }
Point2 normalized(Point2 v);

double point_segment_distance(Point2 p, Point2 a, Point2 b);

// Ordered vertex chain; the navigation path is one of these.
struct Polyline {
    std::vector<Point2> vertices;

    [[nodiscard]] double length() const;
    friend bool operator==(const Polyline&, const Polyline&) = default;
};

// Throws DegenerateGeometry when the chain has < 2 vertices, non-finite
// coordinates, coincident neighbours or an exact 180 degree reversal.
void validate(const Polyline& line);

// Simple polygon, stored counterclockwise. The constructor enforces the
// invariants and throws DegenerateGeometry otherwise.
class Polygon {
public:
    Polygon() = default;
    explicit Polygon(std::vector<Point2> ring);

    [[nodiscard]] const std::vector<Point2>& ring() const noexcept { return m_ring; }
    [[nodiscard]] std::size_t size() const noexcept { return m_ring.size(); }
    [[nodiscard]] bool empty() const noexcept { return m_ring.empty(); }

    friend bool operator==(const Polygon&, const Polygon&) = default;

private:
    std::vector<Point2> m_ring;
};

double signed_area(std::span<const Point2> ring);
double polygon_area(const Polygon& p);
Point2 centroid(const Polygon& p);
bool point_in_polygon(const Polygon& p, Point2 q);
bool is_simple(std::span<const Point2> ring);

struct Bounds {
    Point2 min;
    Point2 max;

    [[nodiscard]] bool contains(Point2 p, double eps = kCoincidenceEps) const {
        return p.x >= min.x - eps && p.x <= max.x + eps && p.y >= min.y - eps && p.y <= max.y + eps;
    }
    friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct Wall {
    std::string id;
    Polygon shape;
    bool movable = true;

    friend bool operator==(const Wall&, const Wall&) = default;
};

struct Obstacle {
    std::string id;
    Polygon footprint;
    double height = 1.0;
    std::string tag;
    bool movable = true;

    friend bool operator==(const Obstacle&, const Obstacle&) = default;
};

struct CorridorSegment {
    std::string id;
    Point2 a;
    Point2 b;
    double width = 0.0;
    double height = 0.0;

    [[nodiscard]] double length() const { return distance(a, b); }
    friend bool operator==(const CorridorSegment&, const CorridorSegment&) = default;
};

struct Scene {
    Bounds bounds;
    std::vector<Wall> walls;
    std::vector<Obstacle> obstacles;
    std::vector<CorridorSegment> corridors;

    friend bool operator==(const Scene&, const Scene&) = default;
};

// Throws ValidationError naming the offending element.
void validate(const Scene& scene);

struct RayHit {
    double distance = 0.0;
    // false: nothing hit before the bounds edge (distance is clamped there)
    bool hit_geometry = false;
};

// Precomputed occluder edges of a scene. Every wall and obstacle is opaque in
// plan regardless of its height.
class Occluders {
public:
    explicit Occluders(const Scene& scene);

    [[nodiscard]] bool visible(Point2 a, Point2 b) const;
    [[nodiscard]] RayHit cast(Point2 origin, Point2 direction) const;

private:
    struct Edge {
        Point2 a;
        Point2 b;
    };
    struct Solid {
        const Polygon* shape;
        Point2 lo;
        Point2 hi;
    };
    Bounds m_bounds;
    std::vector<Edge> m_edges;
    std::vector<Solid> m_solids;
};

RayHit ray_cast(const Scene& scene, Point2 origin, Point2 direction);
bool line_of_sight(const Scene& scene, Point2 a, Point2 b);

struct PathSegment {
    std::size_t first_vertex = 0;
    std::size_t last_vertex = 0;
    double length = 0.0;
    // corridor of the longest edge in the segment
    std::optional<std::size_t> corridor;
};

struct Segmentation {
    // one entry per vertex, 0 at both ends, each in [0, 180)
    std::vector<double> turn_angles_deg;
    std::vector<PathSegment> segments;
};

inline constexpr double kDefaultTurnThresholdDeg = 15.0;

Segmentation segment_path(const Polyline& line, double turn_threshold_deg = kDefaultTurnThresholdDeg);

struct NavPath {
    std::string name;
    Polyline line;
    double turn_threshold_deg = kDefaultTurnThresholdDeg;
    std::vector<double> turn_angles_deg;
    std::vector<PathSegment> segments;
    std::vector<std::optional<std::size_t>> edge_corridors;
    // cumulative distance at each vertex
    std::vector<double> chainage;

    [[nodiscard]] double length() const { return chainage.empty() ? 0.0 : chainage.back(); }
    [[nodiscard]] std::size_t edge_count() const { return line.vertices.size() - 1; }
    [[nodiscard]] std::size_t segment_of_edge(std::size_t edge) const;
};

// Segments the polyline and associates every edge with the nearest corridor
// whose axis lies within half its width. Edges with no such corridor keep an
// empty association (metrics that need one raise MissingCorridor).
NavPath make_nav_path(const Scene& scene, Polyline line, double turn_threshold_deg = kDefaultTurnThresholdDeg,
                      std::string name = {});

struct PathSample {
    Point2 point;
    double chainage = 0.0;
    std::size_t edge = 0;
    std::size_t segment = 0;
};

// Vantage points at chainage 0, s, 2s, ... strictly before the final vertex.
std::vector<PathSample> sample_path(const NavPath& path, double spacing);
Point2 point_at_chainage(const NavPath& path, double chainage);

using Quad = std::array<Point2, 4>;

// Rectangle of the associated corridor's width centred on one path edge.
struct BandRect {
    Quad corners;
    std::size_t edge = 0;
    std::size_t segment = 0;
    double width = 0.0;

    [[nodiscard]] double area() const;
    [[nodiscard]] bool contains(Point2 p) const;
};

std::vector<BandRect> corridor_band(const Scene& scene, const NavPath& path);

struct Axis {
    Point2 point;
    Point2 direction;
};

Point2 reflect(Point2 p, const Axis& axis);

// Rotation about the origin, optional mirror in the x axis applied first, then
// translation.
struct RigidTransform {
    double angle_rad = 0.0;
    Point2 translation;
    bool mirror = false;

    [[nodiscard]] Point2 apply(Point2 p) const;
    [[nodiscard]] Point2 apply_direction(Point2 d) const;
};

Polygon transform(const Polygon& p, const RigidTransform& t);
Polyline transform(const Polyline& line, const RigidTransform& t);
Scene transform(const Scene& scene, const RigidTransform& t);

// Planar point set backed by a boolean polygon library. Immutable; copies
// share storage.
class Region {
public:
    Region();

    static Region from_polygons(std::span<const Polygon> polygons);
    static Region from_quads(std::span<const Quad> quads);

    [[nodiscard]] Region intersect(const Region& other) const;
    [[nodiscard]] Region unite(const Region& other) const;
    [[nodiscard]] Region reflected(const Axis& axis) const;
    [[nodiscard]] double area() const;
    [[nodiscard]] double intersection_area(const Region& other) const;
    [[nodiscard]] double symmetric_difference_area(const Region& other) const;
    // Principal axes of the area's second moments (major first); empty when
    // the region is empty or isotropic.
    [[nodiscard]] std::vector<Axis> principal_axes() const;
    [[nodiscard]] bool empty() const;

    struct Impl;

private:
    explicit Region(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> m_impl;
};

// Principal axes (major first) of a point cloud through its centroid; empty
// when the cloud is degenerate or isotropic.
std::vector<Axis> principal_axes(std::span<const Point2> points);

} // namespace vlc::geometry
