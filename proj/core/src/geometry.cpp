#include "vlc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vlc::geometry {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Closed-segment intersection with a coincidence tolerance.
bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d) {
    const Point2 r = b - a;
    const Point2 s = d - c;
    const double rl = norm(r);
    const double sl = norm(s);
    const Point2 qa = c - a;
    const double denom = cross(r, s);
    if (std::abs(denom) <= 1e-12 * rl * sl) {
        if (std::abs(cross(qa, r)) > kCoincidenceEps * rl) {
            return false;
        }
        const double t0 = dot(qa, r) / (rl * rl);
        const double t1 = dot(d - a, r) / (rl * rl);
        const double et = kCoincidenceEps / rl;
        return std::max(t0, t1) >= -et && std::min(t0, t1) <= 1.0 + et;
    }
    const double t = cross(qa, s) / denom;
    const double u = cross(qa, r) / denom;
    const double et = kCoincidenceEps / rl;
    const double eu = kCoincidenceEps / sl;
    return t >= -et && t <= 1.0 + et && u >= -eu && u <= 1.0 + eu;
}

double turn_angle_deg(Point2 prev, Point2 at, Point2 next) {
    const Point2 d1 = at - prev;
    const Point2 d2 = next - at;
    return std::atan2(std::abs(cross(d1, d2)), dot(d1, d2)) * kRadToDeg;
}

std::vector<Point2> drop_closing_vertex(std::vector<Point2> ring) {
    if (ring.size() > 1 && distance(ring.front(), ring.back()) <= kCoincidenceEps) {
        ring.pop_back();
    }
    return ring;
}

} // namespace

Point2 normalized(Point2 v) {
    const double n = norm(v);
    if (!(n > kCoincidenceEps) || !std::isfinite(n)) {
        throw Error(ErrorCode::DegenerateGeometry, "cannot normalize a zero-length vector");
    }
    return v / n;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double l2 = dot(ab, ab);
    if (l2 <= 0.0) {
        return distance(p, a);
    }
    const double t = std::clamp(dot(p - a, ab) / l2, 0.0, 1.0);
    return distance(p, a + ab * t);
}

double Polyline::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < vertices.size(); ++i) {
        total += distance(vertices[i - 1], vertices[i]);
    }
    return total;
}

void validate(const Polyline& line) {
    const auto& v = line.vertices;
    if (v.size() < 2) {
        throw Error(ErrorCode::DegenerateGeometry, "polyline needs at least 2 vertices");
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!is_finite(v[i])) {
            throw Error(ErrorCode::DegenerateGeometry, "polyline vertex " + std::to_string(i) + " is not finite");
        }
        if (i > 0 && distance(v[i - 1], v[i]) <= kCoincidenceEps) {
            throw Error(ErrorCode::DegenerateGeometry,
                        "polyline vertices " + std::to_string(i - 1) + " and " + std::to_string(i) + " coincide");
        }
    }
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const Point2 d1 = v[i] - v[i - 1];
        const Point2 d2 = v[i + 1] - v[i];
        if (std::abs(cross(d1, d2)) <= 1e-12 * norm(d1) * norm(d2) && dot(d1, d2) < 0.0) {
            throw Error(ErrorCode::DegenerateGeometry, "polyline reverses on itself at vertex " + std::to_string(i));
        }
    }
}

double signed_area(std::span<const Point2> ring) {
    double twice = 0.0;
    for (std::size_t i = 0, n = ring.size(); i < n; ++i) {
        twice += cross(ring[i], ring[(i + 1) % n]);
    }
    return 0.5 * twice;
}

bool is_simple(std::span<const Point2> ring) {
    const std::size_t n = ring.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = ring[i];
        const Point2 b = ring[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
            const Point2 c = ring[j];
            const Point2 d = ring[(j + 1) % n];
            if (adjacent) {
                // adjacent edges may only share their common vertex
                const Point2 shared = (j == i + 1) ? b : a;
                const Point2 other_i = (j == i + 1) ? a : b;
                const Point2 other_j = (j == i + 1) ? d : c;
                const Point2 e1 = other_i - shared;
                const Point2 e2 = other_j - shared;
                if (std::abs(cross(e1, e2)) <= 1e-12 * norm(e1) * norm(e2) && dot(e1, e2) > 0.0) {
                    return false;
                }
                continue;
            }
            if (segments_touch(a, b, c, d)) {
                return false;
            }
        }
    }
    return true;
}

Polygon::Polygon(std::vector<Point2> ring) : m_ring(drop_closing_vertex(std::move(ring))) {
    if (m_ring.size() < 3) {
        throw Error(ErrorCode::DegenerateGeometry, "polygon needs at least 3 distinct vertices");
    }
    for (std::size_t i = 0; i < m_ring.size(); ++i) {
        if (!is_finite(m_ring[i])) {
            throw Error(ErrorCode::DegenerateGeometry, "polygon vertex " + std::to_string(i) + " is not finite");
        }
        if (distance(m_ring[i], m_ring[(i + 1) % m_ring.size()]) <= kCoincidenceEps) {
            throw Error(ErrorCode::DegenerateGeometry, "polygon has coincident consecutive vertices");
        }
    }
    const double a = signed_area(m_ring);
    if (std::abs(a) <= 1e-12) {
        throw Error(ErrorCode::DegenerateGeometry, "polygon has zero area");
    }
    if (!is_simple(m_ring)) {
        throw Error(ErrorCode::DegenerateGeometry, "polygon is self-intersecting");
    }
    if (a < 0.0) {
        std::reverse(m_ring.begin(), m_ring.end());
    }
}

double polygon_area(const Polygon& p) {
    if (p.size() < 3) {
        throw Error(ErrorCode::DegenerateGeometry, "polygon needs at least 3 distinct vertices");
    }
    return std::abs(signed_area(p.ring()));
}

Point2 centroid(const Polygon& p) {
    const auto& r = p.ring();
    double a2 = 0.0;
    Point2 acc;
    for (std::size_t i = 0, n = r.size(); i < n; ++i) {
        const Point2 u = r[i];
        const Point2 v = r[(i + 1) % n];
        const double w = cross(u, v);
        a2 += w;
        acc = acc + (u + v) * w;
    }
    return acc / (3.0 * a2);
}

bool point_in_polygon(const Polygon& p, Point2 q) {
    const auto& r = p.ring();
    bool inside = false;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        const Point2 a = r[i];
        const Point2 b = r[j];
        if ((a.y > q.y) != (b.y > q.y)) {
            const double x = a.x + (q.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (q.x < x) {
                inside = !inside;
            }
        }
    }
    return inside;
}

void validate(const Scene& scene) {
    const Bounds& b = scene.bounds;
    if (!is_finite(b.min) || !is_finite(b.max) || !(b.max.x > b.min.x) || !(b.max.y > b.min.y)) {
        throw Error(ErrorCode::ValidationError, "bounds must be a non-empty finite rectangle");
    }
    auto inside = [&](const std::vector<Point2>& pts) {
        return std::all_of(pts.begin(), pts.end(), [&](Point2 p) { return b.contains(p); });
    };
    for (const auto& w : scene.walls) {
        if (w.shape.empty()) {
            throw Error(ErrorCode::ValidationError, "wall '" + w.id + "' has no shape");
        }
        if (!inside(w.shape.ring())) {
            throw Error(ErrorCode::ValidationError, "wall '" + w.id + "' lies outside the bounds");
        }
    }
    for (const auto& o : scene.obstacles) {
        if (o.footprint.empty()) {
            throw Error(ErrorCode::ValidationError, "obstacle '" + o.id + "' has no footprint");
        }
        if (!(o.height > 0.0) || !std::isfinite(o.height)) {
            throw Error(ErrorCode::ValidationError, "obstacle '" + o.id + "' must have a finite positive height");
        }
        if (!inside(o.footprint.ring())) {
            throw Error(ErrorCode::ValidationError, "obstacle '" + o.id + "' lies outside the bounds");
        }
    }
    auto unique_ids = [](const auto& items, const char* kind) {
        std::vector<std::string> ids;
        for (const auto& item : items) {
            if (item.id.empty()) {
                throw Error(ErrorCode::ValidationError, std::string(kind) + " with an empty id");
            }
            ids.push_back(item.id);
        }
        std::sort(ids.begin(), ids.end());
        const auto dup = std::adjacent_find(ids.begin(), ids.end());
        if (dup != ids.end()) {
            throw Error(ErrorCode::ValidationError, "duplicate " + std::string(kind) + " id '" + *dup + "'");
        }
    };
    unique_ids(scene.walls, "wall");
    unique_ids(scene.obstacles, "obstacle");
    unique_ids(scene.corridors, "corridor");
    for (const auto& c : scene.corridors) {
        if (!(c.width > 0.0) || !(c.height > 0.0) || !std::isfinite(c.width) || !std::isfinite(c.height)) {
            throw Error(ErrorCode::ValidationError, "corridor '" + c.id + "' must have positive width and height");
        }
        if (!(c.length() > kCoincidenceEps)) {
            throw Error(ErrorCode::ValidationError, "corridor '" + c.id + "' has a zero-length axis");
        }
        if (!b.contains(c.a) || !b.contains(c.b)) {
            throw Error(ErrorCode::ValidationError, "corridor '" + c.id + "' lies outside the bounds");
        }
    }
}

Occluders::Occluders(const Scene& scene) : m_bounds(scene.bounds) {
    auto add = [&](const Polygon& shape) {
        const auto& r = shape.ring();
        Point2 lo = r.front();
        Point2 hi = r.front();
        for (std::size_t i = 0; i < r.size(); ++i) {
            m_edges.push_back({r[i], r[(i + 1) % r.size()]});
            lo = {std::min(lo.x, r[i].x), std::min(lo.y, r[i].y)};
            hi = {std::max(hi.x, r[i].x), std::max(hi.y, r[i].y)};
        }
        m_solids.push_back({&shape, lo, hi});
    };
    for (const auto& w : scene.walls) {
        add(w.shape);
    }
    for (const auto& o : scene.obstacles) {
        add(o.footprint);
    }
}

bool Occluders::visible(Point2 a, Point2 b) const {
    // canonical order makes the predicate exactly symmetric
    if (b.x < a.x || (b.x == a.x && b.y < a.y)) {
        std::swap(a, b);
    }
    const Point2 r = b - a;
    const double rl = norm(r);
    if (rl <= kCoincidenceEps) {
        return true;
    }
    const double et = kCoincidenceEps / rl;
    const Point2 lo{std::min(a.x, b.x) - kCoincidenceEps, std::min(a.y, b.y) - kCoincidenceEps};
    const Point2 hi{std::max(a.x, b.x) + kCoincidenceEps, std::max(a.y, b.y) + kCoincidenceEps};
    for (const Edge& e : m_edges) {
        if (std::max(e.a.x, e.b.x) < lo.x || std::min(e.a.x, e.b.x) > hi.x || std::max(e.a.y, e.b.y) < lo.y ||
            std::min(e.a.y, e.b.y) > hi.y) {
            continue;
        }
        const Point2 s = e.b - e.a;
        const double sl = norm(s);
        const Point2 qa = e.a - a;
        const double denom = cross(r, s);
        if (std::abs(denom) <= 1e-12 * rl * sl) {
            if (std::abs(cross(qa, r)) > kCoincidenceEps * rl) {
                continue;
            }
            const double t0 = dot(qa, r) / (rl * rl);
            const double t1 = dot(e.b - a, r) / (rl * rl);
            if (std::max(t0, t1) >= et && std::min(t0, t1) <= 1.0 - et) {
                return false;
            }
            continue;
        }
        const double t = cross(qa, s) / denom;
        const double u = cross(qa, r) / denom;
        const double eu = kCoincidenceEps / sl;
        if (t > et && t < 1.0 - et && u >= -eu && u <= 1.0 + eu) {
            return false;
        }
    }
    // a sight line that never crosses a boundary can still run inside a solid
    const Point2 mid = (a + b) * 0.5;
    for (const Solid& s : m_solids) {
        if (mid.x < s.lo.x || mid.x > s.hi.x || mid.y < s.lo.y || mid.y > s.hi.y) {
            continue;
        }
        if (point_in_polygon(*s.shape, mid)) {
            return false;
        }
    }
    return true;
}

RayHit Occluders::cast(Point2 origin, Point2 direction) const {
    const Point2 d = normalized(direction);
    double bound = std::numeric_limits<double>::infinity();
    if (d.x > 0.0) bound = std::min(bound, (m_bounds.max.x - origin.x) / d.x);
    if (d.x < 0.0) bound = std::min(bound, (m_bounds.min.x - origin.x) / d.x);
    if (d.y > 0.0) bound = std::min(bound, (m_bounds.max.y - origin.y) / d.y);
    if (d.y < 0.0) bound = std::min(bound, (m_bounds.min.y - origin.y) / d.y);
    bound = std::max(bound, 0.0);

    double best = std::numeric_limits<double>::infinity();
    for (const Edge& e : m_edges) {
        const Point2 s = e.b - e.a;
        const double sl = norm(s);
        const Point2 qa = e.a - origin;
        const double denom = cross(d, s);
        if (std::abs(denom) <= 1e-12 * sl) {
            if (std::abs(cross(qa, d)) > kCoincidenceEps) {
                continue;
            }
            for (const double t : {dot(qa, d), dot(e.b - origin, d)}) {
                if (t > kCoincidenceEps) {
                    best = std::min(best, t);
                }
            }
            continue;
        }
        const double t = cross(qa, s) / denom;
        const double u = cross(qa, d) / denom;
        const double eu = kCoincidenceEps / sl;
        if (t > kCoincidenceEps && u >= -eu && u <= 1.0 + eu) {
            best = std::min(best, t);
        }
    }
    if (best <= bound) {
        return {best, true};
    }
    return {bound, false};
}

RayHit ray_cast(const Scene& scene, Point2 origin, Point2 direction) {
    if (!scene.bounds.contains(origin)) {
        throw Error(ErrorCode::OutOfBounds, "ray origin outside scene bounds");
    }
    return Occluders(scene).cast(origin, direction);
}

bool line_of_sight(const Scene& scene, Point2 a, Point2 b) {
    if (!scene.bounds.contains(a) || !scene.bounds.contains(b)) {
        throw Error(ErrorCode::OutOfBounds, "sight line endpoint outside scene bounds");
    }
    return Occluders(scene).visible(a, b);
}

Segmentation segment_path(const Polyline& line, double turn_threshold_deg) {
    validate(line);
    if (!(turn_threshold_deg > 0.0 && turn_threshold_deg < 180.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "turn threshold must lie in (0, 180) degrees");
    }
    const auto& v = line.vertices;
    Segmentation out;
    out.turn_angles_deg.assign(v.size(), 0.0);
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        out.turn_angles_deg[i] = turn_angle_deg(v[i - 1], v[i], v[i + 1]);
    }
    std::size_t start = 0;
    double length = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        length += distance(v[i - 1], v[i]);
        const bool last = i + 1 == v.size();
        if (last || out.turn_angles_deg[i] > turn_threshold_deg) {
            out.segments.push_back({start, i, length, std::nullopt});
            start = i;
            length = 0.0;
        }
    }
    return out;
}

std::size_t NavPath::segment_of_edge(std::size_t edge) const {
    for (std::size_t s = 0; s < segments.size(); ++s) {
        if (edge >= segments[s].first_vertex && edge < segments[s].last_vertex) {
            return s;
        }
    }
    return segments.empty() ? 0 : segments.size() - 1;
}

NavPath make_nav_path(const Scene& scene, Polyline line, double turn_threshold_deg, std::string name) {
    Segmentation seg = segment_path(line, turn_threshold_deg);
    NavPath path;
    path.name = std::move(name);
    path.line = std::move(line);
    path.turn_threshold_deg = turn_threshold_deg;
    path.turn_angles_deg = std::move(seg.turn_angles_deg);
    path.segments = std::move(seg.segments);

    const auto& v = path.line.vertices;
    path.chainage.assign(v.size(), 0.0);
    for (std::size_t i = 1; i < v.size(); ++i) {
        path.chainage[i] = path.chainage[i - 1] + distance(v[i - 1], v[i]);
    }

    path.edge_corridors.assign(v.size() - 1, std::nullopt);
    for (std::size_t e = 0; e + 1 < v.size(); ++e) {
        const Point2 a = v[e];
        const Point2 b = v[e + 1];
        const Point2 mid = (a + b) * 0.5;
        std::optional<std::size_t> pick;
        double pick_d = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < scene.corridors.size(); ++k) {
            const auto& c = scene.corridors[k];
            const double d = std::max({point_segment_distance(a, c.a, c.b), point_segment_distance(b, c.a, c.b),
                                       point_segment_distance(mid, c.a, c.b)});
            if (d <= 0.5 * c.width + kMetricEps && d < pick_d - kCoincidenceEps) {
                pick = k;
                pick_d = d;
            }
        }
        path.edge_corridors[e] = pick;
    }

    for (auto& s : path.segments) {
        double longest = -1.0;
        for (std::size_t e = s.first_vertex; e < s.last_vertex; ++e) {
            const double len = path.chainage[e + 1] - path.chainage[e];
            if (len > longest + kCoincidenceEps) {
                longest = len;
                s.corridor = path.edge_corridors[e];
            }
        }
    }
    return path;
}

namespace {

std::size_t edge_at_chainage(const NavPath& path, double c) {
    std::size_t e = 0;
    for (std::size_t i = 1; i + 1 < path.chainage.size(); ++i) {
        if (path.chainage[i] <= c + kCoincidenceEps) {
            e = i;
        }
    }
    return e;
}

Point2 interpolate(const NavPath& path, std::size_t edge, double c) {
    const Point2 a = path.line.vertices[edge];
    const Point2 b = path.line.vertices[edge + 1];
    const double len = path.chainage[edge + 1] - path.chainage[edge];
    const double t = std::clamp((c - path.chainage[edge]) / len, 0.0, 1.0);
    return a + (b - a) * t;
}

} // namespace

std::vector<PathSample> sample_path(const NavPath& path, double spacing) {
    if (!(spacing > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "sample spacing must be positive");
    }
    const double total = path.length();
    if (path.line.vertices.size() < 2 || !(total > kCoincidenceEps)) {
        throw Error(ErrorCode::DegenerateGeometry, "cannot sample an empty path");
    }
    const auto count = static_cast<std::size_t>(std::floor((total - kCoincidenceEps) / spacing)) + 1;
    std::vector<PathSample> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double c = static_cast<double>(k) * spacing;
        const std::size_t e = edge_at_chainage(path, c);
        out.push_back({interpolate(path, e, c), c, e, path.segment_of_edge(e)});
    }
    return out;
}

Point2 point_at_chainage(const NavPath& path, double chainage) {
    const std::size_t e = edge_at_chainage(path, chainage);
    return interpolate(path, e, chainage);
}

double BandRect::area() const {
    return std::abs(signed_area(corners));
}

bool BandRect::contains(Point2 p) const {
    for (std::size_t i = 0; i < 4; ++i) {
        const Point2 a = corners[i];
        const Point2 b = corners[(i + 1) % 4];
        if (cross(b - a, p - a) < -kCoincidenceEps * distance(a, b)) {
            return false;
        }
    }
    return true;
}

std::vector<BandRect> corridor_band(const Scene& scene, const NavPath& path) {
    std::vector<BandRect> out;
    out.reserve(path.edge_count());
    for (std::size_t e = 0; e < path.edge_count(); ++e) {
        const auto& corridor = path.edge_corridors[e];
        if (!corridor) {
            throw Error(ErrorCode::MissingCorridor, "path edge " + std::to_string(e) + " has no associated corridor");
        }
        const double w = scene.corridors[*corridor].width;
        const Point2 a = path.line.vertices[e];
        const Point2 b = path.line.vertices[e + 1];
        const Point2 n = perp(normalized(b - a)) * (0.5 * w);
        out.push_back({Quad{a - n, b - n, b + n, a + n}, e, path.segment_of_edge(e), w});
    }
    return out;
}

Point2 reflect(Point2 p, const Axis& axis) {
    const Point2 d = normalized(axis.direction);
    const Point2 foot = axis.point + d * dot(p - axis.point, d);
    return foot * 2.0 - p;
}

Point2 RigidTransform::apply(Point2 p) const {
    return apply_direction(p) + translation;
}

Point2 RigidTransform::apply_direction(Point2 d) const {
    if (mirror) {
        d.y = -d.y;
    }
    const double c = std::cos(angle_rad);
    const double s = std::sin(angle_rad);
    return {c * d.x - s * d.y, s * d.x + c * d.y};
}

Polygon transform(const Polygon& p, const RigidTransform& t) {
    std::vector<Point2> ring;
    ring.reserve(p.size());
    for (const Point2 q : p.ring()) {
        ring.push_back(t.apply(q));
    }
    return Polygon(std::move(ring));
}

Polyline transform(const Polyline& line, const RigidTransform& t) {
    Polyline out;
    out.vertices.reserve(line.vertices.size());
    for (const Point2 q : line.vertices) {
        out.vertices.push_back(t.apply(q));
    }
    return out;
}

Scene transform(const Scene& scene, const RigidTransform& t) {
    Scene out;
    const Bounds& b = scene.bounds;
    const std::array<Point2, 4> corners{t.apply(b.min), t.apply({b.max.x, b.min.y}), t.apply(b.max),
                                        t.apply({b.min.x, b.max.y})};
    out.bounds = {corners[0], corners[0]};
    for (const Point2 c : corners) {
        out.bounds.min = {std::min(out.bounds.min.x, c.x), std::min(out.bounds.min.y, c.y)};
        out.bounds.max = {std::max(out.bounds.max.x, c.x), std::max(out.bounds.max.y, c.y)};
    }
    for (const auto& w : scene.walls) {
        out.walls.push_back({w.id, transform(w.shape, t), w.movable});
    }
    for (const auto& o : scene.obstacles) {
        out.obstacles.push_back({o.id, transform(o.footprint, t), o.height, o.tag, o.movable});
    }
    for (const auto& c : scene.corridors) {
        out.corridors.push_back({c.id, t.apply(c.a), t.apply(c.b), c.width, c.height});
    }
    return out;
}

std::vector<Axis> principal_axes(std::span<const Point2> points) {
    if (points.size() < 2) {
        return {};
    }
    Point2 c;
    for (const Point2 p : points) {
        c = c + p;
    }
    c = c / static_cast<double>(points.size());
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const Point2 p : points) {
        const Point2 q = p - c;
        sxx += q.x * q.x;
        sxy += q.x * q.y;
        syy += q.y * q.y;
    }
    const double half_diff = 0.5 * (sxx - syy);
    const double spread = std::hypot(half_diff, sxy);
    const double trace = sxx + syy;
    if (!(trace > 1e-18) || spread <= 1e-6 * trace) {
        return {};
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    const Point2 major{std::cos(theta), std::sin(theta)};
    return {Axis{c, major}, Axis{c, perp(major)}};
}

} // namespace vlc::geometry
