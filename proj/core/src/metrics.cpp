#include "vlc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <numeric>
#include <string>
#include <unordered_map>

namespace vlc::metrics {

using geometry::BandRect;
using geometry::Polygon;
using geometry::Quad;
using geometry::Region;

struct MetricCache::Impl {
    std::size_t capacity = 0;
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::unordered_map<std::string, SegmentSymmetry> symmetry;
    std::unordered_map<std::string, double> clutter;
    std::unordered_map<std::string, TemplateFit> order;
};

MetricCache::MetricCache(std::size_t capacity) : m_impl(std::make_unique<Impl>()) {
    m_impl->capacity = capacity;
}
MetricCache::~MetricCache() = default;

std::size_t MetricCache::hits() const noexcept {
    return m_impl->hits;
}

std::size_t MetricCache::misses() const noexcept {
    return m_impl->misses;
}

struct CacheAccess {
    static constexpr auto symmetry = &MetricCache::Impl::symmetry;
    static constexpr auto clutter = &MetricCache::Impl::clutter;
    static constexpr auto order = &MetricCache::Impl::order;

    // Looks `key` up in one of the cache's maps, computing and storing on a miss.
    template <typename Value, typename Member, typename Compute>
    static Value memo(MetricCache* cache, Member member, std::string key, Compute compute) {
        if (cache == nullptr) {
            return compute();
        }
        auto& impl = *cache->m_impl;
        auto& map = impl.*member;
        if (auto it = map.find(key); it != map.end()) {
            ++impl.hits;
            return it->second;
        }
        ++impl.misses;
        Value v = compute();
        if (map.size() >= impl.capacity) {
            map.clear();
        }
        map.emplace(std::move(key), v);
        return v;
    }
};

std::string_view to_string(VisibilityMode mode) {
    return mode == VisibilityMode::Endpoint ? "endpoint" : "remaining_path";
}

VisibilityMode visibility_mode_from_string(std::string_view s) {
    if (s == "endpoint") {
        return VisibilityMode::Endpoint;
    }
    if (s == "remaining_path") {
        return VisibilityMode::RemainingPath;
    }
    throw Error(ErrorCode::ValidationError, "unknown visibility mode '" + std::string(s) + "'");
}

std::string_view to_string(OrderTemplate t) {
    switch (t) {
    case OrderTemplate::Line:
        return "line";
    case OrderTemplate::Grid:
        return "grid";
    case OrderTemplate::Circle:
        return "circle";
    case OrderTemplate::None:
        break;
    }
    return "none";
}

RotationMeasure rotation_metric(const NavPath& path, std::optional<std::size_t> segment) {
    const std::size_t n = path.line.vertices.size();
    std::size_t lo = 1;
    std::size_t hi = n - 1; // exclusive
    if (segment) {
        const auto& s = path.segments.at(*segment);
        lo = s.first_vertex + 1;
        hi = std::min(s.last_vertex + 1, n - 1);
    }
    RotationMeasure out;
    for (std::size_t i = lo; i < hi; ++i) {
        const double a = path.turn_angles_deg[i];
        out.accumulated_degrees += a;
        if (a > path.turn_threshold_deg) {
            ++out.turn_count;
        }
    }
    return out;
}

SizeMeasure size_metric(const Scene& scene, const NavPath& path, std::optional<std::size_t> segment) {
    std::size_t lo = 0;
    std::size_t hi = path.edge_count();
    if (segment) {
        const auto& s = path.segments.at(*segment);
        lo = s.first_vertex;
        hi = s.last_vertex;
    }
    double length = 0.0;
    double width = 0.0;
    double height = 0.0;
    for (std::size_t e = lo; e < hi; ++e) {
        const auto& c = path.edge_corridors[e];
        if (!c) {
            throw Error(ErrorCode::MissingCorridor, "path edge " + std::to_string(e) + " has no associated corridor");
        }
        const double len = path.chainage[e + 1] - path.chainage[e];
        length += len;
        width += len * scene.corridors[*c].width;
        height += len * scene.corridors[*c].height;
    }
    if (!(length > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "path has zero length");
    }
    return {width / length, height / length, segment ? length : path.length()};
}

VisibilityMeasure visibility_metric(const Scene& scene, const NavPath& path, double sample_spacing,
                                    VisibilityMode mode) {
    const auto samples = geometry::sample_path(path, sample_spacing);
    const geometry::Occluders occluders(scene);
    const Point2 end = path.line.vertices.back();

    auto vantage_fraction = [&](std::size_t i, Point2 p) {
        if (mode == VisibilityMode::Endpoint) {
            return occluders.visible(p, end) ? 1.0 : 0.0;
        }
        std::size_t seen = occluders.visible(p, end) ? 1 : 0;
        std::size_t total = 1;
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            seen += occluders.visible(p, samples[j].point) ? 1 : 0;
            ++total;
        }
        return static_cast<double>(seen) / static_cast<double>(total);
    };

    const std::size_t nseg = path.segments.size();
    std::vector<double> seg_sum(nseg, 0.0);
    std::vector<std::size_t> seg_count(nseg, 0);
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = vantage_fraction(i, samples[i].point);
        sum += f;
        seg_sum[samples[i].segment] += f;
        ++seg_count[samples[i].segment];
    }

    VisibilityMeasure out;
    out.sample_count = samples.size();
    out.visible_fraction = sum / static_cast<double>(samples.size());
    out.per_segment_fractions.resize(nseg);
    for (std::size_t s = 0; s < nseg; ++s) {
        if (seg_count[s] > 0) {
            out.per_segment_fractions[s] = seg_sum[s] / static_cast<double>(seg_count[s]);
            continue;
        }
        // segment shorter than the spacing: report its midpoint vantage only
        const auto& seg = path.segments[s];
        const double mid = 0.5 * (path.chainage[seg.first_vertex] + path.chainage[seg.last_vertex]);
        const Point2 p = geometry::point_at_chainage(path, mid);
        std::size_t after = 0;
        while (after < samples.size() && samples[after].chainage <= mid) {
            ++after;
        }
        out.per_segment_fractions[s] = vantage_fraction(after == 0 ? 0 : after - 1, p);
    }
    return out;
}

namespace {

std::vector<Quad> segment_quads(const std::vector<BandRect>& band, std::size_t segment) {
    std::vector<Quad> out;
    for (const auto& r : band) {
        if (r.segment == segment) {
            out.push_back(r.corners);
        }
    }
    return out;
}

std::vector<Polygon> solid_shapes(const Scene& scene) {
    std::vector<Polygon> out;
    out.reserve(scene.walls.size() + scene.obstacles.size());
    for (const auto& w : scene.walls) {
        out.push_back(w.shape);
    }
    for (const auto& o : scene.obstacles) {
        out.push_back(o.footprint);
    }
    return out;
}

std::vector<Axis> band_axes(const NavPath& path, std::size_t segment, const std::vector<Quad>& quads) {
    const Point2 d = segment_chord(path, segment);
    const Point2 n = geometry::perp(d);
    const Point2 o = path.line.vertices[path.segments[segment].first_vertex];
    double umin = std::numeric_limits<double>::infinity();
    double umax = -umin;
    double vmin = umin;
    double vmax = -umin;
    for (const auto& q : quads) {
        for (const Point2 p : q) {
            const double u = geometry::dot(p - o, d);
            const double v = geometry::dot(p - o, n);
            umin = std::min(umin, u);
            umax = std::max(umax, u);
            vmin = std::min(vmin, v);
            vmax = std::max(vmax, v);
        }
    }
    const Point2 c = o + d * (0.5 * (umin + umax)) + n * (0.5 * (vmin + vmax));
    return {Axis{c, d}, Axis{c, n}};
}

struct SegmentGeometry {
    Region clipped;
    std::vector<Axis> axes;
};

struct Box {
    Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Point2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

    void add(Point2 p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    [[nodiscard]] bool overlaps(const Box& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
};

template <typename Range>
Box box_of(const Range& pts) {
    Box b;
    for (const Point2 p : pts) {
        b.add(p);
    }
    return b;
}

// Only shapes whose bounding box touches the quads can contribute to a clip.
std::vector<Polygon> shapes_touching(std::span<const Polygon> shapes, std::span<const Quad> quads) {
    Box area;
    for (const auto& q : quads) {
        for (const Point2 p : q) {
            area.add(p);
        }
    }
    std::vector<Polygon> near;
    for (const auto& s : shapes) {
        if (box_of(s.ring()).overlaps(area)) {
            near.push_back(s);
        }
    }
    return near;
}

Region solids_near(std::span<const Polygon> shapes, std::span<const Quad> quads) {
    return Region::from_polygons(shapes_touching(shapes, quads));
}

// Cache keys are the raw bytes of every input double.
class KeyWriter {
public:
    void add(double v) { m_key.append(reinterpret_cast<const char*>(&v), sizeof v); }
    void add(Point2 p) {
        add(p.x);
        add(p.y);
    }
    void add(std::span<const Point2> pts) {
        add(static_cast<double>(pts.size()));
        for (const Point2 p : pts) {
            add(p);
        }
    }
    void add(std::span<const Quad> quads) {
        for (const auto& q : quads) {
            add(std::span<const Point2>(q));
        }
    }
    void add(const std::vector<Polygon>& shapes) {
        for (const auto& s : shapes) {
            add(std::span<const Point2>(s.ring()));
        }
    }
    [[nodiscard]] const std::string& str() const { return m_key; }
    std::string take() { return std::move(m_key); }

private:
    std::string m_key;
};

SegmentGeometry segment_geometry(const NavPath& path, const std::vector<BandRect>& band,
                                 std::span<const Polygon> shapes, std::size_t segment) {
    const auto quads = segment_quads(band, segment);
    SegmentGeometry g;
    g.clipped = Region::from_quads(quads).intersect(solids_near(shapes, quads));
    g.axes = band_axes(path, segment, quads);
    for (const auto& a : g.clipped.principal_axes()) {
        g.axes.push_back(a);
    }
    return g;
}

} // namespace

Point2 segment_chord(const NavPath& path, std::size_t segment) {
    const auto& s = path.segments.at(segment);
    return geometry::normalized(path.line.vertices[s.last_vertex] - path.line.vertices[s.first_vertex]);
}

std::vector<Axis> symmetry_candidate_axes(const Scene& scene, const NavPath& path, std::size_t segment) {
    const auto band = geometry::corridor_band(scene, path);
    const auto shapes = solid_shapes(scene);
    return segment_geometry(path, band, shapes, segment).axes;
}

namespace {

SegmentSymmetry segment_symmetry(const NavPath& path, const std::vector<BandRect>& band,
                                 std::span<const Polygon> shapes, std::size_t s) {
    const SegmentGeometry g = segment_geometry(path, band, shapes, s);
    SegmentSymmetry seg;
    seg.axis = g.axes.front();
    seg.geometry_area = g.clipped.empty() ? 0.0 : g.clipped.area();
    if (seg.geometry_area > 0.0) {
        double best = -1.0;
        for (const auto& axis : g.axes) {
            const double diff = g.clipped.symmetric_difference_area(g.clipped.reflected(axis));
            const double score = std::clamp(1.0 - diff / (2.0 * seg.geometry_area), 0.0, 1.0);
            if (score > best + 1e-9) {
                best = score;
                seg.axis = axis;
            }
        }
        seg.score = best;
    }
    return seg;
}

} // namespace

SymmetryMeasure symmetry_metric(const Scene& scene, const NavPath& path, MetricCache* cache) {
    const auto band = geometry::corridor_band(scene, path);
    const auto shapes = solid_shapes(scene);

    SymmetryMeasure out;
    double weighted = 0.0;
    double total_area = 0.0;
    double largest = -1.0;
    for (std::size_t s = 0; s < path.segments.size(); ++s) {
        std::string key;
        if (cache != nullptr) {
            const auto quads = segment_quads(band, s);
            KeyWriter w;
            w.add(quads);
            w.add(segment_chord(path, s));
            w.add(path.line.vertices[path.segments[s].first_vertex]);
            w.add(shapes_touching(shapes, quads));
            key = w.take();
        }
        const SegmentSymmetry seg = CacheAccess::memo<SegmentSymmetry>(
            cache, CacheAccess::symmetry, std::move(key),
            [&] { return segment_symmetry(path, band, shapes, s); });
        weighted += seg.score * seg.geometry_area;
        total_area += seg.geometry_area;
        if (seg.geometry_area > largest + 1e-9) {
            largest = seg.geometry_area;
            out.best_axis = seg.axis;
        }
        out.per_segment.push_back(seg);
    }
    out.best_score = total_area > 0.0 ? weighted / total_area : 1.0;
    return out;
}

ClutterMeasure clutter_metric(const Scene& scene, const NavPath& path, MetricCache* cache) {
    const auto band = geometry::corridor_band(scene, path);
    std::vector<Polygon> footprints;
    footprints.reserve(scene.obstacles.size());
    for (const auto& o : scene.obstacles) {
        footprints.push_back(o.footprint);
    }

    const std::size_t nseg = path.segments.size();
    std::vector<double> covered(nseg, 0.0);
    std::vector<double> area(nseg, 0.0);
    for (const auto& r : band) {
        const double a = r.area();
        if (!(a > 0.0)) {
            throw Error(ErrorCode::DegenerateGeometry, "corridor band has zero area");
        }
        area[r.segment] += a;
        if (!footprints.empty()) {
            const std::span<const Quad> q(&r.corners, 1);
            std::string key;
            if (cache != nullptr) {
                KeyWriter w;
                w.add(q);
                w.add(shapes_touching(footprints, q));
                key = w.take();
            }
            covered[r.segment] += CacheAccess::memo<double>(cache, CacheAccess::clutter, std::move(key), [&] {
                return Region::from_quads(q).intersect(solids_near(footprints, q)).area();
            });
        }
    }
    ClutterMeasure out;
    const double total_area = std::accumulate(area.begin(), area.end(), 0.0);
    const double total_covered = std::accumulate(covered.begin(), covered.end(), 0.0);
    out.coverage_fraction = std::clamp(total_covered / total_area, 0.0, 1.0);
    for (std::size_t s = 0; s < nseg; ++s) {
        out.per_segment_fractions.push_back(std::clamp(covered[s] / area[s], 0.0, 1.0));
    }
    return out;
}

std::vector<std::size_t> obstacles_in_segment(const Scene& scene, const NavPath& path, std::size_t segment) {
    const auto band = geometry::corridor_band(scene, path);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
        const Point2 c = geometry::centroid(scene.obstacles[i].footprint);
        for (const auto& r : band) {
            if (r.segment == segment && r.contains(c)) {
                out.push_back(i);
                break;
            }
        }
    }
    return out;
}

namespace {

// Half away from zero, like std::round, but a plain truncating conversion
// rather than a libm call (this sits in the grid search's inner loop).
inline double round_int(double x) {
    return static_cast<double>(static_cast<long long>(x >= 0.0 ? x + 0.5 : x - 0.5));
}

} // namespace

Point2 TemplateFit::nearest(Point2 p) const {
    switch (kind) {
    case OrderTemplate::Line:
        return origin + direction * geometry::dot(p - origin, direction);
    case OrderTemplate::Grid: {
        const Point2 v = geometry::perp(direction);
        const double du = geometry::dot(p - origin, direction);
        const double dv = geometry::dot(p - origin, v);
        return origin + direction * (spacing * round_int(du / spacing)) + v * (spacing * round_int(dv / spacing));
    }
    case OrderTemplate::Circle: {
        const Point2 d = p - origin;
        const double n = geometry::norm(d);
        return n > 0.0 ? origin + d * (radius / n) : origin + Point2{radius, 0.0};
    }
    case OrderTemplate::None:
        break;
    }
    return p;
}

namespace {

struct Candidate {
    std::size_t ordered = 0;
    TemplateFit fit;
};

std::size_t count_within(const std::vector<double>& residuals, double tol) {
    return static_cast<std::size_t>(
        std::count_if(residuals.begin(), residuals.end(), [tol](double r) { return r <= tol; }));
}

// Total least squares line through `pts` (all when `mask` is empty).
std::optional<TemplateFit> fit_line(std::span<const Point2> pts, const std::vector<bool>& mask) {
    std::vector<Point2> use;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (mask.empty() || mask[i]) {
            use.push_back(pts[i]);
        }
    }
    if (use.empty()) {
        return std::nullopt;
    }
    Point2 c;
    for (const Point2 p : use) {
        c = c + p;
    }
    c = c / static_cast<double>(use.size());
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const Point2 p : use) {
        const Point2 q = p - c;
        sxx += q.x * q.x;
        sxy += q.x * q.y;
        syy += q.y * q.y;
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    TemplateFit fit;
    fit.kind = OrderTemplate::Line;
    fit.origin = c;
    fit.direction = {std::cos(theta), std::sin(theta)};
    for (const Point2 p : pts) {
        fit.residuals.push_back(std::abs(geometry::cross(fit.direction, p - c)));
    }
    return fit;
}

// Algebraic (Kasa) circle fit on centred coordinates.
std::optional<TemplateFit> fit_circle(std::span<const Point2> pts, const std::vector<bool>& mask) {
    std::vector<Point2> use;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (mask.empty() || mask[i]) {
            use.push_back(pts[i]);
        }
    }
    if (use.size() < 3) {
        return std::nullopt;
    }
    Point2 c;
    for (const Point2 p : use) {
        c = c + p;
    }
    c = c / static_cast<double>(use.size());
    // minimise sum (x^2 + y^2 + D x + E y + F)^2
    double m[3][4] = {};
    for (const Point2 p0 : use) {
        const Point2 p = p0 - c;
        const double row[3] = {p.x, p.y, 1.0};
        const double rhs = -(p.x * p.x + p.y * p.y);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                m[i][j] += row[i] * row[j];
            }
            m[i][3] += row[i] * rhs;
        }
    }
    const double scale = m[0][0] + m[1][1] + m[2][2];
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) {
                pivot = r;
            }
        }
        if (std::abs(m[pivot][col]) <= 1e-12 * scale) {
            return std::nullopt;
        }
        std::swap(m[col], m[pivot]);
        for (int r = 0; r < 3; ++r) {
            if (r == col) {
                continue;
            }
            const double f = m[r][col] / m[col][col];
            for (int k = col; k < 4; ++k) {
                m[r][k] -= f * m[col][k];
            }
        }
    }
    const double d = m[0][3] / m[0][0];
    const double e = m[1][3] / m[1][1];
    const double f = m[2][3] / m[2][2];
    const double r2 = 0.25 * (d * d + e * e) - f;
    if (!(r2 > 0.0)) {
        return std::nullopt;
    }
    TemplateFit fit;
    fit.kind = OrderTemplate::Circle;
    fit.origin = c + Point2{-0.5 * d, -0.5 * e};
    fit.radius = std::sqrt(r2);
    for (const Point2 p : pts) {
        fit.residuals.push_back(std::abs(geometry::distance(p, fit.origin) - fit.radius));
    }
    return fit;
}

// Fit, then refit once on the inliers; keep whichever orders more points.
template <typename Fitter>
std::optional<TemplateFit> fit_with_refit(std::span<const Point2> pts, double tol, Fitter fitter) {
    auto first = fitter(pts, {});
    if (!first) {
        return std::nullopt;
    }
    first->ordered = count_within(first->residuals, tol);
    if (first->ordered == pts.size() || first->ordered == 0) {
        return first;
    }
    std::vector<bool> mask;
    for (const double r : first->residuals) {
        mask.push_back(r <= tol);
    }
    auto second = fitter(pts, mask);
    if (second) {
        second->ordered = count_within(second->residuals, tol);
        if (second->ordered > first->ordered) {
            return second;
        }
    }
    return first;
}

double median_nearest_neighbour(std::span<const Point2> pts) {
    std::vector<double> nn;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < pts.size(); ++j) {
            if (i != j) {
                best = std::min(best, geometry::distance(pts[i], pts[j]));
            }
        }
        nn.push_back(best);
    }
    std::sort(nn.begin(), nn.end());
    const std::size_t n = nn.size();
    return n % 2 == 1 ? nn[n / 2] : 0.5 * (nn[n / 2 - 1] + nn[n / 2]);
}

std::optional<TemplateFit> fit_grid(std::span<const Point2> pts, double tol, Point2 reference) {
    const std::size_t n = pts.size();
    if (n == 1) {
        TemplateFit fit;
        fit.kind = OrderTemplate::Grid;
        fit.origin = pts[0];
        fit.direction = reference;
        fit.spacing = 1.0;
        fit.residuals = {0.0};
        fit.ordered = 1;
        return fit;
    }
    const double nn = median_nearest_neighbour(pts);
    if (!(nn > 0.1)) {
        return std::nullopt;
    }
    // Below 4 tol the tolerance disc covers a fifth of every cell and random
    // points start to "fit"; such fine lattices are not a layout anyone sees.
    const double lo = std::max(0.5 * nn, 4.0 * tol);
    const double hi = std::max(1.5 * nn, lo);
    std::vector<double> spacings;
    for (int k = 0;; ++k) {
        const double s = lo + 0.05 * k;
        if (s > hi + 1e-9) {
            break;
        }
        spacings.push_back(s);
    }
    const double tol2 = tol * tol;
    const double base = std::atan2(reference.y, reference.x);
    std::vector<double> pu(n);
    std::vector<double> pv(n);
    // Points are bucketed by their residue on the cell torus; only the 3x3
    // neighbouring buckets of an anchor can hold points within tol of it.
    std::vector<std::size_t> cell_of(n);
    std::vector<std::size_t> bucket_start;
    std::vector<std::size_t> bucket_items(n);
    std::size_t best = 0;
    double best_theta = base;
    double best_s = spacings.front();
    std::size_t best_anchor = 0;
    for (int deg = 0; deg < 90 && best < n; ++deg) {
        const double theta = base + deg * std::numbers::pi / 180.0;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        for (std::size_t i = 0; i < n; ++i) {
            pu[i] = c * pts[i].x + s * pts[i].y;
            pv[i] = -s * pts[i].x + c * pts[i].y;
        }
        for (const double sp : spacings) {
            const double inv = 1.0 / sp;
            const auto m = static_cast<std::size_t>(std::floor(sp / (tol * 1.01)));
            const double cell = sp / static_cast<double>(m);
            auto index = [&](double x) {
                const double r = x - sp * std::floor(x * inv);
                return std::min(m - 1, static_cast<std::size_t>(std::max(0.0, r / cell)));
            };
            bucket_start.assign(m * m + 1, 0);
            for (std::size_t i = 0; i < n; ++i) {
                cell_of[i] = index(pu[i]) * m + index(pv[i]);
                ++bucket_start[cell_of[i] + 1];
            }
            for (std::size_t b = 0; b < m * m; ++b) {
                bucket_start[b + 1] += bucket_start[b];
            }
            {
                auto fill = bucket_start;
                for (std::size_t i = 0; i < n; ++i) {
                    bucket_items[fill[cell_of[i]]++] = i;
                }
            }
            for (std::size_t a = 0; a < n; ++a) {
                const std::size_t cu = cell_of[a] / m;
                const std::size_t cv = cell_of[a] % m;
                std::size_t bound = 0;
                for (std::size_t du_cell : {cu + m - 1, cu, cu + 1}) {
                    for (std::size_t dv_cell : {cv + m - 1, cv, cv + 1}) {
                        const std::size_t b = (du_cell % m) * m + dv_cell % m;
                        bound += bucket_start[b + 1] - bucket_start[b];
                    }
                }
                if (bound <= best) {
                    continue;
                }
                std::size_t count = 0;
                for (std::size_t du_cell : {cu + m - 1, cu, cu + 1}) {
                    for (std::size_t dv_cell : {cv + m - 1, cv, cv + 1}) {
                        const std::size_t b = (du_cell % m) * m + dv_cell % m;
                        for (std::size_t k = bucket_start[b]; k < bucket_start[b + 1]; ++k) {
                            const std::size_t i = bucket_items[k];
                            const double du = pu[i] - pu[a];
                            const double rx = du - sp * round_int(du * inv);
                            if (rx * rx > tol2) {
                                continue;
                            }
                            const double dv = pv[i] - pv[a];
                            const double ry = dv - sp * round_int(dv * inv);
                            if (rx * rx + ry * ry <= tol2) {
                                ++count;
                            }
                        }
                    }
                }
                if (count > best) {
                    best = count;
                    best_theta = theta;
                    best_s = sp;
                    best_anchor = a;
                    if (best == n) {
                        break;
                    }
                }
            }
            if (best == n) {
                break;
            }
        }
    }
    TemplateFit fit;
    fit.kind = OrderTemplate::Grid;
    fit.origin = pts[best_anchor];
    fit.direction = {std::cos(best_theta), std::sin(best_theta)};
    fit.spacing = best_s;
    for (const Point2 p : pts) {
        fit.residuals.push_back(geometry::distance(p, fit.nearest(p)));
    }
    fit.ordered = best;
    return fit;
}

} // namespace

TemplateFit fit_order_templates(std::span<const Point2> points, double residual_tolerance, Point2 reference_direction) {
    if (!(residual_tolerance > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "residual tolerance must be positive");
    }
    if (points.empty()) {
        return {};
    }
    // precedence on ties: grid, line, circle
    std::optional<TemplateFit> best = fit_grid(points, residual_tolerance, reference_direction);
    for (auto candidate : {fit_with_refit(points, residual_tolerance, fit_line),
                           fit_with_refit(points, residual_tolerance, fit_circle)}) {
        if (candidate && (!best || candidate->ordered > best->ordered)) {
            best = std::move(candidate);
        }
    }
    return best ? *best : TemplateFit{};
}

namespace {

std::vector<Point2> segment_centroids(const std::vector<BandRect>& band, std::span<const Point2> centroids,
                                      std::size_t s) {
    std::vector<Point2> pts;
    for (const Point2 c : centroids) {
        for (const auto& r : band) {
            if (r.segment == s && r.contains(c)) {
                pts.push_back(c);
                break;
            }
        }
    }
    return pts;
}

TemplateFit cached_fit(std::vector<Point2> pts, Point2 chord, double tol, MetricCache* cache) {
    std::string key;
    if (cache != nullptr) {
        KeyWriter w;
        w.add(pts);
        w.add(chord);
        w.add(tol);
        key = w.take();
    }
    return CacheAccess::memo<TemplateFit>(cache, CacheAccess::order, std::move(key),
                                          [&] { return fit_order_templates(pts, tol, chord); });
}

std::vector<Point2> all_centroids(const Scene& scene) {
    std::vector<Point2> out;
    out.reserve(scene.obstacles.size());
    for (const auto& o : scene.obstacles) {
        out.push_back(geometry::centroid(o.footprint));
    }
    return out;
}

} // namespace

TemplateFit segment_order_fit(const Scene& scene, const NavPath& path, std::size_t segment, double residual_tolerance,
                              MetricCache* cache) {
    if (!(residual_tolerance > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "residual tolerance must be positive");
    }
    const auto band = geometry::corridor_band(scene, path);
    const auto centroids = all_centroids(scene);
    return cached_fit(segment_centroids(band, centroids, segment), segment_chord(path, segment), residual_tolerance,
                      cache);
}

OrderMeasure order_metric(const Scene& scene, const NavPath& path, double residual_tolerance, MetricCache* cache) {
    if (!(residual_tolerance > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "residual tolerance must be positive");
    }
    const auto band = geometry::corridor_band(scene, path);
    const auto centroids = all_centroids(scene);

    OrderMeasure out;
    std::size_t ordered = 0;
    std::size_t total = 0;
    std::array<std::size_t, 4> by_template{};
    for (std::size_t s = 0; s < path.segments.size(); ++s) {
        auto pts = segment_centroids(band, centroids, s);
        const std::size_t n = pts.size();
        const TemplateFit fit = cached_fit(std::move(pts), segment_chord(path, s), residual_tolerance, cache);
        out.per_segment_fractions.push_back(n == 0 ? 1.0 : static_cast<double>(fit.ordered) / static_cast<double>(n));
        out.per_segment_templates.push_back(fit.kind);
        ordered += fit.ordered;
        total += n;
        by_template[static_cast<std::size_t>(fit.kind)] += fit.ordered;
    }
    out.object_count = total;
    out.ordered_fraction = total == 0 ? 1.0 : static_cast<double>(ordered) / static_cast<double>(total);
    if (total > 0) {
        out.best_template = OrderTemplate::Grid;
        for (const auto t : {OrderTemplate::Line, OrderTemplate::Circle}) {
            if (by_template[static_cast<std::size_t>(t)] > by_template[static_cast<std::size_t>(out.best_template)]) {
                out.best_template = t;
            }
        }
    }
    return out;
}

} // namespace vlc::metrics
