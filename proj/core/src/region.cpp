#include "vlc/geometry.hpp"

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

namespace bg = boost::geometry;

namespace vlc::geometry {

using BPoint = bg::model::d2::point_xy<double>;
using BPolygon = bg::model::polygon<BPoint, false, true>;
using BMulti = bg::model::multi_polygon<BPolygon>;

struct Region::Impl {
    BMulti shape;
};

namespace {

template <typename Range>
BPolygon to_boost(const Range& ring) {
    BPolygon out;
    for (const Point2 p : ring) {
        out.outer().emplace_back(p.x, p.y);
    }
    out.outer().emplace_back(ring[0].x, ring[0].y);
    bg::correct(out);
    return out;
}

// Pairwise (tree) union keeps intermediate results small.
BMulti unite_all(std::vector<BPolygon> parts) {
    std::vector<BMulti> level;
    level.reserve(parts.size());
    for (auto& p : parts) {
        level.push_back(BMulti{std::move(p)});
    }
    if (level.empty()) {
        return {};
    }
    while (level.size() > 1) {
        std::vector<BMulti> next;
        next.reserve((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            BMulti merged;
            bg::union_(level[i], level[i + 1], merged);
            next.push_back(std::move(merged));
        }
        if (level.size() % 2 == 1) {
            next.push_back(std::move(level.back()));
        }
        level = std::move(next);
    }
    return std::move(level.front());
}

} // namespace

Region::Region() : m_impl(std::make_shared<Impl>()) {}

Region::Region(std::shared_ptr<const Impl> impl) : m_impl(std::move(impl)) {}

Region Region::from_polygons(std::span<const Polygon> polygons) {
    std::vector<BPolygon> parts;
    parts.reserve(polygons.size());
    for (const auto& p : polygons) {
        parts.push_back(to_boost(p.ring()));
    }
    return Region(std::make_shared<Impl>(Impl{unite_all(std::move(parts))}));
}

Region Region::from_quads(std::span<const Quad> quads) {
    std::vector<BPolygon> parts;
    parts.reserve(quads.size());
    for (const auto& q : quads) {
        parts.push_back(to_boost(q));
    }
    return Region(std::make_shared<Impl>(Impl{unite_all(std::move(parts))}));
}

Region Region::intersect(const Region& other) const {
    auto impl = std::make_shared<Impl>();
    if (!m_impl->shape.empty() && !other.m_impl->shape.empty()) {
        bg::intersection(m_impl->shape, other.m_impl->shape, impl->shape);
    }
    return Region(std::move(impl));
}

Region Region::unite(const Region& other) const {
    auto impl = std::make_shared<Impl>();
    bg::union_(m_impl->shape, other.m_impl->shape, impl->shape);
    return Region(std::move(impl));
}

Region Region::reflected(const Axis& axis) const {
    auto impl = std::make_shared<Impl>();
    impl->shape = m_impl->shape;
    auto mirror = [&](BPoint& p) {
        const Point2 q = reflect({p.x(), p.y()}, axis);
        p.x(q.x);
        p.y(q.y);
    };
    for (auto& poly : impl->shape) {
        for (auto& p : poly.outer()) {
            mirror(p);
        }
        for (auto& ring : poly.inners()) {
            for (auto& p : ring) {
                mirror(p);
            }
        }
    }
    // reflection flips ring orientation
    bg::correct(impl->shape);
    return Region(std::move(impl));
}

double Region::area() const {
    return m_impl->shape.empty() ? 0.0 : bg::area(m_impl->shape);
}

double Region::intersection_area(const Region& other) const {
    // components of a unioned multipolygon are interior-disjoint, so the
    // overlap is the sum of pairwise overlaps; boxes prune most pairs
    double total = 0.0;
    std::vector<bg::model::box<BPoint>> boxes;
    boxes.reserve(other.m_impl->shape.size());
    for (const auto& q : other.m_impl->shape) {
        boxes.push_back(bg::return_envelope<bg::model::box<BPoint>>(q));
    }
    for (const auto& p : m_impl->shape) {
        const auto pb = bg::return_envelope<bg::model::box<BPoint>>(p);
        for (std::size_t j = 0; j < boxes.size(); ++j) {
            if (bg::disjoint(pb, boxes[j])) {
                continue;
            }
            BMulti out;
            bg::intersection(p, other.m_impl->shape[j], out);
            total += bg::area(out);
        }
    }
    return total;
}

double Region::symmetric_difference_area(const Region& other) const {
    return std::max(0.0, area() + other.area() - 2.0 * intersection_area(other));
}

std::vector<Axis> Region::principal_axes() const {
    // area moments, so the result does not depend on how the overlay split edges
    if (m_impl->shape.empty()) {
        return {};
    }
    const BPoint& ref = m_impl->shape.front().outer().front();
    const double rx = ref.x();
    const double ry = ref.y();
    double a = 0.0;
    double mx = 0.0;
    double my = 0.0;
    double mxx = 0.0;
    double myy = 0.0;
    double mxy = 0.0;
    auto accumulate = [&](const auto& ring) {
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const double x0 = ring[i].x() - rx;
            const double y0 = ring[i].y() - ry;
            const double x1 = ring[i + 1].x() - rx;
            const double y1 = ring[i + 1].y() - ry;
            const double c = x0 * y1 - x1 * y0;
            a += c / 2.0;
            mx += (x0 + x1) * c / 6.0;
            my += (y0 + y1) * c / 6.0;
            mxx += (x0 * x0 + x0 * x1 + x1 * x1) * c / 12.0;
            myy += (y0 * y0 + y0 * y1 + y1 * y1) * c / 12.0;
            mxy += (x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * c / 24.0;
        }
    };
    for (const auto& poly : m_impl->shape) {
        accumulate(poly.outer());
        for (const auto& ring : poly.inners()) {
            accumulate(ring);
        }
    }
    if (!(a > 1e-12)) {
        return {};
    }
    const double cx = mx / a;
    const double cy = my / a;
    const double sxx = mxx - a * cx * cx;
    const double syy = myy - a * cy * cy;
    const double sxy = mxy - a * cx * cy;
    const double spread = std::hypot(0.5 * (sxx - syy), sxy);
    const double trace = sxx + syy;
    if (!(trace > 1e-18) || spread <= 1e-6 * trace) {
        return {};
    }
    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    const Point2 major{std::cos(theta), std::sin(theta)};
    const Point2 c{cx + rx, cy + ry};
    return {Axis{c, major}, Axis{c, perp(major)}};
}

bool Region::empty() const {
    return m_impl->shape.empty() || area() <= 1e-12;
}

} // namespace vlc::geometry
