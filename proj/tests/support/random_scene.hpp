#pragma once

#include "vlc/geometry.hpp"

#include <random>

namespace vlc::testing {

struct RandomScene {
    geometry::Scene scene;
    geometry::Polyline path;
};

inline geometry::Polygon box(geometry::Point2 c, double w, double d, double angle = 0.0) {
    const double ca = std::cos(angle);
    const double sa = std::sin(angle);
    std::vector<geometry::Point2> ring;
    for (const auto [u, v] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}) {
        const double x = u * w / 2;
        const double y = v * d / 2;
        ring.push_back({c.x + ca * x - sa * y, c.y + sa * x + ca * y});
    }
    return geometry::Polygon(std::move(ring));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// A 2-4 edge corridor path with one corridor record per edge, a scatter of
// obstacles along it and a few wall pieces beside it.
inline RandomScene random_scene(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RandomScene out;
    const int edges = std::uniform_int_distribution<int>(2, 4)(rng);
    geometry::Point2 p{0.0, 0.0};
    double heading = uniform(rng, 0.0, 6.283);
    out.path.vertices.push_back(p);
    for (int e = 0; e < edges; ++e) {
        const double len = uniform(rng, 6.0, 15.0);
        const geometry::Point2 q = p + geometry::Point2{std::cos(heading), std::sin(heading)} * len;
        out.path.vertices.push_back(q);
        out.scene.corridors.push_back(
            {"c" + std::to_string(e), p, q, uniform(rng, 2.0, 5.0), uniform(rng, 2.4, 4.0)});
        p = q;
        heading += uniform(rng, -1.5, 1.5);
    }

    const int obstacles = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < obstacles; ++i) {
        const std::size_t e = std::uniform_int_distribution<std::size_t>(0, edges - 1)(rng);
        const auto& c = out.scene.corridors[e];
        const geometry::Point2 d = geometry::normalized(c.b - c.a);
        const geometry::Point2 at =
            c.a + (c.b - c.a) * uniform(rng, 0.05, 0.95) + geometry::perp(d) * uniform(rng, -c.width, c.width) * 0.5;
        out.scene.obstacles.push_back({"o" + std::to_string(i),
                                       box(at, uniform(rng, 0.2, 1.2), uniform(rng, 0.2, 1.2), uniform(rng, 0.0, 3.1)),
                                       uniform(rng, 0.5, 2.0), "random", true});
    }
    const int walls = std::uniform_int_distribution<int>(0, 3)(rng);
    for (int i = 0; i < walls; ++i) {
        const std::size_t e = std::uniform_int_distribution<std::size_t>(0, edges - 1)(rng);
        const auto& c = out.scene.corridors[e];
        const geometry::Point2 d = geometry::normalized(c.b - c.a);
        const double side = std::uniform_int_distribution<int>(0, 1)(rng) == 0 ? -1.0 : 1.0;
        const geometry::Point2 at = c.a + (c.b - c.a) * uniform(rng, 0.1, 0.9) +
                                    geometry::perp(d) * side * uniform(rng, 0.3, 0.5) * c.width;
        out.scene.walls.push_back(
            {"w" + std::to_string(i), box(at, uniform(rng, 1.0, 4.0), 0.2, std::atan2(d.y, d.x)), true});
    }

    geometry::Point2 lo = out.path.vertices.front();
    geometry::Point2 hi = lo;
    auto grow = [&](geometry::Point2 q) {
        lo = {std::min(lo.x, q.x), std::min(lo.y, q.y)};
        hi = {std::max(hi.x, q.x), std::max(hi.y, q.y)};
    };
    for (const auto q : out.path.vertices) {
        grow(q);
    }
    for (const auto& o : out.scene.obstacles) {
        for (const auto q : o.footprint.ring()) {
            grow(q);
        }
    }
    for (const auto& w : out.scene.walls) {
        for (const auto q : w.shape.ring()) {
            grow(q);
        }
    }
    out.scene.bounds = {lo - geometry::Point2{5.0, 5.0}, hi + geometry::Point2{5.0, 5.0}};
    return out;
}

} // namespace vlc::testing
