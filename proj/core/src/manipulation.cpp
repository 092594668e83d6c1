#include "vlc/manipulation.hpp"

#include "vlc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <numbers>

namespace vlc::manip {

using geometry::BandRect;
using geometry::NavPath;
using geometry::Obstacle;
using geometry::Wall;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

template <class T>
auto find_id(std::vector<T>& items, const std::string& id) {
    return std::find_if(items.begin(), items.end(), [&](const T& t) { return t.id == id; });
}

[[noreturn]] void not_found(std::string_view kind, const std::string& id) {
    throw Error(ErrorCode::NotFound, std::string(kind) + " not found: " + id);
}

Polygon translated(const Polygon& p, Point2 d) {
    auto ring = p.ring();
    for (auto& q : ring) {
        q = q + d;
    }
    return Polygon(std::move(ring));
}

Polygon reflected(const Polygon& p, const geometry::Axis& axis) {
    auto ring = p.ring();
    for (auto& q : ring) {
        q = geometry::reflect(q, axis);
    }
    return Polygon(std::move(ring));
}

Polygon square(Point2 c, Point2 u, double side) {
    const Point2 n = geometry::perp(u);
    const double h = 0.5 * side;
    return Polygon({c - u * h - n * h, c + u * h - n * h, c + u * h + n * h, c - u * h + n * h});
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

bool segments_cross(Point2 a, Point2 b, Point2 c, Point2 d) {
    const double d1 = geometry::cross(b - a, c - a);
    const double d2 = geometry::cross(b - a, d - a);
    const double d3 = geometry::cross(d - c, a - c);
    const double d4 = geometry::cross(d - c, b - c);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
        return true;
    }
    constexpr double eps = 1e-12;
    return (std::abs(d1) <= eps && geometry::point_segment_distance(c, a, b) <= 1e-9) ||
           (std::abs(d2) <= eps && geometry::point_segment_distance(d, a, b) <= 1e-9) ||
           (std::abs(d3) <= eps && geometry::point_segment_distance(a, c, d) <= 1e-9) ||
           (std::abs(d4) <= eps && geometry::point_segment_distance(b, c, d) <= 1e-9);
}

double segment_distance(Point2 a, Point2 b, Point2 c, Point2 d) {
    if (segments_cross(a, b, c, d)) {
        return 0.0;
    }
    return std::min({geometry::point_segment_distance(a, c, d), geometry::point_segment_distance(b, c, d),
                     geometry::point_segment_distance(c, a, b), geometry::point_segment_distance(d, a, b)});
}

struct Box {
    Point2 lo{1e300, 1e300};
    Point2 hi{-1e300, -1e300};

    void add(Point2 p) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    [[nodiscard]] bool overlaps(const Box& o) const {
        return lo.x <= o.hi.x && o.lo.x <= hi.x && lo.y <= o.hi.y && o.lo.y <= hi.y;
    }
};

Box box_of(const Polygon& p) {
    Box b;
    for (const Point2 q : p.ring()) {
        b.add(q);
    }
    return b;
}

bool segment_hits_polygon(Point2 a, Point2 b, const Polygon& p) {
    const auto& r = p.ring();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (segments_cross(a, b, r[i], r[(i + 1) % r.size()])) {
            return true;
        }
    }
    return geometry::point_in_polygon(p, a);
}

bool polygons_overlap(const Polygon& p, const Polygon& q) {
    if (!box_of(p).overlaps(box_of(q))) {
        return false;
    }
    const auto& r = p.ring();
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (segment_hits_polygon(r[i], r[(i + 1) % r.size()], q)) {
            return true;
        }
    }
    return geometry::point_in_polygon(p, q.ring().front());
}

bool inside_bounds(const geometry::Bounds& b, const Polygon& p) {
    return std::all_of(p.ring().begin(), p.ring().end(), [&](Point2 q) { return b.contains(q); });
}

NavPath nav_of(const Morphology& m, const OperatorContext& ctx) {
    return geometry::make_nav_path(m.scene, m.path, ctx.config.turn_threshold_deg);
}

bool in_scope(const OperatorContext& ctx, std::size_t segment) {
    return ctx.segments.empty() || std::find(ctx.segments.begin(), ctx.segments.end(), segment) != ctx.segments.end();
}

bool all_edges_have_corridors(const NavPath& nav) {
    return std::all_of(nav.edge_corridors.begin(), nav.edge_corridors.end(), [](const auto& c) { return c.has_value(); });
}

void record(Morphology& m, ChangeLog& log, std::string_view op, Edit e) {
    apply_edit(m, e);
    log.push_back({std::string(op), std::move(e)});
}

std::string fresh_id(const Scene& scene, std::string_view prefix) {
    for (std::size_t k = 0;; ++k) {
        std::string id = std::string(prefix) + std::to_string(k);
        const bool used =
            std::any_of(scene.obstacles.begin(), scene.obstacles.end(), [&](const auto& o) { return o.id == id; }) ||
            std::any_of(scene.walls.begin(), scene.walls.end(), [&](const auto& w) { return w.id == id; });
        if (!used) {
            return id;
        }
    }
}

// Steps an attribute toward `target` one operator action at a time. Stops at
// the target, when the step function has nothing left to do, or when the
// class jumps past the target (best effort).
template <class StepFn>
std::size_t drive(Morphology& m, Attribute a, int target, const OperatorContext& ctx, StepFn&& step) {
    std::size_t edits = 0;
    int first = 0;
    for (std::size_t k = 0; k < ctx.max_steps; ++k) {
        const int cls = probe(m, a, ctx).cls.value();
        if (cls == target) {
            break;
        }
        const int dir = cls > target ? -1 : 1;
        if (first == 0) {
            first = dir;
        } else if (dir != first) {
            break;
        }
        const std::size_t n = step(dir);
        if (n == 0) {
            break;
        }
        edits += n;
    }
    return edits;
}

Scene walls_only(const Scene& s) {
    Scene out;
    out.bounds = s.bounds;
    out.walls = s.walls;
    return out;
}

double accumulated_turn(const NavPath& nav, const OperatorContext& ctx) {
    return metrics::rotation_metric(nav, ctx.measure_segment).accumulated_degrees;
}

std::vector<std::size_t> scope_obstacles(const Scene& scene, const NavPath& nav, const OperatorContext& ctx) {
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < nav.segments.size(); ++s) {
        if (in_scope(ctx, s)) {
            const auto idx = metrics::obstacles_in_segment(scene, nav, s);
            out.insert(out.end(), idx.begin(), idx.end());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool centroid_in_segment(const std::vector<BandRect>& band, std::size_t segment, Point2 c) {
    return std::any_of(band.begin(), band.end(), [&](const BandRect& r) { return r.segment == segment && r.contains(c); });
}

std::optional<std::size_t> segment_of_point(const std::vector<BandRect>& band, Point2 c) {
    for (const auto& r : band) {
        if (r.contains(c)) {
            return r.segment;
        }
    }
    return std::nullopt;
}

// Moves an obstacle by a seeded random displacement that keeps its centroid
// inside the band of its current segment.
std::optional<Edit> random_shift(const Scene& scene, const std::vector<BandRect>& band, std::size_t index,
                                 double lo, double hi, std::mt19937_64& rng) {
    const Obstacle& o = scene.obstacles[index];
    const Point2 c = geometry::centroid(o.footprint);
    const auto seg = segment_of_point(band, c);
    if (!seg) {
        return std::nullopt;
    }
    for (int attempt = 0; attempt < 10; ++attempt) {
        const double mag = uniform(rng, lo, hi);
        const double ang = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        const Point2 d{mag * std::cos(ang), mag * std::sin(ang)};
        if (centroid_in_segment(band, *seg, c + d) && inside_bounds(scene.bounds, translated(o.footprint, d))) {
            return MoveObstacle{o.id, d};
        }
    }
    return std::nullopt;
}

// Seeded collision-free square inside the scope band.
std::optional<Obstacle> place_square(const Scene& scene, const NavPath& nav, const OperatorContext& ctx,
                                     std::mt19937_64& rng) {
    constexpr double kClearance = 0.3;
    const auto band = geometry::corridor_band(scene, nav);
    std::vector<const BandRect*> rects;
    double total = 0.0;
    for (const auto& r : band) {
        if (in_scope(ctx, r.segment)) {
            rects.push_back(&r);
            total += r.area();
        }
    }
    if (rects.empty() || !(total > 0.0)) {
        return std::nullopt;
    }
    for (const double side : {1.0, 0.5}) {
        for (int attempt = 0; attempt < 40; ++attempt) {
            double t = uniform(rng, 0.0, total);
            const BandRect* r = rects.back();
            for (const BandRect* q : rects) {
                if (t < q->area()) {
                    r = q;
                    break;
                }
                t -= q->area();
            }
            const Point2 a = nav.line.vertices[r->edge];
            const Point2 b = nav.line.vertices[r->edge + 1];
            const double len = geometry::distance(a, b);
            if (len < side || r->width < side + 2.0 * kClearance) {
                continue;
            }
            const Point2 u = geometry::normalized(b - a);
            const double s = uniform(rng, 0.5 * side, len - 0.5 * side);
            const double v = uniform(rng, -0.5 * (r->width - side), 0.5 * (r->width - side));
            const Polygon sq = square(a + u * s + geometry::perp(u) * v, u, side);
            if (!inside_bounds(scene.bounds, sq)) {
                continue;
            }
            bool clear = true;
            const auto& ring = sq.ring();
            for (std::size_t e = 0; clear && e < nav.edge_count(); ++e) {
                for (std::size_t i = 0; i < 4; ++i) {
                    if (segment_distance(ring[i], ring[(i + 1) % 4], nav.line.vertices[e], nav.line.vertices[e + 1]) <
                        kClearance) {
                        clear = false;
                        break;
                    }
                }
            }
            for (std::size_t i = 0; clear && i < scene.obstacles.size(); ++i) {
                clear = !polygons_overlap(sq, scene.obstacles[i].footprint);
            }
            for (std::size_t i = 0; clear && i < scene.walls.size(); ++i) {
                clear = !polygons_overlap(sq, scene.walls[i].shape);
            }
            if (clear) {
                return Obstacle{fresh_id(scene, "ins-"), sq, 1.0, "inserted", true};
            }
        }
    }
    return std::nullopt;
}

} // namespace

std::string_view edit_name(const Edit& edit) {
    return std::visit(overloaded{
                          [](const RemoveObstacle&) { return std::string_view("remove_obstacle"); },
                          [](const InsertObstacle&) { return std::string_view("insert_obstacle"); },
                          [](const MoveObstacle&) { return std::string_view("move_obstacle"); },
                          [](const ReplaceObstacle&) { return std::string_view("replace_obstacle"); },
                          [](const SetCorridorSize&) { return std::string_view("set_corridor_size"); },
                          [](const MovePathVertex&) { return std::string_view("move_path_vertex"); },
                          [](const RemovePathVertex&) { return std::string_view("remove_path_vertex"); },
                          [](const RemoveWall&) { return std::string_view("remove_wall"); },
                          [](const InsertWall&) { return std::string_view("insert_wall"); },
                      },
                      edit);
}

void apply_edit(Morphology& m, const Edit& edit) {
    auto& sc = m.scene;
    auto& verts = m.path.vertices;
    std::visit(overloaded{
                   [&](const RemoveObstacle& e) {
                       const auto it = find_id(sc.obstacles, e.id);
                       if (it == sc.obstacles.end()) {
                           not_found("obstacle", e.id);
                       }
                       sc.obstacles.erase(it);
                   },
                   [&](const InsertObstacle& e) {
                       if (find_id(sc.obstacles, e.obstacle.id) != sc.obstacles.end()) {
                           throw Error(ErrorCode::ValidationError, "duplicate obstacle id '" + e.obstacle.id + "'");
                       }
                       sc.obstacles.push_back(e.obstacle);
                   },
                   [&](const MoveObstacle& e) {
                       const auto it = find_id(sc.obstacles, e.id);
                       if (it == sc.obstacles.end()) {
                           not_found("obstacle", e.id);
                       }
                       it->footprint = translated(it->footprint, e.delta);
                   },
                   [&](const ReplaceObstacle& e) {
                       const auto it = find_id(sc.obstacles, e.id);
                       if (it == sc.obstacles.end()) {
                           not_found("obstacle", e.id);
                       }
                       it->footprint = e.footprint;
                   },
                   [&](const SetCorridorSize& e) {
                       const auto it = find_id(sc.corridors, e.id);
                       if (it == sc.corridors.end()) {
                           not_found("corridor", e.id);
                       }
                       it->width = e.width;
                       it->height = e.height;
                   },
                   [&](const MovePathVertex& e) {
                       if (e.index >= verts.size()) {
                           not_found("path vertex", std::to_string(e.index));
                       }
                       const Point2 old = verts[e.index];
                       for (auto& c : sc.corridors) {
                           if (c.a == old) {
                               c.a = e.to;
                           }
                           if (c.b == old) {
                               c.b = e.to;
                           }
                       }
                       verts[e.index] = e.to;
                   },
                   [&](const RemovePathVertex& e) {
                       if (e.index == 0 || e.index + 1 >= verts.size()) {
                           not_found("interior path vertex", std::to_string(e.index));
                       }
                       const Point2 prev = verts[e.index - 1];
                       const Point2 v = verts[e.index];
                       const Point2 next = verts[e.index + 1];
                       auto joins = [](const geometry::CorridorSegment& c, Point2 p, Point2 q) {
                           return (c.a == p && c.b == q) || (c.a == q && c.b == p);
                       };
                       const auto first = std::find_if(sc.corridors.begin(), sc.corridors.end(),
                                                       [&](const auto& c) { return joins(c, prev, v); });
                       const auto second = std::find_if(sc.corridors.begin(), sc.corridors.end(),
                                                        [&](const auto& c) { return joins(c, v, next); });
                       if (first != sc.corridors.end() && second != sc.corridors.end() && first != second) {
                           const double la = first->length();
                           const double lb = second->length();
                           first->width = (la * first->width + lb * second->width) / (la + lb);
                           first->height = (la * first->height + lb * second->height) / (la + lb);
                           (first->a == v ? first->a : first->b) = next;
                           sc.corridors.erase(second);
                       }
                       verts.erase(verts.begin() + static_cast<std::ptrdiff_t>(e.index));
                   },
                   [&](const RemoveWall& e) {
                       const auto it = find_id(sc.walls, e.id);
                       if (it == sc.walls.end()) {
                           not_found("wall", e.id);
                       }
                       sc.walls.erase(it);
                   },
                   [&](const InsertWall& e) {
                       if (find_id(sc.walls, e.wall.id) != sc.walls.end()) {
                           throw Error(ErrorCode::ValidationError, "duplicate wall id '" + e.wall.id + "'");
                       }
                       sc.walls.push_back(e.wall);
                   },
               },
               edit);
}

Morphology replay(Morphology initial, const ChangeLog& log) {
    for (const auto& step : log) {
        apply_edit(initial, step.edit);
    }
    return initial;
}

bool is_movable(const Obstacle& o, const ConstraintSet& c) {
    return o.movable && std::find(c.immovable_tags.begin(), c.immovable_tags.end(), o.tag) == c.immovable_tags.end();
}

void check_feasible(const ConstraintSet& c, const Morphology& initial) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InfeasibleRequest, what); };
    if (!(c.min_width > 0.0) || !std::isfinite(c.max_width)) {
        fail("width limits must be positive and finite");
    }
    if (c.min_width > c.max_width) {
        fail("min_width exceeds max_width");
    }
    if (c.min_objects > c.max_objects) {
        fail("min_objects exceeds max_objects");
    }
    const auto fixed = static_cast<std::size_t>(std::count_if(initial.scene.obstacles.begin(),
                                                              initial.scene.obstacles.end(),
                                                              [&](const auto& o) { return !is_movable(o, c); }));
    if (fixed > c.max_objects) {
        fail("immovable objects alone exceed max_objects");
    }
}

std::size_t violations(const Morphology& m, const Morphology& initial, const ConstraintSet& c) {
    std::size_t v = 0;
    if (c.endpoints_fixed) {
        if (m.path.vertices.empty() || m.path.vertices.front() != initial.path.vertices.front()) {
            ++v;
        }
        if (m.path.vertices.empty() || m.path.vertices.back() != initial.path.vertices.back()) {
            ++v;
        }
    }
    const auto& b = m.scene.bounds;
    for (const auto& cor : m.scene.corridors) {
        if (cor.width < c.min_width - 1e-9 || cor.width > c.max_width + 1e-9) {
            ++v;
        }
        if (!b.contains(cor.a) || !b.contains(cor.b)) {
            ++v;
        }
    }
    for (const auto& w : m.scene.walls) {
        v += inside_bounds(b, w.shape) ? 0 : 1;
    }
    for (const auto& o : m.scene.obstacles) {
        v += inside_bounds(b, o.footprint) ? 0 : 1;
    }
    for (const Point2 p : m.path.vertices) {
        v += b.contains(p) ? 0 : 1;
    }
    const std::size_t n = m.scene.obstacles.size();
    if (n < c.min_objects || n > c.max_objects) {
        ++v;
    }
    for (const auto& o : initial.scene.obstacles) {
        if (!is_movable(o, c)) {
            const auto it = std::find_if(m.scene.obstacles.begin(), m.scene.obstacles.end(),
                                         [&](const auto& q) { return q.id == o.id; });
            v += (it != m.scene.obstacles.end() && *it == o) ? 0 : 1;
        }
    }
    for (const auto& w : initial.scene.walls) {
        if (!w.movable) {
            const auto it = std::find_if(m.scene.walls.begin(), m.scene.walls.end(),
                                         [&](const auto& q) { return q.id == w.id; });
            v += (it != m.scene.walls.end() && *it == w) ? 0 : 1;
        }
    }
    return v;
}

scale::AttributeResult probe(const Morphology& m, Attribute a, const OperatorContext& ctx) {
    const NavPath nav = nav_of(m, ctx);
    return scale::evaluate_attribute(m.scene, nav, a, ctx.measure_segment, ctx.config, ctx.cache);
}

std::size_t op_rotation_simplify(Morphology& m, ChangeLog& log, int target_class, const OperatorContext& ctx) {
    // only ever lowers: "until rotation class <= target"
    if (probe(m, Attribute::Rotation, ctx).cls.value() <= target_class) {
        return 0;
    }
    return drive(m, Attribute::Rotation, target_class, ctx, [&](int dir) -> std::size_t {
        if (dir > 0) {
            return 0;
        }
        const NavPath nav = nav_of(m, ctx);
        const double current = accumulated_turn(nav, ctx);
        const geometry::Occluders walls(walls_only(m.scene));
        const auto& v = m.path.vertices;

        std::vector<std::size_t> interior;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (in_scope(ctx, nav.segment_of_edge(i - 1)) && nav.turn_angles_deg[i] > 1e-9) {
                interior.push_back(i);
            }
        }
        auto accept = [&](const Edit& e, std::initializer_list<std::pair<Point2, Point2>> legs) {
            for (const auto& [a, b] : legs) {
                if (!walls.visible(a, b)) {
                    return false;
                }
            }
            Morphology trial = m;
            try {
                apply_edit(trial, e);
                geometry::validate(trial.path);
                const NavPath tnav = nav_of(trial, ctx);
                if (!all_edges_have_corridors(tnav)) {
                    return false;
                }
                if (ctx.measure_segment && *ctx.measure_segment >= tnav.segments.size()) {
                    return false;
                }
                return accumulated_turn(tnav, ctx) < current - 1e-9;
            } catch (const Error&) {
                return false;
            }
        };

        // merge sub-threshold turns first, smallest first
        auto small = interior;
        std::stable_sort(small.begin(), small.end(),
                         [&](std::size_t a, std::size_t b) { return nav.turn_angles_deg[a] < nav.turn_angles_deg[b]; });
        for (const std::size_t i : small) {
            if (nav.turn_angles_deg[i] >= ctx.config.turn_threshold_deg) {
                break;
            }
            const Edit e = RemovePathVertex{i};
            if (accept(e, {{v[i - 1], v[i + 1]}})) {
                record(m, log, "rotation_simplify", e);
                return 1;
            }
        }
        // otherwise pull the sharpest turn along its bisector toward the chord
        auto sharp = interior;
        std::stable_sort(sharp.begin(), sharp.end(),
                         [&](std::size_t a, std::size_t b) { return nav.turn_angles_deg[a] > nav.turn_angles_deg[b]; });
        for (const std::size_t i : sharp) {
            const Point2 u1 = geometry::normalized(v[i - 1] - v[i]);
            const Point2 u2 = geometry::normalized(v[i + 1] - v[i]);
            const Point2 bis = u1 + u2;
            if (geometry::norm(bis) < 1e-9) {
                continue;
            }
            const Point2 dir_b = geometry::normalized(bis);
            const Point2 chord = v[i + 1] - v[i - 1];
            const double denom = geometry::cross(chord, dir_b);
            if (std::abs(denom) < 1e-12) {
                continue;
            }
            const double reach = geometry::cross(chord, v[i - 1] - v[i]) / denom;
            if (!(reach > 1e-6)) {
                continue;
            }
            for (const double alpha : {1.0, 0.5, 0.25, 0.125}) {
                const Point2 p = v[i] + dir_b * (alpha * reach);
                if (!m.scene.bounds.contains(p)) {
                    continue;
                }
                const Edit e = MovePathVertex{i, p};
                if (accept(e, {{v[i - 1], p}, {p, v[i + 1]}})) {
                    record(m, log, "rotation_simplify", e);
                    return 1;
                }
            }
        }
        return 0;
    });
}

std::size_t op_size_fit(Morphology& m, ChangeLog& log, int target_class, const OperatorContext& ctx) {
    constexpr double kFactor = 1.25;
    const auto& cs = ctx.constraints;
    const auto& cfg = ctx.config;
    return drive(m, Attribute::Size, target_class, ctx, [&](int dir) -> std::size_t {
        const NavPath nav = nav_of(m, ctx);
        std::vector<std::size_t> corridors;
        for (std::size_t e = 0; e < nav.edge_count(); ++e) {
            if (in_scope(ctx, nav.segment_of_edge(e)) && nav.edge_corridors[e]) {
                corridors.push_back(*nav.edge_corridors[e]);
            }
        }
        std::sort(corridors.begin(), corridors.end());
        corridors.erase(std::unique(corridors.begin(), corridors.end()), corridors.end());

        auto toward = [&](double x, scale::ComfortBand band) {
            if (x < band.lo) {
                return std::min(band.lo, x * kFactor);
            }
            if (x > band.hi) {
                return std::max(band.hi, x / kFactor);
            }
            return x;
        };
        // raising: narrow when min_width alone gives enough deviation
        const double need = scale::score_range(scale::ComplexityClass(std::clamp(target_class, 1, 5)), cfg).first *
                            cfg.size_deviation_cap;
        const bool narrow = (cfg.width_band.lo - cs.min_width) / cfg.width_band.lo >= need;

        std::size_t edits = 0;
        for (const std::size_t k : corridors) {
            const auto& c = m.scene.corridors[k];
            double w = c.width;
            double h = c.height;
            if (dir < 0) {
                w = toward(w, cfg.width_band);
                h = toward(h, cfg.height_band);
            } else {
                w = narrow ? w / kFactor : w * kFactor;
            }
            w = std::clamp(w, cs.min_width, cs.max_width);
            if (dir > 0 && w == c.width) {
                h = narrow ? h / kFactor : h * kFactor;
            }
            if (w != c.width || h != c.height) {
                record(m, log, "size_fit", SetCorridorSize{c.id, w, h});
                ++edits;
            }
        }
        return edits;
    });
}

namespace {

struct SightLine {
    Point2 a;
    Point2 b;
};

std::vector<SightLine> scope_sight_lines(const NavPath& nav, const OperatorContext& ctx) {
    const auto samples = geometry::sample_path(nav, ctx.config.sample_spacing);
    const Point2 end = nav.line.vertices.back();
    std::vector<SightLine> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::size_t seg = ctx.measure_segment.value_or(samples[i].segment);
        if (samples[i].segment != seg || !in_scope(ctx, seg)) {
            continue;
        }
        out.push_back({samples[i].point, end});
        if (ctx.config.visibility_mode == metrics::VisibilityMode::RemainingPath) {
            const std::size_t rest = samples.size() - i - 1;
            const std::size_t stride = std::max<std::size_t>(1, rest / 16);
            for (std::size_t j = i + 1; j < samples.size(); j += stride) {
                out.push_back({samples[i].point, samples[j].point});
            }
        }
    }
    return out;
}

} // namespace

std::size_t op_visibility_step(Morphology& m, ChangeLog& log, int target_class, const OperatorContext& ctx) {
    constexpr double kStubThickness = 0.2;
    constexpr double kStubReach = 0.45;
    return drive(m, Attribute::Visibility, target_class, ctx, [&](int dir) -> std::size_t {
        const NavPath nav = nav_of(m, ctx);
        const auto lines = scope_sight_lines(nav, ctx);
        const geometry::Occluders occ(m.scene);
        std::vector<char> visible(lines.size());
        for (std::size_t i = 0; i < lines.size(); ++i) {
            visible[i] = occ.visible(lines[i].a, lines[i].b) ? 1 : 0;
        }
        auto hits = [&](const Polygon& shape, bool want_visible) {
            const Box bx = box_of(shape);
            std::size_t n = 0;
            for (std::size_t i = 0; i < lines.size(); ++i) {
                if ((visible[i] != 0) != want_visible) {
                    continue;
                }
                Box lb;
                lb.add(lines[i].a);
                lb.add(lines[i].b);
                if (lb.overlaps(bx) && segment_hits_polygon(lines[i].a, lines[i].b, shape)) {
                    ++n;
                }
            }
            return n;
        };

        if (dir < 0) {
            // open up: drop the movable wall that blocks the most sight lines
            std::size_t best = 0;
            const Wall* chosen = nullptr;
            for (const auto& w : m.scene.walls) {
                if (!w.movable) {
                    continue;
                }
                const std::size_t n = hits(w.shape, false);
                if (n > best) {
                    best = n;
                    chosen = &w;
                }
            }
            if (chosen == nullptr) {
                return 0;
            }
            record(m, log, "visibility_step", RemoveWall{chosen->id});
            return 1;
        }

        // close down: a wall stub from one side of the band that cuts the most
        // currently open sight lines
        const auto samples = geometry::sample_path(nav, ctx.config.sample_spacing);
        std::size_t best = 0;
        std::optional<Polygon> chosen;
        for (const auto& s : samples) {
            if (!in_scope(ctx, s.segment) || (ctx.measure_segment && s.segment != *ctx.measure_segment)) {
                continue;
            }
            const auto& cor = nav.edge_corridors[s.edge];
            if (!cor) {
                continue;
            }
            const double w = m.scene.corridors[*cor].width;
            const Point2 a = nav.line.vertices[s.edge];
            const Point2 b = nav.line.vertices[s.edge + 1];
            const Point2 u = geometry::normalized(b - a);
            const Point2 n = geometry::perp(u);
            const double along = geometry::distance(a, s.point) + 0.5 * ctx.config.sample_spacing;
            if (along + kStubThickness > geometry::distance(a, b) - 0.1) {
                continue;
            }
            const Point2 base = a + u * along;
            for (const double side : {1.0, -1.0}) {
                const Point2 outer = base + n * (side * 0.5 * w);
                const Point2 inner = base + n * (side * (0.5 - kStubReach) * w);
                const Point2 t = u * (0.5 * kStubThickness);
                const Polygon stub({outer - t, inner - t, inner + t, outer + t});
                if (!inside_bounds(m.scene.bounds, stub)) {
                    continue;
                }
                const std::size_t cut = hits(stub, true);
                if (cut > best) {
                    best = cut;
                    chosen = stub;
                }
            }
        }
        if (!chosen) {
            return 0;
        }
        record(m, log, "visibility_step", InsertWall{Wall{fresh_id(m.scene, "stub-"), *chosen, true}});
        return 1;
    });
}

std::size_t op_symmetrize(Morphology& m, ChangeLog& log, int target_class, std::mt19937_64& rng,
                          const OperatorContext& ctx) {
    return drive(m, Attribute::Symmetry, target_class, ctx, [&](int dir) -> std::size_t {
        const NavPath nav = nav_of(m, ctx);
        const auto band = geometry::corridor_band(m.scene, nav);
        if (dir > 0) {
            // break symmetry: push one movable object off its mirror position
            std::vector<std::size_t> movable;
            for (const std::size_t i : scope_obstacles(m.scene, nav, ctx)) {
                if (is_movable(m.scene.obstacles[i], ctx.constraints) &&
                    (!ctx.measure_segment || centroid_in_segment(band, *ctx.measure_segment,
                                                                 geometry::centroid(m.scene.obstacles[i].footprint)))) {
                    movable.push_back(i);
                }
            }
            if (movable.empty()) {
                if (m.scene.obstacles.size() >= ctx.constraints.max_objects) {
                    return 0;
                }
                OperatorContext local = ctx;
                if (ctx.measure_segment) {
                    local.segments = {*ctx.measure_segment};
                }
                auto o = place_square(m.scene, nav, local, rng);
                if (!o) {
                    return 0;
                }
                record(m, log, "symmetrize", InsertObstacle{std::move(*o)});
                return 1;
            }
            for (int attempt = 0; attempt < 4; ++attempt) {
                if (auto e = random_shift(m.scene, band, movable[pick(rng, movable.size())], 0.3, 1.0, rng)) {
                    record(m, log, "symmetrize", std::move(*e));
                    return 1;
                }
            }
            return 0;
        }

        const auto sym = metrics::symmetry_metric(m.scene, nav, ctx.cache);
        std::vector<std::size_t> segs;
        for (std::size_t s = 0; s < nav.segments.size(); ++s) {
            if (in_scope(ctx, s) && (!ctx.measure_segment || s == *ctx.measure_segment) &&
                sym.per_segment[s].score < 1.0 - 1e-9) {
                segs.push_back(s);
            }
        }
        std::stable_sort(segs.begin(), segs.end(), [&](std::size_t a, std::size_t b) {
            const auto& pa = sym.per_segment[a];
            const auto& pb = sym.per_segment[b];
            return (1.0 - pa.score) * pa.geometry_area > (1.0 - pb.score) * pb.geometry_area;
        });
        for (const std::size_t s : segs) {
            const auto axis = sym.per_segment[s].axis;
            const auto objs = metrics::obstacles_in_segment(m.scene, nav, s);
            struct Candidate {
                std::size_t obj;
                std::size_t partner;
                double mismatch;
            };
            std::vector<Candidate> cands;
            for (const std::size_t i : objs) {
                const Point2 mc = geometry::reflect(geometry::centroid(m.scene.obstacles[i].footprint), axis);
                Candidate c{i, i, 1e300};
                for (const std::size_t j : objs) {
                    const double d = geometry::distance(geometry::centroid(m.scene.obstacles[j].footprint), mc);
                    if (d < c.mismatch) {
                        c.partner = j;
                        c.mismatch = d;
                    }
                }
                if (c.mismatch > 1e-6) {
                    cands.push_back(c);
                }
            }
            std::stable_sort(cands.begin(), cands.end(),
                             [](const Candidate& a, const Candidate& b) { return a.mismatch > b.mismatch; });
            std::size_t tried = 0;
            for (const auto& c : cands) {
                if (tried >= 3) {
                    break;
                }
                const Obstacle& o = m.scene.obstacles[c.obj];
                const Obstacle& q = m.scene.obstacles[c.partner];
                std::optional<Edit> e;
                if (c.obj == c.partner) {
                    if (is_movable(o, ctx.constraints)) {
                        const Point2 cen = geometry::centroid(o.footprint);
                        const Point2 d = geometry::normalized(axis.direction);
                        const Point2 foot = axis.point + d * geometry::dot(cen - axis.point, d);
                        e = MoveObstacle{o.id, foot - cen};
                    }
                } else if (is_movable(q, ctx.constraints)) {
                    e = ReplaceObstacle{q.id, reflected(o.footprint, axis)};
                } else if (is_movable(o, ctx.constraints)) {
                    e = ReplaceObstacle{o.id, reflected(q.footprint, axis)};
                }
                if (!e) {
                    continue;
                }
                ++tried;
                Morphology trial = m;
                try {
                    apply_edit(trial, *e);
                } catch (const Error&) {
                    continue;
                }
                const Obstacle& moved = *find_id(trial.scene.obstacles, std::visit(
                    overloaded{[](const MoveObstacle& x) { return x.id; },
                               [](const ReplaceObstacle& x) { return x.id; },
                               [](const auto&) { return std::string(); }},
                    *e));
                if (!inside_bounds(trial.scene.bounds, moved.footprint)) {
                    continue;
                }
                const auto after = metrics::symmetry_metric(trial.scene, nav_of(trial, ctx), ctx.cache);
                if (after.per_segment[s].score > sym.per_segment[s].score + 1e-9) {
                    record(m, log, "symmetrize", std::move(*e));
                    return 1;
                }
            }
        }
        return 0;
    });
}

std::size_t op_clutter_adjust(Morphology& m, ChangeLog& log, int target_class, std::mt19937_64& rng,
                              const OperatorContext& ctx) {
    return drive(m, Attribute::Clutter, target_class, ctx, [&](int dir) -> std::size_t {
        const NavPath nav = nav_of(m, ctx);
        if (dir > 0) {
            if (m.scene.obstacles.size() >= ctx.constraints.max_objects) {
                return 0;
            }
            OperatorContext local = ctx;
            if (ctx.measure_segment) {
                local.segments = {*ctx.measure_segment};
            }
            auto o = place_square(m.scene, nav, local, rng);
            if (!o) {
                return 0;
            }
            record(m, log, "clutter_adjust", InsertObstacle{std::move(*o)});
            return 1;
        }
        if (m.scene.obstacles.size() <= ctx.constraints.min_objects) {
            return 0;
        }
        std::vector<std::size_t> cands;
        const auto band = geometry::corridor_band(m.scene, nav);
        for (const std::size_t i : scope_obstacles(m.scene, nav, ctx)) {
            const auto& o = m.scene.obstacles[i];
            if (is_movable(o, ctx.constraints) &&
                (!ctx.measure_segment || centroid_in_segment(band, *ctx.measure_segment, geometry::centroid(o.footprint)))) {
                cands.push_back(i);
            }
        }
        if (cands.empty()) {
            return 0;
        }
        std::stable_sort(cands.begin(), cands.end(), [&](std::size_t a, std::size_t b) {
            return geometry::polygon_area(m.scene.obstacles[a].footprint) >
                   geometry::polygon_area(m.scene.obstacles[b].footprint);
        });
        // largest first, skipping removals that would undershoot the target
        constexpr std::size_t kTries = 6;
        for (std::size_t k = 0; k < std::min(kTries, cands.size()); ++k) {
            Morphology trial = m;
            const Edit e = RemoveObstacle{m.scene.obstacles[cands[k]].id};
            apply_edit(trial, e);
            if (probe(trial, Attribute::Clutter, ctx).cls.value() >= target_class) {
                record(m, log, "clutter_adjust", e);
                return 1;
            }
        }
        record(m, log, "clutter_adjust", RemoveObstacle{m.scene.obstacles[cands.back()].id});
        return 1;
    });
}

namespace {

// Free position on a fitted template for one object: the nearest template
// point, or for grids the nearest unoccupied node within a few rings.
std::optional<Point2> template_slot(const metrics::TemplateFit& fit, std::span<const Point2> pts, std::size_t k,
                                    const std::vector<BandRect>& band, std::size_t segment) {
    const Point2 c = pts[k];
    if (fit.kind == metrics::OrderTemplate::None) {
        return std::nullopt;
    }
    if (fit.kind != metrics::OrderTemplate::Grid) {
        const Point2 p = fit.nearest(c);
        return centroid_in_segment(band, segment, p) ? std::optional(p) : std::nullopt;
    }
    const Point2 u = geometry::normalized(fit.direction);
    const Point2 v = geometry::perp(u);
    const double s = fit.spacing;
    const double du = geometry::dot(c - fit.origin, u) / s;
    const double dv = geometry::dot(c - fit.origin, v) / s;
    const long long i0 = std::llround(du);
    const long long j0 = std::llround(dv);
    std::optional<Point2> best;
    double best_d = 1e300;
    for (long long ring = 0; ring <= 3 && !best; ++ring) {
        for (long long i = i0 - ring; i <= i0 + ring; ++i) {
            for (long long j = j0 - ring; j <= j0 + ring; ++j) {
                if (std::max(std::llabs(i - i0), std::llabs(j - j0)) != ring) {
                    continue;
                }
                const Point2 node = fit.origin + u * (static_cast<double>(i) * s) + v * (static_cast<double>(j) * s);
                if (!centroid_in_segment(band, segment, node)) {
                    continue;
                }
                bool taken = false;
                for (std::size_t q = 0; q < pts.size() && !taken; ++q) {
                    taken = q != k && geometry::distance(pts[q], node) < 0.45 * s;
                }
                const double d = geometry::distance(node, c);
                if (!taken && d < best_d) {
                    best_d = d;
                    best = node;
                }
            }
        }
    }
    return best;
}

} // namespace

std::size_t op_order_impose(Morphology& m, ChangeLog& log, int target_class, std::mt19937_64& rng,
                            const OperatorContext& ctx) {
    const double tol = ctx.config.order_residual_tolerance;
    const auto goal = scale::score_range(scale::ComplexityClass(std::clamp(target_class, 1, 5)), ctx.config);
    return drive(m, Attribute::Order, target_class, ctx, [&](int dir) -> std::size_t {
        const NavPath nav = nav_of(m, ctx);
        const auto band = geometry::corridor_band(m.scene, nav);
        struct Item {
            std::size_t segment;
            std::size_t obj;
            std::size_t local;
            double residual;
        };
        std::vector<Item> items;
        std::vector<metrics::TemplateFit> fits(nav.segments.size());
        std::vector<std::vector<Point2>> points(nav.segments.size());
        // counts over the measuring scope decide how many objects to touch
        std::size_t total = 0;
        std::size_t ordered = 0;
        for (std::size_t s = 0; s < nav.segments.size(); ++s) {
            const bool measured = !ctx.measure_segment || s == *ctx.measure_segment;
            const bool editable = in_scope(ctx, s) && measured;
            if (!measured && !editable) {
                continue;
            }
            const auto idx = metrics::obstacles_in_segment(m.scene, nav, s);
            fits[s] = metrics::segment_order_fit(m.scene, nav, s, tol, ctx.cache);
            total += idx.size();
            ordered += fits[s].ordered;
            if (!editable) {
                continue;
            }
            for (const std::size_t i : idx) {
                points[s].push_back(geometry::centroid(m.scene.obstacles[i].footprint));
            }
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (is_movable(m.scene.obstacles[idx[k]], ctx.constraints)) {
                    items.push_back({s, idx[k], k, fits[s].residuals.at(k)});
                }
            }
        }
        // ordered fraction must end up in (1 - hi, 1 - lo]; move half the gap
        const double n = static_cast<double>(total);
        const double k = static_cast<double>(ordered);
        const double gap = dir > 0 ? k - std::floor((1.0 - goal.first) * n + 1e-9)
                                   : std::floor((1.0 - goal.second) * n + 1e-9) + 1.0 - k;
        const auto batch = static_cast<std::size_t>(std::max(1.0, std::floor(0.5 * gap)));

        std::size_t edits = 0;
        if (dir > 0) {
            // disorder: jitter ordered objects beyond the tolerance
            std::vector<std::size_t> pool;
            for (const auto& it : items) {
                if (it.residual <= tol) {
                    pool.push_back(it.obj);
                }
            }
            while (edits < batch && !pool.empty()) {
                const std::size_t at = pick(rng, pool.size());
                const std::size_t obj = pool[at];
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(at));
                if (auto e = random_shift(m.scene, band, obj, 2.0 * tol, 4.0 * tol, rng)) {
                    record(m, log, "order_impose", std::move(*e));
                    ++edits;
                }
            }
            return edits;
        }

        // order: snap the worst-fitting objects onto free template positions
        std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.residual > b.residual; });
        for (const auto& it : items) {
            if (edits >= batch || it.residual <= tol) {
                break;
            }
            const auto slot = template_slot(fits[it.segment], points[it.segment], it.local, band, it.segment);
            if (!slot) {
                continue;
            }
            const auto& o = m.scene.obstacles[it.obj];
            const Point2 d = *slot - points[it.segment][it.local];
            if (!inside_bounds(m.scene.bounds, translated(o.footprint, d))) {
                continue;
            }
            record(m, log, "order_impose", MoveObstacle{o.id, d});
            points[it.segment][it.local] = *slot;
            ++edits;
        }
        return edits;
    });
}

} // namespace vlc::manip
