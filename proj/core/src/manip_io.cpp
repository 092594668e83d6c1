#include "vlc/io.hpp"

#include "json_cursor.hpp"

namespace vlc::io {

using detail::Node;
using detail::parse_fail;
using detail::points_json;
using detail::polygon_for;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

json obstacle_json(const geometry::Obstacle& o) {
    return {{"id", o.id},
            {"footprint", points_json(o.footprint.ring())},
            {"height", o.height},
            {"tag", o.tag},
            {"movable", o.movable}};
}

geometry::Obstacle obstacle_from(const Node& n) {
    geometry::Obstacle o;
    o.id = n.at("id").string();
    o.footprint = polygon_for("obstacle", o.id, n.at("footprint").points());
    o.height = n.has("height") ? n.at("height").number() : 1.0;
    o.tag = n.has("tag") ? n.at("tag").string() : std::string();
    o.movable = n.has("movable") ? n.at("movable").boolean() : true;
    return o;
}

std::size_t index_from(const Node& n) {
    if (!n.raw().is_number_unsigned() && !(n.raw().is_number_integer() && n.raw().get<long long>() >= 0)) {
        parse_fail(n.pointer(), "expected a non-negative integer");
    }
    return n.raw().get<std::size_t>();
}

std::uint64_t seed_from(const Node& n) {
    if (!n.raw().is_number_unsigned() && !(n.raw().is_number_integer() && n.raw().get<long long>() >= 0)) {
        parse_fail(n.pointer(), "seed must be a non-negative integer");
    }
    return n.raw().get<std::uint64_t>();
}

json edit_fields(const manip::Edit& edit) {
    return std::visit(
        overloaded{
            [](const manip::RemoveObstacle& e) { return json{{"id", e.id}}; },
            [](const manip::InsertObstacle& e) { return json{{"obstacle", obstacle_json(e.obstacle)}}; },
            [](const manip::MoveObstacle& e) { return json{{"id", e.id}, {"delta", point_json(e.delta)}}; },
            [](const manip::ReplaceObstacle& e) {
                return json{{"id", e.id}, {"footprint", points_json(e.footprint.ring())}};
            },
            [](const manip::SetCorridorSize& e) {
                return json{{"id", e.id}, {"width", e.width}, {"height", e.height}};
            },
            [](const manip::MovePathVertex& e) { return json{{"index", e.index}, {"to", point_json(e.to)}}; },
            [](const manip::RemovePathVertex& e) { return json{{"index", e.index}}; },
            [](const manip::RemoveWall& e) { return json{{"id", e.id}}; },
            [](const manip::InsertWall& e) {
                return json{{"wall",
                             {{"id", e.wall.id}, {"ring", points_json(e.wall.shape.ring())}, {"movable", e.wall.movable}}}};
            },
        },
        edit);
}

manip::Edit edit_from(const Node& n) {
    const std::string type = n.at("type").string();
    if (type == "remove_obstacle") {
        return manip::RemoveObstacle{n.at("id").string()};
    }
    if (type == "insert_obstacle") {
        return manip::InsertObstacle{obstacle_from(n.at("obstacle"))};
    }
    if (type == "move_obstacle") {
        return manip::MoveObstacle{n.at("id").string(), n.at("delta").point()};
    }
    if (type == "replace_obstacle") {
        const std::string id = n.at("id").string();
        return manip::ReplaceObstacle{id, polygon_for("obstacle", id, n.at("footprint").points())};
    }
    if (type == "set_corridor_size") {
        return manip::SetCorridorSize{n.at("id").string(), n.at("width").number(), n.at("height").number()};
    }
    if (type == "move_path_vertex") {
        return manip::MovePathVertex{index_from(n.at("index")), n.at("to").point()};
    }
    if (type == "remove_path_vertex") {
        return manip::RemovePathVertex{index_from(n.at("index"))};
    }
    if (type == "remove_wall") {
        return manip::RemoveWall{n.at("id").string()};
    }
    if (type == "insert_wall") {
        const Node w = n.at("wall");
        geometry::Wall wall;
        wall.id = w.at("id").string();
        wall.shape = polygon_for("wall", wall.id, w.at("ring").points());
        wall.movable = w.has("movable") ? w.at("movable").boolean() : true;
        return manip::InsertWall{std::move(wall)};
    }
    parse_fail(n.pointer() + "/type", "unknown edit type '" + type + "'");
}

std::vector<scale::Attribute> attributes_from(const Node& n) {
    std::vector<scale::Attribute> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        const auto a = scale::attribute_from_string(n.at(i).string());
        if (std::find(out.begin(), out.end(), a) == out.end()) {
            out.push_back(a);
        }
    }
    return out;
}

} // namespace

json to_json(const manip::Edit& edit) {
    json j = edit_fields(edit);
    j["type"] = manip::edit_name(edit);
    return j;
}

manip::Edit edit_from_json(const json& j) {
    const Node n(j, "");
    n.expect_object();
    return edit_from(n);
}

json to_json(const manip::ChangeLog& log) {
    json a = json::array();
    for (const auto& step : log) {
        json j = to_json(step.edit);
        j["op"] = step.op;
        a.push_back(std::move(j));
    }
    return a;
}

manip::ChangeLog change_log_from_json(const json& j) {
    const Node root(j, "");
    manip::ChangeLog log;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const Node n = root.at(i);
        n.expect_object();
        log.push_back({n.at("op").string(), edit_from(n)});
    }
    return log;
}

json to_json(const manip::ConstraintSet& c) {
    return {{"endpoints_fixed", c.endpoints_fixed}, {"min_width", c.min_width},     {"max_width", c.max_width},
            {"min_objects", c.min_objects},         {"max_objects", c.max_objects}, {"immovable_tags", c.immovable_tags}};
}

namespace {

manip::ConstraintSet constraints_from(const Node& n) {
    n.expect_object();
    manip::ConstraintSet c;
    if (n.has("endpoints_fixed")) {
        c.endpoints_fixed = n.at("endpoints_fixed").boolean();
    }
    if (n.has("min_width")) {
        c.min_width = n.at("min_width").number();
    }
    if (n.has("max_width")) {
        c.max_width = n.at("max_width").number();
    }
    if (n.has("min_objects")) {
        c.min_objects = index_from(n.at("min_objects"));
    }
    if (n.has("max_objects")) {
        c.max_objects = index_from(n.at("max_objects"));
    }
    if (n.has("immovable_tags")) {
        const Node t = n.at("immovable_tags");
        for (std::size_t i = 0; i < t.size(); ++i) {
            c.immovable_tags.push_back(t.at(i).string());
        }
    }
    return c;
}

} // namespace

manip::ConstraintSet constraints_from_json(const json& j) {
    return constraints_from(Node(j, ""));
}

AnyRequest request_from_json(const json& j) {
    const Node root(j, "");
    root.expect_object();
    manip::ConstraintSet constraints;
    if (root.has("constraints")) {
        constraints = constraints_from(root.at("constraints"));
    }
    std::uint64_t seed = 42;
    if (root.has("seed")) {
        seed = seed_from(root.at("seed"));
    }
    std::size_t budget = 5000;
    if (root.has("budget")) {
        budget = index_from(root.at("budget"));
    }
    auto attributes = [&](std::vector<scale::Attribute> fallback) {
        if (!root.has("attributes")) {
            return fallback;
        }
        try {
            return attributes_from(root.at("attributes"));
        } catch (const Error& e) {
            if (e.code() == ErrorCode::UnknownAttribute) {
                parse_fail("/attributes", e.what());
            }
            throw;
        }
    };

    if (root.has("segment") && !root.at("segment").raw().is_null()) {
        manip::SegmentRequest r;
        r.segment = index_from(root.at("segment"));
        if (root.has("target_class")) {
            r.segment_target = root.at("target_class").number();
        }
        if (root.has("overall_target")) {
            r.overall_target = root.at("overall_target").number();
        }
        if (root.has("attribute")) {
            const Node a = root.at("attribute");
            try {
                r.attribute = scale::attribute_from_string(a.string());
            } catch (const Error& e) {
                parse_fail(a.pointer(), e.what());
            }
        } else {
            const auto attrs = attributes({r.attribute});
            if (attrs.size() != 1) {
                parse_fail("/attributes", "a segment request names exactly one attribute");
            }
            r.attribute = attrs.front();
        }
        r.constraints = std::move(constraints);
        r.seed = seed;
        r.budget = budget;
        return r;
    }

    manip::ManipulationRequest r;
    if (root.has("target_class")) {
        r.target_class = root.at("target_class").number();
    }
    r.attributes = attributes(r.attributes);
    if (root.has("segments")) {
        const Node s = root.at("segments");
        if (s.raw().is_string()) {
            if (s.string() != "all") {
                parse_fail(s.pointer(), "expected \"all\" or a list of segment indices");
            }
        } else {
            for (std::size_t i = 0; i < s.size(); ++i) {
                r.segments.push_back(index_from(s.at(i)));
            }
        }
    }
    r.constraints = std::move(constraints);
    r.seed = seed;
    r.budget = budget;
    return r;
}

json to_json(const AnyRequest& request) {
    return std::visit(overloaded{
                          [](const manip::ManipulationRequest& r) {
                              json attrs = json::array();
                              for (const auto a : r.attributes) {
                                  attrs.push_back(scale::to_string(a));
                              }
                              json segs = r.segments.empty() ? json("all") : json(r.segments);
                              return json{{"target_class", r.target_class}, {"attributes", attrs},
                                          {"segments", segs},               {"constraints", to_json(r.constraints)},
                                          {"seed", r.seed},                 {"budget", r.budget}};
                          },
                          [](const manip::SegmentRequest& r) {
                              return json{{"segment", r.segment},
                                          {"attribute", scale::to_string(r.attribute)},
                                          {"target_class", r.segment_target},
                                          {"overall_target", r.overall_target},
                                          {"constraints", to_json(r.constraints)},
                                          {"seed", r.seed},
                                          {"budget", r.budget}};
                          },
                      },
                      request);
}

json to_json(const manip::ManipulationResult& r) {
    json history = json::array();
    for (const auto& h : r.history) {
        history.push_back(
            {{"generation", h.generation}, {"evaluations", h.evaluations}, {"best_objective", h.best_objective}});
    }
    return {{"objective", r.objective},
            {"evaluations", r.evaluations},
            {"converged", r.converged},
            {"before", to_json(r.before)},
            {"after", to_json(r.after)},
            {"change_log", to_json(r.log)},
            {"history", history},
            {"path", points_json(r.morphology.path.vertices)}};
}

} // namespace vlc::io
