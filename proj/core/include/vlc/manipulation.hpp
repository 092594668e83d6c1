#pragma once

#include "vlc/scale.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <stop_token>
#include <string>
#include <variant>
#include <vector>

namespace vlc::manip {

using geometry::Point2;
using geometry::Polygon;
using geometry::Polyline;
using geometry::Scene;
using scale::Attribute;

// What the manipulation edits: the scene plus the path being analysed.
struct Morphology {
    Scene scene;
    Polyline path;

    friend bool operator==(const Morphology&, const Morphology&) = default;
};

// Primitive edits. Every state change made by the operators goes through
// apply_edit, which is what makes change-log replay exact.
struct RemoveObstacle {
    std::string id;
};
struct InsertObstacle {
    geometry::Obstacle obstacle;
};
struct MoveObstacle {
    std::string id;
    Point2 delta;
};
struct ReplaceObstacle {
    std::string id;
    Polygon footprint;
};
struct SetCorridorSize {
    std::string id;
    double width = 0.0;
    double height = 0.0;
};
// Corridor axis endpoints sitting on the old vertex move with it.
struct MovePathVertex {
    std::size_t index = 0;
    Point2 to;
};
// The corridors ending and starting at the vertex merge into the first one.
struct RemovePathVertex {
    std::size_t index = 0;
};
struct RemoveWall {
    std::string id;
};
struct InsertWall {
    geometry::Wall wall;
};

using Edit = std::variant<RemoveObstacle, InsertObstacle, MoveObstacle, ReplaceObstacle, SetCorridorSize,
                          MovePathVertex, RemovePathVertex, RemoveWall, InsertWall>;

std::string_view edit_name(const Edit& edit);

// Throws NotFound for unknown ids / indices.
void apply_edit(Morphology& m, const Edit& edit);

struct Step {
    std::string op; // operator that produced the edit
    Edit edit;
};

using ChangeLog = std::vector<Step>;

Morphology replay(Morphology initial, const ChangeLog& log);

struct ConstraintSet {
    bool endpoints_fixed = true;
    double min_width = 1.2;
    double max_width = 12.0;
    std::size_t min_objects = 0;
    std::size_t max_objects = 500;
    std::vector<std::string> immovable_tags;
};

// Throws InfeasibleRequest when the envelope itself is contradictory or the
// input cannot be brought inside it.
void check_feasible(const ConstraintSet& c, const Morphology& initial);

// Number of violated hard constraints (0 for a valid candidate).
std::size_t violations(const Morphology& m, const Morphology& initial, const ConstraintSet& c);

bool is_movable(const geometry::Obstacle& o, const ConstraintSet& c);

// Shared inputs for the per-attribute operators.
struct OperatorContext {
    scale::ScaleConfig config;
    ConstraintSet constraints;
    // segments the operator may touch; empty = all
    std::vector<std::size_t> segments;
    // class is measured on this segment instead of the whole path
    std::optional<std::size_t> measure_segment;
    std::size_t max_steps = 200;
    metrics::MetricCache* cache = nullptr;
};

// Each operator edits `m` in place, appends what it did to `log` and returns
// the number of edits. All are identities when the attribute already sits at
// the target class.
std::size_t op_rotation_simplify(Morphology& m, ChangeLog& log, int target_class, const OperatorContext& ctx);
std::size_t op_size_fit(Morphology& m, ChangeLog& log, int target_class, const OperatorContext& ctx);
std::size_t op_visibility_step(Morphology& m, ChangeLog& log, int target_class, const OperatorContext& ctx);
std::size_t op_symmetrize(Morphology& m, ChangeLog& log, int target_class, std::mt19937_64& rng,
                          const OperatorContext& ctx);
std::size_t op_clutter_adjust(Morphology& m, ChangeLog& log, int target_class, std::mt19937_64& rng,
                              const OperatorContext& ctx);
std::size_t op_order_impose(Morphology& m, ChangeLog& log, int target_class, std::mt19937_64& rng,
                            const OperatorContext& ctx);

// Class of one attribute for the operator's measuring scope.
scale::AttributeResult probe(const Morphology& m, Attribute a, const OperatorContext& ctx);

struct GenerationRecord {
    std::size_t generation = 0;
    std::size_t evaluations = 0;
    double best_objective = 0.0;
};

struct ManipulationResult {
    Morphology morphology;
    scale::ComplexityReport before;
    scale::ComplexityReport after;
    ChangeLog log;
    double objective = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
    std::vector<GenerationRecord> history;
};

// Visibility search: the evolutionary loop restricted to wall openings and
// wall stubs, objective |visibility class - target|.
ManipulationResult op_visibility_search(const Morphology& m, int target_class, const OperatorContext& ctx,
                                        std::uint64_t seed, std::size_t budget);

struct ManipulationRequest {
    double target_class = 3.0;
    std::vector<Attribute> attributes{scale::kAllAttributes.begin(), scale::kAllAttributes.end()};
    // empty = all segments
    std::vector<std::size_t> segments;
    ConstraintSet constraints;
    std::uint64_t seed = 42;
    std::size_t budget = 5000;
};

struct SegmentRequest {
    std::size_t segment = 0;
    Attribute attribute = Attribute::Clutter;
    double segment_target = 3.0;
    double overall_target = 3.0;
    ConstraintSet constraints;
    std::uint64_t seed = 42;
    std::size_t budget = 5000;
};

inline constexpr double kConvergenceTolerance = 0.25;
inline constexpr double kPenaltyWeight = 10.0;
inline constexpr std::size_t kParents = 8;
inline constexpr std::size_t kChildren = 32;

// Throws ValidationError for malformed requests, InfeasibleRequest for
// contradictory constraints. A stop request ends the search after the
// current generation and returns the best so far.
ManipulationResult manipulate(const Morphology& m, const ManipulationRequest& request,
                              const scale::ScaleConfig& config, std::stop_token stop = {});

ManipulationResult manipulate_segment(const Morphology& m, const SegmentRequest& request,
                                      const scale::ScaleConfig& config, std::stop_token stop = {});

} // namespace vlc::manip
