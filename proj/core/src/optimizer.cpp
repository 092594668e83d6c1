#include "vlc/manipulation.hpp"

#include "vlc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace vlc::manip {

namespace {

// Step cap for an operator invoked as a mutation; keeps one child cheap.
constexpr std::size_t kMutationSteps = 12;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 child_rng(std::uint64_t seed, std::size_t generation, std::size_t child) {
    return std::mt19937_64(splitmix64(splitmix64(splitmix64(seed) ^ generation) ^ child));
}

struct Candidate {
    Morphology m;
    ChangeLog log;
    scale::ComplexityReport report;
    double f = 0.0;
};

using Objective = std::function<double(const scale::ComplexityReport&)>;
using Mutation = std::function<std::size_t(Morphology&, ChangeLog&, const Candidate&, std::mt19937_64&)>;

struct Search {
    const Morphology& initial;
    const ConstraintSet& constraints;
    const scale::ScaleConfig& config;
    metrics::MetricCache& cache;
    Objective objective;
    Mutation mutate;
    std::uint64_t seed = 0;
    std::size_t budget = 0;
    std::stop_token stop;
};

Candidate evaluate(const Search& s, Morphology m, ChangeLog log) {
    const auto nav = geometry::make_nav_path(m.scene, m.path, s.config.turn_threshold_deg);
    auto report = scale::identify(m.scene, nav, s.config, &s.cache);
    const double f =
        s.objective(report) + kPenaltyWeight * static_cast<double>(violations(m, s.initial, s.constraints));
    return Candidate{std::move(m), std::move(log), std::move(report), f};
}

// Widths outside the envelope are clamped up front rather than penalised.
ChangeLog repair_widths(Morphology& m, const ConstraintSet& c) {
    ChangeLog log;
    for (const auto& cor : m.scene.corridors) {
        const double w = std::clamp(cor.width, c.min_width, c.max_width);
        if (w != cor.width) {
            log.push_back({"repair", SetCorridorSize{cor.id, w, cor.height}});
        }
    }
    for (const auto& step : log) {
        apply_edit(m, step.edit);
    }
    return log;
}

ManipulationResult run(const Search& s, const scale::ComplexityReport& before) {
    ManipulationResult out;
    out.before = before;

    Morphology start = s.initial;
    ChangeLog start_log = repair_widths(start, s.constraints);
    std::vector<Candidate> pop;
    pop.push_back(evaluate(s, std::move(start), std::move(start_log)));
    std::size_t evals = 1;
    out.history.push_back({0, evals, pop.front().f});

    std::size_t barren = 0;
    for (std::size_t gen = 1; pop.front().f > kConvergenceTolerance && evals < s.budget && !s.stop.stop_requested();
         ++gen) {
        std::vector<Candidate> children;
        for (std::size_t i = 0; i < kChildren && evals < s.budget && !s.stop.stop_requested(); ++i) {
            const Candidate& parent = pop[i % pop.size()];
            auto rng = child_rng(s.seed, gen, i);
            Morphology m = parent.m;
            ChangeLog log = parent.log;
            try {
                if (s.mutate(m, log, parent, rng) == 0) {
                    continue;
                }
            } catch (const Error&) {
                continue;
            }
            ++evals;
            try {
                children.push_back(evaluate(s, std::move(m), std::move(log)));
            } catch (const Error&) {
                // undecodable candidate (e.g. an edge lost its corridor): dropped
            }
        }
        barren = children.empty() ? barren + 1 : 0;
        for (auto& c : children) {
            pop.push_back(std::move(c));
        }
        std::stable_sort(pop.begin(), pop.end(), [](const Candidate& a, const Candidate& b) {
            if (a.f != b.f) {
                return a.f < b.f;
            }
            return a.log.size() < b.log.size();
        });
        if (pop.size() > kParents) {
            pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(kParents), pop.end());
        }
        out.history.push_back({gen, evals, pop.front().f});
        if (barren >= 3) {
            break;
        }
    }

    Candidate& best = pop.front();
    out.morphology = std::move(best.m);
    out.log = std::move(best.log);
    out.after = std::move(best.report);
    out.objective = best.f;
    out.evaluations = evals;
    out.converged = best.f <= kConvergenceTolerance;
    return out;
}

std::size_t apply_operator(Attribute a, Morphology& m, ChangeLog& log, int target, std::mt19937_64& rng,
                           const OperatorContext& ctx) {
    switch (a) {
    case Attribute::Rotation:
        return op_rotation_simplify(m, log, target, ctx);
    case Attribute::Size:
        return op_size_fit(m, log, target, ctx);
    case Attribute::Visibility:
        return op_visibility_step(m, log, target, ctx);
    case Attribute::Symmetry:
        return op_symmetrize(m, log, target, rng, ctx);
    case Attribute::Clutter:
        return op_clutter_adjust(m, log, target, rng, ctx);
    case Attribute::Order:
        break;
    }
    return op_order_impose(m, log, target, rng, ctx);
}

std::size_t pick(std::mt19937_64& rng, std::size_t n) {
    return static_cast<std::size_t>(rng() % n);
}

void require_target(double t, std::string_view what) {
    if (!(t >= 1.0 && t <= 5.0)) {
        throw Error(ErrorCode::ValidationError, std::string(what) + " must lie in [1, 5]");
    }
}

void require_budget(std::size_t budget) {
    if (budget == 0) {
        throw Error(ErrorCode::ValidationError, "budget must be at least 1 evaluation");
    }
}

} // namespace

ManipulationResult op_visibility_search(const Morphology& m, int target_class, const OperatorContext& ctx,
                                        std::uint64_t seed, std::size_t budget) {
    require_target(target_class, "target class");
    require_budget(budget);
    scale::validate(ctx.config);
    check_feasible(ctx.constraints, m);
    metrics::MetricCache cache;
    OperatorContext base = ctx;
    base.cache = &cache;
    const auto vis_class = [&](const scale::ComplexityReport& r) {
        const auto idx = scale::index_of(Attribute::Visibility);
        if (ctx.measure_segment) {
            return r.segments.at(*ctx.measure_segment).attributes[idx].cls.value();
        }
        return r.attributes[idx].cls.value();
    };
    Search s{m,
             ctx.constraints,
             ctx.config,
             cache,
             [&](const scale::ComplexityReport& r) { return std::abs(static_cast<double>(vis_class(r) - target_class)); },
             [&](Morphology& mm, ChangeLog& log, const Candidate&, std::mt19937_64& rng) {
                 OperatorContext local = base;
                 local.max_steps = 1 + pick(rng, 3);
                 return op_visibility_step(mm, log, target_class, local);
             },
             seed,
             budget,
             {}};
    const auto before = scale::identify(m.scene, geometry::make_nav_path(m.scene, m.path, ctx.config.turn_threshold_deg),
                                        ctx.config, &cache);
    return run(s, before);
}

ManipulationResult manipulate(const Morphology& m, const ManipulationRequest& request, const scale::ScaleConfig& config,
                              std::stop_token stop) {
    require_target(request.target_class, "target class");
    require_budget(request.budget);
    if (request.attributes.empty()) {
        throw Error(ErrorCode::ValidationError, "attribute set must not be empty");
    }
    scale::validate(config);
    check_feasible(request.constraints, m);
    const auto nav = geometry::make_nav_path(m.scene, m.path, config.turn_threshold_deg);
    for (const std::size_t s : request.segments) {
        if (s >= nav.segments.size()) {
            throw Error(ErrorCode::ValidationError, "segment index " + std::to_string(s) + " out of range");
        }
    }

    metrics::MetricCache cache;
    OperatorContext base{config, request.constraints, request.segments, std::nullopt, kMutationSteps, &cache};
    const double target = request.target_class;
    Search s{m,
             request.constraints,
             config,
             cache,
             [target](const scale::ComplexityReport& r) { return std::abs(r.aggregate_mean - target); },
             [&](Morphology& mm, ChangeLog& log, const Candidate& parent, std::mt19937_64& rng) -> std::size_t {
                 const int dir = parent.report.aggregate_mean > target ? -1 : 1;
                 std::vector<Attribute> eligible;
                 for (const Attribute a : request.attributes) {
                     const int cls = parent.report[a].cls.value();
                     if ((dir < 0 ? cls > 1 : cls < 5) && !(a == Attribute::Rotation && dir > 0)) {
                         eligible.push_back(a);
                     }
                 }
                 if (eligible.empty()) {
                     return 0;
                 }
                 const Attribute a = eligible[pick(rng, eligible.size())];
                 const int step = 1 + static_cast<int>(pick(rng, 2));
                 const int goal = std::clamp(parent.report[a].cls.value() + dir * step, 1, 5);
                 OperatorContext local = base;
                 local.max_steps = 1 + pick(rng, kMutationSteps);
                 return apply_operator(a, mm, log, goal, rng, local);
             },
             request.seed,
             request.budget,
             std::move(stop)};
    return run(s, scale::identify(m.scene, nav, config, &cache));
}

ManipulationResult manipulate_segment(const Morphology& m, const SegmentRequest& request,
                                      const scale::ScaleConfig& config, std::stop_token stop) {
    require_target(request.segment_target, "segment target");
    require_target(request.overall_target, "overall target");
    require_budget(request.budget);
    scale::validate(config);
    check_feasible(request.constraints, m);
    const auto nav = geometry::make_nav_path(m.scene, m.path, config.turn_threshold_deg);
    const std::size_t seg = request.segment;
    if (seg >= nav.segments.size()) {
        throw Error(ErrorCode::ValidationError, "segment index " + std::to_string(seg) + " out of range");
    }
    if (nav.segments.size() == 1 && request.segment_target != request.overall_target) {
        throw Error(ErrorCode::InfeasibleRequest,
                    "single-segment path: segment target and overall target must coincide");
    }

    metrics::MetricCache cache;
    // path edits would renumber segments, so rotation is not a segment gene
    OperatorContext base{config, request.constraints, {seg}, seg, kMutationSteps, &cache};
    const Attribute attr = request.attribute;
    const int seg_goal = std::clamp(scale::round_half_up(request.segment_target), 1, 5);
    const double overall = request.overall_target;
    auto seg_class = [&](const scale::ComplexityReport& r, Attribute a) {
        return r.segments.at(seg).attributes[scale::index_of(a)].cls.value();
    };
    Search s{m,
             request.constraints,
             config,
             cache,
             [&](const scale::ComplexityReport& r) {
                 if (r.segments.size() <= seg) {
                     return 1e6;
                 }
                 return std::abs(static_cast<double>(seg_class(r, attr)) - request.segment_target) +
                        std::abs(r.aggregate_mean - overall);
             },
             [&](Morphology& mm, ChangeLog& log, const Candidate& parent, std::mt19937_64& rng) -> std::size_t {
                 const bool attr_off = seg_class(parent.report, attr) != seg_goal;
                 const bool agg_off = std::abs(parent.report.aggregate_mean - overall) > kConvergenceTolerance;
                 OperatorContext local = base;
                 local.max_steps = 1 + pick(rng, kMutationSteps);
                 if (attr_off && (!agg_off || pick(rng, 2) == 0)) {
                     return apply_operator(attr, mm, log, seg_goal, rng, local);
                 }
                 const int dir = parent.report.aggregate_mean > overall ? -1 : 1;
                 std::vector<Attribute> eligible;
                 for (const Attribute a : scale::kAllAttributes) {
                     const int cls = seg_class(parent.report, a);
                     // the requested attribute stays eligible: a few steps can
                     // move it within its bin without leaving it
                     if (a != Attribute::Rotation && (dir < 0 ? cls > 1 : cls < 5)) {
                         eligible.push_back(a);
                     }
                 }
                 if (eligible.empty()) {
                     return 0;
                 }
                 const Attribute a = eligible[pick(rng, eligible.size())];
                 const int step = 1 + static_cast<int>(pick(rng, 2));
                 return apply_operator(a, mm, log, std::clamp(seg_class(parent.report, a) + dir * step, 1, 5), rng,
                                       local);
             },
             request.seed,
             request.budget,
             std::move(stop)};
    return run(s, scale::identify(m.scene, nav, config, &cache));
}

} // namespace vlc::manip
