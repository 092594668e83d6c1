#include "vlc/scale.hpp"

#include <algorithm>
#include <cmath>

namespace vlc::scale {

std::string_view to_string(Attribute a) {
    switch (a) {
    case Attribute::Rotation:
        return "rotation";
    case Attribute::Size:
        return "size";
    case Attribute::Visibility:
        return "visibility";
    case Attribute::Symmetry:
        return "symmetry";
    case Attribute::Clutter:
        return "clutter";
    case Attribute::Order:
        break;
    }
    return "order";
}

Attribute attribute_from_string(std::string_view id) {
    for (const Attribute a : kAllAttributes) {
        if (to_string(a) == id) {
            return a;
        }
    }
    throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + std::string(id) + "'");
}

void validate(const ScaleConfig& c) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::ValidationError, what); };
    if (!(c.rotation_degrees_cap > 0.0) || !(c.clutter_cap > 0.0) || !(c.size_deviation_cap > 0.0)) {
        fail("normalisation caps must be positive");
    }
    if (!(c.width_band.lo > 0.0 && c.width_band.lo < c.width_band.hi) ||
        !(c.height_band.lo > 0.0 && c.height_band.lo < c.height_band.hi)) {
        fail("comfort bands must satisfy 0 < lo < hi");
    }
    double prev = 0.0;
    for (const double e : c.bin_edges) {
        if (!(e > prev && e < 1.0)) {
            fail("bin edges must be strictly increasing within (0, 1)");
        }
        prev = e;
    }
    double weight_sum = 0.0;
    for (const double w : c.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            fail("attribute weights must be finite and non-negative");
        }
        weight_sum += w;
    }
    if (!(weight_sum > 0.0)) {
        fail("at least one attribute weight must be positive");
    }
    if (!(c.turn_threshold_deg > 0.0 && c.turn_threshold_deg < 180.0)) {
        fail("turn threshold must lie in (0, 180) degrees");
    }
    if (!(c.sample_spacing > 0.0)) {
        fail("sample spacing must be positive");
    }
    if (!(c.order_residual_tolerance > 0.0)) {
        fail("order residual tolerance must be positive");
    }
}

ComplexityClass::ComplexityClass(int value) : m_value(value) {
    if (value < 1 || value > 5) {
        throw Error(ErrorCode::InvalidScore, "complexity class must lie in [1, 5], got " + std::to_string(value));
    }
}

double rotation_rate(double accumulated_degrees, double length) {
    if (!(length > 0.0)) {
        throw Error(ErrorCode::DegenerateGeometry, "rotation rate needs a positive path length");
    }
    return accumulated_degrees * (100.0 / length);
}

double size_deviation(double mean_width, double mean_height, const ScaleConfig& config) {
    auto deviation = [](double v, ComfortBand band) {
        if (v < band.lo) {
            return (band.lo - v) / band.lo;
        }
        if (v > band.hi) {
            return (v - band.hi) / band.hi;
        }
        return 0.0;
    };
    return std::max(deviation(mean_width, config.width_band), deviation(mean_height, config.height_band));
}

double normalize(Attribute a, double raw, const ScaleConfig& config, const PathContext& context) {
    switch (a) {
    case Attribute::Rotation:
        return std::clamp(rotation_rate(raw, context.length) / config.rotation_degrees_cap, 0.0, 1.0);
    case Attribute::Clutter:
        return std::clamp(raw / config.clutter_cap, 0.0, 1.0);
    case Attribute::Size:
        return std::clamp(size_deviation(raw, context.mean_height, config) / config.size_deviation_cap, 0.0, 1.0);
    case Attribute::Visibility:
    case Attribute::Symmetry:
    case Attribute::Order:
        break;
    }
    return std::clamp(1.0 - raw, 0.0, 1.0);
}

double normalize(std::string_view attribute_id, double raw, const ScaleConfig& config, const PathContext& context) {
    return normalize(attribute_from_string(attribute_id), raw, config, context);
}

ComplexityClass classify(double score, const ScaleConfig& config) {
    if (!(score >= 0.0 && score <= 1.0)) {
        throw Error(ErrorCode::InvalidScore, "score must lie in [0, 1]");
    }
    int cls = 1;
    for (const double edge : config.bin_edges) {
        if (score >= edge) {
            ++cls;
        }
    }
    return ComplexityClass(cls);
}

std::pair<double, double> score_range(ComplexityClass cls, const ScaleConfig& config) {
    const int k = cls.value();
    const double lo = k == 1 ? 0.0 : config.bin_edges[static_cast<std::size_t>(k - 2)];
    const double hi = k == 5 ? 1.0 : config.bin_edges[static_cast<std::size_t>(k - 1)];
    return {lo, hi};
}

int round_half_up(double mean) {
    return static_cast<int>(std::floor(mean + 0.5));
}

Aggregate aggregate(std::span<const ComplexityClass> classes) {
    const std::vector<double> ones(classes.size(), 1.0);
    return aggregate(classes, ones);
}

Aggregate aggregate(std::span<const ComplexityClass> classes, std::span<const double> weights) {
    if (classes.empty()) {
        throw Error(ErrorCode::EmptyReport, "cannot aggregate an empty set of classes");
    }
    double sum = 0.0;
    double wsum = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const double w = i < weights.size() ? weights[i] : 1.0;
        sum += w * classes[i].value();
        wsum += w;
    }
    if (!(wsum > 0.0)) {
        throw Error(ErrorCode::EmptyReport, "aggregate weights sum to zero");
    }
    const double mean = sum / wsum;
    return {mean, ComplexityClass(std::clamp(round_half_up(mean), 1, 5))};
}

double preference_score(double aggregate_mean) {
    if (!(aggregate_mean >= 1.0 && aggregate_mean <= 5.0)) {
        throw Error(ErrorCode::InvalidScore, "aggregate mean must lie in [1, 5]");
    }
    const double d = (aggregate_mean - 3.0) / 2.0;
    return 1.0 - d * d;
}

namespace {

AttributeResult result(Attribute a, double raw_for_normalize, double reported_raw, const ScaleConfig& config,
                       const PathContext& ctx) {
    AttributeResult r;
    r.raw = reported_raw;
    r.score = normalize(a, raw_for_normalize, config, ctx);
    r.cls = classify(r.score, config);
    return r;
}

Aggregate aggregate_results(const AttributeResults& results, const ScaleConfig& config) {
    std::vector<ComplexityClass> classes;
    for (const auto& r : results) {
        classes.push_back(r.cls);
    }
    return aggregate(classes, config.weights);
}

} // namespace

ComplexityReport identify(const geometry::Scene& scene, const geometry::NavPath& path, const ScaleConfig& config,
                          metrics::MetricCache* cache) {
    validate(config);
    ComplexityReport rep;
    rep.path_length = path.length();
    rep.rotation = metrics::rotation_metric(path);
    rep.size = metrics::size_metric(scene, path);
    rep.visibility = metrics::visibility_metric(scene, path, config.sample_spacing, config.visibility_mode);
    rep.symmetry = metrics::symmetry_metric(scene, path, cache);
    rep.clutter = metrics::clutter_metric(scene, path, cache);
    rep.order = metrics::order_metric(scene, path, config.order_residual_tolerance, cache);

    const PathContext ctx{rep.path_length, rep.size.mean_height};
    auto fill = [&](AttributeResults& out, const metrics::RotationMeasure& rot, const metrics::SizeMeasure& size,
                    double vis, double sym, double clut, double ord, const PathContext& c) {
        out[index_of(Attribute::Rotation)] = result(Attribute::Rotation, rot.accumulated_degrees,
                                                    rotation_rate(rot.accumulated_degrees, c.length), config, c);
        out[index_of(Attribute::Size)] = result(Attribute::Size, size.mean_width,
                                                size_deviation(size.mean_width, size.mean_height, config), config, c);
        out[index_of(Attribute::Visibility)] = result(Attribute::Visibility, vis, vis, config, c);
        out[index_of(Attribute::Symmetry)] = result(Attribute::Symmetry, sym, sym, config, c);
        out[index_of(Attribute::Clutter)] = result(Attribute::Clutter, clut, clut, config, c);
        out[index_of(Attribute::Order)] = result(Attribute::Order, ord, ord, config, c);
    };

    fill(rep.attributes, rep.rotation, rep.size, rep.visibility.visible_fraction, rep.symmetry.best_score,
         rep.clutter.coverage_fraction, rep.order.ordered_fraction, ctx);
    const Aggregate agg = aggregate_results(rep.attributes, config);
    rep.aggregate_mean = agg.mean;
    rep.overall_class = agg.overall;
    rep.preference = preference_score(agg.mean);

    for (std::size_t s = 0; s < path.segments.size(); ++s) {
        const auto& seg = path.segments[s];
        SegmentReport sr;
        sr.index = s;
        sr.chainage_start = path.chainage[seg.first_vertex];
        sr.chainage_end = path.chainage[seg.last_vertex];
        const auto size = metrics::size_metric(scene, path, s);
        const PathContext sctx{seg.length, size.mean_height};
        fill(sr.attributes, metrics::rotation_metric(path, s), size, rep.visibility.per_segment_fractions[s],
             rep.symmetry.per_segment[s].score, rep.clutter.per_segment_fractions[s],
             rep.order.per_segment_fractions[s], sctx);
        const Aggregate sagg = aggregate_results(sr.attributes, config);
        sr.aggregate_mean = sagg.mean;
        sr.overall = sagg.overall;
        rep.segments.push_back(sr);
    }
    return rep;
}

AttributeResult evaluate_attribute(const geometry::Scene& scene, const geometry::NavPath& path, Attribute a,
                                   std::optional<std::size_t> segment, const ScaleConfig& config,
                                   metrics::MetricCache* cache) {
    const double length = segment ? path.segments.at(*segment).length : path.length();
    switch (a) {
    case Attribute::Rotation: {
        const auto rot = metrics::rotation_metric(path, segment);
        return result(a, rot.accumulated_degrees, rotation_rate(rot.accumulated_degrees, length), config,
                      {length, 0.0});
    }
    case Attribute::Size: {
        const auto size = metrics::size_metric(scene, path, segment);
        return result(a, size.mean_width, size_deviation(size.mean_width, size.mean_height, config), config,
                      {length, size.mean_height});
    }
    case Attribute::Visibility: {
        const auto v = metrics::visibility_metric(scene, path, config.sample_spacing, config.visibility_mode);
        const double f = segment ? v.per_segment_fractions.at(*segment) : v.visible_fraction;
        return result(a, f, f, config, {length, 0.0});
    }
    case Attribute::Symmetry: {
        const auto sym = metrics::symmetry_metric(scene, path, cache);
        const double f = segment ? sym.per_segment.at(*segment).score : sym.best_score;
        return result(a, f, f, config, {length, 0.0});
    }
    case Attribute::Clutter: {
        const auto c = metrics::clutter_metric(scene, path, cache);
        const double f = segment ? c.per_segment_fractions.at(*segment) : c.coverage_fraction;
        return result(a, f, f, config, {length, 0.0});
    }
    case Attribute::Order:
        break;
    }
    const auto o = metrics::order_metric(scene, path, config.order_residual_tolerance, cache);
    const double f = segment ? o.per_segment_fractions.at(*segment) : o.ordered_fraction;
    return result(a, f, f, config, {length, 0.0});
}

ComplexityReport identify(const geometry::Scene& scene, const geometry::Polyline& line, const ScaleConfig& config) {
    validate(config);
    return identify(scene, geometry::make_nav_path(scene, line, config.turn_threshold_deg), config);
}

} // namespace vlc::scale
