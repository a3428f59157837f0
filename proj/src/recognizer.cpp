#include "modelsync/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace modelsync {

namespace {

// Relative slack for distance comparisons, so float noise in interpolated
// points cannot flip a keep/insert decision on a second pass.
constexpr double kSlack = 1e-9;

const ClassFootprint* topmost_containing(std::span<const ClassFootprint> classes, Point p) {
    for (auto it = classes.rbegin(); it != classes.rend(); ++it) {
        if (it->bounds.contains(p)) {
            return &*it;
        }
    }
    return nullptr;
}

} // namespace

void RecognizerConfig::validate() const {
    if (!(min_point_dist > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "min_point_dist must be positive");
    }
    if (!(max_gap >= 2.0 * min_point_dist)) {
        throw Error(ErrorCode::InvalidConfig, "max_gap must be at least twice min_point_dist");
    }
    if (!(closure_fraction > 0.0) || !(closure_floor > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "closure tolerance must be positive");
    }
}

std::vector<Point> resample_stroke(std::span<const Point> points, const RecognizerConfig& config) {
    config.validate();
    if (points.size() < 2) {
        throw Error(ErrorCode::TooFewPoints, "a stroke needs at least two points");
    }

    std::vector<Point> kept{points.front()};
    const double keep_at = config.min_point_dist * (1.0 - kSlack);
    for (std::size_t i = 1; i + 1 < points.size(); ++i) {
        if (distance(kept.back(), points[i]) >= keep_at) {
            kept.push_back(points[i]);
        }
    }
    kept.push_back(points.back());

    std::vector<Point> out{kept.front()};
    const double split_above = config.max_gap * (1.0 + kSlack);
    for (std::size_t i = 1; i < kept.size(); ++i) {
        const Point a = kept[i - 1];
        const Point b = kept[i];
        const double d = distance(a, b);
        if (d > split_above) {
            const auto segments = static_cast<int>(std::ceil(d / config.max_gap - kSlack));
            for (int k = 1; k < segments; ++k) {
                const double t = static_cast<double>(k) / segments;
                out.push_back({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
            }
        }
        out.push_back(b);
    }
    return out;
}

Rect bounding_box(std::span<const Point> points) {
    if (points.empty()) {
        return {};
    }
    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (const auto& p : points) {
        min_x = std::min(min_x, p.x);
        min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x);
        max_y = std::max(max_y, p.y);
    }
    return {min_x, min_y, max_x - min_x, max_y - min_y};
}

double closure_tolerance(std::span<const Point> points, const RecognizerConfig& config) {
    const Rect box = bounding_box(points);
    return std::max(config.closure_fraction * std::hypot(box.w, box.h), config.closure_floor);
}

RecognitionResult classify_stroke(std::span<const Point> points,
                                  std::span<const ClassFootprint> classes,
                                  const RecognizerConfig& config) {
    if (points.size() < 2) {
        return recognition::InformalSketch{};
    }
    const Point first = points.front();
    const Point last = points.back();

    const ClassFootprint* from = topmost_containing(classes, first);
    const ClassFootprint* to = topmost_containing(classes, last);
    if (from != nullptr && to != nullptr && from->id != to->id) {
        return recognition::RelationshipLine{
            from->id, to->id, std::vector<Point>(points.begin() + 1, points.end() - 1)};
    }

    const Rect box = bounding_box(points);
    if (distance(first, last) <= closure_tolerance(points, config) && box.w >= kMinClassSize &&
        box.h >= kMinClassSize) {
        return recognition::ClassShape{box};
    }
    return recognition::InformalSketch{};
}

RecognitionResult recognize(const Stroke& stroke, const ModelDocument& doc,
                            const RecognizerConfig& config) {
    auto points = resample_stroke(stroke.points, config);
    auto classes = doc.class_footprints(stroke.board);
    return classify_stroke(points, classes, config);
}

} // namespace modelsync
