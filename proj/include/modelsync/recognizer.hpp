#pragma once

#include "modelsync/model.hpp"

#include <span>
#include <variant>
#include <vector>

namespace modelsync {

struct RecognizerConfig {
    double min_point_dist = 2.0;     // decimation threshold
    double max_gap = 10.0;           // densification threshold
    double closure_fraction = 0.05;  // of the stroke bounding-box diagonal
    double closure_floor = 5.0;

    /// Throws InvalidConfig. Requires max_gap >= 2 * min_point_dist so that
    /// interpolated points survive a second decimation pass.
    void validate() const;
};

/// Decimate to at least min_point_dist spacing, then densify so no gap
/// exceeds max_gap. First and last raw points are kept exactly.
std::vector<Point> resample_stroke(std::span<const Point> points,
                                   const RecognizerConfig& config = {});

Rect bounding_box(std::span<const Point> points);
double closure_tolerance(std::span<const Point> points, const RecognizerConfig& config = {});

namespace recognition {
struct ClassShape {
    Rect bounds;
};
struct RelationshipLine {
    ElementId source;
    ElementId target;
    std::vector<Point> waypoints;
};
struct InformalSketch {};
} // namespace recognition

using RecognitionResult = std::variant<recognition::ClassShape, recognition::RelationshipLine,
                                       recognition::InformalSketch>;

/// `classes` lists the class bounds on the stroke's board, bottom to top;
/// the last containing class wins when bounds overlap.
RecognitionResult classify_stroke(std::span<const Point> points,
                                  std::span<const ClassFootprint> classes,
                                  const RecognizerConfig& config = {});

/// Convenience: resample, then classify against the document's board.
RecognitionResult recognize(const Stroke& stroke, const ModelDocument& doc,
                            const RecognizerConfig& config = {});

} // namespace modelsync
