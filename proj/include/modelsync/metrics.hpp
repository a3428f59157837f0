#pragma once

#include "modelsync/types.hpp"

#include <span>
#include <string>
#include <vector>

namespace modelsync {

/// System Usability Scale: ten answers in 1..5, odd items score a-1, even
/// items 5-a, total scaled by 2.5 onto 0..100.
double sus_score(std::span<const int> answers);

/// Raw (unweighted) NASA TLX: mean of six subscales in 0..100.
double tlx_raw(std::span<const double> subscales);

struct TaskResult {
    Millis duration_ms = 0;
    std::size_t syntactic_errors = 0;
};

struct SessionStats {
    double mean_duration_ms = 0.0;
    double median_duration_ms = 0.0;
    double mean_errors = 0.0;
};

/// Throws EmptyInput for no tasks.
SessionStats session_stats(std::span<const TaskResult> tasks);

/// "m:ss", rounded to the nearest second.
std::string format_minutes(double millis);

} // namespace modelsync
