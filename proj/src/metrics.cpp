#include "modelsync/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace modelsync {

double sus_score(std::span<const int> answers) {
    if (answers.size() != 10) {
        throw Error(ErrorCode::WrongLength,
                    "SUS needs 10 answers, got " + std::to_string(answers.size()));
    }
    int sum = 0;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const int a = answers[i];
        if (a < 1 || a > 5) {
            throw Error(ErrorCode::OutOfRange, "SUS answers are 1..5");
        }
        // Item numbers are 1-based: index 0 is item 1 (odd).
        sum += (i % 2 == 0) ? a - 1 : 5 - a;
    }
    return sum * 2.5;
}

double tlx_raw(std::span<const double> subscales) {
    if (subscales.size() != 6) {
        throw Error(ErrorCode::WrongLength,
                    "raw TLX needs 6 subscales, got " + std::to_string(subscales.size()));
    }
    for (double v : subscales) {
        if (!(v >= 0.0 && v <= 100.0)) {
            throw Error(ErrorCode::OutOfRange, "TLX subscales are 0..100");
        }
    }
    return std::accumulate(subscales.begin(), subscales.end(), 0.0) / 6.0;
}

SessionStats session_stats(std::span<const TaskResult> tasks) {
    if (tasks.empty()) {
        throw Error(ErrorCode::EmptyInput, "no task results");
    }
    std::vector<double> durations;
    double errors = 0.0;
    for (const auto& t : tasks) {
        durations.push_back(static_cast<double>(t.duration_ms));
        errors += static_cast<double>(t.syntactic_errors);
    }
    std::sort(durations.begin(), durations.end());
    const auto n = durations.size();
    SessionStats s;
    s.mean_duration_ms = std::accumulate(durations.begin(), durations.end(), 0.0) / n;
    s.median_duration_ms = n % 2 == 1 ? durations[n / 2]
                                      : (durations[n / 2 - 1] + durations[n / 2]) / 2.0;
    s.mean_errors = errors / n;
    return s;
}

std::string format_minutes(double millis) {
    const auto total = static_cast<long long>(std::llround(millis / 1000.0));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%lld:%02lld", total / 60, total % 60);
    return buf;
}

} // namespace modelsync
