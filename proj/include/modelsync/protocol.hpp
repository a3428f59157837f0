#pragma once

#include "modelsync/model.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace modelsync {

inline constexpr int kProtocolVersion = 1;

enum class Activity { Looking, Drawing, Erasing, Pointing, Speaking, Idle };

std::string_view activity_name(Activity a);
std::optional<Activity> activity_from_name(std::string_view name);

/// Awareness snapshot of one collaborator. Never enters the op log.
struct PresenceState {
    ActorId actor;
    WhiteboardId board;
    Point cursor;
    std::array<double, 3> scene_pos{0.0, 0.0, 0.0};
    std::optional<ElementId> gaze;
    Activity activity = Activity::Idle;
    Millis updated_at = 0;

    friend bool operator==(const PresenceState&, const PresenceState&) = default;
};

// Wire messages: one JSON object per line (or WebSocket text frame).
namespace wire {

nlohmann::json hello(std::string_view session, std::string_view name,
                     const std::optional<ActorId>& resume = std::nullopt);
nlohmann::json welcome(const ActorId& actor, Rgb color, std::uint64_t seq, nlohmann::json model,
                       nlohmann::json peers);
nlohmann::json ack(std::uint64_t client_seq, std::uint64_t seq);
nlohmann::json err(std::string_view code, std::string_view msg);
nlohmann::json bye(const ActorId& actor);
nlohmann::json joined(const ActorId& actor, std::string_view name, Rgb color);
nlohmann::json presence(const PresenceState& p);
PresenceState presence_from(const nlohmann::json& j);

nlohmann::json color(Rgb c);
Rgb color_from(const nlohmann::json& j);

/// Serializes without trailing whitespace.
std::string line(const nlohmann::json& j);

} // namespace wire

} // namespace modelsync
