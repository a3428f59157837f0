#include "modelsync/protocol.hpp"

#include "json_util.hpp"

#include <utility>

namespace modelsync {

using nlohmann::json;
namespace jio = jsonio;

namespace {
constexpr std::pair<Activity, std::string_view> kActivities[] = {
    {Activity::Looking, "looking"},   {Activity::Drawing, "drawing"},
    {Activity::Erasing, "erasing"},   {Activity::Pointing, "pointing"},
    {Activity::Speaking, "speaking"}, {Activity::Idle, "idle"},
};
} // namespace

std::string_view activity_name(Activity a) {
    for (const auto& [act, name] : kActivities) {
        if (act == a) {
            return name;
        }
    }
    return "idle";
}

std::optional<Activity> activity_from_name(std::string_view name) {
    for (const auto& [act, n] : kActivities) {
        if (n == name) {
            return act;
        }
    }
    return std::nullopt;
}

namespace wire {

json color(Rgb c) { return json::array({c.r, c.g, c.b}); }

Rgb color_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw Error(ErrorCode::MalformedMessage, "color must be [r,g,b]");
    }
    return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

json hello(std::string_view session, std::string_view name, const std::optional<ActorId>& resume) {
    json j{{"t", "hello"}, {"session", session}, {"name", name}, {"proto", kProtocolVersion}};
    if (resume) {
        j["actor"] = resume->str();
    }
    return j;
}

json welcome(const ActorId& actor, Rgb c, std::uint64_t seq, json model, json peers) {
    return json{{"t", "welcome"}, {"actor", actor.str()},    {"color", color(c)},
                {"seq", seq},     {"model", std::move(model)}, {"peers", std::move(peers)}};
}

json ack(std::uint64_t client_seq, std::uint64_t seq) {
    return json{{"t", "ack"}, {"cseq", client_seq}, {"seq", seq}};
}

json err(std::string_view code, std::string_view msg) {
    return json{{"t", "err"}, {"code", code}, {"msg", msg}};
}

json bye(const ActorId& actor) { return json{{"t", "bye"}, {"actor", actor.str()}}; }

json joined(const ActorId& actor, std::string_view name, Rgb c) {
    return json{{"t", "join"}, {"actor", actor.str()}, {"name", name}, {"color", color(c)}};
}

json presence(const PresenceState& p) {
    return json{{"t", "presence"},
                {"actor", p.actor.str()},
                {"board", p.board.str()},
                {"cursor", jio::point(p.cursor)},
                {"pos", json::array({p.scene_pos[0], p.scene_pos[1], p.scene_pos[2]})},
                {"gaze", jio::id_or_null(p.gaze)},
                {"act", std::string(activity_name(p.activity))},
                {"ts", p.updated_at}};
}

PresenceState presence_from(const json& j) {
    PresenceState p;
    p.actor = ActorId(jio::get_or<std::string>(j, "actor", ""));
    p.board = jio::id<WhiteboardId>(j, "board");
    p.cursor = jio::point(jio::field(j, "cursor"));
    const auto& pos = jio::field(j, "pos");
    if (!pos.is_array() || pos.size() != 3) {
        throw Error(ErrorCode::MalformedMessage, "pos must be [x,y,z]");
    }
    p.scene_pos = {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
    p.gaze = jio::optional_id<ElementId>(j, "gaze");
    const auto act = jio::get<std::string>(j, "act");
    auto a = activity_from_name(act);
    if (!a) {
        throw Error(ErrorCode::MalformedMessage, "unknown activity '" + act + "'");
    }
    p.activity = *a;
    p.updated_at = jio::get_or<Millis>(j, "ts", 0);
    return p;
}

std::string line(const json& j) { return j.dump(-1, ' ', false, json::error_handler_t::replace); }

} // namespace wire

} // namespace modelsync
