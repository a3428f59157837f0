#pragma once

// Shared JSON shapes for geometry and class members.

#include "modelsync/model.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>

namespace modelsync::jsonio {

using nlohmann::json;

inline const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw Error(ErrorCode::MalformedMessage, std::string("missing field '") + key + "'");
    }
    return *it;
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, std::string("bad field '") + key + "': " + e.what());
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return fallback;
    }
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedMessage, std::string("bad field '") + key + "': " + e.what());
    }
}

template <class IdT>
IdT id(const json& j, const char* key) {
    return IdT(get<std::string>(j, key));
}

template <class IdT>
std::optional<IdT> optional_id(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
        return std::nullopt;
    }
    return IdT(it->get<std::string>());
}

template <class IdT>
json id_or_null(const std::optional<IdT>& v) {
    return v ? json(v->str()) : json(nullptr);
}

inline json point(Point p) { return json::array({p.x, p.y}); }

inline Point point(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw Error(ErrorCode::MalformedMessage, "point must be [x,y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json points(const std::vector<Point>& ps) {
    json out = json::array();
    for (const auto& p : ps) {
        out.push_back(point(p));
    }
    return out;
}

inline std::vector<Point> points(const json& j) {
    std::vector<Point> out;
    for (const auto& p : j) {
        out.push_back(point(p));
    }
    return out;
}

inline json rect(Rect r) { return json::array({r.x, r.y, r.w, r.h}); }

inline Rect rect(const json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw Error(ErrorCode::MalformedMessage, "rect must be [x,y,w,h]");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json pose(Pose p) {
    return json{{"pos", json::array({p.x, p.y, p.z})}, {"yaw", p.yaw}};
}

inline Pose pose(const json& j) {
    const auto& pos = field(j, "pos");
    if (!pos.is_array() || pos.size() != 3) {
        throw Error(ErrorCode::MalformedMessage, "pose.pos must be [x,y,z]");
    }
    return {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>(), get<double>(j, "yaw")};
}

inline Visibility visibility(const json& j) {
    auto s = get<std::string>(j, "vis");
    if (s.size() != 1) {
        throw Error(ErrorCode::InvalidMember, "visibility must be one of + - # ~");
    }
    return visibility_from_symbol(s[0]);
}

inline json member(const MemberField& f) {
    return json{{"vis", std::string(1, visibility_symbol(f.visibility))},
                {"name", f.name},
                {"type", f.type_text}};
}

inline MemberField member_field(const json& j) {
    return {visibility(j), get<std::string>(j, "name"), get_or<std::string>(j, "type", "")};
}

inline json member(const MemberMethod& m) {
    json params = json::array();
    for (const auto& p : m.params) {
        params.push_back(json{{"name", p.name}, {"type", p.type_text}});
    }
    return json{{"vis", std::string(1, visibility_symbol(m.visibility))},
                {"name", m.name},
                {"params", params},
                {"return", m.return_text}};
}

inline MemberMethod member_method(const json& j) {
    MemberMethod m{visibility(j), get<std::string>(j, "name"), {},
                   get_or<std::string>(j, "return", "")};
    if (auto it = j.find("params"); it != j.end()) {
        for (const auto& p : *it) {
            m.params.push_back({get<std::string>(p, "name"), get_or<std::string>(p, "type", "")});
        }
    }
    return m;
}

inline RelationshipKind kind(const json& j, const char* key) {
    auto name = get<std::string>(j, key);
    auto k = relationship_kind_from_name(name);
    if (!k) {
        throw Error(ErrorCode::MalformedMessage, "unknown relationship kind '" + name + "'");
    }
    return *k;
}

} // namespace modelsync::jsonio
