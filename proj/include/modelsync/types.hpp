#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace modelsync {

/// Milliseconds since the session epoch.
using Millis = std::int64_t;

enum class ErrorCode {
    UnknownBoard,
    UnknownElement,
    BoundsTooSmall,
    BoundsOutOfBoard,
    InvalidCardinality,
    InvalidMember,
    EmptyName,
    CloneReadOnly,
    AlreadyInPackage,
    InvalidConfig,
    TooFewPoints,
    PaletteExhausted,
    GapInLog,
    SessionFull,
    NameEmpty,
    NotJoined,
    IoFailure,
    FormatVersionMismatch,
    MalformedMessage,
    ScriptError,
    NonConvergence,
    OutOfRange,
    WrongLength,
    EmptyInput,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// Ids are minted by the document as a letter prefix plus a serial number.
// Ordering is (length, text) so "e9" sorts before "e10".
template <class Tag>
class Id {
public:
    Id() = default;
    explicit Id(std::string value) : value_(std::move(value)) {}

    const std::string& str() const noexcept { return value_; }
    bool empty() const noexcept { return value_.empty(); }

    friend bool operator==(const Id&, const Id&) = default;
    friend std::strong_ordering operator<=>(const Id& a, const Id& b) {
        if (auto c = a.value_.size() <=> b.value_.size(); c != 0) {
            return c;
        }
        return a.value_.compare(b.value_) <=> 0;
    }

private:
    std::string value_;
};

using ElementId = Id<struct ElementTag>;
using WhiteboardId = Id<struct WhiteboardTag>;
using ActorId = Id<struct ActorTag>;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    bool contains(Point p) const noexcept {
        return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h;
    }
    Point center() const noexcept { return {x + w / 2.0, y + h / 2.0}; }
    Rect translated(Point offset) const noexcept {
        return {x + offset.x, y + offset.y, w, h};
    }

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Scene placement of a whiteboard: position in meters plus yaw in radians.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double yaw = 0.0;

    friend bool operator==(const Pose&, const Pose&) = default;
};

struct Rgb {
    int r = 0;
    int g = 0;
    int b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

} // namespace modelsync

template <class Tag>
struct std::hash<modelsync::Id<Tag>> {
    std::size_t operator()(const modelsync::Id<Tag>& id) const noexcept {
        return std::hash<std::string>{}(id.str());
    }
};
