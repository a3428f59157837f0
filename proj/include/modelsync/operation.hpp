#pragma once

#include "modelsync/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace modelsync {

namespace body {
struct AddWhiteboard {
    std::string name;
    Pose pose;
    double width = kDefaultBoardWidth;
    double height = kDefaultBoardHeight;
};
struct LinkWhiteboards {
    WhiteboardId a;
    WhiteboardId b;
};
struct CreateClass {
    WhiteboardId board;
    Rect bounds;
};
struct EditClass {
    ElementId id;
    ClassChange change;
};
struct CreateRelationship {
    RelationshipSpec spec;
};
struct UpdateRelationship {
    ElementId id;
    RelationshipKind kind = RelationshipKind::Association;
    std::string source_card;
    std::string target_card;
    std::string label;
};
struct DeleteElement {
    ElementId id;
};
struct CopyCluster {
    bool shallow = false;
    std::vector<ElementId> cluster;
    WhiteboardId board;
    Point offset;
};
struct CreatePackage {
    std::string name;
    std::vector<ElementId> members;
};
struct PackageMember {
    ElementId package;
    ElementId element;
    bool add = true;
};
struct AddStroke {
    WhiteboardId board;
    std::vector<Point> points;
    Millis t_start = 0;
};
struct RecordEdit {
    ElementId element;
    std::string op_kind;
};
} // namespace body

using OpBody = std::variant<body::AddWhiteboard, body::LinkWhiteboards, body::CreateClass,
                            body::EditClass, body::CreateRelationship, body::UpdateRelationship,
                            body::DeleteElement, body::CopyCluster, body::CreatePackage,
                            body::PackageMember, body::AddStroke, body::RecordEdit>;

std::string_view body_kind(const OpBody& body);

/// One edit, the unit of replication and persistence. `seq` is assigned by
/// the sequencer and never changes afterwards.
struct Operation {
    std::optional<std::uint64_t> seq;
    ActorId actor;
    std::uint64_t client_seq = 0;
    OpBody body;
    Millis issued_at = 0;
};

/// Outcome of applying one body to a document.
struct ApplyOutcome {
    bool ok = true;
    std::vector<ElementId> created;   // ids minted by the body, in mint order
    std::vector<ElementId> removed;
    std::optional<ErrorCode> error;
    std::string diagnostic;
};

/// Applies the body. Model errors are caught and reported as a failed
/// outcome; the document is left as it was.
ApplyOutcome apply_body(ModelDocument& doc, const OpBody& body, const ActorId& actor, Millis now);

// JSON forms. Bodies are tagged with "kind".
nlohmann::json body_to_json(const OpBody& body);
OpBody body_from_json(const nlohmann::json& j);

/// {"t":"op","seq":N,"actor":..,"cseq":M,"body":{..},"ts":T}; seq omitted when absent.
nlohmann::json op_to_json(const Operation& op);
Operation op_from_json(const nlohmann::json& j);

nlohmann::json change_to_json(const ClassChange& change);
ClassChange change_from_json(const nlohmann::json& j);

} // namespace modelsync
