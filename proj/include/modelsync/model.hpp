#pragma once

#include "modelsync/types.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace modelsync {

inline constexpr double kMinClassSize = 20.0;
inline constexpr double kDefaultBoardWidth = 1000.0;
inline constexpr double kDefaultBoardHeight = 750.0;

enum class Visibility { Public, Private, Protected, Package };

char visibility_symbol(Visibility v);
Visibility visibility_from_symbol(char c);

struct MemberField {
    Visibility visibility = Visibility::Public;
    std::string name;
    std::string type_text;

    friend bool operator==(const MemberField&, const MemberField&) = default;
};

struct MethodParam {
    std::string name;
    std::string type_text;

    friend bool operator==(const MethodParam&, const MethodParam&) = default;
};

struct MemberMethod {
    Visibility visibility = Visibility::Public;
    std::string name;
    std::vector<MethodParam> params;
    std::string return_text;

    friend bool operator==(const MemberMethod&, const MemberMethod&) = default;
};

struct Whiteboard {
    WhiteboardId id;
    std::string name;
    Pose pose;
    double width = kDefaultBoardWidth;
    double height = kDefaultBoardHeight;
    std::set<WhiteboardId> links;

    Rect area() const noexcept { return {0.0, 0.0, width, height}; }
};

struct ClassElement {
    ElementId id;
    WhiteboardId whiteboard_id;
    std::string name;
    std::optional<std::string> stereotype;
    std::vector<MemberField> attributes;
    std::vector<MemberMethod> methods;
    Rect bounds;
    // Present iff this is a shallow clone.
    std::optional<ElementId> origin_id;
    // Clones made by the same shallow copy share a group; it decides which
    // counterpart a mirrored relationship attaches to.
    std::optional<ElementId> clone_group;
    std::optional<ActorId> last_editor;
    Millis last_edit_time = 0;
};

enum class RelationshipKind { Association, Inheritance, Aggregation, Composition, Dependency };

std::string_view relationship_kind_name(RelationshipKind kind);
std::optional<RelationshipKind> relationship_kind_from_name(std::string_view name);

/// The cardinality picker vocabulary: "", "1", "0..1", "*", "1..*", "0..*".
bool is_valid_cardinality(std::string_view card);

struct Relationship {
    ElementId id;
    RelationshipKind kind = RelationshipKind::Association;
    ElementId source;
    ElementId target;
    std::string source_card;
    std::string target_card;
    std::string label;
    std::vector<Point> waypoints;
};

/// Everything needed to create a relationship except its id.
struct RelationshipSpec {
    RelationshipKind kind = RelationshipKind::Association;
    ElementId source;
    ElementId target;
    std::string source_card;
    std::string target_card;
    std::string label;
    std::vector<Point> waypoints;
};

struct Package {
    ElementId id;
    std::string name;
    std::set<ElementId> member_ids;
};

struct Stroke {
    ElementId id; // empty until stored in a document
    WhiteboardId board;
    std::vector<Point> points;
    ActorId actor;
    Millis t_start = 0;
    Millis t_end = 0;
};

struct HistoryEntry {
    ElementId element_id;
    ActorId actor;
    Millis timestamp = 0;
    std::string op_kind;

    friend bool operator==(const HistoryEntry&, const HistoryEntry&) = default;
};

namespace change {
struct SetName { std::string name; };
struct SetStereotype { std::optional<std::string> stereotype; };
struct AddAttribute { MemberField field; };
struct RemoveAttribute { std::size_t index = 0; };
struct UpdateAttribute { std::size_t index = 0; MemberField field; };
struct AddMethod { MemberMethod method; };
struct RemoveMethod { std::size_t index = 0; };
struct UpdateMethod { std::size_t index = 0; MemberMethod method; };
struct MoveBounds { Rect bounds; };
} // namespace change

using ClassChange = std::variant<change::SetName, change::SetStereotype, change::AddAttribute,
                                 change::RemoveAttribute, change::UpdateAttribute,
                                 change::AddMethod, change::RemoveMethod, change::UpdateMethod,
                                 change::MoveBounds>;

std::string_view change_name(const ClassChange& c);

/// The set of model entities (classes and relationships) forming one layer.
struct LayerSet {
    std::string name;
    std::set<ElementId> ids;

    friend bool operator==(const LayerSet&, const LayerSet&) = default;
};

LayerSet layer_add(const LayerSet& a, const LayerSet& b);
LayerSet layer_subtract(const LayerSet& a, const LayerSet& b);

/// Class bounds as seen by the recognizer; ordered bottom to top.
struct ClassFootprint {
    ElementId id;
    Rect bounds;
};

using CopyMapping = std::map<ElementId, ElementId>;

/// The replicated design artifact. Single writer: every mutation goes
/// through one serialized path per replica.
class ModelDocument {
public:
    explicit ModelDocument(std::string doc_id = "doc");

    const std::string& doc_id() const noexcept { return doc_id_; }
    std::uint64_t version() const noexcept { return version_; }
    void set_version(std::uint64_t v) noexcept { version_ = v; }
    std::uint64_t next_serial() const noexcept { return next_serial_; }

    const std::map<WhiteboardId, Whiteboard>& whiteboards() const noexcept { return whiteboards_; }
    const std::map<ElementId, ClassElement>& elements() const noexcept { return elements_; }
    const std::map<ElementId, Relationship>& relationships() const noexcept { return relationships_; }
    const std::map<ElementId, Package>& packages() const noexcept { return packages_; }
    const std::map<ElementId, Stroke>& strokes() const noexcept { return strokes_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }

    const Whiteboard* find_board(const WhiteboardId& id) const;
    const ClassElement* find_class(const ElementId& id) const;
    const Relationship* find_relationship(const ElementId& id) const;
    const Package* find_package(const ElementId& id) const;
    bool contains(const ElementId& id) const;

    WhiteboardId add_whiteboard(std::string name, Pose pose, double width, double height);
    void link_whiteboards(const WhiteboardId& a, const WhiteboardId& b);

    ElementId create_class(const WhiteboardId& board, Rect bounds, const ActorId& actor, Millis now);
    const ClassElement& edit_class(const ElementId& id, const ClassChange& change,
                                   const ActorId& actor, Millis now);

    ElementId create_relationship(const RelationshipSpec& spec, const ActorId& actor, Millis now);
    const Relationship& update_relationship(const ElementId& id, RelationshipKind kind,
                                            std::string source_card, std::string target_card,
                                            std::string label, const ActorId& actor, Millis now);

    /// Removes the element and everything that depends on it. Unknown ids
    /// are a no-op and return an empty list.
    std::vector<ElementId> delete_element(const ElementId& id, const ActorId& actor, Millis now);

    ElementId create_package(std::string name, const std::vector<ElementId>& members,
                             const ActorId& actor, Millis now);
    void package_add(const ElementId& package, const ElementId& element);
    void package_remove(const ElementId& package, const ElementId& element);

    ElementId add_stroke(Stroke stroke);

    CopyMapping deep_copy(const std::vector<ElementId>& cluster, const WhiteboardId& target_board,
                          Point offset, const ActorId& actor, Millis now);
    CopyMapping shallow_copy(const std::vector<ElementId>& cluster, const WhiteboardId& target_board,
                             Point offset, const ActorId& actor, Millis now);

    /// Appends a history entry and stamps the element's last editor.
    HistoryEntry record_edit(const ElementId& id, const ActorId& actor, Millis now,
                             std::string op_kind = "edit");

    std::vector<ClassFootprint> class_footprints(const WhiteboardId& board) const;
    LayerSet layer_of_board(const WhiteboardId& board) const;
    /// True when every id refers to a class or relationship.
    bool layer_is_valid(const LayerSet& layer) const;

    /// Walks the whole document and reports every broken invariant.
    std::vector<std::string> integrity_problems() const;

    // Restores raw state; used by the snapshot loader.
    struct Parts {
        std::string doc_id;
        std::uint64_t version = 0;
        std::uint64_t next_serial = 1;
        std::vector<Whiteboard> whiteboards;
        std::vector<ClassElement> elements;
        std::vector<Relationship> relationships;
        std::vector<Package> packages;
        std::vector<Stroke> strokes;
        std::vector<HistoryEntry> history;
    };
    static ModelDocument from_parts(Parts parts);

private:
    ElementId mint_element_id();
    ClassElement& class_ref(const ElementId& id);
    void append_history(const ElementId& id, const ActorId& actor, Millis now, std::string op_kind);
    void touch(ClassElement& c, const ActorId& actor, Millis now, std::string op_kind);
    void check_cardinalities(RelationshipKind kind, std::string_view source_card,
                             std::string_view target_card) const;
    ElementId insert_relationship(const RelationshipSpec& spec, const ActorId& actor, Millis now);
    void mirror_relationship(const Relationship& rel, const ActorId& actor, Millis now);
    std::vector<ClassElement*> clones_of(const ElementId& origin);
    std::vector<const ClassElement*> resolve_cluster(const std::vector<ElementId>& cluster) const;

    std::string doc_id_;
    std::uint64_t version_ = 0;
    std::uint64_t next_serial_ = 1;
    std::map<WhiteboardId, Whiteboard> whiteboards_;
    std::map<ElementId, ClassElement> elements_;
    std::map<ElementId, Relationship> relationships_;
    std::map<ElementId, Package> packages_;
    std::map<ElementId, Stroke> strokes_;
    std::vector<HistoryEntry> history_;
    std::map<ActorId, Millis> last_stamp_;
};

} // namespace modelsync
