#include "modelsync/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace modelsync {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::UnknownBoard: return "UnknownBoard";
    case ErrorCode::UnknownElement: return "UnknownElement";
    case ErrorCode::BoundsTooSmall: return "BoundsTooSmall";
    case ErrorCode::BoundsOutOfBoard: return "BoundsOutOfBoard";
    case ErrorCode::InvalidCardinality: return "InvalidCardinality";
    case ErrorCode::InvalidMember: return "InvalidMember";
    case ErrorCode::EmptyName: return "EmptyName";
    case ErrorCode::CloneReadOnly: return "CloneReadOnly";
    case ErrorCode::AlreadyInPackage: return "AlreadyInPackage";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::PaletteExhausted: return "PaletteExhausted";
    case ErrorCode::GapInLog: return "GapInLog";
    case ErrorCode::SessionFull: return "SessionFull";
    case ErrorCode::NameEmpty: return "NameEmpty";
    case ErrorCode::NotJoined: return "NotJoined";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::MalformedMessage: return "MalformedMessage";
    case ErrorCode::ScriptError: return "ScriptError";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::WrongLength: return "WrongLength";
    case ErrorCode::EmptyInput: return "EmptyInput";
    }
    return "Unknown";
}

double distance(Point a, Point b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

char visibility_symbol(Visibility v) {
    switch (v) {
    case Visibility::Public: return '+';
    case Visibility::Private: return '-';
    case Visibility::Protected: return '#';
    case Visibility::Package: return '~';
    }
    return '+';
}

Visibility visibility_from_symbol(char c) {
    switch (c) {
    case '+': return Visibility::Public;
    case '-': return Visibility::Private;
    case '#': return Visibility::Protected;
    case '~': return Visibility::Package;
    default: throw Error(ErrorCode::InvalidMember, std::string("bad visibility '") + c + "'");
    }
}

namespace {

constexpr std::array<std::pair<RelationshipKind, std::string_view>, 5> kKindNames{{
    {RelationshipKind::Association, "association"},
    {RelationshipKind::Inheritance, "inheritance"},
    {RelationshipKind::Aggregation, "aggregation"},
    {RelationshipKind::Composition, "composition"},
    {RelationshipKind::Dependency, "dependency"},
}};

constexpr std::array<std::string_view, 6> kCardinalities{"", "1", "0..1", "*", "1..*", "0..*"};

struct ChangeNamer {
    std::string_view operator()(const change::SetName&) const { return "set_name"; }
    std::string_view operator()(const change::SetStereotype&) const { return "set_stereotype"; }
    std::string_view operator()(const change::AddAttribute&) const { return "add_attribute"; }
    std::string_view operator()(const change::RemoveAttribute&) const { return "remove_attribute"; }
    std::string_view operator()(const change::UpdateAttribute&) const { return "update_attribute"; }
    std::string_view operator()(const change::AddMethod&) const { return "add_method"; }
    std::string_view operator()(const change::RemoveMethod&) const { return "remove_method"; }
    std::string_view operator()(const change::UpdateMethod&) const { return "update_method"; }
    std::string_view operator()(const change::MoveBounds&) const { return "move_bounds"; }
};

void require_member_name(const std::string& name) {
    if (name.empty()) {
        throw Error(ErrorCode::InvalidMember, "member name must not be empty");
    }
}

void require_index(std::size_t index, std::size_t size) {
    if (index >= size) {
        throw Error(ErrorCode::InvalidMember,
                    "member index " + std::to_string(index) + " out of range");
    }
}

void require_method(const MemberMethod& m) {
    require_member_name(m.name);
    for (const auto& p : m.params) {
        require_member_name(p.name);
    }
}

void check_bounds(const Whiteboard& board, Rect bounds) {
    if (!(bounds.w >= kMinClassSize && bounds.h >= kMinClassSize)) {
        throw Error(ErrorCode::BoundsTooSmall, "class bounds below 20x20");
    }
    if (bounds.x < 0.0 || bounds.y < 0.0 || bounds.x + bounds.w > board.width ||
        bounds.y + bounds.h > board.height) {
        throw Error(ErrorCode::BoundsOutOfBoard, "class bounds leave board " + board.id.str());
    }
}

// Validation happens before any mutation so a mirrored change never applies
// to only part of the clone family.
void validate_change(const ClassElement& c, const ClassChange& change) {
    std::visit(
        [&](const auto& ch) {
            using T = std::decay_t<decltype(ch)>;
            if constexpr (std::is_same_v<T, change::SetName>) {
                if (ch.name.empty()) {
                    throw Error(ErrorCode::EmptyName, "class name must not be empty");
                }
            } else if constexpr (std::is_same_v<T, change::AddAttribute>) {
                require_member_name(ch.field.name);
            } else if constexpr (std::is_same_v<T, change::RemoveAttribute>) {
                require_index(ch.index, c.attributes.size());
            } else if constexpr (std::is_same_v<T, change::UpdateAttribute>) {
                require_index(ch.index, c.attributes.size());
                require_member_name(ch.field.name);
            } else if constexpr (std::is_same_v<T, change::AddMethod>) {
                require_method(ch.method);
            } else if constexpr (std::is_same_v<T, change::RemoveMethod>) {
                require_index(ch.index, c.methods.size());
            } else if constexpr (std::is_same_v<T, change::UpdateMethod>) {
                require_index(ch.index, c.methods.size());
                require_method(ch.method);
            }
        },
        change);
}

void apply_change(ClassElement& c, const ClassChange& change) {
    std::visit(
        [&](const auto& ch) {
            using T = std::decay_t<decltype(ch)>;
            if constexpr (std::is_same_v<T, change::SetName>) {
                c.name = ch.name;
            } else if constexpr (std::is_same_v<T, change::SetStereotype>) {
                c.stereotype = ch.stereotype;
            } else if constexpr (std::is_same_v<T, change::AddAttribute>) {
                c.attributes.push_back(ch.field);
            } else if constexpr (std::is_same_v<T, change::RemoveAttribute>) {
                c.attributes.erase(c.attributes.begin() + static_cast<std::ptrdiff_t>(ch.index));
            } else if constexpr (std::is_same_v<T, change::UpdateAttribute>) {
                c.attributes[ch.index] = ch.field;
            } else if constexpr (std::is_same_v<T, change::AddMethod>) {
                c.methods.push_back(ch.method);
            } else if constexpr (std::is_same_v<T, change::RemoveMethod>) {
                c.methods.erase(c.methods.begin() + static_cast<std::ptrdiff_t>(ch.index));
            } else if constexpr (std::is_same_v<T, change::UpdateMethod>) {
                c.methods[ch.index] = ch.method;
            } else if constexpr (std::is_same_v<T, change::MoveBounds>) {
                c.bounds = ch.bounds;
            }
        },
        change);
}

std::vector<Point> translate_all(const std::vector<Point>& points, Point offset) {
    std::vector<Point> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        out.push_back({p.x + offset.x, p.y + offset.y});
    }
    return out;
}

} // namespace

std::string_view relationship_kind_name(RelationshipKind kind) {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "association";
}

std::optional<RelationshipKind> relationship_kind_from_name(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) {
            return k;
        }
    }
    return std::nullopt;
}

bool is_valid_cardinality(std::string_view card) {
    return std::find(kCardinalities.begin(), kCardinalities.end(), card) != kCardinalities.end();
}

std::string_view change_name(const ClassChange& c) {
    return std::visit(ChangeNamer{}, c);
}

LayerSet layer_add(const LayerSet& a, const LayerSet& b) {
    LayerSet out{a.name + "+" + b.name, a.ids};
    out.ids.insert(b.ids.begin(), b.ids.end());
    return out;
}

LayerSet layer_subtract(const LayerSet& a, const LayerSet& b) {
    LayerSet out{a.name + "-" + b.name, {}};
    std::set_difference(a.ids.begin(), a.ids.end(), b.ids.begin(), b.ids.end(),
                        std::inserter(out.ids, out.ids.end()));
    return out;
}

ModelDocument::ModelDocument(std::string doc_id) : doc_id_(std::move(doc_id)) {}

ElementId ModelDocument::mint_element_id() {
    return ElementId("e" + std::to_string(next_serial_++));
}

const Whiteboard* ModelDocument::find_board(const WhiteboardId& id) const {
    auto it = whiteboards_.find(id);
    return it == whiteboards_.end() ? nullptr : &it->second;
}

const ClassElement* ModelDocument::find_class(const ElementId& id) const {
    auto it = elements_.find(id);
    return it == elements_.end() ? nullptr : &it->second;
}

const Relationship* ModelDocument::find_relationship(const ElementId& id) const {
    auto it = relationships_.find(id);
    return it == relationships_.end() ? nullptr : &it->second;
}

const Package* ModelDocument::find_package(const ElementId& id) const {
    auto it = packages_.find(id);
    return it == packages_.end() ? nullptr : &it->second;
}

bool ModelDocument::contains(const ElementId& id) const {
    return elements_.count(id) || relationships_.count(id) || packages_.count(id) ||
           strokes_.count(id);
}

ClassElement& ModelDocument::class_ref(const ElementId& id) {
    auto it = elements_.find(id);
    if (it == elements_.end()) {
        throw Error(ErrorCode::UnknownElement, "no class " + id.str());
    }
    return it->second;
}

void ModelDocument::append_history(const ElementId& id, const ActorId& actor, Millis now,
                                   std::string op_kind) {
    // Per-actor timestamps never go backwards.
    auto& last = last_stamp_[actor];
    const Millis stamp = std::max(now, last);
    last = stamp;
    history_.push_back({id, actor, stamp, std::move(op_kind)});
}

void ModelDocument::touch(ClassElement& c, const ActorId& actor, Millis now, std::string op_kind) {
    append_history(c.id, actor, now, std::move(op_kind));
    c.last_editor = actor;
    c.last_edit_time = history_.back().timestamp;
}

WhiteboardId ModelDocument::add_whiteboard(std::string name, Pose pose, double width, double height) {
    if (!(width > 0.0 && height > 0.0)) {
        throw Error(ErrorCode::BoundsTooSmall, "whiteboard size must be positive");
    }
    Whiteboard board;
    board.id = WhiteboardId("b" + std::to_string(next_serial_++));
    board.name = std::move(name);
    board.pose = pose;
    board.width = width;
    board.height = height;
    auto id = board.id;
    whiteboards_.emplace(id, std::move(board));
    return id;
}

void ModelDocument::link_whiteboards(const WhiteboardId& a, const WhiteboardId& b) {
    auto ia = whiteboards_.find(a);
    auto ib = whiteboards_.find(b);
    if (ia == whiteboards_.end() || ib == whiteboards_.end()) {
        throw Error(ErrorCode::UnknownBoard, "cannot link unknown whiteboard");
    }
    if (a == b) {
        return;
    }
    ia->second.links.insert(b);
    ib->second.links.insert(a);
}

ElementId ModelDocument::create_class(const WhiteboardId& board, Rect bounds, const ActorId& actor,
                                      Millis now) {
    const Whiteboard* wb = find_board(board);
    if (wb == nullptr) {
        throw Error(ErrorCode::UnknownBoard, "no whiteboard " + board.str());
    }
    check_bounds(*wb, bounds);
    ClassElement c;
    c.id = mint_element_id();
    c.whiteboard_id = board;
    c.bounds = bounds;
    auto id = c.id;
    touch(elements_.emplace(id, std::move(c)).first->second, actor, now, "create_class");
    return id;
}

std::vector<ClassElement*> ModelDocument::clones_of(const ElementId& origin) {
    std::vector<ClassElement*> out;
    for (auto& [id, c] : elements_) {
        if (c.origin_id && *c.origin_id == origin) {
            out.push_back(&c);
        }
    }
    return out;
}

const ClassElement& ModelDocument::edit_class(const ElementId& id, const ClassChange& change,
                                              const ActorId& actor, Millis now) {
    ClassElement& c = class_ref(id);
    const bool is_move = std::holds_alternative<change::MoveBounds>(change);
    if (is_move) {
        const auto& mb = std::get<change::MoveBounds>(change);
        check_bounds(whiteboards_.at(c.whiteboard_id), mb.bounds);
    } else if (c.origin_id) {
        throw Error(ErrorCode::CloneReadOnly,
                    "class " + id.str() + " mirrors " + c.origin_id->str());
    }
    validate_change(c, change);

    const std::string kind(change_name(change));
    apply_change(c, change);
    touch(c, actor, now, kind);
    if (!is_move) {
        for (ClassElement* clone : clones_of(id)) {
            apply_change(*clone, change);
            touch(*clone, actor, now, "mirror:" + kind);
        }
    }
    return c;
}

void ModelDocument::check_cardinalities(RelationshipKind kind, std::string_view source_card,
                                        std::string_view target_card) const {
    if (!is_valid_cardinality(source_card) || !is_valid_cardinality(target_card)) {
        throw Error(ErrorCode::InvalidCardinality, "cardinality outside the picker vocabulary");
    }
    if (kind == RelationshipKind::Inheritance && (!source_card.empty() || !target_card.empty())) {
        throw Error(ErrorCode::InvalidCardinality, "inheritance carries no cardinalities");
    }
}

ElementId ModelDocument::insert_relationship(const RelationshipSpec& spec, const ActorId& actor,
                                             Millis now) {
    Relationship r;
    r.id = mint_element_id();
    r.kind = spec.kind;
    r.source = spec.source;
    r.target = spec.target;
    r.source_card = spec.source_card;
    r.target_card = spec.target_card;
    r.label = spec.label;
    r.waypoints = spec.waypoints;
    auto id = r.id;
    relationships_.emplace(id, std::move(r));
    append_history(id, actor, now, "create_relationship");
    touch(class_ref(spec.source), actor, now, "relate");
    if (spec.target != spec.source) {
        touch(class_ref(spec.target), actor, now, "relate");
    }
    return id;
}

ElementId ModelDocument::create_relationship(const RelationshipSpec& spec, const ActorId& actor,
                                             Millis now) {
    if (!find_class(spec.source) || !find_class(spec.target)) {
        throw Error(ErrorCode::UnknownElement,
                    "relationship endpoint missing: " + spec.source.str() + " -> " + spec.target.str());
    }
    check_cardinalities(spec.kind, spec.source_card, spec.target_card);
    auto id = insert_relationship(spec, actor, now);
    mirror_relationship(relationships_.at(id), actor, now);
    return id;
}

// One mirrored copy per clone group touching either endpoint. Inside a group
// the endpoint resolves to the group's clone, otherwise to the original.
void ModelDocument::mirror_relationship(const Relationship& rel, const ActorId& actor, Millis now) {
    std::map<ElementId, std::pair<std::optional<ElementId>, std::optional<ElementId>>> groups;
    for (const auto& [id, c] : elements_) {
        if (!c.origin_id || !c.clone_group) {
            continue;
        }
        if (*c.origin_id == rel.source) {
            groups[*c.clone_group].first = id;
        }
        if (*c.origin_id == rel.target) {
            groups[*c.clone_group].second = id;
        }
    }
    const Relationship copy = rel;
    for (const auto& [group, ends] : groups) {
        RelationshipSpec spec{copy.kind,        ends.first.value_or(copy.source),
                              ends.second.value_or(copy.target), copy.source_card,
                              copy.target_card, copy.label,
                              copy.waypoints};
        insert_relationship(spec, actor, now);
    }
}

const Relationship& ModelDocument::update_relationship(const ElementId& id, RelationshipKind kind,
                                                       std::string source_card,
                                                       std::string target_card, std::string label,
                                                       const ActorId& actor, Millis now) {
    auto it = relationships_.find(id);
    if (it == relationships_.end()) {
        throw Error(ErrorCode::UnknownElement, "no relationship " + id.str());
    }
    check_cardinalities(kind, source_card, target_card);
    Relationship& r = it->second;
    r.kind = kind;
    r.source_card = std::move(source_card);
    r.target_card = std::move(target_card);
    r.label = std::move(label);
    append_history(id, actor, now, "update_relationship");
    return r;
}

std::vector<ElementId> ModelDocument::delete_element(const ElementId& id, const ActorId& actor,
                                                     Millis now) {
    std::vector<ElementId> removed;
    if (auto it = elements_.find(id); it != elements_.end()) {
        removed.push_back(id);
        for (auto rit = relationships_.begin(); rit != relationships_.end();) {
            if (rit->second.source == id || rit->second.target == id) {
                removed.push_back(rit->first);
                rit = relationships_.erase(rit);
            } else {
                ++rit;
            }
        }
        for (auto& [pid, pkg] : packages_) {
            pkg.member_ids.erase(id);
        }
        for (ClassElement* clone : clones_of(id)) {
            clone->origin_id.reset();
            clone->clone_group.reset();
        }
        elements_.erase(it);
    } else if (relationships_.erase(id) || packages_.erase(id) || strokes_.erase(id)) {
        removed.push_back(id);
    } else {
        return removed;
    }
    append_history(id, actor, now, "delete");
    return removed;
}

ElementId ModelDocument::create_package(std::string name, const std::vector<ElementId>& members,
                                        const ActorId& actor, Millis now) {
    if (name.empty()) {
        throw Error(ErrorCode::EmptyName, "package name must not be empty");
    }
    std::set<ElementId> ids(members.begin(), members.end());
    for (const auto& m : ids) {
        if (!find_class(m)) {
            throw Error(ErrorCode::UnknownElement, "no class " + m.str());
        }
        for (const auto& [pid, pkg] : packages_) {
            if (pkg.member_ids.count(m)) {
                throw Error(ErrorCode::AlreadyInPackage, m.str() + " already in " + pid.str());
            }
        }
    }
    Package p{mint_element_id(), std::move(name), std::move(ids)};
    auto id = p.id;
    packages_.emplace(id, std::move(p));
    append_history(id, actor, now, "create_package");
    return id;
}

void ModelDocument::package_add(const ElementId& package, const ElementId& element) {
    auto it = packages_.find(package);
    if (it == packages_.end() || !find_class(element)) {
        throw Error(ErrorCode::UnknownElement, "unknown package or class");
    }
    for (const auto& [pid, pkg] : packages_) {
        if (pid != package && pkg.member_ids.count(element)) {
            throw Error(ErrorCode::AlreadyInPackage, element.str() + " already in " + pid.str());
        }
    }
    it->second.member_ids.insert(element);
}

void ModelDocument::package_remove(const ElementId& package, const ElementId& element) {
    auto it = packages_.find(package);
    if (it == packages_.end()) {
        throw Error(ErrorCode::UnknownElement, "no package " + package.str());
    }
    it->second.member_ids.erase(element);
}

ElementId ModelDocument::add_stroke(Stroke stroke) {
    const Whiteboard* wb = find_board(stroke.board);
    if (wb == nullptr) {
        throw Error(ErrorCode::UnknownBoard, "no whiteboard " + stroke.board.str());
    }
    if (stroke.points.size() < 2) {
        throw Error(ErrorCode::TooFewPoints, "a stroke needs at least two points");
    }
    for (const auto& p : stroke.points) {
        if (!wb->area().contains(p)) {
            throw Error(ErrorCode::BoundsOutOfBoard, "stroke point outside board");
        }
    }
    stroke.id = mint_element_id();
    auto id = stroke.id;
    const auto actor = stroke.actor;
    const auto when = stroke.t_end;
    strokes_.emplace(id, std::move(stroke));
    append_history(id, actor, when, "sketch");
    return id;
}

std::vector<const ClassElement*>
ModelDocument::resolve_cluster(const std::vector<ElementId>& cluster) const {
    std::set<ElementId> ids(cluster.begin(), cluster.end());
    std::vector<const ClassElement*> out;
    for (const auto& id : ids) {
        const ClassElement* c = find_class(id);
        if (c == nullptr) {
            throw Error(ErrorCode::UnknownElement, "cluster member " + id.str() + " is not a class");
        }
        out.push_back(c);
    }
    return out;
}

CopyMapping ModelDocument::deep_copy(const std::vector<ElementId>& cluster,
                                     const WhiteboardId& target_board, Point offset,
                                     const ActorId& actor, Millis now) {
    if (!find_board(target_board)) {
        throw Error(ErrorCode::UnknownBoard, "no whiteboard " + target_board.str());
    }
    auto sources = resolve_cluster(cluster);
    CopyMapping mapping;
    std::vector<ClassElement> copies;
    for (const ClassElement* src : sources) {
        ClassElement c = *src;
        c.id = mint_element_id();
        c.whiteboard_id = target_board;
        c.bounds = src->bounds.translated(offset);
        c.origin_id.reset();
        c.clone_group.reset();
        mapping.emplace(src->id, c.id);
        copies.push_back(std::move(c));
    }
    for (auto& c : copies) {
        auto id = c.id;
        touch(elements_.emplace(id, std::move(c)).first->second, actor, now, "deep_copy");
    }
    std::vector<std::pair<ElementId, RelationshipSpec>> internal;
    for (const auto& [rid, r] : relationships_) {
        auto s = mapping.find(r.source);
        auto t = mapping.find(r.target);
        if (s != mapping.end() && t != mapping.end()) {
            internal.push_back({rid,
                                {r.kind, s->second, t->second, r.source_card, r.target_card,
                                 r.label, translate_all(r.waypoints, offset)}});
        }
    }
    for (const auto& [rid, spec] : internal) {
        mapping.emplace(rid, insert_relationship(spec, actor, now));
    }
    return mapping;
}

CopyMapping ModelDocument::shallow_copy(const std::vector<ElementId>& cluster,
                                        const WhiteboardId& target_board, Point offset,
                                        const ActorId& actor, Millis now) {
    if (!find_board(target_board)) {
        throw Error(ErrorCode::UnknownBoard, "no whiteboard " + target_board.str());
    }
    auto sources = resolve_cluster(cluster);
    CopyMapping mapping;
    std::vector<ClassElement> copies;
    std::optional<ElementId> group;
    for (const ClassElement* src : sources) {
        ClassElement c = *src;
        c.id = mint_element_id();
        if (!group) {
            group = c.id;
        }
        c.whiteboard_id = target_board;
        c.bounds = src->bounds.translated(offset);
        // Copying a clone links to the clone's own origin; mirroring is one hop.
        c.origin_id = src->origin_id.value_or(src->id);
        c.clone_group = group;
        mapping.emplace(src->id, c.id);
        copies.push_back(std::move(c));
    }
    for (auto& c : copies) {
        auto id = c.id;
        touch(elements_.emplace(id, std::move(c)).first->second, actor, now, "shallow_copy");
    }
    std::vector<std::pair<ElementId, RelationshipSpec>> rewired;
    for (const auto& [rid, r] : relationships_) {
        auto s = mapping.find(r.source);
        auto t = mapping.find(r.target);
        if (s == mapping.end() && t == mapping.end()) {
            continue;
        }
        rewired.push_back({rid,
                           {r.kind, s != mapping.end() ? s->second : r.source,
                            t != mapping.end() ? t->second : r.target, r.source_card,
                            r.target_card, r.label, translate_all(r.waypoints, offset)}});
    }
    for (const auto& [rid, spec] : rewired) {
        mapping.emplace(rid, insert_relationship(spec, actor, now));
    }
    return mapping;
}

HistoryEntry ModelDocument::record_edit(const ElementId& id, const ActorId& actor, Millis now,
                                        std::string op_kind) {
    if (auto it = elements_.find(id); it != elements_.end()) {
        touch(it->second, actor, now, std::move(op_kind));
        return history_.back();
    }
    if (!contains(id)) {
        throw Error(ErrorCode::UnknownElement, "no element " + id.str());
    }
    append_history(id, actor, now, std::move(op_kind));
    return history_.back();
}

std::vector<ClassFootprint> ModelDocument::class_footprints(const WhiteboardId& board) const {
    std::vector<ClassFootprint> out;
    for (const auto& [id, c] : elements_) {
        if (c.whiteboard_id == board) {
            out.push_back({id, c.bounds});
        }
    }
    return out;
}

LayerSet ModelDocument::layer_of_board(const WhiteboardId& board) const {
    const Whiteboard* wb = find_board(board);
    if (wb == nullptr) {
        throw Error(ErrorCode::UnknownBoard, "no whiteboard " + board.str());
    }
    LayerSet layer{wb->name, {}};
    for (const auto& [id, c] : elements_) {
        if (c.whiteboard_id == board) {
            layer.ids.insert(id);
        }
    }
    for (const auto& [id, r] : relationships_) {
        if (layer.ids.count(r.source) && layer.ids.count(r.target)) {
            layer.ids.insert(id);
        }
    }
    return layer;
}

bool ModelDocument::layer_is_valid(const LayerSet& layer) const {
    return std::all_of(layer.ids.begin(), layer.ids.end(), [&](const ElementId& id) {
        return elements_.count(id) || relationships_.count(id);
    });
}

std::vector<std::string> ModelDocument::integrity_problems() const {
    std::vector<std::string> problems;
    auto report = [&](std::string msg) { problems.push_back(std::move(msg)); };

    for (const auto& [id, wb] : whiteboards_) {
        if (!(wb.width > 0.0 && wb.height > 0.0)) {
            report("board " + id.str() + " has non-positive size");
        }
        for (const auto& l : wb.links) {
            if (l == id) {
                report("board " + id.str() + " links to itself");
            } else if (!whiteboards_.count(l)) {
                report("board " + id.str() + " links to missing " + l.str());
            }
        }
    }
    std::set<ElementId> seen;
    auto unique = [&](const ElementId& id) {
        if (!seen.insert(id).second) {
            report("duplicate id " + id.str());
        }
    };
    for (const auto& [id, c] : elements_) {
        unique(id);
        if (!whiteboards_.count(c.whiteboard_id)) {
            report("class " + id.str() + " on missing board");
        }
        if (c.bounds.w < kMinClassSize || c.bounds.h < kMinClassSize) {
            report("class " + id.str() + " below minimum size");
        }
        if (c.origin_id) {
            if (*c.origin_id == id) {
                report("class " + id.str() + " is its own origin");
            } else if (!elements_.count(*c.origin_id)) {
                report("class " + id.str() + " has dangling origin " + c.origin_id->str());
            }
        }
    }
    for (const auto& [id, r] : relationships_) {
        unique(id);
        if (!elements_.count(r.source) || !elements_.count(r.target)) {
            report("relationship " + id.str() + " dangles");
        }
        if (!is_valid_cardinality(r.source_card) || !is_valid_cardinality(r.target_card)) {
            report("relationship " + id.str() + " has bad cardinality");
        }
        if (r.kind == RelationshipKind::Inheritance &&
            (!r.source_card.empty() || !r.target_card.empty())) {
            report("inheritance " + id.str() + " carries cardinalities");
        }
    }
    std::map<ElementId, ElementId> owner;
    for (const auto& [id, p] : packages_) {
        unique(id);
        for (const auto& m : p.member_ids) {
            if (!elements_.count(m)) {
                report("package " + id.str() + " has dangling member " + m.str());
            }
            if (auto [it, fresh] = owner.emplace(m, id); !fresh) {
                report(m.str() + " in two packages");
            }
        }
    }
    for (const auto& [id, s] : strokes_) {
        unique(id);
        if (!whiteboards_.count(s.board)) {
            report("stroke " + id.str() + " on missing board");
        }
    }
    return problems;
}

ModelDocument ModelDocument::from_parts(Parts parts) {
    ModelDocument doc(std::move(parts.doc_id));
    doc.version_ = parts.version;
    doc.next_serial_ = parts.next_serial;
    for (auto& wb : parts.whiteboards) {
        auto id = wb.id;
        doc.whiteboards_.emplace(id, std::move(wb));
    }
    for (auto& c : parts.elements) {
        auto id = c.id;
        doc.elements_.emplace(id, std::move(c));
    }
    for (auto& r : parts.relationships) {
        auto id = r.id;
        doc.relationships_.emplace(id, std::move(r));
    }
    for (auto& p : parts.packages) {
        auto id = p.id;
        doc.packages_.emplace(id, std::move(p));
    }
    for (auto& s : parts.strokes) {
        auto id = s.id;
        doc.strokes_.emplace(id, std::move(s));
    }
    doc.history_ = std::move(parts.history);
    for (const auto& h : doc.history_) {
        auto& last = doc.last_stamp_[h.actor];
        last = std::max(last, h.timestamp);
    }
    return doc;
}

} // namespace modelsync
