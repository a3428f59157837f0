#include "modelsync/operation.hpp"

#include "json_util.hpp"

#include <algorithm>

namespace modelsync {

using nlohmann::json;
namespace jio = jsonio;

namespace {

struct BodyKind {
    std::string_view operator()(const body::AddWhiteboard&) const { return "add_whiteboard"; }
    std::string_view operator()(const body::LinkWhiteboards&) const { return "link_whiteboards"; }
    std::string_view operator()(const body::CreateClass&) const { return "create_class"; }
    std::string_view operator()(const body::EditClass&) const { return "edit_class"; }
    std::string_view operator()(const body::CreateRelationship&) const { return "create_relationship"; }
    std::string_view operator()(const body::UpdateRelationship&) const { return "update_relationship"; }
    std::string_view operator()(const body::DeleteElement&) const { return "delete_element"; }
    std::string_view operator()(const body::CopyCluster& c) const {
        return c.shallow ? "shallow_copy" : "deep_copy";
    }
    std::string_view operator()(const body::CreatePackage&) const { return "create_package"; }
    std::string_view operator()(const body::PackageMember& p) const {
        return p.add ? "package_add" : "package_remove";
    }
    std::string_view operator()(const body::AddStroke&) const { return "add_stroke"; }
    std::string_view operator()(const body::RecordEdit&) const { return "record_edit"; }
};

std::vector<ElementId> id_list(const json& j) {
    std::vector<ElementId> out;
    for (const auto& v : j) {
        out.emplace_back(v.get<std::string>());
    }
    return out;
}

json id_list(const std::vector<ElementId>& ids) {
    json out = json::array();
    for (const auto& id : ids) {
        out.push_back(id.str());
    }
    return out;
}

std::vector<ElementId> mapped_values(const CopyMapping& m) {
    std::vector<ElementId> out;
    for (const auto& [from, to] : m) {
        out.push_back(to);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

std::string_view body_kind(const OpBody& body) {
    return std::visit(BodyKind{}, body);
}

ApplyOutcome apply_body(ModelDocument& doc, const OpBody& op_body, const ActorId& actor, Millis now) {
    ApplyOutcome out;
    try {
        std::visit(
            [&](const auto& b) {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, body::AddWhiteboard>) {
                    auto id = doc.add_whiteboard(b.name, b.pose, b.width, b.height);
                    out.created.emplace_back(id.str());
                } else if constexpr (std::is_same_v<T, body::LinkWhiteboards>) {
                    doc.link_whiteboards(b.a, b.b);
                } else if constexpr (std::is_same_v<T, body::CreateClass>) {
                    out.created.push_back(doc.create_class(b.board, b.bounds, actor, now));
                } else if constexpr (std::is_same_v<T, body::EditClass>) {
                    doc.edit_class(b.id, b.change, actor, now);
                } else if constexpr (std::is_same_v<T, body::CreateRelationship>) {
                    out.created.push_back(doc.create_relationship(b.spec, actor, now));
                } else if constexpr (std::is_same_v<T, body::UpdateRelationship>) {
                    doc.update_relationship(b.id, b.kind, b.source_card, b.target_card, b.label,
                                            actor, now);
                } else if constexpr (std::is_same_v<T, body::DeleteElement>) {
                    out.removed = doc.delete_element(b.id, actor, now);
                    if (out.removed.empty()) {
                        throw Error(ErrorCode::UnknownElement, "delete of missing " + b.id.str());
                    }
                } else if constexpr (std::is_same_v<T, body::CopyCluster>) {
                    auto mapping = b.shallow ? doc.shallow_copy(b.cluster, b.board, b.offset, actor, now)
                                             : doc.deep_copy(b.cluster, b.board, b.offset, actor, now);
                    out.created = mapped_values(mapping);
                } else if constexpr (std::is_same_v<T, body::CreatePackage>) {
                    out.created.push_back(doc.create_package(b.name, b.members, actor, now));
                } else if constexpr (std::is_same_v<T, body::PackageMember>) {
                    if (b.add) {
                        doc.package_add(b.package, b.element);
                    } else {
                        doc.package_remove(b.package, b.element);
                    }
                } else if constexpr (std::is_same_v<T, body::AddStroke>) {
                    Stroke s{ElementId{}, b.board, b.points, actor, b.t_start, now};
                    out.created.push_back(doc.add_stroke(std::move(s)));
                } else if constexpr (std::is_same_v<T, body::RecordEdit>) {
                    doc.record_edit(b.element, actor, now, b.op_kind);
                }
            },
            op_body);
    } catch (const Error& e) {
        out.ok = false;
        out.error = e.code();
        out.diagnostic = e.what();
        out.created.clear();
    }
    return out;
}

json change_to_json(const ClassChange& c) {
    json j{{"op", std::string(change_name(c))}};
    std::visit(
        [&](const auto& ch) {
            using T = std::decay_t<decltype(ch)>;
            if constexpr (std::is_same_v<T, change::SetName>) {
                j["name"] = ch.name;
            } else if constexpr (std::is_same_v<T, change::SetStereotype>) {
                j["stereotype"] = ch.stereotype ? json(*ch.stereotype) : json(nullptr);
            } else if constexpr (std::is_same_v<T, change::AddAttribute>) {
                j["member"] = jio::member(ch.field);
            } else if constexpr (std::is_same_v<T, change::RemoveAttribute> ||
                                 std::is_same_v<T, change::RemoveMethod>) {
                j["index"] = ch.index;
            } else if constexpr (std::is_same_v<T, change::UpdateAttribute>) {
                j["index"] = ch.index;
                j["member"] = jio::member(ch.field);
            } else if constexpr (std::is_same_v<T, change::AddMethod>) {
                j["member"] = jio::member(ch.method);
            } else if constexpr (std::is_same_v<T, change::UpdateMethod>) {
                j["index"] = ch.index;
                j["member"] = jio::member(ch.method);
            } else if constexpr (std::is_same_v<T, change::MoveBounds>) {
                j["bounds"] = jio::rect(ch.bounds);
            }
        },
        c);
    return j;
}

ClassChange change_from_json(const json& j) {
    const auto op = jio::get<std::string>(j, "op");
    if (op == "set_name") return change::SetName{jio::get<std::string>(j, "name")};
    if (op == "set_stereotype") {
        return change::SetStereotype{j.contains("stereotype") && !j["stereotype"].is_null()
                                         ? std::optional<std::string>(j["stereotype"].get<std::string>())
                                         : std::nullopt};
    }
    if (op == "add_attribute") return change::AddAttribute{jio::member_field(jio::field(j, "member"))};
    if (op == "remove_attribute") return change::RemoveAttribute{jio::get<std::size_t>(j, "index")};
    if (op == "update_attribute") {
        return change::UpdateAttribute{jio::get<std::size_t>(j, "index"),
                                       jio::member_field(jio::field(j, "member"))};
    }
    if (op == "add_method") return change::AddMethod{jio::member_method(jio::field(j, "member"))};
    if (op == "remove_method") return change::RemoveMethod{jio::get<std::size_t>(j, "index")};
    if (op == "update_method") {
        return change::UpdateMethod{jio::get<std::size_t>(j, "index"),
                                    jio::member_method(jio::field(j, "member"))};
    }
    if (op == "move_bounds") return change::MoveBounds{jio::rect(jio::field(j, "bounds"))};
    throw Error(ErrorCode::MalformedMessage, "unknown class change '" + op + "'");
}

json body_to_json(const OpBody& op_body) {
    json j{{"kind", std::string(body_kind(op_body))}};
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, body::AddWhiteboard>) {
                j["name"] = b.name;
                j["pose"] = jio::pose(b.pose);
                j["width"] = b.width;
                j["height"] = b.height;
            } else if constexpr (std::is_same_v<T, body::LinkWhiteboards>) {
                j["a"] = b.a.str();
                j["b"] = b.b.str();
            } else if constexpr (std::is_same_v<T, body::CreateClass>) {
                j["board"] = b.board.str();
                j["bounds"] = jio::rect(b.bounds);
            } else if constexpr (std::is_same_v<T, body::EditClass>) {
                j["id"] = b.id.str();
                j["change"] = change_to_json(b.change);
            } else if constexpr (std::is_same_v<T, body::CreateRelationship>) {
                j["rel"] = std::string(relationship_kind_name(b.spec.kind));
                j["source"] = b.spec.source.str();
                j["target"] = b.spec.target.str();
                j["source_card"] = b.spec.source_card;
                j["target_card"] = b.spec.target_card;
                j["label"] = b.spec.label;
                j["waypoints"] = jio::points(b.spec.waypoints);
            } else if constexpr (std::is_same_v<T, body::UpdateRelationship>) {
                j["id"] = b.id.str();
                j["rel"] = std::string(relationship_kind_name(b.kind));
                j["source_card"] = b.source_card;
                j["target_card"] = b.target_card;
                j["label"] = b.label;
            } else if constexpr (std::is_same_v<T, body::DeleteElement>) {
                j["id"] = b.id.str();
            } else if constexpr (std::is_same_v<T, body::CopyCluster>) {
                j["cluster"] = id_list(b.cluster);
                j["board"] = b.board.str();
                j["offset"] = jio::point(b.offset);
            } else if constexpr (std::is_same_v<T, body::CreatePackage>) {
                j["name"] = b.name;
                j["members"] = id_list(b.members);
            } else if constexpr (std::is_same_v<T, body::PackageMember>) {
                j["package"] = b.package.str();
                j["element"] = b.element.str();
            } else if constexpr (std::is_same_v<T, body::AddStroke>) {
                j["board"] = b.board.str();
                j["points"] = jio::points(b.points);
                j["t_start"] = b.t_start;
            } else if constexpr (std::is_same_v<T, body::RecordEdit>) {
                j["element"] = b.element.str();
                j["op_kind"] = b.op_kind;
            }
        },
        op_body);
    return j;
}

OpBody body_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::MalformedMessage, "op body must be an object");
    }
    const auto kind = jio::get<std::string>(j, "kind");
    if (kind == "add_whiteboard") {
        return body::AddWhiteboard{jio::get<std::string>(j, "name"),
                                   j.contains("pose") ? jio::pose(j["pose"]) : Pose{},
                                   jio::get_or<double>(j, "width", kDefaultBoardWidth),
                                   jio::get_or<double>(j, "height", kDefaultBoardHeight)};
    }
    if (kind == "link_whiteboards") {
        return body::LinkWhiteboards{jio::id<WhiteboardId>(j, "a"), jio::id<WhiteboardId>(j, "b")};
    }
    if (kind == "create_class") {
        return body::CreateClass{jio::id<WhiteboardId>(j, "board"), jio::rect(jio::field(j, "bounds"))};
    }
    if (kind == "edit_class") {
        return body::EditClass{jio::id<ElementId>(j, "id"), change_from_json(jio::field(j, "change"))};
    }
    if (kind == "create_relationship") {
        RelationshipSpec spec;
        spec.kind = jio::kind(j, "rel");
        spec.source = jio::id<ElementId>(j, "source");
        spec.target = jio::id<ElementId>(j, "target");
        spec.source_card = jio::get_or<std::string>(j, "source_card", "");
        spec.target_card = jio::get_or<std::string>(j, "target_card", "");
        spec.label = jio::get_or<std::string>(j, "label", "");
        if (j.contains("waypoints")) {
            spec.waypoints = jio::points(j["waypoints"]);
        }
        return body::CreateRelationship{std::move(spec)};
    }
    if (kind == "update_relationship") {
        return body::UpdateRelationship{jio::id<ElementId>(j, "id"), jio::kind(j, "rel"),
                                        jio::get_or<std::string>(j, "source_card", ""),
                                        jio::get_or<std::string>(j, "target_card", ""),
                                        jio::get_or<std::string>(j, "label", "")};
    }
    if (kind == "delete_element") {
        return body::DeleteElement{jio::id<ElementId>(j, "id")};
    }
    if (kind == "deep_copy" || kind == "shallow_copy") {
        return body::CopyCluster{kind == "shallow_copy", id_list(jio::field(j, "cluster")),
                                 jio::id<WhiteboardId>(j, "board"),
                                 j.contains("offset") ? jio::point(j["offset"]) : Point{}};
    }
    if (kind == "create_package") {
        return body::CreatePackage{jio::get<std::string>(j, "name"),
                                   id_list(jio::field(j, "members"))};
    }
    if (kind == "package_add" || kind == "package_remove") {
        return body::PackageMember{jio::id<ElementId>(j, "package"), jio::id<ElementId>(j, "element"),
                                   kind == "package_add"};
    }
    if (kind == "add_stroke") {
        return body::AddStroke{jio::id<WhiteboardId>(j, "board"), jio::points(jio::field(j, "points")),
                               jio::get_or<Millis>(j, "t_start", 0)};
    }
    if (kind == "record_edit") {
        return body::RecordEdit{jio::id<ElementId>(j, "element"),
                                jio::get_or<std::string>(j, "op_kind", "edit")};
    }
    throw Error(ErrorCode::MalformedMessage, "unknown op kind '" + kind + "'");
}

json op_to_json(const Operation& op) {
    json j{{"t", "op"}};
    if (op.seq) {
        j["seq"] = *op.seq;
    }
    j["actor"] = op.actor.str();
    j["cseq"] = op.client_seq;
    j["body"] = body_to_json(op.body);
    j["ts"] = op.issued_at;
    return j;
}

Operation op_from_json(const json& j) {
    if (!j.is_object()) {
        throw Error(ErrorCode::MalformedMessage, "op must be an object");
    }
    Operation op;
    if (auto it = j.find("seq"); it != j.end() && !it->is_null()) {
        op.seq = it->get<std::uint64_t>();
    }
    op.actor = jio::id<ActorId>(j, "actor");
    op.client_seq = jio::get<std::uint64_t>(j, "cseq");
    op.body = body_from_json(jio::field(j, "body"));
    op.issued_at = jio::get_or<Millis>(j, "ts", 0);
    return op;
}

} // namespace modelsync
