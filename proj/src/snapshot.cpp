#include "modelsync/snapshot.hpp"

#include "json_util.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

namespace modelsync {

using nlohmann::json;
namespace jio = jsonio;

namespace {

json board_json(const Whiteboard& wb) {
    json links = json::array();
    for (const auto& l : wb.links) {
        links.push_back(l.str());
    }
    return json{{"id", wb.id.str()},     {"name", wb.name},     {"pose", jio::pose(wb.pose)},
                {"width", wb.width},     {"height", wb.height}, {"links", links}};
}

Whiteboard board_from(const json& j) {
    Whiteboard wb;
    wb.id = jio::id<WhiteboardId>(j, "id");
    wb.name = jio::get_or<std::string>(j, "name", "");
    wb.pose = j.contains("pose") ? jio::pose(j["pose"]) : Pose{};
    wb.width = jio::get_or<double>(j, "width", kDefaultBoardWidth);
    wb.height = jio::get_or<double>(j, "height", kDefaultBoardHeight);
    for (const auto& l : jio::get_or<json>(j, "links", json::array())) {
        wb.links.emplace(l.get<std::string>());
    }
    return wb;
}

json class_json(const ClassElement& c) {
    json attrs = json::array();
    for (const auto& a : c.attributes) {
        attrs.push_back(jio::member(a));
    }
    json methods = json::array();
    for (const auto& m : c.methods) {
        methods.push_back(jio::member(m));
    }
    return json{{"id", c.id.str()},
                {"board", c.whiteboard_id.str()},
                {"name", c.name},
                {"stereotype", c.stereotype ? json(*c.stereotype) : json(nullptr)},
                {"attributes", attrs},
                {"methods", methods},
                {"bounds", jio::rect(c.bounds)},
                {"origin", jio::id_or_null(c.origin_id)},
                {"clone_group", jio::id_or_null(c.clone_group)},
                {"last_editor", jio::id_or_null(c.last_editor)},
                {"last_edit", c.last_edit_time}};
}

ClassElement class_from(const json& j) {
    ClassElement c;
    c.id = jio::id<ElementId>(j, "id");
    c.whiteboard_id = jio::id<WhiteboardId>(j, "board");
    c.name = jio::get_or<std::string>(j, "name", "");
    if (auto it = j.find("stereotype"); it != j.end() && !it->is_null()) {
        c.stereotype = it->get<std::string>();
    }
    for (const auto& a : jio::get_or<json>(j, "attributes", json::array())) {
        c.attributes.push_back(jio::member_field(a));
    }
    for (const auto& m : jio::get_or<json>(j, "methods", json::array())) {
        c.methods.push_back(jio::member_method(m));
    }
    c.bounds = jio::rect(jio::field(j, "bounds"));
    c.origin_id = jio::optional_id<ElementId>(j, "origin");
    c.clone_group = jio::optional_id<ElementId>(j, "clone_group");
    c.last_editor = jio::optional_id<ActorId>(j, "last_editor");
    c.last_edit_time = jio::get_or<Millis>(j, "last_edit", 0);
    return c;
}

json relationship_json(const Relationship& r) {
    return json{{"id", r.id.str()},
                {"kind", std::string(relationship_kind_name(r.kind))},
                {"source", r.source.str()},
                {"target", r.target.str()},
                {"source_card", r.source_card},
                {"target_card", r.target_card},
                {"label", r.label},
                {"waypoints", jio::points(r.waypoints)}};
}

Relationship relationship_from(const json& j) {
    Relationship r;
    r.id = jio::id<ElementId>(j, "id");
    r.kind = jio::kind(j, "kind");
    r.source = jio::id<ElementId>(j, "source");
    r.target = jio::id<ElementId>(j, "target");
    r.source_card = jio::get_or<std::string>(j, "source_card", "");
    r.target_card = jio::get_or<std::string>(j, "target_card", "");
    r.label = jio::get_or<std::string>(j, "label", "");
    r.waypoints = jio::points(jio::get_or<json>(j, "waypoints", json::array()));
    return r;
}

json package_json(const Package& p) {
    json members = json::array();
    for (const auto& m : p.member_ids) {
        members.push_back(m.str());
    }
    return json{{"id", p.id.str()}, {"name", p.name}, {"members", members}};
}

Package package_from(const json& j) {
    Package p;
    p.id = jio::id<ElementId>(j, "id");
    p.name = jio::get<std::string>(j, "name");
    for (const auto& m : jio::get_or<json>(j, "members", json::array())) {
        p.member_ids.emplace(m.get<std::string>());
    }
    return p;
}

json stroke_json(const Stroke& s) {
    return json{{"id", s.id.str()},         {"board", s.board.str()},
                {"points", jio::points(s.points)}, {"actor", s.actor.str()},
                {"t_start", s.t_start},     {"t_end", s.t_end}};
}

Stroke stroke_from(const json& j) {
    return {jio::id<ElementId>(j, "id"), jio::id<WhiteboardId>(j, "board"),
            jio::points(jio::field(j, "points")), jio::id<ActorId>(j, "actor"),
            jio::get_or<Millis>(j, "t_start", 0), jio::get_or<Millis>(j, "t_end", 0)};
}

json history_json(const HistoryEntry& h) {
    return json{{"element", h.element_id.str()},
                {"actor", h.actor.str()},
                {"ts", h.timestamp},
                {"op", h.op_kind}};
}

HistoryEntry history_from(const json& j) {
    return {jio::id<ElementId>(j, "element"), jio::id<ActorId>(j, "actor"), jio::get<Millis>(j, "ts"),
            jio::get_or<std::string>(j, "op", "")};
}

template <class Map, class Fn>
json array_of(const Map& m, Fn&& fn) {
    json out = json::array();
    for (const auto& [id, v] : m) {
        out.push_back(fn(v));
    }
    return out;
}

} // namespace

json document_to_json(const ModelDocument& doc) {
    json history = json::array();
    for (const auto& h : doc.history()) {
        history.push_back(history_json(h));
    }
    return json{{"format", "modelsync"},
                {"version", kSnapshotFormatVersion},
                {"doc_id", doc.doc_id()},
                {"whiteboards", array_of(doc.whiteboards(), board_json)},
                {"elements", array_of(doc.elements(), class_json)},
                {"relationships", array_of(doc.relationships(), relationship_json)},
                {"packages", array_of(doc.packages(), package_json)},
                {"strokes", array_of(doc.strokes(), stroke_json)},
                {"history", history},
                {"applied_seq", doc.version()},
                {"next_id", doc.next_serial()}};
}

ModelDocument document_from_json(const json& j) {
    if (!j.is_object() || j.value("format", std::string()) != "modelsync") {
        throw Error(ErrorCode::FormatVersionMismatch, "not a modelsync model file");
    }
    const auto version = jio::get<int>(j, "version");
    if (version != kSnapshotFormatVersion) {
        throw Error(ErrorCode::FormatVersionMismatch,
                    "model format version " + std::to_string(version) + " is not supported");
    }
    ModelDocument::Parts parts;
    parts.doc_id = jio::get_or<std::string>(j, "doc_id", "doc");
    parts.version = jio::get_or<std::uint64_t>(j, "applied_seq", 0);
    for (const auto& v : jio::get_or<json>(j, "whiteboards", json::array())) parts.whiteboards.push_back(board_from(v));
    for (const auto& v : jio::get_or<json>(j, "elements", json::array())) parts.elements.push_back(class_from(v));
    for (const auto& v : jio::get_or<json>(j, "relationships", json::array())) parts.relationships.push_back(relationship_from(v));
    for (const auto& v : jio::get_or<json>(j, "packages", json::array())) parts.packages.push_back(package_from(v));
    for (const auto& v : jio::get_or<json>(j, "strokes", json::array())) parts.strokes.push_back(stroke_from(v));
    for (const auto& v : jio::get_or<json>(j, "history", json::array())) parts.history.push_back(history_from(v));

    // Files written by hand may omit next_id; continue past every serial in use.
    std::uint64_t max_serial = 0;
    auto bump = [&](const std::string& id) {
        if (id.size() > 1) {
            try {
                max_serial = std::max<std::uint64_t>(max_serial, std::stoull(id.substr(1)));
            } catch (const std::exception&) {
            }
        }
    };
    for (const auto& v : parts.whiteboards) bump(v.id.str());
    for (const auto& v : parts.elements) bump(v.id.str());
    for (const auto& v : parts.relationships) bump(v.id.str());
    for (const auto& v : parts.packages) bump(v.id.str());
    for (const auto& v : parts.strokes) bump(v.id.str());
    parts.next_serial = std::max(jio::get_or<std::uint64_t>(j, "next_id", 1), max_serial + 1);
    return ModelDocument::from_parts(std::move(parts));
}

std::string canonical_text(const ModelDocument& doc) {
    return document_to_json(doc).dump();
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) {
        throw Error(ErrorCode::IoFailure, "sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

} // namespace modelsync
