#include "modelsync/export.hpp"

#include <sstream>

namespace modelsync {

namespace {

std::string quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        out += (c == '"') ? '\'' : c;
    }
    return out + '"';
}

std::string card(const std::string& c) { return c.empty() ? "" : " " + quoted(c); }

void write_class(std::ostringstream& out, const ClassElement& c, const std::string& indent) {
    out << indent << "class " << quoted(c.name.empty() ? c.id.str() : c.name) << " as " << c.id.str();
    if (c.stereotype && !c.stereotype->empty()) {
        out << " <<" << *c.stereotype << ">>";
    }
    out << " {\n";
    for (const auto& f : c.attributes) {
        out << indent << "  " << visibility_symbol(f.visibility) << f.name;
        if (!f.type_text.empty()) {
            out << " : " << f.type_text;
        }
        out << '\n';
    }
    for (const auto& m : c.methods) {
        out << indent << "  " << visibility_symbol(m.visibility) << m.name << '(';
        for (std::size_t i = 0; i < m.params.size(); ++i) {
            if (i) out << ", ";
            out << m.params[i].name;
            if (!m.params[i].type_text.empty()) out << " : " << m.params[i].type_text;
        }
        out << ')';
        if (!m.return_text.empty()) {
            out << " : " << m.return_text;
        }
        out << '\n';
    }
    out << indent << "}\n";
}

} // namespace

std::string to_plantuml(const ModelDocument& doc) {
    std::ostringstream out;
    out << "@startuml\n";
    std::set<ElementId> packaged;
    for (const auto& [id, pkg] : doc.packages()) {
        out << "package " << quoted(pkg.name) << " {\n";
        for (const auto& member : pkg.member_ids) {
            if (const auto* c = doc.find_class(member); c && packaged.insert(member).second) {
                write_class(out, *c, "  ");
            }
        }
        out << "}\n";
    }
    for (const auto& [id, c] : doc.elements()) {
        if (!packaged.count(id)) {
            write_class(out, c, "");
        }
    }
    for (const auto& [id, r] : doc.relationships()) {
        const auto s = r.source.str();
        const auto t = r.target.str();
        switch (r.kind) {
        case RelationshipKind::Inheritance:
            out << t << " <|-- " << s;
            break;
        case RelationshipKind::Aggregation:
            out << s << card(r.source_card) << " o--" << card(r.target_card) << ' ' << t;
            break;
        case RelationshipKind::Composition:
            out << s << card(r.source_card) << " *--" << card(r.target_card) << ' ' << t;
            break;
        case RelationshipKind::Dependency:
            out << s << card(r.source_card) << " ..>" << card(r.target_card) << ' ' << t;
            break;
        case RelationshipKind::Association:
            out << s << card(r.source_card) << " --" << card(r.target_card) << ' ' << t;
            break;
        }
        if (!r.label.empty()) {
            out << " : " << r.label;
        }
        out << '\n';
    }
    out << "@enduml\n";
    return out.str();
}

} // namespace modelsync
