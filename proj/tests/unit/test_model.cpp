#include "modelsync/model.hpp"
#include "modelsync/operation.hpp"
#include "modelsync/snapshot.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace modelsync;

namespace {

const ActorId kBlue{"a1"};
const ActorId kGreen{"a2"};

struct Fixture {
    ModelDocument doc{"test"};
    WhiteboardId board = doc.add_whiteboard("Main", {}, 1000, 750);

    ElementId cls(const std::string& name, Rect r = {100, 100, 160, 120}) {
        auto id = doc.create_class(board, r, kBlue, 1);
        if (!name.empty()) doc.edit_class(id, change::SetName{name}, kBlue, 1);
        return id;
    }
    ElementId rel(const ElementId& a, const ElementId& b, RelationshipKind k = RelationshipKind::Association) {
        return doc.create_relationship({k, a, b, "", "", "", {}}, kBlue, 2);
    }
};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return ErrorCode::NonConvergence;
}

nlohmann::json members(const ClassElement& c) {
    nlohmann::json out;
    out["name"] = c.name;
    out["stereo"] = c.stereotype.value_or("");
    for (const auto& a : c.attributes) out["a"].push_back({visibility_symbol(a.visibility), a.name, a.type_text});
    for (const auto& m : c.methods) {
        nlohmann::json ps = nlohmann::json::array();
        for (const auto& p : m.params) ps.push_back({p.name, p.type_text});
        out["m"].push_back({visibility_symbol(m.visibility), m.name, ps, m.return_text});
    }
    return out;
}

} // namespace

TEST_SUITE("create_class") {
    TEST_CASE("bounds are stored and members start empty") {
        Fixture f;
        auto id = f.doc.create_class(f.board, {100, 100, 160, 120}, kBlue, 5);
        const auto* c = f.doc.find_class(id);
        REQUIRE(c);
        CHECK(c->bounds == Rect{100, 100, 160, 120});
        CHECK(c->name.empty());
        CHECK(c->attributes.empty());
        CHECK(c->methods.empty());
        CHECK(c->whiteboard_id == f.board);
        CHECK(f.doc.version() == 0);
    }
    TEST_CASE("below the 20-unit floor is rejected") {
        Fixture f;
        CHECK(code_of([&] { f.doc.create_class(f.board, {0, 0, 10, 10}, kBlue, 1); }) == ErrorCode::BoundsTooSmall);
        CHECK(f.doc.elements().empty());
    }
    TEST_CASE("unknown board and out-of-board bounds") {
        Fixture f;
        CHECK(code_of([&] { f.doc.create_class(WhiteboardId{"b99"}, {0, 0, 50, 50}, kBlue, 1); }) == ErrorCode::UnknownBoard);
        CHECK(code_of([&] { f.doc.create_class(f.board, {990, 0, 50, 50}, kBlue, 1); }) == ErrorCode::BoundsOutOfBoard);
    }
    TEST_CASE("ids are unique and order numerically") {
        Fixture f;
        auto a = f.cls("");
        auto b = f.cls("");
        CHECK(a != b);
        CHECK(a != ElementId{f.board.str()});
        CHECK(ElementId{"e9"} < ElementId{"e10"});
        CHECK(f.doc.integrity_problems().empty());
    }
}

TEST_SUITE("edit_class") {
    TEST_CASE("set_name stamps the editor") {
        Fixture f;
        auto id = f.cls("");
        const auto& c = f.doc.edit_class(id, change::SetName{"Movie"}, kGreen, 42);
        CHECK(c.name == "Movie");
        CHECK(c.last_editor == kGreen);
        CHECK(c.last_edit_time == 42);
    }
    TEST_CASE("attribute add then update keeps one member") {
        Fixture f;
        auto id = f.cls("Movie");
        f.doc.edit_class(id, change::AddAttribute{{Visibility::Public, "title", "String"}}, kBlue, 2);
        const auto& c = f.doc.edit_class(id, change::UpdateAttribute{0, {Visibility::Private, "title", "Text"}}, kBlue, 3);
        REQUIRE(c.attributes.size() == 1);
        CHECK(c.attributes[0].visibility == Visibility::Private);
        CHECK(c.attributes[0].type_text == "Text");
    }
    TEST_CASE("invalid edits") {
        Fixture f;
        auto id = f.cls("Movie");
        CHECK(code_of([&] { f.doc.edit_class(id, change::RemoveAttribute{0}, kBlue, 2); }) == ErrorCode::InvalidMember);
        CHECK(code_of([&] { f.doc.edit_class(id, change::AddMethod{{Visibility::Public, "", {}, ""}}, kBlue, 2); }) == ErrorCode::InvalidMember);
        CHECK(code_of([&] { f.doc.edit_class(id, change::SetName{""}, kBlue, 2); }) == ErrorCode::EmptyName);
        CHECK(code_of([&] { f.doc.edit_class(ElementId{"e77"}, change::SetName{"X"}, kBlue, 2); }) == ErrorCode::UnknownElement);
    }
    TEST_CASE("origin rename mirrors into the clone but bounds do not") {
        Fixture f;
        auto o = f.cls("Chair");
        auto map = f.doc.shallow_copy({o}, f.board, {300, 0}, kBlue, 3);
        auto k = map.at(o);
        f.doc.edit_class(o, change::SetName{"Seat"}, kBlue, 4);
        f.doc.edit_class(o, change::MoveBounds{{10, 10, 60, 60}}, kBlue, 5);
        CHECK(f.doc.find_class(k)->name == "Seat");
        CHECK(f.doc.find_class(k)->bounds == Rect{400, 100, 160, 120});
    }
    TEST_CASE("member edits on a clone are rejected") {
        Fixture f;
        auto o = f.cls("Chair");
        auto k = f.doc.shallow_copy({o}, f.board, {300, 0}, kBlue, 3).at(o);
        CHECK(code_of([&] { f.doc.edit_class(k, change::SetName{"Other"}, kBlue, 4); }) == ErrorCode::CloneReadOnly);
        // Moving a clone is fine.
        f.doc.edit_class(k, change::MoveBounds{{500, 500, 60, 60}}, kBlue, 5);
        CHECK(f.doc.find_class(k)->bounds.x == 500);
    }
}

TEST_SUITE("relationships") {
    TEST_CASE("inheritance carries empty cardinalities") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B", {400, 100, 100, 100});
        auto r = f.rel(a, b, RelationshipKind::Inheritance);
        const auto* rel = f.doc.find_relationship(r);
        CHECK(rel->source_card.empty());
        CHECK(rel->target_card.empty());
        CHECK(code_of([&] { f.doc.create_relationship({RelationshipKind::Inheritance, a, b, "1", "", "", {}}, kBlue, 1); }) ==
              ErrorCode::InvalidCardinality);
    }
    TEST_CASE("association cardinalities stored verbatim") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        auto r = f.doc.create_relationship({RelationshipKind::Association, a, b, "1", "0..*", "has", {}}, kBlue, 1);
        CHECK(f.doc.find_relationship(r)->source_card == "1");
        CHECK(f.doc.find_relationship(r)->target_card == "0..*");
        CHECK(code_of([&] { f.doc.create_relationship({RelationshipKind::Association, a, b, "2..3", "", "", {}}, kBlue, 1); }) ==
              ErrorCode::InvalidCardinality);
    }
    TEST_CASE("endpoint must exist") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        f.doc.delete_element(b, kBlue, 3);
        CHECK(code_of([&] { f.rel(a, b); }) == ErrorCode::UnknownElement);
    }
    TEST_CASE("both endpoints get history") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        const auto before = f.doc.history().size();
        auto r = f.rel(a, b);
        std::set<ElementId> touched;
        for (auto i = before; i < f.doc.history().size(); ++i) touched.insert(f.doc.history()[i].element_id);
        CHECK(touched == std::set<ElementId>{a, b, r});
        CHECK(f.doc.find_class(a)->last_edit_time == 2);
        CHECK(f.doc.find_class(b)->last_edit_time == 2);
    }
    TEST_CASE("cardinality vocabulary") {
        for (auto c : {"", "1", "0..1", "*", "1..*", "0..*"}) CHECK(is_valid_cardinality(c));
        for (auto c : {"2", "n", "0..n", " 1"}) CHECK_FALSE(is_valid_cardinality(c));
    }
}

TEST_SUITE("delete_element") {
    TEST_CASE("cascade removes attached relationships") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        auto c = f.cls("C");
        f.rel(a, b);
        f.rel(c, a);
        f.rel(b, c);
        auto removed = f.doc.delete_element(a, kBlue, 5);
        CHECK(removed.size() == 3);
        for (const auto& [id, r] : f.doc.relationships()) {
            CHECK(r.source != a);
            CHECK(r.target != a);
        }
        CHECK(f.doc.relationships().size() == 1);
        CHECK(f.doc.integrity_problems().empty());
    }
    TEST_CASE("deleting the origin detaches its clones") {
        Fixture f;
        auto o = f.cls("Chair");
        auto k = f.doc.shallow_copy({o}, f.board, {300, 0}, kBlue, 3).at(o);
        f.doc.delete_element(o, kBlue, 4);
        REQUIRE(f.doc.find_class(k));
        CHECK_FALSE(f.doc.find_class(k)->origin_id.has_value());
        // A new class with the old name does not drive the detached clone.
        auto fresh = f.cls("Chair");
        f.doc.edit_class(fresh, change::SetName{"Stool"}, kBlue, 6);
        CHECK(f.doc.find_class(k)->name == "Chair");
        // The detached clone is editable again.
        f.doc.edit_class(k, change::SetName{"Bench"}, kBlue, 7);
        CHECK(f.doc.find_class(k)->name == "Bench");
    }
    TEST_CASE("delete twice is a no-op the second time") {
        Fixture f;
        auto a = f.cls("A");
        CHECK(f.doc.delete_element(a, kBlue, 2).size() == 1);
        CHECK(f.doc.delete_element(a, kBlue, 3).empty());
    }
    TEST_CASE("package membership is removed") {
        Fixture f;
        auto a = f.cls("A");
        auto p = f.doc.create_package("core", {a}, kBlue, 2);
        f.doc.delete_element(a, kBlue, 3);
        CHECK(f.doc.find_package(p)->member_ids.empty());
    }
}

TEST_SUITE("packages") {
    TEST_CASE("an element belongs to at most one package") {
        Fixture f;
        auto a = f.cls("A");
        auto p = f.doc.create_package("one", {a}, kBlue, 1);
        auto q = f.doc.create_package("two", {}, kBlue, 1);
        CHECK(code_of([&] { f.doc.package_add(q, a); }) == ErrorCode::AlreadyInPackage);
        f.doc.package_remove(p, a);
        f.doc.package_add(q, a);
        CHECK(f.doc.find_package(q)->member_ids.count(a) == 1);
    }
}

TEST_SUITE("whiteboards") {
    TEST_CASE("links are symmetric and never contain self") {
        Fixture f;
        auto other = f.doc.add_whiteboard("Other", {}, 800, 600);
        f.doc.link_whiteboards(f.board, other);
        f.doc.link_whiteboards(f.board, f.board);
        CHECK(f.doc.find_board(f.board)->links == std::set<WhiteboardId>{other});
        CHECK(f.doc.find_board(other)->links == std::set<WhiteboardId>{f.board});
    }
}

TEST_SUITE("layer algebra") {
    TEST_CASE("examples") {
        const ElementId a{"e1"}, b{"e2"}, c{"e3"};
        LayerSet ab{"L", {a, b}};
        LayerSet bc{"M", {b, c}};
        CHECK(layer_add(ab, bc).ids == std::set<ElementId>{a, b, c});
        CHECK(layer_subtract(ab, bc).ids == std::set<ElementId>{a});
        CHECK(layer_subtract(ab, ab).ids.empty());
        CHECK(layer_add(ab, LayerSet{}).ids == ab.ids);
        CHECK(ab.ids == std::set<ElementId>{a, b}); // operands unchanged
    }
    TEST_CASE("layer of a board holds its classes and their relationships") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        auto r = f.rel(a, b);
        auto layer = f.doc.layer_of_board(f.board);
        CHECK(layer.ids == std::set<ElementId>{a, b, r});
        CHECK(f.doc.layer_is_valid(layer));
        layer.ids.insert(ElementId{"e500"});
        CHECK_FALSE(f.doc.layer_is_valid(layer));
    }
}

TEST_SUITE("copy") {
    TEST_CASE("deep copy keeps internal relationships only") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        auto c = f.cls("C");
        f.rel(a, b);
        f.rel(a, c);
        auto map = f.doc.deep_copy({a, b}, f.board, {10, 10}, kBlue, 3);
        REQUIRE(map.count(a));
        const auto a2 = map.at(a);
        const auto b2 = map.at(b);
        int touching = 0;
        for (const auto& [id, r] : f.doc.relationships()) {
            if (r.source == a2 || r.target == a2) {
                ++touching;
                CHECK(r.target == b2);
            }
        }
        CHECK(touching == 1);
        CHECK(f.doc.find_class(a2)->bounds == Rect{110, 110, 160, 120});
        CHECK_FALSE(f.doc.find_class(a2)->origin_id);
    }
    TEST_CASE("single-class deep copy drops external edges and is independent") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        f.rel(a, b);
        auto a2 = f.doc.deep_copy({a}, f.board, {}, kBlue, 3).at(a);
        for (const auto& [id, r] : f.doc.relationships()) {
            CHECK(r.source != a2);
            CHECK(r.target != a2);
        }
        f.doc.edit_class(a, change::SetName{"Renamed"}, kBlue, 4);
        CHECK(f.doc.find_class(a2)->name == "A");
    }
    TEST_CASE("shallow clone mirrors member edits") {
        Fixture f;
        auto o = f.cls("O");
        auto k = f.doc.shallow_copy({o}, f.board, {0, 300}, kBlue, 2).at(o);
        CHECK(f.doc.find_class(k)->origin_id == o);
        f.doc.edit_class(o, change::AddMethod{{Visibility::Public, "m", {}, "void"}}, kBlue, 3);
        REQUIRE(f.doc.find_class(k)->methods.size() == 1);
        CHECK(f.doc.find_class(k)->methods[0].name == "m");
    }
    TEST_CASE("external relationship is re-created against the original counterpart") {
        // Toy model: A -> B, clone {A}. Hand enumeration: the only edges that
        // may exist afterwards are A->B and A'->B.
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        f.rel(a, b);
        auto a2 = f.doc.shallow_copy({a}, f.board, {0, 300}, kBlue, 2).at(a);
        std::set<std::pair<ElementId, ElementId>> edges;
        for (const auto& [id, r] : f.doc.relationships()) edges.insert({r.source, r.target});
        CHECK(edges == std::set<std::pair<ElementId, ElementId>>{{a, b}, {a2, b}});
    }
    TEST_CASE("relationship added to the original later is mirrored") {
        Fixture f;
        auto a = f.cls("A");
        auto b = f.cls("B");
        auto a2 = f.doc.shallow_copy({a}, f.board, {0, 300}, kBlue, 2).at(a);
        f.rel(a, b, RelationshipKind::Dependency);
        int mirrored = 0;
        for (const auto& [id, r] : f.doc.relationships()) {
            if (r.source == a2 && r.target == b && r.kind == RelationshipKind::Dependency) ++mirrored;
        }
        CHECK(mirrored == 1);
    }
    TEST_CASE("clone of a clone links to the root origin only") {
        Fixture f;
        auto o = f.cls("O");
        auto k1 = f.doc.shallow_copy({o}, f.board, {0, 200}, kBlue, 2).at(o);
        auto k2 = f.doc.shallow_copy({k1}, f.board, {0, 400}, kBlue, 3).at(k1);
        CHECK(f.doc.find_class(k2)->origin_id == o);
        f.doc.edit_class(o, change::SetName{"P"}, kBlue, 4);
        CHECK(f.doc.find_class(k1)->name == "P");
        CHECK(f.doc.find_class(k2)->name == "P");
    }
    TEST_CASE("unknown cluster member") {
        Fixture f;
        CHECK(code_of([&] { f.doc.deep_copy({ElementId{"e40"}}, f.board, {}, kBlue, 1); }) == ErrorCode::UnknownElement);
    }
}

TEST_CASE("property: random op sequences keep referential integrity and mirror soundness") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        oracle::Rng rng(seed);
        ModelDocument doc("prop");
        std::vector<WhiteboardId> boards{doc.add_whiteboard("A", {}, 1000, 750), doc.add_whiteboard("B", {}, 1000, 750)};
        for (int step = 0; step < 300; ++step) {
            std::vector<ElementId> classes;
            for (const auto& [id, c] : doc.elements()) classes.push_back(id);
            std::vector<ElementId> rels;
            for (const auto& [id, r] : doc.relationships()) rels.push_back(id);
            auto any_class = [&] { return classes[static_cast<std::size_t>(rng.integer(0, static_cast<int>(classes.size()) - 1))]; };
            const auto& board = boards[static_cast<std::size_t>(rng.integer(0, 1))];
            OpBody body;
            const int roll = rng.integer(0, 99);
            if (classes.size() < 3 || roll < 20) {
                body = body::CreateClass{board, {rng.real(0, 800), rng.real(0, 600), rng.real(15, 150), rng.real(15, 120)}};
            } else if (roll < 45) {
                ClassChange ch;
                switch (rng.integer(0, 4)) {
                case 0: ch = change::SetName{"N" + std::to_string(rng.integer(0, 9))}; break;
                case 1: ch = change::AddAttribute{{Visibility::Private, "f" + std::to_string(step), "Int"}}; break;
                case 2: ch = change::RemoveAttribute{static_cast<std::size_t>(rng.integer(0, 2))}; break;
                case 3: ch = change::AddMethod{{Visibility::Public, "m", {{"x", "Int"}}, "Int"}}; break;
                default: ch = change::SetStereotype{std::string("entity")}; break;
                }
                body = body::EditClass{any_class(), ch};
            } else if (roll < 60) {
                body = body::CreateRelationship{{static_cast<RelationshipKind>(rng.integer(0, 4)), any_class(), any_class(), "", "", "", {}}};
            } else if (roll < 70) {
                body = body::DeleteElement{rng.integer(0, 3) == 0 && !rels.empty() ? rels[0] : any_class()};
            } else if (roll < 85) {
                body = body::CopyCluster{rng.integer(0, 1) == 1, {any_class(), any_class()}, board, {5, 5}};
            } else if (roll < 95) {
                body = body::CreatePackage{"p", {any_class()}};
            } else {
                body = body::PackageMember{doc.packages().empty() ? ElementId{"e1"} : doc.packages().begin()->first, any_class(), rng.integer(0, 1) == 1};
            }
            apply_body(doc, body, kBlue, step);
            const auto problems = doc.integrity_problems();
            if (!problems.empty()) {
                FAIL("seed " << seed << " step " << step << ": " << problems.front());
            }
            for (const auto& [id, c] : doc.elements()) {
                if (c.origin_id) {
                    const auto* origin = doc.find_class(*c.origin_id);
                    REQUIRE(origin);
                    CHECK(members(c) == members(*origin));
                    CHECK(*c.origin_id != id);
                }
            }
        }
    }
}
