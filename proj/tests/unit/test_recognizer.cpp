#include "modelsync/materialize.hpp"
#include "modelsync/recognizer.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace modelsync;

namespace {

std::vector<ClassFootprint> footprints(const std::vector<Rect>& rects) {
    std::vector<ClassFootprint> out;
    for (std::size_t i = 0; i < rects.size(); ++i) {
        out.push_back({ElementId{"e" + std::to_string(i + 1)}, rects[i]});
    }
    return out;
}

template <class T>
bool is(const RecognitionResult& r) {
    return std::holds_alternative<T>(r);
}

} // namespace

TEST_SUITE("resample_stroke") {
    TEST_CASE("decimation keeps first, spaced and final points") {
        RecognizerConfig cfg;
        cfg.max_gap = 1000; // isolate pass 1
        const std::vector<Point> raw{{0, 0}, {0.5, 0}, {1.0, 0}, {3.0, 0}};
        CHECK(resample_stroke(raw, cfg) == std::vector<Point>{{0, 0}, {3.0, 0}});
    }
    TEST_CASE("densification splits long gaps evenly") {
        RecognizerConfig cfg;
        cfg.min_point_dist = 2;
        cfg.max_gap = 4;
        const std::vector<Point> raw{{0, 0}, {10, 0}};
        auto out = resample_stroke(raw, cfg);
        REQUIRE(out.size() == 4);
        CHECK(out[1].x == doctest::Approx(10.0 / 3));
        CHECK(out[2].x == doctest::Approx(20.0 / 3));
        for (std::size_t i = 1; i < out.size(); ++i) CHECK(distance(out[i - 1], out[i]) <= 4.0);
    }
    TEST_CASE("points already spaced at the minimum are a fixpoint") {
        std::vector<Point> raw;
        for (int i = 0; i < 20; ++i) raw.push_back({2.0 * i, 0});
        CHECK(resample_stroke(raw) == raw);
    }
    TEST_CASE("too few points and bad configs") {
        const std::vector<Point> one{{1, 1}};
        CHECK_THROWS_AS(resample_stroke(one), Error);
        RecognizerConfig bad;
        bad.min_point_dist = 0;
        CHECK_THROWS_AS(bad.validate(), Error);
        bad = {};
        bad.max_gap = 1.5;
        CHECK_THROWS_AS(bad.validate(), Error);
    }
    TEST_CASE("property: idempotent, endpoints exact, spacing bounded") {
        oracle::Rng rng(99);
        for (int n = 0; n < 500; ++n) {
            std::vector<Point> raw;
            const int count = rng.integer(2, 60);
            Point p{rng.real(0, 1000), rng.real(0, 750)};
            for (int i = 0; i < count; ++i) {
                raw.push_back(p);
                p = {p.x + rng.real(-30, 30), p.y + rng.real(-30, 30)};
            }
            const auto once = resample_stroke(raw);
            CHECK(resample_stroke(once) == once);
            CHECK(once.front() == raw.front());
            CHECK(once.back() == raw.back());
            for (std::size_t i = 1; i < once.size(); ++i) CHECK(distance(once[i - 1], once[i]) <= 10.0 + 1e-9);
            for (std::size_t i = 1; i + 1 < once.size(); ++i) CHECK(distance(once[i - 1], once[i]) >= 2.0 - 1e-9);
        }
    }
}

TEST_SUITE("classify_stroke") {
    TEST_CASE("closed square becomes a class with its bounding box") {
        const std::vector<Point> pts{{0, 0}, {100, 0}, {100, 80}, {0, 80}, {2, 1}};
        auto r = classify_stroke(pts, {});
        REQUIRE(is<recognition::ClassShape>(r));
        CHECK(std::get<recognition::ClassShape>(r).bounds == Rect{0, 0, 100, 80});
        CHECK(closure_tolerance(pts) == doctest::Approx(6.403).epsilon(0.001));
    }
    TEST_CASE("class to class is a relationship with interior waypoints") {
        auto fp = footprints({{0, 0, 100, 100}, {300, 0, 100, 100}});
        const std::vector<Point> pts{{50, 50}, {200, 80}, {350, 50}};
        auto r = classify_stroke(pts, fp);
        REQUIRE(is<recognition::RelationshipLine>(r));
        const auto& line = std::get<recognition::RelationshipLine>(r);
        CHECK(line.source == ElementId{"e1"});
        CHECK(line.target == ElementId{"e2"});
        CHECK(line.waypoints == std::vector<Point>{{200, 80}});
    }
    TEST_CASE("open stroke ending in empty space is informal") {
        auto fp = footprints({{0, 0, 100, 100}});
        const std::vector<Point> pts{{50, 50}, {200, 80}, {400, 300}};
        CHECK(is<recognition::InformalSketch>(classify_stroke(pts, fp)));
    }
    TEST_CASE("closed loop inside one class is a class shape") {
        auto fp = footprints({{0, 0, 300, 300}});
        const std::vector<Point> pts{{50, 50}, {150, 50}, {150, 150}, {50, 150}, {51, 51}};
        CHECK(is<recognition::ClassShape>(classify_stroke(pts, fp)));
    }
    TEST_CASE("same start and end class never yields a self relationship") {
        auto fp = footprints({{0, 0, 100, 100}});
        const std::vector<Point> pts{{10, 10}, {300, 300}, {90, 90}};
        CHECK(is<recognition::InformalSketch>(classify_stroke(pts, fp)));
    }
    TEST_CASE("topmost class wins on overlap") {
        auto fp = footprints({{0, 0, 200, 200}, {50, 50, 100, 100}, {400, 0, 100, 100}});
        const std::vector<Point> pts{{60, 60}, {450, 50}};
        auto r = classify_stroke(pts, fp);
        REQUIRE(is<recognition::RelationshipLine>(r));
        CHECK(std::get<recognition::RelationshipLine>(r).source == ElementId{"e2"});
    }
    TEST_CASE("tiny closed loop is informal") {
        const std::vector<Point> pts{{0, 0}, {10, 0}, {10, 10}, {0, 10}, {0, 1}};
        CHECK(is<recognition::InformalSketch>(classify_stroke(pts, {})));
    }
    TEST_CASE("fuzz: total, and class bounds equal the bounding box") {
        oracle::Rng rng(7);
        auto fp = footprints(oracle::corpus_classes());
        for (int n = 0; n < 2000; ++n) {
            std::vector<Point> pts;
            const int count = rng.integer(2, 40);
            for (int i = 0; i < count; ++i) pts.push_back({rng.real(0, 1000), rng.real(0, 750)});
            if (rng.integer(0, 2) == 0) pts.back() = {pts.front().x + 1, pts.front().y};
            auto r = classify_stroke(pts, fp);
            if (auto* c = std::get_if<recognition::ClassShape>(&r)) {
                CHECK(c->bounds == bounding_box(pts));
            }
        }
    }
}

TEST_SUITE("materialize") {
    struct Doc {
        ModelDocument doc{"m"};
        WhiteboardId board = doc.add_whiteboard("Main", {}, 1000, 750);
        ActorId actor{"a1"};
        Stroke stroke(std::vector<Point> pts) { return Stroke{ElementId{}, board, std::move(pts), actor, 0, 10}; }
    };
    TEST_CASE("class shape creates one class at the stroke bounds") {
        Doc d;
        auto s = d.stroke({{10, 10}, {110, 10}, {110, 90}, {10, 90}, {11, 11}});
        std::size_t errors = 0;
        auto out = materialize_into(d.doc, recognize(s, d.doc), s, d.actor, 10, errors);
        CHECK(out.outcome.ok);
        REQUIRE(d.doc.elements().size() == 1);
        CHECK(d.doc.elements().begin()->second.bounds == Rect{10, 10, 100, 80});
        CHECK(errors == 0);
    }
    TEST_CASE("relationship line defaults to association and asks for the kind") {
        Doc d;
        auto a = d.doc.create_class(d.board, {0, 0, 100, 100}, d.actor, 0);
        auto b = d.doc.create_class(d.board, {300, 0, 100, 100}, d.actor, 0);
        auto s = d.stroke({{50, 50}, {350, 50}});
        auto m = materialize(recognize(s, d.doc), s);
        CHECK(m.needs_kind_picker);
        const auto* body = std::get_if<body::CreateRelationship>(&m.body);
        REQUIRE(body);
        CHECK(body->spec.kind == RelationshipKind::Association);
        CHECK(body->spec.source == a);
        CHECK(body->spec.target == b);
    }
    TEST_CASE("informal sketch is stored verbatim") {
        Doc d;
        const std::vector<Point> pts{{10, 10}, {40, 60}, {90, 20}, {200, 300}};
        auto s = d.stroke(pts);
        std::size_t errors = 0;
        materialize_into(d.doc, recognize(s, d.doc), s, d.actor, 10, errors);
        CHECK(d.doc.elements().empty());
        REQUIRE(d.doc.strokes().size() == 1);
        CHECK(d.doc.strokes().begin()->second.points == pts);
    }
    TEST_CASE("rejected materialization counts as a syntactic error") {
        Doc d;
        // A closed loop hanging off the board edge.
        auto s = d.stroke({{950, 700}, {1100, 700}, {1100, 800}, {950, 800}, {951, 701}});
        std::size_t errors = 0;
        auto out = materialize_into(d.doc, recognize(s, d.doc), s, d.actor, 10, errors);
        CHECK_FALSE(out.outcome.ok);
        CHECK(errors == 1);
    }
}
