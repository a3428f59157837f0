#include "modelsync/session.hpp"
#include "modelsync/snapshot.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>

using namespace modelsync;
using nlohmann::json;

namespace {

struct Client {
    std::vector<json> inbox;
    Sink sink() {
        return [this](const std::string& line) {
            CHECK(line.find('\n') == std::string::npos);
            inbox.push_back(json::parse(line));
        };
    }
    std::vector<json> of(const std::string& type) const {
        std::vector<json> out;
        for (const auto& m : inbox) {
            if (m["t"] == type) out.push_back(m);
        }
        return out;
    }
};

struct Harness {
    Millis now = 0;
    Session session{"s1", [this] { return now; }};
    std::map<ConnectionId, Client> clients;

    void hello(ConnectionId c, const std::string& name, std::optional<std::string> resume = std::nullopt) {
        json h{{"t", "hello"}, {"session", "s1"}, {"name", name}, {"proto", 1}};
        if (resume) h["actor"] = *resume;
        session.handle(c, h.dump(), clients[c].sink());
    }
    void send(ConnectionId c, const json& msg) { session.handle(c, msg.dump(), clients[c].sink()); }
    json op(std::uint64_t cseq, const json& body) { return json{{"t", "op"}, {"cseq", cseq}, {"body", body}}; }
};

json board_body() { return json{{"kind", "add_whiteboard"}, {"name", "Main"}}; }

json presence_msg(const std::string& act, double x, Millis ts) {
    return json{{"t", "presence"}, {"board", "b1"}, {"cursor", {x, 1}}, {"pos", {0, 1.7, 0}},
                {"gaze", nullptr},  {"act", act},   {"ts", ts}};
}

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("modelsync-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("join") {
    TEST_CASE("welcome carries snapshot and palette colors in join order") {
        Harness h;
        h.hello(1, "blue");
        h.hello(2, "green");
        const auto palette = default_palette();
        auto w1 = h.clients[1].of("welcome").at(0);
        auto w2 = h.clients[2].of("welcome").at(0);
        CHECK(w1["color"] == wire::color(palette[0]));
        CHECK(w2["color"] == wire::color(palette[1]));
        CHECK(w1["actor"] != w2["actor"]);
        CHECK(w1["model"]["format"] == "modelsync");
        CHECK(w1.contains("seq"));
        // Peer is told about the newcomer, newcomer sees the roster.
        CHECK(h.clients[1].of("join").size() == 1);
        CHECK(w2["peers"].size() == 1);
    }
    TEST_CASE("seventeenth concurrent joiner is refused") {
        Harness h;
        for (ConnectionId c = 1; c <= 16; ++c) h.hello(c, "u" + std::to_string(c));
        h.hello(17, "late");
        auto errs = h.clients[17].of("err");
        REQUIRE(errs.size() == 1);
        CHECK(errs[0]["code"] == "SessionFull");
    }
    TEST_CASE("empty name") {
        Harness h;
        h.hello(1, "");
        CHECK(h.clients[1].of("err").at(0)["code"] == "NameEmpty");
    }
    TEST_CASE("rejoin with the actor token keeps the color") {
        Harness h;
        h.hello(1, "blue");
        const auto w = h.clients[1].of("welcome").at(0);
        h.send(1, h.op(1, board_body()));
        h.session.leave(1);
        CHECK(h.clients[1].of("bye").empty()); // not sent to the leaver
        h.hello(5, "blue", w["actor"].get<std::string>());
        auto again = h.clients[5].of("welcome").at(0);
        CHECK(again["actor"] == w["actor"]);
        CHECK(again["color"] == w["color"]);
        CHECK(again["model"]["whiteboards"].size() == 1);
    }
    TEST_CASE("protocol mismatch") {
        Harness h;
        h.session.handle(1, R"({"t":"hello","session":"s1","name":"x","proto":9})", h.clients[1].sink());
        CHECK(h.clients[1].of("err").at(0)["code"] == "FormatVersionMismatch");
    }
}

TEST_SUITE("submit") {
    TEST_CASE("every connection gets each sequenced op exactly once") {
        Harness h;
        h.hello(1, "blue");
        h.hello(2, "green");
        h.hello(3, "red");
        h.send(1, h.op(1, board_body()));
        h.send(2, h.op(1, json{{"kind", "create_class"}, {"board", "b1"}, {"bounds", {10, 10, 100, 80}}}));
        for (ConnectionId c = 1; c <= 3; ++c) {
            auto ops = h.clients[c].of("op");
            REQUIRE(ops.size() == 2);
            CHECK(ops[0]["seq"] == 1);
            CHECK(ops[1]["seq"] == 2);
        }
        CHECK(h.clients[1].of("ack").at(0)["seq"] == 1);
        CHECK(h.clients[2].of("ack").at(0)["seq"] == 2);
        CHECK(h.clients[3].of("ack").empty());
    }
    TEST_CASE("duplicate client seq is acked without rebroadcast") {
        Harness h;
        h.hello(1, "blue");
        h.hello(2, "green");
        h.send(1, h.op(1, board_body()));
        h.send(1, h.op(1, board_body()));
        CHECK(h.clients[1].of("ack").size() == 2);
        CHECK(h.clients[1].of("ack").at(1)["seq"] == 1);
        CHECK(h.clients[2].of("op").size() == 1);
        CHECK(h.session.oplog().size() == 1);
    }
    TEST_CASE("submit without joining") {
        Harness h;
        h.send(9, h.op(1, board_body()));
        CHECK(h.clients[9].of("err").at(0)["code"] == "NotJoined");
        h.hello(1, "blue");
        h.session.leave(1);
        CHECK_THROWS_AS(h.session.submit(1, Operation{std::nullopt, ActorId{}, 2, body::AddWhiteboard{}, 0}), Error);
    }
    TEST_CASE("malformed messages get an error reply") {
        Harness h;
        h.hello(1, "blue");
        h.session.handle(1, "{nope", h.clients[1].sink());
        h.send(1, json{{"t", "op"}, {"cseq", 1}, {"body", {{"kind", "teleport"}}}});
        h.send(1, json{{"t", "dance"}});
        CHECK(h.clients[1].of("err").size() == 3);
        CHECK(h.session.oplog().empty());
    }
    TEST_CASE("the sequenced op is stamped with the session clock") {
        Harness h;
        h.hello(1, "blue");
        h.now = 1234;
        h.send(1, json{{"t", "op"}, {"cseq", 1}, {"body", board_body()}, {"ts", 99}});
        CHECK(h.clients[1].of("op").at(0)["ts"] == 1234);
    }
}

TEST_SUITE("presence") {
    TEST_CASE("100 updates in one second reach peers at most 10 times, last state wins") {
        Harness h;
        h.hello(1, "blue");
        h.hello(2, "green");
        for (int i = 0; i < 100; ++i) {
            h.now = i * 10;
            h.send(1, presence_msg("drawing", i, h.now));
            h.session.tick();
        }
        h.now = 1000;
        h.session.tick();
        h.now = 2000;
        h.session.tick();
        auto got = h.clients[2].of("presence");
        CHECK(got.size() <= 10);
        REQUIRE_FALSE(got.empty());
        CHECK(got.back()["cursor"][0] == 99);
        CHECK(h.clients[1].of("presence").empty());
        CHECK(h.session.oplog().empty());
    }
    TEST_CASE("staleness stays within one interval") {
        // The peer's view is stale from the first update it has not seen;
        // with ticks at every millisecond that age never exceeds 100 ms.
        Harness h;
        h.hello(1, "blue");
        h.hello(2, "green");
        std::vector<Millis> updates;
        for (Millis t = 0; t <= 3000; ++t) {
            h.now = t;
            if (t % 7 == 0 && t < 2500) {
                h.send(1, presence_msg("looking", static_cast<double>(t), t));
                updates.push_back(t);
            }
            h.session.tick();
            auto got = h.clients[2].of("presence");
            const Millis seen = got.empty() ? -1 : got.back()["ts"].get<Millis>();
            auto unseen = std::upper_bound(updates.begin(), updates.end(), seen);
            const Millis age = unseen == updates.end() ? 0 : t - *unseen;
            CHECK(age <= kPresenceIntervalMillis);
        }
    }
    TEST_CASE("activity round-trips verbatim and fields are exact") {
        Harness h;
        h.hello(1, "blue");
        h.hello(2, "green");
        h.send(1, presence_msg("speaking", 5, 0));
        h.now = 100;
        h.session.tick();
        auto got = h.clients[2].of("presence").at(0);
        CHECK(got["act"] == "speaking");
        for (auto key : {"t", "actor", "board", "cursor", "pos", "gaze", "act", "ts"}) CHECK(got.contains(key));
        CHECK(got.size() == 8);
        h.send(1, presence_msg("juggling", 5, 1));
        CHECK(h.clients[1].of("err").size() == 1);
    }
}

TEST_SUITE("persistence") {
    TEST_CASE("save, load, digest equal; suffix replay") {
        auto dir = temp_dir("persist");
        Harness h;
        h.hello(1, "blue");
        h.send(1, h.op(1, board_body()));
        h.send(1, h.op(2, json{{"kind", "create_class"}, {"board", "b1"}, {"bounds", {10, 10, 100, 80}}}));
        h.session.persist_snapshot(dir / "s1.json");
        auto loaded = Session::load_snapshot(dir / "s1.json", "s1", [] { return Millis{0}; });
        CHECK(state_digest(loaded.replica()) == state_digest(h.session.replica()));
        CHECK(loaded.oplog().last_seq() == 2);

        // Snapshot at seq 2, log continues to seq 4.
        h.session.attach_oplog_file(dir / "s1.oplog.ndjson");
        h.send(1, h.op(3, json{{"kind", "edit_class"}, {"id", "e2"}, {"change", {{"op", "set_name"}, {"name", "Movie"}}}}));
        h.send(1, h.op(4, json{{"kind", "delete_element"}, {"id", "e2"}}));
        auto resumed = Session::load_snapshot(dir / "s1.json", "s1", [] { return Millis{0}; });
        CHECK(resumed.replica().applied_seq() == 4);
        CHECK(state_digest(resumed.replica()) == state_digest(h.session.replica()));
        std::filesystem::remove_all(dir);
    }
    TEST_CASE("version 99 is refused") {
        auto dir = temp_dir("version");
        auto j = document_to_json(ModelDocument{"s1"});
        j["version"] = 99;
        write_file(dir / "s1.json", j.dump());
        try {
            Session::load_snapshot(dir / "s1.json", "s1", [] { return Millis{0}; });
            FAIL("expected FormatVersionMismatch");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::FormatVersionMismatch);
        }
        CHECK_THROWS_AS(Session::load_snapshot(dir / "missing.json", "s1", [] { return Millis{0}; }), Error);
        std::filesystem::remove_all(dir);
    }
    TEST_CASE("hub snapshots on last disconnect and restores on reopen") {
        auto dir = temp_dir("hub");
        Millis now = 0;
        std::string digest;
        {
            SessionHub hub([&] { return now; }, dir, default_palette());
            Client c;
            hub.handle(1, R"({"t":"hello","session":"cinema","name":"blue","proto":1})", c.sink());
            hub.handle(1, R"({"t":"op","cseq":1,"body":{"kind":"add_whiteboard","name":"Main"}})", c.sink());
            digest = state_digest(hub.find("cinema")->replica());
            hub.disconnect(1);
            CHECK(std::filesystem::exists(dir / "cinema.json"));
            CHECK(std::filesystem::exists(dir / "cinema.oplog.ndjson"));
        }
        SessionHub hub([&] { return now; }, dir, default_palette());
        Client c;
        hub.handle(2, R"({"t":"hello","session":"cinema","name":"green","proto":1})", c.sink());
        CHECK(state_digest(hub.find("cinema")->replica()) == digest);
        CHECK(c.of("welcome").at(0)["seq"] == 1);
        hub.handle(3, R"({"t":"hello","session":"../etc","name":"x","proto":1})", c.sink());
        CHECK(c.of("err").size() == 1);
        std::filesystem::remove_all(dir);
    }
    TEST_CASE("hub routes sessions independently") {
        Millis now = 0;
        SessionHub hub([&] { return now; });
        Client a, b;
        hub.handle(1, R"({"t":"hello","session":"one","name":"x","proto":1})", a.sink());
        hub.handle(2, R"({"t":"hello","session":"two","name":"y","proto":1})", b.sink());
        hub.handle(1, R"({"t":"op","cseq":1,"body":{"kind":"add_whiteboard","name":"Main"}})", a.sink());
        CHECK(hub.session_count() == 2);
        CHECK(a.of("op").size() == 1);
        CHECK(b.of("op").empty());
        hub.handle(3, R"({"t":"op","cseq":1,"body":{}})", a.sink());
        CHECK(a.of("err").size() == 1);
    }
}
