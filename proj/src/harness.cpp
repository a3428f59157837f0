#include "modelsync/harness.hpp"

#include "modelsync/materialize.hpp"
#include "modelsync/metrics.hpp"
#include "modelsync/snapshot.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <random>
#include <set>

namespace modelsync {

using nlohmann::json;
namespace jio = jsonio;

namespace {

constexpr Millis kRetryMillis = 20;
constexpr Millis kBlockTimeoutMillis = 120'000;

const std::set<std::string> kActions{"join",   "board",  "stroke",  "relate",   "edit",
                                     "copy",   "delete", "package", "presence", "teleport",
                                     "idle",   "random", "wait_for"};

// Portable draws on top of mt19937_64, whose output sequence is fixed by
// the standard (the std distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) {
            return lo;
        }
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(gen_() % span);
    }
    double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    double real(double lo, double hi) { return lo + (hi - lo) * unit(); }
    bool chance(double p) { return unit() < p; }
    template <class C>
    const auto& pick(const C& c) {
        return c[static_cast<std::size_t>(range(0, static_cast<std::int64_t>(c.size()) - 1))];
    }

private:
    std::mt19937_64 gen_;
};

const std::vector<std::string> kWords{"Movie",  "Screening", "Hall",    "Seat",    "Ticket",
                                      "Customer", "Booking", "Payment", "Cinema",  "Show",
                                      "Genre",  "Actor",     "Review",  "Voucher", "Row"};
const std::vector<std::string> kTypes{"String", "Int", "Date", "Money", "Bool"};
const std::vector<std::string> kCards{"", "1", "0..1", "*", "1..*", "0..*"};

std::vector<Point> rectangle_stroke(Rect r, double step = 6.0) {
    std::vector<Point> pts;
    const Point corners[] = {{r.x, r.y}, {r.x + r.w, r.y}, {r.x + r.w, r.y + r.h}, {r.x, r.y + r.h}, {r.x, r.y}};
    for (int side = 0; side < 4; ++side) {
        const Point a = corners[side];
        const Point b = corners[side + 1];
        const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / step)));
        for (int k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) / n;
            pts.push_back({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
        }
    }
    // End just short of the start, the way a hand closes a loop.
    pts.push_back({r.x + 1.0, r.y + 1.0});
    return pts;
}

std::vector<Point> segment_stroke(Point a, Point b, double step = 6.0) {
    std::vector<Point> pts;
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / step)));
    for (int k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / n;
        pts.push_back({a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t});
    }
    return pts;
}

MemberField parse_field(const json& j) { return jio::member_field(j); }

} // namespace

Scenario scenario_from_json(const json& j) {
    try {
        Scenario s;
        s.name = jio::get_or<std::string>(j, "name", "scenario");
        s.seed = jio::get_or<std::uint64_t>(j, "seed", 1);
        if (auto it = j.find("network"); it != j.end()) {
            s.network.latency_ms = jio::get_or<Millis>(*it, "latency_ms", 0);
            s.network.jitter_ms = jio::get_or<Millis>(*it, "jitter_ms", 0);
            s.network.duplicate = jio::get_or<bool>(*it, "duplicate", false);
        }
        if (auto it = j.find("boards"); it != j.end()) {
            s.boards.clear();
            for (const auto& b : *it) {
                s.boards.push_back({jio::get<std::string>(b, "name"),
                                    b.contains("pose") ? jio::pose(b["pose"]) : Pose{},
                                    jio::get_or<double>(b, "width", kDefaultBoardWidth),
                                    jio::get_or<double>(b, "height", kDefaultBoardHeight)});
            }
        }
        for (const auto& b : jio::field(j, "bots")) {
            BotScript bot{jio::get<std::string>(b, "name"), {}};
            for (const auto& a : jio::get_or<json>(b, "actions", json::array())) {
                const auto kind = jio::get<std::string>(a, "do");
                if (!kActions.count(kind)) {
                    throw Error(ErrorCode::ScriptError, "unknown action '" + kind + "' for bot " + bot.name);
                }
                bot.actions.push_back(a);
            }
            s.bots.push_back(std::move(bot));
        }
        if (s.network.latency_ms < 0 || s.network.jitter_ms < 0) {
            throw Error(ErrorCode::ScriptError, "latency and jitter must be non-negative");
        }
        return s;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ScriptError) {
            throw;
        }
        throw Error(ErrorCode::ScriptError, e.what());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ScriptError, e.what());
    }
}

json scenario_to_json(const Scenario& s) {
    json boards = json::array();
    for (const auto& b : s.boards) {
        boards.push_back(json{{"name", b.name}, {"pose", jio::pose(b.pose)}, {"width", b.width}, {"height", b.height}});
    }
    json bots = json::array();
    for (const auto& b : s.bots) {
        bots.push_back(json{{"name", b.name}, {"actions", b.actions}});
    }
    return json{{"name", s.name},
                {"seed", s.seed},
                {"network", {{"latency_ms", s.network.latency_ms},
                             {"jitter_ms", s.network.jitter_ms},
                             {"duplicate", s.network.duplicate}}},
                {"boards", boards},
                {"bots", bots}};
}

Scenario random_scenario(std::size_t clients, std::size_t ops, NetworkModel network, std::uint64_t seed) {
    Scenario s;
    s.name = "random";
    s.seed = seed;
    s.network = network;
    s.boards = {{"Main", {0, 0, 0, 0}, kDefaultBoardWidth, kDefaultBoardHeight},
                {"Detail", {3, 0, 0, 1.5707963267948966}, kDefaultBoardWidth, kDefaultBoardHeight}};
    for (std::size_t i = 0; i < clients; ++i) {
        s.bots.push_back({"bot" + std::to_string(i + 1),
                          {json{{"do", "join"}},
                           json{{"do", "random"}, {"count", ops}, {"interval_ms", json::array({40, 160})}}}});
    }
    return s;
}

json report_to_json(const RunReport& r) {
    json bots = json::array();
    for (const auto& b : r.bots) {
        bots.push_back(json{{"name", b.name},
                            {"actor", b.actor},
                            {"completion_ms", b.completion_ms},
                            {"ops_issued", b.ops_issued},
                            {"ops_applied", b.ops_applied},
                            {"syntactic_errors", b.syntactic_errors},
                            {"presence_received", b.presence_received},
                            {"digest", b.digest},
                            {"noop_digest", b.noop_digest}});
    }
    json noops = json::array();
    for (const auto& n : r.server_noops) {
        noops.push_back(json{{"seq", n.seq},
                             {"actor", n.actor.str()},
                             {"cseq", n.client_seq},
                             {"code", std::string(error_code_name(n.code))}});
    }
    json stats = nullptr;
    if (!r.bots.empty()) {
        std::vector<TaskResult> tasks;
        for (const auto& b : r.bots) {
            tasks.push_back({b.completion_ms, static_cast<std::size_t>(b.syntactic_errors)});
        }
        const auto st = session_stats(tasks);
        stats = json{{"mean_completion", format_minutes(st.mean_duration_ms)},
                     {"median_completion", format_minutes(st.median_duration_ms)},
                     {"mean_errors", st.mean_errors}};
    }
    return json{{"scenario", r.scenario},
                {"seed", r.seed},
                {"stats", stats},
                {"bots", bots},
                {"syntactic_error_count", r.syntactic_error_count},
                {"ops_issued", r.ops_issued},
                {"ops_sequenced", r.ops_sequenced},
                {"converged", r.converged},
                {"quiescence_ms", r.quiescence_ms},
                {"server_digest", r.server_digest},
                {"server_noop_digest", r.server_noop_digest},
                {"noops", noops}};
}

namespace {

std::string noop_digest(const std::vector<NoOpRecord>& noops) {
    std::string text;
    for (const auto& n : noops) {
        text += std::to_string(n.seq) + ':' + n.actor.str() + ':' + std::to_string(n.client_seq) + ':' +
                std::string(error_code_name(n.code)) + '\n';
    }
    return sha256_hex(text);
}

} // namespace

struct Simulation::Impl {
    struct Event {
        Millis time;
        std::uint64_t order;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.time != b.time ? a.time > b.time : a.order > b.order;
        }
    };

    enum class Step { Done, Retry, Wait };

    struct Bot {
        BotScript script;
        ConnectionId conn = 0;
        Rng rng{0};
        std::size_t next_action = 0;
        int phase = 0;
        Millis blocked_since = -1;
        bool welcomed = false;
        bool hello_sent = false;
        ActorId actor;
        Replica replica;
        std::vector<Operation> early;
        std::uint64_t next_cseq = 1;
        std::map<std::uint64_t, std::vector<ElementId>> created;
        std::set<std::uint64_t> applied_own;
        std::map<std::string, ElementId> name_cache;
        std::optional<std::uint64_t> waiting_cseq;
        std::uint64_t ops_issued = 0;
        std::uint64_t presence_received = 0;
        std::int64_t random_left = -1;
        Millis last_own_applied = 0;
        Millis finished_at = 0;
        bool finished = false;
        WhiteboardId current_board;
    };

    Scenario scenario;
    Rng net_rng;
    Millis now = 0;
    std::uint64_t order = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue;
    std::set<Millis> tick_times;
    Session session;
    std::vector<Bot> bots;

    explicit Impl(Scenario s)
        : scenario(std::move(s)),
          net_rng(scenario.seed),
          session(scenario.name, [this] { return now; }) {
        for (std::size_t i = 0; i < scenario.bots.size(); ++i) {
            Bot b;
            b.script = scenario.bots[i];
            b.conn = i + 1;
            b.rng = Rng(scenario.seed * 1000003ULL + i + 1);
            bots.push_back(std::move(b));
        }
    }

    void at(Millis t, std::function<void()> fn) { queue.push({t, order++, std::move(fn)}); }

    Millis delay() {
        const auto& n = scenario.network;
        return std::max<Millis>(0, n.latency_ms + net_rng.range(-n.jitter_ms, n.jitter_ms));
    }

    void after_server_activity() {
        if (auto due = session.tick(); due && !tick_times.count(*due)) {
            tick_times.insert(*due);
            at(*due, [this, t = *due] {
                tick_times.erase(t);
                after_server_activity();
            });
        }
    }

    Sink sink_for(std::size_t i) {
        return [this, i](const std::string& line) {
            const int copies = scenario.network.duplicate ? 2 : 1;
            for (int c = 0; c < copies; ++c) {
                at(now + delay(), [this, i, line] { receive(i, line); });
            }
        };
    }

    void send(std::size_t i, const json& msg) {
        const auto line = wire::line(msg);
        const int copies = scenario.network.duplicate ? 2 : 1;
        for (int c = 0; c < copies; ++c) {
            at(now + delay(), [this, i, line] {
                session.handle(bots[i].conn, line, sink_for(i));
                after_server_activity();
            });
        }
    }

    void apply_at_bot(Bot& b, const Operation& op) {
        for (const auto& applied : b.replica.apply(op)) {
            if (applied.op.actor == b.actor) {
                b.created[applied.op.client_seq] = applied.outcome.created;
                b.applied_own.insert(applied.op.client_seq);
                b.last_own_applied = now;
            }
        }
    }

    void receive(std::size_t i, const std::string& line) {
        Bot& b = bots[i];
        const auto msg = json::parse(line);
        const auto type = msg.value("t", std::string());
        if (type == "welcome") {
            if (b.welcomed) {
                return;
            }
            b.welcomed = true;
            b.actor = ActorId(msg["actor"].get<std::string>());
            b.replica = Replica(document_from_json(msg["model"]));
            for (const auto& op : b.early) {
                apply_at_bot(b, op);
            }
            b.early.clear();
        } else if (type == "op") {
            auto op = op_from_json(msg);
            if (!b.welcomed) {
                b.early.push_back(std::move(op));
            } else {
                apply_at_bot(b, op);
            }
        } else if (type == "presence") {
            ++b.presence_received;
        }
    }

    std::uint64_t submit(std::size_t i, OpBody body) {
        Bot& b = bots[i];
        const auto cseq = b.next_cseq++;
        ++b.ops_issued;
        send(i, json{{"t", "op"}, {"actor", b.actor.str()}, {"cseq", cseq}, {"body", body_to_json(body)}, {"ts", now}});
        return cseq;
    }

    void send_presence(std::size_t i, Activity act, std::optional<ElementId> gaze = std::nullopt) {
        Bot& b = bots[i];
        PresenceState p;
        p.actor = b.actor;
        p.board = b.current_board;
        p.cursor = {b.rng.real(0, 1000), b.rng.real(0, 750)};
        p.scene_pos = {b.rng.real(-2, 2), 1.7, b.rng.real(-2, 2)};
        p.gaze = std::move(gaze);
        p.activity = act;
        p.updated_at = now;
        send(i, wire::presence(p));
    }

    // --- name resolution against the bot's own replica -------------------

    std::optional<ElementId> resolve_class(Bot& b, const std::string& name) {
        if (auto it = b.name_cache.find(name); it != b.name_cache.end()) {
            return it->second;
        }
        for (const auto& [id, c] : b.replica.document().elements()) {
            if (c.name == name) {
                b.name_cache[name] = id;
                return id;
            }
        }
        return std::nullopt;
    }

    std::optional<WhiteboardId> resolve_board(const Bot& b, const json& a) {
        const auto name = jio::get_or<std::string>(a, "board", "");
        for (const auto& [id, wb] : b.replica.document().whiteboards()) {
            if (name.empty() || wb.name == name) {
                return id;
            }
        }
        return std::nullopt;
    }

    std::optional<std::vector<ElementId>> own_result(Bot& b) {
        if (!b.waiting_cseq || !b.applied_own.count(*b.waiting_cseq)) {
            return std::nullopt;
        }
        return b.created[*b.waiting_cseq];
    }

    // --- scripted actions ------------------------------------------------

    Step run_action(std::size_t i, const json& a) {
        Bot& b = bots[i];
        const auto kind = a["do"].get<std::string>();
        if (kind == "join") {
            if (!b.hello_sent) {
                b.hello_sent = true;
                send(i, wire::hello(scenario.name, b.script.name));
            }
            return b.welcomed ? Step::Done : Step::Wait;
        }
        if (!b.welcomed) {
            if (!b.hello_sent) {
                b.hello_sent = true;
                send(i, wire::hello(scenario.name, b.script.name));
            }
            return Step::Wait;
        }
        if (b.current_board.empty() && !b.replica.document().whiteboards().empty()) {
            b.current_board = b.replica.document().whiteboards().begin()->first;
        }
        if (kind == "idle") {
            return Step::Done;
        }
        if (kind == "board") {
            submit(i, body::AddWhiteboard{jio::get<std::string>(a, "name"), Pose{},
                                          jio::get_or<double>(a, "width", kDefaultBoardWidth),
                                          jio::get_or<double>(a, "height", kDefaultBoardHeight)});
            return Step::Done;
        }
        if (kind == "wait_for") {
            return resolve_class(b, jio::get<std::string>(a, "target")) ? Step::Done : Step::Wait;
        }
        if (kind == "presence" || kind == "teleport") {
            if (auto board = resolve_board(b, a); board && a.contains("board")) {
                b.current_board = *board;
            } else if (a.contains("board")) {
                return Step::Wait;
            }
            const auto act = activity_from_name(jio::get_or<std::string>(a, "act", "looking"));
            if (!act) {
                throw Error(ErrorCode::ScriptError, "unknown activity in presence action");
            }
            send_presence(i, *act);
            return Step::Done;
        }
        if (kind == "stroke") {
            return stroke_action(i, a);
        }
        if (kind == "relate") {
            return relate_action(i, a);
        }
        if (kind == "edit") {
            auto target = resolve_class(b, jio::get<std::string>(a, "target"));
            if (!target) {
                return Step::Wait;
            }
            submit(i, body::EditClass{*target, edit_change(a)});
            return Step::Done;
        }
        if (kind == "copy") {
            std::vector<ElementId> cluster;
            for (const auto& t : jio::field(a, "targets")) {
                auto id = resolve_class(b, t.get<std::string>());
                if (!id) {
                    return Step::Wait;
                }
                cluster.push_back(*id);
            }
            auto board = resolve_board(b, a);
            if (!board) {
                return Step::Wait;
            }
            const auto mode = jio::get_or<std::string>(a, "mode", "deep");
            submit(i, body::CopyCluster{mode == "shallow", cluster, *board,
                                        a.contains("offset") ? jio::point(a["offset"]) : Point{}});
            return Step::Done;
        }
        if (kind == "delete") {
            auto target = resolve_class(b, jio::get<std::string>(a, "target"));
            if (!target) {
                return Step::Wait;
            }
            submit(i, body::DeleteElement{*target});
            return Step::Done;
        }
        if (kind == "package") {
            std::vector<ElementId> members;
            for (const auto& t : jio::get_or<json>(a, "members", json::array())) {
                auto id = resolve_class(b, t.get<std::string>());
                if (!id) {
                    return Step::Wait;
                }
                members.push_back(*id);
            }
            submit(i, body::CreatePackage{jio::get<std::string>(a, "name"), members});
            return Step::Done;
        }
        if (kind == "random") {
            return random_action(i, a);
        }
        throw Error(ErrorCode::ScriptError, "unknown action '" + kind + "'");
    }

    ClassChange edit_change(const json& a) {
        if (a.contains("set_name")) return change::SetName{a["set_name"].get<std::string>()};
        if (a.contains("set_stereotype")) return change::SetStereotype{a["set_stereotype"].get<std::string>()};
        if (a.contains("add_attribute")) return change::AddAttribute{parse_field(a["add_attribute"])};
        if (a.contains("add_method")) return change::AddMethod{jio::member_method(a["add_method"])};
        if (a.contains("move")) return change::MoveBounds{jio::rect(a["move"])};
        throw Error(ErrorCode::ScriptError, "edit action needs set_name, set_stereotype, add_attribute, add_method or move");
    }

    Step stroke_action(std::size_t i, const json& a) {
        Bot& b = bots[i];
        if (b.phase == 0) {
            auto board = resolve_board(b, a);
            if (!board) {
                return Step::Wait;
            }
            Stroke s;
            s.board = *board;
            s.actor = b.actor;
            s.t_start = now;
            s.t_end = now;
            if (a.contains("rect")) {
                s.points = rectangle_stroke(jio::rect(a["rect"]));
            } else {
                s.points = jio::points(jio::field(a, "points"));
            }
            auto result = recognize(s, b.replica.document());
            b.waiting_cseq = submit(i, materialize(result, s).body);
            b.phase = 1;
            return a.contains("name") ? Step::Wait : Step::Done;
        }
        auto created = own_result(b);
        if (!created) {
            return Step::Wait;
        }
        const auto name = a["name"].get<std::string>();
        if (!created->empty() && b.replica.document().find_class(created->front())) {
            b.name_cache[name] = created->front();
            submit(i, body::EditClass{created->front(), change::SetName{name}});
        }
        return Step::Done;
    }

    Step relate_action(std::size_t i, const json& a) {
        Bot& b = bots[i];
        const auto kind_name = jio::get_or<std::string>(a, "kind", "association");
        const auto kind = relationship_kind_from_name(kind_name);
        if (!kind) {
            throw Error(ErrorCode::ScriptError, "unknown relationship kind '" + kind_name + "'");
        }
        const auto source_card = jio::get_or<std::string>(a, "source_card", "");
        const auto target_card = jio::get_or<std::string>(a, "target_card", "");
        const auto label = jio::get_or<std::string>(a, "label", "");
        if (b.phase == 0) {
            auto source = resolve_class(b, jio::get<std::string>(a, "source"));
            auto target = resolve_class(b, jio::get<std::string>(a, "target"));
            if (!source || !target) {
                return Step::Wait;
            }
            const auto& doc = b.replica.document();
            const auto* sc = doc.find_class(*source);
            const auto* tc = doc.find_class(*target);
            OpBody op = body::CreateRelationship{{*kind, *source, *target, source_card, target_card, label, {}}};
            bool via_stroke = false;
            if (sc && tc && sc->whiteboard_id == tc->whiteboard_id) {
                Stroke s{ElementId{}, sc->whiteboard_id, segment_stroke(sc->bounds.center(), tc->bounds.center()),
                         b.actor, now, now};
                auto result = recognize(s, doc);
                if (auto* line = std::get_if<recognition::RelationshipLine>(&result);
                    line && line->source == *source && line->target == *target) {
                    op = materialize(result, s).body;
                    via_stroke = true;
                }
            }
            b.waiting_cseq = submit(i, std::move(op));
            const bool needs_picker = via_stroke && (*kind != RelationshipKind::Association ||
                                                     !source_card.empty() || !target_card.empty() || !label.empty());
            if (!needs_picker) {
                return Step::Done;
            }
            b.phase = 1;
            return Step::Wait;
        }
        auto created = own_result(b);
        if (!created) {
            return Step::Wait;
        }
        if (!created->empty()) {
            submit(i, body::UpdateRelationship{created->front(), *kind, source_card, target_card, label});
        }
        return Step::Done;
    }

    Step random_action(std::size_t i, const json& a) {
        Bot& b = bots[i];
        if (b.random_left < 0) {
            b.random_left = jio::get_or<std::int64_t>(a, "count", 100);
        }
        if (b.random_left == 0) {
            b.random_left = -1;
            return Step::Done;
        }
        --b.random_left;
        if (b.rng.chance(0.07)) {
            static const Activity acts[] = {Activity::Looking, Activity::Drawing, Activity::Erasing,
                                            Activity::Pointing, Activity::Speaking, Activity::Idle};
            send_presence(i, acts[b.rng.range(0, 5)]);
        }
        if (auto op = random_body(b)) {
            submit(i, std::move(*op));
        }
        return Step::Wait;
    }

    Rect random_rect(Bot& b, const Whiteboard& wb) {
        const double w = b.rng.real(kMinClassSize + 10, 180);
        const double h = b.rng.real(kMinClassSize + 10, 140);
        return {std::floor(b.rng.real(0, wb.width - w - 1)), std::floor(b.rng.real(0, wb.height - h - 1)),
                std::floor(w), std::floor(h)};
    }

    std::optional<OpBody> random_body(Bot& b) {
        const auto& doc = b.replica.document();
        if (doc.whiteboards().empty()) {
            return std::nullopt;
        }
        std::vector<const Whiteboard*> boards;
        for (const auto& [id, wb] : doc.whiteboards()) boards.push_back(&wb);
        std::vector<const ClassElement*> classes;
        for (const auto& [id, c] : doc.elements()) classes.push_back(&c);
        std::vector<const Relationship*> rels;
        for (const auto& [id, r] : doc.relationships()) rels.push_back(&r);

        const auto roll = b.rng.range(0, 99);
        const Whiteboard& wb = *b.rng.pick(boards);
        if (classes.size() < 2 || roll < 25) {
            Stroke s{ElementId{}, wb.id, rectangle_stroke(random_rect(b, wb)), b.actor, now, now};
            return materialize(recognize(s, doc), s).body;
        }
        const ClassElement& c = *b.rng.pick(classes);
        if (roll < 45) {
            MemberField f{static_cast<Visibility>(b.rng.range(0, 3)), "f" + std::to_string(b.rng.range(0, 99)),
                          b.rng.pick(kTypes)};
            MemberMethod m{static_cast<Visibility>(b.rng.range(0, 3)), "m" + std::to_string(b.rng.range(0, 99)),
                           {{"x", b.rng.pick(kTypes)}}, b.rng.pick(kTypes)};
            const auto n_attr = static_cast<std::int64_t>(c.attributes.size());
            const auto n_meth = static_cast<std::int64_t>(c.methods.size());
            auto choice = b.rng.range(0, 8);
            if ((choice == 3 || choice == 4) && n_attr == 0) choice = 2;
            if ((choice == 6 || choice == 7) && n_meth == 0) choice = 5;
            switch (choice) {
            case 0: return body::EditClass{c.id, change::SetName{b.rng.pick(kWords) + std::to_string(b.rng.range(0, 9))}};
            case 1: return body::EditClass{c.id, change::SetStereotype{b.rng.chance(0.5) ? std::optional<std::string>("entity") : std::nullopt}};
            case 2: return body::EditClass{c.id, change::AddAttribute{f}};
            case 3: return body::EditClass{c.id, change::RemoveAttribute{static_cast<std::size_t>(b.rng.range(0, n_attr - 1))}};
            case 4: return body::EditClass{c.id, change::UpdateAttribute{static_cast<std::size_t>(b.rng.range(0, n_attr - 1)), f}};
            case 5: return body::EditClass{c.id, change::AddMethod{m}};
            case 6: return body::EditClass{c.id, change::RemoveMethod{static_cast<std::size_t>(b.rng.range(0, n_meth - 1))}};
            case 7: return body::EditClass{c.id, change::UpdateMethod{static_cast<std::size_t>(b.rng.range(0, n_meth - 1)), m}};
            default: {
                const auto& home = doc.whiteboards().at(c.whiteboard_id);
                return body::EditClass{c.id, change::MoveBounds{random_rect(b, home)}};
            }
            }
        }
        const ClassElement& d = *b.rng.pick(classes);
        if (roll < 55) {
            const auto kind = static_cast<RelationshipKind>(b.rng.range(0, 4));
            RelationshipSpec spec{kind, c.id, d.id, "", "", "", {}};
            if (kind != RelationshipKind::Inheritance) {
                spec.source_card = b.rng.pick(kCards);
                spec.target_card = b.rng.pick(kCards);
            }
            return body::CreateRelationship{spec};
        }
        if (roll < 60 && !rels.empty()) {
            const Relationship& r = *b.rng.pick(rels);
            const auto kind = static_cast<RelationshipKind>(b.rng.range(0, 4));
            return body::UpdateRelationship{r.id, kind, kind == RelationshipKind::Inheritance ? "" : b.rng.pick(kCards),
                                            kind == RelationshipKind::Inheritance ? "" : b.rng.pick(kCards), "uses"};
        }
        if (roll < 68) {
            if (!rels.empty() && b.rng.chance(0.3)) {
                return body::DeleteElement{b.rng.pick(rels)->id};
            }
            return body::DeleteElement{c.id};
        }
        if (roll < 78) {
            std::vector<ElementId> cluster{c.id, d.id};
            if (b.rng.chance(0.5)) cluster.push_back(b.rng.pick(classes)->id);
            return body::CopyCluster{roll >= 73, cluster, wb.id,
                                     {std::floor(b.rng.real(-40, 40)), std::floor(b.rng.real(-40, 40))}};
        }
        if (roll < 83) {
            if (!doc.packages().empty() && b.rng.chance(0.5)) {
                return body::PackageMember{doc.packages().begin()->first, c.id, b.rng.chance(0.7)};
            }
            return body::CreatePackage{"pkg" + std::to_string(b.rng.range(0, 99)), {c.id}};
        }
        if (roll < 88) {
            std::vector<Point> pts;
            Point p{b.rng.real(50, wb.width - 50), b.rng.real(50, wb.height - 50)};
            for (int k = 0; k < 12; ++k) {
                pts.push_back(p);
                p.x = std::clamp(p.x + b.rng.real(-15, 25), 0.0, wb.width);
                p.y = std::clamp(p.y + b.rng.real(-15, 25), 0.0, wb.height);
            }
            Stroke s{ElementId{}, wb.id, pts, b.actor, now, now};
            return materialize(recognize(s, doc), s).body;
        }
        if (roll < 93) {
            return body::RecordEdit{c.id, "touch"};
        }
        if (roll < 98 || boards.size() >= 6) {
            return body::LinkWhiteboards{wb.id, b.rng.pick(boards)->id};
        }
        return body::AddWhiteboard{"Board" + std::to_string(boards.size() + 1), Pose{}, kDefaultBoardWidth, kDefaultBoardHeight};
    }

    void step(std::size_t i) {
        Bot& b = bots[i];
        if (b.next_action >= b.script.actions.size()) {
            if (!b.finished) {
                b.finished = true;
                b.finished_at = now;
            }
            return;
        }
        const json& a = b.script.actions[b.next_action];
        Step result = run_action(i, a);
        if (result == Step::Done) {
            b.phase = 0;
            b.blocked_since = -1;
            b.waiting_cseq.reset();
            ++b.next_action;
            Millis wait = 0;
            if (b.next_action < b.script.actions.size()) {
                const json& next = b.script.actions[b.next_action];
                wait = jio::get_or<Millis>(next, "after", 0);
                if (auto it = next.find("at"); it != next.end()) {
                    wait = std::max<Millis>(0, it->get<Millis>() - now);
                }
            }
            if (a["do"] == "idle") {
                wait += jio::get_or<Millis>(a, "ms", 0);
            }
            at(now + wait, [this, i] { step(i); });
            return;
        }
        // Random mode paces itself; blocked actions poll.
        if (a["do"] == "random" && b.welcomed) {
            Millis lo = 40, hi = 160;
            if (auto it = a.find("interval_ms"); it != a.end() && it->is_array() && it->size() == 2) {
                lo = (*it)[0].get<Millis>();
                hi = (*it)[1].get<Millis>();
            }
            at(now + b.rng.range(lo, hi), [this, i] { step(i); });
            return;
        }
        if (b.blocked_since < 0) {
            b.blocked_since = now;
        } else if (now - b.blocked_since > kBlockTimeoutMillis) {
            throw Error(ErrorCode::ScriptError, "bot " + b.script.name + " blocked on action " +
                                                    std::to_string(b.next_action) + " (" + a.dump() + ")");
        }
        at(now + kRetryMillis, [this, i] { step(i); });
    }

    RunReport run() {
        for (const auto& board : scenario.boards) {
            session.submit_system(body::AddWhiteboard{board.name, board.pose, board.width, board.height});
        }
        for (std::size_t i = 0; i < bots.size(); ++i) {
            Millis start = 0;
            if (!bots[i].script.actions.empty()) {
                start = jio::get_or<Millis>(bots[i].script.actions.front(), "at",
                                            jio::get_or<Millis>(bots[i].script.actions.front(), "after", 0));
            }
            at(start, [this, i] { step(i); });
        }
        while (!queue.empty()) {
            Event e = queue.top();
            queue.pop();
            now = e.time;
            e.fn();
        }
        return report();
    }

    RunReport report() {
        RunReport r;
        r.scenario = scenario.name;
        r.seed = scenario.seed;
        r.quiescence_ms = now;
        r.server_digest = state_digest(session.replica());
        r.server_noops = session.replica().noops();
        r.server_noop_digest = noop_digest(r.server_noops);
        r.syntactic_error_count = r.server_noops.size();
        r.ops_sequenced = session.oplog().last_seq();
        r.converged = true;
        for (const auto& b : bots) {
            BotReport br;
            br.name = b.script.name;
            br.actor = b.actor.str();
            br.completion_ms = std::max(b.finished_at, b.last_own_applied);
            br.ops_issued = b.ops_issued;
            br.ops_applied = b.replica.applied_seq();
            br.syntactic_errors = static_cast<std::uint64_t>(
                std::count_if(r.server_noops.begin(), r.server_noops.end(),
                              [&](const NoOpRecord& n) { return n.actor == b.actor; }));
            br.presence_received = b.presence_received;
            br.digest = state_digest(b.replica);
            br.noop_digest = noop_digest(b.replica.noops());
            r.ops_issued += b.ops_issued;
            r.converged = r.converged && br.digest == r.server_digest &&
                          br.ops_applied == r.ops_sequenced && b.replica.pending_count() == 0;
            r.bots.push_back(std::move(br));
        }
        return r;
    }
};

Simulation::Simulation(Scenario scenario) : impl_(std::make_unique<Impl>(std::move(scenario))) {}
Simulation::~Simulation() = default;

RunReport Simulation::run() { return impl_->run(); }

const Session& Simulation::session() const { return impl_->session; }

std::vector<const Replica*> Simulation::replicas() const {
    std::vector<const Replica*> out;
    for (const auto& b : impl_->bots) {
        out.push_back(&b.replica);
    }
    return out;
}

RunReport run_scenario(const Scenario& scenario) {
    Simulation sim(scenario);
    return sim.run();
}

} // namespace modelsync
