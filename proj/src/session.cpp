#include "modelsync/session.hpp"

#include "modelsync/snapshot.hpp"

#include "json_util.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace modelsync {

using nlohmann::json;
namespace jio = jsonio;

std::filesystem::path oplog_path_for(const std::filesystem::path& model_path) {
    auto p = model_path;
    p.replace_extension(".oplog.ndjson");
    return p;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    // Write then rename so readers never see a half-written file.
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw Error(ErrorCode::IoFailure, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw Error(ErrorCode::IoFailure, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

Session::Session(std::string session_id, Clock clock, std::vector<Rgb> palette,
                 Millis presence_interval)
    : id_(std::move(session_id)),
      clock_(std::move(clock)),
      presence_interval_(presence_interval),
      palette_(std::move(palette)),
      replica_(ModelDocument(id_)) {}

std::size_t Session::connected_count() const {
    return static_cast<std::size_t>(std::count_if(
        actors_.begin(), actors_.end(), [](const auto& kv) { return kv.second.connected; }));
}

std::optional<ActorId> Session::actor_for(ConnectionId conn) const {
    if (auto it = by_connection_.find(conn); it != by_connection_.end()) {
        return it->second;
    }
    return std::nullopt;
}

const ActorId& Session::require_actor(ConnectionId conn) const {
    auto it = by_connection_.find(conn);
    if (it == by_connection_.end()) {
        throw Error(ErrorCode::NotJoined, "connection has not joined session " + id_);
    }
    return it->second;
}

void Session::send_to(const ActorId& actor, const std::string& line) {
    auto it = actors_.find(actor);
    if (it == actors_.end() || !it->second.connected || !it->second.connection) {
        return;
    }
    if (auto s = sinks_.find(*it->second.connection); s != sinks_.end() && s->second) {
        s->second(line);
    }
}

void Session::broadcast(const std::string& line, const std::optional<ActorId>& except) {
    for (const auto& [actor, info] : actors_) {
        if (info.connected && (!except || actor != *except)) {
            send_to(actor, line);
        }
    }
}

json Session::peers_json(const ActorId& except) const {
    json peers = json::array();
    for (const auto& [actor, info] : actors_) {
        if (info.connected && actor != except) {
            peers.push_back(json{{"actor", actor.str()}, {"name", info.name}, {"color", wire::color(info.color)}});
        }
    }
    return peers;
}

JoinResult Session::join(ConnectionId conn, const std::string& name, Sink sink,
                         const std::optional<ActorId>& resume) {
    if (name.empty()) {
        throw Error(ErrorCode::NameEmpty, "actor name must not be empty");
    }
    if (auto existing = actor_for(conn)) {
        // Repeated hello on a live connection: resend the snapshot.
        auto& info = actors_.at(*existing);
        sinks_[conn] = std::move(sink);
        send_to(*existing, wire::line(wire::welcome(*existing, info.color, replica_.applied_seq(),
                                                    document_to_json(replica_.document()),
                                                    peers_json(*existing))));
        return {*existing, info.color, replica_.applied_seq()};
    }

    std::optional<ActorId> actor;
    if (resume && actors_.count(*resume)) {
        actor = *resume;
        auto& info = actors_.at(*actor);
        if (info.connected && info.connection) {
            by_connection_.erase(*info.connection);
            sinks_.erase(*info.connection);
            info.connected = false;
        }
    }
    if (connected_count() >= palette_.capacity()) {
        throw Error(ErrorCode::SessionFull, "session " + id_ + " already has " +
                                                std::to_string(palette_.capacity()) + " actors");
    }
    if (!actor) {
        actor = ActorId("a" + std::to_string(next_actor_++));
    }
    const Rgb color = palette_.assign(*actor);
    auto& info = actors_[*actor];
    info.name = name;
    info.color = color;
    info.connected = true;
    info.connection = conn;
    by_connection_[conn] = *actor;
    sinks_[conn] = std::move(sink);

    send_to(*actor, wire::line(wire::welcome(*actor, color, replica_.applied_seq(),
                                             document_to_json(replica_.document()),
                                             peers_json(*actor))));
    broadcast(wire::line(wire::joined(*actor, name, color)), *actor);
    return {*actor, color, replica_.applied_seq()};
}

void Session::leave(ConnectionId conn) {
    auto it = by_connection_.find(conn);
    if (it == by_connection_.end()) {
        sinks_.erase(conn);
        return;
    }
    const ActorId actor = it->second;
    by_connection_.erase(it);
    sinks_.erase(conn);
    auto& info = actors_.at(actor);
    info.connected = false;
    info.connection.reset();
    palette_.release(actor);
    presence_.erase(actor);
    presence_schedule_.erase(actor);
    broadcast(wire::line(wire::bye(actor)), std::nullopt);
}

std::uint64_t Session::submit(ConnectionId conn, Operation op) {
    const ActorId actor = require_actor(conn);
    op.actor = actor;
    return sequence_and_broadcast(std::move(op), true);
}

std::uint64_t Session::submit_system(OpBody body) {
    Operation op;
    op.actor = ActorId(std::string(kSystemActor));
    op.client_seq = ++system_cseq_;
    op.body = std::move(body);
    return sequence_and_broadcast(std::move(op), false);
}

std::uint64_t Session::sequence_and_broadcast(Operation op, bool ack) {
    const ActorId actor = op.actor;
    op.seq.reset();
    op.issued_at = clock_();
    auto sequenced = sequencer_.sequence(std::move(op));
    const auto seq = *sequenced.op.seq;
    if (sequenced.duplicate) {
        if (ack) {
            send_to(actor, wire::line(wire::ack(sequenced.op.client_seq, seq)));
        }
        return seq;
    }
    replica_.apply(sequenced.op);
    const auto line = wire::line(op_to_json(sequenced.op));
    if (oplog_file_) {
        std::ofstream out(*oplog_file_, std::ios::app | std::ios::binary);
        out << line << '\n';
    }
    if (ack) {
        send_to(actor, wire::line(wire::ack(sequenced.op.client_seq, seq)));
    }
    broadcast(line, std::nullopt);
    return seq;
}

void Session::presence_update(ConnectionId conn, PresenceState state) {
    const ActorId actor = require_actor(conn);
    state.actor = actor;
    if (auto it = presence_.find(actor); it != presence_.end() && state.updated_at < it->second.updated_at) {
        return;
    }
    presence_[actor] = state;
    auto& sched = presence_schedule_[actor];
    if (!sched.waiting) {
        sched.waiting = true;
        sched.due = clock_() + presence_interval_;
    }
}

std::optional<Millis> Session::tick() {
    const Millis now = clock_();
    std::optional<Millis> next;
    for (auto& [actor, sched] : presence_schedule_) {
        if (!sched.waiting) {
            continue;
        }
        if (sched.due <= now) {
            sched.waiting = false;
            sched.last_sent = now;
            sched.ever_sent = true;
            broadcast(wire::line(wire::presence(presence_.at(actor))), actor);
        } else {
            next = next ? std::min(*next, sched.due) : sched.due;
        }
    }
    return next;
}

void Session::handle(ConnectionId conn, std::string_view line, const Sink& sink) {
    auto reply_error = [&](std::string_view code, std::string_view msg) {
        if (sink) {
            sink(wire::line(wire::err(code, msg)));
        }
    };
    try {
        json msg;
        try {
            msg = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::MalformedMessage, e.what());
        }
        const auto type = jio::get<std::string>(msg, "t");
        if (type == "hello") {
            const auto proto = jio::get_or<int>(msg, "proto", kProtocolVersion);
            if (proto != kProtocolVersion) {
                throw Error(ErrorCode::FormatVersionMismatch,
                            "protocol " + std::to_string(proto) + " is not supported");
            }
            join(conn, jio::get_or<std::string>(msg, "name", ""), sink,
                 jio::optional_id<ActorId>(msg, "actor"));
        } else if (type == "op") {
            require_actor(conn);
            Operation op;
            op.client_seq = jio::get<std::uint64_t>(msg, "cseq");
            op.body = body_from_json(jio::field(msg, "body"));
            submit(conn, std::move(op));
        } else if (type == "presence") {
            require_actor(conn);
            presence_update(conn, wire::presence_from(msg));
        } else if (type == "bye") {
            leave(conn);
        } else {
            throw Error(ErrorCode::MalformedMessage, "unknown message type '" + type + "'");
        }
    } catch (const Error& e) {
        reply_error(error_code_name(e.code()), e.what());
    } catch (const json::exception& e) {
        reply_error(error_code_name(ErrorCode::MalformedMessage), e.what());
    }
}

void Session::persist_snapshot(const std::filesystem::path& model_path) const {
    write_file(model_path, document_to_json(replica_.document()).dump(2) + "\n");
    write_file(oplog_path_for(model_path), oplog_to_ndjson(sequencer_.log().entries()));
}

Session Session::load_snapshot(const std::filesystem::path& model_path, std::string session_id,
                               Clock clock, std::vector<Rgb> palette) {
    json j;
    try {
        j = json::parse(read_file(model_path));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoFailure, "cannot parse " + model_path.string() + ": " + e.what());
    }
    ModelDocument doc = document_from_json(j);
    const auto applied = doc.version();

    std::vector<Operation> ops;
    const auto log_path = oplog_path_for(model_path);
    if (std::filesystem::exists(log_path)) {
        ops = oplog_from_ndjson(read_file(log_path));
    }
    OpLog log(ops.empty() ? applied : (ops.front().seq.value_or(1) - 1));
    std::uint64_t system_cseq = 0;
    for (auto& op : ops) {
        if (op.actor.str() == kSystemActor) {
            system_cseq = std::max(system_cseq, op.client_seq);
        }
        log.append(std::move(op));
    }
    if (log.last_seq() < applied) {
        throw Error(ErrorCode::IoFailure, "op log ends before the snapshot's applied_seq");
    }
    if (log.base() > applied) {
        throw Error(ErrorCode::GapInLog, "op log starts after the snapshot's applied_seq");
    }

    Session session(std::move(session_id), std::move(clock), std::move(palette));
    session.replica_ = replay_replica(log.suffix(applied), std::move(doc));
    session.sequencer_ = Sequencer(std::move(log));
    session.system_cseq_ = system_cseq;
    return session;
}

void Session::attach_oplog_file(std::filesystem::path oplog_path) {
    oplog_file_ = std::move(oplog_path);
}

SessionHub::SessionHub(Clock clock, std::optional<std::filesystem::path> persist_dir,
                       std::vector<Rgb> palette)
    : clock_(std::move(clock)), persist_dir_(std::move(persist_dir)), palette_(std::move(palette)) {}

Session* SessionHub::find(const std::string& session_id) {
    auto it = sessions_.find(session_id);
    return it == sessions_.end() ? nullptr : it->second.get();
}

Session& SessionHub::open(const std::string& session_id) {
    if (auto* s = find(session_id)) {
        return *s;
    }
    const bool safe = !session_id.empty() && session_id.size() <= 64 &&
                      std::all_of(session_id.begin(), session_id.end(), [](char c) {
                          return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
                      });
    if (!safe) {
        throw Error(ErrorCode::MalformedMessage, "session ids are 1-64 of [A-Za-z0-9_-]");
    }
    std::unique_ptr<Session> session;
    if (persist_dir_) {
        const auto model_path = *persist_dir_ / (session_id + ".json");
        const auto log_path = oplog_path_for(model_path);
        if (std::filesystem::exists(model_path)) {
            session = std::make_unique<Session>(
                Session::load_snapshot(model_path, session_id, clock_, palette_));
        } else {
            session = std::make_unique<Session>(session_id, clock_, palette_);
            if (std::filesystem::exists(log_path)) {
                // Crash before the first snapshot: the log alone is enough.
                auto ops = oplog_from_ndjson(read_file(log_path));
                write_file(model_path, document_to_json(replay(ops, ModelDocument(session_id))).dump(2) + "\n");
                session = std::make_unique<Session>(
                    Session::load_snapshot(model_path, session_id, clock_, palette_));
            }
        }
        session->attach_oplog_file(log_path);
    } else {
        session = std::make_unique<Session>(session_id, clock_, palette_);
    }
    return *sessions_.emplace(session_id, std::move(session)).first->second;
}

void SessionHub::handle(ConnectionId conn, std::string_view line, const Sink& sink) {
    if (auto it = routes_.find(conn); it != routes_.end()) {
        if (auto* s = find(it->second)) {
            s->handle(conn, line, sink);
            if (!s->actor_for(conn)) {
                routes_.erase(conn);
            }
            return;
        }
    }
    try {
        auto msg = json::parse(line);
        if (msg.value("t", std::string()) != "hello") {
            throw Error(ErrorCode::NotJoined, "say hello first");
        }
        auto& session = open(jio::get<std::string>(msg, "session"));
        session.handle(conn, line, sink);
        if (session.actor_for(conn)) {
            routes_[conn] = session.id();
        }
    } catch (const Error& e) {
        if (sink) sink(wire::line(wire::err(error_code_name(e.code()), e.what())));
    } catch (const json::exception& e) {
        if (sink) sink(wire::line(wire::err(error_code_name(ErrorCode::MalformedMessage), e.what())));
    }
}

void SessionHub::disconnect(ConnectionId conn) {
    auto it = routes_.find(conn);
    if (it == routes_.end()) {
        return;
    }
    if (auto* s = find(it->second)) {
        s->leave(conn);
        if (persist_dir_ && s->connected_count() == 0) {
            s->persist_snapshot(*persist_dir_ / (s->id() + ".json"));
        }
    }
    routes_.erase(it);
}

void SessionHub::tick() {
    for (auto& [id, s] : sessions_) {
        s->tick();
    }
}

void SessionHub::persist_all() const {
    if (!persist_dir_) {
        return;
    }
    for (const auto& [id, s] : sessions_) {
        s->persist_snapshot(*persist_dir_ / (id + ".json"));
    }
}

} // namespace modelsync
