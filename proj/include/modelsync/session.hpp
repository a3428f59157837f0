#pragma once

#include "modelsync/history.hpp"
#include "modelsync/protocol.hpp"
#include "modelsync/sync.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace modelsync {

inline constexpr Millis kPresenceIntervalMillis = 100; // 10 Hz per actor
inline constexpr std::string_view kSystemActor = "system";

using ConnectionId = std::uint64_t;
/// Delivers one serialized message to one connection.
using Sink = std::function<void(const std::string&)>;
/// Session-relative milliseconds.
using Clock = std::function<Millis()>;

struct ActorInfo {
    std::string name;
    Rgb color;
    bool connected = false;
    std::optional<ConnectionId> connection;
};

struct JoinResult {
    ActorId actor;
    Rgb color;
    std::uint64_t seq = 0;
};

/// One hosted collaboration session. Not thread-safe: all calls go through
/// one serialized command loop.
class Session {
public:
    Session(std::string session_id, Clock clock, std::vector<Rgb> palette = default_palette(),
            Millis presence_interval = kPresenceIntervalMillis);

    const std::string& id() const noexcept { return id_; }
    const Replica& replica() const noexcept { return replica_; }
    const OpLog& oplog() const noexcept { return sequencer_.log(); }
    const std::map<ActorId, ActorInfo>& actors() const noexcept { return actors_; }
    const std::map<ActorId, PresenceState>& presence() const noexcept { return presence_; }
    std::size_t connected_count() const;
    std::optional<ActorId> actor_for(ConnectionId conn) const;

    /// Registers the connection, assigns a color and sends the welcome
    /// snapshot; peers are told about the newcomer. `resume` reclaims an
    /// earlier actor id (same color if still free).
    JoinResult join(ConnectionId conn, const std::string& name, Sink sink,
                    const std::optional<ActorId>& resume = std::nullopt);
    void leave(ConnectionId conn);

    /// Sequences, applies and broadcasts. Returns the assigned seq; a
    /// duplicate (actor, client_seq) is acked with the original seq only.
    std::uint64_t submit(ConnectionId conn, Operation op);
    /// Server-originated op (initial boards and the like), actor "system".
    std::uint64_t submit_system(OpBody body);

    /// Stores the state; peers get at most one presence message per actor
    /// per interval, always the latest state.
    void presence_update(ConnectionId conn, PresenceState state);
    /// Flushes presence whose interval has elapsed. Returns the earliest
    /// still-pending due time, if any.
    std::optional<Millis> tick();

    /// Handles one inbound wire message from `conn`. Errors go back to the
    /// sender as {"t":"err"}.
    void handle(ConnectionId conn, std::string_view line, const Sink& sink);

    /// Writes the model file and the op log next to it.
    void persist_snapshot(const std::filesystem::path& model_path) const;
    static Session load_snapshot(const std::filesystem::path& model_path, std::string session_id,
                                 Clock clock, std::vector<Rgb> palette = default_palette());
    /// Appends every newly sequenced op to `oplog_path` as it happens.
    void attach_oplog_file(std::filesystem::path oplog_path);

private:
    struct PendingPresence {
        bool waiting = false;
        Millis due = 0;
        Millis last_sent = 0;
        bool ever_sent = false;
    };

    const ActorId& require_actor(ConnectionId conn) const;
    void send_to(const ActorId& actor, const std::string& line);
    void broadcast(const std::string& line, const std::optional<ActorId>& except);
    nlohmann::json peers_json(const ActorId& except) const;
    std::uint64_t sequence_and_broadcast(Operation op, bool ack);

    std::string id_;
    Clock clock_;
    Millis presence_interval_;
    PaletteAssigner palette_;
    Sequencer sequencer_;
    Replica replica_;
    std::uint64_t next_actor_ = 1;
    std::uint64_t system_cseq_ = 0;
    std::map<ActorId, ActorInfo> actors_;
    std::map<ConnectionId, ActorId> by_connection_;
    std::map<ConnectionId, Sink> sinks_;
    std::map<ActorId, PresenceState> presence_;
    std::map<ActorId, PendingPresence> presence_schedule_;
    std::optional<std::filesystem::path> oplog_file_;
};

std::filesystem::path oplog_path_for(const std::filesystem::path& model_path);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Routes connections to sessions by the session name in their hello.
class SessionHub {
public:
    explicit SessionHub(Clock clock, std::optional<std::filesystem::path> persist_dir = std::nullopt,
                        std::vector<Rgb> palette = palette_from_environment());

    void handle(ConnectionId conn, std::string_view line, const Sink& sink);
    void disconnect(ConnectionId conn);
    /// Runs presence flushing on every session.
    void tick();
    /// Snapshots every session to the persist dir.
    void persist_all() const;

    Session* find(const std::string& session_id);
    std::size_t session_count() const noexcept { return sessions_.size(); }

private:
    Session& open(const std::string& session_id);

    Clock clock_;
    std::optional<std::filesystem::path> persist_dir_;
    std::vector<Rgb> palette_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    std::map<ConnectionId, std::string> routes_;
};

} // namespace modelsync
