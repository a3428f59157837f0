#pragma once

#include "modelsync/session.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace modelsync {

struct ServerOptions {
    std::string address = "0.0.0.0";
    std::uint16_t port = 7070; // 0 picks a free port
    std::optional<std::filesystem::path> persist_dir;
    Millis tick_ms = 20;
    bool handle_signals = false; // SIGINT/SIGTERM stop the loop
};

/// NDJSON over TCP and WebSocket text frames, sharing one port: a
/// connection whose first bytes are "GET " is treated as an HTTP upgrade.
/// All session work runs on the single io thread.
class Server {
public:
    explicit Server(ServerOptions options);
    ~Server();
    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    /// Bound port, valid after construction.
    std::uint16_t port() const;
    /// Blocks until stop(); snapshots every session on the way out.
    void run();
    /// Safe to call from any thread.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace modelsync
