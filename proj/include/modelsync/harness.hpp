#pragma once

#include "modelsync/session.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace modelsync {

struct NetworkModel {
    Millis latency_ms = 0;
    Millis jitter_ms = 0;       // uniform in [-jitter, +jitter] around latency
    bool duplicate = false;     // every message is delivered twice
};

struct BoardSetup {
    std::string name;
    Pose pose;
    double width = kDefaultBoardWidth;
    double height = kDefaultBoardHeight;
};

struct BotScript {
    std::string name;
    std::vector<nlohmann::json> actions;
};

/// A scripted multi-client run. Deterministic for a fixed seed.
struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 1;
    NetworkModel network;
    std::vector<BoardSetup> boards{{"Main", {}, kDefaultBoardWidth, kDefaultBoardHeight}};
    std::vector<BotScript> bots;
};

/// Parses a scenario file; unknown actions raise ScriptError.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);

/// `clients` bots each issuing `ops` random operations.
Scenario random_scenario(std::size_t clients, std::size_t ops, NetworkModel network,
                         std::uint64_t seed);

struct BotReport {
    std::string name;
    std::string actor;
    Millis completion_ms = 0;
    std::uint64_t ops_issued = 0;
    std::uint64_t ops_applied = 0;
    std::uint64_t syntactic_errors = 0;
    std::uint64_t presence_received = 0;
    std::string digest;
    std::string noop_digest;
};

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::vector<BotReport> bots;
    std::uint64_t syntactic_error_count = 0;
    std::uint64_t ops_issued = 0;
    std::uint64_t ops_sequenced = 0;
    bool converged = false;
    Millis quiescence_ms = 0;
    std::string server_digest;
    std::string server_noop_digest;
    std::vector<NoOpRecord> server_noops;
};

nlohmann::json report_to_json(const RunReport& r);

class Simulation {
public:
    explicit Simulation(Scenario scenario);
    ~Simulation();
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    /// Runs to quiescence. Throws ScriptError for unusable scripts.
    RunReport run();

    const Session& session() const;
    /// Bot replicas, in script order.
    std::vector<const Replica*> replicas() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

RunReport run_scenario(const Scenario& scenario);

} // namespace modelsync
