#include "modelsync/export.hpp"
#include "modelsync/harness.hpp"
#include "modelsync/metrics.hpp"
#include "modelsync/server.hpp"
#include "modelsync/snapshot.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

namespace ms = modelsync;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

std::string number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
    } else {
        ms::write_file(out_path, text);
    }
}

std::string doc_id_for_log(const std::filesystem::path& log) {
    auto stem = log.filename().string();
    for (const std::string suffix : {".oplog.ndjson", ".ndjson", ".jsonl"}) {
        if (stem.size() > suffix.size() && stem.ends_with(suffix)) {
            return stem.substr(0, stem.size() - suffix.size());
        }
    }
    return log.stem().string();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"modelsync: collaborative UML class-diagram engine"};
    app.require_subcommand(1);

    auto* serve = app.add_subcommand("serve", "Host collaboration sessions (NDJSON and WebSocket on one port)");
    ms::ServerOptions server_opts;
    std::string persist_dir;
    serve->add_option("--port", server_opts.port, "TCP port (0 = any free port)");
    serve->add_option("--address", server_opts.address, "Bind address");
    serve->add_option("--persist-dir", persist_dir, "Directory for session snapshots and op logs");

    auto* simulate = app.add_subcommand("simulate", "Run a deterministic multi-client simulation");
    std::string scenario_path, report_path, model_path;
    std::size_t clients = 0, ops = 1000;
    ms::Millis latency = -1, jitter = -1;
    std::uint64_t seed = 0;
    bool duplicate = false;
    simulate->add_option("--scenario", scenario_path, "Scenario JSON file (default: random bots)")->check(CLI::ExistingFile);
    simulate->add_option("--clients", clients, "Number of bots (random bots fill up the scenario)");
    simulate->add_option("--ops", ops, "Random operations per generated bot");
    simulate->add_option("--latency-ms", latency, "Base one-way latency")->check(CLI::NonNegativeNumber);
    simulate->add_option("--jitter-ms", jitter, "Uniform jitter around the latency")->check(CLI::NonNegativeNumber);
    auto* seed_opt = simulate->add_option("--seed", seed, "Random seed");
    simulate->add_flag("--duplicate", duplicate, "Deliver every message twice");
    simulate->add_option("--report", report_path, "Write the report here instead of standard output");
    simulate->add_option("--model", model_path, "Also save the server's final model (and op log) here");

    auto* exporter = app.add_subcommand("export", "Export a model file");
    std::string in_path, format = "json", out_path;
    exporter->add_option("--in", in_path, "Model (snapshot) file")->required()->check(CLI::ExistingFile);
    exporter->add_option("--format", format, "json or plantuml")->check(CLI::IsMember({"json", "plantuml"}));
    exporter->add_option("--out", out_path, "Output file (default: standard output)");

    auto* replayer = app.add_subcommand("replay", "Rebuild a model file from an op log");
    std::string log_path, model_out, doc_id;
    replayer->add_option("--log", log_path, "NDJSON op log")->required()->check(CLI::ExistingFile);
    replayer->add_option("--out", model_out, "Model file to write")->required();
    replayer->add_option("--doc-id", doc_id, "Document id (default: derived from the log file name)");

    auto* score = app.add_subcommand("score", "Score questionnaire instruments");
    std::vector<int> sus;
    std::vector<double> tlx;
    auto* sus_opt = score->add_option("--sus", sus, "Ten SUS answers, 1..5");
    auto* tlx_opt = score->add_option("--tlx", tlx, "Six raw TLX subscales, 0..100");
    sus_opt->excludes(tlx_opt);
    score->require_option(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }

    try {
        if (*serve) {
            if (!persist_dir.empty()) {
                std::filesystem::create_directories(persist_dir);
                server_opts.persist_dir = persist_dir;
            }
            server_opts.handle_signals = true;
            ms::Server server(server_opts);
            std::cerr << "modelsync: listening on " << server_opts.address << ':' << server.port() << '\n';
            server.run();
            return kOk;
        }
        if (*simulate) {
            ms::Scenario sc;
            if (!scenario_path.empty()) {
                sc = ms::scenario_from_json(json::parse(ms::read_file(scenario_path)));
            } else {
                sc = ms::random_scenario(clients == 0 ? 2 : clients, ops, {}, 1);
            }
            if (seed_opt->count()) sc.seed = seed;
            if (latency >= 0) sc.network.latency_ms = latency;
            if (jitter >= 0) sc.network.jitter_ms = jitter;
            if (duplicate) sc.network.duplicate = true;
            if (clients > 0 && clients < sc.bots.size()) {
                sc.bots.resize(clients);
            }
            const auto filler = ms::random_scenario(clients, ops, {}, sc.seed);
            for (std::size_t i = sc.bots.size(); i < clients; ++i) {
                auto bot = filler.bots[i];
                bot.name = "bot" + std::to_string(i + 1);
                sc.bots.push_back(std::move(bot));
            }
            ms::Simulation sim(sc);
            const auto report = sim.run();
            if (!model_path.empty()) {
                sim.session().persist_snapshot(model_path);
            }
            emit(ms::report_to_json(report).dump(2) + "\n", report_path);
            if (!report.converged) {
                std::cerr << "modelsync: replicas did not converge\n";
                return kFailure;
            }
            return kOk;
        }
        if (*exporter) {
            const auto doc = ms::document_from_json(json::parse(ms::read_file(in_path)));
            emit(format == "json" ? ms::document_to_json(doc).dump(2) + "\n" : ms::to_plantuml(doc), out_path);
            return kOk;
        }
        if (*replayer) {
            const auto ops_log = ms::oplog_from_ndjson(ms::read_file(log_path));
            const auto doc = ms::replay(ops_log, ms::ModelDocument(doc_id.empty() ? doc_id_for_log(log_path) : doc_id));
            ms::write_file(model_out, ms::document_to_json(doc).dump(2) + "\n");
            std::cerr << "modelsync: replayed " << ops_log.size() << " ops, digest " << ms::state_digest(doc) << '\n';
            return kOk;
        }
        if (*score) {
            if (sus_opt->count()) {
                std::cout << number(ms::sus_score(sus)) << '\n';
            } else {
                std::cout << number(ms::tlx_raw(tlx)) << '\n';
            }
            return kOk;
        }
    } catch (const ms::Error& e) {
        std::cerr << "error [" << ms::error_code_name(e.code()) << "]: " << e.what() << '\n';
        const bool usage = e.code() == ms::ErrorCode::WrongLength || e.code() == ms::ErrorCode::OutOfRange;
        return usage && *score ? kUsage : kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
