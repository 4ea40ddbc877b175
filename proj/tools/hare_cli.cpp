#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "hare/hare.h"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeFailure = 2;

std::atomic<bool> interrupted{false};

int exit_code(hare_status s) {
    switch (s) {
        case HARE_OK: return kOk;
        case HARE_ERR_CONFIG:
        case HARE_ERR_ARGUMENT: return kConfigError;
        default: return kRuntimeFailure;
    }
}

int report(hare_status s) {
    if (s != HARE_OK) std::cerr << "error: " << hare_last_error() << "\n";
    return exit_code(s);
}

bool slurp(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read " << path << "\n";
        return false;
    }
    std::ostringstream text;
    text << in.rdbuf();
    out = text.str();
    return true;
}

/// Prints and frees a library-owned string.
void emit(char* s) {
    if (!s) return;
    std::cout << s << "\n";
    hare_string_free(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regulated robot-ecology simulator"};
    app.require_subcommand(1);

    std::string config_path, out_path, record_path;
    std::uint64_t seed = 1;
    unsigned workers = 0;
    double speed = 1.0;
    int stream_port = -1;
    int port = -1;
    std::string pacing = "realtime";
    double frame_rate = 0.0;

    auto* run = app.add_subcommand("run", "Run one headless game and print its metrics");
    run->add_option("--config", config_path, "Run configuration (JSON)")->required();
    run->add_option("--seed", seed, "Seed");
    run->add_option("--out", out_path, "Record output path (JSON lines)");

    auto* matrix = app.add_subcommand("matrix", "Run an experiment matrix and print the summary table");
    matrix->add_option("--config", config_path, "Configuration with a \"matrix\" object")->required();
    matrix->add_option("--out", out_path, "Directory for summary.csv, runs.csv and records/");
    matrix->add_option("--workers", workers, "Worker threads (0: all cores)");

    auto* replay = app.add_subcommand("replay", "Re-simulate a record and check it reproduces");
    replay->add_option("path", record_path, "Record path")->required();
    replay->add_option("--speed", speed, "Pacing multiplier when streaming")->check(CLI::PositiveNumber);
    replay->add_option("--stream", stream_port, "Stream the replay to consoles on this port");

    auto* oracle = app.add_subcommand("oracle", "Compute the oracle optimum for a configuration");
    oracle->add_option("--config", config_path, "Run configuration (JSON)")->required();
    oracle->add_option("--out", out_path, "Write the result JSON here");

    auto* accuracy = app.add_subcommand("accuracy", "Forecast accuracy of a recorded traffic run");
    accuracy->add_option("path", record_path, "Record path")->required();

    auto* serve = app.add_subcommand("serve", "Serve live sessions to regulator consoles");
    serve->add_option("--port", port, "Listen port (HARE_PORT overrides)");
    serve->add_option("--config", config_path, "Default session configuration");
    serve->add_option("--pacing", pacing, "realtime | free")->check(CLI::IsMember({"realtime", "free"}));
    serve->add_option("--frame-rate", frame_rate, "Frames per simulated second (HARE_FRAME_RATE overrides)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    std::string config;
    if (!config_path.empty() && !slurp(config_path, config)) return kConfigError;

    if (*run) {
        char* metrics = nullptr;
        const auto s = hare_run_headless(config.c_str(), seed, out_path.empty() ? nullptr : out_path.c_str(), &metrics);
        emit(metrics);
        return report(s);
    }
    if (*matrix) {
        char* csv = nullptr;
        const auto s = hare_run_matrix(config.c_str(), out_path.empty() ? nullptr : out_path.c_str(), workers, &csv);
        if (csv) {
            std::cout << csv;
            hare_string_free(csv);
        }
        return report(s);
    }
    if (*replay) {
        char* result = nullptr;
        hare_status s;
        if (stream_port >= 0) {
            s = hare_replay_stream(
                record_path.c_str(), speed, static_cast<uint16_t>(stream_port),
                [](uint16_t p, void*) { std::cerr << "streaming session \"replay\" on port " << p << "\n"; }, nullptr,
                &result);
        } else {
            s = hare_replay_check(record_path.c_str(), &result);
        }
        emit(result);
        return report(s);
    }
    if (*oracle) {
        char* result = nullptr;
        const auto s = hare_oracle(config.c_str(), &result);
        if (result && !out_path.empty()) {
            std::ofstream(out_path) << result << "\n";
            hare_string_free(result);
        } else {
            emit(result);
        }
        return report(s);
    }
    if (*accuracy) {
        char* result = nullptr;
        const auto s = hare_forecast_accuracy(record_path.c_str(), &result);
        emit(result);
        return report(s);
    }

    // serve
    std::string options = "{\"pacing\":\"" + pacing + "\"";
    if (port >= 0) options += ",\"port\":" + std::to_string(port);
    if (frame_rate > 0) options += ",\"frame_rate\":" + std::to_string(frame_rate);
    if (!config.empty()) options += ",\"config\":" + config;
    options += "}";
    hare_server* server = nullptr;
    const auto s = hare_server_start(options.c_str(), &server);
    if (s != HARE_OK) return report(s);
    std::cerr << "listening on port " << hare_server_port(server) << "\n";
    std::signal(SIGINT, [](int) { interrupted = true; });
    std::signal(SIGTERM, [](int) { interrupted = true; });
    while (!interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    hare_server_stop(server);
    return kOk;
}
