#include "hare/hare.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "gateway/replay.hpp"
#include "gateway/server.hpp"
#include "harness/harness.hpp"
#include "kernel/errors.hpp"
#include "oracles/oracles.hpp"
#include "sim/simulation.hpp"

struct hare_sim {
    std::unique_ptr<hare::Simulation> sim;
};

struct hare_server {
    std::unique_ptr<hare::gateway::Server> server;
};

namespace {

thread_local std::string last_error;

hare_status fail(hare_status status, const std::string& message) {
    last_error = message;
    return status;
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void put(char** out, const std::string& s) {
    if (out) *out = dup(s);
}

/// Maps exceptions escaping the core onto status codes.
template <typename F>
hare_status guarded(F&& body) {
    try {
        last_error.clear();
        return body();
    } catch (const hare::ConfigError& e) {
        return fail(HARE_ERR_CONFIG, e.what());
    } catch (const hare::ParseError& e) {
        return fail(HARE_ERR_PARSE, e.what());
    } catch (const hare::ProtocolError& e) {
        return fail(HARE_ERR_PROTOCOL, e.what());
    } catch (const nlohmann::json::exception& e) {
        return fail(HARE_ERR_CONFIG, std::string("invalid JSON: ") + e.what());
    } catch (const std::exception& e) {
        return fail(HARE_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(HARE_ERR_RUNTIME, "unknown error");
    }
}

nlohmann::json parse_json(const char* text, const char* what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw hare::ConfigError("/", std::string(what) + " is not valid JSON: " + e.what());
    }
}

hare::RunRecord read_record(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure(std::string("cannot open ") + path);
    std::ostringstream text;
    text << in.rdbuf();
    return hare::RunRecord::parse(text.str());
}

nlohmann::json replay_json(const hare::ReplayReport& r) {
    nlohmann::json out{{"ok", r.ok}, {"samples_compared", r.samples_compared}};
    if (!r.ok) {
        out["first_divergent_tick"] = r.first_divergent_tick;
        out["detail"] = r.detail;
    }
    return out;
}

}  // namespace

extern "C" {

void hare_string_free(char* s) { std::free(s); }

const char* hare_last_error(void) { return last_error.c_str(); }

const char* hare_version(void) { return "1.0.0"; }

hare_status hare_sim_create(const char* config_json, uint64_t seed, hare_sim** out) {
    if (!config_json || !out) return fail(HARE_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto doc = parse_json(config_json, "config");
        if (doc.is_object()) doc["seed"] = seed;
        auto config = hare::parse_config(doc);
        auto handle = std::make_unique<hare_sim>();
        handle->sim = std::make_unique<hare::Simulation>(config, seed);
        *out = handle.release();
        return HARE_OK;
    });
}

void hare_sim_destroy(hare_sim* sim) { delete sim; }

hare_status hare_sim_step(hare_sim* sim, int64_t ticks, int* done) {
    if (!sim || ticks < 0) return fail(HARE_ERR_ARGUMENT, "null handle or negative tick count");
    return guarded([&] {
        for (int64_t i = 0; i < ticks && !sim->sim->done(); ++i) sim->sim->step();
        if (done) *done = sim->sim->done() ? 1 : 0;
        return HARE_OK;
    });
}

hare_status hare_sim_run(hare_sim* sim) {
    if (!sim) return fail(HARE_ERR_ARGUMENT, "null handle");
    return guarded([&] {
        sim->sim->run_to_end();
        return HARE_OK;
    });
}

hare_status hare_sim_tick(const hare_sim* sim, int64_t* tick) {
    if (!sim || !tick) return fail(HARE_ERR_ARGUMENT, "null argument");
    *tick = sim->sim->clock().tick_index;
    last_error.clear();
    return HARE_OK;
}

hare_status hare_sim_submit(hare_sim* sim, const char* command_json, char** result_json) {
    if (!sim || !command_json) return fail(HARE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        nlohmann::json payload;
        try {
            payload = nlohmann::json::parse(command_json);
        } catch (const nlohmann::json::parse_error& e) {
            throw hare::ProtocolError(std::string("command is not valid JSON: ") + e.what());
        }
        const auto r = sim->sim->submit(hare::gateway::parse_command(payload, *sim->sim));
        nlohmann::json out{{"accepted", r.accepted}, {"reason", r.accepted ? "" : std::string(hare::to_string(r.reason))}};
        if (!r.client_tag.empty()) out["client_tag"] = r.client_tag;
        out.update(r.account);
        put(result_json, out.dump());
        return HARE_OK;
    });
}

hare_status hare_sim_frame(const hare_sim* sim, int include_cars, char** frame_json) {
    if (!sim || !frame_json) return fail(HARE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        put(frame_json, sim->sim->frame(include_cars != 0).dump());
        return HARE_OK;
    });
}

hare_status hare_sim_metrics(const hare_sim* sim, char** metrics_json) {
    if (!sim || !metrics_json) return fail(HARE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        put(metrics_json, sim->sim->metrics().dump());
        return HARE_OK;
    });
}

hare_status hare_sim_write_record(const hare_sim* sim, const char* path) {
    if (!sim || !path) return fail(HARE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        try {
            sim->sim->record().write(path);
        } catch (const std::exception& e) {
            return fail(HARE_ERR_IO, e.what());
        }
        return HARE_OK;
    });
}

hare_status hare_run_headless(const char* config_json, uint64_t seed, const char* record_path, char** metrics_json) {
    if (!config_json) return fail(HARE_ERR_ARGUMENT, "null config");
    return guarded([&] {
        auto doc = parse_json(config_json, "config");
        if (doc.is_object()) doc["seed"] = seed;
        const auto config = hare::parse_config(doc);
        const auto record = hare::run_headless(config, seed);
        if (record_path) {
            try {
                record.write(record_path);
            } catch (const std::exception& e) {
                return fail(HARE_ERR_IO, e.what());
            }
        }
        put(metrics_json, record.summary().dump());
        return HARE_OK;
    });
}

hare_status hare_run_matrix(const char* matrix_json, const char* out_dir, unsigned workers, char** summary_csv) {
    if (!matrix_json) return fail(HARE_ERR_ARGUMENT, "null matrix");
    return guarded([&] {
        const auto matrix = hare::parse_matrix(parse_json(matrix_json, "matrix"));
        hare::MatrixOptions options;
        options.workers = workers;
        if (out_dir) options.out_dir = out_dir;
        const auto result = hare::run_matrix(matrix, options);
        if (out_dir) {
            try {
                hare::write_tables(result, out_dir);
            } catch (const std::exception& e) {
                return fail(HARE_ERR_IO, e.what());
            }
        }
        put(summary_csv, hare::summary_csv(result));
        return HARE_OK;
    });
}

hare_status hare_replay_check(const char* record_path, char** report_json) {
    if (!record_path) return fail(HARE_ERR_ARGUMENT, "null path");
    return guarded([&] {
        hare::RunRecord record;
        try {
            record = read_record(record_path);
        } catch (const std::ios_base::failure& e) {
            return fail(HARE_ERR_IO, e.what());
        }
        const auto report = hare::replay_check(record);
        put(report_json, replay_json(report).dump());
        if (!report.ok)
            return fail(HARE_ERR_DIVERGENCE,
                        "diverged at tick " + std::to_string(report.first_divergent_tick) + ": " + report.detail);
        return HARE_OK;
    });
}

hare_status hare_replay_stream(const char* record_path, double speed, uint16_t port,
                               void (*on_listening)(uint16_t, void*), void* user, char** report_json) {
    if (!record_path || !(speed > 0)) return fail(HARE_ERR_ARGUMENT, "null path or non-positive speed");
    return guarded([&] {
        hare::RunRecord record;
        try {
            record = read_record(record_path);
        } catch (const std::ios_base::failure& e) {
            return fail(HARE_ERR_IO, e.what());
        }
        std::function<void(unsigned short)> notify;
        if (on_listening) notify = [&](unsigned short p) { on_listening(p, user); };
        const auto report = hare::gateway::replay_stream(record, speed, port, notify);
        put(report_json, replay_json(report).dump());
        if (!report.ok)
            return fail(HARE_ERR_DIVERGENCE,
                        "diverged at tick " + std::to_string(report.first_divergent_tick) + ": " + report.detail);
        return HARE_OK;
    });
}

hare_status hare_oracle(const char* config_json, char** result_json) {
    if (!config_json || !result_json) return fail(HARE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        const auto config = hare::parse_config(parse_json(config_json, "config"));
        hare::oracles::OracleResult result;
        if (config.scenario == hare::Scenario::Traffic) {
            const auto net = hare::traffic::RoadNetwork::from_spec(config.traffic.network);
            result = hare::oracles::optimal_throughput(net, *net.find_node(config.traffic.network.sink),
                                                       config.traffic.car_count);
        } else {
            hare::oracles::WelfareInstance in;
            in.activities = hare::oracles::activity_table_for(config, config.seed);
            in.refill = config.water.refill;
            in.capacity = config.water.tank_capacity;
            in.initial_level = config.water.initial_level;
            in.days = static_cast<int>(config.duration);
            result = hare::oracles::optimal_welfare(in);
        }
        nlohmann::json out{{"objective", result.objective},
                           {"units", config.scenario == hare::Scenario::Traffic ? "transits per second" : "value"},
                           {"method", result.method},
                           {"compute_ms", result.compute_ms},
                           {"key", hare::oracles::oracle_key(config)},
                           {"key_hash", hare::oracles::oracle_key_hash(config)},
                           {"certificate", result.certificate}};
        put(result_json, out.dump());
        return HARE_OK;
    });
}

hare_status hare_forecast_accuracy(const char* record_path, char** result_json) {
    if (!record_path || !result_json) return fail(HARE_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        hare::RunRecord record;
        try {
            record = read_record(record_path);
        } catch (const std::ios_base::failure& e) {
            return fail(HARE_ERR_IO, e.what());
        }
        const auto acc = hare::record_accuracy(record);
        nlohmann::json out{{"accuracy", acc.accuracy},
                           {"comparisons", acc.comparisons},
                           {"matches", acc.matches},
                           {"change_comparisons", acc.change_comparisons},
                           {"change_matches", acc.change_matches}};
        if (acc.change_comparisons > 0) out["change_accuracy"] = acc.change_accuracy;
        put(result_json, out.dump());
        return HARE_OK;
    });
}

hare_status hare_server_start(const char* options_json, hare_server** out) {
    if (!out) return fail(HARE_ERR_ARGUMENT, "null output");
    *out = nullptr;
    return guarded([&] {
        hare::gateway::ServerOptions options;
        if (options_json) {
            const auto doc = parse_json(options_json, "server options");
            if (!doc.is_object()) throw hare::ConfigError("/", "expected object");
            if (doc.contains("host")) options.host = doc.at("host").get<std::string>();
            if (doc.contains("port")) {
                const auto& p = doc.at("port");
                if (!p.is_number_unsigned() || p.get<unsigned>() > 65535) throw hare::ConfigError("/port", "expected port");
                options.port = static_cast<unsigned short>(p.get<unsigned>());
            }
            if (doc.contains("config")) {
                options.default_config = doc.at("config");
                hare::parse_config(options.default_config);
            }
            if (doc.contains("frame_rate")) {
                const double rate = doc.at("frame_rate").get<double>();
                if (!(rate > 0)) throw hare::ConfigError("/frame_rate", "must be > 0");
                options.frame_rate = rate;
            }
            if (doc.contains("pacing")) {
                const auto p = doc.at("pacing").get<std::string>();
                if (p == "realtime") options.pacing = hare::gateway::Pacing::Realtime;
                else if (p == "free") options.pacing = hare::gateway::Pacing::FreeRun;
                else if (p == "manual") options.pacing = hare::gateway::Pacing::Manual;
                else throw hare::ConfigError("/pacing", "expected realtime | free | manual");
            }
        }
        options = hare::gateway::apply_env(options);
        auto handle = std::make_unique<hare_server>();
        handle->server = std::make_unique<hare::gateway::Server>(options);
        try {
            handle->server->start();
        } catch (const std::runtime_error& e) {
            return fail(HARE_ERR_IO, e.what());
        }
        *out = handle.release();
        return HARE_OK;
    });
}

uint16_t hare_server_port(const hare_server* server) { return server ? server->server->port() : 0; }

void hare_server_stop(hare_server* server) {
    if (!server) return;
    server->server->stop();
    delete server;
}

}  // extern "C"
