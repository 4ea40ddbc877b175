#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kernel/config.hpp"
#include "kernel/run_record.hpp"

namespace hare {

struct ExperimentMatrix {
    SimConfig base;
    std::vector<Adaptivity> adaptivity;
    std::vector<PowerLevel> power;
    std::string policy = "none";  // used for every cell whose power is not none
    std::vector<std::uint64_t> seeds;
};

/// A config document with an extra "matrix" object:
/// {"adaptivity": [...], "power": [...], "policy": name, "seeds": [...] | "seed_count": n}.
/// Missing lists default to the base config's single value.
ExperimentMatrix parse_matrix(const json& doc);

struct RunOutcome {
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    json metrics;
    std::string record_path;
};

struct MetricStats {
    std::size_t n = 0;
    double mean = 0.0;
    double se = 0.0;  // sample standard deviation / sqrt(n); 0 when n < 2
};

MetricStats describe(const std::vector<double>& values);

struct CellResult {
    Adaptivity adaptivity = Adaptivity::Simple;
    PowerLevel power = PowerLevel::None;
    std::string policy;
    std::vector<RunOutcome> runs;
    bool failed = false;  // at least one run failed

    std::string label() const;
    /// Values of a numeric metric over the successful runs.
    std::vector<double> values(const std::string& metric) const;
};

struct MatrixResult {
    Scenario scenario = Scenario::Traffic;
    std::vector<CellResult> cells;
};

using Runner = std::function<RunRecord(const SimConfig&, std::uint64_t)>;

struct MatrixOptions {
    std::optional<std::filesystem::path> out_dir;  // records go to out_dir/records/
    unsigned workers = 0;                          // 0: hardware concurrency
    Runner runner;                                 // defaults to run_headless
};

MatrixResult run_matrix(const ExperimentMatrix& matrix, const MatrixOptions& options = {});

/// The headline metric for a scenario: throughput_pct or utility_pct.
std::string primary_metric(Scenario scenario);

/// Per-cell table: mean and standard error of the primary metric plus raw per-seed values.
std::string summary_csv(const MatrixResult& result);
/// One row per run with every scalar metric.
std::string runs_csv(const MatrixResult& result);
/// Writes summary.csv and runs.csv into `dir`.
void write_tables(const MatrixResult& result, const std::filesystem::path& dir);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;  // one-sided, H1: mean(a) > mean(b)
};

/// Welch two-sample t-test. Requires at least two values per sample.
WelchResult welch_greater(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace hare
