// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cad/scenario.hpp"

namespace cad {

inline constexpr int kSchemaVersion = 1;

// Sweepable axes. "SNR" moves the nearest-AP SNR target; "transmit-power" is a
// dB offset on every device's power on top of that target.
inline const std::vector<std::string>& sweep_axes() {
    static const std::vector<std::string> axes = {
        "L", "M", "SNR", "cooperation-degree", "activity-prob", "transmit-power", "p-bar"};
    return axes;
}

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string mode = "sourced";  // sourced | unsourced
    TopologyConfig topology;
    SignalConfig signal;
    double tx_power_offset_db = 0;
    SolverConfig solver;
    CodecConfig codec;
    std::string axis = "L";
    std::vector<double> grid{40};
    int trials = 50;
    std::uint64_t seed = 1;
    // Not part of the fingerprint.
    std::string output = "out";
    int threads = 0;  // 0: hardware concurrency
    bool traces = false;

    void validate() const;
    // The configuration of one grid point.
    ExperimentConfig at(double axis_value) const;
};

// Parse errors carry "origin:line: message".
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Every semantic field with defaults filled in; keys sorted.
nlohmann::json canonical_json(const ExperimentConfig& cfg);
// SHA-256 (hex) of the canonical JSON dump.
std::string fingerprint(const ExperimentConfig& cfg);

std::uint64_t trial_seed(std::uint64_t master, int trial);

struct TrialRow {
    int point = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double axis_value = 0;
    double metric = 0;  // AER (sourced) or P_e (unsourced)
    double miss = 0;
    double false_alarm = 0;
    long grad_evals = 0;
    bool aborted = false;
    std::string error;
    std::vector<double> trace;  // AP-mean objective per iteration (sourced, optional)
};

struct PointSummary {
    double axis_value = 0;
    double mean = 0;
    double stderr_ = 0;
    int trials = 0;  // completed
    int aborts = 0;
    double miss = 0;
    double false_alarm = 0;
    double grad_evals = 0;
};

struct RunRecord {
    int schema_version = kSchemaVersion;
    std::string fingerprint;
    std::uint64_t seed = 0;
    std::string mode;
    std::string axis;
    nlohmann::json config;
    std::vector<PointSummary> points;
    std::vector<TrialRow> rows;
};

// One end-to-end trial of a grid-point configuration. Throws on failure.
TrialRow run_trial(const ExperimentConfig& point_cfg, std::uint64_t seed, bool keep_trace = false);

// Recomputes the per-point summaries from rows (aborted rows count only as aborts).
std::vector<PointSummary> summarize(const std::vector<double>& grid, const std::vector<TrialRow>& rows);

using Progress = std::function<void(int done, int total)>;
RunRecord run_sweep(const ExperimentConfig& cfg, const Progress& progress = {});

nlohmann::json to_json(const RunRecord& rec);
RunRecord record_from_json(const nlohmann::json& j);
std::string dump_record(const RunRecord& rec);

// Header "axis,mean,stderr,trials,aborts"; numbers in shortest round-trip form.
std::string report_csv(const RunRecord& rec);
std::string format_number(double v);

// Write to a sibling temp file, then rename over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace cad
