// SPDX-License-Identifier: Apache-2.0
// cadsim: run, sweep and report activity-detection experiments.
//
//   cadsim run --config desk_sourced --seed 7 --out results
//   cadsim sweep --config desk_sourced --axis M --grid 8,16,32 --trials 20
//   cadsim report results/desk_sourced.json
//   cadsim selftest
//
// Exit codes: 0 success, 1 config error, 2 runtime abort, 3 selftest failure.
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "cad/experiments.hpp"
#include "cad/selftest.hpp"

#ifndef CAD_CONFIG_DIR
#define CAD_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kConfig = 1, kRuntime = 2, kSelftest = 3 };

// A path, or the name of a shipped config ("desk_sourced").
fs::path resolve_config(const std::string& name) {
    if (fs::is_regular_file(name)) return name;
    for (const fs::path& dir : {fs::path("configs"), fs::path(CAD_CONFIG_DIR)}) {
        for (const char* ext : {"", ".json"}) {
            const fs::path p = dir / (name + ext);
            if (fs::is_regular_file(p)) return p;
        }
    }
    throw cad::ConfigError(name + ":1: no such config file or shipped config");
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw cad::ConfigError("--grid: bad value \"" + item + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw cad::ConfigError("--grid: empty list");
    return out;
}

struct RunOptions {
    std::string config = "desk_sourced";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> trials;
    std::optional<std::string> axis;
    std::optional<std::string> grid;
    std::optional<std::string> mode;
    bool quiet = false;
};

int execute(const RunOptions& o) {
    const fs::path path = resolve_config(o.config);
    cad::ExperimentConfig cfg = cad::load_config(path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (o.out) cfg.output = *o.out;
    if (o.mode) cfg.mode = *o.mode;
    if (o.axis) cfg.axis = *o.axis;
    if (o.grid) cfg.grid = parse_grid(*o.grid);
    try {
        cfg.validate();
    } catch (const cad::ConfigError& e) {
        throw cad::ConfigError(std::string("command line: ") + e.what());
    }

    const auto progress = [&](int done, int total) {
        if (!o.quiet) std::fprintf(stderr, "\r%d/%d trials", done, total);
        if (!o.quiet && done == total) std::fprintf(stderr, "\n");
    };
    const cad::RunRecord rec = cad::run_sweep(cfg, progress);

    const std::string stem = path.stem().string();
    const fs::path json_path = fs::path(cfg.output) / (stem + ".json");
    const fs::path csv_path = fs::path(cfg.output) / (stem + ".csv");
    cad::write_atomic(json_path, cad::dump_record(rec));
    cad::write_atomic(csv_path, cad::report_csv(rec));

    int aborts = 0;
    for (const auto& p : rec.points) aborts += p.aborts;
    if (!o.quiet) {
        std::cout << cad::report_csv(rec);
        std::cout << "wrote " << json_path.string() << " and " << csv_path.string() << "\n";
    }
    if (aborts > 0) {
        std::cerr << aborts << " trial(s) aborted; see the rows' error fields\n";
        return kRuntime;
    }
    return kOk;
}

int report(const std::string& record, const std::optional<std::string>& out) {
    std::ifstream in(record, std::ios::binary);
    if (!in) throw cad::ConfigError(record + ":1: cannot open RunRecord");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw cad::ConfigError(record + ": " + e.what());
    }
    const std::string csv = cad::report_csv(cad::record_from_json(j));
    if (out) cad::write_atomic(*out, csv);
    else std::cout << csv;
    return kOk;
}

int selftest(bool quiet) {
    bool ok = true;
    for (const auto& c : cad::run_selftest()) {
        ok = ok && c.passed;
        if (!quiet || !c.passed)
            std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    }
    return ok ? kOk : kSelftest;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative activity detection simulator"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto add_common = [](CLI::App* sub, RunOptions& o) {
        sub->add_option("--config", o.config, "config file or shipped config name");
        sub->add_option("--seed", o.seed, "master seed");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--trials", o.trials, "trials per grid point");
        sub->add_option("--mode", o.mode, "sourced | unsourced");
        sub->add_flag("--quiet", o.quiet, "no progress or summary output");
    };
    auto* run = app.add_subcommand("run", "execute a config file");
    add_common(run, run_opts);

    RunOptions sweep_opts;
    auto* sweep = app.add_subcommand("sweep", "execute a config with axis overrides");
    add_common(sweep, sweep_opts);
    sweep->add_option("--axis", sweep_opts.axis, "L | M | SNR | cooperation-degree | activity-prob | transmit-power | p-bar");
    sweep->add_option("--grid", sweep_opts.grid, "comma-separated axis values");

    std::string record;
    std::optional<std::string> report_out;
    auto* rep = app.add_subcommand("report", "RunRecord JSON -> CSV plot data");
    rep->add_option("record", record, "RunRecord JSON file")->required();
    rep->add_option("--out", report_out, "CSV path (default: stdout)");

    bool st_quiet = false;
    auto* st = app.add_subcommand("selftest", "identity and oracle suite");
    st->add_flag("--quiet", st_quiet, "print failures only");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run) return execute(run_opts);
        if (*sweep) return execute(sweep_opts);
        if (*rep) return report(record, report_out);
        if (*st) return selftest(st_quiet);
    } catch (const cad::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kOk;
}
