#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "cad/experiments.hpp"
#include "cad/metrics.hpp"

using namespace cad;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("cad_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.topology.B = 3;
    c.topology.N = 40;
    c.signal.K = 4;
    c.signal.L = 16;
    c.signal.M = 6;
    c.solver.max_iters = 30;
    c.axis = "M";
    c.grid = {4, 8};
    c.trials = 3;
    c.seed = 99;
    return c;
}

std::string expect_config_error(const std::string& text) {
    try {
        parse_config(text, "cfg.json");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_cli(const std::string& args) {
    const int rc = std::system((std::string(CADSIM_PATH) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("activity error rate") {
    const auto t = activity_from_indicators({1, 0, 0, 1, 0});
    CHECK(compute_aer(t, t) == 0);
    CHECK(compute_aer(t, activity_from_indicators({0, 1, 1, 0, 1})) == 2);
    CHECK(compute_aer(t, activity_from_indicators({1, 1, 0, 0, 0})) == doctest::Approx(0.5 + 1.0 / 3));
    CHECK_THROWS_AS(compute_aer(t, activity_from_indicators({1, 0})), DomainError);
    // vacuous denominators
    CHECK(compute_aer(activity_from_indicators({0, 0}), activity_from_indicators({0, 1})) == 0.5);
    CHECK(compute_aer(activity_from_indicators({1, 1}), activity_from_indicators({0, 1})) == 0.5);

    Stream rng(1, Purpose::Test);
    for (int k = 0; k < 200; ++k) {
        std::vector<std::uint8_t> a(30), b(30);
        int act = 0, miss = 0, fa = 0;
        for (int n = 0; n < 30; ++n) {
            a[n] = rng.bernoulli(0.3);
            b[n] = rng.bernoulli(0.3);
            act += a[n];
            miss += a[n] && !b[n];
            fa += !a[n] && b[n];
        }
        const double want = (act ? double(miss) / act : 0.0) + (act < 30 ? double(fa) / (30 - act) : 0.0);
        CHECK(compute_aer(activity_from_indicators(a), activity_from_indicators(b)) == want);
    }
}

TEST_CASE("shipped configs load and validate") {
    for (const auto& e : fs::directory_iterator(CAD_CONFIG_DIR)) {
        CAPTURE(e.path().string());
        const auto c = load_config(e.path());
        CHECK_NOTHROW(c.validate());
    }
    const auto d = load_config(fs::path(CAD_CONFIG_DIR) / "desk_sourced.json");
    CHECK(d.topology.B == 5);
    CHECK(d.topology.N == 200);
    CHECK(d.signal.K == 20);
    CHECK(d.signal.L == 40);
    CHECK(d.signal.M == 16);
    CHECK(d.solver.max_iters == 150);
    CHECK(d.trials == 50);
}

TEST_CASE("config errors are line-anchored") {
    const std::string good = "{\n  \"schema_version\": 1,\n  \"signal\": {\n    \"M\": 8\n  }\n}\n";
    CHECK_NOTHROW(parse_config(good));

    CHECK(expect_config_error("{\n  \"schema_version\": 1,\n  \"signal\": {\n    \"M\": 0\n  }\n}\n").rfind("cfg.json:4:", 0) == 0);
    CHECK(expect_config_error("{\n  \"schema_version\": 1,\n  \"solver\": {\n    \"tau\": 1,\n    \"bogus\": 2\n  }\n}\n").rfind("cfg.json:5:", 0) == 0);
    CHECK(expect_config_error("{\n  \"schema_version\": 1,\n\n  \"trials\": \"many\"\n}\n").rfind("cfg.json:4:", 0) == 0);
    CHECK(expect_config_error("{\n  \"schema_version\": 1,\n  \"mode\": \"sourced\"\n  \"trials\": 3\n}\n").rfind("cfg.json:4:", 0) == 0);
    CHECK(expect_config_error("{\n  \"schema_version\": 2\n}\n").rfind("cfg.json:2:", 0) == 0);
    CHECK_FALSE(expect_config_error("{\n  \"mode\": \"sourced\"\n}\n").empty());
    CHECK(expect_config_error("{\n \"schema_version\": 1,\n \"sweep\": {\"axis\": \"L\", \"grid\": []}\n}").rfind("cfg.json:3:", 0) == 0);
    CHECK(expect_config_error("{\n \"schema_version\": 1,\n \"sweep\": {\"axis\": \"L\", \"grid\": [20.5]}\n}").rfind("cfg.json:3:", 0) == 0);
    CHECK(expect_config_error("{\n \"schema_version\": 1,\n \"trials\": 0\n}").rfind("cfg.json:3:", 0) == 0);
    CHECK(expect_config_error("{\n \"schema_version\": 1,\n \"sweep\": {\"axis\": \"Q\"}\n}").rfind("cfg.json:3:", 0) == 0);
}

TEST_CASE("fingerprint") {
    const std::string a = "{\"schema_version\": 1, \"seed\": 5, \"signal\": {\"M\": 8, \"K\": 10}, \"trials\": 2}";
    const std::string b = "{\"trials\": 2, \"signal\": {\"K\": 10, \"M\": 8}, \"seed\": 5, \"schema_version\": 1}";
    CHECK(fingerprint(parse_config(a)) == fingerprint(parse_config(b)));
    CHECK(fingerprint(parse_config(a)).size() == 64);

    ExperimentConfig c = small_config();
    const std::string f = fingerprint(c);
    auto changed = [&](auto mutate) {
        ExperimentConfig d = c;
        mutate(d);
        return fingerprint(d) != f;
    };
    CHECK(changed([](ExperimentConfig& d) { d.signal.L = 17; }));
    CHECK(changed([](ExperimentConfig& d) { d.solver.beta = 1.5; }));
    CHECK(changed([](ExperimentConfig& d) { d.seed = 100; }));
    CHECK(changed([](ExperimentConfig& d) { d.grid = {4, 16}; }));
    CHECK(changed([](ExperimentConfig& d) { d.topology.cooperation_degree = 1; }));
    CHECK(changed([](ExperimentConfig& d) { d.trials = 4; }));
    // not semantic
    CHECK_FALSE(changed([](ExperimentConfig& d) { d.output = "elsewhere"; }));
    CHECK_FALSE(changed([](ExperimentConfig& d) { d.threads = 3; }));
    CHECK_FALSE(changed([](ExperimentConfig& d) { d.signal.M = 77; }));         // swept axis
    CHECK_FALSE(changed([](ExperimentConfig& d) { d.codec.nu = 0.5; }));        // unused in sourced mode
    CHECK_FALSE(changed([](ExperimentConfig& d) { d.signal.activity_prob = 0.3; }));  // fixed-K activity
}

TEST_CASE("sweep records: determinism, aggregation, seeds") {
    const ExperimentConfig c = small_config();
    const RunRecord r1 = run_sweep(c);
    const RunRecord r2 = run_sweep(c);
    CHECK(dump_record(r1) == dump_record(r2));
    REQUIRE(r1.points.size() == 2);
    REQUIRE(r1.rows.size() == 6);

    for (std::size_t p = 0; p < 2; ++p) {
        double s = 0;
        int n = 0;
        for (const auto& row : r1.rows)
            if (row.point == static_cast<int>(p)) {
                s += row.metric;
                ++n;
            }
        CHECK(r1.points[p].mean == doctest::Approx(s / n).epsilon(1e-15));
        CHECK(r1.points[p].trials == 3);
        CHECK(r1.points[p].aborts == 0);
    }
    // paired seeds across points, and each row reproduces from its seed
    for (int k = 0; k < 3; ++k) CHECK(r1.rows[k].seed == r1.rows[3 + k].seed);
    const auto& row = r1.rows[4];
    const TrialRow again = run_trial(c.at(row.axis_value), row.seed);
    CHECK(again.metric == row.metric);
    CHECK(again.grad_evals == row.grad_evals);

    // multi-threaded pool gives the same bytes
    ExperimentConfig t = c;
    t.threads = 3;
    CHECK(dump_record(run_sweep(t)) == dump_record(r1));
}

TEST_CASE("RunRecord JSON and CSV roundtrip") {
    ExperimentConfig c = small_config();
    c.traces = true;
    const RunRecord r = run_sweep(c);
    CHECK(r.rows[0].trace.size() == 31);
    const std::string text = dump_record(r);
    const RunRecord back = record_from_json(nlohmann::json::parse(text));
    CHECK(dump_record(back) == text);

    // recomputable from the persisted rows
    const auto recomputed = summarize(c.grid, back.rows);
    for (std::size_t p = 0; p < recomputed.size(); ++p) {
        CHECK(recomputed[p].mean == back.points[p].mean);
        CHECK(recomputed[p].stderr_ == back.points[p].stderr_);
    }

    const std::string csv = report_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "axis,mean,stderr,trials,aborts");
    for (const auto& p : r.points) {
        REQUIRE(std::getline(in, line));
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
        REQUIRE(f.size() == 5);
        CHECK(std::abs(std::stod(f[0]) - p.axis_value) <= 1e-12 * std::abs(p.axis_value));
        CHECK(std::abs(std::stod(f[1]) - p.mean) <= 1e-12 * std::abs(p.mean));
        CHECK(std::abs(std::stod(f[2]) - p.stderr_) <= 1e-12 * std::abs(p.stderr_));
        CHECK(std::stoi(f[3]) == p.trials);
        CHECK(std::stoi(f[4]) == p.aborts);
    }
    for (double v : {0.1, 1.0 / 3, 2.5e-17, 123456.789, -7.0})
        CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("aborted trials are recorded with the point") {
    ExperimentConfig c = small_config();
    c.topology.B = 60;  // more APs than the coverage disc holds
    c.trials = 2;
    const RunRecord r = run_sweep(c);
    for (const auto& p : r.points) {
        CHECK(p.aborts == 2);
        CHECK(p.trials == 0);
    }
    for (const auto& row : r.rows) {
        CHECK(row.aborted);
        CHECK_FALSE(row.error.empty());
    }
    CHECK(report_csv(r).find(",nan,nan,0,2") != std::string::npos);
}

TEST_CASE("axis application") {
    const ExperimentConfig c = small_config();
    ExperimentConfig a = c;
    a.axis = "activity-prob";
    CHECK(a.at(0.2).signal.activity == "bernoulli");
    CHECK(a.at(0.2).signal.activity_prob == 0.2);
    a.axis = "cooperation-degree";
    CHECK(a.at(2).topology.cooperation_degree == 2);
    a.axis = "transmit-power";
    CHECK(a.at(-3).tx_power_offset_db == -3);
    a.axis = "SNR";
    CHECK(a.at(5).signal.snr_db == 5);
    a.axis = "p-bar";
    CHECK(a.at(0.5).solver.p_bar == 0.5);
    a.mode = "unsourced";
    a.axis = "activity-prob";
    CHECK_THROWS_AS(a.validate(), ConfigError);
}

TEST_CASE("non-cooperative degree zero runs without similarity") {
    ExperimentConfig c = small_config();
    c.topology.cooperation_degree = 0;
    const auto a = run_trial(c.at(8), 5);
    c.solver.tau = 0;
    const auto b = run_trial(c.at(8), 5);
    CHECK(a.metric == b.metric);
}

TEST_CASE("atomic write") {
    const fs::path d = scratch_dir("atomic");
    write_atomic(d / "sub" / "x.txt", "hello\n");
    CHECK(slurp(d / "sub" / "x.txt") == "hello\n");
    write_atomic(d / "sub" / "x.txt", "again\n");
    CHECK(slurp(d / "sub" / "x.txt") == "again\n");
    int files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(d / "sub")) ++files;
    CHECK(files == 1);
    fs::remove_all(d);
}

TEST_CASE("command line") {
    const fs::path d = scratch_dir("cli");
    const std::string out = (d / "a").string(), out2 = (d / "b").string();
    CHECK(run_cli("selftest --quiet") == 0);
    CHECK(run_cli("run --config desk_sourced --seed 7 --trials 2 --quiet --out " + out) == 0);
    CHECK(run_cli("run --config desk_sourced --seed 7 --trials 2 --quiet --out " + out2) == 0);
    CHECK(slurp(d / "a" / "desk_sourced.json") == slurp(d / "b" / "desk_sourced.json"));
    CHECK(slurp(d / "a" / "desk_sourced.csv").rfind("axis,mean,stderr,trials,aborts\n", 0) == 0);

    CHECK(run_cli("report " + (d / "a" / "desk_sourced.json").string() + " --out " + (d / "r.csv").string()) == 0);
    CHECK(slurp(d / "r.csv") == slurp(d / "a" / "desk_sourced.csv"));

    std::ofstream(d / "bad.json") << "{\n  \"schema_version\": 1,\n  \"signal\": {\"M\": -1}\n}\n";
    CHECK(run_cli("run --config " + (d / "bad.json").string() + " --quiet --out " + out) == 1);
    CHECK(run_cli("run --config no_such_config --quiet") == 1);
    CHECK(run_cli("sweep --config desk_sourced --axis M --grid 8,x --quiet") == 1);
    CHECK(run_cli("sweep --config desk_sourced --axis M --grid 6 --trials 1 --mode sourced --quiet --out " + out) == 0);
    CHECK(run_cli("frobnicate") == 1);
    fs::remove_all(d);
}
