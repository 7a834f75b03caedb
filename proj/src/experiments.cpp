// SPDX-License-Identifier: Apache-2.0
#include "cad/experiments.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>
#include <type_traits>

#include "cad/metrics.hpp"

namespace cad {

using nlohmann::json;

namespace {

bool is_integral_axis(const std::string& a) {
    return a == "L" || a == "M" || a == "cooperation-degree";
}

// Line of the key at a dotted path, following the path in document order.
// Falls back to the deepest segment found; 0 when nothing matches.
int key_line(const std::string& text, const std::string& path) {
    std::size_t pos = std::string::npos;
    std::size_t from = 0;
    std::stringstream ss(path);
    std::string seg;
    while (std::getline(ss, seg, '.')) {
        const std::string needle = "\"" + seg + "\"";
        std::size_t p = from;
        bool hit = false;
        while ((p = text.find(needle, p)) != std::string::npos) {
            std::size_t q = p + needle.size();
            while (q < text.size() && std::isspace(static_cast<unsigned char>(text[q]))) ++q;
            if (q < text.size() && text[q] == ':') {
                hit = true;
                break;
            }
            p = q;
        }
        if (!hit) break;
        pos = p;
        from = p + needle.size();
    }
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
public:
    Reader(const std::string& text, const std::string& origin) : text_(text), origin_(origin) {}

    [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
        const int line = path.empty() ? 0 : key_line(text_, path);
        throw ConfigError(origin_ + ":" + std::to_string(std::max(line, 1)) + ": " + msg);
    }

    void keys(const json& obj, const std::string& sect, std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(sect, (sect.empty() ? "document" : sect) + " must be an object");
        for (const auto& [k, v] : obj.items()) {
            (void)v;
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
                fail(join(sect, k), "unknown key \"" + join(sect, k) + "\"");
        }
    }

    template <class T>
    void get(const json& obj, const std::string& sect, const char* key, T& out) const {
        if (!obj.contains(key)) return;
        const json& v = obj.at(key);
        const std::string path = join(sect, key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) fail(path, path + " must be a boolean");
            out = v.get<bool>();
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) fail(path, path + " must be a string");
            out = v.get<std::string>();
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            if (!v.is_number_unsigned()) fail(path, path + " must be a nonnegative integer");
            out = v.get<std::uint64_t>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer()) fail(path, path + " must be an integer");
            const auto x = v.get<long long>();
            if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max())
                fail(path, path + " is out of range");
            out = static_cast<T>(x);
        } else if constexpr (std::is_same_v<T, double>) {
            if (!v.is_number()) fail(path, path + " must be a number");
            out = v.get<double>();
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
            if (!v.is_array()) fail(path, path + " must be an array of numbers");
            out.clear();
            for (const auto& e : v) {
                if (!e.is_number()) fail(path, path + " must be an array of numbers");
                out.push_back(e.get<double>());
            }
        } else if constexpr (std::is_same_v<T, std::vector<int>>) {
            if (!v.is_array()) fail(path, path + " must be an array of integers");
            out.clear();
            for (const auto& e : v) {
                if (!e.is_number_integer()) fail(path, path + " must be an array of integers");
                out.push_back(e.get<int>());
            }
        } else {
            static_assert(sizeof(T) == 0, "unsupported field type");
        }
    }

    static std::string join(const std::string& sect, const std::string& key) {
        return sect.empty() ? key : sect + "." + key;
    }

private:
    const std::string& text_;
    const std::string& origin_;
};

// Dotted key at the head of a validation message, e.g. "signal.L must be ...".
std::string message_path(const std::string& msg) {
    const auto end = msg.find_first_of(" :");
    return msg.substr(0, end);
}

NeighborSets neighbor_sets(const TopologyConfig& t) {
    const auto aps = ap_grid(t.B, t.ap_spacing_km, t.coverage_radius_km);
    return t.cooperation_degree >= 0 ? neighbors_by_degree(aps, t.cooperation_degree)
                                     : neighbors_by_radius(aps, t.cooperation_radius_km);
}

bool all_singletons(const NeighborSets& nb) {
    return std::all_of(nb.begin(), nb.end(), [](const auto& s) { return s.size() == 1; });
}

double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (schema_version != kSchemaVersion)
        throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion));
    if (mode != "sourced" && mode != "unsourced")
        throw ConfigError("mode must be \"sourced\" or \"unsourced\"");
    if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end())
        throw ConfigError("sweep.axis is not a known axis");
    if (mode == "unsourced" && axis == "activity-prob")
        throw ConfigError("sweep.axis activity-prob applies to sourced mode only");
    if (grid.empty()) throw ConfigError("sweep.grid must be non-empty");
    for (double v : grid) {
        if (!std::isfinite(v)) throw ConfigError("sweep.grid values must be finite");
        if (is_integral_axis(axis) && v != std::floor(v))
            throw ConfigError("sweep.grid values must be integers for axis " + axis);
    }
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    if (!std::isfinite(tx_power_offset_db)) throw ConfigError("signal.tx_power_offset_db must be finite");
    for (double v : grid) {
        const ExperimentConfig c = at(v);
        c.topology.validate();
        if (c.topology.cooperation_degree < -1)
            throw ConfigError("topology.cooperation_degree must be >= 0 (or -1 for the radius rule)");
        c.solver.validate();
        if (mode == "sourced") {
            c.signal.validate(c.topology.N);
        } else {
            SignalConfig s = c.signal;
            s.activity = "fixed";
            s.validate(s.K);
            c.codec.validate();
        }
    }
}

ExperimentConfig ExperimentConfig::at(double v) const {
    ExperimentConfig c = *this;
    c.grid = {v};
    if (axis == "L") c.signal.L = static_cast<int>(v);
    else if (axis == "M") c.signal.M = static_cast<int>(v);
    else if (axis == "SNR") c.signal.snr_db = v;
    else if (axis == "cooperation-degree") c.topology.cooperation_degree = static_cast<int>(v);
    else if (axis == "activity-prob") {
        c.signal.activity = "bernoulli";
        c.signal.activity_prob = v;
    } else if (axis == "transmit-power") c.tx_power_offset_db = v;
    else if (axis == "p-bar") c.solver.p_bar = v;
    return c;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // byte offset -> line
        const auto off = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(off > 0 ? off - 1 : 0), '\n'));
        std::string what = e.what();
        const auto colon = what.find(": ");
        if (colon != std::string::npos) what = what.substr(colon + 2);
        throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
    }

    const Reader r(text, origin);
    ExperimentConfig c;
    r.keys(doc, "", {"schema_version", "mode", "topology", "signal", "solver", "codec", "sweep",
                     "trials", "seed", "output", "threads", "traces"});
    if (!doc.contains("schema_version")) r.fail("", "missing schema_version");
    r.get(doc, "", "schema_version", c.schema_version);
    if (c.schema_version != kSchemaVersion)
        r.fail("schema_version", "unsupported schema_version " + std::to_string(c.schema_version));
    r.get(doc, "", "mode", c.mode);
    r.get(doc, "", "trials", c.trials);
    r.get(doc, "", "seed", c.seed);
    r.get(doc, "", "output", c.output);
    r.get(doc, "", "threads", c.threads);
    r.get(doc, "", "traces", c.traces);

    if (doc.contains("topology")) {
        const json& t = doc["topology"];
        r.keys(t, "topology", {"B", "N", "coverage_radius_km", "ap_spacing_km", "cooperation_radius_km",
                               "cooperation_degree", "pathloss_intercept_db", "pathloss_slope",
                               "min_distance_km"});
        auto& o = c.topology;
        r.get(t, "topology", "B", o.B);
        r.get(t, "topology", "N", o.N);
        r.get(t, "topology", "coverage_radius_km", o.coverage_radius_km);
        r.get(t, "topology", "ap_spacing_km", o.ap_spacing_km);
        r.get(t, "topology", "cooperation_radius_km", o.cooperation_radius_km);
        r.get(t, "topology", "cooperation_degree", o.cooperation_degree);
        r.get(t, "topology", "pathloss_intercept_db", o.pathloss_intercept_db);
        r.get(t, "topology", "pathloss_slope", o.pathloss_slope);
        r.get(t, "topology", "min_distance_km", o.min_distance_km);
    }
    if (doc.contains("signal")) {
        const json& s = doc["signal"];
        r.keys(s, "signal", {"K", "activity", "activity_prob", "L", "M", "snr_db", "sigma2",
                             "tx_power_offset_db"});
        auto& o = c.signal;
        r.get(s, "signal", "K", o.K);
        r.get(s, "signal", "activity", o.activity);
        r.get(s, "signal", "activity_prob", o.activity_prob);
        r.get(s, "signal", "L", o.L);
        r.get(s, "signal", "M", o.M);
        r.get(s, "signal", "snr_db", o.snr_db);
        r.get(s, "signal", "sigma2", o.sigma2);
        r.get(s, "signal", "tx_power_offset_db", c.tx_power_offset_db);
    }
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        r.keys(s, "solver", {"theta", "beta", "tau", "rho", "epsilon", "p_bar", "eta0", "omega",
                             "max_iters"});
        auto& o = c.solver;
        r.get(s, "solver", "theta", o.theta);
        r.get(s, "solver", "beta", o.beta);
        r.get(s, "solver", "tau", o.tau);
        r.get(s, "solver", "rho", o.rho);
        r.get(s, "solver", "epsilon", o.epsilon);
        r.get(s, "solver", "p_bar", o.p_bar);
        r.get(s, "solver", "eta0", o.eta0);
        r.get(s, "solver", "omega", o.omega);
        r.get(s, "solver", "max_iters", o.max_iters);
    }
    if (doc.contains("codec")) {
        const json& s = doc["codec"];
        r.keys(s, "codec", {"J", "Z", "parity_bits", "data_bits", "parity_seed", "nu"});
        auto& o = c.codec;
        r.get(s, "codec", "J", o.J);
        r.get(s, "codec", "Z", o.Z);
        r.get(s, "codec", "parity_bits", o.parity_bits);
        r.get(s, "codec", "data_bits", o.data_bits);
        r.get(s, "codec", "parity_seed", o.parity_seed);
        r.get(s, "codec", "nu", o.nu);
    }
    if (doc.contains("sweep")) {
        const json& s = doc["sweep"];
        r.keys(s, "sweep", {"axis", "grid"});
        r.get(s, "sweep", "axis", c.axis);
        r.get(s, "sweep", "grid", c.grid);
    }

    try {
        c.validate();
    } catch (const ConfigError& e) {
        r.fail(message_path(e.what()), e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ":1: cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

json canonical_json(const ExperimentConfig& c) {
    const bool sourced = c.mode == "sourced";
    json t = {{"B", c.topology.B},
              {"coverage_radius_km", c.topology.coverage_radius_km},
              {"ap_spacing_km", c.topology.ap_spacing_km},
              {"cooperation_degree", c.topology.cooperation_degree},
              {"pathloss_intercept_db", c.topology.pathloss_intercept_db},
              {"pathloss_slope", c.topology.pathloss_slope},
              {"min_distance_km", c.topology.min_distance_km}};
    // Fields that cannot influence any result are left out, so the hash moves
    // only with meaningful changes.
    if (c.topology.cooperation_degree < 0 || c.axis == "cooperation-degree")
        t["cooperation_radius_km"] = c.topology.cooperation_radius_km;
    if (sourced) t["N"] = c.topology.N;

    json s = {{"K", c.signal.K},
              {"L", c.signal.L},
              {"M", c.signal.M},
              {"snr_db", c.signal.snr_db},
              {"sigma2", c.signal.sigma2},
              {"tx_power_offset_db", c.tx_power_offset_db}};
    if (sourced) {
        s["activity"] = c.signal.activity;
        if (c.signal.activity == "bernoulli" && c.axis != "activity-prob")
            s["activity_prob"] = c.signal.activity_prob;
    }
    json v = {{"theta", c.solver.theta}, {"beta", c.solver.beta},       {"tau", c.solver.tau},
              {"rho", c.solver.rho},     {"epsilon", c.solver.epsilon}, {"p_bar", c.solver.p_bar},
              {"eta0", c.solver.eta0},   {"omega", c.solver.omega},     {"max_iters", c.solver.max_iters}};
    // the swept field is set per point by the grid
    if (c.axis == "L") s.erase("L");
    else if (c.axis == "M") s.erase("M");
    else if (c.axis == "SNR") s.erase("snr_db");
    else if (c.axis == "cooperation-degree") t.erase("cooperation_degree");
    else if (c.axis == "activity-prob") s.erase("activity");
    else if (c.axis == "transmit-power") s.erase("tx_power_offset_db");
    else if (c.axis == "p-bar") v.erase("p_bar");
    json j = {{"schema_version", c.schema_version},
              {"mode", c.mode},
              {"topology", t},
              {"signal", s},
              {"solver", v},
              {"sweep", {{"axis", c.axis}, {"grid", c.grid}}},
              {"trials", c.trials},
              {"seed", c.seed}};
    if (!sourced) {
        const TreeCodeConfig tc = c.codec.tree();
        // the resolved per-subblock profile, however it was specified
        j["codec"] = {{"J", c.codec.J},
                      {"Z", c.codec.Z},
                      {"data_bits", tc.data_bits},
                      {"parity_seed", c.codec.parity_seed},
                      {"nu", c.codec.nu}};
    }
    return j;
}

std::string fingerprint(const ExperimentConfig& cfg) {
    const std::string text = canonical_json(cfg).dump();
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::uint64_t trial_seed(std::uint64_t master, int trial) {
    return derive_seed(master, {static_cast<std::uint64_t>(trial)});
}

TrialRow run_trial(const ExperimentConfig& c, std::uint64_t seed, bool keep_trace) {
    TrialRow row;
    row.seed = seed;
    SignalConfig sig = c.signal;
    sig.snr_db += c.tx_power_offset_db;
    SolverConfig sc = c.solver;
    // Singleton neighbor sets: the similarity weight is zero as well.
    if (all_singletons(neighbor_sets(c.topology))) sc.tau = 0;

    if (c.mode == "sourced") {
        const SourcedInstance inst = make_sourced_instance(c.topology, sig, seed);
        CadSolver solver(inst.problem(), sc, seed);
        const SolverResult res = solver.run();
        const int B = static_cast<int>(res.gamma.size());
        for (int b = 0; b < B; ++b) {
            const auto e = detection_error(inst.activity, threshold_activity(res.gamma[b], inst.sigma2, sc.omega));
            row.miss += e.miss / B;
            row.false_alarm += e.false_alarm / B;
        }
        row.metric = row.miss + row.false_alarm;
        row.grad_evals = res.trace.grad_evals;
        if (keep_trace)
            for (const auto& per_ap : res.trace.objective) row.trace.push_back(mean_of(per_ap));
    } else {
        const UnsourcedTrial u = run_unsourced_trial(c.topology, sig, c.codec, sc, nullptr, seed);
        row.metric = u.metrics.p_e;
        row.miss = mean_of(u.metrics.p_md);
        row.false_alarm = mean_of(u.metrics.p_fa);
        row.grad_evals = u.grad_evals;
    }
    if (!std::isfinite(row.metric)) throw NumericalError("trial metric is not finite");
    return row;
}

std::vector<PointSummary> summarize(const std::vector<double>& grid, const std::vector<TrialRow>& rows) {
    std::vector<PointSummary> out(grid.size());
    for (std::size_t p = 0; p < grid.size(); ++p) {
        out[p].axis_value = grid[p];
        std::vector<double> m, md, fa, ge;
        for (const auto& r : rows) {
            if (r.point != static_cast<int>(p)) continue;
            if (r.aborted) {
                ++out[p].aborts;
                continue;
            }
            m.push_back(r.metric);
            md.push_back(r.miss);
            fa.push_back(r.false_alarm);
            ge.push_back(static_cast<double>(r.grad_evals));
        }
        out[p].trials = static_cast<int>(m.size());
        out[p].mean = mean_of(m);
        out[p].miss = mean_of(md);
        out[p].false_alarm = mean_of(fa);
        out[p].grad_evals = mean_of(ge);
        if (m.size() > 1) {
            double ss = 0;
            for (double x : m) ss += (x - out[p].mean) * (x - out[p].mean);
            out[p].stderr_ = std::sqrt(ss / static_cast<double>(m.size() - 1) / static_cast<double>(m.size()));
        } else {
            out[p].stderr_ = m.empty() ? std::numeric_limits<double>::quiet_NaN() : 0.0;
        }
    }
    return out;
}

RunRecord run_sweep(const ExperimentConfig& cfg, const Progress& progress) {
    cfg.validate();
    const int P = static_cast<int>(cfg.grid.size());
    const int total = P * cfg.trials;
    std::vector<ExperimentConfig> points;
    for (double v : cfg.grid) points.push_back(cfg.at(v));

    std::vector<TrialRow> rows(static_cast<std::size_t>(total));
    std::atomic<int> next{0};
    std::mutex mu;
    int done = 0;
    auto worker = [&] {
        for (int i; (i = next.fetch_add(1)) < total;) {
            const int p = i / cfg.trials;
            const int k = i % cfg.trials;
            const std::uint64_t s = trial_seed(cfg.seed, k);  // shared across points: paired comparisons
            TrialRow row;
            try {
                row = run_trial(points[static_cast<std::size_t>(p)], s, cfg.traces);
            } catch (const std::exception& e) {
                row = TrialRow{};
                row.aborted = true;
                row.error = e.what();
                row.metric = row.miss = row.false_alarm = std::numeric_limits<double>::quiet_NaN();
            }
            row.point = p;
            row.trial = k;
            row.seed = s;
            row.axis_value = cfg.grid[static_cast<std::size_t>(p)];
            rows[static_cast<std::size_t>(i)] = std::move(row);
            if (progress) {
                std::lock_guard<std::mutex> lock(mu);
                progress(++done, total);
            }
        }
    };
    unsigned n = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    n = std::clamp(n, 1u, static_cast<unsigned>(std::max(total, 1)));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    RunRecord rec;
    rec.fingerprint = fingerprint(cfg);
    rec.seed = cfg.seed;
    rec.mode = cfg.mode;
    rec.axis = cfg.axis;
    rec.config = canonical_json(cfg);
    rec.rows = std::move(rows);
    rec.points = summarize(cfg.grid, rec.rows);
    return rec;
}

json to_json(const RunRecord& rec) {
    json points = json::array();
    for (const auto& p : rec.points)
        points.push_back({{"axis_value", p.axis_value},
                          {"mean", number_or_null(p.mean)},
                          {"stderr", number_or_null(p.stderr_)},
                          {"trials", p.trials},
                          {"aborts", p.aborts},
                          {"miss", number_or_null(p.miss)},
                          {"false_alarm", number_or_null(p.false_alarm)},
                          {"grad_evals", number_or_null(p.grad_evals)}});
    json rows = json::array();
    for (const auto& r : rec.rows) {
        json j = {{"point", r.point},
                  {"trial", r.trial},
                  {"seed", r.seed},
                  {"axis_value", r.axis_value},
                  {"metric", number_or_null(r.metric)},
                  {"miss", number_or_null(r.miss)},
                  {"false_alarm", number_or_null(r.false_alarm)},
                  {"grad_evals", r.grad_evals},
                  {"aborted", r.aborted}};
        if (r.aborted) j["error"] = r.error;
        if (!r.trace.empty()) j["trace"] = r.trace;
        rows.push_back(std::move(j));
    }
    return {{"schema_version", rec.schema_version},
            {"fingerprint", rec.fingerprint},
            {"seed", rec.seed},
            {"mode", rec.mode},
            {"axis", rec.axis},
            {"metric", rec.mode == "sourced" ? "AER" : "P_e"},
            {"config", rec.config},
            {"points", points},
            {"rows", rows}};
}

RunRecord record_from_json(const json& j) {
    try {
        RunRecord rec;
        rec.schema_version = j.at("schema_version").get<int>();
        if (rec.schema_version != kSchemaVersion) throw ConfigError("unsupported RunRecord schema_version");
        rec.fingerprint = j.at("fingerprint").get<std::string>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.mode = j.at("mode").get<std::string>();
        rec.axis = j.at("axis").get<std::string>();
        rec.config = j.at("config");
        for (const auto& p : j.at("points")) {
            PointSummary s;
            s.axis_value = p.at("axis_value").get<double>();
            s.mean = number_from(p.at("mean"));
            s.stderr_ = number_from(p.at("stderr"));
            s.trials = p.at("trials").get<int>();
            s.aborts = p.at("aborts").get<int>();
            s.miss = number_from(p.at("miss"));
            s.false_alarm = number_from(p.at("false_alarm"));
            s.grad_evals = number_from(p.at("grad_evals"));
            rec.points.push_back(s);
        }
        for (const auto& r : j.at("rows")) {
            TrialRow t;
            t.point = r.at("point").get<int>();
            t.trial = r.at("trial").get<int>();
            t.seed = r.at("seed").get<std::uint64_t>();
            t.axis_value = r.at("axis_value").get<double>();
            t.metric = number_from(r.at("metric"));
            t.miss = number_from(r.at("miss"));
            t.false_alarm = number_from(r.at("false_alarm"));
            t.grad_evals = r.at("grad_evals").get<long>();
            t.aborted = r.at("aborted").get<bool>();
            if (r.contains("error")) t.error = r.at("error").get<std::string>();
            if (r.contains("trace")) t.trace = r.at("trace").get<std::vector<double>>();
            rec.rows.push_back(std::move(t));
        }
        return rec;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed RunRecord: ") + e.what());
    }
}

std::string dump_record(const RunRecord& rec) { return to_json(rec).dump(2) + "\n"; }

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string report_csv(const RunRecord& rec) {
    std::string out = "axis,mean,stderr,trials,aborts\n";
    for (const auto& p : rec.points) {
        out += format_number(p.axis_value) + "," + format_number(p.mean) + "," + format_number(p.stderr_) +
               "," + std::to_string(p.trials) + "," + std::to_string(p.aborts) + "\n";
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace cad
