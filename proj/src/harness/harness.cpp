#include "harness/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "kernel/errors.hpp"
#include "sim/simulation.hpp"

namespace hare {

ExperimentMatrix parse_matrix(const json& doc) {
    if (!doc.is_object()) throw ConfigError("/", "expected object");
    json base = doc;
    json spec = json::object();
    if (base.contains("matrix")) {
        spec = base.at("matrix");
        base.erase("matrix");
    }
    if (!spec.is_object()) throw ConfigError("/matrix", "expected object");
    ExperimentMatrix m;
    m.base = parse_config(base);
    for (auto it = spec.begin(); it != spec.end(); ++it) {
        static const char* known[] = {"adaptivity", "power", "policy", "seeds", "seed_count"};
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError("/matrix/" + it.key(), "unknown field");
    }
    const auto list = [&](const char* key) {
        const auto& v = spec.at(key);
        if (!v.is_array()) throw ConfigError(std::string("/matrix/") + key, "expected array");
        return v;
    };
    if (spec.contains("adaptivity")) {
        const auto v = list("adaptivity");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto path = "/matrix/adaptivity/" + std::to_string(i);
            if (!v[i].is_string()) throw ConfigError(path, "expected string");
            m.adaptivity.push_back(parse_adaptivity(v[i].get<std::string>(), path));
        }
    } else {
        m.adaptivity = {m.base.adaptivity};
    }
    if (spec.contains("power")) {
        const auto v = list("power");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const auto path = "/matrix/power/" + std::to_string(i);
            if (!v[i].is_string()) throw ConfigError(path, "expected string");
            m.power.push_back(parse_power(v[i].get<std::string>(), path));
        }
    } else {
        m.power = {m.base.power};
    }
    m.policy = m.base.policy.name;
    if (spec.contains("policy")) {
        if (!spec.at("policy").is_string()) throw ConfigError("/matrix/policy", "expected string");
        m.policy = spec.at("policy").get<std::string>();
        // Validate the name against the scenario through the ordinary config path.
        json probe = base;
        probe["power"] = "unlimited";
        probe["policy"] = {{"name", m.policy}, {"cadence", m.base.policy.cadence}};
        try {
            parse_config(probe);
        } catch (const ConfigError& e) {
            throw ConfigError("/matrix/policy", e.what());
        }
    }
    if (spec.contains("seeds")) {
        const auto v = list("seeds");
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0)
                throw ConfigError("/matrix/seeds/" + std::to_string(i), "expected seed");
            m.seeds.push_back(v[i].get<std::uint64_t>());
        }
    } else if (spec.contains("seed_count")) {
        const auto& v = spec.at("seed_count");
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("/matrix/seed_count", "expected non-negative integer");
        for (std::uint64_t s = 1; s <= v.get<std::uint64_t>(); ++s) m.seeds.push_back(s);
    } else {
        m.seeds = {m.base.seed};
    }
    return m;
}

MetricStats describe(const std::vector<double>& values) {
    MetricStats s;
    s.n = values.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n < 2) return s;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    return s;
}

std::string CellResult::label() const {
    return std::string(to_string(adaptivity)) + "-" + std::string(to_string(power)) + "-" + policy;
}

std::vector<double> CellResult::values(const std::string& metric) const {
    std::vector<double> out;
    for (const auto& r : runs)
        if (r.ok && r.metrics.contains(metric) && r.metrics.at(metric).is_number())
            out.push_back(r.metrics.at(metric).get<double>());
    return out;
}

std::string primary_metric(Scenario scenario) {
    return scenario == Scenario::Traffic ? "throughput_pct" : "utility_pct";
}

MatrixResult run_matrix(const ExperimentMatrix& matrix, const MatrixOptions& options) {
    MatrixResult result;
    result.scenario = matrix.base.scenario;
    struct Job {
        std::size_t cell;
        std::size_t run;
        SimConfig config;
    };
    std::vector<Job> jobs;
    for (auto a : matrix.adaptivity) {
        for (auto p : matrix.power) {
            CellResult cell;
            cell.adaptivity = a;
            cell.power = p;
            cell.policy = p == PowerLevel::None ? "none" : matrix.policy;
            SimConfig config = matrix.base;
            config.adaptivity = a;
            config.power = p;
            config.policy.name = cell.policy;
            for (auto seed : matrix.seeds) {
                RunOutcome r;
                r.seed = seed;
                cell.runs.push_back(r);
                SimConfig c = config;
                c.seed = seed;
                jobs.push_back({result.cells.size(), cell.runs.size() - 1, c});
            }
            result.cells.push_back(std::move(cell));
        }
    }

    if (options.out_dir) std::filesystem::create_directories(*options.out_dir / "records");
    const Runner runner = options.runner ? options.runner : Runner(run_headless);
    std::atomic<std::size_t> next{0};
    std::mutex mutex;
    const auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const auto& job = jobs[i];
            RunOutcome out;
            out.seed = job.config.seed;
            try {
                const auto record = runner(job.config, job.config.seed);
                out.metrics = record.summary();
                if (out.metrics.is_null()) throw std::runtime_error("run produced no summary");
                if (options.out_dir) {
                    std::lock_guard lock(mutex);
                    const auto& cell = result.cells[job.cell];
                    const auto path = *options.out_dir / "records" /
                                      (cell.label() + "-seed" + std::to_string(out.seed) + ".jsonl");
                    out.record_path = path.string();
                }
                if (options.out_dir) record.write(out.record_path);
                out.ok = true;
            } catch (const std::exception& e) {
                out.ok = false;
                out.error = e.what();
            }
            std::lock_guard lock(mutex);
            result.cells[job.cell].runs[job.run] = std::move(out);
        }
    };
    unsigned workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(1, jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    for (auto& cell : result.cells)
        for (const auto& r : cell.runs) cell.failed = cell.failed || !r.ok;
    return result;
}

namespace {

std::string number(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string summary_csv(const MatrixResult& result) {
    const auto metric = primary_metric(result.scenario);
    std::ostringstream os;
    os << "scenario,adaptivity,power,policy,metric,n,mean,se,failed_runs,values\n";
    for (const auto& cell : result.cells) {
        const auto values = cell.values(metric);
        const auto s = describe(values);
        std::size_t failed = 0;
        for (const auto& r : cell.runs) failed += r.ok ? 0 : 1;
        std::string raw;
        for (std::size_t i = 0; i < values.size(); ++i) raw += (i ? ";" : "") + number(values[i]);
        os << to_string(result.scenario) << ',' << to_string(cell.adaptivity) << ',' << to_string(cell.power) << ','
           << cell.policy << ',' << metric << ',' << s.n << ',' << (s.n ? number(s.mean) : "") << ','
           << (s.n ? number(s.se) : "") << ',' << failed << ',' << raw << '\n';
    }
    return os.str();
}

std::string runs_csv(const MatrixResult& result) {
    std::vector<std::string> keys;
    for (const auto& cell : result.cells)
        for (const auto& r : cell.runs)
            if (r.ok)
                for (auto it = r.metrics.begin(); it != r.metrics.end(); ++it)
                    if (it->is_number() && std::find(keys.begin(), keys.end(), it.key()) == keys.end())
                        keys.push_back(it.key());
    std::ostringstream os;
    os << "scenario,adaptivity,power,policy,seed,status,error";
    for (const auto& k : keys) os << ',' << k;
    os << ",record\n";
    for (const auto& cell : result.cells) {
        for (const auto& r : cell.runs) {
            os << to_string(result.scenario) << ',' << to_string(cell.adaptivity) << ',' << to_string(cell.power) << ','
               << cell.policy << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',' << csv_field(r.error);
            for (const auto& k : keys) {
                os << ',';
                if (r.ok && r.metrics.contains(k) && r.metrics.at(k).is_number()) os << number(r.metrics.at(k).get<double>());
            }
            os << ',' << csv_field(r.record_path) << '\n';
        }
    }
    return os.str();
}

void write_tables(const MatrixResult& result, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "summary.csv") << summary_csv(result);
    std::ofstream(dir / "runs.csv") << runs_csv(result);
}

WelchResult welch_greater(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Welch test needs two values per sample");
    const auto sa = describe(a);
    const auto sb = describe(b);
    const double va = sa.se * sa.se;  // s^2 / n
    const double vb = sb.se * sb.se;
    WelchResult w;
    const double denom = std::sqrt(va + vb);
    if (denom == 0.0) {
        w.t = sa.mean > sb.mean ? std::numeric_limits<double>::infinity()
                                : (sa.mean < sb.mean ? -std::numeric_limits<double>::infinity() : 0.0);
        w.df = static_cast<double>(a.size() + b.size() - 2);
        w.p = sa.mean > sb.mean ? 0.0 : (sa.mean < sb.mean ? 1.0 : 0.5);
        return w;
    }
    w.t = (sa.mean - sb.mean) / denom;
    w.df = (va + vb) * (va + vb) /
           (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
    boost::math::students_t dist(w.df);
    w.p = boost::math::cdf(boost::math::complement(dist, w.t));
    return w;
}

}  // namespace hare
