#include "boc/harness.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "boc/boc_elim.hpp"
#include "boc/lucbboc.hpp"
#include "json.hpp"

namespace boc {

using nlohmann::json;

ExperimentConfig parse_config(const std::string& json_text) {
    const json j = json::parse(json_text);
    ExperimentConfig cfg;

    if (j.contains("means")) {
        const auto& rows = j.at("means");
        const int d = static_cast<int>(rows.size());
        const int m = static_cast<int>(rows.at(0).size());
        Matrix means(d, m);
        for (int i = 0; i < d; ++i) {
            if (static_cast<int>(rows.at(i).size()) != m)
                throw std::invalid_argument("ragged means array");
            for (int c = 0; c < m; ++c) means(i, c) = rows.at(i).at(c).get<double>();
        }
        cfg.means = means;
    }
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        DatasetSpec ds;
        ds.path = d.at("path").get<std::string>();
        ds.arm_column = d.value("arm_column", ds.arm_column);
        ds.value_column = d.value("value_column", ds.value_column);
        ds.scale_factor = d.value("scale_factor", 1.0);
        cfg.dataset = ds;
    }
    if (!cfg.means.has_value() && !cfg.dataset.has_value())
        throw std::invalid_argument("config needs means or dataset");

    cfg.num_clusters = j.at("k").get<int>();
    cfg.algorithms = j.at("algorithms").get<std::vector<std::string>>();
    cfg.delta_grid = j.at("delta_grid").get<std::vector<double>>();
    cfg.trials_per_cell = j.value("trials_per_cell", 1);
    cfg.base_seed = j.value("base_seed", uint64_t{0});
    cfg.run.step_cap = j.value("step_cap", cfg.run.step_cap);
    cfg.run.fw_iters = j.value("fw_iters", cfg.run.fw_iters);
    cfg.run.exact_weights = j.value("exact_weights", cfg.run.exact_weights);
    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        cfg.run.solver.multi_starts = s.value("multi_starts", cfg.run.solver.multi_starts);
        cfg.run.solver.max_inner_iters =
            s.value("max_inner_iters", cfg.run.solver.max_inner_iters);
        cfg.run.solver.max_outer_iters =
            s.value("max_outer_iters", cfg.run.solver.max_outer_iters);
        cfg.run.solver.warm_inner_iters =
            s.value("warm_inner_iters", cfg.run.solver.warm_inner_iters);
        cfg.run.solver.warm_outer_iters =
            s.value("warm_outer_iters", cfg.run.solver.warm_outer_iters);
        cfg.run.solver.seed = s.value("seed", cfg.run.solver.seed);
    }

    for (double delta : cfg.delta_grid)
        if (delta <= 0.0 || delta >= 1.0)
            throw std::invalid_argument("delta out of range");
    if (cfg.trials_per_cell < 1) throw std::invalid_argument("trials_per_cell < 1");
    for (const auto& a : cfg.algorithms)
        if (a != "atboc" && a != "lucbboc" && a != "boc_elim")
            throw std::invalid_argument("unknown algorithm: " + a);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

}  // namespace

EmpiricalEnvironment ingest_ratings_csv(const std::string& path,
                                        const std::string& arm_column,
                                        const std::string& value_column,
                                        double scale_factor,
                                        IngestReport* report) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty dataset");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = split_csv_line(line);
    int arm_idx = -1, value_idx = -1;
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == arm_column) arm_idx = static_cast<int>(i);
        if (header[i] == value_column) value_idx = static_cast<int>(i);
    }
    if (arm_idx < 0 || value_idx < 0)
        throw std::runtime_error("missing column in dataset header");

    std::map<std::string, std::vector<double>> by_label;  // lexicographic order
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) <= std::max(arm_idx, value_idx))
            throw std::runtime_error("short row in dataset");
        double v;
        try {
            v = std::stod(fields[value_idx]);
        } catch (const std::exception&) {
            throw std::runtime_error("unparsable value: " + fields[value_idx]);
        }
        if (!std::isfinite(v)) throw std::runtime_error("non-finite value in dataset");
        by_label[fields[arm_idx]].push_back(v);
    }
    if (by_label.size() < 2) throw std::runtime_error("need at least 2 arm labels");

    IngestReport rep;
    std::vector<std::vector<double>> pools;
    for (auto& [label, pool] : by_label) {
        double mean = 0.0;
        for (double v : pool) mean += v;
        mean /= pool.size();
        // shift so the mean scales by s while the variance is unchanged
        const double shift = (scale_factor - 1.0) * mean;
        for (double& v : pool) v += shift;
        rep.labels.push_back(label);
        rep.counts.push_back(static_cast<long>(pool.size()));
        rep.scaled_means.push_back(mean * scale_factor);
        pools.push_back(std::move(pool));
    }
    if (report) *report = rep;
    return EmpiricalEnvironment(std::move(pools));
}

std::unique_ptr<ArmEnvironment> make_environment(const ExperimentConfig& cfg) {
    if (cfg.means.has_value())
        return std::make_unique<GaussianEnvironment>(*cfg.means);
    const auto& ds = *cfg.dataset;
    return std::make_unique<EmpiricalEnvironment>(ingest_ratings_csv(
        ds.path, ds.arm_column, ds.value_column, ds.scale_factor));
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, int jobs) {
    const auto proto = make_environment(cfg);
    if (proto->dim() != 1) {
        for (const auto& a : cfg.algorithms)
            if (a == "boc_elim")
                throw std::invalid_argument("boc_elim requires d=1");
    }
    const ClusterAssignment truth =
        slink_cluster(proto->means(), cfg.num_clusters);

    struct Cell {
        std::string algorithm;
        int delta_index;
        int trial_index;
    };
    std::vector<Cell> cells;
    for (const auto& a : cfg.algorithms)
        for (int di = 0; di < static_cast<int>(cfg.delta_grid.size()); ++di)
            for (int ti = 0; ti < cfg.trials_per_cell; ++ti)
                cells.push_back({a, di, ti});

    std::vector<TrialRecord> records(cells.size());
    std::atomic<size_t> next{0};

    auto worker = [&]() {
        auto env = make_environment(cfg);
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& cell = cells[i];
            TrialRecord& rec = records[i];
            rec.algorithm = cell.algorithm;
            rec.delta_index = cell.delta_index;
            rec.delta = cfg.delta_grid[cell.delta_index];
            rec.trial_index = cell.trial_index;
            rec.seed = make_trial_seed(cfg.base_seed, cell.algorithm,
                                       cell.delta_index, cell.trial_index);
            Rng rng(rec.seed);
            const auto start = std::chrono::steady_clock::now();
            try {
                RunResult r;
                if (cell.algorithm == "atboc")
                    r = atboc_run(*env, rec.delta, cfg.num_clusters, rng, cfg.run, &truth);
                else if (cell.algorithm == "lucbboc")
                    r = lucbboc_run(*env, rec.delta, cfg.num_clusters, rng, cfg.run, &truth);
                else
                    r = boc_elim_run(*env, rec.delta, cfg.num_clusters, rng, cfg.run, &truth);
                rec.stopping_time = r.stopping_time;
                rec.correct = r.correct;
                rec.capped = r.capped;
            } catch (const std::exception& e) {
                rec.error = e.what();
            }
            rec.wall_millis = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - start)
                                  .count();
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (int i = 0; i < jobs; ++i) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }
    return records;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("need >= 2 points");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

Summary summarize(const std::vector<TrialRecord>& records, double t_star_value) {
    if (records.empty()) throw std::invalid_argument("no records");
    std::map<std::pair<std::string, double>, std::vector<const TrialRecord*>> groups;
    for (const auto& r : records) {
        if (!r.error.empty()) continue;
        groups[{r.algorithm, r.delta}].push_back(&r);
    }
    if (groups.empty()) throw std::invalid_argument("all trials failed");

    Summary summary;
    summary.t_star = t_star_value;
    std::map<std::string, std::vector<std::pair<double, double>>> curve;  // (log 1/δ, mean)
    for (const auto& [key, recs] : groups) {
        SummaryRow row;
        row.algorithm = key.first;
        row.delta = key.second;
        row.trials = static_cast<int>(recs.size());
        double sum = 0.0, errors = 0.0;
        for (const auto* r : recs) {
            sum += static_cast<double>(r->stopping_time);
            if (!r->correct) errors += 1.0;
        }
        row.mean_tau = sum / row.trials;
        double var = 0.0;
        for (const auto* r : recs) {
            const double d = static_cast<double>(r->stopping_time) - row.mean_tau;
            var += d * d;
        }
        row.stderr_tau =
            row.trials > 1 ? std::sqrt(var / (row.trials - 1) / row.trials) : 0.0;
        row.error_rate = errors / row.trials;
        row.lower_bound = kl_bernoulli(row.delta, 1.0 - row.delta) * t_star_value;
        summary.rows.push_back(row);
        curve[row.algorithm].emplace_back(std::log(1.0 / row.delta), row.mean_tau);
    }
    for (const auto& [alg, pts] : curve) {
        SlopeRow slope;
        slope.algorithm = alg;
        if (pts.size() >= 2) {
            std::vector<double> x, y;
            for (const auto& [lx, my] : pts) {
                x.push_back(lx);
                y.push_back(my);
            }
            slope.slope = fit_slope(x, y);
            slope.has_slope = true;
        }
        summary.slopes.push_back(slope);
    }
    return summary;
}

void write_trials_jsonl(const std::string& path,
                        const std::vector<TrialRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& r : records) {
        json j{{"algorithm", r.algorithm},
               {"delta_index", r.delta_index},
               {"delta", r.delta},
               {"trial_index", r.trial_index},
               {"seed", r.seed},
               {"stopping_time", r.stopping_time},
               {"correct", r.correct},
               {"capped", r.capped}};
        if (!r.error.empty()) j["error"] = r.error;
        out << j.dump() << '\n';
    }
}

void write_summary_csv(const std::string& path, const Summary& summary) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "algorithm,delta,log_inv_delta,trials,mean_tau,stderr_tau,error_rate,"
           "lower_bound\n";
    for (const auto& r : summary.rows)
        out << r.algorithm << ',' << r.delta << ',' << std::log(1.0 / r.delta) << ','
            << r.trials << ',' << r.mean_tau << ',' << r.stderr_tau << ','
            << r.error_rate << ',' << r.lower_bound << '\n';
}

void write_slopes_csv(const std::string& path, const Summary& summary) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "algorithm,slope,lower_bound_slope,two_t_star\n";
    for (const auto& s : summary.slopes) {
        out << s.algorithm << ',';
        if (s.has_slope) out << s.slope;
        out << ',' << summary.t_star << ',' << 2.0 * summary.t_star << '\n';
    }
}

}  // namespace boc
