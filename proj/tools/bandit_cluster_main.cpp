#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "boc/boc_elim.hpp"
#include "boc/harness.hpp"
#include "boc/lucbboc.hpp"
#include "json.hpp"

namespace {

using namespace boc;
using nlohmann::json;

Matrix load_means(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    const json j = json::parse(in);
    const auto& rows = j.is_object() ? j.at("means") : j;
    const int d = static_cast<int>(rows.size());
    const int m = static_cast<int>(rows.at(0).size());
    Matrix means(d, m);
    for (int i = 0; i < d; ++i)
        for (int c = 0; c < m; ++c) means(i, c) = rows.at(i).at(c).get<double>();
    return means;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int jobs) {
    const auto cfg = load_config(config_path);
    std::filesystem::create_directories(out_dir);

    const auto records = run_experiment(cfg, jobs);
    write_trials_jsonl(out_dir + "/trials.jsonl", records);

    const auto env = make_environment(cfg);
    double tstar_value = std::numeric_limits<double>::quiet_NaN();
    try {
        tstar_value = t_star(env->means(), cfg.num_clusters, cfg.run.solver).t_star;
    } catch (const std::exception& e) {
        std::cerr << "t_star unavailable: " << e.what() << '\n';
    }
    const auto summary = summarize(records, tstar_value);
    write_summary_csv(out_dir + "/summary.csv", summary);
    write_slopes_csv(out_dir + "/slopes.csv", summary);

    for (const auto& row : summary.rows)
        std::cout << row.algorithm << " delta=" << row.delta
                  << " mean_tau=" << row.mean_tau << " stderr=" << row.stderr_tau
                  << " error_rate=" << row.error_rate << '\n';
    for (const auto& s : summary.slopes)
        if (s.has_slope)
            std::cout << s.algorithm << " slope=" << s.slope
                      << " (2T*=" << 2.0 * summary.t_star << ")\n";
    return 0;
}

int cmd_tstar(const std::string& means_path, int k, uint64_t seed, bool as_json) {
    Matrix means = load_means(means_path);
    SolverConfig cfg;
    cfg.seed = seed;
    const auto ts = t_star(means, k, cfg);
    if (as_json) {
        json j{{"t_star", ts.t_star},
               {"psi_star", ts.psi_star},
               {"alt_empty", ts.alt_empty},
               {"w_star", std::vector<double>(ts.w_star.data(),
                                              ts.w_star.data() + ts.w_star.size())}};
        std::cout << j.dump(2) << '\n';
    } else {
        std::cout << "T* = " << ts.t_star << "\npsi* = " << ts.psi_star << "\nw* =";
        for (int i = 0; i < ts.w_star.size(); ++i) std::cout << ' ' << ts.w_star[i];
        std::cout << '\n';
    }
    return 0;
}

int cmd_slink(const std::string& means_path, int k) {
    const auto c = slink_cluster(load_means(means_path), k);
    for (size_t i = 0; i < c.labels.size(); ++i)
        std::cout << (i ? " " : "") << c.labels[i];
    std::cout << '\n';
    return 0;
}

int cmd_validate() {
    int failures = 0;
    auto report = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "PASS" : "FAIL") << "  " << name << '\n';
        if (!ok) ++failures;
    };

    {
        std::mt19937_64 rng(2024);
        std::uniform_real_distribution<double> unif(0.0, 4.0);
        bool ok = true;
        for (int trial = 0; trial < 50 && ok; ++trial) {
            const int m = 3 + static_cast<int>(rng() % 4);
            const int k = 2 + static_cast<int>(rng() % (m - 1));
            Matrix mu(1 + static_cast<int>(rng() % 2), m);
            for (;;) {
                for (int i = 0; i < mu.rows(); ++i)
                    for (int j = 0; j < m; ++j) mu(i, j) = unif(rng);
                auto c = slink_cluster(mu, k);
                if (inter_distance(mu, c) > 1.05 * intra_distance(mu, c) + 1e-3) break;
            }
            ok = cluster_equivalent(slink_cluster(mu, k), brute_force_slink_oracle(mu, k));
        }
        report("slink vs brute-force partition oracle (50 instances)", ok);
    }

    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> unif(0.0, 1.5);
        std::exponential_distribution<double> exp1(1.0);
        bool ok = true;
        int done = 0;
        while (done < 5 && ok) {
            Matrix mu(1, 3);
            for (int i = 0; i < 3; ++i) mu(0, i) = unif(rng);
            auto c = slink_cluster(mu, 2);
            if (inter_distance(mu, c) < 1.2 * intra_distance(mu, c) + 1e-3) continue;
            Vector w(3);
            for (int i = 0; i < 3; ++i) w[i] = exp1(rng);
            w /= w.sum();
            const double step = 0.02;
            const double solved = psi(w, mu, 2).value;
            const double oracle = grid_oracle_psi(w, mu, 2, step);
            // allow for grid quantization on top of the relative tolerance
            const double slack = step * std::sqrt(2.0 * oracle) + step * step;
            ok = std::abs(solved - oracle) <= 5e-2 * oracle + slack;
            ++done;
        }
        report("psi solver vs grid oracle (5 instances, 5% + grid slack)", ok);
    }

    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fixed-confidence bandit online clustering benchmarks"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out", means_path;
    int jobs = 1, k = 2;
    uint64_t seed = 0;
    bool as_json = false;

    auto* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("--config", config_path, "JSON experiment config")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "worker threads");

    auto* tstar = app.add_subcommand("tstar", "characteristic time of an instance");
    tstar->add_option("--means", means_path, "JSON d x M mean matrix")->required();
    tstar->add_option("--k", k, "number of clusters")->required();
    tstar->add_option("--seed", seed, "solver seed");
    tstar->add_flag("--json", as_json, "JSON output");

    auto* slink = app.add_subcommand("slink", "cluster an instance with SLINK");
    slink->add_option("--means", means_path, "JSON d x M mean matrix")->required();
    slink->add_option("--k", k, "number of clusters")->required();

    app.add_subcommand("validate", "run the built-in oracle suites");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return cmd_run(config_path, out_dir, jobs);
        if (app.got_subcommand("tstar")) return cmd_tstar(means_path, k, seed, as_json);
        if (app.got_subcommand("slink")) return cmd_slink(means_path, k);
        return cmd_validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
