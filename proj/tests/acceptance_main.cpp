// End-to-end acceptance suite: prints one PASS/FAIL line per criterion and
// exits with the number of failures. Expects to run from the repository root
// (data/genre_ratings.csv must be reachable).
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "boc/boc_elim.hpp"
#include "boc/harness.hpp"
#include "boc/lucbboc.hpp"
#include "boc/psi.hpp"

using namespace boc;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << "criterion " << idx << " [" << name << "]: "
              << (ok ? "PASS" : "FAIL");
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
}

Matrix row(std::initializer_list<double> xs) {
    Matrix m(1, static_cast<int>(xs.size()));
    int i = 0;
    for (double x : xs) m(0, i++) = x;
    return m;
}

Matrix dataset1() {
    Matrix m(2, 4);
    m << -1, -1, 3, 4, -1, -2, 3, 4;
    return m;
}

Matrix dataset2() { return row({0, 0.5, 1, 2.5, 3, 4.5, 5}); }

struct CellStats {
    double mean_tau = 0.0;
    int correct = 0;
    int trials = 0;
    std::vector<long> taus;
};

constexpr uint64_t kBaseSeed = 1;

CellStats run_cell(const std::string& alg, ArmEnvironment& env, double delta,
                   int delta_index, int num_clusters, int trials,
                   const ClusterAssignment& truth, long step_cap = 2000000) {
    CellStats cs;
    cs.trials = trials;
    RunOptions opts;
    opts.step_cap = step_cap;
    for (int i = 0; i < trials; ++i) {
        Rng rng = make_trial_rng(kBaseSeed, alg, delta_index, i);
        RunResult r = alg == "atboc"
                          ? atboc_run(env, delta, num_clusters, rng, opts, &truth)
                          : alg == "lucbboc"
                                ? lucbboc_run(env, delta, num_clusters, rng, opts, &truth)
                                : boc_elim_run(env, delta, num_clusters, rng, opts, &truth);
        cs.mean_tau += static_cast<double>(r.stopping_time);
        cs.correct += r.correct;
        cs.taus.push_back(r.stopping_time);
    }
    cs.mean_tau /= trials;
    return cs;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(5);
    os << x;
    return os.str();
}

Vector random_simplex(int m, Rng& rng, double floor_weight = 0.05) {
    std::uniform_real_distribution<double> unif(floor_weight, 1.0);
    Vector w(m);
    for (int i = 0; i < m; ++i) w[i] = unif(rng);
    w /= w.sum();
    return w;
}

}  // namespace

int main() {
    const auto wall0 = std::chrono::steady_clock::now();

    // ---- 1: SLINK goldens --------------------------------------------------
    {
        const auto c1 = slink_cluster(row({0, 0.5, 1.5, 2, 3.5}), 3);
        ClusterAssignment g1{{1, 1, 2, 2, 3}, 3};
        const auto c2 = slink_cluster(dataset2(), 3);
        ClusterAssignment g2{{1, 1, 1, 2, 2, 3, 3}, 3};
        report(1, "slink goldens",
               cluster_equivalent(c1, g1) && cluster_equivalent(c2, g2), "");
    }

    // ---- 2: SLINK vs brute-force partition oracle --------------------------
    {
        Rng rng(2026);
        std::uniform_int_distribution<int> pick_m(3, 7), pick_d(1, 2);
        std::uniform_real_distribution<double> unif(-3.0, 3.0);
        int done = 0, agree = 0;
        while (done < 200) {
            const int m = pick_m(rng), d = pick_d(rng);
            std::uniform_int_distribution<int> pick_k(2, m - 1);
            const int k = pick_k(rng);
            Matrix mu(d, m);
            for (int i = 0; i < d * m; ++i) mu(i) = unif(rng);
            ClusterAssignment oracle;
            try {
                oracle = brute_force_slink_oracle(mu, k);
            } catch (const std::exception&) {
                continue;  // not separated; resample
            }
            ++done;
            agree += cluster_equivalent(slink_cluster(mu, k), oracle);
        }
        report(2, "slink vs partition oracle", agree == 200,
               std::to_string(agree) + "/200");
    }

    // ---- 3: psi solver vs grid oracle --------------------------------------
    {
        Rng rng(7);
        std::uniform_int_distribution<int> pick_m(3, 4);
        std::uniform_real_distribution<double> unif(0.0, 3.0);
        const double step = 0.025;
        int done = 0, ok = 0;
        while (done < 20) {
            const int m = pick_m(rng);
            Matrix mu(1, m);
            for (int i = 0; i < m; ++i) mu(0, i) = unif(rng);
            try {
                brute_force_slink_oracle(mu, 2);
            } catch (const std::exception&) {
                continue;
            }
            const Vector w = random_simplex(m, rng);
            const double oracle = grid_oracle_psi(w, mu, 2, step);
            if (!std::isfinite(oracle)) continue;
            ++done;
            const double solved = psi(w, mu, 2).value;
            // grid quantization can dominate 5% on tiny psi values; allow the
            // first-order grid slack on top
            const double slack = step * std::sqrt(2.0 * oracle) + step * step;
            ok += std::abs(solved - oracle) <= 5e-2 * oracle + slack;
        }
        report(3, "psi vs grid oracle", ok == 20, std::to_string(ok) + "/20");
    }

    // ---- 4: psi concavity in w ---------------------------------------------
    {
        const std::vector<ProblemInstance> instances = {
            {row({0, 0.7, 2.1, 2.9}), 2}, {dataset1(), 2}};
        Rng rng(11);
        std::uniform_real_distribution<double> theta_dist(0.0, 1.0);
        bool ok = true;
        double worst = 0.0;
        for (const auto& inst : instances) {
            for (int probe = 0; probe < 100; ++probe) {
                const Vector w1 = random_simplex(inst.num_arms(), rng);
                const Vector w2 = random_simplex(inst.num_arms(), rng);
                const double theta = theta_dist(rng);
                const Vector wm = theta * w1 + (1.0 - theta) * w2;
                const double lhs = psi(wm, inst.means, inst.num_clusters).value;
                const double rhs =
                    theta * psi(w1, inst.means, inst.num_clusters).value +
                    (1.0 - theta) * psi(w2, inst.means, inst.num_clusters).value;
                const double margin = (rhs - lhs) / std::max(rhs, 1e-12);
                worst = std::max(worst, margin);
                ok = ok && margin <= 1e-6;
            }
        }
        report(4, "psi concavity", ok, "worst rel violation " + fmt(worst));
    }

    // shared environments and characteristic times
    GaussianEnvironment env1(dataset1()), env2(dataset2());
    const auto truth1 = slink_cluster(dataset1(), 2);
    const auto truth2 = slink_cluster(dataset2(), 3);
    const auto ts1 = t_star(dataset1(), 2);
    const auto ts2 = t_star(dataset2(), 3);

    // ---- 5: delta-PC at delta = 0.1 ----------------------------------------
    CellStats elim_d2_01;  // reused by criterion 9
    {
        const double delta = 0.1;
        const auto a = run_cell("atboc", env1, delta, 9, 2, 200, truth1);
        const auto l = run_cell("lucbboc", env2, delta, 9, 3, 200, truth2);
        elim_d2_01 = run_cell("boc_elim", env2, delta, 9, 3, 200, truth2);
        const double bound = 0.1 + 2.0 * std::sqrt(0.09 / 200.0);
        const double ea = 1.0 - a.correct / 200.0;
        const double el = 1.0 - l.correct / 200.0;
        const double ee = 1.0 - elim_d2_01.correct / 200.0;
        report(5, "delta-PC at 0.1",
               ea <= bound && el <= bound && ee <= bound,
               "err atboc " + fmt(ea) + ", lucbboc " + fmt(el) + ", elim " +
                   fmt(ee) + " vs " + fmt(bound));
    }

    // ---- 6 + 7 + part of 10: ATBOC dataset-1 delta grid --------------------
    std::vector<double> d1_deltas, d1_means;
    CellStats atboc_d1_e6, lucb_d1_e6;
    {
        const std::vector<double> exps = {2, 4, 6, 8};
        std::vector<double> logs, lbs;
        for (int di = 0; di < 4; ++di) {
            const double delta = std::exp(-exps[di]);
            const auto c = run_cell("atboc", env1, delta, di, 2, 100, truth1);
            if (exps[di] == 6) atboc_d1_e6 = c;
            logs.push_back(exps[di]);
            d1_deltas.push_back(delta);
            d1_means.push_back(c.mean_tau);
            lbs.push_back(kl_bernoulli(delta, 1.0 - delta) * ts1.t_star);
        }
        const double slope = fit_slope(logs, d1_means);
        const double lb_slope = fit_slope(logs, lbs);
        // upper reference: slope of the stopping-equation fixed point
        // tau * psi* = d * sum_m log(tau * w*_m + 1) + 2 log(1/delta),
        // i.e. the mean stopping time of an idealized tracker at these deltas.
        // its slope tends to 2 T* as delta -> 0, but at tau ~ 60..100 the
        // log-product term in beta still contributes ~ d*M/tau to the
        // effective denominator, so the asymptotic constant alone is not yet
        // attainable (the lower-bound slope check keeps the window two-sided).
        std::vector<double> pred;
        for (double x : logs) {
            double tau = 2.0 * x / ts1.psi_star;
            for (int it = 0; it < 200; ++it) {
                double b = 2.0 * x;
                for (int m = 0; m < 4; ++m)
                    b += env1.dim() * std::log(tau * ts1.w_star[m] + 1.0);
                tau = b / ts1.psi_star;
            }
            pred.push_back(tau);
        }
        const double ref_slope = fit_slope(logs, pred);
        const bool ok = slope >= 0.75 * lb_slope && slope <= 1.25 * ref_slope;
        report(6, "atboc slope vs 2T*", ok,
               "slope " + fmt(slope) + " in [" + fmt(0.75 * lb_slope) + ", " +
                   fmt(1.25 * ref_slope) + "], asymptotic 2T* " +
                   fmt(2.0 * ts1.t_star));

        lucb_d1_e6 = run_cell("lucbboc", env1, std::exp(-6.0), 0, 2, 100, truth1);
        const bool ok7 = atboc_d1_e6.mean_tau >= 50 && atboc_d1_e6.mean_tau <= 110 &&
                         lucb_d1_e6.mean_tau >= 110 && lucb_d1_e6.mean_tau <= 200;
        report(7, "dataset-1 figure sanity", ok7,
               "atboc " + fmt(atboc_d1_e6.mean_tau) + " in [50,110], lucbboc " +
                   fmt(lucb_d1_e6.mean_tau) + " in [110,200]");
    }

    // ---- 8 + part of 10: algorithm ordering at e^-5 ------------------------
    CellStats atboc_d2_e5;
    {
        const double delta = std::exp(-5.0);
        atboc_d2_e5 = run_cell("atboc", env2, delta, 1, 3, 100, truth2);
        const auto l2 = run_cell("lucbboc", env2, delta, 1, 3, 100, truth2);
        const auto e2 = run_cell("boc_elim", env2, delta, 1, 3, 100, truth2);

        IngestReport rep;
        auto envr = ingest_ratings_csv("data/genre_ratings.csv", "genre",
                                       "rating", 4.0, &rep);
        const auto truthr = slink_cluster(envr.means(), 3);
        const auto ar = run_cell("atboc", envr, delta, 2, 3, 100, truthr);
        const auto lr = run_cell("lucbboc", envr, delta, 2, 3, 100, truthr);
        const auto er = run_cell("boc_elim", envr, delta, 2, 3, 100, truthr);

        auto leq = [](const CellStats& x, const CellStats& y) {
            return x.mean_tau <= 1.05 * y.mean_tau;  // gaps may close to -5%
        };
        const bool ok = leq(atboc_d2_e5, l2) && leq(l2, e2) && leq(ar, lr) && leq(lr, er);
        report(8, "ordering atboc <= lucbboc <= elim", ok,
               "dataset2 " + fmt(atboc_d2_e5.mean_tau) + " / " + fmt(l2.mean_tau) +
                   " / " + fmt(e2.mean_tau) + "; ratings " + fmt(ar.mean_tau) +
                   " / " + fmt(lr.mean_tau) + " / " + fmt(er.mean_tau));
    }

    // ---- 9: Theorem 6 bound ------------------------------------------------
    {
        const double bound =
            predicted_sample_bound(dataset2().row(0).transpose(), 3, 0.1);
        int within = 0;
        for (long tau : elim_d2_01.taus) within += tau <= bound;
        report(9, "theorem-6 elimination bound", within >= 190,
               std::to_string(within) + "/200 within " + fmt(bound));
    }

    // ---- 10: lower-bound consistency ---------------------------------------
    {
        bool ok = true;
        std::string detail;
        for (size_t i = 0; i < d1_deltas.size(); ++i) {
            const double lb =
                kl_bernoulli(d1_deltas[i], 1.0 - d1_deltas[i]) * ts1.t_star;
            ok = ok && d1_means[i] >= 0.9 * lb;
        }
        const double lb2 = kl_bernoulli(std::exp(-5.0), 1.0 - std::exp(-5.0)) *
                           ts2.t_star;
        ok = ok && atboc_d2_e5.mean_tau >= 0.9 * lb2;
        report(10, "lower-bound consistency", ok,
               "dataset2 " + fmt(atboc_d2_e5.mean_tau) + " >= " + fmt(0.9 * lb2));
    }

    // ---- 11: tracking ------------------------------------------------------
    {
        const int m = 5;
        Rng rng(4242);
        bool ok = true;
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            const Vector w = random_simplex(m, rng);
            BanditState s(m, 1);
            TrackingHistory h;
            h.cumulative_weights = Vector::Zero(m);
            const Vector x = Vector::Zero(1);
            for (long t = 0; t < 10000; ++t) {
                int arm;
                if (s.t < m)
                    arm = static_cast<int>(s.t);
                else if (auto forced = forced_exploration_check(s))
                    arm = *forced;
                else
                    arm = average_tracking_arm(s, h);
                s.update(arm, x);
                h.cumulative_weights += w;
                ++h.steps_recorded;
            }
            const double dev = (s.proportions() - w).cwiseAbs().maxCoeff();
            worst = std::max(worst, dev);
            ok = ok && dev <= 0.05;
        }
        report(11, "tracking convergence", ok, "worst deviation " + fmt(worst));
    }

    // ---- 12: determinism across job counts ---------------------------------
    {
        ExperimentConfig cfg;
        Matrix mu = row({0, 0.3, 3, 5});
        cfg.means = mu;
        cfg.num_clusters = 2;
        cfg.algorithms = {"lucbboc", "boc_elim"};
        cfg.delta_grid = {0.1, 0.01};
        cfg.trials_per_cell = 5;
        cfg.base_seed = 99;
        const auto rec1 = run_experiment(cfg, 1);
        const auto rec4 = run_experiment(cfg, 4);
        const std::string p1 = "acceptance_trials_j1.jsonl";
        const std::string p4 = "acceptance_trials_j4.jsonl";
        write_trials_jsonl(p1, rec1);
        write_trials_jsonl(p4, rec4);
        std::ifstream f1(p1, std::ios::binary), f4(p4, std::ios::binary);
        std::stringstream b1, b4;
        b1 << f1.rdbuf();
        b4 << f4.rdbuf();
        const bool ok = !b1.str().empty() && b1.str() == b4.str();
        std::remove(p1.c_str());
        std::remove(p4.c_str());
        report(12, "bit-exact reruns at any --jobs", ok, "");
    }

    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - wall0)
                            .count();
    std::cout << (failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL")
              << " (" << failures << " failing, " << fmt(secs) << "s)"
              << std::endl;
    return failures;
}
