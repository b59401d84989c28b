#include "boc/psi.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace boc {

namespace {

struct SpecLayout {
    std::vector<int> free_arms;                 // sorted unique arms of P1+P2+{m,n}
    std::vector<int> slot;                      // arm -> index into free_arms (-1 if fixed)
    std::vector<std::pair<int, int>> pairs;     // (a, b) constraint pairs
};

SpecLayout make_layout(const AltSpec& spec, int num_arms) {
    SpecLayout lay;
    lay.slot.assign(num_arms, -1);
    auto add = [&](int a) {
        if (lay.slot[a] < 0) {
            lay.slot[a] = 0;  // mark
            lay.free_arms.push_back(a);
        }
    };
    for (int a : spec.part1) add(a);
    for (int b : spec.part2) add(b);
    add(spec.arm_m);
    add(spec.arm_n);
    std::sort(lay.free_arms.begin(), lay.free_arms.end());
    for (size_t i = 0; i < lay.free_arms.size(); ++i) lay.slot[lay.free_arms[i]] = static_cast<int>(i);
    for (int a : spec.part1)
        for (int b : spec.part2) lay.pairs.emplace_back(a, b);
    return lay;
}

double objective(const AltSpec&, const SpecLayout& lay, const Vector& w,
                 const Matrix& mu, const Matrix& lam) {
    double v = 0.0;
    for (size_t i = 0; i < lay.free_arms.size(); ++i) {
        int a = lay.free_arms[i];
        v += 0.5 * w[a] * (lam.col(i) - mu.col(a)).squaredNorm();
    }
    return v;
}

// augmented Lagrangian value and gradient; returns max constraint violation
double al_eval(const AltSpec& spec, const SpecLayout& lay, const Vector& w,
               const Matrix& mu, const Matrix& lam, const std::vector<double>& y,
               double rho, double& value, Matrix* grad) {
    const int sm = lay.slot[spec.arm_m];
    const int sn = lay.slot[spec.arm_n];
    value = objective(spec, lay, w, mu, lam);
    if (grad) {
        for (size_t i = 0; i < lay.free_arms.size(); ++i) {
            int a = lay.free_arms[i];
            grad->col(i) = w[a] * (lam.col(i) - mu.col(a));
        }
    }
    const auto dmn = lam.col(sm) - lam.col(sn);
    const double mn2 = dmn.squaredNorm();
    double max_violation = 0.0;
    for (size_t c = 0; c < lay.pairs.size(); ++c) {
        const int sa = lay.slot[lay.pairs[c].first];
        const int sb = lay.slot[lay.pairs[c].second];
        const auto dab = lam.col(sa) - lam.col(sb);
        const double g = mn2 - dab.squaredNorm();
        max_violation = std::max(max_violation, g);
        const double sigma = std::max(0.0, y[c] + rho * g);
        value += (sigma * sigma - y[c] * y[c]) / (2.0 * rho);
        if (grad && sigma > 0.0) {
            grad->col(sm) += sigma * 2.0 * dmn;
            grad->col(sn) -= sigma * 2.0 * dmn;
            grad->col(sa) -= sigma * 2.0 * dab;
            grad->col(sb) += sigma * 2.0 * dab;
        }
    }
    return max_violation;
}

// move lambda_m and lambda_n together until the pair constraint holds exactly
void polish(const AltSpec& spec, const SpecLayout& lay, const Vector& w, Matrix& lam) {
    const int sm = lay.slot[spec.arm_m];
    const int sn = lay.slot[spec.arm_n];
    // skip when m or n participates in the partition constraints
    for (int a : spec.part1)
        if (a == spec.arm_m || a == spec.arm_n) return;
    for (int b : spec.part2)
        if (b == spec.arm_m || b == spec.arm_n) return;

    double cross_min = std::numeric_limits<double>::infinity();
    for (const auto& [a, b] : lay.pairs)
        cross_min = std::min(cross_min,
                             (lam.col(lay.slot[a]) - lam.col(lay.slot[b])).squaredNorm());
    const double dist = (lam.col(sm) - lam.col(sn)).norm();
    const double target = std::sqrt(std::max(0.0, cross_min));
    if (dist <= target || dist <= 0.0) return;
    const double excess = dist - target;
    const double wm = w[spec.arm_m], wn = w[spec.arm_n];
    double fm = 0.5, fn = 0.5;
    if (wm + wn > 0.0) {
        fm = wn / (wm + wn);
        fn = wm / (wm + wn);
    }
    const Vector u = (lam.col(sn) - lam.col(sm)) / dist;
    lam.col(sm) += (excess * fm) * u;
    lam.col(sn) -= (excess * fn) * u;
}

QcqpResult solve_one(const AltSpec& spec, const SpecLayout& lay, const Vector& w,
                     const Matrix& mu, const SolverConfig& cfg, int starts,
                     int inner_budget, int outer_budget, const Matrix* warm_lambda,
                     std::vector<double>* warm_y, double* warm_rho, uint64_t jitter_seed) {
    const int d = static_cast<int>(mu.rows());
    const int nf = static_cast<int>(lay.free_arms.size());
    const int nc = static_cast<int>(lay.pairs.size());

    double scale2 = 1.0;
    for (int i = 0; i < nf; ++i)
        for (int j = i + 1; j < nf; ++j)
            scale2 = std::max(scale2, (mu.col(lay.free_arms[i]) - mu.col(lay.free_arms[j])).squaredNorm());
    const double feas_abs = cfg.feas_tol * scale2;
    const double grad_abs = cfg.grad_tol * std::sqrt(scale2);

    // weighted collapse anchor (feasible: all constrained distances zero)
    Vector anchor = Vector::Zero(d);
    double wtot = 0.0;
    for (int a : lay.free_arms) {
        anchor += std::max(w[a], 1e-12) * mu.col(a);
        wtot += std::max(w[a], 1e-12);
    }
    anchor /= wtot;

    std::mt19937_64 rng(jitter_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double jitter_sigma = 0.1 * std::sqrt(scale2);

    Matrix best_lambda;
    double best_value = std::numeric_limits<double>::infinity();
    bool best_converged = false;

    for (int s = 0; s < starts; ++s) {
        Matrix lam(d, nf);
        std::vector<double> y(nc, 0.0);
        double rho = 4.0 / scale2;
        if (s == 0 && warm_lambda && warm_lambda->cols() == nf) {
            lam = *warm_lambda;
            if (warm_y && static_cast<int>(warm_y->size()) == nc) y = *warm_y;
            if (warm_rho && *warm_rho > 0.0) rho = *warm_rho;
        } else {
            const double alpha = (starts <= 1) ? 1.0 : double(s) / double(starts - 1);
            for (int i = 0; i < nf; ++i) {
                lam.col(i) = (1.0 - alpha) * mu.col(lay.free_arms[i]) + alpha * anchor;
                if (s >= 2)
                    for (int r = 0; r < d; ++r) lam(r, i) += jitter_sigma * gauss(rng);
            }
        }

        Matrix grad(d, nf), trial(d, nf);
        double step = 0.5 / (1.0 + rho * scale2);
        bool converged = false;
        double prev_violation = std::numeric_limits<double>::infinity();
        for (int outer = 0; outer < outer_budget; ++outer) {
            // inner: gradient descent with backtracking on the AL function
            double value;
            double violation = al_eval(spec, lay, w, mu, lam, y, rho, value, &grad);
            int it = 0;
            for (; it < inner_budget; ++it) {
                const double gnorm = grad.norm();
                if (gnorm <= grad_abs) break;
                step *= 2.0;
                double tvalue = 0.0;
                for (int bt = 0; bt < 40; ++bt) {
                    trial = lam - step * grad;
                    al_eval(spec, lay, w, mu, trial, y, rho, tvalue, nullptr);
                    if (tvalue <= value - 0.25 * step * gnorm * gnorm) break;
                    step *= 0.5;
                }
                lam = trial;
                value = tvalue;
                violation = al_eval(spec, lay, w, mu, lam, y, rho, value, &grad);
            }
            if (violation <= feas_abs && grad.norm() <= grad_abs * 4.0) {
                converged = true;
                break;
            }
            // multiplier update
            const int sm = lay.slot[spec.arm_m], sn = lay.slot[spec.arm_n];
            const double mn2 = (lam.col(sm) - lam.col(sn)).squaredNorm();
            for (int c = 0; c < nc; ++c) {
                const double g = mn2 - (lam.col(lay.slot[lay.pairs[c].first]) -
                                        lam.col(lay.slot[lay.pairs[c].second]))
                                           .squaredNorm();
                y[c] = std::max(0.0, y[c] + rho * g);
            }
            if (violation > 0.25 * prev_violation) rho *= 4.0;
            prev_violation = violation;
        }

        polish(spec, lay, w, lam);
        const double v = objective(spec, lay, w, mu, lam);
        if (v < best_value) {
            best_value = v;
            best_lambda = lam;
            best_converged = converged;
        }
        if (s == 0 && warm_lambda && warm_lambda->cols() == nf && converged) {
            // refresh warm state from the (first, warm) start
            if (warm_y) *warm_y = y;
            if (warm_rho) *warm_rho = rho;
        }
    }

    QcqpResult res;
    res.value = best_value;
    res.converged = best_converged;
    res.lambda = mu;
    for (int i = 0; i < nf; ++i) res.lambda.col(lay.free_arms[i]) = best_lambda.col(i);
    if (warm_lambda == nullptr && warm_y) *warm_y = std::vector<double>(nc, 0.0);
    return res;
}

}  // namespace

QcqpResult solve_alt_qcqp(const QcqpProblem& problem, const SolverConfig& cfg) {
    const auto lay = make_layout(problem.spec, static_cast<int>(problem.anchor_means.cols()));
    return solve_one(problem.spec, lay, problem.weights, problem.anchor_means, cfg,
                     cfg.multi_starts, cfg.max_inner_iters, cfg.max_outer_iters,
                     nullptr, nullptr, nullptr, cfg.seed + 0x9e3779b97f4a7c15ULL);
}

PsiSolver::PsiSolver(int num_clusters, SolverConfig cfg)
    : num_clusters_(num_clusters), cfg_(cfg) {}

void PsiSolver::rebuild(const Matrix& means) {
    assign_ = slink_cluster(means, num_clusters_);
    specs_ = enumerate_alt_specs(assign_);
    warm_.assign(specs_.size(), {});
    have_assign_ = true;
}

PsiResult PsiSolver::run(const Vector& w, const Matrix& means, bool warm) {
    // a clustering change invalidates every cache; inside a warm sequence the
    // re-seeding solve runs on a reduced budget (the caches are refined again
    // on the following evaluations anyway)
    bool reseed = false;
    if (!have_assign_) {
        rebuild(means);
        reseed = warm;
        warm = false;
    } else {
        auto a = slink_cluster(means, num_clusters_);
        if (!cluster_equivalent(assign_, a)) {
            rebuild(means);
            reseed = warm;
            warm = false;
        }
    }

    PsiResult out;
    if (specs_.empty()) {
        out.alt_empty = true;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    }

    const int inner = warm    ? cfg_.warm_inner_iters
                      : reseed ? cfg_.rebuild_inner_iters
                               : cfg_.max_inner_iters;
    const int outer = warm    ? cfg_.warm_outer_iters
                      : reseed ? cfg_.rebuild_outer_iters
                               : cfg_.max_outer_iters;
    const int starts = warm    ? 1
                       : reseed ? cfg_.rebuild_starts
                                : cfg_.multi_starts;
    ++eval_count_;

    // A cached lambda stays feasible for its spec (the constraints do not
    // involve the anchor), so its objective under the current (w, means) is a
    // sound per-spec upper bound. Warm evaluations refine only the specs that
    // screen close to the best bound, plus a round-robin staleness refresh.
    std::vector<double> bound(specs_.size(),
                              std::numeric_limits<double>::infinity());
    double best_bound = std::numeric_limits<double>::infinity();
    if (warm) {
        for (size_t i = 0; i < specs_.size(); ++i) {
            if (!warm_[i].valid) continue;
            const auto lay = make_layout(specs_[i], static_cast<int>(means.cols()));
            double v = 0.0;
            for (size_t f = 0; f < lay.free_arms.size(); ++f) {
                const int a = lay.free_arms[f];
                v += 0.5 * w[a] * (warm_[i].lambda.col(f) - means.col(a)).squaredNorm();
            }
            bound[i] = v;
            best_bound = std::min(best_bound, v);
        }
    }

    int best_index = -1;
    for (size_t i = 0; i < specs_.size(); ++i) {
        if (warm && warm_[i].valid) {
            const bool stale =
                eval_count_ - warm_[i].refresh_stamp >= cfg_.refresh_every;
            if (!stale && bound[i] > cfg_.prune_factor * best_bound + 1e-12) {
                if (bound[i] < out.value) {
                    out.value = bound[i];
                    best_index = static_cast<int>(i);
                }
                continue;
            }
        }
        const auto lay = make_layout(specs_[i], static_cast<int>(means.cols()));
        const int nf = static_cast<int>(lay.free_arms.size());
        Matrix* warm_lam = nullptr;
        if (warm && warm_[i].valid) warm_lam = &warm_[i].lambda;
        QcqpResult r = solve_one(specs_[i], lay, w, means, cfg_, warm_lam ? 1 : starts,
                                 inner, outer, warm_lam, &warm_[i].multipliers,
                                 &warm_[i].rho, cfg_.seed + 0x9e3779b97f4a7c15ULL * (i + 1));
        // store free columns for warm reuse
        Matrix free_cols(means.rows(), nf);
        for (int f = 0; f < nf; ++f) free_cols.col(f) = r.lambda.col(lay.free_arms[f]);
        warm_[i].lambda = free_cols;
        warm_[i].valid = true;
        warm_[i].refresh_stamp = eval_count_;
        if (warm_[i].rho <= 0.0) warm_[i].rho = 0.0;
        if (r.value < out.value) {
            out.value = r.value;
            out.minimizer = r.lambda;
            out.active_spec = specs_[i];
            out.converged = r.converged;
            best_index = -1;
        }
    }
    if (best_index >= 0) {
        // winner came from a screened bound: materialize its minimizer
        const auto lay =
            make_layout(specs_[best_index], static_cast<int>(means.cols()));
        Matrix lambda = means;
        for (size_t f = 0; f < lay.free_arms.size(); ++f)
            lambda.col(lay.free_arms[f]) = warm_[best_index].lambda.col(f);
        out.minimizer = lambda;
        out.active_spec = specs_[best_index];
        out.converged = true;
    }
    return out;
}

PsiResult PsiSolver::eval(const Vector& w, const Matrix& means) {
    return run(w, means, false);
}

PsiResult PsiSolver::eval_warm(const Vector& w, const Matrix& means) {
    return run(w, means, true);
}

PsiResult psi(const Vector& w, const Matrix& means, int num_clusters,
              const SolverConfig& cfg) {
    PsiSolver solver(num_clusters, cfg);
    return solver.eval(w, means);
}

namespace {

// allocation-free SLINK + partition comparison for the grid oracle (M <= 8)
bool is_alternative(const double* lam, int d, int m, int k, const int* target_canon) {
    int cid[8];
    for (int i = 0; i < m; ++i) cid[i] = i;
    int clusters = m;
    while (clusters > k) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                if (cid[i] == cid[j]) continue;
                double dist = 0.0;
                for (int r = 0; r < d; ++r) {
                    const double diff = lam[i * d + r] - lam[j * d + r];
                    dist += diff * diff;
                }
                if (dist < best) {
                    best = dist;
                    bi = i;
                    bj = j;
                }
            }
        const int from = cid[bj], to = cid[bi];
        for (int i = 0; i < m; ++i)
            if (cid[i] == from) cid[i] = to;
        --clusters;
    }
    // canonicalize and compare
    int map[8];
    for (int i = 0; i < m; ++i) map[i] = -1;
    int next = 0;
    for (int i = 0; i < m; ++i) {
        if (map[cid[i]] < 0) map[cid[i]] = next++;
        if (map[cid[i]] != target_canon[i]) return true;  // differs => alternative
    }
    return false;
}

struct GridSearch {
    const Vector* w;
    const Matrix* mu;
    int d, m, k;
    double lo, step;
    int npoints;
    int target[8];
    double best;
    double lam[16];

    void recurse(int idx, double cost) {
        if (cost >= best) return;
        if (idx == m * d) {
            if (is_alternative(lam, d, m, k, target)) best = cost;
            return;
        }
        const int arm = idx / d;
        const int coord = idx % d;
        const double wa = (*w)[arm];
        const double mva = (*mu)(coord, arm);
        for (int p = 0; p < npoints; ++p) {
            const double x = lo + p * step;
            const double c = cost + 0.5 * wa * (x - mva) * (x - mva);
            if (c >= best) continue;
            lam[idx] = x;
            recurse(idx + 1, c);
        }
    }
};

}  // namespace

double grid_oracle_psi(const Vector& w, const Matrix& means, int num_clusters,
                       double step, double pad) {
    const int m = static_cast<int>(means.cols());
    const int d = static_cast<int>(means.rows());
    if (m * d > 4) throw std::invalid_argument("grid oracle: M*d must be <= 4");

    auto assign = slink_cluster(means, num_clusters);
    auto canon = canonicalize(assign);

    GridSearch gs;
    gs.w = &w;
    gs.mu = &means;
    gs.d = d;
    gs.m = m;
    gs.k = num_clusters;
    gs.lo = means.minCoeff() - pad;
    gs.step = step;
    gs.npoints = static_cast<int>(std::floor((means.maxCoeff() + pad - gs.lo) / step)) + 1;
    for (int i = 0; i < m; ++i) gs.target[i] = canon.labels[i] - 1;
    gs.best = std::numeric_limits<double>::infinity();
    gs.recurse(0, 0.0);
    return gs.best;
}

TStarResult t_star(const Matrix& means, int num_clusters, const SolverConfig& cfg,
                   int fw_iters) {
    const int m = static_cast<int>(means.cols());
    PsiSolver solver(num_clusters, cfg);
    Vector w = Vector::Constant(m, 1.0 / m);

    TStarResult out;
    PsiResult first = solver.eval(w, means);
    if (first.alt_empty) {
        out.alt_empty = true;
        out.w_star = w;
        return out;
    }
    out.psi_star = first.value;
    out.w_star = w;
    out.active_spec = first.active_spec;
    out.converged = first.converged;

    double best_warm = first.value;
    Vector w_best = w;
    double last_check = first.value;
    PsiResult res = first;
    for (int it = 0; it < fw_iters; ++it) {
        // supergradient: per-arm transport cost at the active minimizer
        Vector g(m);
        for (int a = 0; a < m; ++a)
            g[a] = 0.5 * (res.minimizer.col(a) - means.col(a)).squaredNorm();
        int j;
        g.maxCoeff(&j);
        const double gamma = 2.0 / (it + 2.0);
        w = (1.0 - gamma) * w;
        w[j] += gamma;
        res = solver.eval_warm(w, means);
        if (res.value > best_warm) {
            best_warm = res.value;
            w_best = w;
        }
        if ((it + 1) % 50 == 0) {
            if (best_warm - last_check < 1e-6 * std::abs(best_warm)) break;
            last_check = best_warm;
        }
    }
    // warm evaluations are upper bounds on psi and their running max drifts
    // high; report full multi-start values at the two candidate points
    PsiResult at_best = solver.eval(w_best, means);
    PsiResult at_last = solver.eval(w, means);
    if (at_last.value > at_best.value) {
        at_best = at_last;
        w_best = w;
    }
    if (at_best.value > out.psi_star) {
        out.psi_star = at_best.value;
        out.w_star = w_best;
        out.active_spec = at_best.active_spec;
        out.converged = at_best.converged;
    }
    out.t_star = 1.0 / out.psi_star;
    return out;
}

double kl_bernoulli(double a, double b) {
    if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0))
        throw std::invalid_argument("kl_bernoulli: arguments must lie in (0,1)");
    return a * std::log(a / b) + (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
}

double lower_bound(double delta, const Matrix& means, int num_clusters,
                   const SolverConfig& cfg) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta out of range");
    auto ts = t_star(means, num_clusters, cfg);
    if (ts.alt_empty) return 0.0;
    return kl_bernoulli(delta, 1.0 - delta) * ts.t_star;
}

}  // namespace boc
