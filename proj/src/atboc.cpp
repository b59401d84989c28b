#include "boc/atboc.hpp"

#include <cmath>
#include <stdexcept>

namespace boc {

Matrix BanditState::empirical_means() const {
    Matrix mu = sums;
    for (int m = 0; m < num_arms(); ++m)
        if (counts[m] > 0) mu.col(m) /= static_cast<double>(counts[m]);
    return mu;
}

Vector BanditState::proportions() const {
    Vector p(num_arms());
    for (int m = 0; m < num_arms(); ++m)
        p[m] = static_cast<double>(counts[m]) / static_cast<double>(t);
    return p;
}

std::optional<int> forced_exploration_check(const BanditState& state) {
    const int m = state.num_arms();
    int arg = 0;
    for (int i = 1; i < m; ++i)
        if (state.counts[i] < state.counts[arg]) arg = i;
    if (static_cast<double>(state.counts[arg]) <
        std::sqrt(static_cast<double>(state.t) / m))
        return arg;
    return std::nullopt;
}

int average_tracking_arm(const BanditState& state, const TrackingHistory& history) {
    const int m = state.num_arms();
    int best = -1;
    double best_deficit = 0.0;
    for (int i = 0; i < m; ++i) {
        if (history.cumulative_weights[i] <= 0.0) continue;
        const double deficit =
            (static_cast<double>(state.counts[i]) - history.cumulative_weights[i]) /
            static_cast<double>(state.t);
        if (best < 0 || deficit < best_deficit) {
            best = i;
            best_deficit = deficit;
        }
    }
    if (best < 0) throw std::logic_error("tracking history has empty support");
    return best;
}

double glr_statistic(const BanditState& state, PsiSolver& solver) {
    for (long n : state.counts)
        if (n < 1) throw std::logic_error("Z(t) needs every arm sampled");
    const auto res = solver.eval_warm(state.proportions(), state.empirical_means());
    return static_cast<double>(state.t) * res.value;
}

double glr_statistic(const BanditState& state, int num_clusters,
                     const SolverConfig& cfg) {
    PsiSolver solver(num_clusters, cfg);
    return glr_statistic(state, solver);
}

double threshold_beta(double delta, const BanditState& state, int d) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta out of range");
    double sum = 0.0;
    for (long n : state.counts) sum += std::log(static_cast<double>(n + 1));
    return d * sum + 2.0 * std::log(1.0 / delta);
}

GlrRunner::GlrRunner(int m, int d, double delta, int num_clusters, RunOptions opts)
    : state_(m, d),
      delta_(delta),
      num_clusters_(num_clusters),
      opts_(std::move(opts)),
      stat_solver_(num_clusters, opts_.solver) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta out of range");
    if (num_clusters < 2 || num_clusters > m) throw std::invalid_argument("bad K");
}

std::optional<int> GlrRunner::next_arm() {
    if (stopped_) return std::nullopt;
    const int m = state_.num_arms();
    if (state_.t < m) return static_cast<int>(state_.t);  // init round-robin

    const double z = glr_statistic(state_, stat_solver_);
    const double beta = threshold_beta(delta_, state_, state_.dim());
    if (z >= beta) {
        stopped_ = true;
        return std::nullopt;
    }
    int arm;
    if (auto forced = forced_exploration_check(state_))
        arm = *forced;
    else
        arm = select_arm();
    if (opts_.record_trace) trace_.push_back({state_.t, arm, z, beta});
    return arm;
}

void GlrRunner::feed(int arm, const Vector& x) {
    state_.update(arm, x);
    after_feed();
}

ClusterAssignment GlrRunner::declared() const {
    return slink_cluster(state_.empirical_means(), num_clusters_);
}

RunResult GlrRunner::result(const ClusterAssignment* truth) const {
    RunResult r;
    r.stopping_time = state_.t;
    r.declared = declared();
    r.capped = !stopped_;
    r.correct = truth != nullptr && cluster_equivalent(*truth, r.declared);
    r.trace = trace_;
    return r;
}

AtbocRunner::AtbocRunner(int m, int d, double delta, int num_clusters, RunOptions opts)
    : GlrRunner(m, d, delta, num_clusters, std::move(opts)),
      weight_solver_(num_clusters, opts_.solver),
      w_(Vector::Constant(m, 1.0 / m)) {
    history_.cumulative_weights = Vector::Zero(m);
}

int AtbocRunner::select_arm() {
    return average_tracking_arm(state_, history_);
}

void AtbocRunner::after_feed() {
    if (state_.t < state_.num_arms()) return;  // still initializing
    const Matrix mu = state_.empirical_means();
    if (opts_.exact_weights) {
        auto ts = t_star(mu, num_clusters_, opts_.solver);
        if (!ts.alt_empty) w_ = ts.w_star;
    } else {
        // warm Frank-Wolfe: continue the step-size schedule across time steps
        for (int j = 0; j < opts_.fw_iters; ++j) {
            const auto res = weight_solver_.eval_warm(w_, mu);
            if (res.alt_empty || !std::isfinite(res.value)) return;
            int vertex = 0;
            double best = -1.0;
            for (int a = 0; a < state_.num_arms(); ++a) {
                const double g = 0.5 * (res.minimizer.col(a) - mu.col(a)).squaredNorm();
                if (g > best) {
                    best = g;
                    vertex = a;
                }
            }
            const double gamma = 2.0 / (static_cast<double>(state_.t) + j + 2.0);
            w_ *= 1.0 - gamma;
            w_[vertex] += gamma;
        }
    }
    history_.cumulative_weights += w_;
    ++history_.steps_recorded;
}

RunResult atboc_run(ArmEnvironment& env, double delta, int num_clusters, Rng& rng,
                    const RunOptions& opts, const ClusterAssignment* truth) {
    AtbocRunner runner(env.num_arms(), env.dim(), delta, num_clusters, opts);
    while (auto arm = runner.next_arm()) {
        if (runner.state().t >= opts.step_cap) break;
        runner.feed(*arm, env.sample(*arm, rng));
    }
    return runner.result(truth);
}

}  // namespace boc
