#ifndef BOC_ATBOC_HPP
#define BOC_ATBOC_HPP

#include <optional>

#include "boc/env.hpp"
#include "boc/psi.hpp"

namespace boc {

struct BanditState {
    long t = 0;
    std::vector<long> counts;  // N_m(t)
    Matrix sums;               // d x M per-arm sample sums

    BanditState(int m, int d) : counts(m, 0), sums(Matrix::Zero(d, m)) {}
    int num_arms() const { return static_cast<int>(counts.size()); }
    int dim() const { return static_cast<int>(sums.rows()); }
    void update(int arm, const Vector& x) {
        sums.col(arm) += x;
        ++counts[arm];
        ++t;
    }
    // valid only where counts > 0
    Matrix empirical_means() const;
    Vector proportions() const;
};

struct TrackingHistory {
    Vector cumulative_weights;  // sum of w(s) over recorded steps
    long steps_recorded = 0;
};

struct StepLogEntry {
    long t;
    int arm;
    double z;
    double beta;
};

struct RunResult {
    long stopping_time = 0;
    ClusterAssignment declared;
    bool correct = false;  // meaningful only when ground truth was supplied
    bool capped = false;
    std::vector<StepLogEntry> trace;
};

struct RunOptions {
    long step_cap = 10'000'000;
    int fw_iters = 5;            // Frank-Wolfe iterations per step for w(t)
    bool exact_weights = false;  // full re-solve of argmax_w psi every step
    SolverConfig solver;
    bool record_trace = false;
};

// arm with min count when min_m N_m(t) < sqrt(t/M); ties -> lowest index
std::optional<int> forced_exploration_check(const BanditState& state);

// argmin over supp(cumulative_weights) of N_m(t)/t - cumulative_weights_m/t
int average_tracking_arm(const BanditState& state, const TrackingHistory& history);

// Z(t) = t * psi(N(t)/t, empirical means)
double glr_statistic(const BanditState& state, PsiSolver& solver);
double glr_statistic(const BanditState& state, int num_clusters,
                     const SolverConfig& cfg = {});

// beta(delta, t) = d * sum_m log(N_m+1) + 2 log(1/delta)
double threshold_beta(double delta, const BanditState& state, int d);

// Step-iterator for the shared GLR skeleton: the caller owns the sampling
// loop. next_arm() returns the arm to pull, or nullopt once the stopping rule
// fires; feed() consumes the sample for that arm.
class GlrRunner {
public:
    GlrRunner(int m, int d, double delta, int num_clusters, RunOptions opts);
    virtual ~GlrRunner() = default;

    std::optional<int> next_arm();
    void feed(int arm, const Vector& x);

    bool stopped() const { return stopped_; }
    const BanditState& state() const { return state_; }
    ClusterAssignment declared() const;
    RunResult result(const ClusterAssignment* truth = nullptr) const;

protected:
    virtual int select_arm() = 0;   // called after init, when not stopping
    virtual void after_feed() {}    // policy bookkeeping once state is updated

    BanditState state_;
    double delta_;
    int num_clusters_;
    RunOptions opts_;
    PsiSolver stat_solver_;  // warm solver for Z(t)

private:
    bool stopped_ = false;
    std::vector<StepLogEntry> trace_;
};

class AtbocRunner : public GlrRunner {
public:
    AtbocRunner(int m, int d, double delta, int num_clusters, RunOptions opts);

    const TrackingHistory& history() const { return history_; }
    const Vector& current_weights() const { return w_; }

protected:
    int select_arm() override;
    void after_feed() override;

private:
    TrackingHistory history_;
    PsiSolver weight_solver_;  // warm solver driving the Frank-Wolfe updates
    Vector w_;
};

RunResult atboc_run(ArmEnvironment& env, double delta, int num_clusters, Rng& rng,
                    const RunOptions& opts = {},
                    const ClusterAssignment* truth = nullptr);

}  // namespace boc

#endif
