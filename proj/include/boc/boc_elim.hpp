#ifndef BOC_BOC_ELIM_HPP
#define BOC_BOC_ELIM_HPP

#include "boc/atboc.hpp"
#include "boc/env.hpp"

namespace boc {

// c_n = sqrt((2/n) log(4 M n^2 / delta))
double confidence_param(long n, double delta, int m);

struct Interval {
    double l;
    double r;
};

// gap statistics over per-arm confidence intervals (d=1)
double max_right_gap(const std::vector<Interval>& iv, int m);
double max_left_gap(const std::vector<Interval>& iv, int m);
double min_right_gap(const std::vector<Interval>& iv, int m);
double min_left_gap(const std::vector<Interval>& iv, int m);

// LDelta^k / UDelta^k for the rank-k gap (arms ranked by interval midpoint,
// ties by arm index)
double rank_gap_lcb(const std::vector<Interval>& iv, int k);
double rank_gap_ucb(const std::vector<Interval>& iv, int k);

// k-th LARGEST of the rank-gap LCBs and UCBs: (LDelta^{(k)}, UDelta^{(k)})
std::pair<double, double> kth_gap_bounds(const std::vector<Interval>& iv, int k);

enum class SideStatus { Active, Finished, Selected };

struct ElimState {
    long rounds = 0;
    long total_pulls = 0;
    std::vector<long> counts;
    std::vector<double> sums;
    std::vector<SideStatus> right;  // A_r / F_r / S_r membership per arm
    std::vector<SideStatus> left;

    explicit ElimState(int m)
        : counts(m, 0), sums(m, 0.0),
          right(m, SideStatus::Active), left(m, SideStatus::Active) {}
    int num_arms() const { return static_cast<int>(counts.size()); }
    double mean(int arm) const { return sums[arm] / counts[arm]; }
    std::vector<Interval> intervals(double delta) const;
    std::vector<int> active_arms() const;  // A = A_r u A_l, ascending
    long count_side(SideStatus s) const;
};

class ElimRunner {
public:
    ElimRunner(int m, double delta, int num_clusters);

    bool finished() const;
    // samples every active arm once, then applies the four elimination tests
    void step(ArmEnvironment& env, Rng& rng);
    ClusterAssignment declared() const;
    const ElimState& state() const { return state_; }

private:
    void eliminate();

    ElimState state_;
    double delta_;
    int num_clusters_;
};

RunResult boc_elim_run(ArmEnvironment& env, double delta, int num_clusters,
                       Rng& rng, const RunOptions& opts = {},
                       const ClusterAssignment* truth = nullptr);

// hardness parameters rho_m (Eqs. (18)-(19) and mirror), in input arm order
std::vector<double> hardness_rho(const Vector& means, int num_clusters);

// Theorem 6: sum_m 23 log(M/(delta rho_m)) / rho_m^2
double predicted_sample_bound(const Vector& means, int num_clusters, double delta);

}  // namespace boc

#endif
