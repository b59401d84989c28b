#ifndef BOC_LUCBBOC_HPP
#define BOC_LUCBBOC_HPP

#include "boc/atboc.hpp"

namespace boc {

struct GapBounds {
    double empirical;  // E_ij = ||mu_i - mu_j|| (unsquared)
    double upper;      // E + alpha_i + alpha_j
    double lower;      // E - alpha_i - alpha_j
};

// alpha_m(t) = sqrt((2/N_m) log(2^{d+1} M N_m^2 / delta))
double confidence_radius(long count, double delta, int m, int d);

GapBounds gap_bounds(const BanditState& state, double delta, int i, int j);

// Algorithm 2 lines 2-7 on the current empirical state.
int lucbboc_select(const BanditState& state, double delta, int num_clusters);

class LucbbocRunner : public GlrRunner {
public:
    using GlrRunner::GlrRunner;

protected:
    int select_arm() override { return lucbboc_select(state_, delta_, num_clusters_); }
};

RunResult lucbboc_run(ArmEnvironment& env, double delta, int num_clusters, Rng& rng,
                      const RunOptions& opts = {},
                      const ClusterAssignment* truth = nullptr);

}  // namespace boc

#endif
