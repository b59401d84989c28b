#ifndef BOC_PSI_HPP
#define BOC_PSI_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "boc/cluster.hpp"

namespace boc {

struct SolverConfig {
    int multi_starts = 8;
    int max_inner_iters = 5000;
    int max_outer_iters = 40;
    double grad_tol = 1e-8;
    double feas_tol = 1e-9;
    uint64_t seed = 0;
    // reduced budget for warm re-solves inside algorithm runs
    int warm_inner_iters = 50;
    int warm_outer_iters = 3;
    // warm evaluations refine only specs whose cached feasible point scores
    // within prune_factor of the best; every spec is refreshed at least once
    // per refresh_every warm evaluations
    double prune_factor = 1.5;
    int refresh_every = 32;
    // budget for re-seeding the caches after the clustering changes mid-run
    int rebuild_starts = 2;
    int rebuild_inner_iters = 300;
    int rebuild_outer_iters = 8;
};

struct QcqpProblem {
    AltSpec spec;
    Vector weights;        // length M, on the simplex
    Matrix anchor_means;   // d x M
};

struct QcqpResult {
    Matrix lambda;
    double value = 0.0;
    bool converged = true;
};

// Local minimization of q_w over the closed constraint set of `spec`.
QcqpResult solve_alt_qcqp(const QcqpProblem& problem, const SolverConfig& cfg);

struct PsiResult {
    double value = std::numeric_limits<double>::infinity();
    Matrix minimizer;
    AltSpec active_spec;
    bool converged = true;
    bool alt_empty = false;
};

// Stateful psi evaluator. eval() runs full multi-start solves; eval_warm()
// reuses the previous minimizers, falling back to a full solve whenever the
// clustering of the anchor means changes.
class PsiSolver {
public:
    PsiSolver(int num_clusters, SolverConfig cfg);

    PsiResult eval(const Vector& w, const Matrix& means);
    PsiResult eval_warm(const Vector& w, const Matrix& means);

    const std::vector<AltSpec>& specs() const { return specs_; }

private:
    struct WarmState {
        Matrix lambda;
        std::vector<double> multipliers;
        double rho = 0.0;
        bool valid = false;
        long refresh_stamp = 0;
    };

    PsiResult run(const Vector& w, const Matrix& means, bool warm);
    void rebuild(const Matrix& means);

    int num_clusters_;
    SolverConfig cfg_;
    ClusterAssignment assign_;
    std::vector<AltSpec> specs_;
    std::vector<WarmState> warm_;
    bool have_assign_ = false;
    long eval_count_ = 0;
};

// One-shot psi (full multi-start quality).
PsiResult psi(const Vector& w, const Matrix& means, int num_clusters,
              const SolverConfig& cfg = {});

// Brute-force oracle: minimum of q_w over a regular grid of alternative
// instances. Requires M*d <= 4. Returns +inf when no grid point is feasible.
double grid_oracle_psi(const Vector& w, const Matrix& means, int num_clusters,
                       double step, double pad = 2.0);

struct TStarResult {
    double t_star = std::numeric_limits<double>::infinity();
    double psi_star = 0.0;
    Vector w_star;
    AltSpec active_spec;
    bool alt_empty = false;
    bool converged = true;
};

// Frank-Wolfe maximization of w -> psi(w, means) over the simplex.
TStarResult t_star(const Matrix& means, int num_clusters,
                   const SolverConfig& cfg = {}, int fw_iters = 500);

// KL divergence between Bernoulli(a) and Bernoulli(b), a,b in (0,1).
double kl_bernoulli(double a, double b);

// d_kl(delta, 1-delta) * T*(means); 0 when the alternative space is empty.
double lower_bound(double delta, const Matrix& means, int num_clusters,
                   const SolverConfig& cfg = {});

}  // namespace boc

#endif
