#include "doctest.h"

#include <cmath>
#include <random>

#include "boc/psi.hpp"

using namespace boc;

namespace {

Matrix row(std::initializer_list<double> vals) {
    Matrix m(1, static_cast<Eigen::Index>(vals.size()));
    int i = 0;
    for (double v : vals) m(0, i++) = v;
    return m;
}

Vector weights(std::initializer_list<double> vals) {
    Vector w(static_cast<Eigen::Index>(vals.size()));
    int i = 0;
    for (double v : vals) w[i++] = v;
    return w;
}

Vector uniform_w(int m) { return Vector::Constant(m, 1.0 / m); }

Vector random_simplex(std::mt19937_64& rng, int m) {
    std::exponential_distribution<double> exp1(1.0);
    Vector w(m);
    for (int i = 0; i < m; ++i) w[i] = exp1(rng);
    return w / w.sum();
}

// brute-force minimum of q_w over a grid restricted to one AltSpec's
// constraint set (independent check for solve_alt_qcqp)
double spec_grid_min(const AltSpec& spec, const Vector& w, const Matrix& mu,
                     double step, double pad = 2.0) {
    const int m = static_cast<int>(mu.cols());
    REQUIRE(mu.rows() == 1);
    REQUIRE(m <= 4);
    const double lo = mu.minCoeff() - pad;
    const int n = static_cast<int>(std::floor((mu.maxCoeff() + pad - lo) / step)) + 1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> lam(m);
    auto rec = [&](auto&& self, int idx, double cost) -> void {
        if (cost >= best) return;
        if (idx == m) {
            const double mn = std::abs(lam[spec.arm_m] - lam[spec.arm_n]);
            for (int a : spec.part1)
                for (int b : spec.part2)
                    if (std::abs(lam[a] - lam[b]) < mn) return;
            best = cost;
            return;
        }
        for (int p = 0; p < n; ++p) {
            lam[idx] = lo + p * step;
            const double c = cost + 0.5 * w[idx] * (lam[idx] - mu(0, idx)) * (lam[idx] - mu(0, idx));
            if (c < best) self(self, idx + 1, c);
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

}  // namespace

TEST_CASE("kl_bernoulli") {
    CHECK(kl_bernoulli(0.5, 0.5) == doctest::Approx(0.0));
    CHECK(kl_bernoulli(0.1, 0.9) == doctest::Approx(1.7578).epsilon(1e-3));
    // d_kl(delta, 1-delta) / log(1/delta) -> 1
    for (double delta : {1e-4, 1e-6, 1e-8}) {
        const double ratio = kl_bernoulli(delta, 1.0 - delta) / std::log(1.0 / delta);
        CHECK(ratio == doctest::Approx(1.0).epsilon(0.01));
    }
    CHECK_THROWS(kl_bernoulli(0.0, 0.5));
    CHECK_THROWS(kl_bernoulli(0.5, 1.0));
}

TEST_CASE("grid oracle: empty alternative space for M=K=2") {
    CHECK(std::isinf(grid_oracle_psi(uniform_w(2), row({0, 1}), 2, 0.05)));
}

TEST_CASE("grid oracle: monotone in step refinement") {
    const auto mu = row({0, 0.6, 1});
    const Vector w = uniform_w(3);
    const double v1 = grid_oracle_psi(w, mu, 2, 0.1);
    const double v2 = grid_oracle_psi(w, mu, 2, 0.05);
    const double v3 = grid_oracle_psi(w, mu, 2, 0.025);
    CHECK(v1 > 0.0);
    CHECK(v2 <= v1 + 1e-12);
    CHECK(v3 <= v2 + 1e-12);
}

TEST_CASE("grid oracle: monotone in arm weight") {
    const auto mu = row({0, 0.6, 1});
    const Vector w = uniform_w(3);
    Vector w2 = w;
    w2[2] += 0.5;  // unnormalized comparison: q_w is pointwise monotone in w
    CHECK(grid_oracle_psi(w2, mu, 2, 0.05) >= grid_oracle_psi(w, mu, 2, 0.05) - 1e-12);
}

TEST_CASE("solve_alt_qcqp matches spec-restricted grid minimum") {
    const auto mu = row({0, 0, 1});
    auto assign = slink_cluster(mu, 2);
    REQUIRE(assign.labels == std::vector<int>{1, 1, 2});
    // spec: split {arm0, arm1}, cross pair (arm1, arm2)
    AltSpec spec;
    spec.cluster_k = 1;
    spec.part1 = {0};
    spec.part2 = {1};
    spec.arm_m = 1;
    spec.arm_n = 2;

    QcqpProblem prob{spec, uniform_w(3), mu};
    SolverConfig cfg;
    auto res = solve_alt_qcqp(prob, cfg);
    const double oracle = spec_grid_min(spec, prob.weights, mu, 0.005);
    CHECK(res.value == doctest::Approx(oracle).epsilon(1e-2));
    CHECK(res.value > 0.0);
}

TEST_CASE("solve_alt_qcqp: zero-weight free arms cost nothing") {
    const auto mu = row({0, 0, 1});
    AltSpec spec;
    spec.cluster_k = 1;
    spec.part1 = {0};
    spec.part2 = {1};
    spec.arm_m = 1;
    spec.arm_n = 2;
    QcqpProblem prob{spec, weights({0, 0, 1}), mu};
    prob.spec = spec;
    SolverConfig cfg;
    auto res = solve_alt_qcqp(prob, cfg);
    CHECK(res.value == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("psi: empty alternative space sentinel") {
    auto res = psi(uniform_w(2), row({0, 1}), 2);
    CHECK(res.alt_empty);
    CHECK(std::isinf(res.value));
}

TEST_CASE("psi matches grid oracle, d=1") {
    const auto mu = row({0, 0, 1});
    auto res = psi(uniform_w(3), mu, 2);
    const double oracle = grid_oracle_psi(uniform_w(3), mu, 2, 0.01);
    CHECK(res.value == doctest::Approx(oracle).epsilon(1e-2));
    CHECK(res.value > 0.0);
}

TEST_CASE("psi matches grid oracle, d=2 dataset-1 subsample") {
    // 2 columns of the d=2 instance keep M*d <= 4
    Matrix mu(2, 2);
    mu << -1, 3, -1, 3;
    // M=2, K=2 has no splittable cluster: sentinel on both paths
    CHECK(std::isinf(grid_oracle_psi(uniform_w(2), mu, 2, 0.25)));
    CHECK(psi(uniform_w(2), mu, 2).alt_empty);
}

TEST_CASE("psi on random instances vs grid oracle") {
    std::mt19937_64 rng(123);
    std::uniform_real_distribution<double> unif(0.0, 1.5);
    int done = 0;
    while (done < 10) {
        Matrix mu(1, 3);
        for (int i = 0; i < 3; ++i) mu(0, i) = unif(rng);
        auto c = slink_cluster(mu, 2);
        if (inter_distance(mu, c) < 1.2 * intra_distance(mu, c) + 1e-3) continue;
        Vector w = random_simplex(rng, 3);
        auto res = psi(w, mu, 2);
        const double oracle = grid_oracle_psi(w, mu, 2, 0.02);
        CHECK(res.value == doctest::Approx(oracle).epsilon(5e-2));
        ++done;
    }
}

TEST_CASE("psi quadratic scaling") {
    std::mt19937_64 rng(9);
    const auto mu = row({0, 0.4, 1.3, 1.8});
    const Vector w = random_simplex(rng, 4);
    const double base = psi(w, mu, 2).value;
    for (double c : {0.5, 2.0, 4.0}) {
        const double scaled = psi(w, Matrix(c * mu), 2).value;
        CHECK(scaled == doctest::Approx(c * c * base).epsilon(1e-6));
    }
}

TEST_CASE("psi concavity in w") {
    std::mt19937_64 rng(31);
    const auto mu = row({0, 0.5, 1.5, 2});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    SolverConfig cfg;
    PsiSolver solver(2, cfg);
    double max_psi = 0.0;
    for (int probe = 0; probe < 30; ++probe) {
        Vector w1 = random_simplex(rng, 4);
        Vector w2 = random_simplex(rng, 4);
        const double alpha = unif(rng);
        Vector wm = alpha * w1 + (1 - alpha) * w2;
        const double p1 = solver.eval(w1, mu).value;
        const double p2 = solver.eval(w2, mu).value;
        const double pm = solver.eval(wm, mu).value;
        max_psi = std::max({max_psi, p1, p2, pm});
        CHECK(pm >= alpha * p1 + (1 - alpha) * p2 - 1e-6 * max_psi);
    }
}

TEST_CASE("t_star: mirror-symmetric instance gives symmetric weights") {
    // [0,2,5,7] reversed and negated is itself shifted: w* must mirror
    auto ts = t_star(row({0, 2, 5, 7}), 2);
    CHECK(!ts.alt_empty);
    CHECK(ts.psi_star > 0.0);
    CHECK(std::abs(ts.w_star[0] - ts.w_star[3]) < 0.05);
    CHECK(std::abs(ts.w_star[1] - ts.w_star[2]) < 0.05);
}

TEST_CASE("t_star beats random simplex points") {
    std::mt19937_64 rng(77);
    const auto mu = row({0, 0.5, 1.5, 2});
    SolverConfig cfg;
    auto ts = t_star(mu, 2, cfg);
    PsiSolver solver(2, cfg);
    for (int i = 0; i < 100; ++i) {
        Vector w = random_simplex(rng, 4);
        CHECK(solver.eval(w, mu).value <= ts.psi_star * (1.0 + 1e-3) + 1e-9);
    }
}

TEST_CASE("t_star scaling: T* divides by c^2") {
    const auto mu = row({0, 0.6, 1.9, 2.4});
    auto base = t_star(mu, 2);
    auto scaled = t_star(Matrix(2.0 * mu), 2);
    CHECK(scaled.t_star == doctest::Approx(base.t_star / 4.0).epsilon(5e-3));
}

TEST_CASE("t_star matches dense simplex sampling of the grid oracle") {
    const auto mu = row({0, 0, 1});
    auto ts = t_star(mu, 2);
    double best = 0.0;
    const int steps = 20;  // w on a 0.05-resolution simplex grid
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; j + i <= steps; ++j) {
            Vector w(3);
            w << double(i) / steps, double(j) / steps, double(steps - i - j) / steps;
            best = std::max(best, grid_oracle_psi(w, mu, 2, 0.05));
        }
    CHECK(1.0 / ts.t_star == doctest::Approx(best).epsilon(0.05));
}

TEST_CASE("lower_bound") {
    const auto mu = row({0, 0.5, 1.5, 2});
    CHECK(lower_bound(0.5, mu, 2) == doctest::Approx(0.0));
    auto ts = t_star(mu, 2);
    const double delta = 1e-7;
    CHECK(lower_bound(delta, mu, 2) / std::log(1.0 / delta) ==
          doctest::Approx(ts.t_star).epsilon(0.02));
    // empty alternative space
    CHECK(lower_bound(0.1, row({0, 1}), 2) == doctest::Approx(0.0));
}

TEST_CASE("lower_bound on the d=2 benchmark instance") {
    Matrix mu(2, 4);
    mu << -1, -1, 3, 4, -1, -2, 3, 4;
    const double bound = lower_bound(std::exp(-6.0), mu, 2);
    CHECK(bound > 12.0);
    CHECK(bound < 20.0);
}
