#include "boc/boc_elim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace boc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<Interval> reflect(const std::vector<Interval>& iv) {
    std::vector<Interval> out(iv.size());
    for (size_t i = 0; i < iv.size(); ++i) out[i] = {-iv[i].r, -iv[i].l};
    return out;
}

// arms ranked by interval midpoint, highest first; ties by arm index
std::vector<int> rank_order(const std::vector<Interval>& iv) {
    std::vector<int> order(iv.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return iv[a].l + iv[a].r > iv[b].l + iv[b].r;
    });
    return order;
}

}  // namespace

double confidence_param(long n, double delta, int m) {
    if (n < 1) throw std::invalid_argument("zero count");
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta out of range");
    const double nn = static_cast<double>(n);
    return std::sqrt(2.0 / nn * std::log(4.0 * m * nn * nn / delta));
}

double max_right_gap(const std::vector<Interval>& iv, int m) {
    const int n = static_cast<int>(iv.size());
    auto g = [&](double x) {
        double right_min = kInf;
        for (int j = 0; j < n; ++j)
            if (iv[j].l > x) right_min = std::min(right_min, iv[j].r);
        if (std::isfinite(right_min)) return right_min - x;
        double other_max = -kInf;
        for (int j = 0; j < n; ++j)
            if (j != m) other_max = std::max(other_max, iv[j].r);
        return other_max - x;
    };
    double best = -kInf;
    for (int j = 0; j < n; ++j)
        if (iv[j].l >= iv[m].l && iv[j].l <= iv[m].r) best = std::max(best, g(iv[j].l));
    return best;
}

double max_left_gap(const std::vector<Interval>& iv, int m) {
    return max_right_gap(reflect(iv), m);
}

double min_right_gap(const std::vector<Interval>& iv, int m) {
    const int n = static_cast<int>(iv.size());
    for (int j = 0; j < n; ++j)
        if (j != m && iv[j].r >= iv[m].l && iv[j].l <= iv[m].r) return 0.0;
    double best = kInf;
    for (int j = 0; j < n; ++j)
        if (iv[j].l > iv[m].r) best = std::min(best, iv[j].l - iv[m].r);
    return std::isfinite(best) ? best : 0.0;
}

double min_left_gap(const std::vector<Interval>& iv, int m) {
    return min_right_gap(reflect(iv), m);
}

double rank_gap_lcb(const std::vector<Interval>& iv, int k) {
    const int n = static_cast<int>(iv.size());
    if (k < 1 || k > n - 1) throw std::invalid_argument("rank out of range");
    const auto order = rank_order(iv);
    double top = kInf, bottom = -kInf;
    for (int i = 0; i < k; ++i) top = std::min(top, iv[order[i]].l);
    for (int i = k; i < n; ++i) bottom = std::max(bottom, iv[order[i]].r);
    return top - bottom;
}

double rank_gap_ucb(const std::vector<Interval>& iv, int k) {
    const int n = static_cast<int>(iv.size());
    if (k < 1 || k > n - 1) throw std::invalid_argument("rank out of range");
    const auto order = rank_order(iv);
    double top = kInf, bottom = -kInf;
    for (int i = 0; i < k; ++i) top = std::min(top, iv[order[i]].r);
    for (int i = k; i < n; ++i) bottom = std::max(bottom, iv[order[i]].l);
    return top - bottom;
}

std::pair<double, double> kth_gap_bounds(const std::vector<Interval>& iv, int k) {
    const int n = static_cast<int>(iv.size());
    if (k < 1 || k > n - 1) throw std::invalid_argument("rank out of range");
    std::vector<double> lcbs, ucbs;
    for (int j = 1; j <= n - 1; ++j) {
        lcbs.push_back(rank_gap_lcb(iv, j));
        ucbs.push_back(rank_gap_ucb(iv, j));
    }
    std::sort(lcbs.rbegin(), lcbs.rend());
    std::sort(ucbs.rbegin(), ucbs.rend());
    return {lcbs[k - 1], ucbs[k - 1]};
}

std::vector<Interval> ElimState::intervals(double delta) const {
    std::vector<Interval> iv(counts.size());
    for (int m = 0; m < num_arms(); ++m) {
        const double c = confidence_param(counts[m], delta, num_arms());
        iv[m] = {mean(m) - c, mean(m) + c};
    }
    return iv;
}

std::vector<int> ElimState::active_arms() const {
    std::vector<int> a;
    for (int m = 0; m < num_arms(); ++m)
        if (right[m] == SideStatus::Active || left[m] == SideStatus::Active)
            a.push_back(m);
    return a;
}

long ElimState::count_side(SideStatus s) const {
    long n = 0;
    for (int m = 0; m < num_arms(); ++m) {
        if (right[m] == s) ++n;
        if (left[m] == s) ++n;
    }
    return n;
}

ElimRunner::ElimRunner(int m, double delta, int num_clusters)
    : state_(m), delta_(delta), num_clusters_(num_clusters) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta out of range");
    if (num_clusters < 2 || num_clusters > m - 1)
        throw std::invalid_argument("need 2 <= K <= M-1");
}

bool ElimRunner::finished() const {
    const int m = state_.num_arms();
    return state_.count_side(SideStatus::Finished) >= 2 * (m - num_clusters_) ||
           state_.count_side(SideStatus::Selected) >= 2 * (num_clusters_ - 1);
}

void ElimRunner::step(ArmEnvironment& env, Rng& rng) {
    if (env.dim() != 1) throw std::invalid_argument("BOC-Elim needs d=1");
    for (int m : state_.active_arms()) {
        const Vector x = env.sample(m, rng);
        state_.sums[m] += x[0];
        ++state_.counts[m];
        ++state_.total_pulls;
    }
    ++state_.rounds;
    eliminate();
}

void ElimRunner::eliminate() {
    const auto iv = state_.intervals(delta_);
    const int m = state_.num_arms();
    const double l_top = kth_gap_bounds(iv, num_clusters_ - 1).first;  // LDelta^{(K-1)}
    const double u_kth = num_clusters_ <= m - 1
                             ? kth_gap_bounds(iv, num_clusters_).second  // UDelta^{(K)}
                             : -kInf;
    for (int arm = 0; arm < m; ++arm) {
        if (state_.right[arm] == SideStatus::Active) {
            if (max_right_gap(iv, arm) < l_top)
                state_.right[arm] = SideStatus::Finished;
            else if (min_right_gap(iv, arm) > u_kth)
                state_.right[arm] = SideStatus::Selected;
        }
        if (state_.left[arm] == SideStatus::Active) {
            if (max_left_gap(iv, arm) < l_top)
                state_.left[arm] = SideStatus::Finished;
            else if (min_left_gap(iv, arm) > u_kth)
                state_.left[arm] = SideStatus::Selected;
        }
    }
}

ClusterAssignment ElimRunner::declared() const {
    const int m = state_.num_arms();
    // rank arms by empirical mean, highest first
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return state_.mean(a) > state_.mean(b);
    });

    // gap g sits between ranks g and g+1; its right slot is the arm ranked
    // g+1, its left slot the arm ranked g
    struct Gap {
        int idx;
        double width;
        bool selected;
        bool excluded;
    };
    std::vector<Gap> gaps;
    for (int g = 1; g <= m - 1; ++g) {
        const int left_arm = order[g - 1], right_arm = order[g];
        Gap gap;
        gap.idx = g;
        gap.width = state_.mean(left_arm) - state_.mean(right_arm);
        gap.selected = state_.right[right_arm] == SideStatus::Selected ||
                       state_.left[left_arm] == SideStatus::Selected;
        gap.excluded = state_.right[right_arm] == SideStatus::Finished ||
                       state_.left[left_arm] == SideStatus::Finished;
        gaps.push_back(gap);
    }
    // cut at the selected gaps; fill any remaining slots with the widest
    // non-excluded gaps, then (defensively) the widest excluded ones
    auto wider = [](const Gap& a, const Gap& b) {
        if (a.width != b.width) return a.width > b.width;
        return a.idx < b.idx;
    };
    std::vector<Gap> pool = gaps;
    std::sort(pool.begin(), pool.end(), wider);
    std::vector<bool> cut(m, false);
    int cuts = 0;
    for (int pass = 0; pass < 3 && cuts < num_clusters_ - 1; ++pass) {
        for (const auto& g : pool) {
            if (cuts >= num_clusters_ - 1) break;
            if (cut[g.idx]) continue;
            const bool take = (pass == 0) ? g.selected
                            : (pass == 1) ? !g.excluded
                                          : true;
            if (take) {
                cut[g.idx] = true;
                ++cuts;
            }
        }
    }

    ClusterAssignment out;
    out.num_clusters = num_clusters_;
    out.labels.resize(m);
    int label = 1;
    for (int rank = 0; rank < m; ++rank) {
        if (rank > 0 && cut[rank]) ++label;
        out.labels[order[rank]] = label;
    }
    return canonicalize(out);
}

RunResult boc_elim_run(ArmEnvironment& env, double delta, int num_clusters,
                       Rng& rng, const RunOptions& opts,
                       const ClusterAssignment* truth) {
    ElimRunner runner(env.num_arms(), delta, num_clusters);
    while (!runner.finished() && runner.state().total_pulls < opts.step_cap)
        runner.step(env, rng);
    RunResult r;
    r.stopping_time = runner.state().total_pulls;
    r.declared = runner.declared();
    r.capped = !runner.finished();
    r.correct = truth != nullptr && cluster_equivalent(*truth, r.declared);
    return r;
}

namespace {

// rho_m^r on means sorted descending (Eqs. (18)-(19))
std::vector<double> rho_right(const std::vector<double>& mu, int k) {
    const int m = static_cast<int>(mu.size());
    std::vector<double> gap(m - 1);
    for (int g = 0; g < m - 1; ++g) gap[g] = mu[g] - mu[g + 1];
    std::vector<int> order(m - 1);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return gap[a] > gap[b]; });
    std::vector<bool> top_right(m, false);
    for (int j = 0; j < k - 1; ++j) top_right[order[j] + 1] = true;
    const double top_k1 = gap[order[k - 2]];                    // Delta_{(K-1)}
    const double top_k = k <= m - 1 ? gap[order[k - 1]] : 0.0;  // Delta_{(K)}

    std::vector<double> rho(m);
    for (int i = 0; i < m; ++i) {
        if (top_right[i]) {
            const double first = (i + 1 == k || i == m - 1) ? kInf : gap[i] / 4.0;
            rho[i] = std::min(first, (gap[i - 1] - top_k) / 8.0);
        } else if (i == 0) {
            rho[i] = kInf;
        } else {
            double best = -kInf;
            for (int j = 0; j < i; ++j) {
                const double dmj = mu[j] - mu[i];
                best = std::max(best, std::min(dmj / 4.0, (top_k1 - dmj) / 8.0));
            }
            rho[i] = std::max(best, (top_k1 - (mu[0] - mu[i])) / 8.0);
        }
    }
    return rho;
}

}  // namespace

std::vector<double> hardness_rho(const Vector& means, int num_clusters) {
    const int m = static_cast<int>(means.size());
    if (num_clusters < 2 || num_clusters > m) throw std::invalid_argument("bad K");
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return means[a] > means[b]; });
    std::vector<double> sorted(m);
    for (int i = 0; i < m; ++i) sorted[i] = means[order[i]];
    for (int i = 0; i + 1 < m; ++i)
        if (sorted[i] == sorted[i + 1])
            throw std::invalid_argument("duplicate means: hardness undefined");

    const auto rr = rho_right(sorted, num_clusters);
    std::vector<double> reflected(m);
    for (int i = 0; i < m; ++i) reflected[i] = -sorted[m - 1 - i];
    const auto rl_reflected = rho_right(reflected, num_clusters);

    std::vector<double> rho(m);
    for (int i = 0; i < m; ++i)
        rho[order[i]] = std::min(rr[i], rl_reflected[m - 1 - i]);
    return rho;
}

double predicted_sample_bound(const Vector& means, int num_clusters, double delta) {
    if (delta <= 0.0 || delta >= 1.0) throw std::invalid_argument("delta out of range");
    const auto rho = hardness_rho(means, num_clusters);
    const double m = static_cast<double>(means.size());
    double total = 0.0;
    for (double r : rho) {
        if (std::isinf(r)) continue;
        if (r <= 0.0) throw std::domain_error("non-positive hardness parameter");
        total += 23.0 * std::log(m / (delta * r)) / (r * r);
    }
    return total;
}

}  // namespace boc
