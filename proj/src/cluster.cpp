#include "boc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace boc {

namespace {

double sqdist(const Matrix& means, int i, int j) {
    return (means.col(i) - means.col(j)).squaredNorm();
}

void check_finite(const Matrix& means) {
    if (!means.allFinite()) throw std::invalid_argument("non-finite means");
}

}  // namespace

std::vector<std::vector<int>> ClusterAssignment::groups() const {
    std::vector<std::vector<int>> g(num_clusters);
    for (int i = 0; i < size(); ++i) g[labels[i] - 1].push_back(i);
    return g;
}

ClusterAssignment canonicalize(const ClusterAssignment& c) {
    ClusterAssignment out;
    out.num_clusters = c.num_clusters;
    out.labels.resize(c.labels.size());
    const int max_label =
        c.labels.empty() ? 0 : *std::max_element(c.labels.begin(), c.labels.end());
    std::vector<int> map(max_label + 1, 0);
    int next = 1;
    for (size_t i = 0; i < c.labels.size(); ++i) {
        int l = c.labels[i];
        if (map[l] == 0) map[l] = next++;
        out.labels[i] = map[l];
    }
    return out;
}

ClusterAssignment slink_cluster_subset(const Matrix& means,
                                       const std::vector<int>& arms, int k) {
    const int n = static_cast<int>(arms.size());
    if (n < k || k < 1) throw std::invalid_argument("need at least K arms");
    check_finite(means);

    // cluster id per local arm; merge until k clusters remain
    std::vector<int> cid(n);
    for (int i = 0; i < n; ++i) cid[i] = i;
    int clusters = n;
    while (clusters > k) {
        double best = std::numeric_limits<double>::infinity();
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (cid[i] == cid[j]) continue;
                double d = sqdist(means, arms[i], arms[j]);
                if (d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        int from = cid[bj], to = cid[bi];
        for (int i = 0; i < n; ++i)
            if (cid[i] == from) cid[i] = to;
        --clusters;
    }

    ClusterAssignment out;
    out.num_clusters = k;
    out.labels.assign(n, 0);
    for (int i = 0; i < n; ++i) out.labels[i] = cid[i] + 1;
    return canonicalize(out);
}

ClusterAssignment slink_cluster(const Matrix& means, int k) {
    std::vector<int> arms(means.cols());
    for (int i = 0; i < static_cast<int>(arms.size()); ++i) arms[i] = i;
    return slink_cluster_subset(means, arms, k);
}

bool cluster_equivalent(const ClusterAssignment& c1, const ClusterAssignment& c2) {
    if (c1.labels.size() != c2.labels.size() || c1.num_clusters != c2.num_clusters)
        throw std::invalid_argument("assignment shape mismatch");
    std::vector<int> map(c2.num_clusters + 1, 0);
    std::vector<bool> used(c1.num_clusters + 1, false);
    for (size_t i = 0; i < c1.labels.size(); ++i) {
        int from = c2.labels[i], to = c1.labels[i];
        if (map[from] == 0) {
            if (used[to]) return false;
            map[from] = to;
            used[to] = true;
        } else if (map[from] != to) {
            return false;
        }
    }
    return true;
}

double inter_distance(const Matrix& means, const ClusterAssignment& c) {
    if (c.num_clusters < 2) throw std::invalid_argument("K < 2");
    double best = std::numeric_limits<double>::infinity();
    const int m = c.size();
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (c.labels[i] != c.labels[j]) best = std::min(best, sqdist(means, i, j));
    return best;
}

double intra_distance(const Matrix& means, const ClusterAssignment& c) {
    double overall = 0.0;
    for (const auto& group : c.groups()) {
        const int n = static_cast<int>(group.size());
        if (n < 2) continue;  // empty bipartition set
        double dk = 0.0;
        // bipartitions with arm group[0] fixed in P1; mask 0 leaves P2 empty
        for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
            double cross = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i) {
                bool in1 = (i == 0) || !((mask >> (i - 1)) & 1u);
                if (!in1) continue;
                for (int j = 0; j < n; ++j) {
                    bool jn1 = (j == 0) || !((mask >> (j - 1)) & 1u);
                    if (jn1) continue;
                    cross = std::min(cross, sqdist(means, group[i], group[j]));
                }
            }
            dk = std::max(dk, cross);
        }
        overall = std::max(overall, dk);
    }
    return overall;
}

std::vector<AltSpec> enumerate_alt_specs(const ClusterAssignment& c) {
    std::vector<AltSpec> specs;
    const auto groups = c.groups();
    const int m = c.size();

    std::vector<std::pair<int, int>> cross_pairs;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j)
            if (c.labels[i] != c.labels[j]) cross_pairs.emplace_back(i, j);

    for (int k = 0; k < c.num_clusters; ++k) {
        const auto& group = groups[k];
        const int n = static_cast<int>(group.size());
        if (n < 2) continue;
        // unordered bipartitions: group[0] stays in P1. For the remaining n-1
        // arms, bit set => P2; skip all-zero mask (P2 empty).
        for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
            AltSpec base;
            base.cluster_k = k + 1;
            for (int i = 0; i < n; ++i) {
                bool in2 = (i > 0) && ((mask >> (i - 1)) & 1u);
                (in2 ? base.part2 : base.part1).push_back(group[i]);
            }
            for (const auto& [a, b] : cross_pairs) {
                AltSpec s = base;
                s.arm_m = a;
                s.arm_n = b;
                specs.push_back(std::move(s));
            }
        }
    }
    return specs;
}

ClusterAssignment brute_force_slink_oracle(const Matrix& means, int k) {
    const int m = static_cast<int>(means.cols());
    if (m > 12) throw std::invalid_argument("brute force oracle: M too large");
    if (m < k) throw std::invalid_argument("M < K");
    check_finite(means);

    ClusterAssignment found;
    int hits = 0;
    // enumerate restricted growth strings
    std::vector<int> rgs(m, 0);
    auto consider = [&]() {
        int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        if (blocks != k) return;
        ClusterAssignment c;
        c.num_clusters = k;
        c.labels.resize(m);
        for (int i = 0; i < m; ++i) c.labels[i] = rgs[i] + 1;
        if (intra_distance(means, c) < inter_distance(means, c)) {
            found = c;
            ++hits;
        }
    };
    auto recurse = [&](auto&& self, int i, int prefix_max) -> void {
        if (i == m) {
            consider();
            return;
        }
        int cap = std::min(prefix_max + 1, k - 1);
        for (int v = 0; v <= cap; ++v) {
            rgs[i] = v;
            self(self, i + 1, std::max(prefix_max, v));
        }
    };
    rgs[0] = 0;
    recurse(recurse, 1, 0);
    if (hits == 0) throw std::runtime_error("oracle: no partition satisfies separation");
    if (hits > 1) throw std::runtime_error("oracle: separation condition ambiguous");
    return canonicalize(found);
}

}  // namespace boc
