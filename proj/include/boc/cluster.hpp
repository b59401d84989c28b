#ifndef BOC_CLUSTER_HPP
#define BOC_CLUSTER_HPP

#include <Eigen/Dense>
#include <vector>

namespace boc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Cluster labels are 1..K; arm indices are 0..M-1.
struct ClusterAssignment {
    std::vector<int> labels;
    int num_clusters = 0;

    int size() const { return static_cast<int>(labels.size()); }
    std::vector<std::vector<int>> groups() const;
};

// A problem instance: columns of `means` are the arm mean vectors.
struct ProblemInstance {
    Matrix means;  // d x M
    int num_clusters;

    int dim() const { return static_cast<int>(means.rows()); }
    int num_arms() const { return static_cast<int>(means.cols()); }
};

// One term of the alternative-space decomposition: split cluster k into
// (part1, part2) and compare against the cross-cluster pair (arm_m, arm_n).
struct AltSpec {
    int cluster_k;             // 1..K
    std::vector<int> part1;    // arms, part1 contains the smallest index of D_k
    std::vector<int> part2;
    int arm_m;                 // from cluster p
    int arm_n;                 // from cluster q != p
};

// Single-linkage agglomerative clustering with squared Euclidean distances.
// Ties are broken by the lexicographically smallest arm pair, and labels are
// canonicalized by first occurrence (lowest arm index gets label 1).
ClusterAssignment slink_cluster(const Matrix& means, int k);

// SLINK restricted to a subset of arms; returns labels aligned with `arms`.
ClusterAssignment slink_cluster_subset(const Matrix& means,
                                       const std::vector<int>& arms, int k);

// True iff some permutation of [K] maps c2 onto c1 elementwise.
bool cluster_equivalent(const ClusterAssignment& c1, const ClusterAssignment& c2);

// min over cross-cluster arm pairs of the squared distance.
double inter_distance(const Matrix& means, const ClusterAssignment& c);

// max over clusters of the best-bipartition min cross distance (squared).
// Singleton clusters contribute 0.
double intra_distance(const Matrix& means, const ClusterAssignment& c);

// Every (k, P1, P2, m, n) tuple of the alternative-space decomposition.
std::vector<AltSpec> enumerate_alt_specs(const ClusterAssignment& c);

// Exhaustive search over set partitions into K blocks; returns the unique
// partition with d_INTRA < d_INTER. Throws if none or several qualify.
ClusterAssignment brute_force_slink_oracle(const Matrix& means, int k);

// Canonical relabeling by first occurrence.
ClusterAssignment canonicalize(const ClusterAssignment& c);

}  // namespace boc

#endif
