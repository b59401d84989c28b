#ifndef BOC_ENV_HPP
#define BOC_ENV_HPP

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "boc/cluster.hpp"

namespace boc {

using Rng = std::mt19937_64;

class ArmEnvironment {
public:
    virtual ~ArmEnvironment() = default;
    virtual int num_arms() const = 0;
    virtual int dim() const = 0;
    virtual Vector sample(int arm, Rng& rng) = 0;
    // population means when known (used for ground truth and lower bounds)
    virtual Matrix means() const = 0;
};

// i.i.d. N(mu_m, I_d) per arm.
class GaussianEnvironment : public ArmEnvironment {
public:
    explicit GaussianEnvironment(Matrix means);

    int num_arms() const override { return static_cast<int>(means_.cols()); }
    int dim() const override { return static_cast<int>(means_.rows()); }
    Vector sample(int arm, Rng& rng) override;
    Matrix means() const override { return means_; }

private:
    Matrix means_;
};

// Replays observed scalar pools, uniformly with replacement.
class EmpiricalEnvironment : public ArmEnvironment {
public:
    explicit EmpiricalEnvironment(std::vector<std::vector<double>> pools);

    int num_arms() const override { return static_cast<int>(pools_.size()); }
    int dim() const override { return 1; }
    Vector sample(int arm, Rng& rng) override;
    Matrix means() const override;

    const std::vector<std::vector<double>>& pools() const { return pools_; }

private:
    std::vector<std::vector<double>> pools_;
    std::vector<double> pool_means_;
};

// Deterministic seed for one (algorithm, delta, trial) cell; identical
// regardless of worker scheduling.
uint64_t make_trial_seed(uint64_t base_seed, std::string_view algorithm,
                         int delta_index, int trial_index);
Rng make_trial_rng(uint64_t base_seed, std::string_view algorithm,
                   int delta_index, int trial_index);

}  // namespace boc

#endif
