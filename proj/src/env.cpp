#include "boc/env.hpp"

#include <stdexcept>

namespace boc {

GaussianEnvironment::GaussianEnvironment(Matrix means) : means_(std::move(means)) {
    if (means_.cols() < 1 || means_.rows() < 1 || !means_.allFinite())
        throw std::invalid_argument("invalid mean matrix");
}

Vector GaussianEnvironment::sample(int arm, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector x = means_.col(arm);
    for (int i = 0; i < x.size(); ++i) x[i] += normal(rng);
    return x;
}

EmpiricalEnvironment::EmpiricalEnvironment(std::vector<std::vector<double>> pools)
    : pools_(std::move(pools)) {
    if (pools_.size() < 2) throw std::invalid_argument("need at least 2 pools");
    for (const auto& pool : pools_) {
        if (pool.empty()) throw std::invalid_argument("empty pool");
        double sum = 0.0;
        for (double v : pool) {
            if (!std::isfinite(v)) throw std::invalid_argument("non-finite pool value");
            sum += v;
        }
        pool_means_.push_back(sum / pool.size());
    }
}

Vector EmpiricalEnvironment::sample(int arm, Rng& rng) {
    const auto& pool = pools_[arm];
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    Vector x(1);
    x[0] = pool[pick(rng)];
    return x;
}

Matrix EmpiricalEnvironment::means() const {
    Matrix m(1, static_cast<int>(pool_means_.size()));
    for (size_t i = 0; i < pool_means_.size(); ++i) m(0, static_cast<int>(i)) = pool_means_[i];
    return m;
}

namespace {

uint64_t splitmix64(uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

uint64_t make_trial_seed(uint64_t base_seed, std::string_view algorithm,
                         int delta_index, int trial_index) {
    uint64_t h = base_seed;
    splitmix64(h);
    for (char c : algorithm) {
        h ^= static_cast<uint64_t>(static_cast<unsigned char>(c));
        splitmix64(h);
    }
    h ^= static_cast<uint64_t>(delta_index) * 0x100000001b3ull;
    splitmix64(h);
    h ^= static_cast<uint64_t>(trial_index);
    return splitmix64(h);
}

Rng make_trial_rng(uint64_t base_seed, std::string_view algorithm,
                   int delta_index, int trial_index) {
    return Rng(make_trial_seed(base_seed, algorithm, delta_index, trial_index));
}

}  // namespace boc
