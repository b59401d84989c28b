#ifndef BOC_HARNESS_HPP
#define BOC_HARNESS_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "boc/atboc.hpp"
#include "boc/env.hpp"

namespace boc {

struct DatasetSpec {
    std::string path;
    std::string arm_column = "arm";
    std::string value_column = "value";
    double scale_factor = 1.0;
};

struct ExperimentConfig {
    std::optional<Matrix> means;        // inline d x M instance
    std::optional<DatasetSpec> dataset;  // or an empirical-replay dataset
    int num_clusters = 2;
    std::vector<std::string> algorithms;  // {"atboc","lucbboc","boc_elim"}
    std::vector<double> delta_grid;
    int trials_per_cell = 1;
    uint64_t base_seed = 0;
    RunOptions run;
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

struct TrialRecord {
    std::string algorithm;
    int delta_index = 0;
    double delta = 0.0;
    int trial_index = 0;
    uint64_t seed = 0;
    long stopping_time = 0;
    bool correct = false;
    bool capped = false;
    double wall_millis = 0.0;  // not serialized (breaks bit-exact reruns)
    std::string error;         // nonempty when the trial raised
};

struct IngestReport {
    std::vector<std::string> labels;  // lexicographic, aligned with arm index
    std::vector<long> counts;
    std::vector<double> scaled_means;
};

EmpiricalEnvironment ingest_ratings_csv(const std::string& path,
                                        const std::string& arm_column,
                                        const std::string& value_column,
                                        double scale_factor,
                                        IngestReport* report = nullptr);

// fresh environment + ground-truth clustering for one config
std::unique_ptr<ArmEnvironment> make_environment(const ExperimentConfig& cfg);

std::vector<TrialRecord> run_experiment(const ExperimentConfig& cfg, int jobs = 1);

struct SummaryRow {
    std::string algorithm;
    double delta = 0.0;
    int trials = 0;
    double mean_tau = 0.0;
    double stderr_tau = 0.0;
    double error_rate = 0.0;
    double lower_bound = 0.0;  // d_kl(delta, 1-delta) * T*
};

struct SlopeRow {
    std::string algorithm;
    bool has_slope = false;
    double slope = 0.0;  // mean tau vs log(1/delta), least squares
};

struct Summary {
    std::vector<SummaryRow> rows;
    std::vector<SlopeRow> slopes;
    double t_star = 0.0;  // slope reference for the lower bound
};

Summary summarize(const std::vector<TrialRecord>& records, double t_star_value);

void write_trials_jsonl(const std::string& path, const std::vector<TrialRecord>& records);
void write_summary_csv(const std::string& path, const Summary& summary);
void write_slopes_csv(const std::string& path, const Summary& summary);

// least-squares slope of y on x
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace boc

#endif
