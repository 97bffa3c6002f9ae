#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedrda/fl.hpp"
#include "fedrda/metrics.hpp"

namespace fedrda {

struct DatasetSpec {
    std::string kind = "synth_blobs"; // synth_blobs | idx
    int classes = 10;
    int per_class = 500; // training samples per class (synth)
    int test_per_class = 100;
    int dim = 64;
    double spread = 0.22;
    uint64_t seed = 777; // dataset generation seed, independent of run seeds
    std::string images_path, labels_path; // idx kind
    std::string test_images_path, test_labels_path;
};

struct DistributionSpec {
    std::string kind = "dirichlet"; // iid | dirichlet
    double alpha = 0.9;
};

struct AttackSpec {
    PoisonConfig poison; // defaults to a corner-square backdoor, rate 0.2
    std::optional<double> boost; // unset: clients for replacement, 1 for continuous
    double stealth_lambda = 0.0;
    int extra_epochs = 5;
};

struct ExperimentConfig {
    DatasetSpec dataset;
    int clients = 10;
    double attacker_ratio = 0.0;
    DistributionSpec distribution;
    RoundPlan plan;
    TrainConfig train;
    DetectorConfig detector;
    std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
    AttackSpec attack;
    int stimuli_per_class = 20;
    std::vector<int> hidden_dims = {32};
    std::string output_kind = "softmax"; // softmax | logits
    bool allow_majority_attackers = false;
};

ExperimentConfig default_experiment_config();
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
void validate(const ExperimentConfig& cfg);

struct SeedResult {
    uint64_t seed = 0;
    DetectionMetrics mean_metrics; // averaged over the scheduled attack rounds
    double final_accuracy = 0.0;
    double final_asr = 0.0;
    std::vector<RoundRecord> rounds;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<SeedResult> per_seed;
    double mean_f1 = 0.0;
    double mean_fpr = 0.0;
    double mean_fnr = 0.0;
    double mean_final_accuracy = 0.0;
    double mean_final_asr = 0.0;
};

struct RunExperimentOptions {
    bool parallel = true;
    bool wall_times = false; // write measured detection seconds into the CSVs
    bool traces = false; // dump per-round detection traces
    std::string out_dir; // empty: nothing written
};

ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                const RunExperimentOptions& opts = {});

// round records CSV: round,accuracy,asr,detect_time_s,decisions
void write_rounds_csv(const std::vector<RoundRecord>& rounds, const std::string& path,
                      bool wall_times);
void write_report_json(const ExperimentReport& report, const std::string& path);

struct TimingRow {
    int clients = 0;
    int stimuli_per_class = 0;
    int reps = 0;
    double seconds_total = 0.0;
    double seconds_per_detection = 0.0;
};

// wall time of the detection pipeline (RDM extraction, distance matrix,
// detection) on freshly initialized models over a grid of sizes
std::vector<TimingRow> timing_scan(const std::vector<int>& client_counts,
                                   const std::vector<int>& stimuli_sizes, int classes = 10,
                                   int dim = 16, int reps = 5, uint64_t seed = 7);
void write_timing_csv(const std::vector<TimingRow>& rows, std::ostream& out);

} // namespace fedrda
