#pragma once
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "fedrda/data.hpp"
#include "fedrda/detector.hpp"
#include "fedrda/nn.hpp"
#include "fedrda/representation.hpp"

namespace fedrda {

enum class AttackMode { replacement, continuous };

struct ClientState {
    int id = 0;
    LabeledDataset data; // clean local shard, used whenever the client acts honestly
    LabeledDataset poisoned_data; // precomputed poisoned variant, used in attack rounds
    bool malicious = false;
    int epochs = 1;
    double boost = 1.0; // update scaling applied in attack rounds
    double stealth_lambda = 0.0;
    int extra_epochs = 5; // additional attacker epochs in attack rounds
};

struct RoundPlan {
    int total_rounds = 20;
    std::set<int> attack_rounds;
    AttackMode mode = AttackMode::replacement;
    int defense_enabled_from = 0;
};

struct RoundRecord {
    int round = 0;
    MlpModel global_model;
    DecisionVector decisions;
    double accuracy = 0.0;
    double asr = 0.0;
    double detect_time = 0.0; // seconds spent in the detection pipeline
};

struct EvalSets {
    LabeledDataset clean_test;
    LabeledDataset backdoor_test;
    StimulusSet stimuli;
    int target_label = 1;
};

struct RunOptions {
    bool parallel = true;
    OutputKind output_kind = OutputKind::softmax;
    std::vector<int> hidden_dims = {32}; // global model architecture between d and m
    // when set, detection is bypassed and this vector is applied in every
    // round at or past defense_enabled_from
    std::optional<DecisionVector> oracle_decisions;
    // collect per-round detection traces
    std::vector<DetectionTrace>* traces = nullptr;
};

// honest clients train cfg.epochs on their shard; malicious clients in attack
// rounds train the poisoned shard for extra epochs, optionally pull toward the
// previous benign mean update, and scale their submitted delta by boost
MlpModel local_update(const MlpModel& global, const ClientState& client, const TrainConfig& cfg,
                      int round, const RoundPlan& plan,
                      const MlpModel* prev_benign_mean_update = nullptr);

// data-size-weighted average over clients not flagged in include
MlpModel fedavg(const std::vector<MlpModel>& updates, const std::vector<size_t>& sizes,
                const DecisionVector& include);
MlpModel fedavg(const std::vector<MlpModel>& updates, const std::vector<size_t>& sizes);

std::vector<RoundRecord> run_rounds(const std::vector<ClientState>& clients,
                                    const RoundPlan& plan, const TrainConfig& train_cfg,
                                    const DetectorConfig& detector_cfg, const EvalSets& eval,
                                    uint64_t seed, const RunOptions& opts = {});

} // namespace fedrda
