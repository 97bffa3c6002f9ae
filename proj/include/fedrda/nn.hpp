#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "fedrda/data.hpp"
#include "fedrda/matrix.hpp"

namespace fedrda {

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 5;
    int batch_size = 32;
    uint64_t seed = 0;
};

struct MlpModel {
    std::vector<int> layer_dims; // input dim, hidden dims..., class count
    std::vector<DenseMatrix> weights; // weights[i]: dims[i+1] x dims[i]
    std::vector<std::vector<double>> biases;

    int input_dim() const { return layer_dims.front(); }
    int output_dim() const { return layer_dims.back(); }
    size_t parameter_count() const;
};

// uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)]
MlpModel init_mlp(const std::vector<int>& layer_dims, uint64_t seed);

// tanh hidden activations, softmax output rows
DenseMatrix forward(const MlpModel& model, const DenseMatrix& inputs);
// pre-softmax scores, same hidden path
DenseMatrix forward_logits(const MlpModel& model, const DenseMatrix& inputs);

// mean negative log-likelihood with probability floor 1e-12
double cross_entropy(const DenseMatrix& probabilities, const std::vector<int>& labels);

struct Gradients {
    std::vector<DenseMatrix> weights;
    std::vector<std::vector<double>> biases;
};

// mean cross-entropy gradients over the batch
Gradients gradients(const MlpModel& model, const DenseMatrix& inputs,
                    const std::vector<int>& labels);

MlpModel train_local(const MlpModel& model, const LabeledDataset& data, const TrainConfig& cfg);

// mini-batch SGD with an optional pull toward an anchor parameter vector:
// loss += lambda * ||w - anchor||_2 (used by the stealthy malicious objective;
// lambda 0 means plain training)
MlpModel train_local_penalized(const MlpModel& model, const LabeledDataset& data,
                               const TrainConfig& cfg, double lambda, const MlpModel* anchor);

bool same_shape(const MlpModel& a, const MlpModel& b);
bool bitwise_equal(const MlpModel& a, const MlpModel& b);

void save_checkpoint(const MlpModel& model, const std::string& path);
MlpModel load_checkpoint(const std::string& path);

} // namespace fedrda
