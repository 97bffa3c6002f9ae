#include "fedrda/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "fedrda/rng.hpp"

namespace fedrda {

size_t MlpModel::parameter_count() const {
    size_t n = 0;
    for (const auto& w : weights) n += w.values.size();
    for (const auto& b : biases) n += b.size();
    return n;
}

MlpModel init_mlp(const std::vector<int>& layer_dims, uint64_t seed) {
    if (layer_dims.size() < 2) throw ArgumentError("init_mlp: need input and output dims");
    for (int d : layer_dims)
        if (d < 1) throw ArgumentError("init_mlp: non-positive layer dim");
    Rng rng(seed);
    MlpModel m;
    m.layer_dims = layer_dims;
    for (size_t i = 0; i + 1 < layer_dims.size(); ++i) {
        double lim = 1.0 / std::sqrt(static_cast<double>(layer_dims[i]));
        DenseMatrix w(layer_dims[i + 1], layer_dims[i]);
        for (auto& v : w.values) v = rng.uniform(-lim, lim);
        std::vector<double> b(layer_dims[i + 1]);
        for (auto& v : b) v = rng.uniform(-lim, lim);
        m.weights.push_back(std::move(w));
        m.biases.push_back(std::move(b));
    }
    return m;
}

namespace {

void softmax_rows(DenseMatrix& z) {
    for (size_t r = 0; r < z.rows; ++r) {
        double* row = z.row(r);
        double mx = row[0];
        for (size_t c = 1; c < z.cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (size_t c = 0; c < z.cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (size_t c = 0; c < z.cols; ++c) row[c] /= sum;
    }
}

void tanh_inplace(DenseMatrix& a) {
    for (auto& v : a.values) v = std::tanh(v);
}

void check_input(const MlpModel& model, const DenseMatrix& inputs) {
    if (inputs.cols != static_cast<size_t>(model.input_dim()))
        throw ShapeError("forward: input dim mismatch");
}

} // namespace

DenseMatrix forward_logits(const MlpModel& model, const DenseMatrix& inputs) {
    check_input(model, inputs);
    DenseMatrix a = inputs;
    DenseMatrix next;
    for (size_t i = 0; i + 1 < model.weights.size(); ++i) {
        affine(a, model.weights[i], model.biases[i], next);
        tanh_inplace(next);
        a = std::move(next);
    }
    affine(a, model.weights.back(), model.biases.back(), next);
    return next;
}

DenseMatrix forward(const MlpModel& model, const DenseMatrix& inputs) {
    DenseMatrix z = forward_logits(model, inputs);
    softmax_rows(z);
    return z;
}

double cross_entropy(const DenseMatrix& probabilities, const std::vector<int>& labels) {
    if (probabilities.rows != labels.size())
        throw ArgumentError("cross_entropy: batch size mismatch");
    if (probabilities.rows == 0) throw ArgumentError("cross_entropy: empty batch");
    for (size_t r = 0; r < probabilities.rows; ++r) {
        double sum = 0.0;
        for (size_t c = 0; c < probabilities.cols; ++c) sum += probabilities(r, c);
        if (std::abs(sum - 1.0) > 1e-6)
            throw ArgumentError("cross_entropy: row is not a distribution");
    }
    double loss = 0.0;
    for (size_t r = 0; r < probabilities.rows; ++r) {
        int y = labels[r];
        if (y < 0 || static_cast<size_t>(y) >= probabilities.cols)
            throw ArgumentError("cross_entropy: label out of range");
        loss -= std::log(std::max(probabilities(r, static_cast<size_t>(y)), 1e-12));
    }
    return loss / static_cast<double>(probabilities.rows);
}

Gradients gradients(const MlpModel& model, const DenseMatrix& inputs,
                    const std::vector<int>& labels) {
    check_input(model, inputs);
    if (inputs.rows != labels.size()) throw ArgumentError("gradients: batch size mismatch");
    size_t layers = model.weights.size();

    std::vector<DenseMatrix> acts;
    acts.reserve(layers);
    acts.push_back(inputs);
    DenseMatrix next;
    for (size_t i = 0; i + 1 < layers; ++i) {
        affine(acts.back(), model.weights[i], model.biases[i], next);
        tanh_inplace(next);
        acts.push_back(std::move(next));
    }
    DenseMatrix z;
    affine(acts.back(), model.weights.back(), model.biases.back(), z);
    softmax_rows(z);

    size_t n = inputs.rows;
    DenseMatrix delta = std::move(z);
    for (size_t r = 0; r < n; ++r) {
        int y = labels[r];
        if (y < 0 || y >= model.output_dim()) throw ArgumentError("gradients: label out of range");
        delta(r, static_cast<size_t>(y)) -= 1.0;
    }
    for (auto& v : delta.values) v /= static_cast<double>(n);

    Gradients g;
    g.weights.resize(layers);
    g.biases.resize(layers);
    for (size_t i = layers; i-- > 0;) {
        at_b(delta, acts[i], g.weights[i]);
        g.biases[i].assign(delta.cols, 0.0);
        for (size_t r = 0; r < delta.rows; ++r)
            for (size_t c = 0; c < delta.cols; ++c) g.biases[i][c] += delta(r, c);
        if (i > 0) {
            DenseMatrix prev;
            a_b(delta, model.weights[i], prev);
            for (size_t r = 0; r < prev.rows; ++r)
                for (size_t c = 0; c < prev.cols; ++c) {
                    double a = acts[i](r, c);
                    prev(r, c) *= (1.0 - a * a);
                }
            delta = std::move(prev);
        }
    }
    return g;
}

namespace {

// gradient of lambda * ||w - anchor||_2 over the joint parameter vector
void add_anchor_pull(MlpModel& w, const MlpModel& anchor, double lambda, double lr) {
    double norm2 = 0.0;
    for (size_t i = 0; i < w.weights.size(); ++i) {
        for (size_t j = 0; j < w.weights[i].values.size(); ++j) {
            double d = w.weights[i].values[j] - anchor.weights[i].values[j];
            norm2 += d * d;
        }
        for (size_t j = 0; j < w.biases[i].size(); ++j) {
            double d = w.biases[i][j] - anchor.biases[i][j];
            norm2 += d * d;
        }
    }
    double norm = std::sqrt(norm2);
    if (norm < 1e-12) return;
    double scale = lr * lambda / norm;
    for (size_t i = 0; i < w.weights.size(); ++i) {
        for (size_t j = 0; j < w.weights[i].values.size(); ++j)
            w.weights[i].values[j] -= scale * (w.weights[i].values[j] - anchor.weights[i].values[j]);
        for (size_t j = 0; j < w.biases[i].size(); ++j)
            w.biases[i][j] -= scale * (w.biases[i][j] - anchor.biases[i][j]);
    }
}

} // namespace

MlpModel train_local_penalized(const MlpModel& model, const LabeledDataset& data,
                               const TrainConfig& cfg, double lambda, const MlpModel* anchor) {
    if (data.size() == 0) throw ArgumentError("train_local: empty dataset");
    if (cfg.learning_rate <= 0.0) throw ArgumentError("train_local: learning_rate must be positive");
    if (cfg.batch_size < 1) throw ArgumentError("train_local: batch_size must be positive");
    if (cfg.epochs < 0) throw ArgumentError("train_local: negative epochs");
    for (int y : data.labels)
        if (y < 0 || y >= model.output_dim()) throw ArgumentError("train_local: label out of range");
    if (lambda > 0.0 && anchor && !same_shape(model, *anchor))
        throw ShapeError("train_local: anchor shape mismatch");

    MlpModel w = model;
    size_t n = data.size();
    Rng rng(cfg.seed);
    DenseMatrix bx;
    std::vector<int> by;
    for (int e = 0; e < cfg.epochs; ++e) {
        auto order = rng.permutation(n);
        for (size_t s = 0; s < n; s += cfg.batch_size) {
            size_t bs = std::min(static_cast<size_t>(cfg.batch_size), n - s);
            bx = DenseMatrix(bs, data.dim());
            by.resize(bs);
            for (size_t r = 0; r < bs; ++r) {
                const double* src = data.features.row(order[s + r]);
                std::copy(src, src + data.dim(), bx.row(r));
                by[r] = data.labels[order[s + r]];
            }
            Gradients g = gradients(w, bx, by);
            for (size_t i = 0; i < w.weights.size(); ++i) {
                for (size_t j = 0; j < w.weights[i].values.size(); ++j)
                    w.weights[i].values[j] -= cfg.learning_rate * g.weights[i].values[j];
                for (size_t j = 0; j < w.biases[i].size(); ++j)
                    w.biases[i][j] -= cfg.learning_rate * g.biases[i][j];
            }
            if (lambda > 0.0 && anchor) add_anchor_pull(w, *anchor, lambda, cfg.learning_rate);
        }
    }
    return w;
}

MlpModel train_local(const MlpModel& model, const LabeledDataset& data, const TrainConfig& cfg) {
    return train_local_penalized(model, data, cfg, 0.0, nullptr);
}

bool same_shape(const MlpModel& a, const MlpModel& b) {
    return a.layer_dims == b.layer_dims;
}

bool bitwise_equal(const MlpModel& a, const MlpModel& b) {
    if (!same_shape(a, b)) return false;
    for (size_t i = 0; i < a.weights.size(); ++i) {
        if (std::memcmp(a.weights[i].values.data(), b.weights[i].values.data(),
                        a.weights[i].values.size() * sizeof(double)) != 0)
            return false;
        if (std::memcmp(a.biases[i].data(), b.biases[i].data(),
                        a.biases[i].size() * sizeof(double)) != 0)
            return false;
    }
    return true;
}

void save_checkpoint(const MlpModel& model, const std::string& path) {
    nlohmann::json j;
    j["layer_dims"] = model.layer_dims;
    for (const auto& w : model.weights) j["weights"].push_back(w.values);
    for (const auto& b : model.biases) j["biases"].push_back(b);
    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot open for writing: " + path);
    f << j.dump(2) << '\n';
    if (!f) throw RuntimeFailure("write failed: " + path);
}

MlpModel load_checkpoint(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open: " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad checkpoint JSON: ") + e.what());
    }
    MlpModel m;
    try {
        m.layer_dims = j.at("layer_dims").get<std::vector<int>>();
        auto ws = j.at("weights");
        auto bs = j.at("biases");
        if (m.layer_dims.size() < 2 || ws.size() != m.layer_dims.size() - 1 ||
            bs.size() != ws.size())
            throw FormatError("checkpoint layer structure mismatch");
        for (size_t i = 0; i + 1 < m.layer_dims.size(); ++i) {
            DenseMatrix w(m.layer_dims[i + 1], m.layer_dims[i]);
            auto vals = ws[i].get<std::vector<double>>();
            if (vals.size() != w.values.size()) throw FormatError("checkpoint weight size mismatch");
            w.values = std::move(vals);
            m.weights.push_back(std::move(w));
            auto bias = bs[i].get<std::vector<double>>();
            if (bias.size() != static_cast<size_t>(m.layer_dims[i + 1]))
                throw FormatError("checkpoint bias size mismatch");
            m.biases.push_back(std::move(bias));
        }
    } catch (const FormatError&) {
        throw;
    } catch (const std::exception& e) {
        throw FormatError(std::string("bad checkpoint contents: ") + e.what());
    }
    return m;
}

} // namespace fedrda
