#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "fedrda/nn.hpp"
#include "fedrda/rng.hpp"

using namespace fedrda;

namespace {

MlpModel zero_model(const std::vector<int>& dims) {
    MlpModel m = init_mlp(dims, 0);
    for (auto& w : m.weights) std::fill(w.values.begin(), w.values.end(), 0.0);
    for (auto& b : m.biases) std::fill(b.begin(), b.end(), 0.0);
    return m;
}

LabeledDataset two_blobs(int per_class, uint64_t seed) {
    // linearly separable 2-d blobs around (0.2, 0.2) and (0.8, 0.8)
    LabeledDataset d;
    d.class_count = 2;
    d.features = DenseMatrix(static_cast<size_t>(2 * per_class), 2);
    Rng rng(seed);
    for (int i = 0; i < 2 * per_class; ++i) {
        int c = i < per_class ? 0 : 1;
        double cx = c == 0 ? 0.2 : 0.8;
        d.features(static_cast<size_t>(i), 0) = cx + 0.05 * rng.normal();
        d.features(static_cast<size_t>(i), 1) = cx + 0.05 * rng.normal();
        d.labels.push_back(c);
    }
    return d;
}

double train_accuracy(const MlpModel& m, const LabeledDataset& d) {
    DenseMatrix p = forward(m, d.features);
    int ok = 0;
    for (size_t i = 0; i < d.size(); ++i) {
        int arg = 0;
        for (int c = 1; c < d.class_count; ++c)
            if (p(i, static_cast<size_t>(c)) > p(i, static_cast<size_t>(arg))) arg = c;
        ok += arg == d.labels[i];
    }
    return ok / static_cast<double>(d.size());
}

} // namespace

TEST_CASE("init shapes and bounds") {
    MlpModel m = init_mlp({4, 3, 2}, 7);
    REQUIRE(m.weights.size() == 2);
    CHECK(m.weights[0].rows == 3);
    CHECK(m.weights[0].cols == 4);
    CHECK(m.weights[1].rows == 2);
    CHECK(m.weights[1].cols == 3);
    CHECK(m.biases[0].size() == 3);
    CHECK(m.biases[1].size() == 2);
    CHECK(m.parameter_count() == 4 * 3 + 3 + 3 * 2 + 2);
    double lim0 = 1.0 / std::sqrt(4.0), lim1 = 1.0 / std::sqrt(3.0);
    for (double v : m.weights[0].values) CHECK(std::fabs(v) <= lim0);
    for (double v : m.weights[1].values) CHECK(std::fabs(v) <= lim1);
    MlpModel again = init_mlp({4, 3, 2}, 7);
    CHECK(bitwise_equal(m, again));
    CHECK_FALSE(bitwise_equal(m, init_mlp({4, 3, 2}, 8)));
    CHECK_THROWS_AS(init_mlp({4}, 1), ArgumentError);
    CHECK_THROWS_AS(init_mlp({4, 0, 2}, 1), ArgumentError);
}

TEST_CASE("forward of zero model is uniform") {
    MlpModel m = zero_model({3, 4, 5});
    DenseMatrix x(2, 3);
    x.values = {0.3, -1.0, 7.0, 0.0, 0.0, 0.0};
    DenseMatrix p = forward(m, x);
    REQUIRE(p.rows == 2);
    REQUIRE(p.cols == 5);
    for (double v : p.values) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("forward single output is one") {
    MlpModel m;
    m.layer_dims = {1, 1};
    m.weights = {DenseMatrix(1, 1)};
    m.weights[0](0, 0) = 1.0;
    m.biases = {{0.0}};
    DenseMatrix x(1, 1);
    x(0, 0) = 3.7;
    CHECK(forward(m, x)(0, 0) == 1.0);
}

TEST_CASE("forward matches softmax formula on a linear model") {
    MlpModel m;
    m.layer_dims = {2, 2};
    m.weights = {DenseMatrix(2, 2)};
    m.weights[0](0, 0) = 1.0;
    m.weights[0](1, 1) = 1.0;
    m.biases = {{0.0, 0.0}};
    DenseMatrix x(1, 2);
    x.values = {2.0, 0.0};
    DenseMatrix p = forward(m, x);
    double e2 = std::exp(2.0);
    CHECK(p(0, 0) == doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-12));
    CHECK(p(0, 1) == doctest::Approx(1.0 / (e2 + 1.0)).epsilon(1e-12));
    CHECK(p(0, 0) == doctest::Approx(0.8808).epsilon(1e-4));
    CHECK(p(0, 1) == doctest::Approx(0.1192).epsilon(1e-4));
}

TEST_CASE("forward rows are distributions and deterministic") {
    MlpModel m = init_mlp({6, 5, 4}, 3);
    DenseMatrix x(7, 6);
    Rng rng(4);
    for (double& v : x.values) v = rng.uniform(-2.0, 2.0);
    DenseMatrix p = forward(m, x);
    for (size_t i = 0; i < p.rows; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < p.cols; ++j) {
            CHECK(p(i, j) > 0.0);
            CHECK(p(i, j) < 1.0);
            s += p(i, j);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
    DenseMatrix p2 = forward(m, x);
    CHECK(std::memcmp(p.values.data(), p2.values.data(), p.values.size() * sizeof(double)) == 0);

    DenseMatrix bad(1, 5);
    CHECK_THROWS_AS(forward(m, bad), ShapeError);
}

TEST_CASE("logits path matches softmax path") {
    MlpModel m = init_mlp({4, 8, 3}, 11);
    DenseMatrix x(3, 4);
    Rng rng(12);
    for (double& v : x.values) v = rng.uniform(0.0, 1.0);
    DenseMatrix z = forward_logits(m, x);
    DenseMatrix p = forward(m, x);
    for (size_t i = 0; i < 3; ++i) {
        double mx = z(i, 0);
        for (size_t j = 1; j < 3; ++j) mx = std::max(mx, z(i, j));
        double denom = 0.0;
        for (size_t j = 0; j < 3; ++j) denom += std::exp(z(i, j) - mx);
        for (size_t j = 0; j < 3; ++j)
            CHECK(p(i, j) == doctest::Approx(std::exp(z(i, j) - mx) / denom).epsilon(1e-12));
    }
}

TEST_CASE("cross entropy reference values") {
    DenseMatrix onehot(2, 3);
    onehot.values = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
    CHECK(cross_entropy(onehot, {0, 1}) == doctest::Approx(0.0).epsilon(1e-9));

    DenseMatrix uniform(4, 10);
    std::fill(uniform.values.begin(), uniform.values.end(), 0.1);
    CHECK(cross_entropy(uniform, {0, 3, 5, 9}) == doctest::Approx(std::log(10.0)).epsilon(1e-12));

    DenseMatrix half(2, 2);
    half.values = {0.5, 0.5, 0.5, 0.5};
    CHECK(cross_entropy(half, {0, 1}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    // zero probability at the true label is clamped, never NaN
    DenseMatrix zero_p(1, 2);
    zero_p.values = {0.0, 1.0};
    double v = cross_entropy(zero_p, {0});
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(-std::log(1e-12)).epsilon(1e-9));

    DenseMatrix not_dist(1, 2);
    not_dist.values = {0.9, 0.6};
    CHECK_THROWS_AS(cross_entropy(not_dist, {0}), ArgumentError);
    CHECK_THROWS_AS(cross_entropy(half, {0, 2}), ArgumentError);
}

TEST_CASE("gradient check on small random models") {
    for (uint64_t seed = 1; seed <= 3; ++seed) {
        std::vector<int> dims = seed == 1 ? std::vector<int>{3, 2}
                                          : seed == 2 ? std::vector<int>{4, 5, 3}
                                                      : std::vector<int>{5, 8, 8, 4};
        MlpModel m = init_mlp(dims, seed);
        int n = 6;
        DenseMatrix x(static_cast<size_t>(n), static_cast<size_t>(dims.front()));
        std::vector<int> y;
        Rng rng(seed + 100);
        for (double& v : x.values) v = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < n; ++i) y.push_back(static_cast<int>(rng.below(dims.back())));

        Gradients g = gradients(m, x, y);
        const double h = 1e-5;
        auto loss_at = [&](MlpModel& mm) { return cross_entropy(forward(mm, x), y); };
        for (size_t layer = 0; layer < m.weights.size(); ++layer) {
            for (size_t idx = 0; idx < m.weights[layer].values.size(); idx += 7) {
                MlpModel mm = m;
                double orig = mm.weights[layer].values[idx];
                mm.weights[layer].values[idx] = orig + h;
                double up = loss_at(mm);
                mm.weights[layer].values[idx] = orig - h;
                double dn = loss_at(mm);
                double fd = (up - dn) / (2.0 * h);
                double an = g.weights[layer].values[idx];
                double denom = std::max({std::fabs(fd), std::fabs(an), 1e-8});
                CHECK(std::fabs(fd - an) / denom < 1e-4);
            }
            for (size_t idx = 0; idx < m.biases[layer].size(); idx += 3) {
                MlpModel mm = m;
                double orig = mm.biases[layer][idx];
                mm.biases[layer][idx] = orig + h;
                double up = loss_at(mm);
                mm.biases[layer][idx] = orig - h;
                double dn = loss_at(mm);
                double fd = (up - dn) / (2.0 * h);
                double an = g.biases[layer][idx];
                double denom = std::max({std::fabs(fd), std::fabs(an), 1e-8});
                CHECK(std::fabs(fd - an) / denom < 1e-4);
            }
        }
    }
}

TEST_CASE("training identity, determinism, separable learning") {
    LabeledDataset d = two_blobs(25, 5);
    MlpModel m = init_mlp({2, 4, 2}, 6);

    TrainConfig zero;
    zero.epochs = 0;
    CHECK(bitwise_equal(train_local(m, d, zero), m));

    TrainConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 50;
    cfg.batch_size = 10;
    cfg.seed = 77;
    MlpModel t1 = train_local(m, d, cfg);
    MlpModel t2 = train_local(m, d, cfg);
    CHECK(bitwise_equal(t1, t2));
    CHECK(train_accuracy(t1, d) >= 0.95);

    // loss does not increase after the run on separable data
    CHECK(cross_entropy(forward(t1, d.features), d.labels) <=
          cross_entropy(forward(m, d.features), d.labels) + 1e-6);

    LabeledDataset empty;
    empty.class_count = 2;
    CHECK_THROWS_AS(train_local(m, empty, cfg), ArgumentError);
    LabeledDataset bad = d;
    bad.labels[0] = 9;
    CHECK_THROWS_AS(train_local(m, bad, cfg), ArgumentError);
}

TEST_CASE("full-batch epoch equals one gradient step") {
    LabeledDataset d = two_blobs(10, 9);
    MlpModel m = init_mlp({2, 3, 2}, 10);
    TrainConfig cfg;
    cfg.learning_rate = 0.2;
    cfg.epochs = 1;
    cfg.batch_size = static_cast<int>(d.size());
    cfg.seed = 5;
    MlpModel stepped = train_local(m, d, cfg);

    Gradients g = gradients(m, d.features, d.labels);
    MlpModel manual = m;
    for (size_t l = 0; l < m.weights.size(); ++l) {
        for (size_t i = 0; i < m.weights[l].values.size(); ++i)
            manual.weights[l].values[i] -= cfg.learning_rate * g.weights[l].values[i];
        for (size_t i = 0; i < m.biases[l].size(); ++i)
            manual.biases[l][i] -= cfg.learning_rate * g.biases[l][i];
    }
    for (size_t l = 0; l < m.weights.size(); ++l) {
        for (size_t i = 0; i < m.weights[l].values.size(); ++i)
            CHECK(stepped.weights[l].values[i] ==
                  doctest::Approx(manual.weights[l].values[i]).epsilon(1e-12));
        for (size_t i = 0; i < m.biases[l].size(); ++i)
            CHECK(stepped.biases[l][i] == doctest::Approx(manual.biases[l][i]).epsilon(1e-12));
    }
}

TEST_CASE("anchor pull draws weights toward the anchor") {
    LabeledDataset d = two_blobs(15, 14);
    MlpModel m = init_mlp({2, 4, 2}, 15);
    MlpModel anchor = init_mlp({2, 4, 2}, 16);
    TrainConfig cfg;
    cfg.learning_rate = 0.05;
    cfg.epochs = 3;
    cfg.batch_size = 10;
    cfg.seed = 17;

    MlpModel plain = train_local_penalized(m, d, cfg, 0.0, &anchor);
    CHECK(bitwise_equal(plain, train_local(m, d, cfg)));

    MlpModel pulled = train_local_penalized(m, d, cfg, 5.0, &anchor);
    auto dist_to_anchor = [&](const MlpModel& w) {
        double s = 0.0;
        for (size_t l = 0; l < w.weights.size(); ++l) {
            for (size_t i = 0; i < w.weights[l].values.size(); ++i) {
                double dd = w.weights[l].values[i] - anchor.weights[l].values[i];
                s += dd * dd;
            }
            for (size_t i = 0; i < w.biases[l].size(); ++i) {
                double dd = w.biases[l][i] - anchor.biases[l][i];
                s += dd * dd;
            }
        }
        return std::sqrt(s);
    };
    CHECK(dist_to_anchor(pulled) < dist_to_anchor(plain));
}

TEST_CASE("checkpoint round trips bitwise") {
    MlpModel m = init_mlp({5, 7, 3}, 21);
    save_checkpoint(m, "test_nn_ckpt.json");
    MlpModel back = load_checkpoint("test_nn_ckpt.json");
    CHECK(bitwise_equal(m, back));
    std::remove("test_nn_ckpt.json");

    {
        std::ofstream f("test_nn_bad.json");
        f << "{\"layer_dims\": [2, 3]}";
    }
    CHECK_THROWS_AS(load_checkpoint("test_nn_bad.json"), FormatError);
    {
        std::ofstream f("test_nn_bad.json");
        f << "not json";
    }
    CHECK_THROWS_AS(load_checkpoint("test_nn_bad.json"), FormatError);
    std::remove("test_nn_bad.json");
    CHECK_THROWS_AS(load_checkpoint("test_nn_missing.json"), FormatError);
}
