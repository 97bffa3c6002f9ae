#include "fedrda/representation.hpp"

#include <cmath>
#include <exception>
#include <iostream>
#include <string>

#include "fedrda/rng.hpp"

namespace fedrda {

StimulusSet sample_stimuli(const LabeledDataset& test, int per_class, uint64_t seed) {
    if (per_class < 1) throw ArgumentError("sample_stimuli: per_class must be positive");
    Rng rng(seed);
    StimulusSet s;
    s.per_class = per_class;
    s.class_count = test.class_count;
    s.samples = DenseMatrix(static_cast<size_t>(test.class_count) * per_class, test.dim());
    s.source_labels.reserve(s.samples.rows);
    size_t out = 0;
    for (int c = 0; c < test.class_count; ++c) {
        std::vector<size_t> cidx;
        for (size_t i = 0; i < test.size(); ++i)
            if (test.labels[i] == c) cidx.push_back(i);
        if (cidx.size() < static_cast<size_t>(per_class))
            throw ArgumentError("sample_stimuli: class " + std::to_string(c) +
                                " has fewer than per_class samples");
        rng.shuffle(cidx);
        for (int t = 0; t < per_class; ++t, ++out) {
            const double* src = test.features.row(cidx[static_cast<size_t>(t)]);
            std::copy(src, src + test.dim(), s.samples.row(out));
            s.source_labels.push_back(c);
        }
    }
    return s;
}

double cosine_distance(const double* u, const double* v, size_t n) {
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (size_t i = 0; i < n; ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    nu = std::sqrt(nu);
    nv = std::sqrt(nv);
    if (nu <= 1e-12 || nv <= 1e-12)
        throw DegenerateVectorError("cosine_distance: near-zero norm");
    double d = 1.0 - dot / (nu * nv);
    if (d < 0.0) d = 0.0;
    if (d > 2.0) d = 2.0;
    return d;
}

double cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size()) throw ShapeError("cosine_distance: length mismatch");
    if (u.empty()) throw ArgumentError("cosine_distance: empty vectors");
    return cosine_distance(u.data(), v.data(), u.size());
}

namespace {

Rdm rdm_from_outputs(const DenseMatrix& v) {
    size_t n = v.rows;
    std::vector<double> norms(n);
    for (size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* row = v.row(i);
        for (size_t c = 0; c < v.cols; ++c) s += row[c] * row[c];
        norms[i] = std::sqrt(s);
        if (norms[i] <= 1e-12)
            throw DegenerateVectorError("extract_rdm: zero-norm output vector");
    }
    Rdm r;
    r.mat = DenseMatrix(n, n);
    for (size_t i = 0; i < n; ++i) {
        const double* vi = v.row(i);
        for (size_t j = i + 1; j < n; ++j) {
            const double* vj = v.row(j);
            double dot = 0.0;
            for (size_t c = 0; c < v.cols; ++c) dot += vi[c] * vj[c];
            double d = 1.0 - dot / (norms[i] * norms[j]);
            if (d < 0.0) d = 0.0;
            if (d > 2.0) d = 2.0;
            r.mat(i, j) = d;
            r.mat(j, i) = d;
        }
    }
    return r;
}

double pearson_core(const double* x, const double* y, size_t n, bool* degenerate) {
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double a = x[i] - mx;
        double b = y[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx <= 1e-18 || syy <= 1e-18) {
        if (degenerate) *degenerate = true;
        return 2.0;
    }
    double d = 1.0 - sxy / (std::sqrt(sxx) * std::sqrt(syy));
    if (d < 0.0) d = 0.0;
    if (d > 2.0) d = 2.0;
    return d;
}

bool constant_obs(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        double d = x - mean;
        ss += d * d;
    }
    return ss <= 1e-18;
}

ClientDistanceMatrix distance_matrix_impl(const std::vector<RdmObservations>& obs, bool parallel) {
    if (obs.size() < 2) throw ArgumentError("client_distance_matrix: need at least 2 clients");
    size_t n = obs.front().vec.size();
    if (n < 2) throw ArgumentError("client_distance_matrix: observations too short");
    for (const auto& o : obs)
        if (o.vec.size() != n) throw ShapeError("client_distance_matrix: length mismatch");

    size_t N = obs.size();
    std::vector<char> degen(N, 0);
    for (size_t i = 0; i < N; ++i) degen[i] = constant_obs(obs[i].vec) ? 1 : 0;
    for (size_t i = 0; i < N; ++i)
        if (degen[i])
            std::clog << "[warn] client " << i
                      << " has a constant RDM; assigning maximal distance\n";

    ClientDistanceMatrix m;
    m.mat = DenseMatrix(N, N);
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (size_t i = 0; i < N; ++i) {
        for (size_t j = i + 1; j < N; ++j) {
            double d;
            if (degen[i] || degen[j]) {
                d = 2.0;
            } else {
                d = pearson_core(obs[i].vec.data(), obs[j].vec.data(), n, nullptr);
            }
            m.mat(i, j) = d;
            m.mat(j, i) = d;
        }
    }
    (void)parallel;
    return m;
}

} // namespace

Rdm extract_rdm(const MlpModel& model, const StimulusSet& stimuli, OutputKind kind) {
    if (stimuli.samples.cols != static_cast<size_t>(model.input_dim()))
        throw ShapeError("extract_rdm: stimulus dim mismatch");
    DenseMatrix v = kind == OutputKind::softmax ? forward(model, stimuli.samples)
                                                : forward_logits(model, stimuli.samples);
    return rdm_from_outputs(v);
}

RdmObservations flatten_upper(const Rdm& rdm) {
    if (rdm.mat.rows != rdm.mat.cols) throw ShapeError("flatten_upper: not square");
    RdmObservations o;
    size_t n = rdm.mat.rows;
    o.vec.reserve(n * (n - 1) / 2);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j) o.vec.push_back(rdm.mat(i, j));
    return o;
}

double pearson_distance(const RdmObservations& a, const RdmObservations& b) {
    if (a.vec.size() != b.vec.size()) throw ShapeError("pearson_distance: length mismatch");
    if (a.vec.size() < 2) throw ArgumentError("pearson_distance: need at least 2 observations");
    bool degenerate = false;
    double d = pearson_core(a.vec.data(), b.vec.data(), a.vec.size(), &degenerate);
    if (degenerate)
        throw DegenerateVectorError("pearson_distance: constant observations");
    return d;
}

ClientDistanceMatrix client_distance_matrix(const std::vector<RdmObservations>& obs) {
    return distance_matrix_impl(obs, true);
}

ClientDistanceMatrix client_distance_matrix(const std::vector<Rdm>& rdms) {
    std::vector<RdmObservations> obs;
    obs.reserve(rdms.size());
    for (const auto& r : rdms) obs.push_back(flatten_upper(r));
    return distance_matrix_impl(obs, true);
}

namespace {

std::vector<RdmObservations> extract_observations_impl(const std::vector<const MlpModel*>& models,
                                                       const StimulusSet& stimuli, OutputKind kind,
                                                       bool parallel) {
    std::vector<RdmObservations> obs(models.size());
    std::exception_ptr err;
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic) if (parallel)
#endif
    for (size_t i = 0; i < models.size(); ++i) {
        try {
            obs[i] = flatten_upper(extract_rdm(*models[i], stimuli, kind));
        } catch (...) {
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp critical
#endif
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    (void)parallel;
    return obs;
}

} // namespace

std::vector<RdmObservations> extract_observations(const std::vector<const MlpModel*>& models,
                                                  const StimulusSet& stimuli, OutputKind kind) {
    return extract_observations_impl(models, stimuli, kind, true);
}

namespace serial {

std::vector<RdmObservations> extract_observations(const std::vector<const MlpModel*>& models,
                                                  const StimulusSet& stimuli, OutputKind kind) {
    return extract_observations_impl(models, stimuli, kind, false);
}

ClientDistanceMatrix client_distance_matrix(const std::vector<RdmObservations>& obs) {
    return distance_matrix_impl(obs, false);
}

} // namespace serial

} // namespace fedrda
