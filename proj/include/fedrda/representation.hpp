#pragma once
#include <cstdint>
#include <vector>

#include "fedrda/data.hpp"
#include "fedrda/matrix.hpp"
#include "fedrda/nn.hpp"

namespace fedrda {

enum class OutputKind { softmax, logits };

struct StimulusSet {
    DenseMatrix samples; // (class_count * per_class) x d, blocked by class
    int per_class = 0;
    int class_count = 0;
    std::vector<int> source_labels;

    size_t size() const { return samples.rows; }
};

struct Rdm {
    DenseMatrix mat; // square, symmetric, zero diagonal, entries in [0,2]
};

struct RdmObservations {
    std::vector<double> vec; // strict upper triangle, row-major
};

struct ClientDistanceMatrix {
    DenseMatrix mat; // N x N pairwise Pearson distances
};

// seeded class-balanced draw without replacement from clean test data
StimulusSet sample_stimuli(const LabeledDataset& test, int per_class, uint64_t seed);

double cosine_distance(const double* u, const double* v, size_t n);
double cosine_distance(const std::vector<double>& u, const std::vector<double>& v);

Rdm extract_rdm(const MlpModel& model, const StimulusSet& stimuli,
                OutputKind kind = OutputKind::softmax);

RdmObservations flatten_upper(const Rdm& rdm);

double pearson_distance(const RdmObservations& a, const RdmObservations& b);

// pairwise Pearson distances of flattened RDMs; a client with constant
// observations is assigned distance 2 to everyone instead of failing the round
ClientDistanceMatrix client_distance_matrix(const std::vector<Rdm>& rdms);
ClientDistanceMatrix client_distance_matrix(const std::vector<RdmObservations>& obs);

// flattened RDMs for a whole cohort, one independent extraction per model
std::vector<RdmObservations> extract_observations(const std::vector<const MlpModel*>& models,
                                                  const StimulusSet& stimuli,
                                                  OutputKind kind = OutputKind::softmax);

// single-thread reference kernels, kept for equivalence tests and benchmarks
namespace serial {
std::vector<RdmObservations> extract_observations(const std::vector<const MlpModel*>& models,
                                                  const StimulusSet& stimuli,
                                                  OutputKind kind = OutputKind::softmax);
ClientDistanceMatrix client_distance_matrix(const std::vector<RdmObservations>& obs);
} // namespace serial

} // namespace fedrda
