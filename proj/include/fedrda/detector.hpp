#pragma once
#include <string>
#include <vector>

#include "fedrda/outlier.hpp"
#include "fedrda/representation.hpp"

namespace fedrda {

enum class DetectMode { basic, refined };

struct DetectorConfig {
    double delta = 1.5; // LOF threshold
    double epsilon_d = 0.0; // distance bound guarding the refinement stage
    DetectMode mode = DetectMode::refined;
    int min_remaining = 3;
    // how many recent all-honest rounds the round loop keeps for calibration;
    // 0 keeps every honest round seen so far
    int calibration_window = 3;
};

struct DecisionVector {
    std::vector<int> dec; // 1 = malicious

    size_t size() const { return dec.size(); }
    int flagged() const;
    std::string to_string() const;
};

struct DetectionTrace {
    struct Sweep {
        int k = 0;
        std::vector<double> scores; // in the order of the surviving clients
        std::vector<size_t> flagged; // original client indices
    };
    std::vector<Sweep> sweeps;
    bool refinement_fired = false;
    double delta_re = 0.0;
    std::vector<size_t> candidates; // original client indices
    double cand_dist = 0.0;

    std::string to_json() const;
};

// repeated LOF sweeps at a fixed threshold; every sweep uses k = floor(l/2)
// over the l survivors and removes all scores above delta
DecisionVector detect_iterative(const ClientDistanceMatrix& dist, double delta,
                                int min_remaining = 3, DetectionTrace* trace = nullptr,
                                bool parallel = true);

// one sweep at cfg.delta, then distance-based candidate identification and,
// when the candidates sit above epsilon_d, an iterative sweep at the refined
// threshold taken from the candidates' own LOF scores
DecisionVector detect_refined(const ClientDistanceMatrix& dist, const DetectorConfig& cfg,
                              DetectionTrace* trace = nullptr, bool parallel = true);

DecisionVector detect(const ClientDistanceMatrix& dist, const DetectorConfig& cfg,
                      DetectionTrace* trace = nullptr, bool parallel = true);

// max over matrices and clients of the mean distance to the other clients
double calibrate_epsilon_d(const std::vector<ClientDistanceMatrix>& history);

} // namespace fedrda
