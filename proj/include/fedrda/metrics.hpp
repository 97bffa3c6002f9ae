#pragma once
#include <vector>

#include "fedrda/data.hpp"
#include "fedrda/detector.hpp"
#include "fedrda/nn.hpp"

namespace fedrda {

struct DetectionMetrics {
    int tp = 0;
    int fp = 0;
    int tn = 0;
    int fn = 0;
    double fpr = 0.0;
    double fnr = 0.0;
    double f1 = 0.0;
};

// malicious is the positive class; F1 of the empty case (no attackers, none
// flagged) is defined as 1
DetectionMetrics detection_metrics(const DecisionVector& dec, const DecisionVector& truth);

// fraction of backdoor samples predicted as the target label
double attack_success_rate(const MlpModel& model, const LabeledDataset& backdoor_set,
                           int target_label);

// argmax accuracy; ties break toward the lowest class index
double accuracy(const MlpModel& model, const LabeledDataset& test);

int argmax_row(const DenseMatrix& m, size_t row);

} // namespace fedrda
