#include "fedrda/metrics.hpp"

namespace fedrda {

DetectionMetrics detection_metrics(const DecisionVector& dec, const DecisionVector& truth) {
    if (dec.dec.size() != truth.dec.size())
        throw ArgumentError("detection_metrics: length mismatch");
    DetectionMetrics m;
    for (size_t i = 0; i < dec.dec.size(); ++i) {
        bool flagged = dec.dec[i] != 0;
        bool mal = truth.dec[i] != 0;
        if (flagged && mal) ++m.tp;
        else if (flagged && !mal) ++m.fp;
        else if (!flagged && mal) ++m.fn;
        else ++m.tn;
    }
    m.fpr = (m.fp + m.tn) ? static_cast<double>(m.fp) / (m.fp + m.tn) : 0.0;
    m.fnr = (m.fn + m.tp) ? static_cast<double>(m.fn) / (m.fn + m.tp) : 0.0;
    if (m.tp == 0 && m.fp == 0 && m.fn == 0)
        m.f1 = 1.0;
    else
        m.f1 = 2.0 * m.tp / (2.0 * m.tp + m.fp + m.fn);
    return m;
}

int argmax_row(const DenseMatrix& m, size_t row) {
    const double* r = m.row(row);
    int best = 0;
    for (size_t c = 1; c < m.cols; ++c)
        if (r[c] > r[best]) best = static_cast<int>(c);
    return best;
}

double attack_success_rate(const MlpModel& model, const LabeledDataset& backdoor_set,
                           int target_label) {
    if (backdoor_set.size() == 0) throw ArgumentError("attack_success_rate: empty backdoor set");
    DenseMatrix p = forward(model, backdoor_set.features);
    size_t hit = 0;
    for (size_t i = 0; i < p.rows; ++i)
        if (argmax_row(p, i) == target_label) ++hit;
    return static_cast<double>(hit) / static_cast<double>(p.rows);
}

double accuracy(const MlpModel& model, const LabeledDataset& test) {
    if (test.size() == 0) throw ArgumentError("accuracy: empty test set");
    DenseMatrix p = forward(model, test.features);
    size_t hit = 0;
    for (size_t i = 0; i < p.rows; ++i)
        if (argmax_row(p, i) == test.labels[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(p.rows);
}

} // namespace fedrda
