#include "fedrda/detector.hpp"

#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace fedrda {

int DecisionVector::flagged() const {
    int n = 0;
    for (int d : dec) n += d;
    return n;
}

std::string DecisionVector::to_string() const {
    std::string s;
    s.reserve(dec.size());
    for (int d : dec) s.push_back(d ? '1' : '0');
    return s;
}

std::string DetectionTrace::to_json() const {
    nlohmann::json j;
    j["iteration"] = nlohmann::json::array();
    for (const auto& s : sweeps) {
        nlohmann::json it;
        it["k"] = s.k;
        it["scores"] = s.scores;
        it["flagged"] = s.flagged;
        j["iteration"].push_back(it);
    }
    j["delta_re"] = refinement_fired ? nlohmann::json(delta_re) : nlohmann::json();
    j["candidates"] = candidates;
    j["cand_dist"] = cand_dist;
    return j.dump(2);
}

namespace {

ClientDistanceMatrix submatrix(const ClientDistanceMatrix& dist,
                               const std::vector<size_t>& keep) {
    ClientDistanceMatrix sub;
    sub.mat = DenseMatrix(keep.size(), keep.size());
    for (size_t a = 0; a < keep.size(); ++a)
        for (size_t b = 0; b < keep.size(); ++b) sub.mat(a, b) = dist.mat(keep[a], keep[b]);
    return sub;
}

void check_square(const ClientDistanceMatrix& dist, int min_remaining) {
    if (dist.mat.rows != dist.mat.cols) throw ShapeError("detect: distance matrix not square");
    if (dist.mat.rows < static_cast<size_t>(min_remaining))
        throw TooFewClientsError("detect: fewer clients than min_remaining");
}

void warn_if_majority(const DecisionVector& dec) {
    if (2 * dec.flagged() > static_cast<int>(dec.size()))
        std::clog << "[warn] detector flagged a majority of clients (" << dec.flagged() << "/"
                  << dec.size() << ")\n";
}

// sweeps at a fixed threshold over progressively shrinking survivor sets;
// appends to dec and returns without un-flagging anyone
LofScores run_lof(const ClientDistanceMatrix& dist, int k, bool parallel) {
    return parallel ? lof_all(dist, k) : serial::lof_all(dist, k);
}

void iterative_sweeps(const ClientDistanceMatrix& dist, double delta, int min_remaining,
                      DecisionVector& dec, std::vector<size_t>& remaining,
                      DetectionTrace* trace, bool parallel) {
    while (remaining.size() >= static_cast<size_t>(min_remaining)) {
        auto sub = submatrix(dist, remaining);
        int k = static_cast<int>(remaining.size() / 2);
        auto scores = run_lof(sub, k, parallel);
        std::vector<size_t> flagged;
        for (size_t i = 0; i < remaining.size(); ++i)
            if (scores.scores[i] > delta) flagged.push_back(remaining[i]);
        if (trace) {
            DetectionTrace::Sweep s;
            s.k = k;
            s.scores = scores.scores;
            s.flagged = flagged;
            trace->sweeps.push_back(std::move(s));
        }
        if (flagged.empty()) break;
        for (size_t f : flagged) dec.dec[f] = 1;
        std::vector<size_t> next;
        for (size_t r : remaining)
            if (!dec.dec[r]) next.push_back(r);
        remaining = std::move(next);
    }
}

} // namespace

DecisionVector detect_iterative(const ClientDistanceMatrix& dist, double delta, int min_remaining,
                                DetectionTrace* trace, bool parallel) {
    check_square(dist, min_remaining);
    size_t n = dist.mat.rows;
    DecisionVector dec;
    dec.dec.assign(n, 0);
    std::vector<size_t> remaining(n);
    std::iota(remaining.begin(), remaining.end(), size_t{0});
    iterative_sweeps(dist, delta, min_remaining, dec, remaining, trace, parallel);
    warn_if_majority(dec);
    return dec;
}

DecisionVector detect_refined(const ClientDistanceMatrix& dist, const DetectorConfig& cfg,
                              DetectionTrace* trace, bool parallel) {
    check_square(dist, cfg.min_remaining);
    size_t n = dist.mat.rows;
    DecisionVector dec;
    dec.dec.assign(n, 0);

    // first pass at the base threshold; these flags always persist
    int k = static_cast<int>(n / 2);
    auto scores = run_lof(dist, k, parallel);
    std::vector<size_t> remaining;
    std::vector<size_t> first_flagged;
    for (size_t i = 0; i < n; ++i) {
        if (scores.scores[i] > cfg.delta) {
            dec.dec[i] = 1;
            first_flagged.push_back(i);
        } else {
            remaining.push_back(i);
        }
    }
    if (trace) {
        DetectionTrace::Sweep s;
        s.k = k;
        s.scores = scores.scores;
        s.flagged = first_flagged;
        trace->sweeps.push_back(std::move(s));
    }
    if (remaining.size() < static_cast<size_t>(cfg.min_remaining)) {
        warn_if_majority(dec);
        return dec;
    }

    // dynamic distance threshold over the survivors
    auto sub = submatrix(dist, remaining);
    size_t l = remaining.size();
    std::vector<double> client_dist(l, 0.0);
    for (size_t i = 0; i < l; ++i) {
        double s = 0.0;
        for (size_t j = 0; j < l; ++j) s += sub.mat(i, j);
        client_dist[i] = s / static_cast<double>(l - 1);
    }
    double delta_d = std::accumulate(client_dist.begin(), client_dist.end(), 0.0) /
                     static_cast<double>(l);
    std::vector<size_t> cands;
    for (size_t i = 0; i < l; ++i)
        if (client_dist[i] > delta_d) cands.push_back(i);
    if (trace)
        for (size_t c : cands) trace->candidates.push_back(remaining[c]);
    if (cands.empty()) {
        warn_if_majority(dec);
        return dec;
    }
    double cand_dist = 0.0;
    for (size_t c : cands) cand_dist += client_dist[c];
    cand_dist /= static_cast<double>(cands.size());
    if (trace) trace->cand_dist = cand_dist;

    if (cand_dist > cfg.epsilon_d) {
        // refined threshold from the candidates' scores on the shrunken matrix
        auto rescore = run_lof(sub, static_cast<int>(l / 2), parallel);
        double delta_re = 0.0;
        for (size_t c : cands) delta_re += rescore.scores[c];
        delta_re /= static_cast<double>(cands.size());
        if (trace) {
            trace->refinement_fired = true;
            trace->delta_re = delta_re;
        }
        iterative_sweeps(dist, delta_re, cfg.min_remaining, dec, remaining, trace, parallel);
    }
    warn_if_majority(dec);
    return dec;
}

DecisionVector detect(const ClientDistanceMatrix& dist, const DetectorConfig& cfg,
                      DetectionTrace* trace, bool parallel) {
    if (cfg.mode == DetectMode::basic)
        return detect_iterative(dist, cfg.delta, cfg.min_remaining, trace, parallel);
    return detect_refined(dist, cfg, trace, parallel);
}

double calibrate_epsilon_d(const std::vector<ClientDistanceMatrix>& history) {
    if (history.empty()) throw ArgumentError("calibrate_epsilon_d: empty history");
    double best = 0.0;
    for (const auto& m : history) {
        size_t n = m.mat.rows;
        if (m.mat.cols != n || n < 2)
            throw ArgumentError("calibrate_epsilon_d: bad matrix in history");
        for (size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (size_t j = 0; j < n; ++j) s += m.mat(i, j);
            best = std::max(best, s / static_cast<double>(n - 1));
        }
    }
    return best;
}

} // namespace fedrda
