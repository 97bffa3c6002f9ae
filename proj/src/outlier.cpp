#include "fedrda/outlier.hpp"

#include <algorithm>

namespace fedrda {

namespace {

void check_pk(const ClientDistanceMatrix& dist, size_t p, int k) {
    size_t n = dist.mat.rows;
    if (dist.mat.cols != n) throw ShapeError("lof: distance matrix not square");
    if (p >= n) throw ArgumentError("lof: point index out of range");
    if (k < 1 || static_cast<size_t>(k) > n - 1) throw ArgumentError("lof: k out of range");
}

double kdist_of(const ClientDistanceMatrix& dist, size_t p, int k, std::vector<double>& scratch) {
    size_t n = dist.mat.rows;
    scratch.clear();
    for (size_t q = 0; q < n; ++q)
        if (q != p) scratch.push_back(dist.mat(p, q));
    std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
    return scratch[static_cast<size_t>(k) - 1];
}

} // namespace

double k_distance(const ClientDistanceMatrix& dist, size_t p, int k) {
    check_pk(dist, p, k);
    std::vector<double> scratch;
    return kdist_of(dist, p, k, scratch);
}

std::vector<size_t> k_neighborhood(const ClientDistanceMatrix& dist, size_t p, int k) {
    double kd = k_distance(dist, p, k);
    std::vector<size_t> nb;
    for (size_t q = 0; q < dist.mat.rows; ++q)
        if (q != p && dist.mat(p, q) <= kd) nb.push_back(q);
    return nb;
}

double reach_dist(const ClientDistanceMatrix& dist, size_t from, size_t to, int k) {
    if (from == to) throw ArgumentError("reach_dist: from and to must differ");
    check_pk(dist, from, k);
    check_pk(dist, to, k);
    return std::max(k_distance(dist, to, k), dist.mat(from, to));
}

double lrd(const ClientDistanceMatrix& dist, size_t p, int k) {
    check_pk(dist, p, k);
    auto nb = k_neighborhood(dist, p, k);
    std::vector<double> scratch;
    double sum = 0.0;
    for (size_t q : nb) sum += std::max(kdist_of(dist, q, k, scratch), dist.mat(p, q));
    if (sum <= 0.0) return kLrdCap;
    return static_cast<double>(nb.size()) / sum;
}

double lof(const ClientDistanceMatrix& dist, size_t p, int k) {
    check_pk(dist, p, k);
    auto nb = k_neighborhood(dist, p, k);
    double own = lrd(dist, p, k);
    double sum = 0.0;
    for (size_t q : nb) sum += lrd(dist, q, k);
    return sum / (static_cast<double>(nb.size()) * own);
}

namespace {

LofScores lof_all_impl(const ClientDistanceMatrix& dist, int k, bool parallel) {
    size_t n = dist.mat.rows;
    if (dist.mat.cols != n) throw ShapeError("lof_all: distance matrix not square");
    if (n < 3) throw TooFewClientsError("lof_all: need at least 3 clients");
    if (k < 1 || static_cast<size_t>(k) > n - 1) throw ArgumentError("lof_all: k out of range");

    std::vector<double> kd(n);
    std::vector<std::vector<size_t>> nb(n);
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (size_t p = 0; p < n; ++p) {
        std::vector<double> scratch;
        kd[p] = kdist_of(dist, p, k, scratch);
        for (size_t q = 0; q < n; ++q)
            if (q != p && dist.mat(p, q) <= kd[p]) nb[p].push_back(q);
    }

    std::vector<double> dens(n);
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (size_t p = 0; p < n; ++p) {
        double sum = 0.0;
        for (size_t q : nb[p]) sum += std::max(kd[q], dist.mat(p, q));
        dens[p] = sum <= 0.0 ? kLrdCap : static_cast<double>(nb[p].size()) / sum;
    }

    LofScores out;
    out.k = k;
    out.scores.resize(n);
#ifdef FEDRDA_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (size_t p = 0; p < n; ++p) {
        double sum = 0.0;
        for (size_t q : nb[p]) sum += dens[q];
        out.scores[p] = sum / (static_cast<double>(nb[p].size()) * dens[p]);
    }
    (void)parallel;
    return out;
}

} // namespace

LofScores lof_all(const ClientDistanceMatrix& dist, int k) {
    return lof_all_impl(dist, k, true);
}

namespace serial {
LofScores lof_all(const ClientDistanceMatrix& dist, int k) {
    return lof_all_impl(dist, k, false);
}
} // namespace serial

} // namespace fedrda
