#pragma once
#include <cstddef>
#include <vector>

#include "fedrda/representation.hpp"

namespace fedrda {

// lrd cap applied when a reachability sum degenerates to zero
inline constexpr double kLrdCap = 1e12;

struct LofScores {
    std::vector<double> scores;
    int k = 0;
};

// smallest distance with at least k others at or inside it; ties counted
double k_distance(const ClientDistanceMatrix& dist, size_t p, int k);

// every q != p with d(p,q) <= k-distance(p); may hold more than k members
std::vector<size_t> k_neighborhood(const ClientDistanceMatrix& dist, size_t p, int k);

double reach_dist(const ClientDistanceMatrix& dist, size_t from, size_t to, int k);

double lrd(const ClientDistanceMatrix& dist, size_t p, int k);

double lof(const ClientDistanceMatrix& dist, size_t p, int k);

LofScores lof_all(const ClientDistanceMatrix& dist, int k);

namespace serial {
LofScores lof_all(const ClientDistanceMatrix& dist, int k);
}

} // namespace fedrda
