#pragma once
// Independent long-double evaluations of the distance formulas used to
// cross-check the library versions, plus a tiny deterministic generator for
// random symmetric distance matrices.
#include <cstddef>
#include <cstdint>
#include <cmath>
#include <vector>

namespace stat_oracles {

inline long double cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
    long double dot = 0, nu = 0, nv = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += (long double)u[i] * v[i];
        nu += (long double)u[i] * u[i];
        nv += (long double)v[i] * v[i];
    }
    return 1.0L - dot / (sqrtl(nu) * sqrtl(nv));
}

inline long double pearson_distance(const std::vector<double>& x, const std::vector<double>& y) {
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= x.size(); my /= y.size();
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        long double a = x[i] - mx, b = y[i] - my;
        sxy += a * b; sxx += a * a; syy += b * b;
    }
    return 1.0L - sxy / (sqrtl(sxx) * sqrtl(syy));
}

// splitmix64; a self-contained stream so oracle-side randomness never depends
// on the library under test
struct Sm64 {
    uint64_t s;
    explicit Sm64(uint64_t seed) : s(seed) {}
    uint64_t next() {
        s += 0x9e3779b97f4a7c15ULL;
        uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

// random symmetric matrix, zero diagonal, entries U(lo,hi)
inline std::vector<double> random_sym_matrix(std::size_t n, double lo, double hi, uint64_t seed) {
    Sm64 g(seed);
    std::vector<double> m(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = g.uniform(lo, hi);
            m[i * n + j] = m[j * n + i] = v;
        }
    return m;
}

} // namespace stat_oracles
