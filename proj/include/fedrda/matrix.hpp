#pragma once
#include <cstddef>
#include <string>
#include <vector>

#include "fedrda/errors.hpp"

namespace fedrda {

// Row-major dense matrix of doubles. Carrier for layer weights, stimulus
// batches, RDMs and client distance matrices.
struct DenseMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> values;

    DenseMatrix() = default;
    DenseMatrix(size_t r, size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

    double& operator()(size_t r, size_t c) { return values[r * cols + c]; }
    double operator()(size_t r, size_t c) const { return values[r * cols + c]; }

    double* row(size_t r) { return values.data() + r * cols; }
    const double* row(size_t r) const { return values.data() + r * cols; }

    bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

bool all_finite(const DenseMatrix& m);
void require_finite(const DenseMatrix& m, const std::string& what);

// out = x * w^T + bias broadcast per row; x is n-by-in, w is out_dim-by-in
void affine(const DenseMatrix& x, const DenseMatrix& w, const std::vector<double>& bias,
            DenseMatrix& out);

// out = a^T * b with a n-by-p and b n-by-q, giving p-by-q
void at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// out = a * b with a n-by-p and b p-by-q
void a_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out);

// headerless square/rectangular CSV with round-trip decimal formatting
void save_matrix_csv(const DenseMatrix& m, const std::string& path);
DenseMatrix load_matrix_csv(const std::string& path);

std::string format_double(double v);

} // namespace fedrda
