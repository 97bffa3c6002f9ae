#include "fedrda/matrix.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fedrda {

bool all_finite(const DenseMatrix& m) {
    for (double v : m.values)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_finite(const DenseMatrix& m, const std::string& what) {
    if (!all_finite(m)) throw RuntimeFailure(what + ": non-finite values");
}

void affine(const DenseMatrix& x, const DenseMatrix& w, const std::vector<double>& bias,
            DenseMatrix& out) {
    if (x.cols != w.cols) throw ShapeError("affine: input dim mismatch");
    if (bias.size() != w.rows) throw ShapeError("affine: bias dim mismatch");
    out = DenseMatrix(x.rows, w.rows);
    for (size_t r = 0; r < x.rows; ++r) {
        const double* xr = x.row(r);
        double* orow = out.row(r);
        for (size_t o = 0; o < w.rows; ++o) {
            const double* wr = w.row(o);
            double acc = bias[o];
            for (size_t c = 0; c < x.cols; ++c) acc += xr[c] * wr[c];
            orow[o] = acc;
        }
    }
}

void at_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
    if (a.rows != b.rows) throw ShapeError("at_b: row mismatch");
    out = DenseMatrix(a.cols, b.cols);
    for (size_t n = 0; n < a.rows; ++n) {
        const double* ar = a.row(n);
        const double* br = b.row(n);
        for (size_t p = 0; p < a.cols; ++p) {
            double av = ar[p];
            double* orow = out.row(p);
            for (size_t q = 0; q < b.cols; ++q) orow[q] += av * br[q];
        }
    }
}

void a_b(const DenseMatrix& a, const DenseMatrix& b, DenseMatrix& out) {
    if (a.cols != b.rows) throw ShapeError("a_b: inner dim mismatch");
    out = DenseMatrix(a.rows, b.cols);
    for (size_t r = 0; r < a.rows; ++r) {
        const double* ar = a.row(r);
        double* orow = out.row(r);
        for (size_t k = 0; k < a.cols; ++k) {
            double av = ar[k];
            const double* brow = b.row(k);
            for (size_t c = 0; c < b.cols; ++c) orow[c] += av * brow[c];
        }
    }
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void save_matrix_csv(const DenseMatrix& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw RuntimeFailure("cannot open for writing: " + path);
    for (size_t r = 0; r < m.rows; ++r) {
        for (size_t c = 0; c < m.cols; ++c) {
            if (c) f << ',';
            f << format_double(m(r, c));
        }
        f << '\n';
    }
    if (!f) throw RuntimeFailure("write failed: " + path);
}

DenseMatrix load_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw FormatError("cannot open: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("bad number in " + path + ": " + cell);
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError("ragged rows in " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("empty matrix file: " + path);
    DenseMatrix m(rows.size(), rows.front().size());
    for (size_t r = 0; r < m.rows; ++r)
        for (size_t c = 0; c < m.cols; ++c) m(r, c) = rows[r][c];
    return m;
}

} // namespace fedrda
