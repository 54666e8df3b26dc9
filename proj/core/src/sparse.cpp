#include "kadapt/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "kadapt/errors.hpp"

namespace kadapt {

CsrMatrix::CsrMatrix(int rows, int cols, std::vector<std::int64_t> row_ptr,
                     std::vector<std::int32_t> col_idx, std::vector<double> vals)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)), vals_(std::move(vals)) {
    if (rows_ < 0 || cols_ < 0 || row_ptr_.size() != static_cast<size_t>(rows_) + 1 ||
        col_idx_.size() != vals_.size() ||
        row_ptr_.back() != static_cast<std::int64_t>(vals_.size())) {
        throw InvalidInstance("malformed CSR arrays");
    }
    for (int r = 0; r < rows_; ++r) {
        if (row_ptr_[r] > row_ptr_[r + 1]) throw InvalidInstance("CSR row_ptr not monotone");
        for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            if (col_idx_[k] < 0 || col_idx_[k] >= cols_)
                throw InvalidInstance("CSR column index out of range");
        }
    }
}

CsrMatrix CsrMatrix::from_triplets(int rows, int cols,
                                   std::vector<std::tuple<int, int, double>> triplets) {
    std::sort(triplets.begin(), triplets.end());
    std::vector<std::int64_t> row_ptr(rows + 1, 0);
    std::vector<std::int32_t> col_idx;
    std::vector<double> vals;
    col_idx.reserve(triplets.size());
    vals.reserve(triplets.size());
    for (size_t i = 0; i < triplets.size();) {
        auto [r, c, v] = triplets[i];
        size_t j = i + 1;
        while (j < triplets.size() && std::get<0>(triplets[j]) == r &&
               std::get<1>(triplets[j]) == c) {
            v += std::get<2>(triplets[j]);
            ++j;
        }
        if (r < 0 || r >= rows || c < 0 || c >= cols)
            throw InvalidInstance("triplet index out of range");
        if (v != 0.0) {
            row_ptr[r + 1]++;
            col_idx.push_back(static_cast<std::int32_t>(c));
            vals.push_back(v);
        }
        i = j;
    }
    for (int r = 0; r < rows; ++r) row_ptr[r + 1] += row_ptr[r];
    return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col_idx), std::move(vals));
}

CsrMatrix CsrMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
    const int rows = static_cast<int>(dense.size());
    const int cols = rows ? static_cast<int>(dense[0].size()) : 0;
    std::vector<std::tuple<int, int, double>> trip;
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(dense[r].size()) != cols)
            throw InvalidInstance("ragged dense matrix");
        for (int c = 0; c < cols; ++c)
            if (dense[r][c] != 0.0) trip.emplace_back(r, c, dense[r][c]);
    }
    return from_triplets(rows, cols, std::move(trip));
}

std::span<const std::int32_t> CsrMatrix::row_cols(int r) const {
    return {col_idx_.data() + row_ptr_[r], static_cast<size_t>(row_ptr_[r + 1] - row_ptr_[r])};
}

std::span<const double> CsrMatrix::row_vals(int r) const {
    return {vals_.data() + row_ptr_[r], static_cast<size_t>(row_ptr_[r + 1] - row_ptr_[r])};
}

void CsrMatrix::multiply(std::span<const double> x, std::vector<double>& y) const {
    y.assign(rows_, 0.0);
    for (int r = 0; r < rows_; ++r) {
        double acc = 0.0;
        for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            acc += vals_[k] * x[col_idx_[k]];
        y[r] = acc;
    }
}

double CsrMatrix::row_dot(int r, std::span<const double> x) const {
    double acc = 0.0;
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        acc += vals_[k] * x[col_idx_[k]];
    return acc;
}

double CsrMatrix::at(int r, int c) const {
    for (std::int64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
        if (col_idx_[k] == c) return vals_[k];
    return 0.0;
}

bool CsrMatrix::all_nonnegative() const {
    return std::all_of(vals_.begin(), vals_.end(), [](double v) { return v >= 0.0; });
}

double CsrMatrix::frobenius_distance(const CsrMatrix& a, const CsrMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidInstance("frobenius_distance: shape mismatch");
    double acc = 0.0;
    for (int r = 0; r < a.rows(); ++r) {
        auto ac = a.row_cols(r), bc = b.row_cols(r);
        auto av = a.row_vals(r), bv = b.row_vals(r);
        size_t i = 0, j = 0;
        while (i < ac.size() || j < bc.size()) {
            double d;
            if (j >= bc.size() || (i < ac.size() && ac[i] < bc[j])) {
                d = av[i++];
            } else if (i >= ac.size() || bc[j] < ac[i]) {
                d = -bv[j++];
            } else {
                d = av[i++] - bv[j++];
            }
            acc += d * d;
        }
    }
    return std::sqrt(acc);
}

}  // namespace kadapt
