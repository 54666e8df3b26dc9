#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace kadapt {

/// Compressed sparse row matrix with nonnegative entries, used for
/// dose-influence matrices (rows = voxels, cols = beamlets).
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(int rows, int cols, std::vector<std::int64_t> row_ptr,
              std::vector<std::int32_t> col_idx, std::vector<double> vals);

    // Triplets need not be sorted; duplicates are summed.
    static CsrMatrix from_triplets(int rows, int cols,
                                   std::vector<std::tuple<int, int, double>> triplets);
    static CsrMatrix from_dense(const std::vector<std::vector<double>>& dense);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    std::int64_t nnz() const { return static_cast<std::int64_t>(vals_.size()); }

    const std::vector<std::int64_t>& row_ptr() const { return row_ptr_; }
    const std::vector<std::int32_t>& col_idx() const { return col_idx_; }
    const std::vector<double>& vals() const { return vals_; }

    std::span<const std::int32_t> row_cols(int r) const;
    std::span<const double> row_vals(int r) const;

    /// y = A x, y resized to rows().
    void multiply(std::span<const double> x, std::vector<double>& y) const;

    /// Dot product of row r with x.
    double row_dot(int r, std::span<const double> x) const;

    double at(int r, int c) const;

    bool all_nonnegative() const;

    /// Frobenius (elementwise L2) distance ||a - b||.
    static double frobenius_distance(const CsrMatrix& a, const CsrMatrix& b);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::int64_t> row_ptr_{0};
    std::vector<std::int32_t> col_idx_;
    std::vector<double> vals_;
};

}  // namespace kadapt
