#pragma once

#include <algorithm>
#include <cassert>
#include <memory>
#include <vector>

#include "blm/common.hpp"

namespace blm {

// Compressed-row sparsity shared between matrices assembled on the same
// element connectivity. Column indices are strictly increasing in each row.
struct CsrPattern {
    int rows = 0, cols = 0;
    std::vector<int> row_ptr;   // size rows + 1
    std::vector<int> col_idx;   // size nnz

    int nnz() const { return static_cast<int>(col_idx.size()); }

    // Index of entry (i, j), or -1 if not present.
    int find(int i, int j) const {
        const int* first = col_idx.data() + row_ptr[i];
        const int* last = col_idx.data() + row_ptr[i + 1];
        const int* it = std::lower_bound(first, last, j);
        if (it == last || *it != j) return -1;
        return static_cast<int>(it - col_idx.data());
    }
};

// Accumulates (row, col) pairs, then freezes them into a CsrPattern.
class PatternBuilder {
public:
    PatternBuilder(int rows, int cols) : rows_(rows), cols_(cols), adj_(rows) {}

    void add(int i, int j) { adj_[i].push_back(j); }

    void add_block(const int* row_dofs, int nr, const int* col_dofs, int nc) {
        for (int a = 0; a < nr; ++a)
            for (int b = 0; b < nc; ++b) adj_[row_dofs[a]].push_back(col_dofs[b]);
    }

    std::shared_ptr<const CsrPattern> build() {
        auto pat = std::make_shared<CsrPattern>();
        pat->rows = rows_;
        pat->cols = cols_;
        pat->row_ptr.assign(rows_ + 1, 0);
        for (int i = 0; i < rows_; ++i) {
            auto& row = adj_[i];
            std::sort(row.begin(), row.end());
            row.erase(std::unique(row.begin(), row.end()), row.end());
            pat->row_ptr[i + 1] = pat->row_ptr[i] + static_cast<int>(row.size());
        }
        pat->col_idx.reserve(pat->row_ptr[rows_]);
        for (int i = 0; i < rows_; ++i)
            pat->col_idx.insert(pat->col_idx.end(), adj_[i].begin(), adj_[i].end());
        return pat;
    }

private:
    int rows_, cols_;
    std::vector<std::vector<int>> adj_;
};

struct CsrMatrix {
    std::shared_ptr<const CsrPattern> pattern;
    std::vector<double> val;

    CsrMatrix() = default;
    explicit CsrMatrix(std::shared_ptr<const CsrPattern> pat)
        : pattern(std::move(pat)), val(pattern->nnz(), 0.0) {}

    int rows() const { return pattern->rows; }
    int cols() const { return pattern->cols; }

    void set_zero() { std::fill(val.begin(), val.end(), 0.0); }

    void add(int i, int j, double v) {
        const int k = pattern->find(i, j);
        assert(k >= 0 && "entry outside sparsity pattern");
        val[k] += v;
    }

    double at(int i, int j) const {
        const int k = pattern->find(i, j);
        return k < 0 ? 0.0 : val[k];
    }

    // y = A x
    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(rows(), 0.0);
        const auto& rp = pattern->row_ptr;
        const auto& ci = pattern->col_idx;
        for (int i = 0; i < rows(); ++i) {
            double s = 0.0;
            for (int k = rp[i]; k < rp[i + 1]; ++k) s += val[k] * x[ci[k]];
            y[i] = s;
        }
    }

    std::vector<double> apply(const std::vector<double>& x) const {
        std::vector<double> y;
        matvec(x, y);
        return y;
    }

    // y = A^T x
    std::vector<double> apply_transpose(const std::vector<double>& x) const {
        std::vector<double> y(cols(), 0.0);
        const auto& rp = pattern->row_ptr;
        const auto& ci = pattern->col_idx;
        for (int i = 0; i < rows(); ++i)
            for (int k = rp[i]; k < rp[i + 1]; ++k) y[ci[k]] += val[k] * x[i];
        return y;
    }

    double quadratic_form(const std::vector<double>& x, const std::vector<double>& y) const {
        double s = 0.0;
        const auto& rp = pattern->row_ptr;
        const auto& ci = pattern->col_idx;
        for (int i = 0; i < rows(); ++i) {
            double row = 0.0;
            for (int k = rp[i]; k < rp[i + 1]; ++k) row += val[k] * y[ci[k]];
            s += x[i] * row;
        }
        return s;
    }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace blm
