#pragma once

#include "lbfem/core.hpp"

#include <algorithm>
#include <vector>

namespace lbfem {

using Vector = Eigen::VectorXd;

struct Triplet {
    Index row;
    Index col;
    double value;
};

/// Compressed sparse row matrix, square.
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// Duplicates are summed; entries are ordered by (row, col) so the result is
    /// independent of triplet insertion order up to summation order within an entry.
    static SparseMatrix from_triplets(Index n, std::vector<Triplet> triplets)
    {
        std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        SparseMatrix m;
        m.n_ = n;
        m.row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
        for (std::size_t k = 0; k < triplets.size();) {
            const Triplet& t = triplets[k];
            LBFEM_THROW_IF(t.row < 0 || t.row >= n || t.col < 0 || t.col >= n, ErrorCode::InvalidArgument,
                           "triplet index out of range");
            double v = 0.0;
            std::size_t j = k;
            while (j < triplets.size() && triplets[j].row == t.row && triplets[j].col == t.col) {
                v += triplets[j].value;
                ++j;
            }
            m.col_.push_back(t.col);
            m.val_.push_back(v);
            ++m.row_ptr_[static_cast<std::size_t>(t.row) + 1];
            k = j;
        }
        for (Index i = 0; i < n; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];
        return m;
    }

    [[nodiscard]] Index rows() const noexcept { return n_; }
    [[nodiscard]] std::size_t nonzeros() const noexcept { return val_.size(); }
    [[nodiscard]] const std::vector<Index>& row_offsets() const noexcept { return row_ptr_; }
    [[nodiscard]] const std::vector<Index>& column_indices() const noexcept { return col_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return val_; }

    [[nodiscard]] Vector multiply(const Vector& x) const
    {
        Vector y(n_);
        for (Index i = 0; i < n_; ++i) {
            double s = 0.0;
            for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += val_[k] * x[col_[k]];
            y[i] = s;
        }
        return y;
    }

    [[nodiscard]] double at(Index i, Index j) const
    {
        const auto first = col_.begin() + row_ptr_[i];
        const auto last = col_.begin() + row_ptr_[i + 1];
        const auto it = std::lower_bound(first, last, j);
        return (it != last && *it == j) ? val_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
    }

    [[nodiscard]] Vector diagonal() const
    {
        Vector d(n_);
        for (Index i = 0; i < n_; ++i) d[i] = at(i, i);
        return d;
    }

    [[nodiscard]] double max_abs() const
    {
        double m = 0.0;
        for (double v : val_) m = std::max(m, std::abs(v));
        return m;
    }

    [[nodiscard]] bool is_symmetric(double rel_tol = 1e-12) const
    {
        const double scale = std::max(max_abs(), 1e-300);
        for (Index i = 0; i < n_; ++i)
            for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                if (std::abs(val_[k] - at(col_[k], i)) > rel_tol * scale) return false;
        return true;
    }

    [[nodiscard]] Eigen::MatrixXd to_dense() const
    {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n_, n_);
        for (Index i = 0; i < n_; ++i)
            for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) d(i, col_[k]) += val_[k];
        return d;
    }

private:
    Index n_ = 0;
    std::vector<Index> row_ptr_{0};
    std::vector<Index> col_;
    std::vector<double> val_;
};

} // namespace lbfem
