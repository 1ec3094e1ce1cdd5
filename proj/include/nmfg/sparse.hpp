#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nmfg {

/// Compressed-row sparse matrix. Column indices are strictly increasing
/// within each row.
struct CsrMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_ptr;  ///< length rows + 1
    std::vector<int> col;
    std::vector<double> val;

    std::size_t nnz() const { return col.size(); }

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;

    /// Structural check of the invariants above; throws on violation.
    void validate() const;
};

/// Column-major twin of CsrMatrix, used by the LU factorization.
struct CscMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> col_ptr;
    std::vector<int> row;
    std::vector<double> val;

    static CscMatrix from_csr(const CsrMatrix& a);
};

/// Sparse LU factorization P A P^T-ish: columns are processed in a caller
/// supplied order (identity by default), rows are chosen by threshold
/// partial pivoting. Left-looking Gilbert-Peierls algorithm.
///
/// The pivot threshold keeps the structurally natural pivot (the row with
/// the same original index as the column) whenever its magnitude is within
/// `pivot_threshold` of the column maximum; this preserves the zero-fill
/// factorization of triangular inputs while still guarding against small
/// pivots on general matrices. pivot_threshold = 1 is classical partial
/// pivoting.
class SparseLu {
public:
    /// Factorizes A with an optional symmetric ordering: position i of the
    /// factored matrix corresponds to row/column order[i] of A. Throws
    /// SingularPreconditionerError on a zero pivot column.
    SparseLu(const CscMatrix& a, std::span<const std::size_t> order = {},
             double pivot_threshold = 1e-3);

    std::size_t dimension() const { return n_; }
    std::size_t lower_nnz() const { return l_val_.size(); }
    std::size_t upper_nnz() const { return u_val_.size(); }

    /// x = A^{-1} b
    void solve(std::span<const double> b, std::span<double> x) const;

private:
    std::size_t n_ = 0;
    // L strictly lower + unit diagonal implicit, CSC in pivot order.
    std::vector<std::size_t> l_ptr_;
    std::vector<int> l_row_;
    std::vector<double> l_val_;
    // U upper including diagonal (diagonal stored last per column), CSC.
    std::vector<std::size_t> u_ptr_;
    std::vector<int> u_row_;
    std::vector<double> u_val_;
    std::vector<std::size_t> order_;      ///< position -> original column
    std::vector<std::size_t> pivot_row_;  ///< position -> original row
};

}  // namespace nmfg
