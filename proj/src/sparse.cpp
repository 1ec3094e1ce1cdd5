#include "nmfg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "nmfg/errors.hpp"

namespace nmfg {

namespace {
constexpr std::size_t kUnpivoted = std::numeric_limits<std::size_t>::max();
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols || y.size() != rows)
        throw DimensionMismatchError("csr multiply: size mismatch");
    for (std::size_t i = 0; i < rows; ++i) {
        double sum = 0.0;
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p)
            sum += val[p] * x[static_cast<std::size_t>(col[p])];
        y[i] = sum;
    }
}

void CsrMatrix::validate() const {
    if (row_ptr.size() != rows + 1 || row_ptr.front() != 0 || row_ptr.back() != col.size() ||
        col.size() != val.size())
        throw InvalidParameterError("csr: inconsistent storage sizes");
    for (std::size_t i = 0; i < rows; ++i) {
        if (row_ptr[i] > row_ptr[i + 1]) throw InvalidParameterError("csr: row_ptr not monotone");
        for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
            if (col[p] < 0 || static_cast<std::size_t>(col[p]) >= cols)
                throw InvalidParameterError("csr: column index out of range");
            if (p > row_ptr[i] && col[p] <= col[p - 1])
                throw InvalidParameterError("csr: column indices not strictly increasing");
        }
    }
}

CscMatrix CscMatrix::from_csr(const CsrMatrix& a) {
    CscMatrix out;
    out.rows = a.rows;
    out.cols = a.cols;
    out.col_ptr.assign(a.cols + 1, 0);
    for (int c : a.col) ++out.col_ptr[static_cast<std::size_t>(c) + 1];
    for (std::size_t c = 0; c < a.cols; ++c) out.col_ptr[c + 1] += out.col_ptr[c];
    out.row.resize(a.nnz());
    out.val.resize(a.nnz());
    std::vector<std::size_t> next(out.col_ptr.begin(), out.col_ptr.end() - 1);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t p = a.row_ptr[r]; p < a.row_ptr[r + 1]; ++p) {
            const std::size_t c = static_cast<std::size_t>(a.col[p]);
            out.row[next[c]] = static_cast<int>(r);
            out.val[next[c]] = a.val[p];
            ++next[c];
        }
    }
    return out;
}

SparseLu::SparseLu(const CscMatrix& a, std::span<const std::size_t> order,
                   double pivot_threshold) {
    if (a.rows != a.cols) throw InvalidParameterError("sparse lu: matrix must be square");
    n_ = a.rows;
    if (order.empty()) {
        order_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    } else {
        if (order.size() != n_) throw InvalidParameterError("sparse lu: bad ordering length");
        order_.assign(order.begin(), order.end());
    }

    pivot_row_.assign(n_, kUnpivoted);
    std::vector<std::size_t> pinv(n_, kUnpivoted);  // original row -> pivot position

    std::vector<double> x(n_, 0.0);
    std::vector<std::uint32_t> mark(n_, 0);
    std::uint32_t stamp = 0;
    std::vector<std::size_t> pattern;        // original rows touched this column
    std::vector<std::size_t> topo;           // factor positions, postorder
    std::vector<std::uint32_t> visited(n_, 0);
    // DFS stack of (factor position, next entry offset in that L column)
    std::vector<std::pair<std::size_t, std::size_t>> dfs;

    l_ptr_.assign(n_ + 1, 0);
    u_ptr_.assign(n_ + 1, 0);
    l_row_.reserve(a.val.size());
    l_val_.reserve(a.val.size());
    u_row_.reserve(a.val.size());
    u_val_.reserve(a.val.size());

    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t c = order_[j];
        ++stamp;
        pattern.clear();
        topo.clear();

        // Symbolic: depth-first reach over already-factored columns.
        for (std::size_t p = a.col_ptr[c]; p < a.col_ptr[c + 1]; ++p) {
            const std::size_t r = static_cast<std::size_t>(a.row[p]);
            const std::size_t start = pinv[r];
            if (start == kUnpivoted || visited[start] == stamp) continue;
            dfs.clear();
            dfs.emplace_back(start, l_ptr_[start]);
            visited[start] = stamp;
            while (!dfs.empty()) {
                auto& [node, off] = dfs.back();
                bool descended = false;
                while (off < l_ptr_[node + 1]) {
                    const std::size_t child_row = static_cast<std::size_t>(l_row_[off]);
                    ++off;
                    const std::size_t child = pinv[child_row];
                    if (child != kUnpivoted && visited[child] != stamp) {
                        visited[child] = stamp;
                        dfs.emplace_back(child, l_ptr_[child]);
                        descended = true;
                        break;
                    }
                }
                if (!descended && (dfs.back().second >= l_ptr_[dfs.back().first + 1])) {
                    topo.push_back(dfs.back().first);
                    dfs.pop_back();
                }
            }
        }

        // Numeric: scatter A(:,c) then eliminate in topological order.
        for (std::size_t p = a.col_ptr[c]; p < a.col_ptr[c + 1]; ++p) {
            const std::size_t r = static_cast<std::size_t>(a.row[p]);
            if (mark[r] != stamp) {
                mark[r] = stamp;
                pattern.push_back(r);
                x[r] = a.val[p];
            } else {
                x[r] += a.val[p];
            }
        }
        for (std::size_t t = topo.size(); t-- > 0;) {
            const std::size_t node = topo[t];
            const std::size_t piv = pivot_row_[node];
            if (mark[piv] != stamp) continue;  // structurally reached, numerically absent
            const double uval = x[piv];
            for (std::size_t p = l_ptr_[node]; p < l_ptr_[node + 1]; ++p) {
                const std::size_t r = static_cast<std::size_t>(l_row_[p]);
                if (mark[r] != stamp) {
                    mark[r] = stamp;
                    pattern.push_back(r);
                    x[r] = -l_val_[p] * uval;
                } else {
                    x[r] -= l_val_[p] * uval;
                }
            }
        }

        // Pivot: largest unpivoted entry, preferring the natural row when
        // it is within the threshold.
        double amax = 0.0;
        std::size_t arg = kUnpivoted;
        for (std::size_t r : pattern) {
            if (pinv[r] != kUnpivoted) continue;
            const double v = std::abs(x[r]);
            if (v > amax) {
                amax = v;
                arg = r;
            }
        }
        if (arg == kUnpivoted || amax == 0.0 || !std::isfinite(amax))
            throw SingularPreconditionerError("sparse lu: zero pivot at column " +
                                              std::to_string(c));
        std::size_t piv = arg;
        if (mark[c] == stamp && pinv[c] == kUnpivoted && std::abs(x[c]) >= pivot_threshold * amax)
            piv = c;
        pinv[piv] = j;
        pivot_row_[j] = piv;
        const double diag = x[piv];

        // Store U (pivot positions < j, diagonal last) and L (original rows).
        for (std::size_t r : pattern) {
            const std::size_t pos = pinv[r];
            if (pos != kUnpivoted && pos < j && x[r] != 0.0) {
                u_row_.push_back(static_cast<int>(pos));
                u_val_.push_back(x[r]);
            }
        }
        u_row_.push_back(static_cast<int>(j));
        u_val_.push_back(diag);
        u_ptr_[j + 1] = u_val_.size();
        for (std::size_t r : pattern) {
            if (pinv[r] == kUnpivoted && x[r] != 0.0) {
                l_row_.push_back(static_cast<int>(r));
                l_val_.push_back(x[r] / diag);
            }
        }
        l_ptr_[j + 1] = l_val_.size();
    }

    // L row ids were original rows; remap them to pivot positions.
    for (auto& r : l_row_) r = static_cast<int>(pinv[static_cast<std::size_t>(r)]);
}

void SparseLu::solve(std::span<const double> b, std::span<double> out) const {
    if (b.size() != n_ || out.size() != n_)
        throw DimensionMismatchError("sparse lu solve: size mismatch");
    std::vector<double> y(n_);
    for (std::size_t j = 0; j < n_; ++j) y[j] = b[pivot_row_[j]];
    // Forward substitution, unit lower triangular.
    for (std::size_t j = 0; j < n_; ++j) {
        const double yj = y[j];
        if (yj == 0.0) continue;
        for (std::size_t p = l_ptr_[j]; p < l_ptr_[j + 1]; ++p)
            y[static_cast<std::size_t>(l_row_[p])] -= l_val_[p] * yj;
    }
    // Backward substitution; the diagonal is the last entry per column.
    for (std::size_t j = n_; j-- > 0;) {
        const std::size_t last = u_ptr_[j + 1] - 1;
        const double zj = y[j] / u_val_[last];
        y[j] = zj;
        if (zj == 0.0) continue;
        for (std::size_t p = u_ptr_[j]; p < last; ++p)
            y[static_cast<std::size_t>(u_row_[p])] -= u_val_[p] * zj;
    }
    for (std::size_t j = 0; j < n_; ++j) out[order_[j]] = y[j];
}

}  // namespace nmfg
