#include "nmfg/lgmres.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "nmfg/errors.hpp"

namespace nmfg {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double nrm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

LgmresResult lgmres_solve(const LinearOperator& a, std::span<const double> b,
                          const LinearOperator& precond, std::size_t dimension,
                          const LgmresSettings& settings) {
    if (b.size() != dimension) throw DimensionMismatchError("lgmres: rhs size mismatch");
    if (settings.restart < 1 || settings.augmentation_depth < 0)
        throw InvalidParameterError("lgmres: restart must be >= 1 and augmentation >= 0");

    const std::size_t n = dimension;
    LgmresResult result;
    result.x.assign(n, 0.0);

    const double bnorm = nrm2(b);
    if (bnorm == 0.0) {
        result.converged = true;
        return result;
    }
    const double target = settings.rel_tol * bnorm;

    auto apply_op = [&](std::span<const double> in, std::span<double> out,
                        std::vector<double>& scratch) {
        // right preconditioning: out = A (M in)
        if (precond) {
            precond(in, scratch);
            a(scratch, out);
        } else {
            a(in, out);
        }
    };

    // y accumulates the solution of (A M) y = b; x = M y at the end.
    std::vector<double> y(n, 0.0);
    std::vector<double> r(n), scratch(n);
    std::deque<std::vector<double>> aug;  // newest first

    const int m = settings.restart;
    const int max_s = m + settings.augmentation_depth;
    std::vector<std::vector<double>> basis;     // v_1 .. v_{s+1}
    std::vector<std::vector<double>> inputs;    // d_1 .. d_s
    std::vector<double> h((static_cast<std::size_t>(max_s) + 1) * static_cast<std::size_t>(max_s),
                          0.0);
    auto H = [&](int i, int j) -> double& {
        return h[static_cast<std::size_t>(i) * static_cast<std::size_t>(max_s) +
                 static_cast<std::size_t>(j)];
    };
    std::vector<double> cs(static_cast<std::size_t>(max_s)), sn(static_cast<std::size_t>(max_s)),
        g(static_cast<std::size_t>(max_s) + 1);

    int iters = 0;
    double resnorm = bnorm;
    bool breakdown = false;

    while (iters < settings.max_iters && !breakdown) {
        // r = b - (A M) y
        apply_op(y, r, scratch);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        resnorm = nrm2(std::span<const double>(r));
        if (resnorm <= target) break;

        const double beta = resnorm;
        basis.clear();
        inputs.clear();
        basis.emplace_back(r);
        for (double& v : basis[0]) v /= beta;
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;

        const int n_aug = static_cast<int>(aug.size());
        const int s_max = std::min(max_s, m + n_aug);
        int s = 0;
        for (int i = 0; i < s_max && iters < settings.max_iters; ++i) {
            if (i < m)
                inputs.push_back(basis[static_cast<std::size_t>(i)]);
            else
                inputs.push_back(aug[static_cast<std::size_t>(i - m)]);

            std::vector<double> w(n);
            apply_op(inputs.back(), w, scratch);
            ++iters;

            // modified Gram-Schmidt
            for (int row = 0; row <= i; ++row) {
                const double hij = dot(w, basis[static_cast<std::size_t>(row)]);
                H(row, i) = hij;
                axpy(-hij, basis[static_cast<std::size_t>(row)], w);
            }
            const double hnext = nrm2(std::span<const double>(w));
            H(i + 1, i) = hnext;

            // Givens update of column i
            for (int row = 0; row < i; ++row) {
                const double t = cs[static_cast<std::size_t>(row)] * H(row, i) +
                                 sn[static_cast<std::size_t>(row)] * H(row + 1, i);
                H(row + 1, i) = -sn[static_cast<std::size_t>(row)] * H(row, i) +
                                cs[static_cast<std::size_t>(row)] * H(row + 1, i);
                H(row, i) = t;
            }
            const double denom = std::hypot(H(i, i), H(i + 1, i));
            if (denom == 0.0) {
                breakdown = true;
                s = i;  // column i is unusable
                break;
            }
            cs[static_cast<std::size_t>(i)] = H(i, i) / denom;
            sn[static_cast<std::size_t>(i)] = H(i + 1, i) / denom;
            H(i, i) = denom;
            H(i + 1, i) = 0.0;
            g[static_cast<std::size_t>(i + 1)] = -sn[static_cast<std::size_t>(i)] *
                                                 g[static_cast<std::size_t>(i)];
            g[static_cast<std::size_t>(i)] *= cs[static_cast<std::size_t>(i)];
            s = i + 1;

            if (hnext == 0.0) {  // happy breakdown: exact solution in span
                breakdown = true;
                break;
            }
            basis.emplace_back(std::move(w));
            for (double& v : basis.back()) v /= hnext;

            if (std::abs(g[static_cast<std::size_t>(s)]) <= target) break;
        }
        if (s == 0) break;

        // back-substitute the triangularized least-squares system
        std::vector<double> coeff(static_cast<std::size_t>(s), 0.0);
        for (int row = s - 1; row >= 0; --row) {
            double sum = g[static_cast<std::size_t>(row)];
            for (int col = row + 1; col < s; ++col)
                sum -= H(row, col) * coeff[static_cast<std::size_t>(col)];
            coeff[static_cast<std::size_t>(row)] = sum / H(row, row);
        }
        std::vector<double> dy(n, 0.0);
        for (int i = 0; i < s; ++i)
            axpy(coeff[static_cast<std::size_t>(i)], inputs[static_cast<std::size_t>(i)], dy);
        axpy(1.0, dy, y);

        if (settings.augmentation_depth > 0) {
            const double dn = nrm2(std::span<const double>(dy));
            if (dn > 0.0) {
                for (double& v : dy) v /= dn;
                aug.emplace_front(std::move(dy));
                if (static_cast<int>(aug.size()) > settings.augmentation_depth) aug.pop_back();
            }
        }
    }

    // true residual of the returned iterate
    apply_op(y, r, scratch);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    resnorm = nrm2(std::span<const double>(r));

    if (precond)
        precond(y, result.x);
    else
        result.x = y;
    result.iterations = iters;
    result.relative_residual = resnorm / bnorm;
    result.converged = resnorm <= target;
    return result;
}

}  // namespace nmfg
