#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "nmfg/errors.hpp"
#include "nmfg/grid.hpp"

namespace nmfg {

enum class Field { Rho, U, V };

/// Flat indexing of the unknown vector w. Per class the blocks are
/// [ u(n=0..nt-1) | rho(n=0..nt) | V(n=nt..0) ]; V is stored in reversed
/// time order so that the decoupled system is lower triangular in this
/// ordering (time-marching forward for rho, backward for V).
struct UnknownLayout {
    int n_classes = 0;
    int nx = 0;
    int nt = 0;

    UnknownLayout() = default;
    UnknownLayout(int classes, int nx_cells, int nt_steps)
        : n_classes(classes), nx(nx_cells), nt(nt_steps) {
        if (classes < 1 || classes > 2)
            throw InvalidParameterError("layout: class count must be 1 or 2");
        if (nx < 3 || nt < 1) throw InvalidParameterError("layout: grid too small");
    }

    std::size_t class_stride() const {
        return static_cast<std::size_t>(3 * nt + 2) * static_cast<std::size_t>(nx);
    }
    std::size_t size() const { return static_cast<std::size_t>(n_classes) * class_stride(); }

    std::size_t u_index(int j, int n, int k) const {
        return class_stride() * static_cast<std::size_t>(j) +
               static_cast<std::size_t>(n) * static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(k);
    }
    std::size_t rho_index(int j, int n, int k) const {
        return class_stride() * static_cast<std::size_t>(j) +
               static_cast<std::size_t>(nt + n) * static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(k);
    }
    std::size_t v_index(int j, int n, int k) const {
        return class_stride() * static_cast<std::size_t>(j) +
               static_cast<std::size_t>(2 * nt + 1 + (nt - n)) * static_cast<std::size_t>(nx) +
               static_cast<std::size_t>(k);
    }

    /// Rows are colocated with the unknown each equation "produces".
    std::size_t row_feedback(int j, int n, int k) const { return u_index(j, n, k); }
    std::size_t row_initial(int j, int k) const { return rho_index(j, 0, k); }
    std::size_t row_continuity(int j, int n, int k) const { return rho_index(j, n + 1, k); }
    std::size_t row_terminal(int j, int k) const { return v_index(j, nt, k); }
    std::size_t row_hjb(int j, int n, int k) const { return v_index(j, n, k); }

    /// Decodes a flat index back to (field, class, time, cell).
    struct Entry {
        Field field;
        int class_index;
        int time;
        int cell;
    };
    Entry decode(std::size_t index) const;

    /// Human-readable name of the equation block a row index belongs to.
    std::string row_block_name(std::size_t row) const;
};

/// The full unknown vector w holding rho, u, V for all classes.
struct SolverState {
    UnknownLayout layout;
    std::vector<double> w;

    SolverState() = default;
    explicit SolverState(const UnknownLayout& l) : layout(l), w(l.size(), 0.0) {}

    double& u(int j, int n, int k) { return w[layout.u_index(j, n, k)]; }
    double& rho(int j, int n, int k) { return w[layout.rho_index(j, n, k)]; }
    double& v(int j, int n, int k) { return w[layout.v_index(j, n, k)]; }
    double u(int j, int n, int k) const { return w[layout.u_index(j, n, k)]; }
    double rho(int j, int n, int k) const { return w[layout.rho_index(j, n, k)]; }
    double v(int j, int n, int k) const { return w[layout.v_index(j, n, k)]; }
};

}  // namespace nmfg
