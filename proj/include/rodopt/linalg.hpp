#pragma once

#include "rodopt/mesh.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace rodopt {

using Vector = std::vector<double>;

/// Square sparse matrix in compressed row storage.
///
/// Rows are sorted by column and contain no duplicates. FEM operators share
/// the node-adjacency pattern of their mesh, so matrices assembled on the same
/// mesh can be combined entry-wise.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(std::size_t dim, std::vector<std::size_t> row_ptr, std::vector<int> cols,
                 std::vector<double> values);

    /// Builds from (row, col, value) triplets, summing duplicates.
    struct Triplet {
        int row;
        int col;
        double value;
    };
    static SparseMatrix from_triplets(std::size_t dim, std::span<const Triplet> triplets);
    static SparseMatrix identity(std::size_t dim);

    std::size_t dimension() const noexcept { return dim_; }
    std::size_t nonzeros() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const int> cols() const noexcept { return cols_; }
    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }

    /// Stored value at (i, j), zero when not in the pattern.
    double at(std::size_t i, std::size_t j) const;

    void multiply(std::span<const double> x, std::span<double> y) const;
    Vector operator*(std::span<const double> x) const;
    Vector diagonal() const;
    Vector row_sums() const;

    SparseMatrix& operator*=(double s);
    /// this += s * other; patterns must be identical.
    SparseMatrix& add_scaled(const SparseMatrix& other, double s);

    /// Max |a_ij - a_ji| over stored entries.
    double asymmetry() const;

    /// Row/column elimination: constrained rows and columns are cleared and the
    /// diagonal set to 1, keeping the operator symmetric positive definite.
    void eliminate(std::span<const char> constrained);

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// Node-adjacency pattern of a mesh plus, per element, the nine slots of its
/// local matrix in the value array.
class FemPattern {
public:
    explicit FemPattern(const Mesh& mesh);

    SparseMatrix empty_matrix() const;
    const std::array<std::size_t, 9>& slots(std::size_t elem) const { return slots_[elem]; }

private:
    std::size_t dim_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<int> cols_;
    std::vector<std::array<std::size_t, 9>> slots_;
};

SparseMatrix assemble_mass(const Mesh& mesh);
SparseMatrix assemble_mass(const Mesh& mesh, const FemPattern& pattern);

/// Weighted Laplacian with one coefficient per element. Throws DomainError if
/// any coefficient is not strictly positive.
SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> coeff);
SparseMatrix assemble_stiffness(const Mesh& mesh, const FemPattern& pattern,
                                std::span<const double> coeff);

/// L_ii = integral of the i-th hat function.
Vector assemble_lumped_mass(const Mesh& mesh);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

struct CgOptions {
    double tol = 1e-10;        // relative to ||b||
    std::size_t max_iter = 0;  // 0 selects 10 * dimension
};

struct CgStats {
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// y = A x for a matrix-free operator.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Jacobi-preconditioned conjugate gradients. `x` holds the initial guess on
/// entry. Throws SolverError carrying the final residual on non-convergence.
CgStats pcg(const LinearOperator& apply, std::span<const double> inv_diag,
            std::span<const double> b, std::span<double> x, const CgOptions& options);

CgStats cg_solve(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                 const CgOptions& options = {});
Vector cg_solve(const SparseMatrix& a, std::span<const double> b, double tol = 1e-10,
                std::size_t max_iter = 0);

/// Mass-constrained step system
///   [ S_hat  B ] [ phi    ]   [ rhs ]
///   [ B^T    0 ] [ lambda ] = [ m   ]
/// with S_hat SPD (Dirichlet rows eliminated) and B > 0 on free nodes.
struct SaddleSystem {
    SparseMatrix s_hat;
    Vector b;
    Vector rhs;
    double constraint_value = 0.0;
};

struct SaddleSolution {
    Vector phi;
    double multiplier = 0.0;
};

/// Schur-complement solve: two inner CG solves, S^-1 rhs and S^-1 B.
SaddleSolution solve_saddle(const SaddleSystem& sys, double tol = 1e-10);

/// Reusable saddle solver for a fixed (S_hat, B): caches S^-1 B so each
/// right-hand side costs one CG solve.
class SaddleSolver {
public:
    SaddleSolver(SparseMatrix s_hat, Vector b, double tol = 1e-10);

    SaddleSolution solve(std::span<const double> rhs, double constraint_value,
                         std::span<const double> initial_guess = {}) const;

    const SparseMatrix& s_hat() const noexcept { return s_hat_; }
    const Vector& b() const noexcept { return b_; }
    std::size_t last_iterations() const noexcept { return last_iterations_; }

private:
    SparseMatrix s_hat_;
    Vector b_;
    Vector s_inv_b_;
    double b_s_inv_b_ = 0.0;
    double tol_;
    mutable std::size_t last_iterations_ = 0;
};

}  // namespace rodopt
