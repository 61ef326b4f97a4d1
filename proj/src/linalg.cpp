#include "rodopt/linalg.hpp"

#include "rodopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace rodopt {

SparseMatrix::SparseMatrix(std::size_t dim, std::vector<std::size_t> row_ptr,
                           std::vector<int> cols, std::vector<double> values)
    : dim_(dim), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(std::move(values)) {
    if (row_ptr_.size() != dim_ + 1 || cols_.size() != values_.size() ||
        row_ptr_.back() != values_.size()) {
        throw UsageError("inconsistent compressed row storage");
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t dim, std::span<const Triplet> triplets) {
    std::vector<Triplet> sorted(triplets.begin(), triplets.end());
    for (const auto& t : sorted) {
        if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= dim ||
            static_cast<std::size_t>(t.col) >= dim) {
            throw UsageError("triplet index out of range");
        }
    }
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> row_ptr(dim + 1, 0);
    std::vector<int> cols;
    std::vector<double> values;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const auto& t = sorted[k];
        if (k > 0 && sorted[k - 1].row == t.row && sorted[k - 1].col == t.col) {
            values.back() += t.value;
            continue;
        }
        cols.push_back(t.col);
        values.push_back(t.value);
        ++row_ptr[t.row + 1];
    }
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    return SparseMatrix(dim, std::move(row_ptr), std::move(cols), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t dim) {
    std::vector<std::size_t> row_ptr(dim + 1);
    std::iota(row_ptr.begin(), row_ptr.end(), std::size_t{0});
    std::vector<int> cols(dim);
    std::iota(cols.begin(), cols.end(), 0);
    return SparseMatrix(dim, std::move(row_ptr), std::move(cols), std::vector<double>(dim, 1.0));
}

double SparseMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= dim_ || j >= dim_) throw UsageError("matrix index out of range");
    const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
    const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
    const auto it = std::lower_bound(begin, end, static_cast<int>(j));
    if (it == end || *it != static_cast<int>(j)) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != dim_ || y.size() != dim_) throw UsageError("matrix-vector size mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += values_[k] * x[cols_[k]];
        y[i] = s;
    }
}

Vector SparseMatrix::operator*(std::span<const double> x) const {
    Vector y(dim_);
    multiply(x, y);
    return y;
}

Vector SparseMatrix::diagonal() const {
    Vector d(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (static_cast<std::size_t>(cols_[k]) == i) d[i] = values_[k];
        }
    }
    return d;
}

Vector SparseMatrix::row_sums() const {
    Vector s(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s[i] += values_[k];
    }
    return s;
}

SparseMatrix& SparseMatrix::operator*=(double s) {
    for (auto& v : values_) v *= s;
    return *this;
}

SparseMatrix& SparseMatrix::add_scaled(const SparseMatrix& other, double s) {
    if (other.dim_ != dim_ || other.row_ptr_ != row_ptr_ || other.cols_ != cols_) {
        throw UsageError("add_scaled requires identical sparsity patterns");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * other.values_[k];
    return *this;
}

double SparseMatrix::asymmetry() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            worst = std::max(worst, std::abs(values_[k] - at(cols_[k], i)));
        }
    }
    return worst;
}

void SparseMatrix::eliminate(std::span<const char> constrained) {
    if (constrained.size() != dim_) throw UsageError("constraint mask size mismatch");
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const auto j = static_cast<std::size_t>(cols_[k]);
            if (constrained[i] || constrained[j]) values_[k] = (i == j) ? 1.0 : 0.0;
        }
    }
}

FemPattern::FemPattern(const Mesh& mesh) : dim_(mesh.num_nodes()) {
    std::vector<std::vector<int>> adjacency(dim_);
    for (const auto& t : mesh.elements()) {
        for (int a : t) {
            for (int b : t) adjacency[a].push_back(b);
        }
    }
    row_ptr_.assign(dim_ + 1, 0);
    for (std::size_t i = 0; i < dim_; ++i) {
        auto& row = adjacency[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        row_ptr_[i + 1] = row_ptr_[i] + row.size();
    }
    cols_.reserve(row_ptr_.back());
    for (const auto& row : adjacency) cols_.insert(cols_.end(), row.begin(), row.end());

    slots_.resize(mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        for (int a = 0; a < 3; ++a) {
            const auto begin = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[t[a]]);
            const auto end = cols_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[t[a] + 1]);
            for (int b = 0; b < 3; ++b) {
                const auto it = std::lower_bound(begin, end, t[b]);
                slots_[e][3 * a + b] = static_cast<std::size_t>(it - cols_.begin());
            }
        }
    }
}

SparseMatrix FemPattern::empty_matrix() const {
    return SparseMatrix(dim_, row_ptr_, cols_, std::vector<double>(cols_.size(), 0.0));
}

SparseMatrix assemble_mass(const Mesh& mesh) { return assemble_mass(mesh, FemPattern(mesh)); }

SparseMatrix assemble_mass(const Mesh& mesh, const FemPattern& pattern) {
    auto m = pattern.empty_matrix();
    auto values = m.values();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double area = mesh.geometry(e).area;
        const auto& slot = pattern.slots(e);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) values[slot[3 * a + b]] += area / 12.0 * (a == b ? 2.0 : 1.0);
        }
    }
    return m;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, std::span<const double> coeff) {
    return assemble_stiffness(mesh, FemPattern(mesh), coeff);
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const FemPattern& pattern,
                                std::span<const double> coeff) {
    if (coeff.size() != mesh.num_elements()) {
        throw UsageError("stiffness coefficient needs one value per element");
    }
    auto k = pattern.empty_matrix();
    auto values = k.values();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        if (!(coeff[e] > 0.0)) {
            throw DomainError("stiffness coefficient must be positive (element " +
                              std::to_string(e) + ")");
        }
        const auto& g = mesh.geometry(e);
        const double w = coeff[e] * g.area;
        const auto& slot = pattern.slots(e);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                values[slot[3 * a + b]] +=
                    w * (g.grad_shape[a].x * g.grad_shape[b].x + g.grad_shape[a].y * g.grad_shape[b].y);
            }
        }
    }
    return k;
}

Vector assemble_lumped_mass(const Mesh& mesh) {
    Vector l(mesh.num_nodes(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const double third = mesh.geometry(e).area / 3.0;
        for (int v : mesh.element(e)) l[v] += third;
    }
    return l;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

CgStats pcg(const LinearOperator& apply, std::span<const double> inv_diag,
            std::span<const double> b, std::span<double> x, const CgOptions& options) {
    const std::size_t n = b.size();
    const std::size_t max_iter = options.max_iter ? options.max_iter : 10 * n;
    if (!(options.tol > 0.0)) throw UsageError("CG tolerance must be positive");

    const double b_norm = norm2(b);
    if (b_norm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return {};
    }
    Vector r(n);
    Vector z(n);
    Vector p(n);
    Vector q(n);
    apply(x, q);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];

    double r_norm = norm2(r);
    CgStats stats;
    stats.relative_residual = r_norm / b_norm;
    if (stats.relative_residual <= options.tol) return stats;

    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] = inv_diag[i] * r[i];
    double rz = dot(r, z);
    while (stats.iterations < max_iter) {
        ++stats.iterations;
        apply(p, q);
        const double pq = dot(p, q);
        if (!(pq > 0.0)) break;  // lost positive definiteness
        const double alpha = rz / pq;
        for (std::size_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        r_norm = norm2(r);
        stats.relative_residual = r_norm / b_norm;
        if (stats.relative_residual <= options.tol) return stats;
        for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    throw SolverError("conjugate gradients did not converge (relative residual " +
                          std::to_string(stats.relative_residual) + " after " +
                          std::to_string(stats.iterations) + " iterations)",
                      stats.relative_residual, stats.iterations);
}

CgStats cg_solve(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                 const CgOptions& options) {
    if (b.size() != a.dimension() || x.size() != a.dimension()) {
        throw UsageError("cg_solve size mismatch");
    }
    Vector inv_diag = a.diagonal();
    for (auto& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;
    return pcg([&a](std::span<const double> in, std::span<double> out) { a.multiply(in, out); },
               inv_diag, b, x, options);
}

Vector cg_solve(const SparseMatrix& a, std::span<const double> b, double tol, std::size_t max_iter) {
    Vector x(a.dimension(), 0.0);
    cg_solve(a, b, x, CgOptions{tol, max_iter});
    return x;
}

SaddleSolution solve_saddle(const SaddleSystem& sys, double tol) {
    return SaddleSolver(sys.s_hat, sys.b, tol).solve(sys.rhs, sys.constraint_value);
}

SaddleSolver::SaddleSolver(SparseMatrix s_hat, Vector b, double tol)
    : s_hat_(std::move(s_hat)), b_(std::move(b)), tol_(tol) {
    if (b_.size() != s_hat_.dimension()) throw UsageError("saddle constraint vector size mismatch");
    s_inv_b_.assign(b_.size(), 0.0);
    cg_solve(s_hat_, b_, s_inv_b_, CgOptions{tol_, 0});
    b_s_inv_b_ = dot(b_, s_inv_b_);
    if (!(b_s_inv_b_ > 0.0)) throw UsageError("saddle constraint vector must be nonzero");
}

SaddleSolution SaddleSolver::solve(std::span<const double> rhs, double constraint_value,
                                   std::span<const double> initial_guess) const {
    if (rhs.size() != b_.size()) throw UsageError("saddle right-hand side size mismatch");
    Vector y(rhs.size(), 0.0);
    if (initial_guess.size() == y.size()) std::copy(initial_guess.begin(), initial_guess.end(), y.begin());
    last_iterations_ = cg_solve(s_hat_, rhs, y, CgOptions{tol_, 0}).iterations;

    SaddleSolution out;
    out.multiplier = (dot(b_, y) - constraint_value) / b_s_inv_b_;
    out.phi = std::move(y);
    for (std::size_t i = 0; i < out.phi.size(); ++i) out.phi[i] -= out.multiplier * s_inv_b_[i];
    return out;
}

}  // namespace rodopt
