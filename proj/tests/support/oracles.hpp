#pragma once

// Test-only reference computations. Nothing here calls into the quadrature,
// assembly or solver code it is used to check.

#include "rodopt/mesh.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace oracle {

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

/// Exact integral of l1^a l2^b l3^c over a triangle of the given area.
inline double barycentric_monomial(double area, int a, int b, int c) {
    return 2.0 * area * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
}

/// A polynomial in barycentric coordinates, stored as terms coeff * l1^a l2^b l3^c.
struct Term {
    double coeff;
    std::array<int, 3> power;
};
using Poly = std::vector<Term>;

inline Poly multiply(const Poly& p, const Poly& q) {
    Poly out;
    for (const auto& s : p) {
        for (const auto& t : q) {
            out.push_back({s.coeff * t.coeff,
                           {s.power[0] + t.power[0], s.power[1] + t.power[1], s.power[2] + t.power[2]}});
        }
    }
    return out;
}

/// Linear polynomial sum_k v_k l_k (the P1 interpolant of nodal values).
inline Poly linear(double v0, double v1, double v2) {
    return {{v0, {1, 0, 0}}, {v1, {0, 1, 0}}, {v2, {0, 0, 1}}};
}

inline double integrate(const Poly& p, double area) {
    double s = 0.0;
    for (const auto& t : p) s += t.coeff * barycentric_monomial(area, t.power[0], t.power[1], t.power[2]);
    return s;
}

inline double triangle_area(const rodopt::Point& a, const rodopt::Point& b, const rodopt::Point& c) {
    return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

/// Exact integral over the mesh of prod_k (P1 interpolant of field_k), each field
/// given nodally. Coordinates enter as the nodal fields x or y.
inline double integrate_product(const rodopt::Mesh& mesh,
                                const std::vector<std::span<const double>>& fields) {
    double total = 0.0;
    for (const auto& t : mesh.elements()) {
        const double area = triangle_area(mesh.node(t[0]), mesh.node(t[1]), mesh.node(t[2]));
        Poly p{{1.0, {0, 0, 0}}};
        for (const auto& f : fields) p = multiply(p, linear(f[t[0]], f[t[1]], f[t[2]]));
        total += integrate(p, area);
    }
    return total;
}

inline std::vector<double> nodal_x(const rodopt::Mesh& mesh, double shift = 0.0) {
    std::vector<double> x;
    for (const auto& p : mesh.nodes()) x.push_back(p.x - shift);
    return x;
}

inline std::vector<double> nodal_y(const rodopt::Mesh& mesh, double shift = 0.0) {
    std::vector<double> y;
    for (const auto& p : mesh.nodes()) y.push_back(p.y - shift);
    return y;
}

/// Central difference of a scalar functional along a direction.
inline double central_difference(const std::function<double(std::span<const double>)>& functional,
                                 std::span<const double> x, std::span<const double> direction,
                                 double h) {
    std::vector<double> plus(x.begin(), x.end());
    std::vector<double> minus(x.begin(), x.end());
    for (std::size_t i = 0; i < plus.size(); ++i) {
        plus[i] += h * direction[i];
        minus[i] -= h * direction[i];
    }
    return (functional(plus) - functional(minus)) / (2.0 * h);
}

/// Smooth random interior direction: a few random Fourier modes times a bump
/// vanishing on the boundary of the disk of radius r.
inline std::vector<double> smooth_direction(const rodopt::Mesh& mesh, double r, std::mt19937& rng) {
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_real_distribution<double> freq(0.5, 4.0);
    std::array<std::array<double, 4>, 4> modes{};
    for (auto& m : modes) m = {coeff(rng), freq(rng), freq(rng), coeff(rng) * 3.0};
    std::vector<double> v(mesh.num_nodes(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (mesh.is_boundary(i)) continue;
        const auto& p = mesh.node(i);
        const double bump = std::max(0.0, 1.0 - (p.x * p.x + p.y * p.y) / (r * r));
        double s = 0.0;
        for (const auto& m : modes) s += m[0] * std::sin(m[1] * p.x + m[2] * p.y + m[3]);
        v[i] = bump * s;
    }
    return v;
}

/// Dense solve of the full bordered system [[S, B], [B^T, 0]].
inline std::pair<Eigen::VectorXd, double> dense_saddle(const Eigen::MatrixXd& s, const Eigen::VectorXd& b,
                                                       const Eigen::VectorXd& rhs, double m) {
    const auto n = s.rows();
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n + 1, n + 1);
    full.topLeftCorner(n, n) = s;
    full.block(0, n, n, 1) = b;
    full.block(n, 0, 1, n) = b.transpose();
    Eigen::VectorXd r(n + 1);
    r.head(n) = rhs;
    r(n) = m;
    const Eigen::VectorXd sol = full.fullPivLu().solve(r);
    return {sol.head(n), sol(n)};
}

}  // namespace oracle
