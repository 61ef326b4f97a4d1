#include "rodopt/rigidity.hpp"

#include "rodopt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rodopt {

namespace {

void check_density(const Mesh& mesh, std::span<const double> u) {
    if (u.size() != mesh.num_nodes()) throw UsageError("density length mismatch");
    for (double v : u) {
        if (!(v > 0.0)) throw DomainError("density must be strictly positive");
    }
}

double interpolate(const QuadraturePoint& q, const Triangle& t, std::span<const double> f) {
    return q.bary[0] * f[t[0]] + q.bary[1] * f[t[1]] + q.bary[2] * f[t[2]];
}

Point interpolate(const QuadraturePoint& q, const Triangle& t, const Mesh& mesh) {
    Point p{};
    for (int a = 0; a < 3; ++a) {
        p.x += q.bary[a] * mesh.node(t[a]).x;
        p.y += q.bary[a] * mesh.node(t[a]).y;
    }
    return p;
}

}  // namespace

CenteredFrame centered_frame(const Mesh& mesh, std::span<const double> u) {
    check_density(mesh, u);
    const auto rule = quadrature_points(2);
    double mass = 0.0;
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const double area = mesh.geometry(e).area;
        for (const auto& q : rule) {
            const double w = q.weight * area * interpolate(q, t, u);
            const Point x = interpolate(q, t, mesh);
            mass += w;
            mx += w * x.x;
            my += w * x.y;
        }
    }
    return {{mx / mass, my / mass}, mass};
}

Moments bending_moments(const Mesh& mesh, std::span<const double> u, const CenteredFrame& frame) {
    check_density(mesh, u);
    const auto rule = quadrature_points(4);
    Moments m;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const double area = mesh.geometry(e).area;
        for (const auto& q : rule) {
            const double w = q.weight * area * interpolate(q, t, u);
            const Point x = interpolate(q, t, mesh);
            const double hx = frame.hat_x(x);
            const double hy = frame.hat_y(x);
            m.dx2 += w * hx * hx;
            m.dx3 += w * hy * hy;
            m.dx2x3 += w * hx * hy;
        }
    }
    return m;
}

BendingRigidities bending_rigidities(const Moments& moments, const MaterialParams& params) {
    const double e = params.e_pref();
    BendingRigidities r;
    r.mean = e * 0.5 * (moments.dx2 + moments.dx3);
    const double half_diff = 0.5 * (moments.dx2 - moments.dx3);
    r.rm = e * std::sqrt(half_diff * half_diff + moments.dx2x3 * moments.dx2x3);
    r.max = r.mean + r.rm;
    r.min = r.mean - r.rm;
    return r;
}

Vector prandtl_coefficients(const Mesh& mesh, std::span<const double> u,
                            const MaterialParams& params) {
    check_density(mesh, u);
    Vector coeff(mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const double mean_u = (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
        coeff[e] = 1.0 / (params.mu_norm() * mean_u);
    }
    return coeff;
}

PrandtlSolver::PrandtlSolver(const Mesh& mesh)
    : mesh_(&mesh), pattern_(mesh), load_(assemble_lumped_mass(mesh)) {
    for (std::size_t i = 0; i < load_.size(); ++i) {
        load_[i] = mesh.is_boundary(i) ? 0.0 : 2.0 * load_[i];
    }
}

Vector PrandtlSolver::solve(std::span<const double> u, const MaterialParams& params,
                            const PrandtlOptions& options) const {
    const Mesh& mesh = *mesh_;
    auto k = assemble_stiffness(mesh, pattern_, prandtl_coefficients(mesh, u, params));
    k.eliminate(mesh.boundary_flags());
    Vector stress(mesh.num_nodes(), 0.0);
    if (options.initial_guess.size() == stress.size()) {
        std::copy(options.initial_guess.begin(), options.initial_guess.end(), stress.begin());
        for (int b : mesh.boundary_nodes()) stress[b] = 0.0;
    }
    cg_solve(k, load_, stress, CgOptions{options.tol, 0});
    return stress;
}

double PrandtlSolver::relative_residual(std::span<const double> u, const MaterialParams& params,
                                        std::span<const double> stress) const {
    const Mesh& mesh = *mesh_;
    if (stress.size() != mesh.num_nodes()) throw UsageError("stress function length mismatch");
    const auto coeff = prandtl_coefficients(mesh, u, params);
    Vector residual(mesh.num_nodes(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const auto& g = mesh.geometry(e);
        Point grad{};
        for (int a = 0; a < 3; ++a) {
            grad.x += stress[t[a]] * g.grad_shape[a].x;
            grad.y += stress[t[a]] * g.grad_shape[a].y;
        }
        for (int a = 0; a < 3; ++a) {
            residual[t[a]] += coeff[e] * g.area * (grad.x * g.grad_shape[a].x + grad.y * g.grad_shape[a].y);
        }
    }
    for (std::size_t i = 0; i < residual.size(); ++i) {
        residual[i] = mesh.is_boundary(i) ? 0.0 : residual[i] - load_[i];
    }
    return norm2(residual) / norm2(load_);
}

Vector solve_prandtl(const Mesh& mesh, std::span<const double> u, const MaterialParams& params,
                     const PrandtlOptions& options) {
    return PrandtlSolver(mesh).solve(u, params, options);
}

double torsional_rigidity(const Mesh& mesh, std::span<const double> stress) {
    if (stress.size() != mesh.num_nodes()) throw UsageError("stress function length mismatch");
    return 2.0 * dot(assemble_lumped_mass(mesh), stress);
}

Vector solve_warp_neumann(const Mesh& mesh, std::span<const double> u, double tol) {
    check_density(mesh, u);
    const auto frame = centered_frame(mesh, u);
    const std::size_t n = mesh.num_nodes();

    Vector coeff(mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        coeff[e] = (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
    }
    const auto k = assemble_stiffness(mesh, coeff);

    // Load: -int u (y, -x) . grad v, with the flux integrated exactly (quadratic).
    // Constraint row g_i = int u phi_i.
    Vector load(n, 0.0);
    Vector g(n, 0.0);
    const auto rule = quadrature_points(2);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const auto& geo = mesh.geometry(e);
        double fy = 0.0;  // int u * hat_y
        double fx = 0.0;  // int u * hat_x
        for (const auto& q : rule) {
            const double w = q.weight * geo.area * interpolate(q, t, u);
            const Point x = interpolate(q, t, mesh);
            fx += w * frame.hat_x(x);
            fy += w * frame.hat_y(x);
            for (int a = 0; a < 3; ++a) g[t[a]] += w * q.bary[a];
        }
        for (int a = 0; a < 3; ++a) {
            load[t[a]] += -fy * geo.grad_shape[a].x + fx * geo.grad_shape[a].y;
        }
    }

    // (K + g g^T) w = load has the unique solution of K w = load with g.w = 0,
    // because 1.load = 0, 1^T K = 0 and 1.g = int u > 0.
    const auto apply = [&](std::span<const double> x, std::span<double> y) {
        k.multiply(x, y);
        const double gx = dot(g, x);
        for (std::size_t i = 0; i < n; ++i) y[i] += g[i] * gx;
    };
    Vector inv_diag = k.diagonal();
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (inv_diag[i] + g[i] * g[i]);
    Vector w(n, 0.0);
    pcg(apply, inv_diag, load, w, CgOptions{tol, 0});
    return w;
}

double torsional_rigidity_warp(const Mesh& mesh, std::span<const double> u,
                               std::span<const double> warp) {
    check_density(mesh, u);
    if (warp.size() != mesh.num_nodes()) throw UsageError("warp function length mismatch");
    const auto frame = centered_frame(mesh, u);
    const auto rule_quartic = quadrature_points(4);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const auto& geo = mesh.geometry(e);
        Point grad{};
        for (int a = 0; a < 3; ++a) {
            grad.x += warp[t[a]] * geo.grad_shape[a].x;
            grad.y += warp[t[a]] * geo.grad_shape[a].y;
        }
        for (const auto& q : rule_quartic) {
            const double w = q.weight * geo.area * interpolate(q, t, u);
            const Point x = interpolate(q, t, mesh);
            const double hx = frame.hat_x(x);
            const double hy = frame.hat_y(x);
            total += w * (hx * hx + hy * hy - hx * grad.y + hy * grad.x);
        }
    }
    return total;
}

RigidityReport evaluate_rigidity(const Mesh& mesh, std::span<const double> u,
                                 const MaterialParams& params) {
    RigidityReport report;
    report.moments = bending_moments(mesh, u, centered_frame(mesh, u));
    report.bending = bending_rigidities(report.moments, params);
    report.d_t = torsional_rigidity(mesh, solve_prandtl(mesh, u, params));
    return report;
}

}  // namespace rodopt
