#include "rodopt/sensitivity.hpp"

#include "rodopt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rodopt {

namespace {

Point at_quadrature(const QuadraturePoint& q, const Triangle& t, const Mesh& mesh) {
    Point p{};
    for (int a = 0; a < 3; ++a) {
        p.x += q.bary[a] * mesh.node(t[a]).x;
        p.y += q.bary[a] * mesh.node(t[a]).y;
    }
    return p;
}

}  // namespace

MomentVariations var_moments(const Mesh& mesh, std::span<const double> phi,
                             const MaterialParams& params, const CenteredFrame& frame) {
    if (phi.size() != mesh.num_nodes()) throw UsageError("phase field length mismatch");
    const std::size_t n = mesh.num_nodes();
    const double c = params.c();
    const auto rule = quadrature_points(4);

    MomentVariations dm{Vector(n, 0.0), Vector(n, 0.0), Vector(n, 0.0)};
    Vector first_x(n, 0.0);  // int x phi_j
    Vector first_y(n, 0.0);
    double ux = 0.0;  // int u x, zero for a centred frame
    double uy = 0.0;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const double area = mesh.geometry(e).area;
        for (const auto& q : rule) {
            const Point x = at_quadrature(q, t, mesh);
            const double hx = frame.hat_x(x);
            const double hy = frame.hat_y(x);
            double phi_q = 0.0;
            for (int a = 0; a < 3; ++a) phi_q += q.bary[a] * phi[t[a]];
            const double w = q.weight * area;
            ux += w * density(phi_q, c) * hx;
            uy += w * density(phi_q, c) * hy;
            for (int a = 0; a < 3; ++a) {
                const double wa = w * q.bary[a];
                dm.dx2[t[a]] += wa * hx * hx;
                dm.dx3[t[a]] += wa * hy * hy;
                dm.dx2x3[t[a]] += wa * hx * hy;
                first_x[t[a]] += wa * hx;
                first_y[t[a]] += wa * hy;
            }
        }
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double b1 = first_x[j] / frame.u_mass;
        const double b2 = first_y[j] / frame.u_mass;
        dm.dx2[j] = (1.0 - c) * (dm.dx2[j] - 2.0 * b1 * ux);
        dm.dx3[j] = (1.0 - c) * (dm.dx3[j] - 2.0 * b2 * uy);
        dm.dx2x3[j] = (1.0 - c) * (dm.dx2x3[j] - (b1 * uy + b2 * ux));
    }
    return dm;
}

ForceVector var_dmean(const MomentVariations& dm, const MaterialParams& params) {
    ForceVector out(dm.dx2.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = params.e_pref() * 0.5 * (dm.dx2[j] + dm.dx3[j]);
    }
    return out;
}

ForceVector var_rm(const MomentVariations& dm, const Moments& moments,
                   const MaterialParams& params, double theta1) {
    if (!(theta1 > 0.0)) throw ConfigError("theta1 must be positive");
    const double diff = moments.dx2 - moments.dx3;
    const double denom = 2.0 * std::sqrt(diff * diff + 4.0 * moments.dx2x3 * moments.dx2x3 + theta1);
    ForceVector out(dm.dx2.size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = params.e_pref() *
                 (diff * (dm.dx2[j] - dm.dx3[j]) + 4.0 * moments.dx2x3 * dm.dx2x3[j]) / denom;
    }
    return out;
}

double default_theta1(const Mesh& mesh) {
    double r2 = 0.0;
    Point mean{};
    for (const auto& p : mesh.nodes()) {
        mean.x += p.x;
        mean.y += p.y;
    }
    mean.x /= static_cast<double>(mesh.num_nodes());
    mean.y /= static_cast<double>(mesh.num_nodes());
    for (const auto& p : mesh.nodes()) {
        r2 = std::max(r2, (p.x - mean.x) * (p.x - mean.x) + (p.y - mean.y) * (p.y - mean.y));
    }
    const double moment = mesh.total_area() * r2 / 4.0;
    return 1e-8 * moment * moment;
}

ForceVector var_dt(const Mesh& mesh, std::span<const double> phi, const MaterialParams& params,
                   std::span<const double> stress, double residual_tol) {
    return var_dt(PrandtlSolver(mesh), mesh, phi, params, stress, residual_tol);
}

ForceVector var_dt(const PrandtlSolver& solver, const Mesh& mesh, std::span<const double> phi,
                   const MaterialParams& params, std::span<const double> stress,
                   double residual_tol) {
    if (phi.size() != mesh.num_nodes() || stress.size() != mesh.num_nodes()) {
        throw UsageError("field length mismatch");
    }
    const double c = params.c();
    const auto u = density_from_phase(phi, params);
    if (solver.relative_residual(u, params, stress) > residual_tol) {
        throw UsageError("stress function is stale: it does not solve the Prandtl problem for phi");
    }
    ForceVector out(mesh.num_nodes(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const auto& g = mesh.geometry(e);
        Point grad{};
        for (int a = 0; a < 3; ++a) {
            grad.x += stress[t[a]] * g.grad_shape[a].x;
            grad.y += stress[t[a]] * g.grad_shape[a].y;
        }
        const double mean_u = (u[t[0]] + u[t[1]] + u[t[2]]) / 3.0;
        const double value = (1.0 - c) / (params.mu_norm() * mean_u * mean_u) *
                             (grad.x * grad.x + grad.y * grad.y) * g.area / 3.0;
        for (int a = 0; a < 3; ++a) out[t[a]] += value;
    }
    return out;
}

ForceVector var_energy_well(const Mesh& mesh, std::span<const double> phi, double eps) {
    if (!(eps > 0.0)) throw ConfigError("interface width eps must be positive");
    if (phi.size() != mesh.num_nodes()) throw UsageError("phase field length mismatch");
    const auto rule = quadrature_points(2);
    ForceVector out(mesh.num_nodes(), 0.0);
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const double area = mesh.geometry(e).area;
        for (const auto& q : rule) {
            const double value = q.bary[0] * phi[t[0]] + q.bary[1] * phi[t[1]] + q.bary[2] * phi[t[2]];
            const double f = q.weight * area * double_well_derivative(value) / eps;
            for (int a = 0; a < 3; ++a) out[t[a]] += f * q.bary[a];
        }
    }
    return out;
}

ForceVector assemble_total_force(const Mesh& mesh, const SparseMatrix& mass,
                                 std::span<const double> phi, const ObjectiveVariations& vars,
                                 const ForceWeights& weights) {
    const std::size_t n = mesh.num_nodes();
    if (phi.size() != n || mass.dimension() != n) throw UsageError("force assembly size mismatch");
    const auto term = [n](const ForceVector& v, std::size_t j) {
        if (v.empty()) return 0.0;
        if (v.size() != n) throw UsageError("variation vector length mismatch");
        return v[j];
    };
    ForceVector out = mass * phi;
    const double scale = weights.tau / weights.eps;
    for (std::size_t j = 0; j < n; ++j) {
        if (mesh.is_boundary(j)) {
            out[j] = 0.0;
            continue;
        }
        const double force = -weights.gamma * term(vars.well, j) - weights.sigma1 * term(vars.dmean, j) -
                             weights.sigma2 * term(vars.rm, j) - weights.sigma3 * term(vars.dt, j);
        out[j] += scale * force;
        if (!std::isfinite(out[j])) throw NumericalError("non-finite force entry");
    }
    return out;
}

}  // namespace rodopt
