#include "rodopt/phase_field.hpp"

#include "rodopt/errors.hpp"

#include <algorithm>
#include <cmath>

namespace rodopt {

MaterialParams::MaterialParams(double c, double mu_norm, double lambda_norm)
    : c_(c), mu_norm_(mu_norm), lambda_norm_(lambda_norm) {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("softness ratio c must lie in (0, 1]");
    if (!(mu_norm > 0.0)) throw ConfigError("mu_norm must be positive");
    if (!(lambda_norm >= 0.0)) throw ConfigError("lambda_norm must be non-negative");
    e_pref_ = mu_norm * (3.0 * lambda_norm + 2.0 * mu_norm) / (lambda_norm + mu_norm);
}

Vector density_from_phase(std::span<const double> phi, const MaterialParams& params) {
    Vector u(phi.size());
    std::transform(phi.begin(), phi.end(), u.begin(),
                   [c = params.c()](double p) { return density(p, c); });
    return u;
}

GinzburgLandauEnergy ginzburg_landau_energy(const Mesh& mesh, std::span<const double> phi,
                                            double eps) {
    if (!(eps > 0.0)) throw ConfigError("interface width eps must be positive");
    if (phi.size() != mesh.num_nodes()) throw UsageError("phase field length mismatch");
    const auto rule = quadrature_points(2);
    GinzburgLandauEnergy energy;
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        const auto& t = mesh.element(e);
        const auto& g = mesh.geometry(e);
        Point grad{};
        for (int a = 0; a < 3; ++a) {
            grad.x += phi[t[a]] * g.grad_shape[a].x;
            grad.y += phi[t[a]] * g.grad_shape[a].y;
        }
        energy.gradient += 0.5 * eps * g.area * (grad.x * grad.x + grad.y * grad.y);
        double well = 0.0;
        for (const auto& q : rule) {
            const double value = q.bary[0] * phi[t[0]] + q.bary[1] * phi[t[1]] + q.bary[2] * phi[t[2]];
            well += q.weight * double_well(value);
        }
        energy.well += g.area * well / eps;
    }
    return energy;
}

void clamp_to_box(const Mesh& mesh, std::span<double> phi) {
    if (phi.size() != mesh.num_nodes()) throw UsageError("phase field length mismatch");
    for (std::size_t i = 0; i < phi.size(); ++i) {
        phi[i] = mesh.is_boundary(i) ? 0.0 : std::clamp(phi[i], 0.0, 1.0);
    }
}

PhaseField clamp_to_box(const Mesh& mesh, PhaseField phi) {
    clamp_to_box(mesh, std::span<double>(phi.values));
    return phi;
}

double phase_mass(std::span<const double> lumped, std::span<const double> phi) {
    return dot(lumped, phi);
}

double project_box_mass(const Mesh& mesh, std::span<const double> lumped, std::span<double> phi,
                        double mass) {
    if (phi.size() != mesh.num_nodes() || lumped.size() != mesh.num_nodes()) {
        throw UsageError("phase field length mismatch");
    }
    double attainable = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!mesh.is_boundary(i)) attainable += lumped[i];
    }
    if (!(mass >= 0.0) || mass > attainable) {
        throw ConfigError("mass target " + std::to_string(mass) + " outside attainable range [0, " +
                          std::to_string(attainable) + "]");
    }
    const auto shifted_mass = [&](double s) {
        double total = 0.0;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (!mesh.is_boundary(i)) total += lumped[i] * std::clamp(phi[i] + s, 0.0, 1.0);
        }
        return total;
    };
    // Monotone in s; every node saturates at s = -max or 1 - min.
    double lo = -1.0;
    double hi = 1.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (mesh.is_boundary(i)) continue;
        lo = std::min(lo, -phi[i]);
        hi = std::max(hi, 1.0 - phi[i]);
    }
    double shift = 0.0;
    if (shifted_mass(0.0) != mass) {
        for (int iter = 0; iter < 200 && hi - lo > 1e-17 * std::max(1.0, std::abs(hi)); ++iter) {
            const double mid = 0.5 * (lo + hi);
            (shifted_mass(mid) < mass ? lo : hi) = mid;
        }
        shift = 0.5 * (lo + hi);
    }
    for (std::size_t i = 0; i < phi.size(); ++i) {
        phi[i] = mesh.is_boundary(i) ? 0.0 : std::clamp(phi[i] + shift, 0.0, 1.0);
    }
    // Bisection leaves a residual of a few ulps times the mass; spread it over
    // the unsaturated nodes.
    double free_weight = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        if (!mesh.is_boundary(i) && phi[i] > 0.0 && phi[i] < 1.0) free_weight += lumped[i];
    }
    if (free_weight > 0.0) {
        const double correction = (mass - phase_mass(lumped, phi)) / free_weight;
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (!mesh.is_boundary(i) && phi[i] > 0.0 && phi[i] < 1.0) {
                phi[i] = std::clamp(phi[i] + correction, 0.0, 1.0);
            }
        }
    }
    return shift;
}

}  // namespace rodopt
