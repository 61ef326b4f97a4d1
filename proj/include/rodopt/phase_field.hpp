#pragma once

#include "rodopt/linalg.hpp"
#include "rodopt/mesh.hpp"

#include <span>
#include <vector>

namespace rodopt {

/// Nodal phase field: 1 marks the stiff phase, 0 the soft one.
struct PhaseField {
    Vector values;
    double mass_target = 0.0;  // m1 * |S|
};

/// Two-material elastic constants. `c` is the stiffness ratio soft/stiff.
class MaterialParams {
public:
    MaterialParams(double c, double mu_norm, double lambda_norm);

    double c() const noexcept { return c_; }
    double mu_norm() const noexcept { return mu_norm_; }
    double lambda_norm() const noexcept { return lambda_norm_; }
    /// Young-type bending prefactor mu (3 lambda + 2 mu) / (lambda + mu).
    double e_pref() const noexcept { return e_pref_; }

private:
    double c_;
    double mu_norm_;
    double lambda_norm_;
    double e_pref_;
};

/// u = phi (1 - c) + c.
Vector density_from_phase(std::span<const double> phi, const MaterialParams& params);
inline double density(double phi, double c) { return phi * (1.0 - c) + c; }

/// F(phi) = phi^2 (1 - phi)^2 / 4.
constexpr double double_well(double phi) {
    const double s = phi * (1.0 - phi);
    return 0.25 * s * s;
}

/// f = F' = (2 phi^3 - 3 phi^2 + phi) / 2.
constexpr double double_well_derivative(double phi) {
    return 0.5 * phi * (phi * (2.0 * phi - 3.0) + 1.0);
}

struct GinzburgLandauEnergy {
    double gradient = 0.0;  // (eps/2) int |grad phi|^2
    double well = 0.0;      // (1/eps) int F(phi)
    double total() const noexcept { return gradient + well; }
};

/// Ginzburg-Landau energy of the P1 interpolant. The gradient term is exact;
/// the well term uses the edge-midpoint rule.
GinzburgLandauEnergy ginzburg_landau_energy(const Mesh& mesh, std::span<const double> phi,
                                            double eps);

/// Truncates to [0, 1] and zeroes boundary nodes.
void clamp_to_box(const Mesh& mesh, std::span<double> phi);
PhaseField clamp_to_box(const Mesh& mesh, PhaseField phi);

/// Lumped-metric projection onto {0 <= phi <= 1, phi = 0 on the boundary,
/// sum_i L_i phi_i = mass}: phi_i <- clamp(phi_i + s) with the scalar shift s
/// found by bisection. Throws ConfigError if the mass is unattainable.
double project_box_mass(const Mesh& mesh, std::span<const double> lumped, std::span<double> phi,
                        double mass);

/// sum_i L_i phi_i, the exact integral of the interpolant.
double phase_mass(std::span<const double> lumped, std::span<const double> phi);

}  // namespace rodopt
