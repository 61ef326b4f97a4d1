#pragma once

#include "rodopt/linalg.hpp"
#include "rodopt/mesh.hpp"
#include "rodopt/phase_field.hpp"

#include <span>

namespace rodopt {

/// u-weighted centroid; hatted coordinates are x - centroid.
struct CenteredFrame {
    Point centroid{};
    double u_mass = 0.0;  // integral of u

    double hat_x(const Point& p) const noexcept { return p.x - centroid.x; }
    double hat_y(const Point& p) const noexcept { return p.y - centroid.y; }
};

/// Second moments of the density in the centred frame.
struct Moments {
    double dx2 = 0.0;
    double dx3 = 0.0;
    double dx2x3 = 0.0;
};

struct BendingRigidities {
    double mean = 0.0;
    double rm = 0.0;  // deviatoric part
    double max = 0.0;
    double min = 0.0;
};

struct RigidityReport {
    Moments moments;
    BendingRigidities bending;
    double d_t = 0.0;
    double twist_to_bend() const noexcept { return bending.mean / d_t; }
};

CenteredFrame centered_frame(const Mesh& mesh, std::span<const double> u);

/// Order-4 quadrature of u x^2 with u interpolated as P1.
Moments bending_moments(const Mesh& mesh, std::span<const double> u, const CenteredFrame& frame);

/// D_mean = E (Dx2 + Dx3)/2, RM = E sqrt((Dx2 - Dx3)^2/4 + Dx2x3^2), D_max/min = D_mean +- RM.
BendingRigidities bending_rigidities(const Moments& moments, const MaterialParams& params);

/// Per-element Prandtl coefficient 1 / (mu_norm * mean(u over the element)).
Vector prandtl_coefficients(const Mesh& mesh, std::span<const double> u,
                            const MaterialParams& params);

struct PrandtlOptions {
    double tol = 1e-10;
    std::span<const double> initial_guess{};  // warm start, e.g. the previous step's solution
};

/// Stress function Phi with  int 1/(mu u) grad Phi . grad v = 2 int v,  Phi = 0 on the boundary.
/// The mu_norm factor is folded in, so 2 int Phi is the torsional rigidity
/// already scaled by mu_norm.
Vector solve_prandtl(const Mesh& mesh, std::span<const double> u, const MaterialParams& params,
                     const PrandtlOptions& options = {});

/// Reuses the sparsity pattern and lumped mass across repeated solves.
class PrandtlSolver {
public:
    explicit PrandtlSolver(const Mesh& mesh);

    Vector solve(std::span<const double> u, const MaterialParams& params,
                 const PrandtlOptions& options = {}) const;
    /// ||K(u) Phi - 2L|| / ||2L|| over interior nodes, assembled element-wise.
    double relative_residual(std::span<const double> u, const MaterialParams& params,
                             std::span<const double> stress) const;

private:
    const Mesh* mesh_;
    FemPattern pattern_;
    Vector load_;
};

/// D_T = 2 int I_h(Phi).
double torsional_rigidity(const Mesh& mesh, std::span<const double> stress);

/// Warping function of the Neumann torsion problem in the centred frame,
/// normalised by int u w = 0. Independent check of the Prandtl route.
Vector solve_warp_neumann(const Mesh& mesh, std::span<const double> u, double tol = 1e-10);

/// int u (x^2 + y^2 - x dw/dy + y dw/dx) in the centred frame; carries no mu_norm factor.
double torsional_rigidity_warp(const Mesh& mesh, std::span<const double> u,
                               std::span<const double> warp);

/// Full report for a density field (Prandtl route for D_T).
RigidityReport evaluate_rigidity(const Mesh& mesh, std::span<const double> u,
                                 const MaterialParams& params);

}  // namespace rodopt
