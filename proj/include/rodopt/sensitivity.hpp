#pragma once

#include "rodopt/linalg.hpp"
#include "rodopt/mesh.hpp"
#include "rodopt/phase_field.hpp"
#include "rodopt/rigidity.hpp"

#include <span>

namespace rodopt {

/// Nodal force vector: entry j is a first variation tested with the hat function phi_j.
using ForceVector = Vector;

struct MomentVariations {
    ForceVector dx2;
    ForceVector dx3;
    ForceVector dx2x3;
};

/// First variations of the centred second moments with respect to phi.
///
///   dDx2[v]   = (1-c) ( int x^2 v  - 2 int u b1(v) x )
///   dDx3[v]   = (1-c) ( int y^2 v  - 2 int u b2(v) y )
///   dDx2x3[v] = (1-c) ( int x y v  - int u (b1(v) y + b2(v) x) )
///
/// with hatted x, y and b1 = int x v / int u, b2 = int y v / int u. The b-terms
/// carry the centroid shift; they vanish up to round-off when the frame is
/// centred for u.
MomentVariations var_moments(const Mesh& mesh, std::span<const double> phi,
                             const MaterialParams& params, const CenteredFrame& frame);

ForceVector var_dmean(const MomentVariations& dm, const MaterialParams& params);

/// Regularised variation of RM; theta1 > 0 smooths the square root at RM = 0.
ForceVector var_rm(const MomentVariations& dm, const Moments& moments,
                   const MaterialParams& params, double theta1);

/// Default theta1: 1e-8 times the squared characteristic moment |S| r^2 / 4,
/// with r^2 estimated from the mesh extent.
double default_theta1(const Mesh& mesh);

/// Adjoint variation of D_T (the adjoint state equals Phi):
///   entry j = int (1-c) / (mu u^2) |grad Phi|^2 phi_j,
/// with u evaluated at element centroids, matching the stiffness coefficient of
/// the Prandtl solve so the vector is the exact derivative of the discrete D_T.
/// Throws UsageError if Phi does not solve the Prandtl problem for this phi.
ForceVector var_dt(const Mesh& mesh, std::span<const double> phi, const MaterialParams& params,
                   std::span<const double> stress, double residual_tol = 1e-6);
ForceVector var_dt(const PrandtlSolver& solver, const Mesh& mesh, std::span<const double> phi,
                   const MaterialParams& params, std::span<const double> stress,
                   double residual_tol = 1e-6);

/// Explicit double-well part of the Ginzburg-Landau variation:
///   entry j = (1/eps) int f(I_h phi) phi_j,
/// on the same edge-midpoint rule as the energy. The gradient part
/// eps * K phi is applied implicitly by the time step.
ForceVector var_energy_well(const Mesh& mesh, std::span<const double> phi, double eps);

struct ForceWeights {
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma3 = 0.0;
    double gamma = 0.0;
    double eps = 1.0;
    double tau = 0.0;
};

struct ObjectiveVariations {
    ForceVector dmean;
    ForceVector rm;
    ForceVector dt;    // in the mu-scaled convention of solve_prandtl
    ForceVector well;  // var_energy_well
};

/// Right-hand side of the mass-constrained step:
///   F = -gamma * well - sigma1 dmean - sigma2 rm - sigma3 dt,
///   F~ = (tau/eps) F + M phi^n,
/// with Dirichlet entries zeroed. `dt` already carries the mu_norm factor of
/// the sigma3 mu_norm D_T objective term.
ForceVector assemble_total_force(const Mesh& mesh, const SparseMatrix& mass,
                                 std::span<const double> phi, const ObjectiveVariations& vars,
                                 const ForceWeights& weights);

}  // namespace rodopt
