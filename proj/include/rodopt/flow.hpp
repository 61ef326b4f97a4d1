#pragma once

#include "rodopt/linalg.hpp"
#include "rodopt/mesh.hpp"
#include "rodopt/phase_field.hpp"
#include "rodopt/rigidity.hpp"
#include "rodopt/sensitivity.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace rodopt {

/// Parameters of one gradient-flow run. Defaults are the shared experiment
/// settings: disk of radius 0.7, initial stiff disk of radius 0.5, c = 0.1,
/// mu_norm = 26, lambda_norm = 70.57, eps = 0.003.
struct FlowConfig {
    std::string preset;  // informational; empty for custom runs

    double sigma1 = 0.0;
    double sigma2 = 0.0;
    double sigma3 = 0.0;
    double gamma = 0.5;
    double eps = 0.003;
    double tau = 100.0 * 0.003 * 0.003 * 0.003;
    double c = 0.1;
    double mu_norm = 26.0;
    double lambda_norm = 70.57;
    double m1 = (0.5 * 0.5) / (0.7 * 0.7);  // volume fraction of the initial stiff disk

    std::size_t max_steps = 20000;
    double stat_tol = 1e-6;
    double k_stab = 1000.0;  // warn when tau > k_stab * eps^3
    double theta1 = 0.0;     // 0 selects default_theta1(mesh)
    double cg_tol = 1e-10;

    double domain_radius = 0.7;
    std::size_t elements = 20000;
    double initial_radius = 0.5;

    std::size_t snapshot_every = 100;

    MaterialParams material() const { return {c, mu_norm, lambda_norm}; }

    /// Throws ConfigError on invariant violations.
    void validate() const;
    /// Non-fatal issues, e.g. tau above the stability bound.
    std::vector<std::string> warnings() const;

    bool operator==(const FlowConfig&) const = default;
};

struct HistoryRow {
    std::size_t step = 0;
    double t = 0.0;
    double d_mean = 0.0;
    double rm = 0.0;
    double d_t = 0.0;
    double e_eps = 0.0;
    double j_eps = 0.0;  // gamma E + sigma1 D_mean + sigma2 RM + sigma3 D_T (descent functional)
    double mass = 0.0;
    double residual = 0.0;  // ||phi^{n+1} - phi^n||_{L2} / tau; 0 for the initial row

    bool operator==(const HistoryRow&) const = default;
};

struct FlowState {
    std::size_t step = 0;
    PhaseField phi;
    Vector stress;  // Prandtl solution for the current phi
    RigidityReport report;
    std::vector<HistoryRow> history;
    bool stationary = false;
};

/// Mesh-fixed operators of a run: M, K, L and the saddle solver for
/// S_hat = M + tau gamma K with Dirichlet rows eliminated and B = L on free nodes.
class FlowWorkspace {
public:
    FlowWorkspace(Mesh mesh, const FlowConfig& config);
    FlowWorkspace(const FlowWorkspace&) = delete;
    FlowWorkspace& operator=(const FlowWorkspace&) = delete;

    const Mesh& mesh() const noexcept { return mesh_; }
    const SparseMatrix& mass() const noexcept { return mass_; }
    const SparseMatrix& stiffness() const noexcept { return stiffness_; }
    const Vector& lumped() const noexcept { return lumped_; }
    const SaddleSolver& saddle() const noexcept { return saddle_; }
    const PrandtlSolver& prandtl() const noexcept { return prandtl_; }
    double theta1() const noexcept { return theta1_; }

private:
    Mesh mesh_;
    FemPattern pattern_;
    SparseMatrix mass_;
    SparseMatrix stiffness_;
    Vector lumped_;
    SaddleSolver saddle_;
    PrandtlSolver prandtl_;
    double theta1_;
};

/// phi0 = (1 - tanh((|x| - inner_radius) / (sqrt(2) eps))) / 2, then projected
/// onto the box and the mass constraint m1 |S|. Throws ConfigError if the mass
/// target cannot be met.
PhaseField initial_condition(const Mesh& mesh, double m1, double inner_radius, double eps);

/// Evaluates the rigidities, energy and history row for phi (solving Prandtl).
FlowState make_state(const FlowWorkspace& ws, const FlowConfig& config, PhaseField phi,
                     std::size_t step = 0);

/// One semi-implicit step: explicit objective and well forces, implicit
/// gradient term, mass multiplier, then box/mass projection.
FlowState step(FlowState state, const FlowConfig& config, const FlowWorkspace& ws);

using StepObserver = std::function<void(const FlowState&, const FlowWorkspace&)>;

/// Steps until the residual drops below stat_tol or max_steps is reached. The
/// observer, if any, is called for the initial state and after every step.
FlowState run(const FlowWorkspace& ws, const FlowConfig& config, const StepObserver& observer = {});
FlowState run(const FlowConfig& config, const StepObserver& observer = {});

/// Composite objective of a history row.
double composite_objective(const HistoryRow& row);

struct DescentReport {
    double max_increase = 0.0;                // max_n (J_n - J_{n-1})
    std::vector<std::size_t> flagged_steps;   // steps whose increase exceeds 1e-10 |J|
    bool monotone() const noexcept { return flagged_steps.empty(); }
};

/// Scans consecutive history rows, ignoring the first `skip_steps` transitions.
DescentReport energy_monitor(const std::vector<HistoryRow>& history, std::size_t skip_steps = 0);

}  // namespace rodopt
