#include "rodopt/flow.hpp"

#include "rodopt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace rodopt {

namespace {

SparseMatrix unit_stiffness(const Mesh& mesh, const FemPattern& pattern) {
    return assemble_stiffness(mesh, pattern, Vector(mesh.num_elements(), 1.0));
}

SparseMatrix step_operator(const Mesh& mesh, const SparseMatrix& mass, const SparseMatrix& stiffness,
                           const FlowConfig& config) {
    SparseMatrix s = mass;
    s.add_scaled(stiffness, config.tau * config.gamma);
    s.eliminate(mesh.boundary_flags());
    return s;
}

Vector free_lumped(const Mesh& mesh, Vector lumped) {
    for (int b : mesh.boundary_nodes()) lumped[b] = 0.0;
    return lumped;
}

void check_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw NumericalError(std::string("non-finite value in ") + what);
    }
}

}  // namespace

void FlowConfig::validate() const {
    const auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("invalid " + field + ": " + why);
    };
    if (!(eps > 0.0)) fail("eps", "must be positive");
    if (!(tau > 0.0)) fail("tau", "must be positive");
    if (!(m1 > 0.0 && m1 < 1.0)) fail("m1", "must lie in (0, 1)");
    if (!(stat_tol > 0.0)) fail("stat_tol", "must be positive");
    if (!(c > 0.0 && c <= 1.0)) fail("c", "must lie in (0, 1]");
    if (!(mu_norm > 0.0)) fail("mu_norm", "must be positive");
    if (!(lambda_norm >= 0.0)) fail("lambda_norm", "must be non-negative");
    if (!(gamma >= 0.0)) fail("gamma", "must be non-negative");
    if (!(k_stab > 0.0)) fail("k_stab", "must be positive");
    if (!(theta1 >= 0.0)) fail("theta1", "must be non-negative (0 selects the default)");
    if (!(cg_tol > 0.0 && cg_tol < 1.0)) fail("cg_tol", "must lie in (0, 1)");
    if (!(domain_radius > 0.0)) fail("domain_radius", "must be positive");
    if (!(initial_radius > 0.0 && initial_radius < domain_radius)) {
        fail("initial_radius", "must lie inside the domain");
    }
    if (elements < 16) fail("elements", "must be at least 16");
    for (double s : {sigma1, sigma2, sigma3}) {
        if (!std::isfinite(s)) fail("sigma", "must be finite");
    }
}

std::vector<std::string> FlowConfig::warnings() const {
    std::vector<std::string> out;
    const double bound = k_stab * eps * eps * eps;
    if (tau > bound) {
        std::ostringstream msg;
        msg << "tau = " << tau << " exceeds the stability bound k_stab * eps^3 = " << bound
            << "; energy descent is not guaranteed";
        out.push_back(msg.str());
    }
    return out;
}

FlowWorkspace::FlowWorkspace(Mesh mesh, const FlowConfig& config)
    : mesh_(std::move(mesh)),
      pattern_(mesh_),
      mass_(assemble_mass(mesh_, pattern_)),
      stiffness_(unit_stiffness(mesh_, pattern_)),
      lumped_(assemble_lumped_mass(mesh_)),
      saddle_(step_operator(mesh_, mass_, stiffness_, config), free_lumped(mesh_, lumped_),
              config.cg_tol),
      prandtl_(mesh_),
      theta1_(config.theta1 > 0.0 ? config.theta1 : default_theta1(mesh_)) {}

PhaseField initial_condition(const Mesh& mesh, double m1, double inner_radius, double eps) {
    if (!(m1 > 0.0 && m1 < 1.0)) throw ConfigError("m1 must lie in (0, 1)");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    if (!(inner_radius > 0.0)) throw ConfigError("inner radius must be positive");
    const auto lumped = assemble_lumped_mass(mesh);
    PhaseField phi;
    phi.mass_target = m1 * mesh.total_area();
    phi.values.resize(mesh.num_nodes());
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        const auto& p = mesh.node(i);
        const double r = std::hypot(p.x, p.y);
        phi.values[i] = 0.5 * (1.0 - std::tanh((r - inner_radius) / (std::sqrt(2.0) * eps)));
    }
    project_box_mass(mesh, lumped, phi.values, phi.mass_target);
    return phi;
}

double composite_objective(const HistoryRow& row) { return row.j_eps; }

namespace {

HistoryRow history_row(const FlowWorkspace& ws, const FlowConfig& config, const FlowState& state,
                       double residual) {
    HistoryRow row;
    row.step = state.step;
    row.t = config.tau * static_cast<double>(state.step);
    row.d_mean = state.report.bending.mean;
    row.rm = state.report.bending.rm;
    row.d_t = state.report.d_t;
    row.e_eps = ginzburg_landau_energy(ws.mesh(), state.phi.values, config.eps).total();
    row.j_eps = config.gamma * row.e_eps + config.sigma1 * row.d_mean + config.sigma2 * row.rm +
                config.sigma3 * row.d_t;
    row.mass = phase_mass(ws.lumped(), state.phi.values);
    row.residual = residual;
    return row;
}

void refresh_report(const FlowWorkspace& ws, const FlowConfig& config, FlowState& state,
                    std::span<const double> warm_start) {
    const auto params = config.material();
    const auto u = density_from_phase(state.phi.values, params);
    state.stress = ws.prandtl().solve(u, params, PrandtlOptions{config.cg_tol, warm_start});
    state.report.moments = bending_moments(ws.mesh(), u, centered_frame(ws.mesh(), u));
    state.report.bending = bending_rigidities(state.report.moments, params);
    state.report.d_t = torsional_rigidity(ws.mesh(), state.stress);
}

}  // namespace

FlowState make_state(const FlowWorkspace& ws, const FlowConfig& config, PhaseField phi,
                     std::size_t step_index) {
    if (phi.values.size() != ws.mesh().num_nodes()) throw UsageError("phase field length mismatch");
    FlowState state;
    state.step = step_index;
    state.phi = std::move(phi);
    refresh_report(ws, config, state, {});
    state.history.push_back(history_row(ws, config, state, 0.0));
    return state;
}

FlowState step(FlowState state, const FlowConfig& config, const FlowWorkspace& ws) {
    const Mesh& mesh = ws.mesh();
    const auto params = config.material();
    const auto& phi = state.phi.values;
    if (phi.size() != mesh.num_nodes() || state.stress.size() != mesh.num_nodes()) {
        throw UsageError("flow state does not match the workspace mesh");
    }

    ObjectiveVariations vars;
    if (config.sigma1 != 0.0 || config.sigma2 != 0.0) {
        const auto u = density_from_phase(phi, params);
        const auto dm = var_moments(mesh, phi, params, centered_frame(mesh, u));
        if (config.sigma1 != 0.0) vars.dmean = var_dmean(dm, params);
        if (config.sigma2 != 0.0) vars.rm = var_rm(dm, state.report.moments, params, ws.theta1());
    }
    if (config.sigma3 != 0.0) {
        vars.dt = var_dt(ws.prandtl(), mesh, phi, params, state.stress,
                         std::max(1e-6, 100.0 * config.cg_tol));
    }
    if (config.gamma != 0.0) vars.well = var_energy_well(mesh, phi, config.eps);

    const ForceWeights weights{config.sigma1, config.sigma2, config.sigma3,
                               config.gamma,  config.eps,    config.tau};
    const auto rhs = assemble_total_force(mesh, ws.mass(), phi, vars, weights);
    auto solution = ws.saddle().solve(rhs, state.phi.mass_target, phi);
    check_finite(solution.phi, "phase field update");

    Vector previous_phi = std::move(state.phi.values);
    Vector previous_stress = std::move(state.stress);
    state.step += 1;
    state.phi.values = std::move(solution.phi);
    project_box_mass(mesh, ws.lumped(), state.phi.values, state.phi.mass_target);

    Vector delta(previous_phi.size());
    for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = state.phi.values[i] - previous_phi[i];
    const double residual = std::sqrt(std::max(0.0, dot(delta, ws.mass() * delta))) / config.tau;

    refresh_report(ws, config, state, previous_stress);
    state.history.push_back(history_row(ws, config, state, residual));
    state.stationary = residual < config.stat_tol;
    return state;
}

FlowState run(const FlowWorkspace& ws, const FlowConfig& config, const StepObserver& observer) {
    config.validate();
    auto state = make_state(ws, config,
                            initial_condition(ws.mesh(), config.m1, config.initial_radius, config.eps));
    if (observer) observer(state, ws);
    while (!state.stationary && state.step < config.max_steps) {
        state = step(std::move(state), config, ws);
        if (observer) observer(state, ws);
    }
    return state;
}

FlowState run(const FlowConfig& config, const StepObserver& observer) {
    config.validate();
    FlowWorkspace ws(generate_disk_mesh(config.domain_radius, config.elements), config);
    return run(ws, config, observer);
}

DescentReport energy_monitor(const std::vector<HistoryRow>& history, std::size_t skip_steps) {
    DescentReport report;
    report.max_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < history.size(); ++k) {
        if (history[k].step <= skip_steps) continue;
        const double prev = composite_objective(history[k - 1]);
        const double cur = composite_objective(history[k]);
        const double increase = cur - prev;
        report.max_increase = std::max(report.max_increase, increase);
        if (increase > 1e-10 * std::abs(cur)) report.flagged_steps.push_back(history[k].step);
    }
    if (report.max_increase == -std::numeric_limits<double>::infinity()) report.max_increase = 0.0;
    return report;
}

}  // namespace rodopt
