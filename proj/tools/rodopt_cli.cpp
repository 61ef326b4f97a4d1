#include "rodopt/errors.hpp"
#include "rodopt/flow.hpp"
#include "rodopt/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

using namespace rodopt;
namespace fs = std::filesystem;

namespace {

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, solver_error = 3, io_error = 4 };

struct RunOptions {
    std::string config_path;
    std::string out_dir = "rodopt_out";
    std::optional<std::size_t> elements;
    std::optional<std::size_t> max_steps;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
};

std::string snapshot_name(std::size_t step) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "snapshot_%06zu.vtk", step);
    return buf;
}

void write_snapshot(const FlowState& state, const FlowWorkspace& ws, const FlowConfig& config, const fs::path& dir) {
    const auto u = density_from_phase(state.phi.values, config.material());
    const std::vector<NamedField> fields{{"phi", state.phi.values}, {"u", u}, {"stress", state.stress}};
    write_field_snapshot(ws.mesh(), fields, dir / snapshot_name(state.step));
}

int cmd_run(const RunOptions& opt) {
    auto config = parse_config_file(opt.config_path);
    if (opt.elements) config.elements = *opt.elements;
    if (opt.max_steps) config.max_steps = *opt.max_steps;
    config.validate();
    for (const auto& w : config.warnings()) std::cerr << "warning: " << w << '\n';
    // The method is deterministic; the seed is accepted for interface stability only.
    if (opt.seed && !opt.quiet) std::cerr << "note: --seed has no effect (the flow is deterministic)\n";

    const fs::path dir(opt.out_dir);
    fs::create_directories(dir);
    {
        std::ofstream resolved(dir / "config.txt");
        if (!resolved) throw IoError("cannot write " + (dir / "config.txt").string());
        resolved << to_config_text(config);
    }

    FlowWorkspace ws(generate_disk_mesh(config.domain_radius, config.elements), config);
    if (!opt.quiet) {
        std::cout << "mesh: " << ws.mesh().num_elements() << " elements, " << ws.mesh().num_nodes() << " nodes\n";
    }
    std::size_t last_snapshot = static_cast<std::size_t>(-1);
    const auto state = run(ws, config, [&](const FlowState& s, const FlowWorkspace& w) {
        if (config.snapshot_every > 0 && s.step % config.snapshot_every == 0) {
            write_snapshot(s, w, config, dir);
            last_snapshot = s.step;
            if (!opt.quiet) {
                const auto& h = s.history.back();
                std::cout << "step " << h.step << "  D_mean " << h.d_mean << "  D_T " << h.d_t << "  J " << h.j_eps
                          << "  residual " << h.residual << std::endl;
            }
        }
    });
    if (last_snapshot != state.step) write_snapshot(state, ws, config, dir);
    write_history_csv(state.history, dir / "history.csv");

    const auto& h = state.history.back();
    std::cout << (state.stationary ? "stationary" : "step limit reached") << " after " << state.step
              << " steps: D_mean " << h.d_mean << ", D_T " << h.d_t << ", D_mean/D_T " << h.d_mean / h.d_t << '\n';
    return ok;
}

int cmd_report(const std::vector<std::string>& files) {
    std::vector<std::pair<std::string, HistoryRow>> finals;
    for (const auto& f : files) {
        const fs::path path(f);
        const auto history = read_history_csv(path);
        if (history.empty()) throw IoError(f + " has no history rows");
        std::string name = path.stem().string();
        if (name == "history" && path.has_parent_path()) name = fs::absolute(path).parent_path().filename().string();
        finals.emplace_back(name, history.back());
    }
    print_summary(summarize(finals), std::cout);
    return ok;
}

int cmd_check(std::size_t elements) {
    bool all = true;
    const auto report = [&](const char* name, double value, double reference, double tol) {
        const double err = std::abs(value - reference) / std::abs(reference);
        const bool pass = err <= tol;
        all = all && pass;
        std::printf("%-40s %s  value %.6g  reference %.6g  rel. error %.2e (tol %.1e)\n", name, pass ? "PASS" : "FAIL",
                    value, reference, err, tol);
    };
    const double pi = std::numbers::pi;

    const auto disk = generate_disk_mesh(0.7, elements);
    const MaterialParams unit(0.1, 1.0, 0.0);
    const Vector one(disk.num_nodes(), 1.0);
    report("homogeneous disk D_T (Prandtl)", torsional_rigidity(disk, solve_prandtl(disk, one, unit)),
           pi * std::pow(0.7, 4) / 2.0, 0.01);
    report("homogeneous disk Dx2", bending_moments(disk, one, centered_frame(disk, one)).dx2, pi * std::pow(0.7, 4) / 4.0,
           0.01);

    const auto a = preset_config("a");
    const auto phi = initial_condition(disk, a.m1, a.initial_radius, a.eps);
    const auto u = density_from_phase(phi.values, a.material());
    report("two-phase disk D_T (warp)", torsional_rigidity_warp(disk, u, solve_warp_neumann(disk, u)),
           2.0 * pi * (std::pow(0.5, 4) / 4.0 + 0.1 * (std::pow(0.7, 4) - std::pow(0.5, 4)) / 4.0), 0.02);
    const double prandtl = torsional_rigidity(disk, solve_prandtl(disk, u, a.material()));
    report("Prandtl vs warp x mu_norm", prandtl,
           torsional_rigidity_warp(disk, u, solve_warp_neumann(disk, u)) * a.material().mu_norm(), 0.01);

    const auto ellipse = generate_ellipse_mesh(0.7, 0.35, elements);
    const Vector ones(ellipse.num_nodes(), 1.0);
    report("homogeneous ellipse D_T (warp)", torsional_rigidity_warp(ellipse, ones, solve_warp_neumann(ellipse, ones)),
           pi * std::pow(0.7 * 0.35, 3) / (0.49 + 0.35 * 0.35), 0.01);

    const double eps = 0.05;
    const auto strip = generate_rectangle_mesh({-0.6, 0.0}, {0.6, 0.1}, 144, 12);
    Vector profile(strip.num_nodes());
    for (std::size_t i = 0; i < profile.size(); ++i) {
        profile[i] = 0.5 * (1.0 - std::tanh(strip.node(i).x / (2.0 * std::sqrt(2.0) * eps)));
    }
    report("interface energy per length", ginzburg_landau_energy(strip, profile, eps).total() / 0.1,
           1.0 / (6.0 * std::sqrt(2.0)), 0.03);

    std::cout << (all ? "all checks passed" : "some checks failed") << '\n';
    return all ? ok : check_failed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Phase-field optimisation of rod cross-sections for bending and torsion"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "run a gradient flow and write history and snapshots");
    run_cmd->add_option("--config", run_opt.config_path, "key = value configuration file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--out-dir", run_opt.out_dir, "output directory")->capture_default_str();
    run_cmd->add_option("--elements", run_opt.elements, "override the target element count");
    run_cmd->add_option("--max-steps", run_opt.max_steps, "override the step limit");
    run_cmd->add_option("--seed", run_opt.seed, "reserved; the flow is deterministic");
    run_cmd->add_flag("--quiet", run_opt.quiet, "suppress progress output");

    std::vector<std::string> report_files;
    auto* report_cmd = app.add_subcommand("report", "summarise final rows of history files");
    report_cmd->add_option("histories", report_files, "history CSV files")->required();

    std::size_t check_elements = 10000;
    auto* check_cmd = app.add_subcommand("check", "run the analytic validation checks");
    check_cmd->add_option("--elements", check_elements, "target element count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return e.get_exit_code() == 0 ? code : config_error;
    }

    try {
        if (*run_cmd) return cmd_run(run_opt);
        if (*report_cmd) return cmd_report(report_files);
        if (*check_cmd) return cmd_check(check_elements);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const UsageError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return config_error;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << " (residual " << e.residual() << " after " << e.iterations()
                  << " iterations)\n";
        return solver_error;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return solver_error;
    } catch (const DomainError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return solver_error;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io_error;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return io_error;
    }
    return ok;
}
