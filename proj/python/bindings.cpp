#include "rodopt/errors.hpp"
#include "rodopt/flow.hpp"
#include "rodopt/io.hpp"

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace rodopt;

namespace {

using InArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

py::array_t<double> to_array(const Vector& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

std::span<const double> as_span(const InArray& a) {
    if (a.ndim() != 1) throw UsageError("expected a one-dimensional array");
    return {a.data(), static_cast<std::size_t>(a.size())};
}

py::array_t<double> node_array(const Mesh& mesh) {
    py::array_t<double> out({static_cast<py::ssize_t>(mesh.num_nodes()), py::ssize_t{2}});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
        r(i, 0) = mesh.node(i).x;
        r(i, 1) = mesh.node(i).y;
    }
    return out;
}

py::array_t<int> element_array(const Mesh& mesh) {
    py::array_t<int> out({static_cast<py::ssize_t>(mesh.num_elements()), py::ssize_t{3}});
    auto r = out.mutable_unchecked<2>();
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
        for (int k = 0; k < 3; ++k) r(e, k) = mesh.element(e)[k];
    }
    return out;
}

Mesh mesh_from_arrays(const py::array_t<double, py::array::c_style | py::array::forcecast>& nodes,
                      const py::array_t<int, py::array::c_style | py::array::forcecast>& elements) {
    if (nodes.ndim() != 2 || nodes.shape(1) != 2) throw UsageError("nodes must have shape (n, 2)");
    if (elements.ndim() != 2 || elements.shape(1) != 3) throw UsageError("elements must have shape (m, 3)");
    const auto n = nodes.unchecked<2>();
    const auto t = elements.unchecked<2>();
    std::vector<Point> pts(static_cast<std::size_t>(n.shape(0)));
    for (py::ssize_t i = 0; i < n.shape(0); ++i) pts[i] = {n(i, 0), n(i, 1)};
    std::vector<Triangle> tris(static_cast<std::size_t>(t.shape(0)));
    for (py::ssize_t e = 0; e < t.shape(0); ++e) tris[e] = {t(e, 0), t(e, 1), t(e, 2)};
    return Mesh(std::move(pts), std::move(tris));
}

// Result of a Python-driven run; owns the mesh so arrays can be interpreted later.
struct FlowResult {
    Mesh mesh;
    std::size_t step = 0;
    Vector phi;
    Vector stress;
    RigidityReport report;
    std::vector<HistoryRow> history;
    bool stationary = false;
};

FlowResult run_flow(const FlowConfig& config, std::optional<Mesh> mesh,
                    const std::function<void(const HistoryRow&)>& callback, std::size_t callback_every) {
    config.validate();
    Mesh m = mesh ? std::move(*mesh) : generate_disk_mesh(config.domain_radius, config.elements);
    FlowWorkspace ws(m, config);
    StepObserver observer;
    if (callback) {
        observer = [&](const FlowState& s, const FlowWorkspace&) {
            if (callback_every > 0 && s.step % callback_every == 0) callback(s.history.back());
        };
    }
    auto state = run(ws, config, observer);
    return {std::move(m), state.step, std::move(state.phi.values), std::move(state.stress), state.report,
            std::move(state.history), state.stationary};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Compiled core of rodopt";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<Mesh>(m, "Mesh")
        .def(py::init(&mesh_from_arrays), py::arg("nodes"), py::arg("elements"))
        .def_property_readonly("num_nodes", &Mesh::num_nodes)
        .def_property_readonly("num_elements", &Mesh::num_elements)
        .def_property_readonly("nodes", &node_array)
        .def_property_readonly("elements", &element_array)
        .def_property_readonly("boundary_nodes", &Mesh::boundary_nodes)
        .def_property_readonly("h_max", &Mesh::h_max)
        .def_property_readonly("total_area", &Mesh::total_area)
        .def("translated", &Mesh::translated, py::arg("dx"), py::arg("dy"))
        .def("scaled", &Mesh::scaled, py::arg("sx"), py::arg("sy"))
        .def("__repr__", [](const Mesh& mesh) {
            std::ostringstream s;
            s << "Mesh(" << mesh.num_nodes() << " nodes, " << mesh.num_elements() << " elements)";
            return s.str();
        });

    m.def("disk_mesh", [](double radius, std::size_t elements, double cx, double cy) {
        return generate_disk_mesh(radius, elements, {cx, cy});
    }, py::arg("radius"), py::arg("elements"), py::arg("cx") = 0.0, py::arg("cy") = 0.0);
    m.def("ellipse_mesh", &generate_ellipse_mesh, py::arg("a"), py::arg("b"), py::arg("elements"));
    m.def("rectangle_mesh", [](std::pair<double, double> lower, std::pair<double, double> upper, std::size_t nx,
                               std::size_t ny) {
        return generate_rectangle_mesh({lower.first, lower.second}, {upper.first, upper.second}, nx, ny);
    }, py::arg("lower"), py::arg("upper"), py::arg("nx"), py::arg("ny"));
    m.def("read_mesh", py::overload_cast<const std::filesystem::path&>(&read_mesh), py::arg("path"));
    m.def("write_mesh", py::overload_cast<const Mesh&, const std::filesystem::path&>(&write_mesh), py::arg("mesh"),
          py::arg("path"));

    py::class_<MaterialParams>(m, "MaterialParams")
        .def(py::init<double, double, double>(), py::arg("c") = 0.1, py::arg("mu_norm") = 26.0,
             py::arg("lambda_norm") = 70.57)
        .def_property_readonly("c", &MaterialParams::c)
        .def_property_readonly("mu_norm", &MaterialParams::mu_norm)
        .def_property_readonly("lambda_norm", &MaterialParams::lambda_norm)
        .def_property_readonly("e_pref", &MaterialParams::e_pref);

    m.def("density", [](const InArray& phi, const MaterialParams& p) {
        return to_array(density_from_phase(as_span(phi), p));
    }, py::arg("phi"), py::arg("params"));
    m.def("ginzburg_landau_energy", [](const Mesh& mesh, const InArray& phi, double eps) {
        const auto e = ginzburg_landau_energy(mesh, as_span(phi), eps);
        return py::make_tuple(e.gradient, e.well);
    }, py::arg("mesh"), py::arg("phi"), py::arg("eps"), "Returns (gradient, well) parts of the energy.");
    m.def("initial_condition", [](const Mesh& mesh, double m1, double inner_radius, double eps) {
        return to_array(initial_condition(mesh, m1, inner_radius, eps).values);
    }, py::arg("mesh"), py::arg("m1"), py::arg("inner_radius"), py::arg("eps"));

    py::class_<Moments>(m, "Moments")
        .def_readonly("dx2", &Moments::dx2)
        .def_readonly("dx3", &Moments::dx3)
        .def_readonly("dx2x3", &Moments::dx2x3);
    py::class_<RigidityReport>(m, "RigidityReport")
        .def_readonly("moments", &RigidityReport::moments)
        .def_property_readonly("d_mean", [](const RigidityReport& r) { return r.bending.mean; })
        .def_property_readonly("rm", [](const RigidityReport& r) { return r.bending.rm; })
        .def_property_readonly("d_max", [](const RigidityReport& r) { return r.bending.max; })
        .def_property_readonly("d_min", [](const RigidityReport& r) { return r.bending.min; })
        .def_readonly("d_t", &RigidityReport::d_t)
        .def_property_readonly("twist_to_bend", &RigidityReport::twist_to_bend);

    m.def("evaluate_rigidity", [](const Mesh& mesh, const InArray& u, const MaterialParams& p) {
        return evaluate_rigidity(mesh, as_span(u), p);
    }, py::arg("mesh"), py::arg("u"), py::arg("params"));
    m.def("solve_prandtl", [](const Mesh& mesh, const InArray& u, const MaterialParams& p, double tol) {
        PrandtlOptions options;
        options.tol = tol;
        return to_array(solve_prandtl(mesh, as_span(u), p, options));
    }, py::arg("mesh"), py::arg("u"), py::arg("params"), py::arg("tol") = 1e-10);
    m.def("torsional_rigidity", [](const Mesh& mesh, const InArray& stress) {
        return torsional_rigidity(mesh, as_span(stress));
    }, py::arg("mesh"), py::arg("stress"));
    m.def("solve_warp", [](const Mesh& mesh, const InArray& u, double tol) {
        return to_array(solve_warp_neumann(mesh, as_span(u), tol));
    }, py::arg("mesh"), py::arg("u"), py::arg("tol") = 1e-10);
    m.def("torsional_rigidity_warp", [](const Mesh& mesh, const InArray& u, const InArray& warp) {
        return torsional_rigidity_warp(mesh, as_span(u), as_span(warp));
    }, py::arg("mesh"), py::arg("u"), py::arg("warp"));

    m.def("var_dt", [](const Mesh& mesh, const InArray& phi, const MaterialParams& p, const InArray& stress) {
        return to_array(var_dt(mesh, as_span(phi), p, as_span(stress)));
    }, py::arg("mesh"), py::arg("phi"), py::arg("params"), py::arg("stress"));
    m.def("var_energy_well", [](const Mesh& mesh, const InArray& phi, double eps) {
        return to_array(var_energy_well(mesh, as_span(phi), eps));
    }, py::arg("mesh"), py::arg("phi"), py::arg("eps"));

    py::class_<FlowConfig>(m, "FlowConfig")
        .def(py::init<>())
        .def_readwrite("preset", &FlowConfig::preset)
        .def_readwrite("sigma1", &FlowConfig::sigma1)
        .def_readwrite("sigma2", &FlowConfig::sigma2)
        .def_readwrite("sigma3", &FlowConfig::sigma3)
        .def_readwrite("gamma", &FlowConfig::gamma)
        .def_readwrite("eps", &FlowConfig::eps)
        .def_readwrite("tau", &FlowConfig::tau)
        .def_readwrite("c", &FlowConfig::c)
        .def_readwrite("mu_norm", &FlowConfig::mu_norm)
        .def_readwrite("lambda_norm", &FlowConfig::lambda_norm)
        .def_readwrite("m1", &FlowConfig::m1)
        .def_readwrite("max_steps", &FlowConfig::max_steps)
        .def_readwrite("stat_tol", &FlowConfig::stat_tol)
        .def_readwrite("k_stab", &FlowConfig::k_stab)
        .def_readwrite("theta1", &FlowConfig::theta1)
        .def_readwrite("cg_tol", &FlowConfig::cg_tol)
        .def_readwrite("domain_radius", &FlowConfig::domain_radius)
        .def_readwrite("elements", &FlowConfig::elements)
        .def_readwrite("initial_radius", &FlowConfig::initial_radius)
        .def_readwrite("snapshot_every", &FlowConfig::snapshot_every)
        .def("material", &FlowConfig::material)
        .def("validate", &FlowConfig::validate)
        .def("warnings", &FlowConfig::warnings)
        .def("to_text", &to_config_text)
        .def(py::self == py::self)
        .def("__repr__", [](const FlowConfig& c) { return "FlowConfig(" + to_config_text(c) + ")"; });

    m.def("preset", [](const std::string& name) { return preset_config(name); }, py::arg("name"));
    m.def("parse_config", [](const std::string& text) { return parse_config(text); }, py::arg("text"));
    m.def("parse_config_file", &parse_config_file, py::arg("path"));
    m.def("preset_names", [] {
        std::vector<std::string> names;
        for (const auto& p : experiment_presets()) names.emplace_back(1, p.name);
        return names;
    });

    py::class_<HistoryRow>(m, "HistoryRow")
        .def_readonly("step", &HistoryRow::step)
        .def_readonly("t", &HistoryRow::t)
        .def_readonly("d_mean", &HistoryRow::d_mean)
        .def_readonly("rm", &HistoryRow::rm)
        .def_readonly("d_t", &HistoryRow::d_t)
        .def_readonly("e_eps", &HistoryRow::e_eps)
        .def_readonly("j_eps", &HistoryRow::j_eps)
        .def_readonly("mass", &HistoryRow::mass)
        .def_readonly("residual", &HistoryRow::residual)
        .def("__repr__", [](const HistoryRow& r) {
            std::ostringstream s;
            s << "HistoryRow(step=" << r.step << ", d_mean=" << r.d_mean << ", d_t=" << r.d_t << ", j_eps=" << r.j_eps
              << ")";
            return s.str();
        });

    py::class_<FlowResult>(m, "FlowResult")
        .def_readonly("mesh", &FlowResult::mesh)
        .def_readonly("step", &FlowResult::step)
        .def_property_readonly("phi", [](const FlowResult& r) { return to_array(r.phi); })
        .def_property_readonly("stress", [](const FlowResult& r) { return to_array(r.stress); })
        .def_readonly("report", &FlowResult::report)
        .def_readonly("history", &FlowResult::history)
        .def_readonly("stationary", &FlowResult::stationary);

    m.def("run", &run_flow, py::arg("config"), py::arg("mesh") = std::nullopt,
          py::arg("callback") = std::function<void(const HistoryRow&)>{}, py::arg("callback_every") = 1,
          "Run the gradient flow; the callback receives the history row every callback_every steps.");

    m.def("write_history_csv",
          py::overload_cast<const std::vector<HistoryRow>&, const std::filesystem::path&>(&write_history_csv),
          py::arg("history"), py::arg("path"));
    m.def("read_history_csv", py::overload_cast<const std::filesystem::path&>(&read_history_csv), py::arg("path"));
    m.def("write_snapshot", [](const Mesh& mesh, const std::map<std::string, InArray>& fields,
                               const std::filesystem::path& path) {
        std::vector<NamedField> named;
        for (const auto& [name, values] : fields) named.push_back({name, as_span(values)});
        write_field_snapshot(mesh, named, path);
    }, py::arg("mesh"), py::arg("fields"), py::arg("path"));
    m.def("summarize", [](const std::vector<std::pair<std::string, HistoryRow>>& finals) {
        std::vector<py::tuple> out;
        for (const auto& r : summarize(finals)) out.push_back(py::make_tuple(r.name, r.d_mean, r.d_t, r.twist_to_bend));
        return out;
    }, py::arg("finals"), "Rows of (name, D_mean, D_T, D_mean/D_T).");
}
