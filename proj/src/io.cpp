#include "rodopt/io.hpp"

#include "rodopt/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <variant>

namespace rodopt {

namespace {

constexpr std::array<ExperimentPreset, 7> presets{{
    {'a', 0.0, 0.0, 0.0, 0.5},
    {'b', -1.0, 0.0, -3.0, 0.5},
    {'c', 0.0, 0.0, 3.0, 0.5},
    {'d', -3.0, 0.0, 3.0, 1.0},
    {'e', -3.0, 0.0, 3.0, 0.25},
    {'f', 1.5, 0.0, 3.0, 0.5},
    {'g', 1.5, 0.0, 3.0, 0.25},
}};

using Field = std::variant<double FlowConfig::*, std::size_t FlowConfig::*>;

struct ConfigKey {
    std::string_view name;
    Field field;
};

constexpr std::array<ConfigKey, 20> config_keys{{
    {"sigma1", &FlowConfig::sigma1},
    {"sigma2", &FlowConfig::sigma2},
    {"sigma3", &FlowConfig::sigma3},
    {"gamma", &FlowConfig::gamma},
    {"eps", &FlowConfig::eps},
    {"tau", &FlowConfig::tau},
    {"c", &FlowConfig::c},
    {"mu_norm", &FlowConfig::mu_norm},
    {"lambda_norm", &FlowConfig::lambda_norm},
    {"m1", &FlowConfig::m1},
    {"max_steps", &FlowConfig::max_steps},
    {"stat_tol", &FlowConfig::stat_tol},
    {"k_stab", &FlowConfig::k_stab},
    {"theta1", &FlowConfig::theta1},
    {"cg_tol", &FlowConfig::cg_tol},
    {"domain_radius", &FlowConfig::domain_radius},
    {"elements", &FlowConfig::elements},
    {"initial_radius", &FlowConfig::initial_radius},
    {"snapshot_every", &FlowConfig::snapshot_every},
    {"preset", Field{}},  // handled separately
}};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) return std::nullopt;
    return v;
}

std::optional<std::size_t> parse_count(std::string_view s) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc{} && end == s.data() + s.size()) return v;
    // Accept integral values written in floating notation, e.g. 2e4.
    if (const auto d = parse_double(s); d && *d >= 0.0 && std::floor(*d) == *d && *d < 1e15) {
        return static_cast<std::size_t>(*d);
    }
    return std::nullopt;
}

struct Assignment {
    std::size_t line;
    std::string key;
    std::string value;
};

}  // namespace

std::span<const ExperimentPreset> experiment_presets() { return presets; }

std::optional<ExperimentPreset> find_preset(std::string_view name) {
    if (name.size() != 1) return std::nullopt;
    for (const auto& p : presets) {
        if (p.name == name[0]) return p;
    }
    return std::nullopt;
}

FlowConfig preset_config(std::string_view name) {
    const auto preset = find_preset(name);
    if (!preset) throw ConfigError("unknown preset '" + std::string(name) + "' (expected a..g)");
    FlowConfig config;
    config.preset = std::string(name);
    config.sigma1 = preset->sigma1;
    config.sigma2 = preset->sigma2;
    config.sigma3 = preset->sigma3;
    config.gamma = preset->gamma;
    if (preset->name == 'a') config.max_steps = 0;
    return config;
}

FlowConfig parse_config(std::string_view text) {
    std::vector<Assignment> assignments;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        std::size_t start = 0;
        while (start <= line.size()) {
            const auto comma = std::min(line.find(',', start), line.size());
            const auto item = trim(line.substr(start, comma - start));
            start = comma + 1;
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" +
                                  std::string(item) + "'");
            }
            assignments.push_back(
                {line_no, std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1)))});
        }
    }

    FlowConfig config;
    for (const auto& a : assignments) {
        if (a.key == "preset") config = preset_config(a.value);
    }
    for (const auto& a : assignments) {
        if (a.key == "preset") continue;
        const auto it = std::find_if(config_keys.begin(), config_keys.end(),
                                     [&](const ConfigKey& k) { return k.name == a.key; });
        if (it == config_keys.end()) {
            throw ConfigError("line " + std::to_string(a.line) + ": unknown key '" + a.key + "'");
        }
        const auto bad_value = [&] {
            return ConfigError("line " + std::to_string(a.line) + ": invalid value '" + a.value +
                               "' for " + a.key);
        };
        if (const auto* d = std::get_if<double FlowConfig::*>(&it->field)) {
            const auto v = parse_double(a.value);
            if (!v) throw bad_value();
            config.*(*d) = *v;
        } else {
            const auto v = parse_count(a.value);
            if (!v) throw bad_value();
            config.*(std::get<std::size_t FlowConfig::*>(it->field)) = *v;
        }
    }
    config.validate();
    return config;
}

FlowConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string to_config_text(const FlowConfig& config) {
    std::ostringstream out;
    if (!config.preset.empty()) out << "preset = " << config.preset << '\n';
    for (const auto& key : config_keys) {
        if (key.name == "preset") continue;
        out << key.name << " = ";
        if (const auto* d = std::get_if<double FlowConfig::*>(&key.field)) {
            out << format_double(config.*(*d));
        } else {
            out << config.*(std::get<std::size_t FlowConfig::*>(key.field));
        }
        out << '\n';
    }
    return out.str();
}

void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& out) {
    out << history_csv_header << '\n';
    for (const auto& r : history) {
        out << r.step;
        for (double v : {r.t, r.d_mean, r.rm, r.d_t, r.e_eps, r.j_eps, r.mass, r.residual}) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

void write_history_csv(const std::vector<HistoryRow>& history, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_history_csv(history, out);
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<HistoryRow> read_history_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != history_csv_header) {
        throw IoError("history file must start with the header '" + std::string(history_csv_header) + "'");
    }
    std::vector<HistoryRow> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string_view> cells;
        std::string_view rest = trim(line);
        for (std::size_t start = 0; start <= rest.size();) {
            const auto comma = std::min(rest.find(',', start), rest.size());
            cells.push_back(rest.substr(start, comma - start));
            start = comma + 1;
        }
        if (cells.size() != 9) throw IoError("history line " + std::to_string(line_no) + ": expected 9 columns");
        HistoryRow r;
        const auto step = parse_count(cells[0]);
        if (!step) throw IoError("history line " + std::to_string(line_no) + ": bad step");
        r.step = *step;
        double* targets[] = {&r.t, &r.d_mean, &r.rm, &r.d_t, &r.e_eps, &r.j_eps, &r.mass, &r.residual};
        for (std::size_t k = 0; k < 8; ++k) {
            const auto v = parse_double(cells[k + 1]);
            if (!v) throw IoError("history line " + std::to_string(line_no) + ": bad number");
            *targets[k] = *v;
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return read_history_csv(in);
}

void write_field_snapshot(const Mesh& mesh, std::span<const NamedField> fields, std::ostream& out) {
    for (const auto& f : fields) {
        if (f.values.size() != mesh.num_nodes()) {
            throw UsageError("field '" + f.name + "' has " + std::to_string(f.values.size()) +
                             " values for " + std::to_string(mesh.num_nodes()) + " nodes");
        }
        if (f.name.empty() || f.name.find_first_of(" \t\n") != std::string::npos) {
            throw UsageError("field names must be non-empty and contain no whitespace");
        }
    }
    out << "# vtk DataFile Version 3.0\n"
        << "rodopt phase-field snapshot\n"
        << "ASCII\n"
        << "DATASET UNSTRUCTURED_GRID\n"
        << "POINTS " << mesh.num_nodes() << " double\n";
    for (const auto& p : mesh.nodes()) out << format_double(p.x) << ' ' << format_double(p.y) << " 0\n";
    out << "CELLS " << mesh.num_elements() << ' ' << 4 * mesh.num_elements() << '\n';
    for (const auto& t : mesh.elements()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << mesh.num_elements() << '\n';
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) out << "5\n";
    if (fields.empty()) return;
    out << "POINT_DATA " << mesh.num_nodes() << '\n';
    for (const auto& f : fields) {
        out << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : f.values) out << format_double(v) << '\n';
    }
}

void write_field_snapshot(const Mesh& mesh, std::span<const NamedField> fields,
                          const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_field_snapshot(mesh, fields, out);
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<SummaryRow> summarize(const std::vector<std::pair<std::string, HistoryRow>>& finals) {
    std::vector<SummaryRow> rows;
    rows.reserve(finals.size());
    for (const auto& [name, row] : finals) {
        rows.push_back({name, row.d_mean, row.d_t, row.d_mean / row.d_t});
    }
    return rows;
}

void print_summary(const std::vector<SummaryRow>& rows, std::ostream& out) {
    out << std::left << std::setw(12) << "experiment" << std::right << std::setw(12) << "D_mean"
        << std::setw(12) << "D_T" << std::setw(14) << "D_mean/D_T" << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& r : rows) {
        out << std::left << std::setw(12) << r.name << std::right << std::setw(12) << r.d_mean
            << std::setw(12) << r.d_t << std::setw(14) << r.twist_to_bend << '\n';
    }
    out << std::defaultfloat;
}

}  // namespace rodopt
