#pragma once

#include "rodopt/flow.hpp"
#include "rodopt/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rodopt {

/// Weighting factors of one named experiment; everything else uses the
/// FlowConfig defaults.
struct ExperimentPreset {
    char name;
    double sigma1;
    double sigma2;
    double sigma3;
    double gamma;
};

/// Presets a..g. (a) is the initial condition itself (no flow, zero weights).
std::span<const ExperimentPreset> experiment_presets();
std::optional<ExperimentPreset> find_preset(std::string_view name);

/// FlowConfig for a preset name; throws ConfigError for unknown names.
FlowConfig preset_config(std::string_view name);

/// Flat "key = value" text. Pairs are separated by newlines or commas; '#'
/// starts a comment. A `preset` key is expanded first, every other key then
/// overrides a field. Unknown keys and invalid values raise ConfigError naming
/// the line and field.
FlowConfig parse_config(std::string_view text);
FlowConfig parse_config_file(const std::filesystem::path& path);

/// Canonical text form; parse_config(to_config_text(c)) reproduces c.
std::string to_config_text(const FlowConfig& config);

inline constexpr std::string_view history_csv_header = "step,t,D_mean,RM,D_T,E_eps,J_eps,mass,residual";

void write_history_csv(const std::vector<HistoryRow>& history, std::ostream& out);
void write_history_csv(const std::vector<HistoryRow>& history, const std::filesystem::path& path);
std::vector<HistoryRow> read_history_csv(std::istream& in);
std::vector<HistoryRow> read_history_csv(const std::filesystem::path& path);

struct NamedField {
    std::string name;
    std::span<const double> values;
};

/// Legacy ASCII VTK unstructured grid: points, triangle cells (type 5) and one
/// scalar POINT_DATA block per field.
void write_field_snapshot(const Mesh& mesh, std::span<const NamedField> fields, std::ostream& out);
void write_field_snapshot(const Mesh& mesh, std::span<const NamedField> fields,
                          const std::filesystem::path& path);

struct SummaryRow {
    std::string name;
    double d_mean = 0.0;
    double d_t = 0.0;
    double twist_to_bend = 0.0;
};

/// One row per (name, final history row).
std::vector<SummaryRow> summarize(const std::vector<std::pair<std::string, HistoryRow>>& finals);
void print_summary(const std::vector<SummaryRow>& rows, std::ostream& out);

}  // namespace rodopt
