"""Phase-field optimisation of rod cross-sections for bending and torsion rigidity."""

from ._core import (
    ConfigError,
    DomainError,
    FlowConfig,
    FlowResult,
    HistoryRow,
    IoError,
    MaterialParams,
    Mesh,
    Moments,
    NumericalError,
    RigidityReport,
    SolverError,
    UsageError,
    density,
    disk_mesh,
    ellipse_mesh,
    evaluate_rigidity,
    ginzburg_landau_energy,
    initial_condition,
    parse_config,
    parse_config_file,
    preset,
    preset_names,
    read_history_csv,
    read_mesh,
    rectangle_mesh,
    run,
    solve_prandtl,
    solve_warp,
    summarize,
    torsional_rigidity,
    torsional_rigidity_warp,
    var_dt,
    var_energy_well,
    write_history_csv,
    write_mesh,
    write_snapshot,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
