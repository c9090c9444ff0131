"""Trajectory, ensemble, verification and figure-data orchestration."""
from .config import SimulationConfig, ConfigError, InvariantError, NumericError, load_config, from_dict
from .trajectory import TrajectoryRecord, run_trajectory
from .ensemble import EnsembleSummary, run_ensemble, theta_comparison
from .verify import verify_invariants
from .figures import emit_figure_data, delayed_choice_statistics
