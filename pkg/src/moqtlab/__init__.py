"""Modeling toolkit for cavity electro-optic microwave-optical transducers.

Physics layers: electro-optic coupling chain (`eo_coupling`), ring-pair
vernier engineering (`vernier`), triple-resonant conversion (`transduction`),
qubit drive and readout models (`qubit_dynamics`), heralded entanglement
budgets (`network_budget`), and measurement fitting (`fitting`).  The
`moqtlab` console script fronts the routine workflows.
"""

from .config import RunConfig, load_config
from .eo_coupling import DeviceGeometry, GratingSpec, coupling_chain, solve_geometry_parameter
from .errors import ConfigError, DatasetFormatError, ModelError, ToolkitError
from .fitting import FITTERS, MODELS, Dataset, FitResult, least_squares
from .network_budget import (
    BudgetResult,
    EntanglementScenario,
    evaluate_scenario,
    load_scenario,
)
from .qubit_dynamics import PulseSchedule, QubitParams, RabiFitModel, chevron_map
from .transduction import (
    MicrowaveModeParams,
    OpticalModeParams,
    PumpDrive,
    TransducerState,
    bandwidth_3db,
    calibrate_heating,
    calibrate_link,
    conversion_efficiency,
    cooperativity,
    efficiency_sweep,
    scattering_matrix,
)
from .units import AngularFrequency, Power, Transmittance
from .vernier import HybridPair, RingComb, hybridize, scan_period, spectrum_scan, vernier_period

__version__ = "0.1.0"

__all__ = [
    "AngularFrequency",
    "BudgetResult",
    "ConfigError",
    "Dataset",
    "DatasetFormatError",
    "DeviceGeometry",
    "EntanglementScenario",
    "FITTERS",
    "FitResult",
    "GratingSpec",
    "HybridPair",
    "MODELS",
    "MicrowaveModeParams",
    "ModelError",
    "OpticalModeParams",
    "Power",
    "PulseSchedule",
    "PumpDrive",
    "QubitParams",
    "RabiFitModel",
    "RingComb",
    "RunConfig",
    "ToolkitError",
    "TransducerState",
    "Transmittance",
    "bandwidth_3db",
    "calibrate_heating",
    "calibrate_link",
    "chevron_map",
    "conversion_efficiency",
    "cooperativity",
    "coupling_chain",
    "efficiency_sweep",
    "evaluate_scenario",
    "hybridize",
    "least_squares",
    "load_config",
    "load_scenario",
    "scan_period",
    "scattering_matrix",
    "solve_geometry_parameter",
    "spectrum_scan",
    "vernier_period",
    "__version__",
]
