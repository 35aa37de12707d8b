"""Master-equation simulator for the dissipative entanglement dynamics of
two capacitively coupled singlet-triplet qubits.

Each logical qubit couples through sigma_z to an Ohmic oscillator bath,
either shared (common topology) or private (independent topology).  The
package integrates the time-local second-order master equation over a
preparation + entangling pulse schedule and reports concurrence/DDSE time
series, parameter sweeps, and reproducibility manifests.

Units throughout: angular frequencies in rad/ns, times in ns,
temperatures in mK, hbar = 1.
"""

__version__ = "0.1.0"

from .bath import (  # noqa: E402
    BathSpec,
    CorrelationKernel,
    Topology,
    correlation_function,
    coupling_operators,
    dephasing_exponent,
    spectral_density,
    tabulate_kernel,
)
from .entanglement import EntanglementSample, concurrence, ddse, spin_flip  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    DiagnosticsBreach,
    DimensionError,
    DomainError,
    HermiticityError,
    NumericalFailure,
)
from .experiments import (  # noqa: E402
    ExperimentConfig,
    ResultRecord,
    SweepAxis,
    fig_preset,
    run_experiment,
    run_sweep,
    run_trajectory,
    validate_oracles,
)
from .model import (  # noqa: E402
    DeviceParams,
    PulseSchedule,
    Segment,
    build_hamiltonian,
    coupling_in_interaction_picture,
    default_device_params,
    propagator,
    standard_schedule,
)
from .redfield import IntegratorConfig, Trajectory, evolve, rhs, to_schrodinger  # noqa: E402

__all__ = [
    "__version__",
    "BathSpec",
    "ConfigError",
    "CorrelationKernel",
    "DeviceParams",
    "DiagnosticsBreach",
    "DimensionError",
    "DomainError",
    "EntanglementSample",
    "ExperimentConfig",
    "HermiticityError",
    "IntegratorConfig",
    "NumericalFailure",
    "PulseSchedule",
    "ResultRecord",
    "Segment",
    "SweepAxis",
    "Topology",
    "Trajectory",
    "build_hamiltonian",
    "concurrence",
    "correlation_function",
    "coupling_in_interaction_picture",
    "coupling_operators",
    "ddse",
    "default_device_params",
    "dephasing_exponent",
    "evolve",
    "fig_preset",
    "propagator",
    "rhs",
    "run_experiment",
    "run_sweep",
    "run_trajectory",
    "spectral_density",
    "spin_flip",
    "standard_schedule",
    "tabulate_kernel",
    "to_schrodinger",
    "validate_oracles",
]
