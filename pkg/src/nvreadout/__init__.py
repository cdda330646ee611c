"""Rate-equation simulator of NV center spin photodynamics.

The package models the coupled electron-nuclear spin system of a single
nitrogen-vacancy center near the excited-state level anticrossing, where
hyperfine flip-flops both polarize the nuclear spin and let one electron
spin flip be read out repeatedly.  It provides the spin Hamiltonian and
its anticrossing analysis, a classical rate model of the optical cycle
with spin-exchange during each excitation, a population-level pulse
engine, canned experiments (readout comparison, Rabi, ODMR, nuclear
resonance, field scans) and a batch CLI around them.
"""
from ._version import __version__
from .config import GridSpec, SimulationConfig, parse_config, serialize_config
from .errors import (
    AmbiguousStateError,
    ConfigError,
    DegenerateSteadyStateError,
    NumericalError,
    NvReadoutError,
    ParameterError,
    StateError,
)
from .experiments import (
    EsrSpectrum,
    FieldScan,
    RabiOscillation,
    ReadoutComparison,
    Spectrum,
    conventional_vs_enhanced,
    dip_positions,
    excited_state_esr,
    nuclear_resonance_spectrum,
    odmr_spectrum,
    prepared_readout_states,
    rabi_experiment,
    snr_vs_field,
)
from .params import NvParameters, RateParameters
from .photodynamics import (
    FluorescenceTrace,
    RateMatrix,
    SnrCurve,
    Trajectory,
    build_rate_matrix,
    cumulative_signal,
    evolve,
    fluorescence_trace,
    initialized_populations,
    snr_curve,
    steady_state,
    theoretical_enhancement,
    trace_from_population,
)
from .pulses import (
    Pulse,
    PulseSequence,
    SequenceResult,
    SweepResult,
    apply_pulse,
    pi_duration,
    prepared_populations,
    run_sequence,
    sweep,
    transfer_fraction,
)
from .spin_model import (
    Eigensystem,
    LacAnalysis,
    LevelDiagram,
    build_hamiltonian,
    diagonal_crossing_field,
    dominant_index,
    eigensystem,
    flip_flop_pairs,
    flip_flop_probability,
    lac_pairs,
    level_diagram,
    minimal_gap_field,
    nominal_lac_field,
    pair_gap,
    pair_mixing_probability,
    transition_frequency,
)
from .states import PopulationVector, SpinStateLabel, full_basis, triplet_basis

__all__ = [
    "__version__",
    "AmbiguousStateError",
    "ConfigError",
    "DegenerateSteadyStateError",
    "Eigensystem",
    "EsrSpectrum",
    "FieldScan",
    "FluorescenceTrace",
    "GridSpec",
    "LacAnalysis",
    "LevelDiagram",
    "NumericalError",
    "NvParameters",
    "NvReadoutError",
    "ParameterError",
    "PopulationVector",
    "Pulse",
    "PulseSequence",
    "RabiOscillation",
    "RateMatrix",
    "RateParameters",
    "ReadoutComparison",
    "SequenceResult",
    "SimulationConfig",
    "SnrCurve",
    "Spectrum",
    "SpinStateLabel",
    "StateError",
    "SweepResult",
    "Trajectory",
    "apply_pulse",
    "build_hamiltonian",
    "build_rate_matrix",
    "conventional_vs_enhanced",
    "cumulative_signal",
    "diagonal_crossing_field",
    "dip_positions",
    "dominant_index",
    "eigensystem",
    "evolve",
    "excited_state_esr",
    "flip_flop_pairs",
    "flip_flop_probability",
    "fluorescence_trace",
    "full_basis",
    "initialized_populations",
    "lac_pairs",
    "level_diagram",
    "minimal_gap_field",
    "nominal_lac_field",
    "nuclear_resonance_spectrum",
    "odmr_spectrum",
    "pair_gap",
    "pair_mixing_probability",
    "parse_config",
    "pi_duration",
    "prepared_populations",
    "prepared_readout_states",
    "rabi_experiment",
    "run_sequence",
    "serialize_config",
    "snr_curve",
    "snr_vs_field",
    "steady_state",
    "sweep",
    "theoretical_enhancement",
    "trace_from_population",
    "transfer_fraction",
    "transition_frequency",
    "triplet_basis",
]
