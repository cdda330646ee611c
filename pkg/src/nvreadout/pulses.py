"""Timed microwave and radio-frequency pulses acting on populations.

The sequences that matter here consist of selective pi pulses followed by
an optical readout, so pulses act on populations only.  On-resonance
two-level population transfer sin^2(pi * Omega * t) is exact in this
picture; what is given up is phase coherence between pulses (Ramsey-type
sequences are out of scope).

Transfer for a pulse of Rabi frequency Omega (MHz) detuned by delta from a
transition, applied for t nanoseconds:

    T = Omega^2 / (Omega^2 + delta^2) * sin^2(pi * sqrt(Omega^2 + delta^2) * t * 1e-3)

A pulse only addresses transitions within the selectivity window
|delta| < window * Omega; outside it the transfer is zero, which models
selective excitation of a single line.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import AmbiguousStateError, ParameterError, StateError
from .params import NvParameters, RateParameters
from .photodynamics import (
    FlipFlopOverride,
    FluorescenceTrace,
    RateMatrix,
    _counting_propagator,
    build_rate_matrix,
    cumulative_signal,
    evolve,
    initialized_populations,
    trace_from_population,
)
from .spin_model import Eigensystem, build_hamiltonian, eigensystem, transition_frequency
from .states import PopulationVector, SpinStateLabel, basis_index, triplet_basis

PULSE_KINDS = ("laser", "mw", "rf")
SYMBOLIC_FLIPS = ("pi", "pi_half")

# |delta| < SELECTIVITY_WINDOW * Omega is "addressed"; beyond it a selective
# pulse does nothing.
SELECTIVITY_WINDOW = 10.0

DEFAULT_MW_RABI = 10.0
DEFAULT_RF_RABI = 0.5


@dataclass(frozen=True)
class Pulse:
    """One element of a sequence: a laser interval or a mw/rf rotation.

    Timed rotations carry (frequency, rabi_frequency, duration); symbolic
    rotations carry (frequency, flip) and mean an ideal pi or pi/2 on the
    transition resonant at that frequency.  Laser pulses carry only a
    duration.
    """

    kind: str
    frequency: float | None = None
    rabi_frequency: float | None = None
    duration: float | None = None
    flip: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in PULSE_KINDS:
            raise ParameterError(f"unknown pulse kind {self.kind!r}")
        if self.kind == "laser":
            if self.flip is not None or self.frequency is not None:
                raise ParameterError("laser pulses take only a duration")
            if self.duration is None or self.duration <= 0:
                raise ParameterError("laser pulses need a positive duration")
            return
        if self.frequency is None or self.frequency <= 0:
            raise ParameterError(f"{self.kind} pulses need a positive frequency in MHz")
        if self.flip is not None:
            if self.flip not in SYMBOLIC_FLIPS:
                raise ParameterError(f"unknown symbolic flip {self.flip!r}")
            return
        if self.rabi_frequency is None or self.rabi_frequency <= 0:
            raise ParameterError("timed pulses need a positive rabi_frequency in MHz")
        # duration 0 is legal for timed rotations: a Rabi sweep starts there
        if self.duration is None or self.duration < 0:
            raise ParameterError("timed pulses need a non-negative duration in ns")

    @classmethod
    def mw_pi(cls, frequency: float) -> "Pulse":
        return cls(kind="mw", frequency=frequency, flip="pi")

    @classmethod
    def rf_pi(cls, frequency: float) -> "Pulse":
        return cls(kind="rf", frequency=frequency, flip="pi")

    @classmethod
    def timed(cls, kind: str, frequency: float, rabi_frequency: float, duration: float) -> "Pulse":
        return cls(kind=kind, frequency=frequency, rabi_frequency=rabi_frequency, duration=duration)


def pi_duration(rabi_frequency: float) -> float:
    """Duration in ns of an on-resonance pi pulse at Omega in MHz."""
    if rabi_frequency <= 0:
        raise ParameterError(f"rabi_frequency must be positive, got {rabi_frequency}")
    return 500.0 / rabi_frequency


@dataclass(frozen=True)
class PulseSequence:
    """Ordered preparation pulses plus the readout laser length.

    ``readout_pulse_length`` is the t_p of the final laser pulse; a
    sequence with ``readout_pulse_length=None`` is preparation-only and
    can only be used to inspect the prepared populations.
    """

    pulses: tuple[Pulse, ...]
    field: float
    readout_pulse_length: float | None = 3000.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.field < 0:
            raise ParameterError(f"field must be non-negative, got {self.field} G")
        if self.readout_pulse_length is not None and self.readout_pulse_length <= 0:
            raise ParameterError("readout_pulse_length must be positive or None")


@dataclass(frozen=True)
class SequenceResult:
    """Readout trace of a sequence next to its no-preparation reference."""

    trace: FluorescenceTrace
    reference: FluorescenceTrace
    signal: float
    prepared: PopulationVector
    field: float


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: np.ndarray
    signals: np.ndarray


@lru_cache(maxsize=128)
def _ground_eigensystem(params: NvParameters, field: float) -> Eigensystem:
    return eigensystem(build_hamiltonian(params, field, "ground"))


@lru_cache(maxsize=64)
def _cached_initialized(
    params: NvParameters, rates: RateParameters, field: float
) -> PopulationVector:
    return initialized_populations(params, rates, field)


def _initialized(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    flip_flop_override: FlipFlopOverride | None,
) -> PopulationVector:
    # override maps are unhashable and rare; only the plain case is cached
    if flip_flop_override is None:
        return _cached_initialized(params, rates, field)
    return initialized_populations(params, rates, field, flip_flop_override)


@lru_cache(maxsize=32)
def _readout_context(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    bin_width: float,
    duration: float,
) -> tuple[RateMatrix, np.ndarray, FluorescenceTrace]:
    """Laser-on matrix, counting propagator and reference trace for sweeps."""
    matrix = build_rate_matrix(params, rates, field, laser_on=True)
    propagator = _counting_propagator(matrix, rates, bin_width)
    reference = trace_from_population(
        _cached_initialized(params, rates, field),
        params, rates, field, duration, bin_width,
        rate_matrix=matrix, counting_propagator=propagator,
    )
    return matrix, propagator, reference


def _addressed_pairs(
    basis: tuple[SpinStateLabel, ...], kind: str
) -> tuple[tuple[int, int], ...]:
    """Ground-level index pairs a pulse kind can drive.

    mw: Delta m_S = +-1 at fixed m_I; rf: Delta m_I = +-1 at fixed m_S.
    Ordering is fixed so that multi-pair application is deterministic.
    """
    pairs = []
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            if j <= i:
                continue
            if kind == "mw" and abs(a.m_s - b.m_s) == 1 and a.m_i == b.m_i:
                pairs.append((i, j))
            elif kind == "rf" and a.m_s == b.m_s and abs(a.m_i - b.m_i) == 1:
                pairs.append((i, j))
    return tuple(pairs)


def transfer_fraction(rabi_frequency: float, detuning: float, duration: float) -> float:
    """Two-level population transfer for a rectangular pulse.

    Omega and delta in MHz, duration in ns.  Bounded in [0, 1] for all
    arguments.
    """
    if rabi_frequency <= 0:
        raise ParameterError(f"rabi_frequency must be positive, got {rabi_frequency}")
    if duration < 0:
        raise ParameterError(f"duration must be non-negative, got {duration}")
    effective = float(np.hypot(rabi_frequency, detuning))
    amplitude = (rabi_frequency / effective) ** 2
    return amplitude * float(np.sin(np.pi * effective * duration * 1e-3) ** 2)


def _resolve_symbolic(
    pulse: Pulse,
    eig: Eigensystem,
    pairs: tuple[tuple[int, int], ...],
    ground: tuple[SpinStateLabel, ...],
) -> tuple[int, int]:
    """Pick the unique pair resonant with a symbolic flip."""
    detunings = []
    for i, j in pairs:
        f = transition_frequency(eig, ground[i], ground[j])
        detunings.append((abs(pulse.frequency - f), (i, j)))
    detunings.sort(key=lambda item: item[0])
    if len(detunings) > 1 and detunings[1][0] - detunings[0][0] < 1e-6:
        raise AmbiguousStateError(
            f"{pulse.kind} flip at {pulse.frequency} MHz matches two transitions "
            f"within 1e-6 MHz"
        )
    return detunings[0][1]


def apply_pulse(
    populations: PopulationVector,
    pulse: Pulse,
    eig: Eigensystem,
    selectivity_window: float = SELECTIVITY_WINDOW,
) -> PopulationVector:
    """Apply one mw/rf pulse to ground-manifold populations.

    For each addressed ground pair the transfer fraction T moves
    population as (p_a, p_b) -> ((1-T) p_a + T p_b, T p_a + (1-T) p_b),
    which conserves the total exactly.  Symbolic flips act with T = 1
    (pi) or T = 1/2 (pi_half) on the resonant pair only.  Laser pulses
    are time evolution, not rotations, and are rejected here.
    """
    if pulse.kind == "laser":
        raise ParameterError("laser pulses are applied by the photodynamics propagator")
    ground = tuple(lab for lab in populations.basis if lab.manifold == "ground")
    if eig.basis != ground:
        raise StateError("eigensystem basis does not match the ground manifold")
    offset = basis_index(populations.basis, ground[0])
    pairs = _addressed_pairs(ground, pulse.kind)
    values = populations.values.copy()

    def exchange(i: int, j: int, fraction: float) -> None:
        a, b = values[offset + i], values[offset + j]
        values[offset + i] = (1.0 - fraction) * a + fraction * b
        values[offset + j] = fraction * a + (1.0 - fraction) * b

    if pulse.flip is not None:
        i, j = _resolve_symbolic(pulse, eig, pairs, ground)
        exchange(i, j, 1.0 if pulse.flip == "pi" else 0.5)
        return PopulationVector(values, populations.basis)

    for i, j in pairs:
        f = transition_frequency(eig, ground[i], ground[j])
        delta = pulse.frequency - f
        if abs(delta) >= selectivity_window * pulse.rabi_frequency:
            continue
        exchange(i, j, transfer_fraction(pulse.rabi_frequency, delta, pulse.duration))
    return PopulationVector(values, populations.basis)


def prepared_populations(
    sequence: PulseSequence,
    params: NvParameters,
    rates: RateParameters,
    flip_flop_override: FlipFlopOverride | None = None,
    selectivity_window: float = SELECTIVITY_WINDOW,
) -> PopulationVector:
    """Populations after initialization and the preparation pulses.

    Initialization is what a long laser pulse leaves behind: the laser-on
    steady state relaxed back into the ground manifold.  Ground-state
    lifetimes are orders of magnitude longer than a sequence, so no decay
    is applied between rotations; laser pulses inside the sequence evolve
    the populations for their duration instead.
    """
    state = _initialized(params, rates, sequence.field, flip_flop_override)
    eig = _ground_eigensystem(params, sequence.field)
    for pulse in sequence.pulses:
        if pulse.kind == "laser":
            on = build_rate_matrix(
                params, rates, sequence.field, laser_on=True,
                flip_flop_override=flip_flop_override,
            )
            state = evolve(on, state, pulse.duration, pulse.duration).final()
        else:
            state = apply_pulse(state, pulse, eig, selectivity_window)
    return state


def run_sequence(
    sequence: PulseSequence,
    params: NvParameters,
    rates: RateParameters,
    bin_width: float = 2.0,
    flip_flop_override: FlipFlopOverride | None = None,
    selectivity_window: float = SELECTIVITY_WINDOW,
) -> SequenceResult:
    """Execute a sequence and read it out.

    Returns the readout trace, the reference trace of the bare
    initialized state, and the signal: reference counts minus sequence
    counts accumulated over the readout pulse (missing photons are
    positive signal, matching the dip convention of swept spectra).
    """
    if sequence.readout_pulse_length is None:
        raise ParameterError("sequence is preparation-only; no readout to simulate")
    t_p = sequence.readout_pulse_length
    duration = float(bin_width * np.ceil(t_p / bin_width - 1e-9))
    prepared = prepared_populations(
        sequence, params, rates, flip_flop_override, selectivity_window
    )
    if flip_flop_override is None:
        matrix, propagator, ref_trace = _readout_context(
            params, rates, sequence.field, bin_width, duration
        )
        trace = trace_from_population(
            prepared, params, rates, sequence.field, duration, bin_width,
            rate_matrix=matrix, counting_propagator=propagator,
        )
    else:
        reference = _initialized(params, rates, sequence.field, flip_flop_override)
        trace = trace_from_population(
            prepared, params, rates, sequence.field, duration, bin_width,
            flip_flop_override=flip_flop_override,
        )
        ref_trace = trace_from_population(
            reference, params, rates, sequence.field, duration, bin_width,
            flip_flop_override=flip_flop_override,
        )
    signal = cumulative_signal(ref_trace, trace, t_p)
    return SequenceResult(
        trace=trace, reference=ref_trace, signal=signal,
        prepared=prepared, field=sequence.field,
    )


SWEEP_AXES = ("frequency", "duration", "field")


def sweep(
    template: PulseSequence,
    params: NvParameters,
    rates: RateParameters,
    axis: str,
    grid: np.ndarray,
    pulse_index: int | None = None,
    bin_width: float = 2.0,
    flip_flop_override: FlipFlopOverride | None = None,
    selectivity_window: float = SELECTIVITY_WINDOW,
) -> SweepResult:
    """Signal versus one swept parameter, one run_sequence per point.

    axis "frequency" or "duration" requires pulse_index into the
    template's pulses; axis "field" re-runs the whole sequence per field
    value.
    """
    if axis not in SWEEP_AXES:
        raise ParameterError(f"unknown sweep axis {axis!r}")
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ParameterError("sweep grid is empty")
    if axis in ("frequency", "duration"):
        if pulse_index is None:
            raise ParameterError(f"axis {axis!r} needs a pulse_index")
        if not 0 <= pulse_index < len(template.pulses):
            raise ParameterError(
                f"pulse_index {pulse_index} outside sequence of {len(template.pulses)} pulses"
            )
        if template.pulses[pulse_index].kind == "laser" and axis == "frequency":
            raise ParameterError("laser pulses have no frequency to sweep")

    signals = np.empty(grid.size)
    for k, value in enumerate(grid):
        if axis == "field":
            seq = replace(template, field=float(value))
        else:
            pulses = list(template.pulses)
            pulses[pulse_index] = replace(pulses[pulse_index], **{axis: float(value)})
            seq = replace(template, pulses=tuple(pulses))
        signals[k] = run_sequence(
            seq, params, rates, bin_width, flip_flop_override, selectivity_window
        ).signal
    return SweepResult(axis=axis, values=grid, signals=signals)
