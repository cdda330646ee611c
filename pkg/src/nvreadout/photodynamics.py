"""Classical rate model of the NV optical cycle and photon counting.

The model tracks one population per level: both triplet manifolds plus
the metastable singlet, 21 levels for 14N.  Optical excitation and
radiative decay conserve the spin projections; the intersystem crossing
is strongly m_S-selective and conserves m_I; the singlet decays to the
m_S = 0 ground level of the same m_I.  Near the excited-state level
anticrossing, hyperfine flip-flops exchange population within coupled
excited pairs at a rate calibrated so the per-optical-cycle flip
probability equals the quantum mixing probability of the pair.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.linalg import expm

from .errors import DegenerateSteadyStateError, NumericalError, ParameterError, StateError
from .params import NvParameters, RateParameters
from .spin_model import flip_flop_probability, flip_flop_pairs
from .states import (
    PopulationVector,
    SpinStateLabel,
    basis_index,
    clamp_noise,
    full_basis,
    nuclear_projections,
)

# regularizer in r = k_out * p / (1 - p + EPS); keeps the forced p = 1
# exchange rate finite while leaving moderate probabilities untouched
FLIP_FLOP_EPS = 1e-6

FlipFlopOverride = Mapping[frozenset[SpinStateLabel], float]


@dataclass(frozen=True)
class RateMatrix:
    """Generator M of dp/dt = M p over the full level basis.

    Columns sum to zero: every process moves population, none creates or
    destroys it.
    """

    matrix: np.ndarray
    basis: tuple[SpinStateLabel, ...]
    laser_on: bool
    field: float


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    populations: np.ndarray
    basis: tuple[SpinStateLabel, ...]

    def final(self) -> PopulationVector:
        return PopulationVector(self.populations[-1], self.basis)


@dataclass(frozen=True)
class FluorescenceTrace:
    """Expected detected photons per time bin for one shot."""

    bin_width: float
    values: np.ndarray
    initial_state: SpinStateLabel | None = None

    @property
    def n_bins(self) -> int:
        return len(self.values)

    @property
    def duration(self) -> float:
        return self.n_bins * self.bin_width

    def bin_edges(self) -> np.ndarray:
        return self.bin_width * np.arange(self.n_bins + 1)


@dataclass(frozen=True)
class SnrCurve:
    """Single-shot signal, shot noise and SNR versus readout length."""

    pulse_lengths: np.ndarray
    signal: np.ndarray
    noise: np.ndarray
    snr: np.ndarray
    shots: int = 1
    mode: str | None = None

    @property
    def optimal_pulse_length(self) -> float:
        return float(self.pulse_lengths[int(np.argmax(self.snr))])

    @property
    def max_snr(self) -> float:
        return float(self.snr.max())


def _flip_flop_rates(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    override: FlipFlopOverride | None,
) -> dict[frozenset[SpinStateLabel], float]:
    """Exchange rate per coupled pair.

    The rate r = k_out * p / (1 - p + eps) makes the branching ratio of a
    flip against leaving the excited state equal p, with k_out the total
    depopulation rate of the pair's m_S = 0 member (the side through
    which optical cycling enters the pair).  When an override map is
    given it fully replaces the computed probabilities: pairs absent from
    the map do not exchange.
    """
    if override is None:
        probabilities = dict(flip_flop_probability(params, field).pair_probabilities)
    else:
        probabilities = {pair: 0.0 for pair in flip_flop_pairs(params)}
        for pair, value in override.items():
            if pair not in probabilities:
                raise StateError(f"override pair {set(map(str, pair))} is not hyperfine-coupled")
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"flip-flop probability must be in [0, 1], got {value}")
            probabilities[pair] = float(value)
    k_out = rates.k_rad + rates.k_isc_0
    return {
        pair: k_out * p / (1.0 - p + FLIP_FLOP_EPS) for pair, p in probabilities.items()
    }


def build_rate_matrix(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    laser_on: bool,
    flip_flop_override: FlipFlopOverride | None = None,
) -> RateMatrix:
    """Assemble the generator of the classical optical cycle.

    Parameters
    ----------
    laser_on:
        With the laser off the excitation terms are dropped; ground
        populations then only receive decay flux and are absorbing.
    flip_flop_override:
        Optional map pair -> probability replacing the computed exchange
        probabilities, e.g. to force a deterministic nuclear cascade.
    """
    if field < 0:
        raise ParameterError(f"field must be non-negative, got {field}")
    basis = full_basis(params)
    index = {label: k for k, label in enumerate(basis)}
    m = np.zeros((len(basis), len(basis)))

    def add(src: SpinStateLabel, dst: SpinStateLabel, rate: float) -> None:
        i, j = index[dst], index[src]
        m[i, j] += rate
        m[j, j] -= rate

    for m_s in (-1, 0, 1):
        for m_i in nuclear_projections(params):
            ground = SpinStateLabel(m_s, m_i, "ground")
            excited = SpinStateLabel(m_s, m_i, "excited")
            if laser_on:
                add(ground, excited, rates.k_exc)
            add(excited, ground, rates.k_rad)
            k_isc = rates.k_isc_0 if m_s == 0 else rates.k_isc_pm1
            if k_isc > 0:
                add(excited, SpinStateLabel(0, m_i, "singlet"), k_isc)
    for m_i in nuclear_projections(params):
        add(SpinStateLabel(0, m_i, "singlet"), SpinStateLabel(0, m_i, "ground"), rates.k_singlet)

    # symmetric excited-state exchange; active regardless of the laser
    # since it lives entirely inside the excited manifold
    for pair, rate in _flip_flop_rates(params, rates, field, flip_flop_override).items():
        if rate == 0.0:
            continue
        a, b = sorted(pair, key=str)
        add(a, b, rate)
        add(b, a, rate)

    return RateMatrix(matrix=m, basis=basis, laser_on=laser_on, field=field)


def evolve(
    rate_matrix: RateMatrix,
    initial: PopulationVector,
    duration: float,
    bin_width: float,
) -> Trajectory:
    """Propagate populations, returning the trajectory at bin edges.

    Uses the scaling-and-squaring matrix exponential of M * bin_width
    once and reapplies it per bin, so cost is independent of stiffness.
    """
    if initial.basis != rate_matrix.basis:
        raise StateError("population vector basis does not match the rate matrix")
    if bin_width <= 0:
        raise ParameterError(f"bin_width must be positive, got {bin_width}")
    if duration < bin_width:
        raise ParameterError("duration must be at least one bin")
    n_bins = int(np.floor(duration / bin_width + 1e-9))
    propagator = expm(rate_matrix.matrix * bin_width)
    populations = np.empty((n_bins + 1, len(rate_matrix.basis)))
    populations[0] = initial.values
    state = initial.values.copy()
    for k in range(n_bins):
        state = propagator @ state
        populations[k + 1] = state
    if not np.all(np.isfinite(populations)):
        raise NumericalError("propagation produced non-finite populations")
    low = populations.min()
    if low < -1e-9:
        raise NumericalError(f"population {low:.3e} below the -1e-09 noise floor")
    populations[populations < 0] = 0.0
    times = bin_width * np.arange(n_bins + 1)
    return Trajectory(times=times, populations=populations, basis=rate_matrix.basis)


def steady_state(rate_matrix: RateMatrix) -> PopulationVector:
    """Unique stationary distribution of the laser-on cycle.

    Computed from the null space of M; uniqueness requires the
    second-smallest singular value to sit clearly above the numerical
    null space, otherwise ``DegenerateSteadyStateError`` is raised.
    """
    if not rate_matrix.laser_on:
        raise ParameterError("steady state is defined for the laser-on matrix")
    m = rate_matrix.matrix
    _, singular_values, v = np.linalg.svd(m)
    scale = max(singular_values[0], 1.0)
    if singular_values[-1] > 1e-9 * scale:
        raise DegenerateSteadyStateError(
            f"no null space found (smallest singular value {singular_values[-1]:.3e})"
        )
    if singular_values[-2] < 1e-8:
        raise DegenerateSteadyStateError(
            "stationary distribution is not unique "
            f"(second singular value {singular_values[-2]:.3e} 1/ns)"
        )
    null = np.real(v[-1])
    if null.sum() < 0:
        null = -null
    null = clamp_noise(null, 1e-9)
    return PopulationVector(null / null.sum(), rate_matrix.basis)


def initialized_populations(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    flip_flop_override: FlipFlopOverride | None = None,
) -> PopulationVector:
    """State produced by a long laser pulse followed by a dark interval.

    The laser-on steady state keeps a large excited and singlet share at
    saturation; what a pulse sequence starts from is that distribution
    relaxed through the decay-only dynamics back into the ground
    manifold.  Ten singlet lifetimes of dark evolution leave a residual
    non-ground population below 1e-4.
    """
    on = build_rate_matrix(params, rates, field, laser_on=True, flip_flop_override=flip_flop_override)
    off = build_rate_matrix(params, rates, field, laser_on=False, flip_flop_override=flip_flop_override)
    settle = 10.0 / rates.k_singlet
    return evolve(off, steady_state(on), settle, settle).final()


def _counting_propagator(
    rate_matrix: RateMatrix, rates: RateParameters, bin_width: float
) -> np.ndarray:
    """Propagator of the populations augmented with a photon counter.

    The extra component integrates detection_efficiency * k_rad * (total
    excited population) exactly over each bin, avoiding quadrature error.
    """
    n = len(rate_matrix.basis)
    augmented = np.zeros((n + 1, n + 1))
    augmented[:n, :n] = rate_matrix.matrix * bin_width
    weights = np.array(
        [rates.detection_efficiency * rates.k_rad if lab.manifold == "excited" else 0.0
         for lab in rate_matrix.basis]
    )
    augmented[n, :n] = weights * bin_width
    return expm(augmented)


def trace_from_population(
    initial: PopulationVector,
    params: NvParameters,
    rates: RateParameters,
    field: float,
    duration: float,
    bin_width: float,
    flip_flop_override: FlipFlopOverride | None = None,
    rate_matrix: RateMatrix | None = None,
    counting_propagator: np.ndarray | None = None,
    initial_label: SpinStateLabel | None = None,
) -> FluorescenceTrace:
    """Photon-count trace of the laser-on evolution from any population.

    ``rate_matrix`` and ``counting_propagator`` may be supplied to reuse
    work across sweeps; they must belong to the same model.
    """
    if bin_width <= 0:
        raise ParameterError(f"bin_width must be positive, got {bin_width}")
    if duration < bin_width:
        raise ParameterError("duration must be at least one bin")
    if rate_matrix is None:
        rate_matrix = build_rate_matrix(
            params, rates, field, laser_on=True, flip_flop_override=flip_flop_override
        )
    if initial.basis != rate_matrix.basis:
        raise StateError("population vector basis does not match the rate matrix")
    if counting_propagator is None:
        counting_propagator = _counting_propagator(rate_matrix, rates, bin_width)
    n_bins = int(np.floor(duration / bin_width + 1e-9))
    state = np.append(initial.values, 0.0)
    values = np.empty(n_bins)
    previous = 0.0
    for k in range(n_bins):
        state = counting_propagator @ state
        values[k] = state[-1] - previous
        previous = state[-1]
    if not np.all(np.isfinite(values)):
        raise NumericalError("photon counting produced non-finite values")
    return FluorescenceTrace(bin_width=bin_width, values=values, initial_state=initial_label)


def fluorescence_trace(
    initial: SpinStateLabel,
    params: NvParameters,
    rates: RateParameters,
    field: float,
    duration: float,
    bin_width: float,
    flip_flop_override: FlipFlopOverride | None = None,
) -> FluorescenceTrace:
    """Readout trace starting from a single ground-manifold level."""
    if initial.manifold != "ground":
        raise StateError(f"readout starts from the ground manifold, got {initial}")
    basis = full_basis(params)
    start = PopulationVector.pure(basis, initial)
    return trace_from_population(
        start, params, rates, field, duration, bin_width,
        flip_flop_override=flip_flop_override, initial_label=initial,
    )


def _photons_up_to(trace: FluorescenceTrace, pulse_length: float) -> float:
    n = int(np.floor(pulse_length / trace.bin_width + 1e-9))
    if n > trace.n_bins:
        raise ParameterError(
            f"pulse length {pulse_length} ns exceeds the trace duration {trace.duration} ns"
        )
    return float(trace.values[:n].sum())


def cumulative_signal(
    bright: FluorescenceTrace, dark: FluorescenceTrace, pulse_length: float
) -> float:
    """Detected-photon difference N_bright - N_dark up to pulse_length."""
    if bright.bin_width != dark.bin_width:
        raise ParameterError("traces must share a bin width")
    return _photons_up_to(bright, pulse_length) - _photons_up_to(dark, pulse_length)


def snr_curve(
    bright: FluorescenceTrace,
    dark: FluorescenceTrace,
    pulse_lengths: np.ndarray | None = None,
    shots: int = 1,
    mode: str | None = None,
) -> SnrCurve:
    """Shot-noise-limited SNR versus readout pulse length.

    SNR(t_p) = (N_b - N_d) / sqrt(N_b + N_d) per shot, scaled by
    sqrt(shots).  The default grid is every bin edge of the traces.
    """
    if bright.bin_width != dark.bin_width:
        raise ParameterError("traces must share a bin width")
    if shots < 1:
        raise ParameterError(f"shots must be >= 1, got {shots}")
    if not (np.any(bright.values) or np.any(dark.values)):
        raise NumericalError("both traces are identically zero")
    if pulse_lengths is None:
        limit = min(bright.n_bins, dark.n_bins)
        pulse_lengths = bright.bin_width * np.arange(1, limit + 1)
    pulse_lengths = np.asarray(pulse_lengths, dtype=float)
    cum_b = np.array([_photons_up_to(bright, t) for t in pulse_lengths])
    cum_d = np.array([_photons_up_to(dark, t) for t in pulse_lengths])
    signal = cum_b - cum_d
    total = cum_b + cum_d
    noise = np.sqrt(total)
    snr = np.zeros_like(signal)
    positive = total > 0
    snr[positive] = signal[positive] / noise[positive] * np.sqrt(shots)
    return SnrCurve(
        pulse_lengths=pulse_lengths, signal=signal, noise=noise, snr=snr,
        shots=shots, mode=mode,
    )


def theoretical_enhancement(nuclear_spins: list[float] | tuple[float, ...]) -> float:
    """Ideal max-SNR gain sqrt(1 + sum_n 2 I_n) from ancilla nuclear spins.

    Each spin I contributes 2I extra dark states reachable by radio
    frequency pulses, so the photon-count deficit grows (1 + sum 2 I)-fold
    while the shot noise only grows with its square root.  An empty list
    returns 1.
    """
    total = 0.0
    for spin in nuclear_spins:
        if abs(2 * spin - round(2 * spin)) > 1e-12 or spin <= 0:
            raise ParameterError(f"nuclear spin must be a positive half-integer, got {spin}")
        total += 2 * spin
    return float(np.sqrt(1.0 + total))
