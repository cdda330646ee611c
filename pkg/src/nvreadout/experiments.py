"""Complete simulated experiments: readout comparison, Rabi, spectra, scans.

Every function here is a deterministic pure map from (parameters, rates,
grids) to tabular results, and each result carries a provenance dict with
everything needed to reproduce it bit for bit.

Spectra follow the fluorescence-dip convention: the ``counts`` column dips
at resonance, and ``contrast`` is the inverted, baseline-normalized
version that peaks there.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Mapping

import numpy as np

from ._version import __version__
from .errors import ParameterError
from .params import NvParameters, RateParameters
from .photodynamics import (
    FlipFlopOverride,
    FluorescenceTrace,
    SnrCurve,
    _counting_propagator,
    build_rate_matrix,
    snr_curve,
    trace_from_population,
)
from .pulses import (
    DEFAULT_MW_RABI,
    Pulse,
    PulseSequence,
    _ground_eigensystem,
    _initialized,
    pi_duration,
    run_sequence,
    sweep,
)
from .spin_model import build_hamiltonian, eigensystem, transition_frequency
from .states import PopulationVector, SpinStateLabel, basis_index, nuclear_projections

READOUT_MODES = ("conventional", "enhanced")

# probe Rabi frequencies low enough to resolve the structures being swept:
# 0.5 MHz against the 2.166 MHz hyperfine triplet, 0.1 MHz against the
# 0.31 MHz nuclear Zeeman splitting at 500 G
ODMR_PROBE_RABI = 0.5
NUCLEAR_PROBE_RABI = 0.1


def _provenance(experiment: str, params: NvParameters, rates: RateParameters | None = None, **extra) -> dict:
    out: dict = {"experiment": experiment, "version": __version__, "params": asdict(params)}
    if rates is not None:
        out["rates"] = asdict(rates)
    out.update(extra)
    return out


def _ground(m_s: int, m_i: float) -> SpinStateLabel:
    return SpinStateLabel(m_s=m_s, m_i=m_i, manifold="ground")


def _swap(values: np.ndarray, basis: tuple[SpinStateLabel, ...], a: SpinStateLabel, b: SpinStateLabel) -> None:
    i, j = basis_index(basis, a), basis_index(basis, b)
    values[i], values[j] = values[j], values[i]


@dataclass(frozen=True)
class ReadoutComparison:
    """Fluorescence responses of bright, conventional-dark and enhanced-dark states."""

    field: float
    bright: FluorescenceTrace
    conventional: FluorescenceTrace
    enhanced: FluorescenceTrace
    signal_ratio: float
    snr_conventional: SnrCurve
    snr_enhanced: SnrCurve
    provenance: dict

    @property
    def times(self) -> np.ndarray:
        return self.bright.bin_edges()[1:]

    @property
    def difference_conventional(self) -> np.ndarray:
        return self.bright.values - self.conventional.values

    @property
    def difference_enhanced(self) -> np.ndarray:
        return self.bright.values - self.enhanced.values

    @property
    def max_snr_ratio(self) -> float:
        return self.snr_enhanced.max_snr / self.snr_conventional.max_snr


def prepared_readout_states(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    flip_flop_override: FlipFlopOverride | None = None,
) -> dict[str, PopulationVector]:
    """Initialized state and its ideally prepared dark counterparts.

    The conventional dark state moves the |0,top> population to |-1,top>
    (the operating mw transition); the enhanced dark state then walks the
    nuclear spin down to the bottom projection with one exchange per rf
    transition, exactly what calibrated pi pulses do.  Ideal swaps are
    used so the comparison isolates the photodynamics; the pulsed
    preparation lives in the swept experiments.
    """
    init = _initialized(params, rates, field, flip_flop_override)
    top = max(nuclear_projections(params))
    bright = init.values.copy()
    conventional = bright.copy()
    _swap(conventional, init.basis, _ground(0, top), _ground(-1, top))
    enhanced = conventional.copy()
    projections = sorted(nuclear_projections(params), reverse=True)
    for upper, lower in zip(projections, projections[1:]):
        _swap(enhanced, init.basis, _ground(-1, upper), _ground(-1, lower))
    return {
        "bright": init,
        "conventional": PopulationVector(conventional, init.basis),
        "enhanced": PopulationVector(enhanced, init.basis),
    }


def conventional_vs_enhanced(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    bin_width: float = 2.0,
    duration: float = 3000.0,
    shots: int = 1,
    flip_flop_override: FlipFlopOverride | None = None,
) -> ReadoutComparison:
    """Bright/dark traces, the 3x signal cascade and both SNR curves.

    ``signal_ratio`` integrates both dark-state deficits over the full
    trace; the SNR curves are evaluated on every bin edge.
    """
    states = prepared_readout_states(params, rates, field, flip_flop_override)
    matrix = build_rate_matrix(
        params, rates, field, laser_on=True, flip_flop_override=flip_flop_override
    )
    propagator = _counting_propagator(matrix, rates, bin_width)
    traces = {
        name: trace_from_population(
            state, params, rates, field, duration, bin_width,
            rate_matrix=matrix, counting_propagator=propagator,
        )
        for name, state in states.items()
    }
    n_bright = traces["bright"].values.sum()
    deficit_conv = n_bright - traces["conventional"].values.sum()
    deficit_enh = n_bright - traces["enhanced"].values.sum()
    return ReadoutComparison(
        field=field,
        bright=traces["bright"],
        conventional=traces["conventional"],
        enhanced=traces["enhanced"],
        signal_ratio=float(deficit_enh / deficit_conv),
        snr_conventional=snr_curve(
            traces["bright"], traces["conventional"], shots=shots, mode="conventional"
        ),
        snr_enhanced=snr_curve(
            traces["bright"], traces["enhanced"], shots=shots, mode="enhanced"
        ),
        provenance=_provenance(
            "conventional_vs_enhanced", params, rates,
            field=field, bin_width=bin_width, duration=duration, shots=shots,
        ),
    )


@dataclass(frozen=True)
class RabiOscillation:
    mode: str
    durations: np.ndarray
    signals: np.ndarray
    rabi_frequency: float
    provenance: dict

    @property
    def contrast(self) -> float:
        """Peak-to-peak signal amplitude of the oscillation."""
        return float(self.signals.max() - self.signals.min())


def _operating_transition(params: NvParameters, field: float) -> float:
    eig = _ground_eigensystem(params, field)
    top = max(nuclear_projections(params))
    return transition_frequency(eig, _ground(0, top), _ground(-1, top))


def _rf_chain(params: NvParameters, field: float) -> tuple[Pulse, ...]:
    """The rf pi pulses walking |-1, top> down to |-1, bottom>."""
    eig = _ground_eigensystem(params, field)
    projections = sorted(nuclear_projections(params), reverse=True)
    return tuple(
        Pulse.rf_pi(transition_frequency(eig, _ground(-1, upper), _ground(-1, lower)))
        for upper, lower in zip(projections, projections[1:])
    )


def rabi_experiment(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    mode: str,
    durations: np.ndarray,
    mw_rabi: float = DEFAULT_MW_RABI,
    bin_width: float = 2.0,
    readout_pulse_length: float = 3000.0,
) -> RabiOscillation:
    """Electron Rabi oscillations read out conventionally or enhanced.

    The mw drive duration is swept on the operating transition; enhanced
    mode appends the rf pi chain before the readout laser pulse.
    """
    if mode not in READOUT_MODES:
        raise ParameterError(f"mode must be one of {READOUT_MODES}, got {mode!r}")
    drive = Pulse.timed("mw", _operating_transition(params, field), mw_rabi, 0.0)
    tail = _rf_chain(params, field) if mode == "enhanced" else ()
    template = PulseSequence((drive,) + tail, field, readout_pulse_length)
    result = sweep(template, params, rates, "duration", durations, pulse_index=0, bin_width=bin_width)
    return RabiOscillation(
        mode=mode,
        durations=result.values,
        signals=result.signals,
        rabi_frequency=mw_rabi,
        provenance=_provenance(
            "rabi_experiment", params, rates, field=field, mode=mode,
            mw_rabi=mw_rabi, durations=list(map(float, durations)),
            bin_width=bin_width, readout_pulse_length=readout_pulse_length,
        ),
    )


@dataclass(frozen=True)
class Spectrum:
    """Swept-frequency spectrum in the fluorescence-dip convention."""

    kind: str
    field: float
    frequencies: np.ndarray
    counts: np.ndarray
    signal: np.ndarray
    contrast: np.ndarray
    provenance: dict


def _reference_counts(
    params: NvParameters, rates: RateParameters, field: float,
    bin_width: float, readout_pulse_length: float,
) -> float:
    empty = PulseSequence((), field, readout_pulse_length)
    result = run_sequence(empty, params, rates, bin_width)
    return float(result.reference.values[: result.reference.n_bins].sum())


def _spectrum_from_sweep(
    kind: str,
    params: NvParameters,
    rates: RateParameters,
    field: float,
    template: PulseSequence,
    pulse_index: int,
    frequencies: np.ndarray,
    bin_width: float,
    provenance: dict,
) -> Spectrum:
    result = sweep(
        template, params, rates, "frequency", frequencies, pulse_index=pulse_index,
        bin_width=bin_width,
    )
    reference = _reference_counts(
        params, rates, field, bin_width, template.readout_pulse_length
    )
    counts = reference - result.signals
    return Spectrum(
        kind=kind,
        field=field,
        frequencies=result.values,
        counts=counts,
        signal=result.signals,
        contrast=result.signals / reference,
        provenance=provenance,
    )


def odmr_spectrum(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    frequencies: np.ndarray,
    rabi_frequency: float = ODMR_PROBE_RABI,
    bin_width: float = 2.0,
    readout_pulse_length: float = 3000.0,
) -> Spectrum:
    """Fluorescence versus swept mw frequency.

    The probe is a pi pulse at a Rabi frequency low enough to resolve the
    hyperfine structure (default 0.5 MHz against a 2.166 MHz splitting).
    """
    probe = Pulse.timed("mw", float(frequencies[0]), rabi_frequency, pi_duration(rabi_frequency))
    template = PulseSequence((probe,), field, readout_pulse_length)
    return _spectrum_from_sweep(
        "odmr", params, rates, field, template, 0, frequencies, bin_width,
        _provenance(
            "odmr_spectrum", params, rates, field=field,
            rabi_frequency=rabi_frequency, bin_width=bin_width,
            readout_pulse_length=readout_pulse_length,
            frequency_grid=[float(frequencies[0]), float(frequencies[-1]), len(frequencies)],
        ),
    )


ELECTRON_BRANCHES = (0, -1)


def nuclear_resonance_spectrum(
    params: NvParameters,
    rates: RateParameters,
    field: float,
    electron_branch: int,
    frequencies: np.ndarray,
    rabi_frequency: float = NUCLEAR_PROBE_RABI,
    bin_width: float = 2.0,
    readout_pulse_length: float = 3000.0,
) -> Spectrum:
    """Single nuclear spin resonance detected through the optical signal.

    The sequence steps from the initialized state to |branch, middle>,
    applies the swept rf probe there, then retraces the fixed pulses so
    that off resonance everything returns to the bright state.  Population
    parked by the probe stays behind and shows up as a dip, twice as deep
    when it must pass the singlet twice.
    """
    if electron_branch not in ELECTRON_BRANCHES:
        raise ParameterError(f"electron_branch must be 0 or -1, got {electron_branch}")
    eig = _ground_eigensystem(params, field)
    top = max(nuclear_projections(params))
    projections = sorted(nuclear_projections(params), reverse=True)
    middle = projections[1]

    into: list[Pulse] = []
    if electron_branch == -1:
        into.append(Pulse.mw_pi(transition_frequency(eig, _ground(0, top), _ground(-1, top))))
    into.append(Pulse.rf_pi(
        transition_frequency(eig, _ground(electron_branch, top), _ground(electron_branch, middle))
    ))
    probe = Pulse.timed("rf", float(frequencies[0]), rabi_frequency, pi_duration(rabi_frequency))
    back = tuple(reversed(into))
    template = PulseSequence(tuple(into) + (probe,) + back, field, readout_pulse_length)
    return _spectrum_from_sweep(
        "nuclear_resonance", params, rates, field, template, len(into), frequencies, bin_width,
        _provenance(
            "nuclear_resonance_spectrum", params, rates, field=field,
            electron_branch=electron_branch, rabi_frequency=rabi_frequency,
            bin_width=bin_width, readout_pulse_length=readout_pulse_length,
            frequency_grid=[float(frequencies[0]), float(frequencies[-1]), len(frequencies)],
        ),
    )


@dataclass(frozen=True)
class EsrSpectrum:
    """Lorentzian lineshape synthesis of the excited-state 0 <-> -1 transitions."""

    field: float
    frequencies: np.ndarray
    response: np.ndarray
    line_centers: tuple[float, ...]
    linewidth: float
    provenance: dict


def excited_state_esr(
    params: NvParameters,
    field: float,
    frequencies: np.ndarray,
    lifetime_ns: float = 10.0,
) -> EsrSpectrum:
    """Excited-state ESR lines, lifetime-broadened.

    A lineshape synthesis rather than a dynamical simulation: the rate
    model has no coherent mw drive in the excited manifold.  One unit
    Lorentzian per nuclear projection at the 0 <-> -1 transition
    frequency, FWHM = 1/(pi * lifetime).  Valid away from the
    anticrossing, where the transition labels are unambiguous.
    """
    if lifetime_ns <= 0:
        raise ParameterError(f"lifetime_ns must be positive, got {lifetime_ns}")
    frequencies = np.asarray(frequencies, dtype=float)
    eig = eigensystem(build_hamiltonian(params, field, "excited"))
    centers = tuple(sorted(
        transition_frequency(
            eig, SpinStateLabel(0, m, "excited"), SpinStateLabel(-1, m, "excited")
        )
        for m in nuclear_projections(params)
    ))
    width = 1e3 / (np.pi * lifetime_ns)
    half = width / 2.0
    response = np.zeros_like(frequencies)
    for center in centers:
        response += half**2 / ((frequencies - center) ** 2 + half**2)
    return EsrSpectrum(
        field=field,
        frequencies=frequencies,
        response=response,
        line_centers=centers,
        linewidth=float(width),
        provenance=_provenance(
            "excited_state_esr", params, field=field, lifetime_ns=lifetime_ns,
            frequency_grid=[float(frequencies[0]), float(frequencies[-1]), len(frequencies)],
        ),
    )


@dataclass(frozen=True)
class FieldScan:
    """Max-SNR enhancement and optimal pulse lengths versus magnetic field."""

    fields: np.ndarray
    enhancement: np.ndarray
    max_snr_conventional: np.ndarray
    max_snr_enhanced: np.ndarray
    optimal_conventional: np.ndarray
    optimal_enhanced: np.ndarray
    provenance: dict

    @property
    def peak_field(self) -> float:
        return float(self.fields[int(np.argmax(self.enhancement))])


def snr_vs_field(
    params: NvParameters,
    rates: RateParameters,
    fields: np.ndarray,
    bin_width: float = 2.0,
    duration: float = 3000.0,
    shots: int = 1,
) -> FieldScan:
    """Readout comparison swept over the magnetic field."""
    fields = np.asarray(fields, dtype=float)
    if fields.size == 0:
        raise ParameterError("field grid is empty")
    columns = {name: np.empty(fields.size) for name in
               ("enhancement", "conv", "enh", "t_conv", "t_enh")}
    for k, field in enumerate(fields):
        comparison = conventional_vs_enhanced(
            params, rates, float(field), bin_width=bin_width, duration=duration, shots=shots
        )
        columns["enhancement"][k] = comparison.max_snr_ratio
        columns["conv"][k] = comparison.snr_conventional.max_snr
        columns["enh"][k] = comparison.snr_enhanced.max_snr
        columns["t_conv"][k] = comparison.snr_conventional.optimal_pulse_length
        columns["t_enh"][k] = comparison.snr_enhanced.optimal_pulse_length
    return FieldScan(
        fields=fields,
        enhancement=columns["enhancement"],
        max_snr_conventional=columns["conv"],
        max_snr_enhanced=columns["enh"],
        optimal_conventional=columns["t_conv"],
        optimal_enhanced=columns["t_enh"],
        provenance=_provenance(
            "snr_vs_field", params, rates, bin_width=bin_width, duration=duration,
            shots=shots, field_grid=[float(fields[0]), float(fields[-1]), len(fields)],
        ),
    )


def dip_positions(
    frequencies: np.ndarray, counts: np.ndarray, minimum_contrast: float = 0.02
) -> np.ndarray:
    """Frequencies of strict local minima deeper than minimum_contrast.

    Depth is measured relative to the maximum of the counts column, which
    for the spectra above is the off-resonance baseline.  Each position is
    refined by the vertex of the parabola through the minimum and its two
    neighbors, so line splittings resolve well below the grid step.
    """
    frequencies = np.asarray(frequencies, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if frequencies.shape != counts.shape:
        raise ParameterError("frequencies and counts must have matching shapes")
    baseline = counts.max()
    if baseline <= 0:
        raise ParameterError("counts column has no positive baseline")
    found = []
    for i in range(1, len(counts) - 1):
        if counts[i] < counts[i - 1] and counts[i] < counts[i + 1]:
            if (baseline - counts[i]) / baseline >= minimum_contrast:
                left, mid, right = counts[i - 1 : i + 2]
                curvature = left - 2.0 * mid + right
                shift = 0.5 * (left - right) / curvature if curvature > 0 else 0.0
                step = frequencies[i + 1] - frequencies[i]
                found.append(frequencies[i] + shift * step)
    return np.asarray(found)
