"""Population-level pulse engine: transfer law, selectivity, sequences."""
import numpy as np
import pytest

from nvreadout import (
    AmbiguousStateError,
    ParameterError,
    PopulationVector,
    Pulse,
    PulseSequence,
    SpinStateLabel,
    apply_pulse,
    cumulative_signal,
    initialized_populations,
    pi_duration,
    prepared_populations,
    run_sequence,
    sweep,
    transfer_fraction,
    transition_frequency,
)
from nvreadout.pulses import SELECTIVITY_WINDOW, _ground_eigensystem
from nvreadout.states import full_basis


def ground_label(m_s: int, m_i: float) -> SpinStateLabel:
    return SpinStateLabel(m_s, m_i, "ground")


def random_state(params, rng) -> PopulationVector:
    basis = full_basis(params)
    raw = rng.random(len(basis))
    return PopulationVector(raw / raw.sum(), basis)


def test_transfer_fraction_closed_form(rng):
    for _ in range(200):
        omega = rng.uniform(0.01, 20.0)
        delta = rng.uniform(-40.0, 40.0)
        duration = rng.uniform(0.0, 5000.0)
        effective = np.sqrt(omega**2 + delta**2)
        expected = (omega**2 / effective**2) * np.sin(np.pi * effective * duration * 1e-3) ** 2
        value = transfer_fraction(omega, delta, duration)
        assert value == pytest.approx(expected, abs=1e-12)
        assert 0.0 <= value <= 1.0


def test_transfer_fraction_resonant_landmarks():
    omega = 7.0
    assert transfer_fraction(omega, 0.0, pi_duration(omega)) == pytest.approx(1.0, abs=1e-12)
    assert transfer_fraction(omega, 0.0, 2 * pi_duration(omega)) == pytest.approx(0.0, abs=1e-12)
    assert transfer_fraction(omega, 0.0, 0.0) == 0.0


def test_pi_duration_inverse_of_rabi():
    assert pi_duration(10.0) == 50.0
    assert pi_duration(0.5) == 1000.0
    with pytest.raises(ParameterError):
        pi_duration(0.0)


def test_symbolic_pi_swaps_exactly_and_involutes(params14, rates):
    field = 350.0
    state = initialized_populations(params14, rates, field)
    eig = _ground_eigensystem(params14, field)
    frequency = transition_frequency(eig, ground_label(0, 1), ground_label(-1, 1))
    pulse = Pulse.mw_pi(frequency)

    flipped = apply_pulse(state, pulse, eig)
    i = state.basis.index(ground_label(0, 1))
    j = state.basis.index(ground_label(-1, 1))
    assert flipped.values[i] == pytest.approx(state.values[j], abs=1e-15)
    assert flipped.values[j] == pytest.approx(state.values[i], abs=1e-15)
    untouched = [k for k in range(len(state.basis)) if k not in (i, j)]
    assert np.array_equal(flipped.values[untouched], state.values[untouched])

    back = apply_pulse(flipped, pulse, eig)
    assert np.max(np.abs(back.values - state.values)) < 1e-12


def test_pi_half_moves_half_the_population_difference(params14, rates):
    field = 350.0
    state = initialized_populations(params14, rates, field)
    eig = _ground_eigensystem(params14, field)
    frequency = transition_frequency(eig, ground_label(0, 1), ground_label(-1, 1))
    half = apply_pulse(state, Pulse(kind="mw", frequency=frequency, flip="pi_half"), eig)
    i = state.basis.index(ground_label(0, 1))
    j = state.basis.index(ground_label(-1, 1))
    mean = 0.5 * (state.values[i] + state.values[j])
    assert half.values[i] == pytest.approx(mean, abs=1e-15)
    assert half.values[j] == pytest.approx(mean, abs=1e-15)


def test_timed_pulse_conserves_population(params14, rng):
    eig = _ground_eigensystem(params14, 410.0)
    state = random_state(params14, rng)
    for _ in range(20):
        kind = "mw" if rng.random() < 0.5 else "rf"
        pulse = Pulse.timed(kind, rng.uniform(1.0, 3000.0), rng.uniform(0.05, 10.0),
                            rng.uniform(0.0, 2000.0))
        state = apply_pulse(state, pulse, eig)
        assert state.values.sum() == pytest.approx(1.0, abs=1e-12)
        assert state.values.min() >= 0.0


def test_far_detuned_pulse_is_identity(params14, rates):
    field = 410.0
    state = initialized_populations(params14, rates, field)
    eig = _ground_eigensystem(params14, field)
    # 1 MHz Rabi, detuned far outside the selectivity window from any line
    pulse = Pulse.timed("mw", 9999.0, 1.0, 500.0)
    after = apply_pulse(state, pulse, eig, selectivity_window=SELECTIVITY_WINDOW)
    assert np.array_equal(after.values, state.values)


def test_equidistant_transitions_are_ambiguous(params14, rates):
    # a symbolic pi exactly midway between two hyperfine-split lines
    # cannot decide which one it addresses
    field = 350.0
    state = initialized_populations(params14, rates, field)
    eig = _ground_eigensystem(params14, field)
    f1 = transition_frequency(eig, ground_label(0, 1), ground_label(-1, 1))
    f2 = transition_frequency(eig, ground_label(0, 0), ground_label(-1, 0))
    with pytest.raises(AmbiguousStateError):
        apply_pulse(state, Pulse.mw_pi(0.5 * (f1 + f2)), eig)


def test_apply_pulse_rejects_laser(params14, rates):
    state = initialized_populations(params14, rates, 500.0)
    eig = _ground_eigensystem(params14, 500.0)
    with pytest.raises(ParameterError):
        apply_pulse(state, Pulse(kind="laser", duration=100.0), eig)


def test_pulse_validation():
    with pytest.raises(ParameterError):
        Pulse(kind="laser", duration=-1.0)
    with pytest.raises(ParameterError):
        Pulse(kind="laser", frequency=100.0, duration=10.0)
    with pytest.raises(ParameterError):
        Pulse(kind="mw", flip="pi")  # no frequency
    with pytest.raises(ParameterError):
        Pulse(kind="mw", frequency=1000.0, flip="three_pi")
    with pytest.raises(ParameterError):
        Pulse(kind="rf", frequency=5.0, rabi_frequency=0.0, duration=10.0)
    with pytest.raises(ParameterError):
        Pulse(kind="rf", frequency=5.0, rabi_frequency=1.0, duration=-2.0)
    with pytest.raises(ParameterError):
        Pulse(kind="noise", frequency=5.0)
    # zero duration is a legal rabi-sweep start
    Pulse(kind="mw", frequency=1000.0, rabi_frequency=1.0, duration=0.0)


def test_sequence_validation(params14):
    with pytest.raises(ParameterError):
        PulseSequence((), -1.0)
    with pytest.raises(ParameterError):
        PulseSequence((), 500.0, readout_pulse_length=0.0)
    PulseSequence((), 500.0, readout_pulse_length=None)


def test_empty_sequence_reads_the_reference(params14, rates):
    sequence = PulseSequence((), 500.0, readout_pulse_length=800.0)
    result = run_sequence(sequence, params14, rates, bin_width=2.0)
    assert np.array_equal(result.trace.values, result.reference.values)
    assert result.signal == 0.0
    prepared = prepared_populations(sequence, params14, rates)
    initialized = initialized_populations(params14, rates, 500.0)
    assert np.array_equal(prepared.values, initialized.values)


def test_sequence_signal_matches_manual_difference(params14, rates):
    field = 500.0
    eig = _ground_eigensystem(params14, field)
    frequency = transition_frequency(eig, ground_label(0, 1), ground_label(-1, 1))
    sequence = PulseSequence((Pulse.mw_pi(frequency),), field, readout_pulse_length=900.0)
    result = run_sequence(sequence, params14, rates, bin_width=2.0)
    manual = cumulative_signal(result.reference, result.trace, 900.0)
    assert result.signal == pytest.approx(manual, abs=1e-15)
    assert result.signal > 0.0


def test_sweep_requires_valid_axis_and_index(params14, rates):
    eig = _ground_eigensystem(params14, 500.0)
    frequency = transition_frequency(eig, ground_label(0, 1), ground_label(-1, 1))
    template = PulseSequence((Pulse.timed("mw", frequency, 5.0, 0.0),), 500.0, 600.0)
    grid = np.array([0.0, 50.0])
    with pytest.raises(ParameterError):
        sweep(template, params14, rates, "wavelength", grid)
    with pytest.raises(ParameterError):
        sweep(template, params14, rates, "duration", grid)  # missing index
    with pytest.raises(ParameterError):
        sweep(template, params14, rates, "duration", grid, pulse_index=5)
    with pytest.raises(ParameterError):
        sweep(template, params14, rates, "duration", np.array([]), pulse_index=0)


def test_frequency_sweep_peaks_on_resonance(params14, rates):
    field = 500.0
    eig = _ground_eigensystem(params14, field)
    frequency = transition_frequency(eig, ground_label(0, 1), ground_label(-1, 1))
    omega = 5.0
    probe = Pulse.timed("mw", frequency, omega, pi_duration(omega))
    template = PulseSequence((probe,), field, readout_pulse_length=600.0)
    # stay inside the main lobe where the response is unimodal
    detunings = np.linspace(-0.8 * omega, 0.8 * omega, 17)
    result = sweep(template, params14, rates, "frequency", frequency + detunings,
                   pulse_index=0)
    assert result.axis == "frequency"
    center = np.argmax(result.signals)
    assert detunings[center] == pytest.approx(0.0, abs=1e-12)
    left = result.signals[: center + 1]
    right = result.signals[center:]
    assert np.all(np.diff(left) > 0)
    assert np.all(np.diff(right) < 0)
