"""Rate-equation propagation, counting, and SNR bookkeeping.

The propagation oracle is a classical RK4 integrator running at a step
fifty times finer than the propagator bins; agreement to 1e-6 validates
the matrix-exponential path independently.
"""
import numpy as np
import pytest

from nvreadout import (
    NumericalError,
    ParameterError,
    PopulationVector,
    SpinStateLabel,
    StateError,
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
from nvreadout.photodynamics import _counting_propagator
from nvreadout.states import full_basis


def rk4_populations(matrix: np.ndarray, initial: np.ndarray, duration: float, step: float) -> np.ndarray:
    state = initial.copy()
    steps = int(round(duration / step))
    for _ in range(steps):
        k1 = matrix @ state
        k2 = matrix @ (state + 0.5 * step * k1)
        k3 = matrix @ (state + 0.5 * step * k2)
        k4 = matrix @ (state + step * k3)
        state = state + (step / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return state


def random_population(params, rng) -> PopulationVector:
    basis = full_basis(params)
    raw = rng.random(len(basis))
    return PopulationVector(raw / raw.sum(), basis)


@pytest.mark.parametrize("laser_on", [True, False])
def test_rate_matrix_is_a_generator(params14, rates, laser_on):
    rm = build_rate_matrix(params14, rates, 500.0, laser_on=laser_on)
    assert rm.matrix.shape == (21, 21)
    column_sums = rm.matrix.sum(axis=0)
    assert np.max(np.abs(column_sums)) < 1e-15 * max(1.0, np.abs(rm.matrix).max())
    off_diagonal = rm.matrix - np.diag(np.diag(rm.matrix))
    assert off_diagonal.min() >= 0.0


@pytest.mark.parametrize("field", [0.0, 500.0])
def test_propagator_matches_fine_step_integrator(params14, rates, rng, field):
    rm = build_rate_matrix(params14, rates, field, laser_on=True)
    initial = random_population(params14, rng)
    bin_width = 2.0
    trajectory = evolve(rm, initial, 100.0, bin_width)
    oracle = initial.values.copy()
    for k in range(1, trajectory.populations.shape[0]):
        oracle = rk4_populations(rm.matrix, oracle, bin_width, bin_width / 50.0)
        assert np.max(np.abs(trajectory.populations[k] - oracle)) < 1e-6


def test_population_conservation_long_run(params14, rates):
    rm = build_rate_matrix(params14, rates, 500.0, laser_on=True)
    basis = rm.basis
    initial = PopulationVector.pure(basis, SpinStateLabel(0, 1, "ground"))
    trajectory = evolve(rm, initial, 1e5, 1.0)
    sums = trajectory.populations.sum(axis=1)
    assert np.max(np.abs(sums - 1.0)) < 1e-9
    assert trajectory.populations.min() >= 0.0


def test_evolve_input_validation(params14, rates):
    rm = build_rate_matrix(params14, rates, 500.0, laser_on=True)
    initial = PopulationVector.pure(rm.basis, SpinStateLabel(0, 1, "ground"))
    with pytest.raises(ParameterError):
        evolve(rm, initial, 100.0, 0.0)
    with pytest.raises(ParameterError):
        evolve(rm, initial, 0.5, 1.0)
    other = build_rate_matrix(params14.nitrogen_15(), rates, 500.0, laser_on=True)
    with pytest.raises(StateError):
        evolve(other, initial, 100.0, 1.0)


def test_steady_state_is_stationary_and_deterministic(params14, rates):
    rm = build_rate_matrix(params14, rates, 500.0, laser_on=True)
    stationary = steady_state(rm)
    assert stationary.values.sum() == pytest.approx(1.0, abs=1e-12)
    assert stationary.values.min() >= 0.0
    assert np.max(np.abs(rm.matrix @ stationary.values)) < 1e-12
    again = steady_state(build_rate_matrix(params14, rates, 500.0, laser_on=True))
    assert np.array_equal(stationary.values, again.values)


def test_steady_state_requires_laser(params14, rates):
    dark = build_rate_matrix(params14, rates, 500.0, laser_on=False)
    with pytest.raises(ParameterError):
        steady_state(dark)


def test_bright_state_count_rate(params14, rates):
    stationary = steady_state(build_rate_matrix(params14, rates, 500.0, laser_on=True))
    trace = trace_from_population(stationary, params14, rates, 500.0, 1000.0, 2.0)
    per_bin = trace.values
    # stationary input: every bin identical
    assert np.max(np.abs(per_bin - per_bin[0])) < 1e-12
    rate_hz = per_bin[0] / trace.bin_width * 1e9
    assert rate_hz == pytest.approx(295.9e3, abs=0.5e3)
    assert 250e3 < rate_hz < 350e3


def test_flip_flop_override_wires_a_symmetric_exchange(params14, rates):
    pair = frozenset((SpinStateLabel(0, 0, "excited"), SpinStateLabel(-1, 1, "excited")))
    base = build_rate_matrix(params14, rates, 500.0, laser_on=True, flip_flop_override={})
    forced = build_rate_matrix(
        params14, rates, 500.0, laser_on=True, flip_flop_override={pair: 0.5}
    )
    difference = forced.matrix - base.matrix
    labels = sorted(pair, key=str)
    i = base.basis.index(labels[0])
    j = base.basis.index(labels[1])
    expected_rate = (rates.k_rad + rates.k_isc_0) * 0.5 / (0.5 + 1e-6)
    pattern = np.zeros_like(difference)
    pattern[i, i] -= expected_rate
    pattern[j, j] -= expected_rate
    pattern[i, j] += expected_rate
    pattern[j, i] += expected_rate
    assert np.max(np.abs(difference - pattern)) < 1e-12


def test_flip_flop_override_validation(params14, rates):
    coupled = frozenset((SpinStateLabel(0, 0, "excited"), SpinStateLabel(-1, 1, "excited")))
    with pytest.raises(ParameterError):
        build_rate_matrix(params14, rates, 500.0, laser_on=True,
                          flip_flop_override={coupled: 1.5})
    uncoupled = frozenset((SpinStateLabel(0, 0, "excited"), SpinStateLabel(-1, 0, "excited")))
    with pytest.raises(StateError):
        build_rate_matrix(params14, rates, 500.0, laser_on=True,
                          flip_flop_override={uncoupled: 0.5})


def test_initialized_populations_structure(params14, rates):
    state = initialized_populations(params14, rates, 500.0)
    assert state.values.sum() == pytest.approx(1.0, abs=1e-12)
    shares = {"ground": 0.0, "excited": 0.0, "singlet": 0.0}
    for label, value in zip(state.basis, state.values):
        shares[label.manifold] += value
    assert shares["singlet"] < 1e-3
    assert shares["ground"] > 0.95
    top = state.basis.index(SpinStateLabel(0, 1, "ground"))
    assert state.values[top] > 0.95


def test_trace_reuse_paths_agree(params14, rates, rng):
    initial = random_population(params14, rng)
    direct = trace_from_population(initial, params14, rates, 500.0, 600.0, 2.0)
    rm = build_rate_matrix(params14, rates, 500.0, laser_on=True)
    propagator = _counting_propagator(rm, rates, 2.0)
    reused = trace_from_population(
        initial, params14, rates, 500.0, 600.0, 2.0,
        rate_matrix=rm, counting_propagator=propagator,
    )
    assert np.array_equal(direct.values, reused.values)


def test_counting_matches_excited_population_quadrature(params14, rates):
    basis = full_basis(params14)
    initial = PopulationVector.pure(basis, SpinStateLabel(0, 1, "ground"))
    rm = build_rate_matrix(params14, rates, 500.0, laser_on=True)
    bin_width = 0.5
    trace = trace_from_population(initial, params14, rates, 500.0, 400.0, bin_width,
                                  rate_matrix=rm)
    trajectory = evolve(rm, initial, 400.0, bin_width)
    excited_rows = [k for k, lab in enumerate(basis) if lab.manifold == "excited"]
    excited = trajectory.populations[:, excited_rows].sum(axis=1)
    # trapezoid on the trajectory approximates the exact augmented counter
    quadrature = 0.5 * (excited[:-1] + excited[1:]) * bin_width
    quadrature *= rates.detection_efficiency * rates.k_rad
    total_exact = trace.values.sum()
    total_quadrature = quadrature.sum()
    assert total_quadrature == pytest.approx(total_exact, rel=1e-3)


def test_fluorescence_trace_requires_ground_start(params14, rates):
    with pytest.raises(StateError):
        fluorescence_trace(SpinStateLabel(0, 1, "excited"), params14, rates, 500.0, 100.0, 2.0)


def test_cumulative_signal_and_snr_bookkeeping(params14, rates):
    bright = fluorescence_trace(SpinStateLabel(0, 1, "ground"), params14, rates, 500.0, 1000.0, 2.0)
    dark = fluorescence_trace(SpinStateLabel(-1, 1, "ground"), params14, rates, 500.0, 1000.0, 2.0)
    t_p = 400.0
    n = int(t_p / 2.0)
    manual = bright.values[:n].sum() - dark.values[:n].sum()
    assert cumulative_signal(bright, dark, t_p) == pytest.approx(manual, abs=1e-15)

    curve = snr_curve(bright, dark)
    assert curve.pulse_lengths[0] == 2.0
    assert curve.pulse_lengths[-1] == 1000.0
    k = np.argmin(np.abs(curve.pulse_lengths - t_p))
    total = bright.values[:n].sum() + dark.values[:n].sum()
    assert curve.snr[k] == pytest.approx(manual / np.sqrt(total), rel=1e-12)
    assert curve.max_snr >= curve.snr[k]
    assert curve.optimal_pulse_length in curve.pulse_lengths

    averaged = snr_curve(bright, dark, shots=4)
    assert np.allclose(averaged.snr, 2.0 * curve.snr, rtol=1e-12)

    with pytest.raises(ParameterError):
        snr_curve(bright, dark, shots=0)
    short = fluorescence_trace(SpinStateLabel(0, 1, "ground"), params14, rates, 500.0, 100.0, 4.0)
    with pytest.raises(ParameterError):
        snr_curve(bright, short)
    from nvreadout import FluorescenceTrace
    zero_trace = FluorescenceTrace(bin_width=2.0, values=np.zeros(50))
    with pytest.raises(NumericalError):
        snr_curve(zero_trace, zero_trace)


def test_theoretical_enhancement_closed_forms():
    assert theoretical_enhancement([]) == 1.0
    assert theoretical_enhancement([1.0]) == pytest.approx(np.sqrt(3.0), abs=1e-12)
    assert theoretical_enhancement([0.5]) == pytest.approx(np.sqrt(2.0), abs=1e-12)
    assert theoretical_enhancement([1.0, 1.0]) == pytest.approx(np.sqrt(5.0), abs=1e-12)
    assert theoretical_enhancement((1.5,)) == pytest.approx(2.0, abs=1e-12)
    with pytest.raises(ParameterError):
        theoretical_enhancement([0.3])
    with pytest.raises(ParameterError):
        theoretical_enhancement([-0.5])
