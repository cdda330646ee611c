"""Electron-nuclear spin Hamiltonian of the NV center and its level structure.

The Hamiltonian of one triplet manifold in the |m_S, m_I> product basis is

    H = D S_z^2 + gamma_e B S_z + A (S.I) + Q I_z^2 + gamma_n B I_z

with the field along the NV axis.  The isotropic hyperfine term contains
the flip-flop operators (S+ I- + S- I+)/2 which mix |0, m> with
|-+1, m+-1>; near the excited-state level anticrossing around
B = d_es / gamma_e this mixing drives electron-nuclear spin exchange.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousStateError, ParameterError, StateError
from .params import NvParameters
from .states import SpinStateLabel, basis_index, nuclear_projections, triplet_basis

# squared-overlap threshold for calling an eigenvector "the" labelled level
DOMINANT_WEIGHT = 0.5


def spin_operators(spin: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return (S_z, S_+, S_-) for the given spin, basis ordered m ascending."""
    dim = round(2 * spin) + 1
    m = -spin + np.arange(dim)
    s_z = np.diag(m)
    ladder = np.sqrt(spin * (spin + 1) - m[:-1] * (m[:-1] + 1))
    s_plus = np.zeros((dim, dim))
    s_plus[np.arange(1, dim), np.arange(dim - 1)] = ladder
    return s_z, s_plus, s_plus.T.copy()


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Hermitian matrix in MHz together with its product basis."""

    entries: np.ndarray
    basis: tuple[SpinStateLabel, ...]
    field: float
    manifold: str

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class Eigensystem:
    """Energies ascending; ``vectors[:, k]`` is the k-th eigenvector.

    Each eigenvector's phase is fixed so that its largest-magnitude
    component is real and positive.
    """

    energies: np.ndarray
    vectors: np.ndarray
    basis: tuple[SpinStateLabel, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class LevelDiagram:
    """Eigenvalues on a field grid, columns ordered by branch continuity.

    Branches are matched between adjacent fields by eigenvector overlap,
    not by energy order, so uncoupled levels cross and coupled ones repel.
    """

    fields: np.ndarray
    energies: np.ndarray
    basis: tuple[SpinStateLabel, ...]
    manifold: str


@dataclass(frozen=True)
class LacAnalysis:
    """Flip-flop probabilities per unordered level pair at one field."""

    field: float
    pair_probabilities: dict[frozenset[SpinStateLabel], float]

    def probability(self, a: SpinStateLabel, b: SpinStateLabel) -> float:
        key = frozenset((a, b))
        if key not in self.pair_probabilities:
            raise StateError(f"no pair probability stored for ({a}, {b})")
        return self.pair_probabilities[key]


def build_hamiltonian(params: NvParameters, field: float, manifold: str) -> HamiltonianMatrix:
    """Construct H for one triplet manifold at the given axial field.

    Parameters
    ----------
    params:
        Spin constants; selects d_gs/a_gs or d_es/a_es via ``manifold``.
    field:
        Magnetic field along the NV axis in Gauss, must be >= 0.
    manifold:
        "ground" or "excited"; the singlet has no spin Hamiltonian here.
    """
    if field < 0:
        raise ParameterError(f"field must be non-negative, got {field}")
    if manifold not in ("ground", "excited"):
        raise ParameterError(f"no spin Hamiltonian for manifold '{manifold}'")

    d = params.zero_field_splitting(manifold)
    a = params.hyperfine(manifold)
    s_z, s_plus, s_minus = spin_operators(1.0)
    i_z, i_plus, i_minus = spin_operators(params.nuclear_spin)
    eye_s = np.eye(3)
    eye_i = np.eye(params.nuclear_multiplicity)

    h = (
        d * np.kron(s_z @ s_z, eye_i)
        + params.gamma_e * field * np.kron(s_z, eye_i)
        + a * (
            np.kron(s_z, i_z)
            + 0.5 * (np.kron(s_plus, i_minus) + np.kron(s_minus, i_plus))
        )
        + params.q * np.kron(eye_s, i_z @ i_z)
        + params.gamma_n * field * np.kron(eye_s, i_z)
    )
    return HamiltonianMatrix(
        entries=h.astype(complex),
        basis=triplet_basis(params, manifold),
        field=field,
        manifold=manifold,
    )


def eigensystem(h: HamiltonianMatrix) -> Eigensystem:
    """Diagonalize a Hamiltonian; eigenvalues ascending, phases fixed."""
    m = np.asarray(h.entries)
    if np.abs(m - m.conj().T).max() > 1e-12:
        raise ParameterError("matrix is not Hermitian to within 1e-12 MHz")
    energies, vectors = np.linalg.eigh(m)
    vectors = _fix_phases(vectors)
    return Eigensystem(energies=energies, vectors=vectors, basis=h.basis)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    vectors = np.array(vectors, dtype=complex)
    for k in range(vectors.shape[1]):
        column = vectors[:, k]
        pivot = column[np.argmax(np.abs(column))]
        vectors[:, k] = column * (np.conj(pivot) / abs(pivot))
    return vectors


def level_diagram(
    params: NvParameters, fields: np.ndarray, manifold: str
) -> LevelDiagram:
    """Eigenvalues over a monotone field grid with branch tracking."""
    fields = np.asarray(fields, dtype=float)
    if fields.size == 0:
        raise ParameterError("field grid is empty")
    if fields.size > 1 and not (np.all(np.diff(fields) > 0) or np.all(np.diff(fields) < 0)):
        raise ParameterError("field grid must be strictly monotone")

    energies = []
    previous = None
    order = None
    for field in fields:
        eig = eigensystem(build_hamiltonian(params, field, manifold))
        if previous is None:
            order = np.arange(eig.dim)
        else:
            # match branches by eigenvector overlap with the previous field
            overlap = np.abs(previous.conj().T @ eig.vectors) ** 2
            _, order = linear_sum_assignment(-overlap)
        energies.append(eig.energies[order])
        previous = eig.vectors[:, order]
    return LevelDiagram(
        fields=fields,
        energies=np.array(energies),
        basis=triplet_basis(params, manifold),
        manifold=manifold,
    )


def flip_flop_pairs(
    params: NvParameters, manifold: str = "excited"
) -> tuple[frozenset[SpinStateLabel], ...]:
    """All level pairs coupled by the hyperfine flip-flop operators.

    These are the pairs {|m_S, m_I>, |m_S -+ 1, m_I +- 1>}; each contains
    exactly one m_S = 0 member.
    """
    pairs = []
    for m_i in nuclear_projections(params)[:-1]:
        pairs.append(
            frozenset(
                (
                    SpinStateLabel(0, m_i, manifold),
                    SpinStateLabel(-1, m_i + 1, manifold),
                )
            )
        )
        pairs.append(
            frozenset(
                (
                    SpinStateLabel(1, m_i, manifold),
                    SpinStateLabel(0, m_i + 1, manifold),
                )
            )
        )
    return tuple(pairs)


def lac_pairs(params: NvParameters) -> tuple[frozenset[SpinStateLabel], ...]:
    """The {|0, m>, |-1, m+1>} pairs whose levels cross near d_es/gamma_e."""
    return tuple(
        frozenset(
            (
                SpinStateLabel(0, m_i, "excited"),
                SpinStateLabel(-1, m_i + 1, "excited"),
            )
        )
        for m_i in nuclear_projections(params)[:-1]
    )


def nominal_lac_field(params: NvParameters) -> float:
    """Field where the bare electron levels m_S = 0 and -1 cross, d_es/gamma_e."""
    return params.d_es / params.gamma_e


def pair_mixing_probability(
    params: NvParameters, field: float, a: SpinStateLabel, b: SpinStateLabel
) -> float:
    """Per-optical-cycle exchange probability for one excited level pair.

    For excited eigenvectors psi_k,

        p = sum_k 2 |<a|psi_k>|^2 |<b|psi_k>|^2

    which is 0 for unmixed levels and 1 for a maximally mixed pair, and
    never exceeds 1 because the weight matrix is doubly stochastic.
    """
    eig = eigensystem(build_hamiltonian(params, field, "excited"))
    weights = np.abs(eig.vectors) ** 2
    i = basis_index(eig.basis, a.with_manifold("excited"))
    j = basis_index(eig.basis, b.with_manifold("excited"))
    if i == j:
        raise StateError("pair must contain two distinct labels")
    return float(2.0 * np.sum(weights[i, :] * weights[j, :]))


def flip_flop_probability(params: NvParameters, field: float) -> LacAnalysis:
    """Exchange probabilities for every hyperfine-coupled excited pair.

    Covers the pairs returned by ``flip_flop_pairs``; levels in different
    m_S + m_I sectors are never mixed (``pair_mixing_probability`` for
    such a pair is identically zero).
    """
    eig = eigensystem(build_hamiltonian(params, field, "excited"))
    weights = np.abs(eig.vectors) ** 2
    probabilities: dict[frozenset[SpinStateLabel], float] = {}
    for pair in flip_flop_pairs(params):
        i, j = (basis_index(eig.basis, lab) for lab in sorted(pair, key=str))
        probabilities[pair] = float(2.0 * np.sum(weights[i, :] * weights[j, :]))
    return LacAnalysis(field=field, pair_probabilities=probabilities)


def dominant_index(eig: Eigensystem, label: SpinStateLabel) -> int:
    """Index of the eigenvector dominated by the given basis label.

    Requires squared overlap above 0.5, which at most one eigenvector can
    have; raises ``AmbiguousStateError`` otherwise (e.g. at an
    anticrossing where the pair is mixed 50/50).
    """
    row = basis_index(eig.basis, label)
    weights = np.abs(eig.vectors[row, :]) ** 2
    best = int(np.argmax(weights))
    if weights[best] <= DOMINANT_WEIGHT:
        raise AmbiguousStateError(
            f"no eigenvector is dominated by {label}: largest squared overlap "
            f"is {weights[best]:.3f}"
        )
    return best


def transition_frequency(
    eig: Eigensystem, a: SpinStateLabel, b: SpinStateLabel
) -> float:
    """|E_a - E_b| between the eigenstates dominated by two labels."""
    if a == b:
        raise StateError("transition requires two distinct labels")
    return float(abs(eig.energies[dominant_index(eig, a)] - eig.energies[dominant_index(eig, b)]))


def pair_gap(params: NvParameters, pair: frozenset[SpinStateLabel], field: float) -> float:
    """Energy gap between the two eigenbranches spanning a level pair.

    The two eigenvectors with the largest combined weight on the pair are
    selected, which stays well defined inside the anticrossing window
    where per-label assignment is ambiguous.
    """
    labels = sorted(pair, key=lambda lab: (lab.m_s, lab.m_i))
    if len(labels) != 2:
        raise StateError("pair must contain exactly two labels")
    manifold = labels[0].manifold
    eig = eigensystem(build_hamiltonian(params, field, manifold))
    weights = np.abs(eig.vectors) ** 2
    rows = [basis_index(eig.basis, lab) for lab in labels]
    combined = weights[rows[0], :] + weights[rows[1], :]
    k1, k2 = np.argsort(combined)[-2:]
    return float(abs(eig.energies[k1] - eig.energies[k2]))


def minimal_gap_field(
    params: NvParameters,
    pair: frozenset[SpinStateLabel],
    field_range: tuple[float, float] = (400.0, 600.0),
    resolution: float = 0.1,
) -> tuple[float, float]:
    """Locate the field of minimal gap for a pair by dense scan.

    Returns (field, gap).  A three-point parabolic refinement sharpens the
    scan minimum below the grid resolution.
    """
    lo, hi = field_range
    if not hi > lo:
        raise ParameterError("field_range must be increasing")
    grid = np.arange(lo, hi + resolution / 2, resolution)
    gaps = np.array([pair_gap(params, pair, b) for b in grid])
    k = int(np.argmin(gaps))
    if 0 < k < len(grid) - 1:
        y0, y1, y2 = gaps[k - 1 : k + 2]
        denom = y0 - 2 * y1 + y2
        if denom > 0:
            shift = 0.5 * (y0 - y2) / denom
            field = grid[k] + shift * resolution
            return float(field), float(pair_gap(params, pair, field))
    return float(grid[k]), float(gaps[k])


def diagonal_crossing_field(
    params: NvParameters, pair: frozenset[SpinStateLabel]
) -> float:
    """Field where the two diagonal (unmixed) energies of a pair coincide.

    Diagonal entries are linear in field, so the root is exact.
    """
    labels = sorted(pair, key=lambda lab: (lab.m_s, lab.m_i))
    manifold = labels[0].manifold

    def difference(field: float) -> float:
        h = build_hamiltonian(params, field, manifold)
        i = basis_index(h.basis, labels[0])
        j = basis_index(h.basis, labels[1])
        return float(h.entries[i, i].real - h.entries[j, j].real)

    d0 = difference(0.0)
    d1 = difference(1.0)
    slope = d1 - d0
    if slope == 0:
        raise ParameterError("pair energies are field-independent, no crossing")
    return -d0 / slope
