"""Spin state labels, basis enumeration and population vectors."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import StateError
from .params import NvParameters

MANIFOLDS = ("ground", "excited", "singlet")


def _format_m(value: float) -> str:
    frac = Fraction(value).limit_denominator(2)
    if frac == 0:
        return "0"
    sign = "+" if frac > 0 else "-"
    frac = abs(frac)
    if frac.denominator == 1:
        return f"{sign}{frac.numerator}"
    return f"{sign}{frac.numerator}/{frac.denominator}"


@dataclass(frozen=True)
class SpinStateLabel:
    """One |m_S, m_I> product level in a named manifold.

    The metastable singlet has no triplet spin projection; its labels use
    m_s = 0 by convention and carry only the nuclear projection.
    """

    m_s: int
    m_i: float
    manifold: str = "ground"

    def __post_init__(self) -> None:
        if self.manifold not in MANIFOLDS:
            raise StateError(f"unknown manifold '{self.manifold}'")
        if self.m_s not in (-1, 0, 1):
            raise StateError(f"m_s must be -1, 0 or +1, got {self.m_s}")
        if self.manifold == "singlet" and self.m_s != 0:
            raise StateError("singlet labels carry m_s = 0 by convention")
        if abs(2 * self.m_i - round(2 * self.m_i)) > 1e-12:
            raise StateError(f"m_i must be a half-integer, got {self.m_i}")

    def __str__(self) -> str:
        if self.manifold == "singlet":
            return f"s({_format_m(self.m_i)})"
        prefix = "g" if self.manifold == "ground" else "e"
        return f"{prefix}({_format_m(self.m_s)},{_format_m(self.m_i)})"

    def with_manifold(self, manifold: str) -> "SpinStateLabel":
        return SpinStateLabel(self.m_s, self.m_i, manifold)


def nuclear_projections(params: NvParameters) -> tuple[float, ...]:
    """Nuclear m_I values in ascending order, -I ... +I."""
    spin = params.nuclear_spin
    count = params.nuclear_multiplicity
    return tuple(-spin + k for k in range(count))


def triplet_basis(params: NvParameters, manifold: str) -> tuple[SpinStateLabel, ...]:
    """Product basis |m_S, m_I> of one triplet manifold.

    Ordered with m_S ascending (-1, 0, +1) outer and m_I ascending inner,
    so index = (m_S + 1) * (2I + 1) + (m_I + I).
    """
    if manifold not in ("ground", "excited"):
        raise StateError(f"triplet basis undefined for manifold '{manifold}'")
    return tuple(
        SpinStateLabel(m_s, m_i, manifold)
        for m_s in (-1, 0, 1)
        for m_i in nuclear_projections(params)
    )


def singlet_basis(params: NvParameters) -> tuple[SpinStateLabel, ...]:
    return tuple(SpinStateLabel(0, m_i, "singlet") for m_i in nuclear_projections(params))


def full_basis(params: NvParameters) -> tuple[SpinStateLabel, ...]:
    """Rate-model basis: ground triplet, excited triplet, then singlet.

    21 levels for 14N (9 + 9 + 3), 14 for 15N (6 + 6 + 2).
    """
    return (
        triplet_basis(params, "ground")
        + triplet_basis(params, "excited")
        + singlet_basis(params)
    )


def basis_index(basis: tuple[SpinStateLabel, ...], label: SpinStateLabel) -> int:
    try:
        return basis.index(label)
    except ValueError:
        raise StateError(f"label {label} is not part of this basis") from None


@dataclass(frozen=True)
class PopulationVector:
    """Classical occupation probabilities over a level basis.

    Entries are non-negative up to -1e-12 of numerical noise and sum to 1
    within 1e-7; ``validate`` enforces this.  The underlying array is
    marked read-only.
    """

    values: np.ndarray
    basis: tuple[SpinStateLabel, ...]

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        self.validate()

    def validate(self) -> None:
        if self.values.shape != (len(self.basis),):
            raise StateError(
                f"population vector has {self.values.shape} entries "
                f"for a {len(self.basis)}-level basis"
            )
        if not np.all(np.isfinite(self.values)):
            raise StateError("population vector contains non-finite entries")
        if self.values.min() < -1e-12:
            raise StateError(
                f"population {self.values.min():.3e} below the -1e-12 noise floor"
            )
        # 1e-7 leaves headroom for stiff propagators (forced flip-flop
        # probabilities near 1) whose roundoff mass loss reaches ~1e-9.
        total = float(self.values.sum())
        if abs(total - 1.0) > 1e-7:
            raise StateError(f"populations sum to {total!r}, not 1")

    @classmethod
    def pure(cls, basis: tuple[SpinStateLabel, ...], label: SpinStateLabel) -> "PopulationVector":
        values = np.zeros(len(basis))
        values[basis_index(basis, label)] = 1.0
        return cls(values, basis)

    def population(self, label: SpinStateLabel) -> float:
        return float(self.values[basis_index(self.basis, label)])

    def manifold_population(self, manifold: str) -> float:
        return float(
            sum(v for v, lab in zip(self.values, self.basis) if lab.manifold == manifold)
        )

    def nuclear_distribution(self) -> dict[float, float]:
        """Population per nuclear projection, summed over manifolds."""
        out: dict[float, float] = {}
        for v, lab in zip(self.values, self.basis):
            out[lab.m_i] = out.get(lab.m_i, 0.0) + float(v)
        return out


def clamp_noise(values: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Zero out tiny negative entries; refuse anything below ``-floor``.

    Propagation through the matrix exponential can leave populations a few
    ulp below zero.  Values in (-floor, 0) are defined to be numerical
    noise; anything more negative indicates a real failure.  Stiff rate
    matrices (forced flip-flop probabilities near 1) justify a looser floor
    than the default.
    """
    from .errors import NumericalError

    values = np.array(values, dtype=float)
    low = values.min()
    if low < -floor:
        raise NumericalError(f"population {low:.3e} below the -{floor:.0e} noise floor")
    values[values < 0] = 0.0
    return values
