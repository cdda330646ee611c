"""Model parameters for the NV center spin system and its optical cycle.

Units are fixed package-wide: energies and frequencies in MHz, magnetic
fields in Gauss, rates in 1/ns, times in ns.  The gyromagnetic ratios are
the usual g*mu/h values: 2.8025 MHz/G for the electron spin, 3.077e-4
MHz/G for the 14N nucleus and -4.316e-4 MHz/G for 15N.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError


def _is_half_integer(value: float) -> bool:
    return abs(2 * value - round(2 * value)) < 1e-12 and round(2 * value) >= 1


@dataclass(frozen=True)
class NvParameters:
    """Spin Hamiltonian constants for one nitrogen isotope.

    Defaults are the 14N values: ground/excited zero-field splittings
    2870/1420 MHz, ground hyperfine -2.166 MHz, excited hyperfine roughly
    twenty times stronger (40 MHz, sign not established experimentally),
    quadrupole splitting 4.945 MHz.

    Attributes
    ----------
    d_gs, d_es:
        Zero-field splitting of the ground and excited triplet, MHz.
    a_gs, a_es:
        Isotropic hyperfine constant in each manifold, MHz.
    q:
        Nuclear quadrupole constant, MHz (0 for spin-1/2 nuclei).
    gamma_e, gamma_n:
        Electron and nuclear gyromagnetic ratios, MHz/G.
    nuclear_spin:
        Nuclear spin quantum number I (1 for 14N, 1/2 for 15N).
    """

    d_gs: float = 2870.0
    d_es: float = 1420.0
    a_gs: float = -2.166
    a_es: float = 40.0
    q: float = 4.945
    gamma_e: float = 2.8025
    gamma_n: float = 3.077e-4
    nuclear_spin: float = 1.0

    def __post_init__(self) -> None:
        if self.d_gs <= 0:
            raise ParameterError(f"d_gs must be positive, got {self.d_gs}")
        if self.d_es <= 0:
            raise ParameterError(f"d_es must be positive, got {self.d_es}")
        if self.q < 0:
            raise ParameterError(f"q must be non-negative, got {self.q}")
        if self.gamma_e <= 0:
            raise ParameterError(f"gamma_e must be positive, got {self.gamma_e}")
        if abs(self.gamma_n) >= 1e-2 * self.gamma_e:
            raise ParameterError(
                "gamma_n must be small against gamma_e "
                f"(|{self.gamma_n}| >= 1e-2 * {self.gamma_e})"
            )
        if not _is_half_integer(self.nuclear_spin):
            raise ParameterError(
                f"nuclear_spin must be a positive half-integer, got {self.nuclear_spin}"
            )

    @classmethod
    def nitrogen_14(cls) -> "NvParameters":
        return cls()

    @classmethod
    def nitrogen_15(cls) -> "NvParameters":
        # 15N: I=1/2, no quadrupole, hyperfine constants of opposite sign
        # and slightly larger magnitude than 14N, negative gyromagnetic ratio.
        return cls(
            a_gs=3.03,
            a_es=61.0,
            q=0.0,
            gamma_n=-4.316e-4,
            nuclear_spin=0.5,
        )

    @property
    def nuclear_multiplicity(self) -> int:
        """Number of nuclear sublevels, 2I + 1."""
        return round(2 * self.nuclear_spin) + 1

    @property
    def triplet_dim(self) -> int:
        """Dimension of one electron-triplet manifold, 3 * (2I + 1)."""
        return 3 * self.nuclear_multiplicity

    def zero_field_splitting(self, manifold: str) -> float:
        if manifold == "ground":
            return self.d_gs
        if manifold == "excited":
            return self.d_es
        raise ParameterError(f"no zero-field splitting for manifold '{manifold}'")

    def hyperfine(self, manifold: str) -> float:
        if manifold == "ground":
            return self.a_gs
        if manifold == "excited":
            return self.a_es
        raise ParameterError(f"no hyperfine constant for manifold '{manifold}'")


@dataclass(frozen=True)
class RateParameters:
    """Rates of the classical optical cycle, all in 1/ns.

    The defaults reproduce the familiar room-temperature numbers: 12 ns
    radiative lifetime, strong intersystem crossing from m_S = +-1 and a
    twenty-fold weaker one from m_S = 0, 250 ns singlet shelf, and a
    saturation-level excitation rate.  ``detection_efficiency`` is the
    probability that a radiative decay produces a detected photon; the
    default 0.00894 puts the steady-state count rate of the bright state
    near 300 kHz.
    """

    k_exc: float = 0.1
    k_rad: float = 1.0 / 12.0
    k_isc_pm1: float = 1.0 / 20.0
    k_isc_0: float = 1.0 / 400.0
    k_singlet: float = 1.0 / 250.0
    detection_efficiency: float = 0.00894

    def __post_init__(self) -> None:
        for name in ("k_exc", "k_rad", "k_isc_pm1", "k_singlet"):
            value = getattr(self, name)
            if value <= 0:
                raise ParameterError(f"{name} must be positive, got {value}")
        if self.k_isc_0 < 0:
            raise ParameterError(f"k_isc_0 must be non-negative, got {self.k_isc_0}")
        # spin selectivity of the intersystem crossing is what makes the
        # readout work at all; keep at least an order of magnitude
        if self.k_isc_pm1 < 10 * self.k_isc_0:
            raise ParameterError(
                "k_isc_pm1 must be at least 10x k_isc_0, got "
                f"{self.k_isc_pm1} vs {self.k_isc_0}"
            )
        if not 0 < self.detection_efficiency <= 1:
            raise ParameterError(
                f"detection_efficiency must be in (0, 1], got {self.detection_efficiency}"
            )
