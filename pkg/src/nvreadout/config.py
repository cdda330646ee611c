"""Run configuration for the batch front end.

A config document is a flat key = value file: one assignment per line,
``#`` starts a comment, blank lines are ignored.  Every key has a
documented default, so the empty document is a valid config.  Field and
frequency ranges use the inclusive ``start:stop:step`` syntax; a bare
number where a range is allowed means a single point.

The same registry that parses documents drives the CLI flags, so the two
front ends cannot drift apart.
"""
from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import ConfigError, ParameterError
from .params import NvParameters, RateParameters

DEFAULT_CONFIG_ENV = "NVREADOUT_CONFIG"

OUTPUT_FORMATS = ("csv", "json")

ISOTOPES = {14: NvParameters.nitrogen_14, 15: NvParameters.nitrogen_15}


@dataclass(frozen=True)
class GridSpec:
    """Inclusive arithmetic range start:stop:step.

    The point count is floor((stop - start) / step) + 1 with a small
    tolerance, so 0:1000:1 has exactly 1001 points.  A degenerate range
    (stop == start) is the scalar shorthand.
    """

    start: float
    stop: float
    step: float = 1.0

    def __post_init__(self) -> None:
        if self.stop < self.start:
            raise ValueError(f"range stop {self.stop} is below start {self.start}")
        if self.step <= 0:
            raise ValueError(f"range step must be positive, got {self.step}")

    @property
    def is_scalar(self) -> bool:
        return self.stop == self.start

    @property
    def scalar(self) -> float:
        if not self.is_scalar:
            raise ValueError(f"expected a single value, got the range {self}")
        return self.start

    def values(self) -> np.ndarray:
        count = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)

    def __str__(self) -> str:
        return ":".join(_show_float(x) for x in (self.start, self.stop, self.step))


def _show_float(value: float) -> str:
    # repr round-trips exactly; strip the trailing .0 of whole numbers
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _parse_float(text: str) -> float:
    return float(text)


def _parse_int(text: str) -> int:
    return int(text)


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:step, got {text!r}")
    return GridSpec(*(float(part) for part in parts))


def _parse_field(text: str) -> GridSpec:
    if ":" in text:
        return _parse_grid(text)
    value = float(text)
    return GridSpec(value, value)


def _show_field(grid: GridSpec) -> str:
    # scalar shorthand only round-trips when the step is the parse default
    if grid.is_scalar and grid.step == 1.0:
        return _show_float(grid.start)
    return str(grid)


def _parse_spins(text: str) -> tuple[float, ...]:
    tokens = text.replace(",", " ").split()
    if not tokens:
        raise ValueError("expected at least one nuclear spin")
    spins = tuple(float(token) for token in tokens)
    for spin in spins:
        doubled = round(2 * spin)
        if doubled < 1 or abs(2 * spin - doubled) > 1e-12:
            raise ValueError(f"nuclear spins must be positive half-integers, got {spin}")
    return spins


def _show_spins(spins: tuple[float, ...]) -> str:
    return " ".join(_show_float(spin) for spin in spins)


def _parse_choice(choices: tuple, cast: Callable[[str], object]) -> Callable[[str], object]:
    def parse(text: str):
        value = cast(text)
        if value not in choices:
            raise ValueError(f"must be one of {choices}, got {value!r}")
        return value

    return parse


@dataclass(frozen=True)
class SimulationConfig:
    """Everything a batch run needs: model constants, field, grids, output."""

    params: NvParameters = NvParameters()
    rates: RateParameters = RateParameters()
    isotope: int = 14
    field: GridSpec = GridSpec(500.0, 500.0)
    shots: int = 1
    bin_width_ns: float = 2.0
    trace_duration_ns: float = 3000.0
    readout_pulse_length_ns: float = 3000.0
    mw_rabi_mhz: float = 10.0
    odmr_rabi_mhz: float = 0.5
    nuclear_rabi_mhz: float = 0.1
    electron_branch: int = 0
    esr_lifetime_ns: float = 10.0
    spins: tuple[float, ...] = (1.0,)
    levels_manifold: str = "ground"
    levels_field_grid: GridSpec = GridSpec(0.0, 1000.0, 10.0)
    lac_field_grid: GridSpec = GridSpec(400.0, 600.0, 1.0)
    snr_field_grid: GridSpec = GridSpec(300.0, 700.0, 20.0)
    odmr_frequency_grid: GridSpec = GridSpec(1462.0, 1482.0, 0.05)
    endor_frequency_grid: GridSpec = GridSpec(2.0, 8.0, 0.01)
    esr_frequency_grid: GridSpec = GridSpec(1300.0, 1540.0, 1.0)
    rabi_duration_grid: GridSpec = GridSpec(0.0, 400.0, 4.0)
    output_format: str = "csv"
    output_path: str = ""

    def field_values(self, default_grid: GridSpec | None = None) -> np.ndarray:
        """Field grid for sweep commands.

        A scalar ``field`` defers to the command's own grid key; an
        explicit range wins over it.
        """
        if self.field.is_scalar and default_grid is not None:
            return default_grid.values()
        return self.field.values()

    def single_field(self, command: str) -> float:
        if not self.field.is_scalar:
            raise ConfigError(
                f"command '{command}' runs at a single field, got the range {self.field}",
                key="field",
            )
        return self.field.scalar


@dataclass(frozen=True)
class _Key:
    name: str
    group: str  # params | rates | top
    attr: str
    parse: Callable[[str], object]
    show: Callable[[object], str]
    help: str


_PARAM_HELP = {
    "d_gs": "ground-state zero-field splitting, MHz",
    "d_es": "excited-state zero-field splitting, MHz",
    "a_gs": "ground-state hyperfine constant, MHz",
    "a_es": "excited-state hyperfine constant, MHz",
    "q": "nuclear quadrupole constant, MHz",
    "gamma_e": "electron gyromagnetic ratio, MHz/G",
    "gamma_n": "nuclear gyromagnetic ratio, MHz/G",
    "nuclear_spin": "nuclear spin quantum number",
}

_RATE_HELP = {
    "k_exc": "laser excitation rate, 1/ns",
    "k_rad": "radiative decay rate, 1/ns",
    "k_isc_pm1": "intersystem crossing rate from m_S = +-1, 1/ns",
    "k_isc_0": "intersystem crossing rate from m_S = 0, 1/ns",
    "k_singlet": "singlet decay rate, 1/ns",
    "detection_efficiency": "detected photons per radiative decay",
}


def _registry() -> tuple[_Key, ...]:
    keys: list[_Key] = [
        _Key("isotope", "top", "isotope", _parse_choice((14, 15), _parse_int), str,
             "nitrogen isotope selecting the default spin constants"),
    ]
    for name, doc in _PARAM_HELP.items():
        keys.append(_Key(name, "params", name, _parse_float, _show_float, doc))
    for name, doc in _RATE_HELP.items():
        keys.append(_Key(name, "rates", name, _parse_float, _show_float, doc))
    keys += [
        _Key("field", "top", "field", _parse_field, _show_field,
             "magnetic field in G; start:stop:step sweeps it where supported"),
        _Key("shots", "top", "shots", _parse_int, str,
             "repetitions averaged into the shot-noise model"),
        _Key("bin_width_ns", "top", "bin_width_ns", _parse_float, _show_float,
             "photon counting bin width"),
        _Key("trace_duration_ns", "top", "trace_duration_ns", _parse_float, _show_float,
             "length of simulated fluorescence transients"),
        _Key("readout_pulse_length_ns", "top", "readout_pulse_length_ns", _parse_float,
             _show_float, "laser pulse length integrated for swept experiments"),
        _Key("mw_rabi_mhz", "top", "mw_rabi_mhz", _parse_float, _show_float,
             "Rabi frequency of the mw drive in the rabi command"),
        _Key("odmr_rabi_mhz", "top", "odmr_rabi_mhz", _parse_float, _show_float,
             "Rabi frequency of the odmr probe pulse"),
        _Key("nuclear_rabi_mhz", "top", "nuclear_rabi_mhz", _parse_float, _show_float,
             "Rabi frequency of the rf probe in the endor command"),
        _Key("electron_branch", "top", "electron_branch", _parse_choice((0, -1), _parse_int),
             str, "electron manifold probed by the endor command (0 or -1)"),
        _Key("esr_lifetime_ns", "top", "esr_lifetime_ns", _parse_float, _show_float,
             "excited-state lifetime setting the esr linewidth"),
        _Key("spins", "top", "spins", _parse_spins, _show_spins,
             "nuclear spins for the enhancement command, space or comma separated"),
        _Key("levels_manifold", "top", "levels_manifold",
             _parse_choice(("ground", "excited"), str), str,
             "manifold plotted by the levels command"),
        _Key("levels_field_grid", "top", "levels_field_grid", _parse_grid, str,
             "default field grid of the levels command"),
        _Key("lac_field_grid", "top", "lac_field_grid", _parse_grid, str,
             "default field grid of the lac command"),
        _Key("snr_field_grid", "top", "snr_field_grid", _parse_grid, str,
             "default field grid of the snr-vs-field command"),
        _Key("odmr_frequency_grid", "top", "odmr_frequency_grid", _parse_grid, str,
             "probe frequency grid of the odmr command, MHz"),
        _Key("endor_frequency_grid", "top", "endor_frequency_grid", _parse_grid, str,
             "probe frequency grid of the endor command, MHz"),
        _Key("esr_frequency_grid", "top", "esr_frequency_grid", _parse_grid, str,
             "frequency grid of the esr-excited command, MHz"),
        _Key("rabi_duration_grid", "top", "rabi_duration_grid", _parse_grid, str,
             "drive duration grid of the rabi command, ns"),
        _Key("output_format", "top", "output_format",
             _parse_choice(OUTPUT_FORMATS, str), str, "artifact format, csv or json"),
        _Key("output_path", "top", "output_path", str, str,
             "artifact path; empty derives <command>.<format>"),
    ]
    return tuple(keys)


REGISTRY: tuple[_Key, ...] = _registry()
_BY_NAME: dict[str, _Key] = {key.name: key for key in REGISTRY}

KNOWN_KEYS: tuple[str, ...] = tuple(key.name for key in REGISTRY)


def parse_document(text: str) -> dict[str, tuple[str, int]]:
    """Raw key -> (value, line) assignments of one config document."""
    assignments: dict[str, tuple[str, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=number)
        name, value = (part.strip() for part in line.split("=", 1))
        if name not in _BY_NAME:
            raise ConfigError("unknown key", key=name, line=number)
        if name in assignments:
            raise ConfigError(
                f"duplicate assignment, first one on line {assignments[name][1]}",
                key=name, line=number,
            )
        # empty values reach the key parser: only output_path accepts one
        assignments[name] = (value, number)
    return assignments


def _parse_value(key: _Key, text: str, line: int | None):
    try:
        return key.parse(text)
    except ConfigError:
        raise
    except (ValueError, TypeError) as err:
        raise ConfigError(str(err) or f"cannot parse {text!r}", key=key.name, line=line) from err


def _blame(err: ParameterError, group: str, lines: Mapping[str, int | None]) -> ConfigError:
    # the parameter validators name the offending field in their message;
    # cross-field rules may name several, so prefer one the user assigned
    message = str(err)
    named = [key.name for key in REGISTRY
             if key.group == group and re.search(rf"\b{re.escape(key.name)}\b", message)]
    assigned = [name for name in named if name in lines]
    blamed = (assigned or named or [None])[0]
    if blamed is None:
        return ConfigError(message)
    return ConfigError(message, key=blamed, line=lines.get(blamed))


def assemble(assignments: Mapping[str, tuple[str, int | None]]) -> SimulationConfig:
    """Build a validated config from raw assignments; defaults fill the rest."""
    values: dict[str, object] = {}
    lines: dict[str, int | None] = {}
    for name, (text, line) in assignments.items():
        if name not in _BY_NAME:
            raise ConfigError("unknown key", key=name, line=line)
        values[name] = _parse_value(_BY_NAME[name], text, line)
        lines[name] = line

    isotope = values.get("isotope", 14)
    params_overrides = {k.attr: values[k.name] for k in REGISTRY
                        if k.group == "params" and k.name in values}
    rates_overrides = {k.attr: values[k.name] for k in REGISTRY
                       if k.group == "rates" and k.name in values}
    try:
        params = dataclasses.replace(ISOTOPES[isotope](), **params_overrides)
    except ParameterError as err:
        raise _blame(err, "params", lines) from err
    try:
        rates = dataclasses.replace(RateParameters(), **rates_overrides)
    except ParameterError as err:
        raise _blame(err, "rates", lines) from err

    top = {k.attr: values[k.name] for k in REGISTRY
           if k.group == "top" and k.name in values}
    if top.get("shots", 1) < 1:
        raise ConfigError(f"shots must be at least 1, got {top['shots']}",
                          key="shots", line=lines.get("shots"))
    for name in ("bin_width_ns", "trace_duration_ns", "readout_pulse_length_ns",
                 "mw_rabi_mhz", "odmr_rabi_mhz", "nuclear_rabi_mhz", "esr_lifetime_ns"):
        if name in top and top[name] <= 0:
            raise ConfigError(f"{name} must be positive, got {top[name]}",
                              key=name, line=lines.get(name))
    return SimulationConfig(params=params, rates=rates, **top)


def parse_config(text: str) -> SimulationConfig:
    """Parse one config document; every omitted key takes its default."""
    return assemble(parse_document(text))


def config_items(config: SimulationConfig) -> tuple[tuple[str, str], ...]:
    """(key, value) pairs of the full effective config, registry order."""
    items = []
    for key in REGISTRY:
        if key.group == "params":
            value = getattr(config.params, key.attr)
        elif key.group == "rates":
            value = getattr(config.rates, key.attr)
        else:
            value = getattr(config, key.attr)
        items.append((key.name, key.show(value)))
    return tuple(items)


def serialize_config(config: SimulationConfig) -> str:
    """Write the effective config back out; parses to an equal config."""
    lines = ["# nvreadout run configuration"]
    lines += [f"{name} = {value}" for name, value in config_items(config)]
    return "\n".join(lines) + "\n"
