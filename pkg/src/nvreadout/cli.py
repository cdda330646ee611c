"""Batch command line front end.

    nvreadout <command> [--config FILE] [--<key> VALUE ...]

Every config key doubles as a flag (underscores become dashes); flags win
over the config file, which wins over the documented defaults.  When no
--config is given the file named by $NVREADOUT_CONFIG, if set, is loaded.

Each run writes one artifact (CSV or JSON, ``output_format``) whose header
embeds the full effective config, and prints a one-line summary.  The same
inputs always produce byte-identical artifacts.

Exit codes: 0 success, 1 runtime failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from typing import Callable, Sequence

import numpy as np

from .config import (
    DEFAULT_CONFIG_ENV,
    REGISTRY,
    SimulationConfig,
    assemble,
    config_items,
    parse_document,
)
from .errors import ConfigError, NvReadoutError
from .experiments import (
    conventional_vs_enhanced,
    dip_positions,
    excited_state_esr,
    nuclear_resonance_spectrum,
    odmr_spectrum,
    rabi_experiment,
    snr_vs_field,
)
from .photodynamics import theoretical_enhancement
from .spin_model import (
    flip_flop_pairs,
    flip_flop_probability,
    lac_pairs,
    level_diagram,
    minimal_gap_field,
    nominal_lac_field,
    pair_gap,
)

Columns = list[tuple[str, np.ndarray]]


def _pair_name(pair: frozenset) -> str:
    a, b = sorted(pair, key=lambda lab: (lab.m_s, lab.m_i))
    return f"{a}|{b}"


def _run_levels(config: SimulationConfig) -> tuple[Columns, str]:
    fields = config.field_values(config.levels_field_grid)
    diagram = level_diagram(config.params, fields, config.levels_manifold)
    columns: Columns = [("field_G", diagram.fields)]
    # branches keep the ascending-energy order of the first grid point
    for k in range(diagram.energies.shape[1]):
        columns.append((f"E{k + 1}_MHz", diagram.energies[:, k]))
    return columns, (
        f"{len(fields)} field points, {diagram.energies.shape[1]} branches "
        f"({config.levels_manifold} manifold)"
    )


def _run_lac(config: SimulationConfig) -> tuple[Columns, str]:
    fields = config.field_values(config.lac_field_grid)
    pairs = flip_flop_pairs(config.params)
    probabilities = np.empty((fields.size, len(pairs)))
    for i, field in enumerate(fields):
        analysis = flip_flop_probability(config.params, float(field))
        probabilities[i] = [analysis.pair_probabilities[pair] for pair in pairs]
    crossing_pairs = lac_pairs(config.params)
    gaps = np.array([
        [pair_gap(config.params, pair, float(field)) for pair in crossing_pairs]
        for field in fields
    ])
    columns: Columns = [("field_G", fields)]
    columns += [(f"p[{_pair_name(p)}]", probabilities[:, j]) for j, p in enumerate(pairs)]
    columns += [(f"gap[{_pair_name(p)}]_MHz", gaps[:, j]) for j, p in enumerate(crossing_pairs)]

    if fields.size > 1:
        lo, hi = float(fields[0]), float(fields[-1])
        resolution = min(0.5, float(fields[1] - fields[0]))
        located = [
            (minimal_gap_field(config.params, pair, (lo, hi), resolution), pair)
            for pair in crossing_pairs
        ]
        ((field, gap), pair) = min(located, key=lambda item: item[0][1])
        summary = (
            f"minimal gap = {gap:.4g} MHz at {field:.4g} G for {_pair_name(pair)} "
            f"(bare crossing at {nominal_lac_field(config.params):.6g} G)"
        )
    else:
        best = int(np.argmax(probabilities[0]))
        summary = (
            f"strongest flip-flop p = {probabilities[0, best]:.4g} "
            f"for {_pair_name(pairs[best])} at {fields[0]:g} G"
        )
    return columns, summary


def _comparison(config: SimulationConfig, command: str):
    return conventional_vs_enhanced(
        config.params,
        config.rates,
        config.single_field(command),
        bin_width=config.bin_width_ns,
        duration=config.trace_duration_ns,
        shots=config.shots,
    )


def _run_transient(config: SimulationConfig) -> tuple[Columns, str]:
    comparison = _comparison(config, "transient")
    columns: Columns = [
        ("t_ns", comparison.times),
        ("counts_bright", comparison.bright.values),
        ("counts_conventional", comparison.conventional.values),
        ("counts_enhanced", comparison.enhanced.values),
        ("difference_conventional", comparison.difference_conventional),
        ("difference_enhanced", comparison.difference_enhanced),
    ]
    return columns, f"signal ratio = {comparison.signal_ratio:.4g} at {comparison.field:g} G"


def _run_snr(config: SimulationConfig) -> tuple[Columns, str]:
    comparison = _comparison(config, "snr")
    conventional, enhanced = comparison.snr_conventional, comparison.snr_enhanced
    columns: Columns = [
        ("t_p_ns", conventional.pulse_lengths),
        ("snr_conventional", conventional.snr),
        ("snr_enhanced", enhanced.snr),
    ]
    summary = (
        f"max SNR ratio = {comparison.max_snr_ratio:.4g} "
        f"at t_p = {enhanced.optimal_pulse_length:.4g} ns "
        f"(conventional optimum {conventional.optimal_pulse_length:.4g} ns)"
    )
    return columns, summary


def _run_rabi(config: SimulationConfig) -> tuple[Columns, str]:
    field = config.single_field("rabi")
    durations = config.rabi_duration_grid.values()
    results = {
        mode: rabi_experiment(
            config.params, config.rates, field, mode, durations,
            mw_rabi=config.mw_rabi_mhz, bin_width=config.bin_width_ns,
            readout_pulse_length=config.readout_pulse_length_ns,
        )
        for mode in ("conventional", "enhanced")
    }
    columns: Columns = [
        ("duration_ns", durations),
        ("signal_conventional", results["conventional"].signals),
        ("signal_enhanced", results["enhanced"].signals),
    ]
    ratio = results["enhanced"].contrast / results["conventional"].contrast
    return columns, f"contrast ratio = {ratio:.4g} at {field:g} G"


def _spectrum_columns(spectrum) -> Columns:
    return [
        ("frequency_MHz", spectrum.frequencies),
        ("counts", spectrum.counts),
        ("signal", spectrum.signal),
        ("contrast", spectrum.contrast),
    ]


def _dip_summary(spectrum) -> str:
    dips = dip_positions(spectrum.frequencies, spectrum.counts)
    if dips.size == 0:
        return f"no dips above 2% contrast at {spectrum.field:g} G"
    listed = ", ".join(f"{dip:.6g}" for dip in dips)
    return f"{dips.size} dip{'s' if dips.size != 1 else ''} at {listed} MHz ({spectrum.field:g} G)"


def _run_odmr(config: SimulationConfig) -> tuple[Columns, str]:
    spectrum = odmr_spectrum(
        config.params, config.rates, config.single_field("odmr"),
        config.odmr_frequency_grid.values(),
        rabi_frequency=config.odmr_rabi_mhz,
        bin_width=config.bin_width_ns,
        readout_pulse_length=config.readout_pulse_length_ns,
    )
    return _spectrum_columns(spectrum), _dip_summary(spectrum)


def _run_endor(config: SimulationConfig) -> tuple[Columns, str]:
    spectrum = nuclear_resonance_spectrum(
        config.params, config.rates, config.single_field("endor"),
        config.electron_branch, config.endor_frequency_grid.values(),
        rabi_frequency=config.nuclear_rabi_mhz,
        bin_width=config.bin_width_ns,
        readout_pulse_length=config.readout_pulse_length_ns,
    )
    return _spectrum_columns(spectrum), _dip_summary(spectrum)


def _run_esr_excited(config: SimulationConfig) -> tuple[Columns, str]:
    spectrum = excited_state_esr(
        config.params, config.single_field("esr-excited"),
        config.esr_frequency_grid.values(), lifetime_ns=config.esr_lifetime_ns,
    )
    columns: Columns = [
        ("frequency_MHz", spectrum.frequencies),
        ("response", spectrum.response),
    ]
    centers = ", ".join(f"{center:.6g}" for center in spectrum.line_centers)
    summary = f"lines at {centers} MHz, FWHM = {spectrum.linewidth:.4g} MHz"
    return columns, summary


def _run_enhancement(config: SimulationConfig) -> tuple[Columns, str]:
    spins = np.asarray(config.spins)
    cumulative = np.sqrt(1.0 + np.cumsum(2.0 * spins))
    columns: Columns = [("spin", spins), ("cumulative_enhancement", cumulative)]
    return columns, f"{theoretical_enhancement(config.spins):.8g}"


def _run_snr_vs_field(config: SimulationConfig) -> tuple[Columns, str]:
    scan = snr_vs_field(
        config.params, config.rates, config.field_values(config.snr_field_grid),
        bin_width=config.bin_width_ns, duration=config.trace_duration_ns,
        shots=config.shots,
    )
    columns: Columns = [
        ("field_G", scan.fields),
        ("enhancement", scan.enhancement),
        ("max_snr_conventional", scan.max_snr_conventional),
        ("max_snr_enhanced", scan.max_snr_enhanced),
        ("t_opt_conventional_ns", scan.optimal_conventional),
        ("t_opt_enhanced_ns", scan.optimal_enhanced),
    ]
    summary = (
        f"peak enhancement = {scan.enhancement.max():.4g} at {scan.peak_field:.4g} G"
    )
    return columns, summary


_HANDLERS: dict[str, Callable[[SimulationConfig], tuple[Columns, str]]] = {
    "levels": _run_levels,
    "lac": _run_lac,
    "transient": _run_transient,
    "snr": _run_snr,
    "rabi": _run_rabi,
    "odmr": _run_odmr,
    "endor": _run_endor,
    "esr-excited": _run_esr_excited,
    "enhancement": _run_enhancement,
    "snr-vs-field": _run_snr_vs_field,
}

COMMANDS = tuple(_HANDLERS)


def _write_csv(path: str, command: str, config: SimulationConfig, columns: Columns) -> None:
    with open(path, "w", newline="") as handle:
        handle.write(f"# nvreadout {command}\n")
        for name, value in config_items(config):
            handle.write(f"# {name} = {value}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow([name for name, _ in columns])
        rows = zip(*(values for _, values in columns))
        for row in rows:
            writer.writerow([f"{value:.9g}" for value in row])


def _write_json(path: str, command: str, config: SimulationConfig, columns: Columns) -> None:
    document = {
        "command": command,
        "config": dict(config_items(config)),
        "columns": [name for name, _ in columns],
        "rows": [[float(value) for value in row]
                 for row in zip(*(values for _, values in columns))],
    }
    with open(path, "w", newline="") as handle:
        json.dump(document, handle, indent=2, sort_keys=True)
        handle.write("\n")


def dispatch(command: str, config: SimulationConfig) -> int:
    """Run one command, write its artifact, print the one-line summary."""
    handler = _HANDLERS.get(command)
    if handler is None:
        print(f"error: unknown command '{command}' (choose from {', '.join(COMMANDS)})",
              file=sys.stderr)
        return 2
    try:
        columns, summary = handler(config)
        path = config.output_path or f"{command}.{config.output_format}"
        if config.output_format == "csv":
            _write_csv(path, command, config, columns)
        else:
            _write_json(path, command, config, columns)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (NvReadoutError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(summary)
    return 0


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvreadout",
        description="Simulate NV center optical readout experiments in batch.",
    )
    parser.add_argument("command", choices=COMMANDS, help="experiment to run")
    parser.add_argument("--config", metavar="FILE",
                        help=f"config document (default: ${DEFAULT_CONFIG_ENV})")
    for key in REGISTRY:
        parser.add_argument(_flag(key.name), metavar="VALUE", dest=key.name,
                            help=key.help)
    return parser


def _load_assignments(config_path: str | None) -> dict[str, tuple[str, int]]:
    path = config_path or os.environ.get(DEFAULT_CONFIG_ENV)
    if not path:
        return {}
    with open(path) as handle:
        return parse_document(handle.read())


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    try:
        assignments: dict[str, tuple[str, int | None]] = dict(_load_assignments(args.config))
        for key in REGISTRY:
            value = getattr(args, key.name)
            if value is not None:
                assignments[key.name] = (value, None)
        config = assemble(assignments)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: cannot read config: {err}", file=sys.stderr)
        return 1
    return dispatch(args.command, config)


if __name__ == "__main__":
    sys.exit(main())
