"""Simulated spectra: ground ODMR, nuclear resonance, excited-state ESR.

All three are fluorescence-detected.  ODMR shows the hyperfine triplet
at low field collapsing into the m_I = +1 line once optical pumping
polarizes the nucleus.  Driving the nucleus directly gives quadrupole-
split lines whose position measures the hyperfine and Zeeman terms in
each electron branch.  The excited-state lines are lifetime-broadened to
tens of MHz, which is why the anticrossing, not microwave spectroscopy,
is the useful handle up there.
"""
import numpy as np

from nvreadout import (
    NvParameters,
    RateParameters,
    dip_positions,
    excited_state_esr,
    nuclear_resonance_spectrum,
    odmr_spectrum,
)

params = NvParameters.nitrogen_14()
rates = RateParameters()


def sketch(frequencies, values, rows=24, width=50):
    """Coarse text rendering of a spectrum, one bar per downsampled point."""
    floor, peak = float(values.min()), float(values.max())
    span = peak - floor if peak > floor else 1.0
    for k in np.linspace(0, len(values) - 1, rows).astype(int):
        depth = int(round(width * (peak - values[k]) / span))
        print(f"  {frequencies[k]:9.3f} MHz |{'#' * depth}")


print("ground-state ODMR at 10 G (hyperfine triplet)")
grid = np.arange(2838.0, 2848.0, 0.02)
spectrum = odmr_spectrum(params, rates, 10.0, grid, rabi_frequency=0.3)
dips = dip_positions(spectrum.frequencies, spectrum.counts)
print(f"  dips at {', '.join(f'{d:.3f}' for d in dips)} MHz"
      f"  (splitting {np.diff(dips).mean():.3f} MHz = |a_gs|)")

print()
print("ground-state ODMR at 500 G (nucleus pumped into m_I = +1)")
grid = np.arange(1462.0, 1482.0, 0.05)
spectrum = odmr_spectrum(params, rates, 500.0, grid)
dips = dip_positions(spectrum.frequencies, spectrum.counts)
print(f"  single dip at {dips[0]:.3f} MHz; the other two hyperfine lines"
      " vanish because pumping empties their sublevels")

print()
print("nuclear resonance at 500 G, m_S = 0 branch")
grid = np.arange(4.2, 5.7, 0.005)
spectrum = nuclear_resonance_spectrum(params, rates, 500.0, 0, grid)
sketch(spectrum.frequencies, spectrum.counts)
dips = dip_positions(spectrum.frequencies, spectrum.counts)
print(f"  centered on the quadrupole constant q = {params.q} MHz,"
      f" split by twice the nuclear Zeeman term;")
print("  the lower line is deeper: it moves population two swaps from"
      " the bright level")

print()
print("nuclear resonance at 500 G, m_S = -1 branch")
grid = np.arange(2.2, 7.8, 0.01)
spectrum = nuclear_resonance_spectrum(params, rates, 500.0, -1, grid)
dips = dip_positions(spectrum.frequencies, spectrum.counts, minimum_contrast=0.05)
print(f"  lines at {', '.join(f'{d:.3f}' for d in dips)} MHz:"
      " the hyperfine shift a_gs enters with opposite signs")

print()
print("excited-state ESR at 20 G")
grid = np.arange(1280.0, 1460.0, 1.0)
esr = excited_state_esr(params, 20.0, grid, lifetime_ns=10.0)
print(f"  line centers {', '.join(f'{c:.1f}' for c in esr.line_centers)} MHz")
print(f"  lifetime-limited width {esr.linewidth:.1f} MHz"
      " swallows the 40 MHz hyperfine splitting into shoulders")
