"""Where the excited-state levels anticross, and how strongly they mix.

Sweeps the axial magnetic field through the region where the m_S = 0 and
m_S = -1 excited branches meet, prints the level diagram around the
crossing, and locates the minimal gap for each hyperfine-coupled pair.
The transverse hyperfine term turns each crossing into an avoided one:
the gap never closes, and at its minimum the two levels are fully mixed,
which is what lets optical cycling swap electron and nuclear spin.
"""
import numpy as np

from nvreadout import (
    NvParameters,
    diagonal_crossing_field,
    flip_flop_probability,
    lac_pairs,
    level_diagram,
    minimal_gap_field,
    nominal_lac_field,
    pair_gap,
)

params = NvParameters.nitrogen_14()

# coarse diagram through the crossing region
fields = np.arange(440.0, 561.0, 20.0)
diagram = level_diagram(params, fields, "excited")
print("excited-state levels (MHz) vs field (G), 14N")
print("  B/G " + "".join(f"{f'E{k + 1}':>10}" for k in range(9)))
for i, field in enumerate(diagram.fields):
    row = "".join(f"{e:10.1f}" for e in diagram.energies[i])
    print(f"{field:6.0f}{row}")

print()
print(f"bare electron crossing d_es / gamma_e = {nominal_lac_field(params):.2f} G")
print()

# each coupled pair conserves m_S + m_I, so only two pairs anticross
for pair in sorted(lac_pairs(params), key=str):
    a, b = sorted(pair, key=lambda s: s.m_s)
    field, gap = minimal_gap_field(params, pair, (450.0, 550.0), 0.05)
    bare = diagonal_crossing_field(params, pair)
    print(f"pair {a} / {b}:")
    print(f"  diagonal crossing         {bare:9.2f} G")
    print(f"  minimal gap               {gap:9.2f} MHz at {field:.2f} G")
    print(f"  gap 50 G off the minimum  {pair_gap(params, pair, field + 50.0):9.2f} MHz")

# mixing probability of each pair: the chance an optical cycle flips
# electron and nuclear spin together
print()
print("flip-flop probability vs field")
print(f"{'B/G':>6}" + "".join(f"{str(sorted(p, key=lambda s: s.m_s)[0]):>14}" for p in sorted(lac_pairs(params), key=str)))
for field in (0.0, 300.0, 494.4, 505.0, 600.0):
    analysis = flip_flop_probability(params, field)
    cells = "".join(
        f"{analysis.pair_probabilities[p]:14.4f}" for p in sorted(lac_pairs(params), key=str)
    )
    print(f"{field:6.1f}{cells}")

print()
print("at the anticrossing the probability saturates near 1; far away the")
print("pairs decouple and optical cycling preserves the nuclear projection")
