"""The maximal function of an indicator, and how its rearrangement compares
with the averaging operator applied to the rearrangement of the input.

Run:  python demos/01_maximal_and_rearrangement.py
"""
import numpy as np

from lorentzmax import GridDomain, GridFunction, maximal_fast, rearrangement
from lorentzmax.rearrange import hardy
from lorentzmax.verify import riesz_sandwich

# A box [-8, 8) with 1024 cells, and the indicator of [0, 1).
domain = GridDomain(1, 8.0, 1024)
f = GridFunction.from_boxes(domain, [(1.0, [0, 1])])
mf = maximal_fast(f)

# Away from the interval the best averaging interval just reaches across it,
# so Mf decays like 1/x on the right and 1/(1 - x) on the left.
print("x        Mf(x)    closed form")
for x in (-3.0, -1.0, 0.5, 2.0, 4.0):
    i = domain.index_of([x])[0]
    xc = domain.axis_centers()[i]
    exact = 1 / xc if xc >= 1 else (1 / (1 - xc) if xc <= 0 else 1.0)
    print(f"{xc:+.4f}  {mf.values[i]:.5f}  {exact:.5f}")

# Both sides of the sandwich, as functions of t.
t = np.array([0.5, 1.0, 2.0, 4.0, 8.0])
ms, fs = rearrangement(mf), rearrangement(f)
print("\nt      (Mf)*(t)   Pf*(t)   ratio")
for ti, a, b in zip(t, ms(t), hardy(fs, t)):
    print(f"{ti:<5}  {a:.5f}    {b:.5f}  {a / b:.4f}")

c, C = riesz_sandwich(f)
print(f"\nover the default t-grid the ratio stays within [{c:.4f}, {C:.4f}]")
