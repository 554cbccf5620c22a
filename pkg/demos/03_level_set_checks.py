"""Empirical constants for the level-set estimates of the maximal function
of an indicator, including the integral check against 11/12.

Run:  python demos/03_level_set_checks.py
"""
import math

from lorentzmax import GridDomain, GridSet, LorentzParams, PowerWeight, WeightU
from lorentzmax.verify import (corollary_inclusion_check, lemma21_check, lemma22_check,
                               prop24_integral)

d = GridDomain(1, 4.0, 2048)
P = LorentzParams(2.0, WeightU.constant(d), PowerWeight(0.0))
E = GridSet.from_boxes(d, [[0, 1]])

print("lambda   ||g||^p    (1+log 1/lambda)||chi_E||^p   ratio    c_est")
for lam in (0.1, 0.3, 0.5, 0.7, 0.9):
    lhs, base = lemma21_check(E, lam, P)
    c = lemma22_check(E, lam)
    assert c >= 1 / (1 - math.log(lam))
    assert corollary_inclusion_check(E, lam, c / 2)
    print(f"{lam:<7}  {lhs:.5f}    {base:.5f}                      {lhs / base:.4f}   {c:.4f}")

# The integral over lambda has the closed form 11/12 on the whole line. On a
# box the level sets {M chi > lambda} are cut off once they outgrow it, which
# costs about one percent whatever the box size.
print("\nhalf-width  value      rel. error vs 11/12")
for L in (4.0, 8.0, 16.0, 32.0):
    dd = GridDomain(1, L, 4096)
    PP = LorentzParams(2.0, WeightU.constant(dd), PowerWeight(0.0))
    v = prop24_integral(GridSet.from_boxes(dd, [[0, 1]]), 4.0, PP)
    print(f"{L:<10}  {v:.6f}   {v / (11 / 12) - 1:+.4f}")
