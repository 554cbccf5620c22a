"""Weak- and strong-type operator-norm estimates across refinements, and the
randomized search for large family ratios.

Run:  python demos/04_equivalence_and_search.py
"""
from lorentzmax import (GridDomain, LorentzParams, PowerWeight, WeightU, raposo_exhaustive,
                        raposo_search)
from lorentzmax.verify import equivalence_report

levels = [256, 512, 1024, 2048]
for alpha in (0.5, 1.0, 1.5):
    d = GridDomain(1, 8.0, levels[0])
    rep = equivalence_report(LorentzParams(2.0, WeightU.constant(d), PowerWeight(alpha)), levels, 64, 0)
    print(f"w = t^{alpha}: {rep.verdict} {rep.flags or ''}")
    for row in rep.rows:
        print(f"   n = {row['level']:<5} weak {row['weak']:.4f}  strong {row['strong']:.4f}"
              f"  (witness {row['strong_witness']})")

# On 16 cells with u = w = 1 the exhaustive oracle and the search agree.
d = GridDomain(1, 1.0, 16)
u, w = WeightU.constant(d), PowerWeight(0.0)
best, family = raposo_exhaustive(u, w, 1.0)
(cert,) = raposo_search(u, w, 2.0, budget=128, seed=0, q_grid=[1.0])
print(f"\nexhaustive sup {best:.6f}, search {cert.ratio:.6f}, certificate verifies: {cert.verify(u, w)}")
for Q, S in cert.family.pairs:
    print(f"   cube cells [{Q.lower[0]}, {Q.lower[0] + Q.side}) with S = {S.mask.nonzero()[0].tolist()}")

# A weight that fails the A_2 condition drives the ratio up with refinement.
print("\ncells  ratio (u=|x|^1.5)  ratio (u=|x|^0.5)")
for n in (32, 64, 128):
    d = GridDomain(1, 1.0, n)
    r = [raposo_search(WeightU.power(d, a), PowerWeight(0.0), 2.0, budget=4, seed=0,
                       q_grid=[16 / 9])[0].ratio for a in (1.5, 0.5)]
    print(f"{n:<5}  {r[0]:.4f}             {r[1]:.4f}")
