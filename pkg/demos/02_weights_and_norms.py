"""Weight constants for power weights, and the strong and weak Lorentz norms.

Run:  python demos/02_weights_and_norms.py
"""
from lorentzmax import (GridDomain, GridFunction, LorentzParams, PowerWeight, WeightU,
                        a1_constant, ap_constant, bp_constant, delta2_constant, is_divergent,
                        lambda_norm, lambda_weak_norm)

# The tail constant of w(t) = t^alpha is (alpha + 1)/(p - alpha - 1) when
# alpha < p - 1 and infinite from alpha = p - 1 on.
p = 2.0
print("alpha   B_p          Delta_2")
for alpha in (-0.5, 0.0, 0.5, 0.9, 1.0, 1.5):
    w = PowerWeight(alpha)
    bp = bp_constant(w, p)
    print(f"{alpha:<6}  {'divergent' if is_divergent(bp) else f'{bp:.6f}':<11}  {delta2_constant(w):.6f}")

# Spatial weights are sampled at cell centers. |x|^(1/2) stays A_2 under
# refinement while |x| sits on the edge: its A_2 estimate keeps creeping up.
print("\ncells   A_2(|x|^0.5)  A_2(|x|)  A_1(|x|^-0.5)")
for n in (64, 128, 256, 512):
    d = GridDomain(1, 1.0, n)
    print(f"{n:<6}  {ap_constant(WeightU.power(d, 0.5), 2):.4f}        "
          f"{ap_constant(WeightU.power(d, 1.0), 2):.4f}    {a1_constant(WeightU.power(d, -0.5)):.4f}")

# A two-level function under u = |x|^0.5 and w = t^0.5.
d = GridDomain(1, 4.0, 256)
P = LorentzParams(2.0, WeightU.power(d, 0.5), PowerWeight(0.5))
f = GridFunction.from_boxes(d, [(2.0, [0, 1]), (1.0, [-2, -1])])
print(f"\nstrong norm {lambda_norm(f, P):.6f}  >=  weak norm {lambda_weak_norm(f, P):.6f}")
