"""
Shift operators on weighted sequence spaces, and A2 weights on the line.

T = S - 2^theta I on l_2(w) with w_n = 2^{n/2}: invertible above theta = 1/2,
a closed subspace of codimension one below, and a non-closed range at the
boundary.  Finite sections show the difference: their smallest singular
value settles when T is invertible, collapses geometrically below theta = 1/2
(the missing direction of the codimension-one range), and decays slowly, like
a power of N, at the boundary where the range is not closed.

The same boundary shows up for |F(x+i)|^2 / (1 + |x|^{2s}): below the
critical exponent the A2 constant is flat across scales, above it grows.
"""

from rieszlab.genfun import GeneratingFunction
from rieszlab.kfunc import WeightSeq
from rieszlab.muckenhoupt import sweep_s
from rieszlab.spectra import make_constant_shift
from rieszlab.subcouple import classify

w = WeightSeq.from_slope(0.5, 1024)
for theta in (0.25, 0.5, 0.75):
    c = classify(theta, w)
    lsv = "  ".join(f"N={r['N']}: {r['lsv']:.4f}" for r in c.evidence["lsv_table"])
    flag = " (at resolution limit)" if c.uncertain else ""
    print(f"theta={theta}: {c.verdict}{flag}\n    {lsv}")

g = GeneratingFunction(make_constant_shift(0.2, 2**16))
out = sweep_s(g, [0.2, 0.4, 0.6, 0.8, 0.9], y=1.0, j_max=14, s_crit=(0.7, 0.7))
print("\nA2 constants, q = 0.2 (critical exponent 0.7)")
for row in out["summary"]["rows"]:
    print(f"  s={row['s']:.1f}  growth {row['growth']:8.2f}  {row['status']}")
print("consistent with the critical window:", out["summary"]["consistent"])
