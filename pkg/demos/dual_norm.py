"""
The dual norm t -> ||psi||_t and the carrier function.

For the integers everything is explicit: F(z) = sin(pi z)/pi and the series
collapses to a single boundary term.  For a shifted spectrum the series and
the line integral differ by a factor that does not depend on t, and the
ratio to t^{1/2} e^{-pi t} Phi(it) stays flat.
"""

import math

import numpy as np

from rieszlab.basisdiag import psitnorm_ratio
from rieszlab.genfun import GeneratingFunction
from rieszlab.kfunc import dual_norm_curve, psi_norm_integral, psi_norm_series
from rieszlab.spectra import make_constant_shift, make_integers

t_grid = [4.0, 8.0, 16.0, 32.0, 64.0]

g = GeneratingFunction(make_integers(4096))
print("integers: ||psi||_t^2 against 8 tanh(pi t)/(pi^2 t)")
for t in t_grid:
    got = math.exp(2 * psi_norm_series(g, t).log_norm)
    want = 8 * math.tanh(math.pi * t) / (math.pi**2 * t)
    print(f"  t={t:5.1f}  {got:.12e}  {want:.12e}")

g = GeneratingFunction(make_constant_shift(0.2, 2**16))
print("\nq = 0.2: series over integral")
for t in t_grid:
    a, b = psi_norm_series(g, t), psi_norm_integral(g, t)
    print(f"  t={t:5.1f}  ratio {math.exp(a.log_norm - b.log_norm):.5f}  (tail fraction {b.tail_fraction:.3f})")

r = psitnorm_ratio(g, dual_norm_curve(g, t_grid))
print("\nratio to the carrier function:", np.round(r["r"], 6), " band", f"{r['band']:.6f}")
