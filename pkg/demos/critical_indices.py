"""
Critical indices of a shifted integer spectrum, three ways.

lambda_n = n - 0.1 sign(n) moves every frequency a tenth towards the
origin.  The window of Sobolev exponents where the exponentials stop being a
Riesz basis collapses to a single point here, s0 = s1 = 0.7.  We read it off
the perturbations directly, from dyadic block averages, and from the growth
of the dual-norm weights w_n = 1/||psi||_{2^n}.
"""

from rieszlab.critical import block_averages, reconcile, s_from_blocks, s_from_deltas, s_from_weights
from rieszlab.genfun import GeneratingFunction
from rieszlab.kfunc import weight_sequence
from rieszlab.spectra import make_constant_shift

s = make_constant_shift(0.2, 2**16)

# windowed sums of delta_n / n; tau is the window ratio
by_delta = s_from_deltas(s, tau=256)

# same information, binned into dyadic blocks first
b = block_averages(s)
print("block averages b_k:", " ".join(f"{x:+.4f}" for x in b[:8]), "...")
by_blocks = s_from_blocks(b, 7)

# the weights only see |F| on the integers and at i*2^n
g = GeneratingFunction(s)
w = weight_sequence(g, 10)
print("log2 w_n increments:", " ".join(f"{x:.3f}" for x in (w.log2_w[1:] - w.log2_w[:-1])[-6:]))
by_weights = s_from_weights(w)

for r in (by_delta, by_blocks, by_weights):
    print(f"{r.method:>13}: s0 = {r.s0:.4f}  s1 = {r.s1:.4f}  (+- {r.uncertainty:.3f})")

rep = reconcile([by_delta, by_blocks, by_weights])
print("reconcile:", rep.status)
