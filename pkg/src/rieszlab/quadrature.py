"""Composite Gauss-Legendre quadrature of log-domain integrands."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import logsumexp


class NonConvergence(ArithmeticError):
    """A numerical procedure stopped before meeting its tolerance.

    ``partial`` holds the best available value.
    """

    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


@lru_cache(maxsize=16)
def gl_rule(n: int):
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_nodes(edges, n: int = 16):
    """Nodes (P, n) and log-weights (P, n) of an n-point rule on each panel."""
    edges = np.asarray(edges, dtype=float)
    x, w = gl_rule(n)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    return a + half * (1 + x[None, :]), np.log(half) + np.log(w)[None, :]


def log_panel_integrals(log_f, edges, n: int = 16, chunk: int = 4096):
    """log of int over each panel of exp(log_f(x)), for a vectorised ``log_f``."""
    edges = np.asarray(edges, dtype=float)
    out = np.empty(edges.size - 1)
    for i in range(0, edges.size - 1, chunk):
        e = edges[i : i + chunk + 1]
        xs, lw = panel_nodes(e, n)
        out[i : i + e.size - 1] = logsumexp(log_f(xs) + lw, axis=1)
    return out


def refine(edges):
    """Split every panel in two."""
    edges = np.asarray(edges, dtype=float)
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(2 * edges.size - 1)
    out[0::2] = edges
    out[1::2] = mids
    return out


def adaptive_log_integral(log_f, edges, n: int = 16, rtol: float = 1e-8, max_halvings: int = 6):
    """Halve all panels until the total changes by less than ``rtol`` (relative).

    Returns ``(log_total, panel_log_integrals, edges, converged)`` for the
    finest level reached.
    """
    edges = np.asarray(edges, dtype=float)
    pl = log_panel_integrals(log_f, edges, n)
    total = logsumexp(pl)
    for _ in range(max_halvings):
        fine = refine(edges)
        pf = log_panel_integrals(log_f, fine, n)
        new = logsumexp(pf)
        converged = abs(np.expm1(new - total)) < rtol
        edges, pl, total = fine, pf, new
        if converged:
            # coarse-pair sums are what the caller wants for per-panel fits
            return total, np.logaddexp(pl[0::2], pl[1::2]), edges[0::2], True
    return total, np.logaddexp(pl[0::2], pl[1::2]), edges[0::2], False
