"""
Dual-norm curve t -> ||psi||_t and the weight sequence derived from it.

``psi`` is the functional annihilating the exponential system; its Fourier
side is the generating function F.  Two independent formulas are provided:

* a series over the integers plus one boundary term, from expanding psi in
  the orthogonal basis {e_n} u {e_{it} - e_{-it}} of H^1(-pi, pi) with the
  inner product <f, g>_t = (f', g') + t^2 (f, g);
* the line integral int |F(x)|^2 / (x^2 + t^2) dx.

They agree up to a t-uniform factor.  Weights are w_n = 1/||psi||_{2^n}.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import logsumexp

from .genfun import GeneratingFunction, LogComplex
from .quadrature import NonConvergence, adaptive_log_integral, gl_rule

__all__ = [
    "NormEstimate",
    "DualNormCurve",
    "WeightSeq",
    "LineIntegral",
    "psi_norm_series",
    "psi_norm_integral",
    "log_line_integral",
    "dual_norm_curve",
    "weight_sequence",
    "h1_inner",
    "exp_pairing",
    "integer_closed_form",
    "log_sinh",
]

BOUNDARY_WEIGHT = 4.0
DOUBLING_TOL = 1e-9
M_LIMIT = 10**7


def log_sinh(x):
    """log sinh(x) for x > 0 without overflow."""
    x = np.asarray(x, dtype=float)
    return x + np.log(-np.expm1(-2 * x)) - math.log(2)


def integer_closed_form(t, boundary_weight: float = BOUNDARY_WEIGHT):
    """||psi||_t for F = sin(pi z)/pi: squared norm 2 bw tanh(pi t)/(pi^2 t)."""
    t = np.asarray(t, dtype=float)
    return np.sqrt(2 * boundary_weight * np.tanh(np.pi * t) / (np.pi**2 * t))


@dataclass(frozen=True)
class NormEstimate:
    t: float
    log_norm: float
    method: str
    cutoff: float  # M for the series, X for the integral
    tail_fraction: float = 0.0
    converged: bool = True

    @property
    def norm(self) -> float:
        return math.exp(self.log_norm)


@dataclass(frozen=True)
class DualNormCurve:
    """Sampled t -> log ||psi||_t with per-point truncation diagnostics."""

    t_values: np.ndarray
    log_norm: np.ndarray
    method: str
    estimates: tuple[NormEstimate, ...] = ()

    def __post_init__(self):
        if not np.all(np.isfinite(self.log_norm)):
            raise ValueError("log_norm must be finite")

    def monotone_violations(self, slack: float = 0.5 * math.log(2)) -> list[tuple[float, float]]:
        """Pairs t1 <= t2 (t1 >= 2) with log_norm(t2) > log_norm(t1) + slack."""
        out = []
        order = np.argsort(self.t_values)
        t, ln = self.t_values[order], self.log_norm[order]
        for i in range(len(t)):
            if t[i] < 2:
                continue
            for j in range(i + 1, len(t)):
                if ln[j] > ln[i] + slack:
                    out.append((float(t[i]), float(t[j])))
        return out

    def rows(self) -> list[dict]:
        return [
            {"t": e.t, "log_norm": e.log_norm, "method": e.method, "M_or_X": e.cutoff, "tail_fraction": e.tail_fraction}
            for e in self.estimates
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=["t", "log_norm", "method", "M_or_X", "tail_fraction"], lineterminator="\n")
        wr.writeheader()
        for r in self.rows():
            wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        return buf.getvalue()


# ---------------------------------------------------------------- series


def _log_boundary(g: GeneratingFunction, t: float, boundary_weight: float) -> float:
    diff = g(np.array([1j * t])) - g(np.array([-1j * t]))
    ld = float(np.asarray(diff.log_mag).ravel()[0])
    if np.isneginf(ld) or boundary_weight == 0:
        return -np.inf
    return math.log(boundary_weight) + 2 * ld - math.log(t) - float(log_sinh(2 * math.pi * t))


def psi_norm_series(
    g: GeneratingFunction,
    t: float,
    M: int | None = None,
    rtol: float = 1e-10,
    boundary_weight: float = BOUNDARY_WEIGHT,
) -> NormEstimate:
    """log ||psi||_t from the orthogonal-expansion series.

    ||psi||_t^2 = (1/2pi) sum_{|n|<=M} |F(n)|^2/(n^2+t^2)
                  + bw |F(it) - F(-it)|^2 / (t sinh 2 pi t).

    M starts at ``max(M, ceil(4t), 16)`` and doubles until the newly added
    shell contributes less than ``rtol`` of the total.  The default boundary
    weight ``bw = 4`` matches the reference normalisation used throughout;
    ``bw = 1/4`` is the exact orthonormal-expansion coefficient.
    """
    t = float(t)
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    M0 = max(int(math.ceil(4 * t)), 16)
    if M is not None:
        if M < 4 * t:
            raise ValueError(f"M must be >= 4t = {4 * t}")
        M0 = max(M0, int(M))
    log_b = _log_boundary(g, t, boundary_weight)
    log_norm_c = -math.log(2 * math.pi)

    def shell(lo, hi):
        la = g.log_abs_integers(hi)
        n = np.arange(-hi, hi + 1, dtype=float)
        keep = np.abs(n) >= lo
        n, la = n[keep], la[keep]
        terms = 2 * la - np.log(n * n + t * t) + log_norm_c
        return logsumexp(terms) if np.isfinite(terms).any() else -np.inf

    total_s = shell(0, M0)
    M_cur = M0
    while True:
        add = shell(M_cur + 1, 2 * M_cur)
        M_cur *= 2
        total = np.logaddexp(np.logaddexp(total_s, add), log_b)
        total_s = np.logaddexp(total_s, add)
        if np.isneginf(add) or add - total < math.log(rtol):
            break
        if M_cur > M_LIMIT:
            part = NormEstimate(t, 0.5 * float(total), "series", M_cur, converged=False)
            raise NonConvergence(f"series did not converge by M={M_cur}", part)
    total = float(np.logaddexp(total_s, log_b))
    if not np.isfinite(total):
        raise ValueError("series is identically zero")
    return NormEstimate(t, 0.5 * total, "series", float(M_cur))


# ---------------------------------------------------------------- integral


@dataclass(frozen=True)
class LineIntegral:
    """log of int_R |F(x)|^2/(x^2+t^2) dx with tail diagnostics."""

    log_value: float
    tail_fraction: float
    converged: bool
    X: float
    slopes: tuple[float, float]


def _panel_edges(t: float, X: float) -> np.ndarray:
    near = min(4 * t, X)
    e1 = np.linspace(0.0, near, int(round(near * 8)) + 1)
    if X <= near:
        return e1
    e2 = np.linspace(near, X, int(math.ceil(X - near)) + 1)
    return np.concatenate([e1, e2[1:]])


def _tail(panel_log, edges, X):
    """Fit panel density ~ A x^beta on [X/4, X]; return (log tail, beta)."""
    mid = 0.5 * (edges[:-1] + edges[1:])
    width = np.diff(edges)
    sel = mid >= X / 4
    lx, ly = np.log(mid[sel]), panel_log[sel] - np.log(width[sel])
    beta, logA = np.polyfit(lx, ly, 1)
    if beta >= -1:
        return np.inf, float(beta)
    return float(logA + (beta + 1) * math.log(X) - math.log(-(beta + 1))), float(beta)


def log_line_integral(
    g: GeneratingFunction, t: float, X: float | None = None, rtol: float = 1e-8, use_symmetry: bool = True
) -> LineIntegral:
    """int_{-inf}^{inf} |F(x)|^2/(x^2+t^2) dx in the log domain.

    Composite 16-point Gauss-Legendre on [0, X] and [-X, 0] (panels of width
    1/8 for |x| <= 4t, width 1 beyond), halved until the relative change is
    below ``rtol``, plus a power-law tail fitted from the panel integrals on
    [X/4, X].
    """
    t = float(t)
    X = 64 * t if X is None else float(X)
    edges = _panel_edges(t, X)
    # |F(-x)| = |F(x)| for real symmetric spectra: integrate one half-line
    symmetric = use_symmetry and g.spectrum.is_real and g.spectrum.is_symmetric
    logs, tails, slopes, conv = [], [], [], True
    for sgn in (1.0,) if symmetric else (1.0, -1.0):

        def lf(x, s=sgn):
            return 2 * g.log_abs(s * x) - np.log(x * x + t * t)

        tot, pl, e, ok = adaptive_log_integral(lf, edges, rtol=rtol)
        lt, beta = _tail(pl, e, X)
        logs.append(tot)
        tails.append(lt)
        slopes.append(beta)
        conv &= ok
    if symmetric:
        logs, tails, slopes = logs * 2, tails * 2, slopes * 2
    body = float(logsumexp(logs))
    tail = float(logsumexp(tails)) if all(np.isfinite(tails)) else np.inf
    total = float(np.logaddexp(body, tail))
    frac = math.exp(tail - total) if np.isfinite(tail) else 1.0
    return LineIntegral(total if np.isfinite(tail) else body, frac, conv, X, (slopes[0], slopes[1]))


def psi_norm_integral(g: GeneratingFunction, t: float, X: float | None = None, rtol: float = 1e-8) -> NormEstimate:
    """log ||psi||_t from the line integral: (1/2) log int |F(x)|^2/(x^2+t^2) dx.

    ``X`` defaults to 64t and must be at least 16t.  ``converged`` is False
    when the quadrature did not settle or the tail fraction exceeds 10%.
    """
    t = float(t)
    if t < 2:
        raise ValueError(f"t must be >= 2, got {t}")
    X = 64 * t if X is None else float(X)
    if X < 16 * t:
        raise ValueError(f"X must be >= 16t = {16 * t}")
    li = log_line_integral(g, t, X, rtol)
    return NormEstimate(t, 0.5 * li.log_value, "integral", X, li.tail_fraction, li.converged and li.tail_fraction <= 0.1)


def dual_norm_curve(g: GeneratingFunction, t_values: Sequence[float], method: str = "series", **kw) -> DualNormCurve:
    """Evaluate ||psi||_t on a grid with the chosen method."""
    fn = {"series": psi_norm_series, "integral": psi_norm_integral}.get(method)
    if fn is None:
        raise ValueError("method must be 'series' or 'integral'")
    est = tuple(fn(g, float(t), **kw) for t in t_values)
    return DualNormCurve(np.array([e.t for e in est]), np.array([e.log_norm for e in est]), method, est)


# ---------------------------------------------------------------- weights


@dataclass(frozen=True)
class WeightSeq:
    """Weights w_n on n_min..n_max for l_p(w), stored as log2 w.

    Enforces w_n <= w_{n+1} <= 2 w_n up to a multiplicative tolerance.
    """

    n_min: int
    log2_w: np.ndarray
    p: float = 2.0
    tol: float = DOUBLING_TOL
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        lw = np.array(self.log2_w, dtype=float)
        if lw.ndim != 1 or lw.size < 2 or not np.all(np.isfinite(lw)):
            raise ValueError("log2_w must be a finite 1-D array of length >= 2")
        d = np.diff(lw)
        slack = math.log2(1 + self.tol)
        bad = np.flatnonzero((d < -slack) | (d > 1 + slack))
        if bad.size:
            k = int(bad[0])
            raise ValueError(
                f"doubling invariant violated at n={self.n_min + k}: log2(w_(n+1)/w_n) = {d[k]:.3g}"
            )
        lw.setflags(write=False)
        object.__setattr__(self, "log2_w", lw)

    @property
    def n_max(self) -> int:
        return self.n_min + self.log2_w.size - 1

    @property
    def n(self) -> np.ndarray:
        return np.arange(self.n_min, self.n_max + 1)

    @property
    def w(self) -> np.ndarray:
        return np.exp2(self.log2_w)

    def __getitem__(self, n: int) -> float:
        return float(np.exp2(self.log2_w[n - self.n_min]))

    @classmethod
    def from_slope(cls, slope: float, n_max: int, n_min: int | None = None) -> "WeightSeq":
        """w_n = 2^{slope n} for n >= 0 and 1 for n < 0."""
        n_min = -n_max if n_min is None else n_min
        n = np.arange(n_min, n_max + 1)
        return cls(n_min, slope * np.maximum(n, 0))

    @classmethod
    def from_function(cls, log2_w: Callable[[np.ndarray], np.ndarray], n_min: int, n_max: int) -> "WeightSeq":
        return cls(n_min, np.asarray(log2_w(np.arange(n_min, n_max + 1)), dtype=float))


def weight_sequence(
    g: GeneratingFunction, n_max: int, n_min: int | None = None, boundary_weight: float = BOUNDARY_WEIGHT
) -> WeightSeq:
    """w_n = 1/||psi||_{2^n} (series method) for 0 <= n <= n_max, w_n = w_0 below.

    ``n_min`` defaults to ``-n_max`` so that sup-type indices see the
    constant part.
    """
    if n_max < 4:
        raise ValueError("n_max must be >= 4")
    n_min = -n_max if n_min is None else int(n_min)
    if n_min > 0:
        raise ValueError("n_min must be <= 0")
    est = [psi_norm_series(g, 2.0**k, boundary_weight=boundary_weight) for k in range(n_max + 1)]
    lw_pos = np.array([-e.log_norm / math.log(2) for e in est])
    lw = np.concatenate([np.full(-n_min, lw_pos[0]), lw_pos])
    return WeightSeq(n_min, lw, meta={"method": "series", "N_prod": g.N_prod, "spectrum_id": g.spectrum.fingerprint(), "M": [e.cutoff for e in est]})


# ---------------------------------------------------------------- H^1 pairings


def h1_inner(f, df, g, dg, t: float, n_nodes: int = 256) -> complex:
    """<f, g>_t = (f', g') + t^2 (f, g) on (-pi, pi) by Gauss-Legendre."""
    x, w = gl_rule(n_nodes)
    x = np.pi * x
    w = np.pi * w
    val = np.sum(w * (df(x) * np.conj(dg(x)) + t * t * f(x) * np.conj(g(x))))
    return complex(val)


def exp_pairing(a: complex, b: complex, t: float | None = None) -> complex:
    """Closed-form (e_a, e_b) on (-pi, pi), e_a(x) = e^{iax}; H^1(t) form if t is given."""
    d = a - np.conj(b)
    l2 = 2 * np.pi if d == 0 else 2 * np.sin(np.pi * d) / d
    if t is None:
        return complex(l2)
    return complex((a * np.conj(b) + t * t) * l2)
