"""
Weighted sequence spaces l_p(w) and the operator T_theta = S - 2^theta I.

S is the right shift (S a)_n = a_{n-1}.  With the growth indices

    sigma_1 = lim_k sup_n (1/k) log2(w_{n+k}/w_n)
    sigma_0 = lim_k inf_{n>=0} (1/k) log2(w_{n+k}/w_n)

the range of T_theta on l_p(w) is all of l_p(w) when theta > sigma_1, the
closed codimension-one kernel of f_theta(a) = sum 2^{n theta} a_n when
theta < sigma_0, and not closed in between.

Sequences are finitely supported and stored as (offset, values) pairs in a
:class:`Seq`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import logsumexp

from .kfunc import WeightSeq

__all__ = [
    "Seq",
    "ThetaOperator",
    "SubcoupleClassification",
    "sigma_indices",
    "apply_T",
    "f_theta",
    "neumann_inverse",
    "finite_section_lsv",
    "classify",
    "two_slope_weight",
]

NEUMANN_MARGIN = 0.05


@dataclass(frozen=True)
class Seq:
    """Finitely supported sequence: ``values[i]`` sits at index ``offset + i``."""

    offset: int
    values: np.ndarray

    @classmethod
    def unit(cls, k: int) -> "Seq":
        return cls(k, np.ones(1))

    @property
    def stop(self) -> int:
        return self.offset + len(self.values)

    def __getitem__(self, n: int):
        i = n - self.offset
        return self.values[i] if 0 <= i < len(self.values) else 0.0

    def __add__(self, other: "Seq") -> "Seq":
        lo, hi = min(self.offset, other.offset), max(self.stop, other.stop)
        v = np.zeros(hi - lo, dtype=np.result_type(self.values, other.values))
        v[self.offset - lo : self.stop - lo] += self.values
        v[other.offset - lo : other.stop - lo] += other.values
        return Seq(lo, v)

    def __mul__(self, c) -> "Seq":
        return Seq(self.offset, c * self.values)

    __rmul__ = __mul__

    def __sub__(self, other: "Seq") -> "Seq":
        return self + (-1) * other

    def dense(self, lo: int, hi: int) -> np.ndarray:
        """Values on lo..hi (inclusive)."""
        out = np.zeros(hi - lo + 1, dtype=self.values.dtype)
        a, b = max(lo, self.offset), min(hi, self.stop - 1)
        if a <= b:
            out[a - lo : b - lo + 1] = self.values[a - self.offset : b - self.offset + 1]
        return out


def two_slope_weight(s_lo: float, s_hi: float, n_max: int, n_min: int | None = None) -> WeightSeq:
    """log2 w with slope s_lo on [2^j, 2^{j+1}) for even j, s_hi for odd j; flat below 1."""
    n_min = -n_max if n_min is None else n_min
    n = np.arange(n_min, n_max)
    slope = np.zeros(n.size)
    pos = n >= 1
    j = np.floor(np.log2(np.where(pos, n, 1))).astype(int)
    slope[pos] = np.where(j[pos] % 2 == 0, s_lo, s_hi)
    slope[n == 0] = s_lo
    return WeightSeq(n_min, np.concatenate([[0.0], np.cumsum(slope)]))


# ---------------------------------------------------------------- indices


def sigma_indices(w: WeightSeq, k_max: int):
    """sigma_0(k), sigma_1(k) for k = 1..k_max.

    Returns ``(sigma0, sigma1, table)`` with the values at ``k_max`` and the
    table rows ``(k, sigma0_k, sigma1_k)``.  sigma_1 takes the sup over all
    in-window n, sigma_0 the inf over n >= 0.
    """
    L = w.log2_w.size
    if k_max < 1 or 2 * k_max > L:
        raise ValueError(f"k_max={k_max} exceeds half the window length {L}")
    if w.n_max - k_max < 0:
        raise ValueError("window too short: no n >= 0 with n + k_max in window")
    lw = w.log2_w
    i0 = -w.n_min  # position of n = 0
    table = []
    for k in range(1, k_max + 1):
        d = (lw[k:] - lw[:-k]) / k
        s1 = float(d.max())
        s0 = float(d[max(i0, 0) :].min())
        table.append((k, s0, s1))
    return table[-1][1], table[-1][2], table


# ---------------------------------------------------------------- operator


@dataclass(frozen=True)
class ThetaOperator:
    """T_theta = S - 2^theta I on l_p(w), window [-N_w, N_w]."""

    theta: float
    weights: WeightSeq
    N_w: int | None = None

    def __post_init__(self):
        if not 0 < self.theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {self.theta}")
        if self.N_w is None:
            object.__setattr__(self, "N_w", min(-self.weights.n_min, self.weights.n_max))
        if self.N_w < 1 or -self.N_w < self.weights.n_min or self.N_w > self.weights.n_max:
            raise ValueError("window [-N_w, N_w] must lie inside the weight range")

    @property
    def lam(self) -> float:
        return 2.0**self.theta

    def norm(self, a: Seq) -> float:
        """l_p(w) norm over the weight range."""
        lo, hi = self.weights.n_min, self.weights.n_max
        if a.offset < lo or a.stop - 1 > hi:
            raise ValueError("sequence support leaves the weight range")
        v = np.abs(a.dense(lo, hi))
        p = self.weights.p
        nz = v > 0
        if not nz.any():
            return 0.0
        terms = p * (np.log(v[nz]) + math.log(2) * self.weights.log2_w[nz])
        return float(np.exp(logsumexp(terms) / p))


def apply_T(op: ThetaOperator, alpha: Seq) -> Seq:
    """(T alpha)_n = alpha_{n-1} - 2^theta alpha_n."""
    if alpha.offset < -op.N_w or alpha.stop > op.N_w:
        raise ValueError(f"support [{alpha.offset}, {alpha.stop - 1}] would be clipped by window +-{op.N_w}")
    v = np.zeros(len(alpha.values) + 1, dtype=np.result_type(alpha.values, float))
    v[1:] += alpha.values
    v[:-1] -= op.lam * alpha.values
    return Seq(alpha.offset, v)


def f_theta(theta: float, alpha: Seq):
    """sum 2^{n theta} alpha_n with compensated summation."""
    n = np.arange(alpha.offset, alpha.stop)
    terms = np.exp2(n * theta) * alpha.values
    if np.iscomplexobj(terms):
        return complex(math.fsum(terms.real), math.fsum(terms.imag))
    return math.fsum(terms)


def neumann_inverse(op: ThetaOperator, beta: Seq, tol: float = 1e-12, k_max: int | None = None) -> Seq:
    """alpha = -sum_j 2^{-(j+1) theta} S^j beta, solving T alpha = beta.

    Refused unless theta > sigma_1 + 0.05.  Terms are appended until the
    weighted norm of the increment drops below ``tol``; the residual
    ||T alpha - beta|| is then checked against ``10 tol``.
    """
    lw = op.weights
    k_max = k_max or max(1, min(lw.log2_w.size // 2, 64))
    _, s1, _ = sigma_indices(lw, k_max)
    if op.theta <= s1 + NEUMANN_MARGIN:
        raise ValueError(f"theta={op.theta} is not above sigma_1={s1:.4g} + {NEUMANN_MARGIN}; series may diverge")
    hi = op.N_w - 1
    acc = Seq(beta.offset, np.zeros(len(beta.values), dtype=np.result_type(beta.values, float)))
    term = beta * (-1.0 / op.lam)
    while True:
        if term.stop - 1 > hi:
            raise ArithmeticError("Neumann series reached the window edge before converging")
        acc = acc + term
        if op.norm(term) < tol:
            break
        term = Seq(term.offset + 1, term.values / op.lam)
    res = op.norm(apply_T(op, acc) - beta)
    if res >= 10 * tol:
        raise ArithmeticError(f"Neumann residual {res:.3g} exceeds 10*tol")
    return acc


def finite_section_lsv(op: ThetaOperator, sizes, tol: float = 1e-12) -> list[dict]:
    """Smallest singular value of the (2N+1)-square section of T in u_n = zeta_n/w_n coordinates.

    The section is lower bidiagonal (diagonal -2^theta, subdiagonal
    w_{n+1}/w_n); its singular values are the non-negative eigenvalues of the
    zero-diagonal Golub-Kahan tridiagonal, found by bisection.
    """
    rows = []
    lw = op.weights
    for N in sizes:
        N = int(N)
        if N > op.N_w:
            raise ValueError(f"size {N} exceeds window {op.N_w}")
        n = np.arange(-N, N + 1)
        lwn = lw.log2_w[n - lw.n_min]
        d = np.full(2 * N + 1, -op.lam)
        e = np.exp2(np.diff(lwn))
        off = np.empty(4 * N + 1)
        off[0::2] = d
        off[1::2] = e
        m = off.size + 1
        # eigenvalues come in +-pairs; index m//2 is the smallest non-negative one
        ev = eigh_tridiagonal(np.zeros(m), off, select="i", select_range=(m // 2, m // 2), eigvals_only=True, tol=tol)
        rows.append({"N": N, "lsv": float(abs(ev[0]))})
    return rows


# ---------------------------------------------------------------- trichotomy


@dataclass(frozen=True)
class SubcoupleClassification:
    theta: float
    verdict: str  # Invertible | CodimOneClosed | NotClosed
    sigma0: float
    sigma1: float
    uncertain: bool = False
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "sigma0": self.sigma0,
            "sigma1": self.sigma1,
            "verdict": self.verdict,
            "uncertain": self.uncertain,
            "lsv_table": self.evidence.get("lsv_table", []),
            "evidence": {k: v for k, v in self.evidence.items() if k != "lsv_table"},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def classify(theta: float, w: WeightSeq, k_max: int | None = None, lsv_sizes=None, seed: int = 0) -> SubcoupleClassification:
    """Trichotomy verdict from the sigma indices, with finite-section corroboration.

    The verdict is uncertain when theta lies within the k_max resolution
    (1/k_max) of sigma_0 or sigma_1.
    """
    L = w.log2_w.size
    k_max = k_max or max(1, min(L // 2, 64))
    s0, s1, table = sigma_indices(w, k_max)
    if theta > s1:
        verdict = "Invertible"
    elif theta < s0:
        verdict = "CodimOneClosed"
    else:
        verdict = "NotClosed"
    res = 1.0 / k_max
    uncertain = min(abs(theta - s0), abs(theta - s1)) < res
    evidence = {"k_max": k_max, "resolution": res}
    op = ThetaOperator(theta, w)
    if lsv_sizes is None:
        lsv_sizes = [s for s in (16, 64, 256, 1024) if s <= op.N_w]
    evidence["lsv_table"] = finite_section_lsv(op, lsv_sizes)
    if verdict == "CodimOneClosed":
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(8):
            a = Seq(int(rng.integers(-8, 8)), rng.standard_normal(int(rng.integers(1, 12))))
            ta = apply_T(op, a)
            scale = math.fsum(np.abs(np.exp2(np.arange(ta.offset, ta.stop) * theta) * ta.values))
            worst = max(worst, abs(f_theta(theta, ta)) / scale)
        evidence["range_annihilation"] = worst
    return SubcoupleClassification(theta, verdict, s0, s1, uncertain, evidence)
