"""
Critical Sobolev indices s0 <= s1 by three independent routes.

delta_sum
    s1 = 1/2 - inf_t A_tau(t),  s0 = 1/2 - sup_t A_tau(t), where
    A_tau(t) = (1/log tau) sum_{t < |n| <= tau t} delta_n / n.
block_b
    Dyadic block averages b_k = (1/log 2) sum_{2^k < |j| <= 2^{k+1}} delta_j / j,
    then windowed means of b over N consecutive blocks.
weight_slope
    s0 = 1 - sigma_1(w), s1 = 1 - sigma_0(w) for w_n = 1/||psi||_{2^n}.

Limits are read at finite tau / window / k with a Cauchy gap (value at the
parameter minus value at half the parameter) as the uncertainty.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .kfunc import WeightSeq
from .spectra import Spectrum
from .subcouple import sigma_indices

__all__ = [
    "CriticalIndices",
    "s_from_deltas",
    "block_averages",
    "s_from_blocks",
    "s_from_weights",
    "reconcile",
    "ReconcileReport",
    "alternating_b",
    "default_t_grid",
]

RECONCILE_SLACK = 0.05


@dataclass(frozen=True)
class CriticalIndices:
    s0: float
    s1: float
    method: str
    tau_used: float = float("nan")
    t_range: tuple[float, float] = (float("nan"), float("nan"))
    uncertainty: float = 0.0
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.s0 <= self.s1:
            raise ValueError(f"s0={self.s0} exceeds s1={self.s1}")
        if not self.uncertainty >= 0:
            raise ValueError("uncertainty must be >= 0")

    @property
    def in_unit_range(self) -> bool:
        return 0 <= self.s0 and self.s1 <= 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["t_range"] = list(self.t_range)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "CriticalIndices":
        d = dict(d)
        d["t_range"] = tuple(d.get("t_range", (float("nan"),) * 2))
        return cls(**d)


# ---------------------------------------------------------------- delta route


def _prefix(s: Spectrum) -> np.ndarray:
    """C[m] = sum_{1 <= |n| <= m} delta_n / n, m = 0..N."""
    N = s.N
    n = np.arange(1, N + 1)
    d = s.delta
    pair = d[N + 1 :] / n + d[N - 1 :: -1] / (-n)
    return np.concatenate([[0.0], np.cumsum(pair)])


def default_t_grid(N: int, tau: float) -> np.ndarray:
    """Geometric grid, ratio 2^{1/4}, from 1 to N/tau."""
    top = N / tau
    if top < 1:
        raise ValueError(f"window N={N} too small for tau={tau}")
    k = int(math.floor(4 * math.log2(top) + 1e-9))
    return np.exp2(np.arange(k + 1) / 4)


def _delta_extremes(C: np.ndarray, tau: float, t: np.ndarray):
    a = (C[np.floor(tau * t).astype(int)] - C[np.floor(t).astype(int)]) / math.log(tau)
    return float(a.min()), float(a.max())


def s_from_deltas(s: Spectrum, tau: float = 256.0, t_grid: Sequence[float] | None = None) -> CriticalIndices:
    """Indices from windowed sums of delta_n / n.

    Every tau*t must stay inside the spectrum window; the uncertainty is the
    larger change of s0 or s1 when tau is halved on the same t-grid.
    """
    tau = float(tau)
    if tau < 4:
        raise ValueError(f"tau must be >= 4, got {tau}")
    t = default_t_grid(s.N, tau) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t.size == 0 or np.any(t < 1):
        raise ValueError("t_grid values must be >= 1")
    if np.floor(tau * t.max()) > s.N:
        raise ValueError(f"tau*t = {tau * t.max()} exceeds the spectrum window N={s.N}")
    n = s.n[s.n != 0]
    tau_im = s.tau[s.n != 0]
    C = _prefix(s)
    lo, hi = _delta_extremes(C, tau, t)
    lo2, hi2 = _delta_extremes(C, tau / 2, t)
    s0, s1 = 0.5 - hi, 0.5 - lo
    unc = max(abs(s0 - (0.5 - hi2)), abs(s1 - (0.5 - lo2)))
    params = {
        "N": s.N,
        "spectrum_id": s.fingerprint(),
        "sup_delta": s.sup_delta,
        "tau_sq_sum": float(np.sum(tau_im**2 / n.astype(float) ** 2)),
        "n_t": int(t.size),
    }
    return CriticalIndices(s0, s1, "delta_sum", tau, (float(t.min()), float(t.max())), unc, params)


# ---------------------------------------------------------------- block route


def block_averages(s: Spectrum, K: int | None = None) -> np.ndarray:
    """b_k = (1/log 2) sum_{2^k < |j| <= 2^{k+1}} delta_j / j for k = 1..K (index 0 is b_1)."""
    Kmax = int(math.floor(math.log2(s.N))) - 1
    K = Kmax if K is None else int(K)
    if K < 1 or K > Kmax:
        raise ValueError(f"K must be in [1, {Kmax}] for window N={s.N}")
    C = _prefix(s)
    k = np.arange(1, K + 1)
    return (C[2 ** (k + 1)] - C[2**k]) / math.log(2)


def _block_extremes(b: np.ndarray, N: int):
    cs = np.concatenate([[0.0], np.cumsum(b)])
    # window for n >= 1 covers b_{n+1}..b_{n+N}, i.e. list slots n..n+N-1
    starts = np.arange(1, b.size - N + 1)
    avg = (cs[starts + N] - cs[starts]) / N
    return float(avg.min()), float(avg.max())


def s_from_blocks(b: Sequence[float], N_window: int) -> CriticalIndices:
    """Indices from windowed means of block averages b_1, b_2, ...

    s0 = 1/2 - sup_n mean(b_{n+1..n+N}), s1 = 1/2 - inf_n mean(...), n >= 1.
    The table of (N, s0, s1) over N = 1, 2, 4, ..., N_window is attached.
    """
    b = np.asarray(b, dtype=float)
    N = int(N_window)
    if N < 1 or 2 * N > b.size:
        raise ValueError(f"N_window={N} must be in [1, len(b)/2 = {b.size // 2}]")
    table = []
    Ns = sorted({2**j for j in range(int(math.log2(N)) + 1)} | {N})
    for m in Ns:
        lo, hi = _block_extremes(b, m)
        table.append((m, 0.5 - hi, 0.5 - lo))
    s0, s1 = table[-1][1], table[-1][2]
    half = [r for r in table if r[0] <= N // 2]
    unc = max(abs(s0 - half[-1][1]), abs(s1 - half[-1][2])) if half else 0.0
    return CriticalIndices(s0, s1, "block_b", float("nan"), (1.0, float(b.size)), unc, {"N_window": N, "table": table})


def alternating_b(q: float, p: float, length: int) -> np.ndarray:
    """b_m = q on 2^{2k} < m <= 2^{2k+1}, p on 2^{2k-1} < m <= 2^{2k}, m = 1..length."""
    m = np.arange(1, length + 1)
    j = np.ceil(np.log2(m)).astype(int)  # 2^{j-1} < m <= 2^j
    return np.where(j % 2 == 1, q, p).astype(float)


# ---------------------------------------------------------------- weight route


def s_from_weights(w: WeightSeq, k_max: int | None = None) -> CriticalIndices:
    """s0 = 1 - sigma_1, s1 = 1 - sigma_0 from the weight growth indices."""
    k_max = max(1, w.n_max // 2) if k_max is None else int(k_max)
    s0_, s1_, table = sigma_indices(w, k_max)
    unc = 0.0
    if k_max >= 2:
        _, a0, a1 = table[k_max // 2 - 1]
        unc = max(abs(s0_ - a0), abs(s1_ - a1))
    params = {"k_max": k_max, "n_range": [w.n_min, w.n_max]}
    params.update({k: v for k, v in w.meta.items() if k in ("N_prod", "spectrum_id")})
    return CriticalIndices(1 - s1_, 1 - s0_, "weight_slope", float("nan"), (1.0, 2.0**w.n_max), unc, params)


# ---------------------------------------------------------------- reconciliation


@dataclass(frozen=True)
class ReconcileReport:
    status: str  # PASS | FAIL
    pairs: list
    slack: float

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_dict(self) -> dict:
        return {"status": self.status, "slack": self.slack, "pairs": self.pairs}


def reconcile(results: Sequence[CriticalIndices], slack: float = RECONCILE_SLACK) -> ReconcileReport:
    """PASS when every pair agrees within the sum of uncertainties plus ``slack``.

    Results that record different spectrum fingerprints never agree.
    """
    if len(results) < 2:
        raise ValueError("reconcile needs at least two results")
    pairs, ok = [], True
    for a, b in itertools.combinations(results, 2):
        allow = a.uncertainty + b.uncertainty + slack
        d0, d1 = abs(a.s0 - b.s0), abs(a.s1 - b.s1)
        ia, ib = a.parameters.get("spectrum_id"), b.parameters.get("spectrum_id")
        same = ia is None or ib is None or ia == ib
        agree = same and d0 <= allow and d1 <= allow
        ok &= agree
        pairs.append({"a": a.method, "b": b.method, "d_s0": d0, "d_s1": d1, "allowed": allow, "same_spectrum": same, "agree": agree})
    return ReconcileReport("PASS" if ok else "FAIL", pairs, slack)
