"""
Gram matrices of exponential systems e_lambda(x) = exp(i lambda x) on
(-pi, pi), Riesz bounds, the basis weights v_n, h_n, q_n, and the ratio of
the dual norm to t^{1/2} e^{-pi t} Phi(it).
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .genfun import GeneratingFunction, eval_Phi_it
from .kfunc import DualNormCurve, log_sinh
from .spectra import Spectrum

__all__ = [
    "GramMatrix",
    "BasisWeights",
    "gram",
    "cond_and_bounds",
    "basis_weights",
    "psitnorm_ratio",
    "frame_ratio",
    "sin_pi",
]


def sin_pi(a):
    """sin(pi a) for complex a, with exact zeros at the integers."""
    a = np.asarray(a, dtype=complex)
    m = np.rint(a.real)
    r = (a.real - m) + 1j * a.imag
    sign = np.where(np.mod(m, 2) == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * r)


def _l2_kernel(d):
    """2 sin(pi d)/d with value 2 pi at d = 0."""
    d = np.asarray(d, dtype=complex)
    zero = d == 0
    safe = np.where(zero, 1.0, d)
    return np.where(zero, 2 * np.pi, 2 * sin_pi(safe) / safe)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    mode: str  # "L2" | "H1"
    t: float | None = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def hermitian_defect(self) -> float:
        G = self.entries
        return float(np.max(np.abs(G - G.conj().T)))

    def min_eig_ratio(self) -> float:
        """Smallest eigenvalue divided by ||G||_2."""
        ev = np.linalg.eigvalsh(self.entries)
        return float(ev[0] / max(abs(ev[-1]), abs(ev[0])))

    def to_bytes(self) -> bytes:
        """One JSON header line, then complex128 entries in row-major order."""
        head = {"size": self.size, "mode": self.mode, "t": self.t, "dtype": "complex128", "order": "row-major"}
        return (json.dumps(head) + "\n").encode() + np.ascontiguousarray(self.entries, dtype="<c16").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "GramMatrix":
        nl = data.index(b"\n")
        head = json.loads(data[:nl])
        n = int(head["size"])
        arr = np.frombuffer(data[nl + 1 :], dtype="<c16")
        if arr.size != n * n:
            raise ValueError(f"expected {n * n} entries, found {arr.size}")
        return cls(arr.reshape(n, n).copy(), head["mode"], head.get("t"))


def gram(s: Spectrum, mode: str = "L2", t: float | None = None, N: int | None = None) -> GramMatrix:
    """Closed-form Gram matrix of {e_lambda_n}, |n| <= N.

    L2:    (e_a, e_b) = 2 sin(pi (a - conj b)) / (a - conj b)
    H1(t): (a conj b + t^2) (e_a, e_b)
    """
    if N is not None:
        s = s.window(N)
    lam = s.lam
    d = lam[:, None] - np.conj(lam)[None, :]
    G = _l2_kernel(d)
    if mode == "L2":
        return GramMatrix(G, "L2", None)
    if mode != "H1":
        raise ValueError("mode must be 'L2' or 'H1'")
    if t is None or t < 1:
        raise ValueError("H1 mode requires t >= 1")
    G = (lam[:, None] * np.conj(lam)[None, :] + t * t) * G
    return GramMatrix(G, "H1", float(t))


def cond_and_bounds(G: GramMatrix, normalize: bool = True, rtol: float = 1e-12):
    """(cond, riesz_lower, riesz_upper) from the extreme eigenvalues.

    With ``normalize`` the matrix is first scaled to unit diagonal.  A
    smallest eigenvalue below ``rtol`` times the largest gives cond = inf.
    """
    A = G.entries
    if normalize:
        dg = np.sqrt(np.real(np.diag(A)))
        A = A / np.outer(dg, dg)
    ev = np.linalg.eigvalsh(A)
    lo, hi = float(ev[0]), float(ev[-1])
    if lo <= rtol * hi:
        return math.inf, math.sqrt(max(lo, 0.0)), math.sqrt(hi)
    return hi / lo, math.sqrt(lo), math.sqrt(hi)


@dataclass(frozen=True)
class BasisWeights:
    v: np.ndarray
    h: np.ndarray
    q: np.ndarray
    s_exp: float


def basis_weights(s: Spectrum, s_exp: float) -> BasisWeights:
    """v_n = ||e_lambda_n||^2 = sinh(2 pi tau_n)/tau_n, h_n = (1+|lambda_n|^2) v_n, q_n = v_n^{1-s} h_n^s."""
    if not 0 <= s_exp <= 1:
        raise ValueError("s_exp must be in [0, 1]")
    tau = s.tau
    zero = tau == 0
    safe = np.where(zero, 1.0, tau)
    v = np.where(zero, 2 * np.pi, np.sinh(2 * np.pi * safe) / safe)
    r = 1 + np.abs(s.lam) ** 2
    diag = np.real(np.diag(gram(s).entries))
    if not np.allclose(v, diag, rtol=1e-10, atol=0):
        raise ArithmeticError("v_n disagrees with the Gram diagonal")
    return BasisWeights(v, r * v, v * r**s_exp, float(s_exp))


def psitnorm_ratio(g: GeneratingFunction, curve: DualNormCurve) -> dict:
    """r(t) = ||psi||_t / (t^{1/2} e^{-pi t} Phi(it)), evaluated in logs."""
    t = np.asarray(curve.t_values, dtype=float)
    if t.size < 4:
        raise ValueError("need at least 4 grid points")
    log_phi = np.array([eval_Phi_it(g, tt).log_mag for tt in t])
    log_r = np.asarray(curve.log_norm) - (0.5 * np.log(t) - np.pi * t + log_phi)
    if not np.all(np.isfinite(log_r)):
        raise ArithmeticError("non-finite ratio")
    return {
        "t": t,
        "log_r": log_r,
        "r": np.exp(log_r),
        "band": float(np.exp(log_r.max() - log_r.min())),
    }


def frame_ratio(s: Spectrum, t: float) -> float:
    """Weighted samples of f = e_{it} over ||f||^2.

    sum_n (1+|tau_n|) e^{-2 pi |tau_n|} |(e_{it}, e_{conj lambda_n})|^2 / (sinh(2 pi t)/t),
    with the pairing 2 sin(pi(lambda_n - i t))/(lambda_n - i t).
    """
    lam = s.lam
    tau = s.tau
    d = lam - 1j * t
    log_pair = np.log(np.abs(_l2_kernel(d)))
    log_terms = np.log1p(np.abs(tau)) - 2 * np.pi * np.abs(tau) + 2 * log_pair
    log_norm2 = float(log_sinh(2 * np.pi * t)) - math.log(t)
    return float(np.exp(np.logaddexp.reduce(log_terms) - log_norm2))
