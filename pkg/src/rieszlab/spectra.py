"""
Frequency sequences (lambda_n), |n| <= N, and their elementary diagnostics.

A :class:`Spectrum` is an immutable, finite window of a two-sided sequence of
complex frequencies indexed by n = -N..N.  Everything downstream treats N as a
convergence parameter.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import polygamma

__all__ = [
    "PerturbationSpec",
    "Spectrum",
    "make_integers",
    "make_constant_shift",
    "make_block",
    "make_custom",
    "separation_constant",
    "blaschke_report",
]

KADETS_BOUND = 0.25


@dataclass(frozen=True)
class PerturbationSpec:
    """How a spectrum was generated.

    ``kind`` is one of ``"constant_shift"``, ``"dyadic_block"``, ``"custom"``.
    ``sign`` is the explicit sign convention: delta_n = sign * (q/2) * sign(n).
    """

    kind: str
    q: float = 0.0
    p: float = 0.0
    sign: int = -1
    boundaries: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "sign": self.sign}
        if self.kind in ("constant_shift", "dyadic_block"):
            d["q"] = self.q
        if self.kind == "dyadic_block":
            d["p"] = self.p
            d["boundaries"] = list(self.boundaries)
        return d

    @property
    def kadets_safe(self) -> bool:
        return max(abs(self.p), abs(self.q)) / 2 < KADETS_BOUND


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Finite window lambda_n, n = -N..N.

    Attributes
    ----------
    N : int
        Index half-width.
    lam : numpy.ndarray
        Complex frequencies, ``lam[N + n] == lambda_n``.
    descriptor : PerturbationSpec
        Generator provenance.
    """

    N: int
    lam: np.ndarray
    descriptor: PerturbationSpec = field(default_factory=lambda: PerturbationSpec("custom"))

    def __post_init__(self):
        lam = np.array(self.lam, dtype=complex)
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if lam.shape != (2 * self.N + 1,):
            raise ValueError(f"lam must have length 2N+1 = {2 * self.N + 1}, got {lam.shape}")
        if not np.all(np.isfinite(lam)):
            raise ValueError("frequencies must be finite")
        zero = lam == 0
        zero[self.N] = False
        if zero.any():
            raise ValueError("lambda_n = 0 is only allowed at n = 0")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.N:
            raise IndexError(f"n={n} outside window |n| <= {self.N}")
        return complex(self.lam[self.N + n])

    @property
    def delta(self) -> np.ndarray:
        """Re lambda_n - n."""
        return self.lam.real - self.n

    @property
    def tau(self) -> np.ndarray:
        """Im lambda_n."""
        return self.lam.imag

    @property
    def sup_delta(self) -> float:
        return float(np.max(np.abs(self.delta)))

    @property
    def sup_tau(self) -> float:
        return float(np.max(np.abs(self.tau)))

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.tau == 0))

    @property
    def is_integers(self) -> bool:
        return bool(np.all(self.lam == self.n))

    @property
    def is_symmetric(self) -> bool:
        """lambda_{-n} == -conj(lambda_n) for all n (odd real part, even imaginary part)."""
        return bool(np.all(self.lam[::-1] == -np.conj(self.lam)))

    def window(self, N: int) -> "Spectrum":
        """The sub-window |n| <= N."""
        if N > self.N:
            raise ValueError(f"cannot widen a window: N={N} > {self.N}")
        return Spectrum(N, self.lam[self.N - N : self.N + N + 1], self.descriptor)

    def fingerprint(self) -> str:
        """Stable identifier of the frequency values (used to match runs)."""
        import hashlib

        h = hashlib.sha256(np.ascontiguousarray(self.lam).tobytes())
        return f"N{self.N}-{h.hexdigest()[:16]}"

    # serialization: {n, re, im} triple arrays, binary64 round-trip via repr floats
    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n.tolist(),
                "re": self.lam.real.tolist(),
                "im": self.lam.imag.tolist(),
                "descriptor": self.descriptor.to_dict(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "Spectrum":
        d = json.loads(text)
        n = np.asarray(d["n"], dtype=int)
        N = int(n.max())
        if not np.array_equal(n, np.arange(-N, N + 1)):
            raise ValueError("n must be the contiguous range -N..N")
        lam = np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)
        desc = d.get("descriptor", {"kind": "custom"})
        spec = PerturbationSpec(
            kind=desc.get("kind", "custom"),
            q=desc.get("q", 0.0),
            p=desc.get("p", 0.0),
            sign=desc.get("sign", -1),
            boundaries=tuple(desc.get("boundaries", ())),
        )
        return cls(N, lam, spec)


def _check_N(N):
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ValueError(f"N must be an integer >= 1, got {N!r}")


def _check_param(name, x):
    if not math.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x!r}")
    if abs(x) >= 1:
        raise ValueError(f"|{name}| must be < 1, got {x!r}")


def make_integers(N: int) -> Spectrum:
    """lambda_n = n."""
    _check_N(N)
    return Spectrum(N, np.arange(-N, N + 1).astype(complex), PerturbationSpec("constant_shift", q=0.0))


def make_constant_shift(q: float, N: int, sign: int = -1) -> Spectrum:
    """lambda_n = n + sign * (q/2) * sign(n), lambda_0 = 0.

    The default ``sign=-1`` gives lambda_n = n - (q/2) sign(n), for which
    s0 = s1 = 1/2 + q.
    """
    _check_N(N)
    _check_param("q", q)
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    n = np.arange(-N, N + 1)
    lam = n + sign * 0.5 * q * np.sign(n)
    return Spectrum(N, lam.astype(complex), PerturbationSpec("constant_shift", q=q, sign=sign))


def make_block(p: float, q: float, boundaries: Sequence[int], N: int, sign: int = 1) -> Spectrum:
    """Block perturbation with alternating amplitudes.

    Block k (k = 1, 2, ...) holds the indices with
    ``boundaries[k-2] < |n| <= boundaries[k-1]`` (an implicit 0 before the
    first boundary, and everything past the last boundary forms one final
    block).  Odd blocks get delta_n = sign*(q/2)*sign(n), even blocks
    sign*(p/2)*sign(n).
    """
    _check_N(N)
    _check_param("p", p)
    _check_param("q", q)
    b = [int(x) for x in boundaries]
    if not b or b[0] < 1 or any(y <= x for x, y in zip(b, b[1:])):
        raise ValueError(f"boundaries must be strictly increasing and start >= 1, got {boundaries!r}")
    n = np.arange(-N, N + 1)
    block = np.searchsorted(np.asarray(b), np.abs(n), side="left") + 1
    amp = np.where(block % 2 == 1, q, p)
    delta = sign * 0.5 * amp * np.sign(n)
    return Spectrum(
        N, (n + delta).astype(complex), PerturbationSpec("dyadic_block", q=q, p=p, sign=sign, boundaries=tuple(b))
    )


def make_custom(delta: Sequence[float], tau: Sequence[float] | None = None) -> Spectrum:
    """lambda_n = n + delta_n + i tau_n from arrays of length 2N+1."""
    delta = np.asarray(delta, dtype=float)
    tau = np.zeros_like(delta) if tau is None else np.asarray(tau, dtype=float)
    if delta.ndim != 1 or delta.size % 2 == 0 or delta.shape != tau.shape:
        raise ValueError("delta and tau must be 1-D arrays of equal odd length 2N+1")
    N = delta.size // 2
    n = np.arange(-N, N + 1)
    return Spectrum(N, n + delta + 1j * tau, PerturbationSpec("custom"))


def separation_constant(s: Spectrum) -> float:
    """min over m != n of |l_m - l_n| / (1 + |l_m - conj(l_n)|), exhaustive.

    Returns 0.0 for a spectrum with a repeated frequency (invalid).
    """
    lam = s.lam
    best = np.inf
    # row blocks keep memory at O(block * (2N+1))
    step = max(1, 4_000_000 // lam.size)
    for start in range(0, lam.size, step):
        a = lam[start : start + step, None]
        num = np.abs(a - lam[None, :])
        den = 1.0 + np.abs(a - np.conj(lam)[None, :])
        r = num / den
        idx = np.arange(start, min(start + step, lam.size))
        r[np.arange(idx.size), idx] = np.inf
        best = min(best, float(r.min()))
    return best


def blaschke_report(s: Spectrum, t_grid: Sequence[float]) -> dict:
    """Uniform Blaschke sums S(t) = sum_{n != 0} t (1+|tau_n|) / (|l_n|^2 + t^2).

    Also reports the t-independent strong Blaschke sum and, per t, the sum at
    the half window N//2 with the analytic tail bound sum_{|n|>N/2} 2t/n^2
    that the difference must respect.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t_grid values must be > 0")
    mask = s.n != 0
    lam2 = np.abs(s.lam[mask]) ** 2
    wt = 1.0 + np.abs(s.tau[mask])
    nabs = np.abs(s.n[mask])
    S = np.array([np.sum(tt * wt / (lam2 + tt * tt)) for tt in t])
    half = s.N // 2
    inner = nabs <= half
    S_half = np.array([np.sum((tt * wt / (lam2 + tt * tt))[inner]) for tt in t])
    # sum_{|n|>half} 2t/n^2 = 4t * trigamma(half + 1)
    tail = 4.0 * t * float(polygamma(1, half + 1))
    strong = float(np.sum(wt / lam2))
    return {
        "t": t,
        "S": S,
        "S_half_window": S_half,
        "tail_bound": tail,
        "within_tail_bound": bool(np.all(np.abs(S - S_half) <= tail)),
        "strong_blaschke": strong,
        "max_S": float(S.max()),
    }
