"""
Generating function F of a spectrum, its carrier function, and growth fits.

F(z) = lim_R prod_{|lambda_k| <= R} (1 - z/lambda_k), with the factor for
lambda_0 = 0 replaced by z.  All values are carried in the log domain
(:class:`LogComplex`): on the imaginary axis |F(it)| grows like e^{pi t}, and
the products involved have up to ~10^5 factors.

Evaluation
----------
Consecutive indices whose shift c_k = lambda_k - k is identical form a *run*.
The product of (lambda_k - z)/lambda_k over a run is a ratio of Gamma
functions, so constant-shift and block spectra cost O(number of runs) per
point instead of O(N).  Short runs are multiplied out directly.  In
``sine_relative`` mode the factors beyond the window are those of the
integers; their product prod_{k>N}(1 - z^2/k^2) is again a Gamma ratio, so
the result equals (sin(pi z)/pi) * prod_{0<|k|<=N} (1 - z/lambda_k)/(1 - z/k)
with the removable singularities at integer z resolved analytically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gammaln, loggamma, polygamma

from .spectra import Spectrum

__all__ = [
    "LogComplex",
    "GeneratingFunction",
    "TailFit",
    "eval_F",
    "eval_Phi_it",
    "phi_inequality_report",
    "tail_exponent",
    "imag_axis_curve",
    "log_sin_pi",
    "log_rising",
]

MODES = ("raw_symmetric_product", "sine_relative", "closed_form_sine")
_MIN_RUN = 8  # runs shorter than this are multiplied out directly
_CHUNK = 2_000_000


def _wrap(phase):
    """Map to (-pi, pi]."""
    ph = np.mod(np.asarray(phase, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(ph == -np.pi, np.pi, ph)


@dataclass(frozen=True)
class LogComplex:
    """A complex number (or array) stored as natural-log magnitude and phase.

    ``log_mag = -inf`` encodes an exact zero.
    """

    log_mag: np.ndarray | float
    phase: np.ndarray | float

    @classmethod
    def from_log(cls, logz) -> "LogComplex":
        logz = np.asarray(logz, dtype=complex)
        lm = logz.real
        ph = np.where(np.isneginf(lm), 0.0, _wrap(logz.imag))
        if lm.ndim == 0:
            return cls(float(lm), float(ph))
        return cls(lm, ph)

    @classmethod
    def from_complex(cls, z) -> "LogComplex":
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore"):
            return cls.from_log(np.log(z))

    def to_complex(self):
        return np.exp(np.asarray(self.log_mag) + 1j * np.asarray(self.phase))

    @property
    def log(self):
        """Complex logarithm, principal branch."""
        return np.asarray(self.log_mag) + 1j * np.asarray(self.phase)

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        return LogComplex.from_log(self.log + other.log)

    def __sub__(self, other: "LogComplex") -> "LogComplex":
        a_m, b_m = np.asarray(self.log_mag), np.asarray(other.log_mag)
        scale = np.maximum(a_m, b_m)
        safe = np.where(np.isfinite(scale), scale, 0.0)
        diff = np.exp(a_m - safe + 1j * np.asarray(self.phase)) - np.exp(b_m - safe + 1j * np.asarray(other.phase))
        with np.errstate(divide="ignore"):
            out = np.log(diff) + safe
        out = np.where(np.isneginf(scale), -np.inf, out)
        return LogComplex.from_log(out)


# ---------------------------------------------------------------- primitives


def log_rising(w, lo: int, hi: int):
    """log prod_{k=lo}^{hi} (k + w), elementwise in complex ``w``.

    The range is split at the factor nearest zero so every Gamma argument
    has real part >= 1/2; an exactly vanishing factor yields -inf.
    """
    w = np.asarray(w)
    if hi < lo:
        return np.zeros(w.shape, complex)
    if np.isrealobj(w) or not np.any(w.imag):
        return _log_rising_real(np.real(w).astype(float), lo, hi)
    w = w.astype(complex)
    k0 = np.rint(-w.real)
    # factors with k + Re w >= 1/2
    p_lo = np.maximum(lo, k0 + 1)
    has_pos = p_lo <= hi
    pos = loggamma(np.where(has_pos, hi + 1 + w, 1.0)) - loggamma(np.where(has_pos, p_lo + w, 1.0))
    # factors with k + Re w <= -1/2: prod (k+w) = (-1)^cnt prod_{j=-n_hi}^{-lo} (j - w)
    n_hi = np.minimum(hi, k0 - 1)
    cnt = n_hi - lo + 1
    has_neg = cnt > 0
    neg = (
        loggamma(np.where(has_neg, 1 - lo - w, 1.0))
        - loggamma(np.where(has_neg, -n_hi - w, 1.0))
        + 1j * np.pi * np.where(has_neg, cnt, 0)
    )
    has_mid = (k0 >= lo) & (k0 <= hi)
    with np.errstate(divide="ignore"):
        mid = np.log(np.where(has_mid, k0 + w, 1.0))
    return np.where(has_pos, pos, 0) + np.where(has_neg, neg, 0) + np.where(has_mid, mid, 0)


def _log_rising_real(w, lo: int, hi: int):
    """Real-argument branch of :func:`log_rising` using real log-Gamma."""
    k0 = np.rint(-w)
    p_lo = np.maximum(lo, k0 + 1)
    has_pos = p_lo <= hi
    out = np.where(has_pos, gammaln(np.where(has_pos, hi + 1 + w, 1.0)) - gammaln(np.where(has_pos, p_lo + w, 1.0)), 0.0)
    out = out.astype(complex)
    n_hi = np.minimum(hi, k0 - 1)
    cnt = n_hi - lo + 1
    has_neg = cnt > 0
    if has_neg.any():
        neg = gammaln(np.where(has_neg, 1 - lo - w, 1.0)) - gammaln(np.where(has_neg, -n_hi - w, 1.0))
        out += np.where(has_neg, neg + 1j * np.pi * cnt, 0)
    has_mid = (k0 >= lo) & (k0 <= hi)
    if has_mid.any():
        with np.errstate(divide="ignore"):
            out += np.where(has_mid, np.log(np.where(has_mid, k0 + w, 1.0) + 0j), 0)
    return out


def log_sin_pi(z):
    """log sin(pi z), overflow-free; exact -inf at the integers."""
    z = np.asarray(z, dtype=complex)
    m = np.rint(z.real)
    zr = (z.real - m) + 1j * z.imag
    upper = zr.imag >= 0
    # sin(pi u) = (i/2) e^{-i pi u} (1 - e^{2 i pi u}) for Im u >= 0, mirrored below
    u = np.where(upper, zr, -zr)
    with np.errstate(divide="ignore"):
        core = np.log(0.5j) - 1j * np.pi * u + np.log(-np.expm1(2j * np.pi * u))
    core = np.where(upper, core, core + 1j * np.pi)  # sin(-u) = -sin(u)
    return core + 1j * np.pi * m


def _log_integer_tail(z, N: int):
    """log prod_{k>N} (1 - z^2/k^2)."""
    z = np.asarray(z, dtype=complex)
    inside = np.abs(z.real) <= N + 0.5
    zi = np.where(inside, z, 0.0)
    if not np.any(zi.imag):
        a = 2 * gammaln(N + 1) - gammaln(N + 1 - zi.real) - gammaln(N + 1 + zi.real) + 0j
    else:
        a = 2 * gammaln(N + 1) - loggamma(N + 1 - zi) - loggamma(N + 1 + zi)
    out = np.where(inside, a, 0j)
    if not inside.all():
        zo = z[~inside]
        b = (
            log_sin_pi(zo)
            - math.log(math.pi)
            - np.log(zo)
            - (log_rising(-zo, 1, N) + log_rising(zo, 1, N) - 2 * gammaln(N + 1))
        )
        out = np.array(out)
        out[~inside] = b
    return out


# ---------------------------------------------------------------- the function


class GeneratingFunction:
    """F for a spectrum.

    Parameters
    ----------
    spectrum : Spectrum
    mode : {"sine_relative", "raw_symmetric_product", "closed_form_sine"}
        ``closed_form_sine`` is only valid for the integer spectrum, where
        F(z) = sin(pi z)/pi.
    N_prod : int, optional
        Product truncation radius (defaults to the spectrum window).  In
        ``sine_relative`` mode frequencies with |k| > N_prod are the integers.
    """

    def __init__(self, spectrum: Spectrum, mode: str = "sine_relative", N_prod: int | None = None):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        N_prod = spectrum.N if N_prod is None else int(N_prod)
        if N_prod < 16:
            raise ValueError(f"N_prod must be >= 16, got {N_prod}")
        if mode == "closed_form_sine" and not spectrum.is_integers:
            raise ValueError("closed_form_sine mode requires the integer spectrum")
        if mode == "sine_relative" and N_prod > spectrum.N:
            raise ValueError(f"N_prod={N_prod} exceeds the spectrum window N={spectrum.N}")
        self.spectrum = spectrum
        self.mode = mode
        self.N_prod = N_prod
        lam0 = spectrum[0]
        self._lam0 = lam0
        if mode == "raw_symmetric_product":
            sel = (np.abs(spectrum.lam) <= N_prod) & (spectrum.n != 0)
            if lam0 != 0 and abs(lam0) > N_prod:
                lam0 = None
        else:
            sel = (np.abs(spectrum.n) <= N_prod) & (spectrum.n != 0)
        self._use_lam0 = lam0 is not None
        self._runs, self._singles = self._compress(spectrum.n[sel], spectrum.lam[sel])

    def __repr__(self):
        return f"GeneratingFunction(N={self.spectrum.N}, mode={self.mode!r}, N_prod={self.N_prod})"

    @staticmethod
    def _compress(k, lam):
        """Split selected indices into Gamma-evaluable runs and single factors."""
        c = lam - k
        runs, singles = [], []
        if k.size == 0:
            return runs, np.zeros(0, complex)
        brk = np.flatnonzero((np.diff(k) != 1) | (c[1:] != c[:-1])) + 1
        starts = np.concatenate([[0], brk])
        ends = np.concatenate([brk, [k.size]])
        for s, e in zip(starts, ends):
            if e - s >= _MIN_RUN:
                cc, lo, hi = complex(c[s]), int(k[s]), int(k[e - 1])
                runs.append((cc, lo, hi, complex(log_rising(np.array([cc]), lo, hi)[0])))
            else:
                singles.append(lam[s:e])
        singles = np.concatenate(singles) if singles else np.zeros(0, complex)
        return runs, singles

    def log_F(self, z):
        """Complex log of F(z) (real part -inf at zeros), elementwise."""
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        z = z.ravel()
        if self.mode == "closed_form_sine":
            out = log_sin_pi(z) - math.log(math.pi)
            return out.reshape(shape)
        with np.errstate(divide="ignore"):
            if self._lam0 == 0:
                out = np.log(z)
            elif self._use_lam0:
                out = np.log(1 - z / self._lam0)
            else:
                out = np.zeros_like(z)
        for c, lo, hi, den in self._runs:
            out = out + (log_rising(c - z, lo, hi) - den)
        if self._singles.size:
            lam = self._singles
            step = max(1, _CHUNK // lam.size)
            acc = np.zeros_like(z)
            for i in range(0, z.size, step):
                zz = z[i : i + step, None]
                with np.errstate(divide="ignore"):
                    acc[i : i + step] = np.sum(np.log1p(-zz / lam[None, :]), axis=1)
            out = out + acc
        if self.mode == "sine_relative":
            out = out + _log_integer_tail(z, self.N_prod)
        return out.reshape(shape)

    def __call__(self, z) -> LogComplex:
        return LogComplex.from_log(self.log_F(z))

    def log_abs_integers(self, M: int) -> np.ndarray:
        """log |F(n)| for n = -M..M, cached per instance."""
        cache = getattr(self, "_int_cache", None)
        if cache is None or cache.size < 2 * M + 1:
            n = np.arange(-M, M + 1, dtype=float)
            cache = self.log_abs(n)
            self._int_cache = cache
        c = cache.size // 2
        return cache[c - M : c + M + 1]

    def log_abs(self, z):
        """log |F(z)|."""
        return np.real(self.log_F(z))


def eval_F(g: GeneratingFunction, z) -> LogComplex:
    """F(z) in log-magnitude/phase form."""
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise ValueError("z must be finite")
    return g(z)


# ---------------------------------------------------------------- carrier function


def _window_lam(g: GeneratingFunction):
    s = g.spectrum
    if g.N_prod >= s.N:
        return s.lam
    return s.window(g.N_prod).lam


def _log_abs_derivative(g: GeneratingFunction, lam: complex, h: float = 1e-6) -> float:
    """log |F'(lam)| by centred differences with one Richardson step."""
    h = h * max(1.0, abs(lam))
    pts = np.array([lam + h, lam - h, lam + h / 2, lam - h / 2])
    lf = g.log_F(pts)
    scale = np.max(lf.real)
    v = np.exp(lf - scale)
    d1 = (v[0] - v[1]) / (2 * h)
    d2 = (v[2] - v[3]) / h
    return float(np.log(abs((4 * d2 - d1) / 3)) + scale)


def eval_Phi_it(g: GeneratingFunction, t: float) -> LogComplex:
    """Carrier function Phi(it) = |F(it)| / dist(it, Lambda).

    Phi is real and non-negative; the returned phase is 0.  At a frequency
    on the imaginary axis the value is |F'(lambda_n)|.
    """
    t = float(t)
    if t == 0:
        raise ValueError("t must be nonzero")
    if abs(t) > g.N_prod / 2:
        raise ValueError(f"|t|={abs(t)} exceeds N_prod/2={g.N_prod / 2}; the nearest frequency may lie outside the window")
    lam = _window_lam(g)
    d = np.abs(1j * t - lam)
    j = int(np.argmin(d))
    if d[j] == 0:
        return LogComplex(_log_abs_derivative(g, complex(lam[j])), 0.0)
    return LogComplex(float(g.log_abs(1j * t)) - math.log(d[j]), 0.0)


def log_Phi_it(g: GeneratingFunction, t) -> np.ndarray:
    """Vectorised log Phi(it) for an array of t (no zeros on the axis assumed)."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return np.array([eval_Phi_it(g, tt).log_mag for tt in t])


def phi_inequality_report(g: GeneratingFunction, t_grid: Sequence[float], X_factor: float = 64.0, tol_quad: float = 1e-6):
    """Ratios LHS/RHS of the carrier-function inequalities, per t.

    Keys per row: ``ii`` = |F(it)| / ((|l_0|+t) Phi(it));
    ``iii`` = max_n |F(it)| / ((|l_0|+t) |it-l_n| (|l_n|^2+t^2)^{-1/2} Phi(it)) with unit constant;
    ``iv`` = Phi(it) / (t^{-1/2} e^{pi t} I(t)^{1/2});
    ``itest`` = |F(it)| / (t^{1/2} e^{pi t} I(t)^{1/2});
    where I(t) = (1/pi) int |F(x)|^2/(t^2+x^2) dx.  All ratios should be
    <= 1 + tol_quad (``iii`` up to the unspecified constant, which is 1 for
    real spectra).
    """
    from .kfunc import log_line_integral

    lam = _window_lam(g)
    l0 = abs(g.spectrum[0])
    rows = []
    for t in np.asarray(t_grid, dtype=float):
        if t <= 0:
            raise ValueError("t_grid must be positive")
        lF = float(g.log_abs(1j * t))
        lPhi = eval_Phi_it(g, t).log_mag
        row = {"t": float(t)}
        row["ii"] = math.exp(lF - math.log(l0 + t) - lPhi)
        geo = np.log(np.abs(1j * t - lam)) - 0.5 * np.log(np.abs(lam) ** 2 + t * t)
        row["iii"] = float(np.exp(lF - math.log(l0 + t) - lPhi - geo).max())
        try:
            li = log_line_integral(g, t, X_factor * t)
            log_I = li.log_value - math.log(math.pi)
            row["iv"] = math.exp(lPhi - (-0.5 * math.log(t) + math.pi * t + 0.5 * log_I))
            row["itest"] = math.exp(lF - (0.5 * math.log(t) + math.pi * t + 0.5 * log_I))
            row["quad_ok"] = li.converged and li.tail_fraction <= 0.1
        except (ArithmeticError, ValueError) as exc:
            row["iv"] = row["itest"] = float("nan")
            row["quad_ok"] = False
            row["quad_error"] = str(exc)
        row["all_ok"] = bool(
            row["ii"] <= 1 + tol_quad and row["iii"] <= 1 + tol_quad and row["iv"] <= 1 + tol_quad and row["itest"] <= 1 + tol_quad
        )
        rows.append(row)
    return rows


# ---------------------------------------------------------------- growth on a horizontal line


@dataclass(frozen=True)
class TailFit:
    """Power-law fit log|F(x+iy)| ~ a log|x| + b."""

    a: float
    intercept: float
    residual: float
    y: float
    x_range: tuple[float, float]

    @property
    def s_lambda(self) -> float:
        """Convergence threshold of int |F(x)|^2/(1+|x|^{2s}) dx, a + 1/2."""
        return self.a + 0.5

    @property
    def power_law(self) -> bool:
        return self.residual <= 0.1


def tail_exponent(g: GeneratingFunction, y: float, x_range: tuple[float, float], n_points: int = 97) -> TailFit:
    """Least-squares slope of log|F(x+iy)| against log|x| on a geometric grid.

    Both half-lines are sampled.  ``residual`` is the maximum absolute
    deviation from the fitted line; above 0.1 the growth is not a power law.
    """
    lo, hi = map(float, x_range)
    if y <= 0:
        raise ValueError("y must be > 0")
    if not (0 < lo < hi) or hi / lo < 1000 * (1 - 1e-12):
        raise ValueError(f"x_range must span at least 3 decades, got {x_range}")
    x = np.geomspace(lo, hi, n_points)
    lx = np.concatenate([np.log(x), np.log(x)])
    lf = np.concatenate([g.log_abs(x + 1j * y), g.log_abs(-x + 1j * y)])
    A = np.vstack([lx, np.ones_like(lx)]).T
    (a, b), *_ = np.linalg.lstsq(A, lf, rcond=None)
    res = float(np.max(np.abs(lf - (a * lx + b))))
    return TailFit(float(a), float(b), res, float(y), (lo, hi))


def truncation_bound(g: GeneratingFunction, t: float) -> float:
    """|t| sup|delta| sum_{|n|>N_prod} n^-2 + 4 t^2 / N_prod."""
    N = g.N_prod
    return abs(t) * g.spectrum.sup_delta * 2 * float(polygamma(1, N + 1)) + 4 * t * t / N


def imag_axis_curve(g: GeneratingFunction, t_grid: Sequence[float]) -> list[dict]:
    """Rows (t, log_mag, phase, truncation_bound) of F on the imaginary axis."""
    t = np.asarray(t_grid, dtype=float)
    val = g(1j * t)
    return [
        {"t": float(tt), "log_mag": float(m), "phase": float(p), "truncation_bound": truncation_bound(g, tt)}
        for tt, m, p in zip(t, np.atleast_1d(val.log_mag), np.atleast_1d(val.phase))
    ]
