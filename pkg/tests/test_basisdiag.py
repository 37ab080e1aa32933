import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from rieszlab.basisdiag import (
    GramMatrix,
    basis_weights,
    cond_and_bounds,
    frame_ratio,
    gram,
    psitnorm_ratio,
    sin_pi,
)
from rieszlab.kfunc import dual_norm_curve
from rieszlab.spectra import make_constant_shift, make_custom, make_integers


def small_complex_spectrum(N=3):
    d = np.linspace(-0.2, 0.15, 2 * N + 1)
    t = np.r_[np.zeros(N), 0.0, np.linspace(0.1, 0.3, N)]
    return make_custom(d, t)


def quad_pair(a, b, deriv=False):
    f = lambda x: np.exp(1j * (a - np.conj(b)) * x) * ((a * np.conj(b)) if deriv else 1)
    re = quad(lambda x: f(x).real, -np.pi, np.pi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    im = quad(lambda x: f(x).imag, -np.pi, np.pi, epsabs=1e-12, epsrel=1e-12, limit=200)[0]
    return re + 1j * im


def charpoly_eigs(G):
    """Faddeev-LeVerrier at 50 digits, then polynomial roots."""
    mpmath.mp.dps = 50
    n = G.shape[0]
    A = mpmath.matrix([[mpmath.mpc(complex(G[i, j])) for j in range(n)] for i in range(n)])
    I = mpmath.eye(n)
    M = mpmath.zeros(n)
    c = [mpmath.mpf(1)]
    for k in range(1, n + 1):
        M = A * M + c[-1] * I
        c.append(-sum((A * M)[i, i] for i in range(n)) / k)
    roots = mpmath.polyroots(c, maxsteps=200, extraprec=200)
    return np.sort(np.array([float(mpmath.re(r)) for r in roots]))


def test_sin_pi_exact_zeros():
    assert np.all(sin_pi(np.arange(-50, 51)) == 0)
    assert sin_pi(0.5) == pytest.approx(1.0)
    z = 0.3 + 0.7j
    assert sin_pi(z) == pytest.approx(np.sin(np.pi * z), rel=1e-14)


def test_integers_identity():
    G = gram(make_integers(16))
    assert np.array_equal(G.entries, 2 * np.pi * np.eye(33))
    assert cond_and_bounds(G) == (1.0, 1.0, 1.0)
    assert cond_and_bounds(G, normalize=False)[0] == 1.0


def test_h1_diagonal_integers():
    G = gram(make_integers(8), "H1", t=3.0)
    n = np.arange(-8, 9)
    assert np.allclose(G.entries, np.diag(2 * np.pi * (n**2 + 9.0)), rtol=0, atol=1e-12)
    with pytest.raises(ValueError):
        gram(make_integers(8), "H1", t=0.5)


def test_entries_against_quadrature():
    s = small_complex_spectrum()
    L2 = gram(s).entries
    H1 = gram(s, "H1", t=2.0).entries
    lam = s.lam
    for i in range(lam.size):
        for j in range(lam.size):
            a, b = lam[i], lam[j]
            q = quad_pair(a, b)
            assert L2[i, j] == pytest.approx(q, rel=1e-10, abs=1e-12)
            assert H1[i, j] == pytest.approx(quad_pair(a, b, True) + 4 * q, rel=1e-10, abs=1e-12)


def test_hermitian_psd_and_diagonal():
    s = small_complex_spectrum(6)
    G = gram(s)
    assert G.hermitian_defect() < 1e-12
    assert G.min_eig_ratio() >= -1e-9
    tau = s.tau
    v = np.where(tau == 0, 2 * np.pi, np.sinh(2 * np.pi * tau) / np.where(tau == 0, 1, tau))
    assert np.allclose(np.diag(G.entries).real, v, rtol=1e-14)


def test_eigenvalues_against_characteristic_polynomial():
    s = small_complex_spectrum(3)
    G = gram(s)
    cond, lo, hi = cond_and_bounds(G, normalize=False)
    ev = charpoly_eigs(G.entries)
    assert lo**2 == pytest.approx(ev[0], rel=1e-8)
    assert hi**2 == pytest.approx(ev[-1], rel=1e-8)
    assert cond == pytest.approx(ev[-1] / ev[0], rel=1e-8)


def test_real_spectrum_gives_real_matrix():
    G = gram(make_constant_shift(0.3, 20))
    assert np.max(np.abs(G.entries.imag)) < 1e-14
    assert np.allclose(G.entries, G.entries.T, rtol=0, atol=1e-14)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_permutation_invariance(seed):
    s = small_complex_spectrum(5)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(s.lam.size)
    G = gram(s)
    P = GramMatrix(G.entries[np.ix_(perm, perm)], "L2")
    a, b = cond_and_bounds(G), cond_and_bounds(P)
    assert np.allclose(a, b, rtol=1e-10)


def test_export_round_trip():
    G = gram(small_complex_spectrum(), "H1", t=2.5)
    data = G.to_bytes()
    back = GramMatrix.from_bytes(data)
    assert np.array_equal(back.entries, G.entries) and back.mode == "H1" and back.t == 2.5
    with pytest.raises(ValueError):
        GramMatrix.from_bytes(data[:-16])


def test_singular_reports_inf():
    v = np.array([1.0, 2.0, 3.0])
    G = GramMatrix(np.outer(v, v).astype(complex), "L2")
    assert cond_and_bounds(G)[0] == math.inf


def test_shift_cond_bounded():
    c = [cond_and_bounds(gram(make_constant_shift(0.2, N)))[0] for N in (64, 128, 256)]
    assert c[-1] <= 10 * c[0]


def test_basis_weights():
    w = basis_weights(make_integers(6), 0.5)
    n = np.arange(-6, 7)
    assert np.allclose(w.v, 2 * np.pi)
    assert np.allclose(w.q, 2 * np.pi * np.sqrt(1 + n**2), rtol=1e-14)
    tau = np.zeros(21)
    tau[10 + 5] = 0.3
    s = make_custom(np.zeros(21), tau)
    w = basis_weights(s, 0.3)
    direct = quad(lambda x: np.exp(-0.6 * x), -np.pi, np.pi, epsabs=1e-14)[0]
    assert w.v[15] == pytest.approx(math.sinh(0.6 * math.pi) / 0.3, rel=1e-14)
    assert w.v[15] == pytest.approx(direct, rel=1e-12)
    assert np.allclose(w.q, w.v ** 0.7 * w.h**0.3, rtol=1e-12)
    assert np.all(w.v > 0) and np.all(w.h > 0)
    with pytest.raises(ValueError):
        basis_weights(s, 1.5)


def test_psitnorm_band_integers(g_integers):
    t = [4.0, 8.0, 16.0, 32.0, 64.0]
    r = psitnorm_ratio(g_integers, dual_norm_curve(g_integers, t))
    assert r["band"] < 2 and np.all(np.isfinite(r["r"])) and np.all(r["r"] > 0)


def test_psitnorm_band_shift(g_shift02):
    t = [4.0, 8.0, 16.0, 32.0, 64.0]
    r = psitnorm_ratio(g_shift02, dual_norm_curve(g_shift02, t))
    assert r["band"] < 10


@pytest.mark.parametrize("q", [0.0, 0.2, 0.4])
def test_frame_ratio_two_sided(q):
    s = make_constant_shift(q, 2048) if q else make_integers(2048)
    r = [frame_ratio(s, t) for t in (2.0, 5.0)]
    assert 0.1 < min(r) and max(r) < 100 and max(r) / min(r) < 2


def test_frame_ratio_integers_closed_form():
    # sum_n 4 sinh^2(pi t)/(n^2+t^2) / (sinh(2 pi t)/t) -> 2 pi for large windows
    s = make_integers(2**16)
    assert frame_ratio(s, 2.0) == pytest.approx(2 * math.pi, rel=1e-3)
