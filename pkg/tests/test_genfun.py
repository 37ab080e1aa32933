import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rieszlab.genfun import (
    GeneratingFunction,
    LogComplex,
    _log_integer_tail,
    eval_F,
    eval_Phi_it,
    imag_axis_curve,
    log_rising,
    log_sin_pi,
    phi_inequality_report,
    tail_exponent,
    truncation_bound,
)
from rieszlab.spectra import make_block, make_constant_shift, make_custom, make_integers


def shift_oracle(z, c=0.1):
    """log F for the full two-sided spectrum n - c sign n: z Gamma(1-c)^2 / (Gamma(1-c-z) Gamma(1-c+z))."""
    mp.mp.dps = 30
    z = mp.mpc(z)
    a = 1 - mp.mpf(c)
    return complex(mp.log(z * mp.gamma(a) ** 2 / (mp.gamma(a - z) * mp.gamma(a + z))))


@pytest.fixture(scope="module")
def ints():
    return make_integers(1024)


@pytest.mark.parametrize("mode", ["sine_relative", "closed_form_sine"])
def test_integers_half(ints, mode):
    v = eval_F(GeneratingFunction(ints, mode), 0.5)
    assert math.exp(v.log_mag) == pytest.approx(1 / math.pi, rel=1e-12)
    assert v.phase == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("mode", ["sine_relative", "closed_form_sine", "raw_symmetric_product"])
def test_zero_at_frequency(mode):
    s = make_integers(64) if mode == "closed_form_sine" else make_constant_shift(0.2, 64)
    g = GeneratingFunction(s, mode)
    assert eval_F(g, s[3]).log_mag == -np.inf


@pytest.mark.parametrize("mode", ["sine_relative", "closed_form_sine"])
def test_integers_imaginary_axis(ints, mode):
    v = eval_F(GeneratingFunction(ints, mode), 10j)
    assert v.log_mag == pytest.approx(math.log(math.sinh(10 * math.pi) / math.pi), rel=1e-13)
    assert v.log_mag == pytest.approx(10 * math.pi - math.log(2 * math.pi), rel=1e-12)


def test_closed_form_requires_integers():
    with pytest.raises(ValueError):
        GeneratingFunction(make_constant_shift(0.2, 64), "closed_form_sine")
    with pytest.raises(ValueError):
        GeneratingFunction(make_integers(64), N_prod=8)


@pytest.mark.parametrize("z", [0.5, 3.3 + 2j, -7.25 - 1j, 20j, 31.7 + 0.1j, 5.0])
def test_shift_against_gamma_closed_form(g_shift02, z):
    got = g_shift02.log_F(np.array([z]))[0]
    want = shift_oracle(z)
    # beyond N the factors differ by 1 - 2c z^2/n^3: truncation c |z|^2 / N^2;
    # 1e-8 covers cancellation between log-Gamma values of size ~N log N
    tol = 1e-8 + 1.1 * 0.1 * abs(z) ** 2 / g_shift02.N_prod**2
    assert got.real == pytest.approx(want.real, abs=tol)
    assert np.exp(1j * (got.imag - want.imag)) == pytest.approx(1, abs=tol)


def test_removable_singularity_at_integer(g_shift02):
    # z = 5 is a pole of 1/(1 - z/5) cancelled by sin(pi z)
    a = g_shift02.log_F(np.array([5.0]))[0]
    b = g_shift02.log_F(np.array([5.0 + 1e-7]))[0]
    assert np.isfinite(a.real)
    assert a.real == pytest.approx(b.real, abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(-40, 40), y=st.floats(-40, 40))
def test_conjugate_symmetry(g_shift02, x, y):
    z = complex(x, y)
    a = eval_F(g_shift02, z)
    b = eval_F(g_shift02, z.conjugate())
    if a.log_mag == -np.inf:
        assert b.log_mag == -np.inf
        return
    assert a.log_mag == pytest.approx(b.log_mag, abs=1e-9)
    assert np.exp(1j * (a.phase + b.phase)) == pytest.approx(1, abs=1e-9)


@pytest.mark.parametrize("q", [0.2, 0.4, -0.4])
def test_raw_and_sine_relative_modes(q):
    s = make_constant_shift(q, 100000)
    sr = GeneratingFunction(s, "sine_relative")
    raw = GeneratingFunction(s, "raw_symmetric_product")
    z = np.array([0.5, 3.3 + 2j, 16j, -20.5 + 4j, 32j, 22.6 - 22.6j])
    # the raw product misses prod_{k>N}(1 - z^2/k^2); with that factor restored the modes coincide
    fixed = raw.log_F(z) + _log_integer_tail(z, s.N)
    a, b = sr.log_F(z), fixed
    assert np.max(np.abs(a.real - b.real) / np.maximum(1, np.abs(a.real))) < 1e-8
    # and without it the raw error is the O(|z|^2/N) tail itself
    err = np.abs(raw.log_F(z).real - a.real)
    assert np.all(err <= 1.01 * np.abs(z) ** 2 / s.N + 1e-12)


@pytest.mark.parametrize("t", [2.0, 8.0, 30.0])
def test_doubling_N_prod_within_bound(t):
    s = make_constant_shift(0.2, 8192)
    g1 = GeneratingFunction(s, N_prod=4096)
    g2 = GeneratingFunction(s, N_prod=8192)
    d = abs(g1.log_abs(1j * t) - g2.log_abs(1j * t))
    assert d <= truncation_bound(g1, t)


def test_phi_integers(ints):
    g = GeneratingFunction(ints)
    v = eval_Phi_it(g, 10.0)
    assert v.log_mag == pytest.approx(math.log(math.sinh(10 * math.pi) / (10 * math.pi)), rel=1e-12)
    assert math.exp(eval_Phi_it(g, 1e-6).log_mag) == pytest.approx(1.0, rel=1e-9)


def test_phi_at_a_frequency_uses_derivative():
    # lambda_0 = 2i, integers elsewhere: F(z) = (1 - z/2i) sin(pi z)/(pi z), |F'(2i)| = sinh(2 pi)/(4 pi)
    N = 512
    tau = np.zeros(2 * N + 1)
    tau[N] = 2.0
    g = GeneratingFunction(make_custom(np.zeros(2 * N + 1), tau))
    assert math.exp(eval_Phi_it(g, 2.0).log_mag) == pytest.approx(math.sinh(2 * math.pi) / (4 * math.pi), rel=1e-8)


def test_phi_window_precondition(ints):
    with pytest.raises(ValueError):
        eval_Phi_it(GeneratingFunction(ints), 600.0)
    with pytest.raises(ValueError):
        eval_Phi_it(GeneratingFunction(ints), 0.0)


def test_phi_plus_minus(g_shift02):
    ratios = [math.exp(eval_Phi_it(g_shift02, -t).log_mag - eval_Phi_it(g_shift02, t).log_mag) for t in np.geomspace(4, 64, 9)]
    B = max(max(ratios), 1 / min(ratios))
    assert B < 10


def test_phi_report_integers():
    g = GeneratingFunction(make_integers(2048))
    (row,) = phi_inequality_report(g, [4.0])
    assert row["ii"] == pytest.approx(1.0, rel=1e-12)
    assert row["itest"] < 1
    assert row["all_ok"]


def test_phi_report_shift(g_shift02):
    for row in phi_inequality_report(g_shift02, [4.0, 8.0, 16.0]):
        assert row["quad_ok"]
        assert row["ii"] <= 1 + 1e-6 and row["iii"] <= 1 + 1e-6 and row["iv"] <= 1 + 1e-6 and row["itest"] <= 1 + 1e-6


def test_tail_exponent_integers():
    fit = tail_exponent(GeneratingFunction(make_integers(4096)), 1.0, (1.0, 1000.0))
    assert abs(fit.a) < 0.01
    assert fit.s_lambda == pytest.approx(0.5, abs=0.01)
    assert fit.power_law


def test_tail_exponent_shift(g_shift02):
    fit = tail_exponent(g_shift02, 1.0, (1.0, 1e4))
    assert fit.a == pytest.approx(0.2, abs=0.01)
    assert fit.s_lambda == pytest.approx(0.7, abs=0.01)
    assert fit.power_law


def test_tail_exponent_block_flags_non_power():
    s = make_block(0.1, 0.3, [16, 256, 4096], 16384)
    assert not tail_exponent(GeneratingFunction(s), 1.0, (1.0, 1e4)).power_law


def test_tail_exponent_preconditions(ints):
    g = GeneratingFunction(ints)
    with pytest.raises(ValueError):
        tail_exponent(g, 0.0, (1, 1e4))
    with pytest.raises(ValueError):
        tail_exponent(g, 1.0, (1, 100))


def test_imag_axis_curve_columns(g_shift02):
    rows = imag_axis_curve(g_shift02, [1.0, 2.0])
    assert set(rows[0]) == {"t", "log_mag", "phase", "truncation_bound"}


@settings(max_examples=40, deadline=None)
@given(re=st.floats(-30, 30), im=st.floats(-5, 5), lo=st.integers(-20, 5), n=st.integers(0, 25))
def test_log_rising_matches_direct_product(re, im, lo, n):
    w = complex(re, im)
    hi = lo + n
    direct = sum(np.log(complex(k + w)) for k in range(lo, hi + 1) if k + w != 0)
    if any(k + w == 0 for k in range(lo, hi + 1)):
        assert log_rising(np.array([w]), lo, hi)[0].real == -np.inf
        return
    got = log_rising(np.array([w]), lo, hi)[0]
    assert got.real == pytest.approx(direct.real, abs=1e-9 * max(1, abs(direct.real)))
    assert np.exp(1j * (got.imag - direct.imag)) == pytest.approx(1, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(x=st.floats(-50, 50), y=st.floats(-3, 3))
def test_log_sin_pi(x, y):
    z = complex(x, y)
    want = np.sin(np.pi * z)
    got = log_sin_pi(np.array([z]))[0]
    if want == 0:
        return
    assert np.exp(got) == pytest.approx(want, rel=1e-8, abs=1e-12)


def test_log_sin_pi_no_overflow():
    v = log_sin_pi(np.array([1000j, -1000j + 0.5]))
    assert np.all(np.isfinite(v))
    assert v[0].real == pytest.approx(1000 * math.pi - math.log(2))


def test_logcomplex_phase_range():
    v = LogComplex.from_log(np.array([1 + 7j, 2 - 3.5j, 0 + np.pi * 1j, -np.inf + 0j]))
    assert np.all(v.phase <= np.pi) and np.all(v.phase > -np.pi)
    assert v.phase[2] == np.pi
    d = LogComplex.from_complex(3 + 4j) - LogComplex.from_complex(1 + 1j)
    assert d.to_complex() == pytest.approx(2 + 3j)
