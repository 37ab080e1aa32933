import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rieszlab.kfunc import WeightSeq
from rieszlab.subcouple import (
    Seq,
    ThetaOperator,
    apply_T,
    classify,
    f_theta,
    finite_section_lsv,
    neumann_inverse,
    sigma_indices,
    two_slope_weight,
)

seqs = st.builds(
    Seq,
    st.integers(-20, 20),
    st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=16).map(np.array),
)


def test_seq_arithmetic():
    a = Seq(2, np.array([1.0, 2.0]))
    b = Seq.unit(5)
    c = a + b * 3.0
    assert c.offset == 2 and list(c.dense(2, 5)) == [1.0, 2.0, 0.0, 3.0]
    assert c[5] == 3.0 and c[100] == 0.0
    assert np.all((c - c).values == 0)


def test_shift_and_scale():
    op = ThetaOperator(0.5, WeightSeq.from_slope(0.0, 32))
    ta = apply_T(op, Seq.unit(0))
    assert ta.offset == 0
    assert ta[0] == pytest.approx(-(2**0.5)) and ta[1] == 1.0


def test_apply_refuses_clipping():
    op = ThetaOperator(0.5, WeightSeq.from_slope(0.0, 8))
    with pytest.raises(ValueError):
        apply_T(op, Seq(7, np.ones(2)))
    with pytest.raises(ValueError):
        ThetaOperator(1.0, WeightSeq.from_slope(0.0, 8))


@settings(max_examples=60, deadline=None)
@given(a=seqs, theta=st.floats(0.05, 0.95))
def test_f_theta_annihilates_range(a, theta):
    op = ThetaOperator(theta, WeightSeq.from_slope(0.3, 64))
    ta = apply_T(op, a)
    scale = math.fsum(np.abs(np.exp2(np.arange(ta.offset, ta.stop) * theta) * ta.values)) or 1.0
    assert abs(f_theta(theta, ta)) / scale < 1e-12


@settings(max_examples=30, deadline=None)
@given(a=seqs, slope=st.floats(0, 0.4))
def test_neumann_round_trip(a, slope):
    w = WeightSeq.from_slope(slope, 512)
    op = ThetaOperator(0.8, w)
    alpha = neumann_inverse(op, a)
    assert op.norm(apply_T(op, alpha) - a) < 1e-11


def test_neumann_refused_near_sigma():
    op = ThetaOperator(0.5, WeightSeq.from_slope(0.48, 256))
    with pytest.raises(ValueError):
        neumann_inverse(op, Seq.unit(0))


def test_neumann_unit_weight():
    op = ThetaOperator(0.5, WeightSeq.from_slope(0.0, 256))
    alpha = neumann_inverse(op, Seq.unit(0))
    # -2^{-(j+1)/2} at n = j
    assert alpha[0] == pytest.approx(-(2**-0.5), rel=1e-14)
    assert alpha[3] == pytest.approx(-(2**-2.0), rel=1e-14)


@pytest.mark.parametrize("sigma", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_sigma_recovered_for_pure_slope(sigma):
    w = WeightSeq.from_slope(sigma, 256)
    k = 64
    s0, s1, _ = sigma_indices(w, k)
    assert abs(s0 - sigma) <= 1 / k and abs(s1 - sigma) <= 1 / k


@pytest.mark.parametrize("sigma", [0.3, 0.5, 0.7])
def test_verdicts_around_pure_slope(sigma):
    w = WeightSeq.from_slope(sigma, 1024)
    above = classify(sigma + 0.2, w)
    below = classify(sigma - 0.2, w)
    at = classify(sigma, w)
    assert above.verdict == "Invertible" and not above.uncertain
    assert below.verdict == "CodimOneClosed" and not below.uncertain
    assert below.evidence["range_annihilation"] < 1e-12
    assert at.uncertain


def test_slope_half_examples():
    w = WeightSeq.from_slope(0.5, 1024)
    assert classify(0.25, w).verdict == "CodimOneClosed"
    mid = classify(0.5, w)
    assert mid.verdict == "NotClosed" and mid.uncertain
    lsv = [r["lsv"] for r in mid.evidence["lsv_table"]]
    # finite sections lose their lower bound as N grows
    assert np.all(np.diff(lsv) < 0) and lsv[-1] < 0.1 * lsv[0]
    inv = classify(0.75, w)
    assert inv.verdict == "Invertible"
    lsv = [r["lsv"] for r in inv.evidence["lsv_table"]]
    assert lsv[-2] / lsv[-1] < 1.01 and min(lsv) > 0.2


def test_unit_weight_lsv_limit():
    op = ThetaOperator(0.5, WeightSeq.from_slope(0.0, 1024))
    rows = finite_section_lsv(op, [1024])
    assert rows[0]["lsv"] == pytest.approx(2**0.5 - 1, abs=1e-3)


def test_lsv_against_dense_svd():
    w = two_slope_weight(0.2, 0.6, 64)
    op = ThetaOperator(0.4, w)
    N = 20
    n = np.arange(-N, N + 1)
    lwn = w.log2_w[n - w.n_min]
    B = np.diag(np.full(2 * N + 1, -op.lam)) + np.diag(np.exp2(np.diff(lwn)), -1)
    want = np.linalg.svd(B, compute_uv=False).min()
    assert finite_section_lsv(op, [N])[0]["lsv"] == pytest.approx(want, rel=1e-9)


def test_two_slope_indices_and_verdict():
    w = two_slope_weight(0.2, 0.6, 4096)
    s0, s1, _ = sigma_indices(w, 64)
    assert s0 == pytest.approx(0.2, abs=1 / 64) and s1 == pytest.approx(0.6, abs=1 / 64)
    c = classify(0.4, w)
    assert c.verdict == "NotClosed" and not c.uncertain


def test_classification_json():
    c = classify(0.75, WeightSeq.from_slope(0.5, 256))
    d = c.to_dict()
    assert set(d) >= {"theta", "sigma0", "sigma1", "verdict", "uncertain", "lsv_table"}
    assert '"Invertible"' in c.to_json()
