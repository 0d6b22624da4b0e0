import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rqtladder.objective import JqtParams, MParams, compute_j, compute_m

pos = st.floats(min_value=1e-3, max_value=1e4)


@pytest.mark.parametrize("v, tau, alpha, expected", [
    (40.0, 10.0, 2.0, 38.0),
    (35.0, 7.3, 0.0, 35.0),
    (40.0, 1.0, 5.0, 40.0),
])
def test_compute_j_examples(v, tau, alpha, expected):
    assert compute_j(v, tau, JqtParams(alpha)) == expected


@pytest.mark.parametrize("alpha, expected", [(0.5, 1.5), (0.0, 2.0), (1.0, 1.0)])
def test_compute_m_examples(alpha, expected):
    assert compute_m(10.0, 100.0, MParams(alpha)) == pytest.approx(expected, abs=1e-15)


def test_degenerate_alpha_m_is_exact():
    assert compute_m(7.3, 1234.5, MParams(0.0)) == math.log10(1234.5)
    assert compute_m(7.3, 1234.5, MParams(1.0)) == math.log10(7.3)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_inputs_rejected(bad):
    with pytest.raises(ValueError):
        compute_j(40.0, bad, JqtParams(1.0))
    with pytest.raises(ValueError):
        compute_m(bad, 100.0, MParams(0.5))
    with pytest.raises(ValueError):
        compute_m(1.0, bad, MParams(0.5))


@pytest.mark.parametrize("alpha", [-0.1, 1.1, float("nan")])
def test_alpha_m_domain(alpha):
    with pytest.raises(ValueError):
        MParams(alpha)


def test_alpha_j_domain():
    JqtParams(0.0)
    with pytest.raises(ValueError):
        JqtParams(-1.0)


@given(v=st.floats(0, 100), t1=pos, t2=pos, alpha=st.floats(0.01, 10))
def test_j_decreases_with_decode_time(v, t1, t2, alpha):
    if t1 < t2:
        assert compute_j(v, t1, JqtParams(alpha)) >= compute_j(v, t2, JqtParams(alpha))


@given(t1=pos, t2=pos, b=pos, alpha=st.floats(0, 1))
def test_m_nondecreasing_in_time(t1, t2, b, alpha):
    lo, hi = sorted((t1, t2))
    assert compute_m(lo, b, MParams(alpha)) <= compute_m(hi, b, MParams(alpha)) + 1e-12


@given(v=st.floats(0, 100), tau=pos, c=st.floats(0.01, 100), alpha=st.floats(0, 5))
def test_uniform_time_scaling_shifts_j(v, tau, c, alpha):
    p = JqtParams(alpha)
    shifted = compute_j(v, c * tau, p)
    assert shifted == pytest.approx(compute_j(v, tau, p) - alpha * math.log10(c), abs=1e-9)
