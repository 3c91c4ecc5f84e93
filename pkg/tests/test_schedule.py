from dataclasses import replace

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmed.schedule import ScheduleParams, alpha, beta, default_schedule, gamma, validate

FAST_CONSENSUS_SET = ScheduleParams(
    alpha0=1.0, tau1=0.5, beta0=1.0, tau2=0.3, gamma0=1.0, tau3=0.4,
    c_mu=1.0, mu=0.99, delta=1.0, eps_bar=0.01,
)


def test_reference_params_ok():
    p = default_schedule()
    assert validate(p) == []
    assert p.delta0 == pytest.approx(0.9)
    assert p.tau3_bound == pytest.approx(0.4)


def test_fast_consensus_set_ok():
    assert validate(FAST_CONSENSUS_SET) == []


def test_tau2_above_tau1_named():
    out = validate(replace(default_schedule(), tau2=0.7))
    assert len(out) == 1 and out[0].startswith("tau2 < tau1 fails")


def test_tau3_bound_named():
    out = validate(replace(default_schedule(), tau3=0.5))
    assert any("tau3 < min(1 - tau1, 0.5*delta0) fails" in v for v in out)


def test_delta_below_one_branch():
    p = replace(default_schedule(), delta=0.5, mu=0.6, tau3=0.2)
    assert p.delta0 == 0.5
    assert validate(p) == []
    assert validate(replace(p, mu=0.4))


@settings(max_examples=300)
@given(st.builds(
    ScheduleParams,
    *[st.floats(allow_nan=True, allow_infinity=True)] * 9,
    eps_bar=st.floats(allow_nan=True, allow_infinity=True),
))
def test_validation_is_total(p):
    out = validate(p)
    assert isinstance(out, list)


class TestGains:
    def test_alpha_at_zero(self):
        assert alpha(default_schedule(), 0) == 1.0

    def test_beta_at_zero(self):
        assert beta(default_schedule(), 0) == pytest.approx(0.1)

    def test_gamma_against_high_precision(self):
        mpmath.mp.dps = 40
        expected = float(mpmath.mpf(20) / mpmath.power(1000, mpmath.mpf("0.3")))
        assert expected == pytest.approx(2.517850, abs=1e-6)
        assert gamma(default_schedule(), 999) == pytest.approx(expected, rel=1e-14)

    def test_strictly_decreasing(self):
        p = default_schedule()
        t = np.arange(0, 10_000)
        for f in (alpha, beta, gamma):
            v = f(p, t)
            assert np.all(v > 0) and np.all(np.diff(v) < 0)

    def test_alpha_gamma_partial_sums_diverge(self):
        # sum_{t<T} alpha_t gamma_t >= integral_1^{T+1} s^-p ds with p = tau1 + tau3 < 1,
        # which is unbounded; the per-decade increments must also keep growing.
        p = default_schedule()
        expo = p.tau1 + p.tau3
        t = np.arange(10**6)
        partial = np.cumsum(alpha(p, t) * gamma(p, t))
        decades = [10**k for k in range(2, 7)]
        for T in decades:
            lower = p.alpha0 * p.gamma0 * ((T + 1) ** (1 - expo) - 1) / (1 - expo)
            assert partial[T - 1] >= lower
        inc = np.diff([partial[T - 1] for T in decades])
        assert np.all(np.diff(inc) > 0)
