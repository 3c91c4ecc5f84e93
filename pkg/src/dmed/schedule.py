"""Decaying gains and clipping threshold, plus their admissibility rules.

Consensus gain ``beta_t = beta0 / (t+1)**tau2``, innovation gain
``alpha_t = alpha0 / (t+1)**tau1`` and clipping threshold
``gamma_t = gamma0 / (t+1)**tau3``. The exponents must satisfy
``0 < tau2 < tau1 < 1`` and ``0 < tau3 < min(1 - tau1, delta0 / 2)``, where
``delta0`` is fixed by the bias decay exponent ``delta`` of the observations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MU_TOL = 1e-12


@dataclass(frozen=True)
class ScheduleParams:
    alpha0: float
    tau1: float
    beta0: float
    tau2: float
    gamma0: float
    tau3: float
    c_mu: float
    mu: float
    delta: float
    eps_bar: float = 0.1

    @property
    def delta0(self) -> float:
        """Effective observation-error exponent: ``1 - eps_bar`` when the bias
        decays at least like ``1/(t+1)``, otherwise ``delta`` itself."""
        return 1.0 - self.eps_bar if self.delta >= 1 else self.delta

    @property
    def tau3_bound(self) -> float:
        return min(1.0 - self.tau1, 0.5 * self.delta0)


def default_schedule() -> ScheduleParams:
    """Gains used in the reference 40-agent experiments."""
    return ScheduleParams(
        alpha0=1.0, tau1=0.6, beta0=0.1, tau2=0.2, gamma0=20.0, tau3=0.3,
        c_mu=10.0, mu=0.9, delta=1.0, eps_bar=0.1,
    )


def validate(p: ScheduleParams) -> list[str]:
    """Return every violated admissibility constraint; empty means ok.

    Each comparison is written so that NaN fails it, hence non-finite input
    is reported rather than raising.
    """
    out: list[str] = []

    def need(ok, msg):
        if not ok:
            out.append(msg)

    need(p.alpha0 > 0, f"alpha0 > 0 fails (alpha0={p.alpha0})")
    need(p.beta0 > 0, f"beta0 > 0 fails (beta0={p.beta0})")
    need(p.gamma0 > 0, f"gamma0 > 0 fails (gamma0={p.gamma0})")
    need(p.tau2 > 0, f"tau2 > 0 fails (tau2={p.tau2})")
    need(p.tau2 < p.tau1, f"tau2 < tau1 fails (tau2={p.tau2}, tau1={p.tau1})")
    need(p.tau1 < 1, f"tau1 < 1 fails (tau1={p.tau1})")
    need(p.c_mu > 0, f"c_mu > 0 fails (c_mu={p.c_mu})")
    need(0 < p.mu < 1, f"0 < mu < 1 fails (mu={p.mu})")
    need(p.delta > 0, f"delta > 0 fails (delta={p.delta})")
    if p.delta >= 1:
        need(0 < p.eps_bar < 1, f"0 < eps_bar < 1 fails (eps_bar={p.eps_bar})")
        need(
            abs(p.mu - p.delta0) <= _MU_TOL,
            f"mu = delta0 = 1 - eps_bar fails for delta >= 1 "
            f"(mu={p.mu}, eps_bar={p.eps_bar}, delta0={p.delta0})",
        )
    elif p.delta > 0:
        need(p.delta <= p.mu, f"delta <= mu fails for delta < 1 (delta={p.delta}, mu={p.mu})")
    need(
        p.tau3 < p.tau3_bound,
        f"tau3 < min(1 - tau1, 0.5*delta0) fails "
        f"(tau3={p.tau3}, tau1={p.tau1}, delta0={p.delta0}, bound={p.tau3_bound})",
    )
    need(p.tau3 > 0, f"tau3 > 0 fails (tau3={p.tau3})")
    return out


def alpha(p: ScheduleParams, t):
    return p.alpha0 / np.power(np.add(t, 1.0), p.tau1)


def beta(p: ScheduleParams, t):
    return p.beta0 / np.power(np.add(t, 1.0), p.tau2)


def gamma(p: ScheduleParams, t):
    return p.gamma0 / np.power(np.add(t, 1.0), p.tau3)
