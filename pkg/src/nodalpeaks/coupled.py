"""Synchronized-amplitude algebra and coupling-regime classification.

For admissible coupling beta the pair (alpha*w, gamma*w) solves the coupled
system with unit potentials, where alpha^2 = (mu2-beta)/(mu1*mu2-beta^2) and
gamma^2 = (mu1-beta)/(mu1*mu2-beta^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam, RegimeMismatch, SingularBeta
from .ground_state import RadialProfile, _deriv6

ATTRACTIVE_SYNC = "AttractiveSync"
REPULSIVE_SYNC = "RepulsiveSync"
LARGE_BETA_SYNC = "LargeBetaSync"
SEGREGATED_ONLY = "SegregatedOnly"
INVALID = "Invalid"

SYNC_REGIMES = (ATTRACTIVE_SYNC, REPULSIVE_SYNC, LARGE_BETA_SYNC)


@dataclass(frozen=True)
class CoupledParams:
    mu1: float
    mu2: float
    beta: float
    alpha: float | None
    gamma: float | None
    regime: str

    @property
    def synchronized(self) -> bool:
        return self.regime in SYNC_REGIMES


def classify(mu1: float, mu2: float, beta: float) -> CoupledParams:
    """Fill amplitudes when both radicands are positive, else tag the regime."""
    if mu1 <= 0 or mu2 <= 0:
        raise InvalidParam("mu1 and mu2 must be positive")
    if beta * beta == mu1 * mu2:
        raise SingularBeta(
            f"beta^2 = mu1*mu2 = {mu1 * mu2:g}: amplitude formula singular")

    den = mu1 * mu2 - beta * beta
    a2 = (mu2 - beta) / den
    g2 = (mu1 - beta) / den
    if a2 > 0 and g2 > 0:
        if beta > max(mu1, mu2):
            regime = LARGE_BETA_SYNC
        elif beta < 0:
            regime = REPULSIVE_SYNC
        else:
            regime = ATTRACTIVE_SYNC
        return CoupledParams(mu1, mu2, beta, math.sqrt(a2), math.sqrt(g2),
                             regime)
    if beta < 0:
        # beta <= -sqrt(mu1*mu2): no synchronized pair, segregated branch only
        return CoupledParams(mu1, mu2, beta, None, None, SEGREGATED_ONLY)
    return CoupledParams(mu1, mu2, beta, None, None, INVALID)


def synchronized_residual(params: CoupledParams, profile: RadialProfile,
                          sample_radii) -> float:
    """Max residual of both coupled equations at (alpha*w, gamma*w).

    Radii snap to the nearest profile nodes; the second derivative comes from
    differencing the stored first derivative, as in the profile's own ODE
    residual check.
    """
    if not params.synchronized:
        raise RegimeMismatch(f"regime {params.regime} carries no amplitudes")
    if abs(profile.mu - 1.0) > 1e-12:
        raise InvalidParam("synchronized residual expects the mu=1 profile")

    r = profile.r_grid
    h = r[1] - r[0]
    idx = np.clip(np.round(np.asarray(sample_radii, dtype=float) / h), 1,
                  len(r) - 2).astype(int)
    w = profile.values[idx]
    dw = profile.derivs[idx]
    upp = _deriv6(profile.derivs, h)[idx]
    lap = upp + 2.0 * dw / r[idx]

    al, ga = params.alpha, params.gamma
    u, v = al * w, ga * w
    res1 = -lap * al + u - params.mu1 * u**3 - params.beta * v**2 * u
    res2 = -lap * ga + v - params.mu2 * v**3 - params.beta * u**2 * v
    return float(max(np.abs(res1).max(), np.abs(res2).max()))
