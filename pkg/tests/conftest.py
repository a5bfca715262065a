import numpy as np
import pytest

from nodalpeaks.ansatz import (
    GridField,
    GridSpec,
    PeakConfiguration,
    build_synchronized,
    peak_positions,
    peak_signs,
)
from nodalpeaks.energy import energy
from nodalpeaks.ground_state import evaluate, solve_ground_state


@pytest.fixture(scope="session")
def profile1():
    return solve_ground_state(1.0)


@pytest.fixture(scope="session")
def profile2():
    return solve_ground_state(2.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


def ring_interaction_measured(profile, params, eps, k, r, P, Q,
                              margin=0.75, n=None):
    """Grid energy of the alternating ring minus the sum over isolated
    peaks on the same grid. Peak-local discretization and truncation
    errors cancel in the difference, leaving the overlap terms."""
    L = r + margin
    if n is None:
        n = 2 * int(np.ceil(L / (eps / 8))) + 1
    cfg = PeakConfiguration(k=k, r=r, eps=eps)
    spec = GridSpec(L=L, n=n)
    fld = build_synchronized(cfg, params, profile, spec, margin_floor=0.5)
    total = energy(fld, eps, P, Q, params).total
    x = np.linspace(-L, L, n)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij", sparse=True)
    singles = 0.0
    for pos, sg in zip(peak_positions(k, r), peak_signs(k)):
        d = np.sqrt((X - pos[0]) ** 2 + (Y - pos[1]) ** 2
                    + (Z - pos[2]) ** 2) / eps
        w = evaluate(profile, d)
        one = GridField(L=L, n=n, u_values=sg * params.alpha * w,
                        v_values=sg * params.gamma * w)
        singles += energy(one, eps, P, Q, params).total
    return total - singles
