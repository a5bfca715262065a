"""Scalar radial ground state of -u'' - (2/r)u' + u = mu*u^3 on [0, inf).

The profile is found by shooting in u(0) with a bisection dichotomy:
overshoot crosses zero, undershoot turns back up. The raw trajectory is
exponentially unstable, so past a graft radius the stored values switch to
the fitted far-field tail c0*exp(-r)/r, which solves the linearized
far-field equation exactly.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import InvalidParam, NonConvergence, PoorFit

ODE_TOL = 1e-8
TAIL_TOL = 1e-3

_R0 = 1e-4          # series start radius for the IVP
_RTOL = 1e-13
_ATOL = 1e-14
_MAX_STEP = 0.1
# Beyond this radius the stored profile is the fitted analytic tail. The raw
# trajectory is contaminated by the unstable mode at the 1e-7 relative level
# near r=10 (growing like e^{2r} beyond), while the tail model's own defect
# is only O(e^{-2r}) relative, so grafting early is strictly more accurate.
_GRAFT_R = 9.5
_FIT_LO = 7.0


@dataclass(frozen=True)
class RadialProfile:
    """Tabulated radial profile with decay constant and tail model."""

    mu: float
    r_grid: np.ndarray
    values: np.ndarray
    derivs: np.ndarray
    c0: float
    r_max: float

    def __post_init__(self):
        for arr in (self.r_grid, self.values, self.derivs):
            arr.setflags(write=False)


def _rhs(r, y, mu):
    u, du = y
    return (du, u - mu * u**3 - 2.0 * du / r)


def _series_start(u0: float, mu: float):
    # u(r) = u0 + (u0 - mu*u0^3) r^2/6 + O(r^4) removes the r=0 singularity
    c = u0 - mu * u0**3
    return np.array([u0 + c * _R0**2 / 6.0, c * _R0 / 3.0])


def _shoot(u0, mu, r_max, rtol, dense=False):
    """Integrate one trajectory; classify as 'cross' or 'turn'."""

    def cross(r, y, mu):
        return y[0]

    cross.terminal = True
    cross.direction = -1

    def turn(r, y, mu):
        return y[1]

    turn.terminal = True
    turn.direction = 1

    # eighth-order pair: the stored u' must be clean enough that a sixth-order
    # difference of it meets the 1e-8 residual bar, which a 4(5) pair cannot
    # deliver at sane cost
    sol = solve_ivp(_rhs, (_R0, r_max), _series_start(u0, mu), args=(mu,),
                    method="DOP853", rtol=rtol, atol=_ATOL,
                    max_step=_MAX_STEP, events=(cross, turn),
                    dense_output=dense)
    if sol.t_events[0].size:
        kind = "cross"
        r_end = float(sol.t_events[0][0])
    elif sol.t_events[1].size:
        kind = "turn"
        r_end = float(sol.t_events[1][0])
    else:
        kind = "decayed"
        r_end = float(sol.t[-1])
    return kind, r_end, sol


def _bisect(mu, r_max, lo, hi, iters, rtol):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        kind, _, _ = _shoot(mid, mu, r_max, rtol)
        if kind == "cross":
            hi = mid
        else:
            lo = mid
    return lo, hi


def solve_ground_state(mu: float, r_max: float = 25.0,
                       nodes: int = 8000) -> RadialProfile:
    """Shooting plus bisection for the unique positive decaying profile."""
    if mu <= 0:
        raise InvalidParam(f"mu must be positive, got {mu}")
    if r_max < 20:
        raise InvalidParam("r_max must be at least 20")
    if nodes < 2000:
        raise InvalidParam("nodes must be at least 2000")

    # coarse bracket, then a narrow re-bracket at the final tolerance so the
    # dichotomy is resolved for the same discrete map that gets sampled
    lo = 1.1 * np.sqrt(2.0 / mu)
    hi = 10.0 / np.sqrt(mu)
    lo, hi = _bisect(mu, r_max, lo, hi, 24, 1e-6)
    mid = 0.5 * (lo + hi)
    pad = 2e-4 * mid
    lo, hi = mid - pad, mid + pad
    k_lo, _, _ = _shoot(lo, mu, r_max, _RTOL)
    k_hi, _, _ = _shoot(hi, mu, r_max, _RTOL)
    if k_lo == "cross" or k_hi != "cross":
        # loose/tight maps disagree more than the pad; fall back to full range
        lo = 1.1 * np.sqrt(2.0 / mu)
        hi = 10.0 / np.sqrt(mu)
        k_lo, k_hi = "turn", "cross"
    lo, hi = _bisect(mu, r_max, lo, hi, 60, _RTOL)
    if not hi > lo:
        raise NonConvergence("bisection bracket collapsed without decay")

    u0 = 0.5 * (lo + hi)
    kind, r_end, sol = _shoot(u0, mu, r_max, _RTOL, dense=True)
    if r_end < 10.0:
        raise NonConvergence(
            f"trajectory left the decay corridor at r={r_end:.3f}")

    r_grid = np.linspace(0.0, r_max, nodes)
    vals = np.empty(nodes)
    ders = np.empty(nodes)
    vals[0], ders[0] = u0, 0.0

    usable = min(r_end, r_max)
    in_traj = (r_grid >= _R0) & (r_grid <= usable)
    y = sol.sol(r_grid[in_traj])
    vals[in_traj] = y[0]
    ders[in_traj] = y[1]
    small = (r_grid > 0) & (r_grid < _R0)
    if np.any(small):
        c = u0 - mu * u0**3
        vals[small] = u0 + c * r_grid[small]**2 / 6.0
        ders[small] = c * r_grid[small] / 3.0

    # fit c0 on the clean corridor: q(r) = -(u'/u + 1/r) should sit near 1
    graft_r = min(_GRAFT_R, usable - 1.0)
    if graft_r < 8.0:
        raise NonConvergence("decay corridor too short to fit the tail")
    fit = (r_grid >= _FIT_LO) & (r_grid <= graft_r)
    q = -(ders[fit] / vals[fit] + 1.0 / r_grid[fit])
    if np.any(vals[fit] <= 0) or np.max(np.abs(q - 1.0)) > 0.05:
        raise NonConvergence("no clean exponential corridor for the c0 fit")
    logc = np.log(vals[fit]) + r_grid[fit] + np.log(r_grid[fit])
    c0 = float(np.exp(np.mean(logc)))

    far = r_grid > graft_r
    rf = r_grid[far]
    vals[far] = c0 * np.exp(-rf) / rf
    ders[far] = -c0 * np.exp(-rf) * (1.0 / rf + 1.0 / rf**2)

    return RadialProfile(mu=float(mu), r_grid=r_grid, values=vals,
                         derivs=ders, c0=c0, r_max=float(r_max))


def decay_constant(profile: RadialProfile) -> float:
    """Refit c0 = lim r*e^r*u(r) over the outer window [0.6, 0.9]*r_max."""
    r = profile.r_grid
    sel = (r >= 0.6 * profile.r_max) & (r <= 0.9 * profile.r_max)
    u = profile.values[sel]
    if np.any(u <= 0):
        raise PoorFit("profile not positive on the fit window")
    logc = np.log(u) + r[sel] + np.log(r[sel])
    c0 = float(np.exp(np.mean(logc)))
    resid = float(np.max(np.abs(logc - np.mean(logc))))
    if resid > TAIL_TOL:
        raise PoorFit(f"tail fit residual {resid:.2e} exceeds {TAIL_TOL}")
    return c0


def _hermite(profile, r, deriv=False):
    r = np.asarray(r, dtype=float)
    grid = profile.r_grid
    h = grid[1] - grid[0]
    inside = r <= profile.r_max
    out = np.empty(r.shape)

    ri = np.minimum(r[inside], profile.r_max)
    idx = np.minimum((ri / h).astype(int), len(grid) - 2)
    t = (ri - grid[idx]) / h
    y0, y1 = profile.values[idx], profile.values[idx + 1]
    d0, d1 = profile.derivs[idx], profile.derivs[idx + 1]
    t2, t3 = t * t, t * t * t
    if not deriv:
        out[inside] = ((2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0
                       + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1)
    else:
        out[inside] = ((6 * t2 - 6 * t) * y0 / h + (3 * t2 - 4 * t + 1) * d0
                       + (-6 * t2 + 6 * t) * y1 / h + (3 * t2 - 2 * t) * d1)

    far = ~inside
    if np.any(far):
        rf = r[far]
        tail = profile.c0 * np.exp(-rf) / rf
        out[far] = -tail * (1.0 + 1.0 / rf) if deriv else tail
    return out


def evaluate(profile: RadialProfile, r):
    """Profile value at radius r (scalar or array), tail model past r_max."""
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    out = _hermite(profile, np.atleast_1d(r))
    return float(out[0]) if scalar else out


def evaluate_deriv(profile: RadialProfile, r):
    r = np.asarray(r, dtype=float)
    scalar = r.ndim == 0
    out = _hermite(profile, np.atleast_1d(r), deriv=True)
    return float(out[0]) if scalar else out


# sixth-order first-derivative stencils (uniform grid); rows 0..2 are the
# forward one-sided variants used at the edges
_D6_CENTRAL = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_D6_EDGE = np.array([
    [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0],
    [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0],
    [2.0, -24.0, -35.0, 80.0, -30.0, 8.0, -1.0],
]) / 60.0


def _deriv6(y: np.ndarray, h: float) -> np.ndarray:
    n = len(y)
    out = np.empty(n)
    acc = np.zeros(n - 6)
    for j, c in enumerate(_D6_CENTRAL):
        if c != 0.0:
            acc += c * y[j:j + n - 6]
    out[3:n - 3] = acc
    for i in range(3):
        out[i] = _D6_EDGE[i] @ y[:7]
        out[n - 1 - i] = -(_D6_EDGE[i] @ y[::-1][:7])
    return out / h


def ode_residual(profile: RadialProfile) -> np.ndarray:
    """|u'' + (2/r)u' - u + mu*u^3| at the interior nodes.

    u'' comes from differencing the stored derivative array, which keeps the
    rounding amplification at O(eps/h) instead of O(eps/h^2).
    """
    r = profile.r_grid
    h = r[1] - r[0]
    upp = _deriv6(profile.derivs, h)
    res = (upp + 2.0 * profile.derivs / np.where(r > 0, r, 1.0)
           - profile.values + profile.mu * profile.values**3)
    return np.abs(res[1:-1])


def profile_to_text(profile: RadialProfile) -> str:
    buf = io.StringIO()
    buf.write(f"radialprofile 1 mu={profile.mu:.17g} c0={profile.c0:.17g} "
              f"nodes={len(profile.r_grid)}\n")
    for r, u, du in zip(profile.r_grid, profile.values, profile.derivs):
        buf.write(f"{r:.17g} {u:.17g} {du:.17g}\n")
    return buf.getvalue()


def profile_from_text(text: str) -> RadialProfile:
    lines = text.strip().splitlines()
    head = lines[0].split()
    if head[0] != "radialprofile" or head[1] != "1":
        raise InvalidParam("unrecognized profile header")
    fields = dict(kv.split("=") for kv in head[2:])
    n = int(fields["nodes"])
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), ndmin=2)
    if data.shape != (n, 3):
        raise InvalidParam("profile node count does not match header")
    return RadialProfile(mu=float(fields["mu"]), r_grid=data[:, 0].copy(),
                         values=data[:, 1].copy(), derivs=data[:, 2].copy(),
                         c0=float(fields["c0"]), r_max=float(data[-1, 0]))
