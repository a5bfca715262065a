"""Alternating-sign multi-peak fields on symmetric box grids.

Peak layouts live on a ring in the x3 = 0 plane: 2k centers at angular
step pi/k for the primary set, and a half-step-offset ring for the
second species. Built fields are (anti)symmetric under the discrete
group generated by the pi/k rotation-with-sign-flip and evenness in
x2, x3.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import map_coordinates

from .coupled import CoupledParams
from .errors import BoxTooSmall, GridMismatch, InvalidParam, RegimeMismatch
from .ground_state import RadialProfile, evaluate


def peak_positions(k: int, r: float) -> np.ndarray:
    """2k points on the radius-r circle, first on the positive x1-axis."""
    if k < 1 or int(k) != k:
        raise InvalidParam(f"k must be a positive integer, got {k}")
    if r <= 0:
        raise InvalidParam(f"r must be positive, got {r}")
    j = np.arange(2 * k)
    ang = j * np.pi / k
    return np.column_stack([r * np.cos(ang), r * np.sin(ang),
                            np.zeros(2 * k)])


def offset_positions(k: int, rho: float) -> np.ndarray:
    """Half-step offset ring: angles (2j-1)*pi/(2k), j = 1..2k."""
    if k < 1 or int(k) != k:
        raise InvalidParam(f"k must be a positive integer, got {k}")
    if rho <= 0:
        raise InvalidParam(f"rho must be positive, got {rho}")
    j = np.arange(2 * k)
    ang = (2 * j + 1) * np.pi / (2 * k)
    return np.column_stack([rho * np.cos(ang), rho * np.sin(ang),
                            np.zeros(2 * k)])


def peak_signs(k: int) -> np.ndarray:
    return np.array([(-1.0) ** j for j in range(2 * k)])


def admissible_interval(eps: float, k: int, m: float, n: float,
                        delta: float) -> tuple[float, float]:
    """Radius window [(min(m,n)-delta), (min(m,n)+delta)] scaled by
    eps*ln(1/eps)/(2 sin(pi/2k))."""
    if not 0 < eps < 1:
        raise InvalidParam(f"need 0 < eps < 1, got {eps}")
    mn = min(m, n)
    if not 0 < delta < mn:
        raise InvalidParam(f"delta must lie in (0, {mn}), got {delta}")
    scale = eps * math.log(1 / eps) / (2 * math.sin(math.pi / (2 * k)))
    return ((mn - delta) * scale, (mn + delta) * scale)


@dataclass(frozen=True)
class PeakConfiguration:
    """Ring layout: k, radius r (first species), optional rho (second
    species, segregated mode), and the semiclassical parameter."""
    k: int
    r: float
    eps: float
    rho: float | None = None
    x_points: np.ndarray = field(init=False, repr=False)
    y_points: np.ndarray | None = field(init=False, repr=False)
    signs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.eps <= 0:
            raise InvalidParam(f"eps must be positive, got {self.eps}")
        xp = peak_positions(self.k, self.r)
        yp = (offset_positions(self.k, self.rho)
              if self.rho is not None else None)
        sg = peak_signs(self.k)
        for arr in (xp, yp, sg):
            if arr is not None:
                arr.setflags(write=False)
        object.__setattr__(self, "x_points", xp)
        object.__setattr__(self, "y_points", yp)
        object.__setattr__(self, "signs", sg)


@dataclass(frozen=True)
class GridSpec:
    """Symmetric box [-L, L]^3 with n (odd) nodes per axis."""
    L: float
    n: int

    def __post_init__(self):
        if self.L <= 0:
            raise InvalidParam(f"L must be positive, got {self.L}")
        if self.n < 3 or self.n % 2 == 0:
            raise InvalidParam(f"n must be odd and >= 3, got {self.n}")

    @property
    def h(self) -> float:
        return 2 * self.L / (self.n - 1)

    @classmethod
    def cover(cls, r_outer: float, eps: float, margin: float | None = None,
              h_target: float | None = None,
              n_cap: int | None = None) -> "GridSpec":
        """Box enclosing a ring of radius r_outer with the default decay
        margin 8*eps*ln(1/eps) and resolution eps/8; n_cap trades
        resolution for memory."""
        if margin is None:
            margin = 8.0 * eps * math.log(1 / eps)
        if h_target is None:
            h_target = eps / 8.0
        L = r_outer + margin
        n = int(round(2 * L / h_target)) + 1
        if n % 2 == 0:
            n += 1
        if n_cap is not None:
            if n_cap % 2 == 0:
                n_cap -= 1
            n = min(n, n_cap)
        return cls(L=L, n=n)


@dataclass(frozen=True)
class GridField:
    """Two scalar components sampled on the symmetric tensor grid."""
    L: float
    n: int
    u_values: np.ndarray
    v_values: np.ndarray

    def __post_init__(self):
        if self.L <= 0:
            raise InvalidParam(f"L must be positive, got {self.L}")
        if self.n < 3 or self.n % 2 == 0:
            raise InvalidParam(f"n must be odd and >= 3, got {self.n}")
        shape = (self.n, self.n, self.n)
        if self.u_values.shape != shape or self.v_values.shape != shape:
            raise GridMismatch(
                f"component shape mismatch: expected {shape}, got "
                f"{self.u_values.shape} / {self.v_values.shape}")
        if not (np.all(np.isfinite(self.u_values))
                and np.all(np.isfinite(self.v_values))):
            raise InvalidParam("non-finite field values")
        self.u_values.setflags(write=False)
        self.v_values.setflags(write=False)

    @property
    def h(self) -> float:
        return 2 * self.L / (self.n - 1)

    def axis(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n)

    def mesh(self, sparse: bool = True):
        x = self.axis()
        return np.meshgrid(x, x, x, indexing="ij", sparse=sparse)


def boundary_level(fld: GridField) -> float:
    """Max boundary-face magnitude relative to the global max."""
    mx = max(np.abs(fld.u_values).max(), np.abs(fld.v_values).max())
    if mx == 0:
        return 0.0
    b = 0.0
    for arr in (fld.u_values, fld.v_values):
        for ax in range(3):
            sl = [slice(None)] * 3
            for edge in (0, -1):
                sl[ax] = edge
                b = max(b, np.abs(arr[tuple(sl)]).max())
    return b / mx


def _profile_sum(points: np.ndarray, signs: np.ndarray,
                 profile: RadialProfile, eps: float, spec: GridSpec):
    x = np.linspace(-spec.L, spec.L, spec.n)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij", sparse=True)
    out = np.zeros((spec.n, spec.n, spec.n))
    for p, s in zip(points, signs):
        d = np.sqrt((X - p[0]) ** 2 + (Y - p[1]) ** 2
                    + (Z - p[2]) ** 2) / eps
        out += s * evaluate(profile, d)
    return out


def _check_margin(spec: GridSpec, r_outer: float, eps: float,
                  margin_floor: float | None):
    if margin_floor is None:
        margin_floor = 6.0 * eps * math.log(1 / eps)
    have = spec.L - r_outer
    if have < margin_floor * (1 - 1e-12):
        raise BoxTooSmall(
            f"peak ring at radius {r_outer:g} leaves margin {have:g} "
            f"< required {margin_floor:g} (L={spec.L:g})")


def build_synchronized(config: PeakConfiguration, params: CoupledParams,
                       profile: RadialProfile, spec: GridSpec,
                       margin_floor: float | None = None) -> GridField:
    """(u, v) = (alpha, gamma) * sum_j (-1)^j w(|x - x_j|/eps)."""
    if not params.synchronized:
        raise RegimeMismatch(
            f"synchronized build needs amplitudes, regime is "
            f"{params.regime}")
    _check_margin(spec, config.r, config.eps, margin_floor)
    wsum = _profile_sum(config.x_points, config.signs, profile,
                        config.eps, spec)
    return GridField(L=spec.L, n=spec.n,
                     u_values=params.alpha * wsum,
                     v_values=params.gamma * wsum.copy())


def build_segregated(config: PeakConfiguration, U1: RadialProfile,
                     U2: RadialProfile, spec: GridSpec,
                     margin_floor: float | None = None) -> GridField:
    """u from U1 on the primary ring, v from U2 on the offset ring."""
    if config.rho is None:
        raise InvalidParam("segregated build requires rho")
    _check_margin(spec, max(config.r, config.rho), config.eps,
                  margin_floor)
    u = _profile_sum(config.x_points, config.signs, U1, config.eps, spec)
    v = _profile_sum(config.y_points, config.signs, U2, config.eps, spec)
    return GridField(L=spec.L, n=spec.n, u_values=u, v_values=v)


def _rotation_samples(arr: np.ndarray, L: float, theta: float):
    """Values of arr at R_theta x (rotation about the x3-axis) and the
    in-box mask. Exact node permutations for theta = pi, pi/2."""
    n = arr.shape[0]
    if abs(theta - np.pi) < 1e-15:
        return arr[::-1, ::-1, :], np.ones(arr.shape, dtype=bool)
    if abs(theta - np.pi / 2) < 1e-15:
        # R(x, y) = (-y, x): f(Rx) on the node grid
        return np.transpose(arr, (1, 0, 2))[:, ::-1, :], np.ones(
            arr.shape, dtype=bool)
    h = 2 * L / (n - 1)
    x = np.linspace(-L, L, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    xr = X * np.cos(theta) - Y * np.sin(theta)
    yr = X * np.sin(theta) + Y * np.cos(theta)
    mask2 = (np.abs(xr) <= L) & (np.abs(yr) <= L)
    ix = (xr + L) / h
    iy = (yr + L) / h
    iz = np.arange(n, dtype=float)
    IX = np.broadcast_to(ix[:, :, None], arr.shape)
    IY = np.broadcast_to(iy[:, :, None], arr.shape)
    IZ = np.broadcast_to(iz[None, None, :], arr.shape)
    vals = map_coordinates(arr, [IX.ravel(), IY.ravel(), IZ.ravel()],
                           order=1, mode="nearest").reshape(arr.shape)
    mask = np.broadcast_to(mask2[:, :, None], arr.shape)
    return vals, mask


def symmetry_defect(fld: GridField, k: int) -> float:
    """Max deviation from the symmetry class: |f(R_{pi/k} x) + f(x)|
    plus evenness defects in x2 and x3, over both components."""
    worst = 0.0
    for arr in (fld.u_values, fld.v_values):
        rot, mask = _rotation_samples(arr, fld.L, np.pi / k)
        d_rot = np.abs(rot + arr)[mask].max() if mask.any() else 0.0
        d_e2 = np.abs(arr[:, ::-1, :] - arr).max()
        d_e3 = np.abs(arr[:, :, ::-1] - arr).max()
        worst = max(worst, d_rot, d_e2, d_e3)
    return float(worst)


# --- serialization ---

_FIELD_MAGIC = "gridfield 1"


def field_to_text(fld: GridField, eps: float, path: str):
    """Versioned text dump: header (L, n, eps), then u nodes, then v
    nodes in C order, one value per line."""
    with open(path, "w") as f:
        f.write(f"{_FIELD_MAGIC} L={fld.L:.17g} n={fld.n} "
                f"eps={eps:.17g}\n")
        np.savetxt(f, fld.u_values.ravel(), fmt="%.17g")
        np.savetxt(f, fld.v_values.ravel(), fmt="%.17g")


def field_from_text(path: str) -> tuple[GridField, float]:
    with open(path) as f:
        header = f.readline().strip()
        parts = header.split()
        if " ".join(parts[:2]) != _FIELD_MAGIC:
            raise InvalidParam(f"bad field header: {header!r}")
        kv = dict(p.split("=", 1) for p in parts[2:])
        L = float(kv["L"])
        n = int(kv["n"])
        eps = float(kv["eps"])
        data = np.loadtxt(f)
    if data.size != 2 * n ** 3:
        raise InvalidParam(
            f"field dump has {data.size} values, expected {2 * n ** 3}")
    u = data[:n ** 3].reshape(n, n, n)
    v = data[n ** 3:].reshape(n, n, n)
    return GridField(L=L, n=n, u_values=u, v_values=v), eps


def field_slice_csv(fld: GridField, path: str):
    """CSV of the x3 = 0 plane: x1, x2, u, v per row."""
    mid = (fld.n - 1) // 2
    x = fld.axis()
    with open(path, "w") as f:
        f.write("x1,x2,u,v\n")
        for i in range(fld.n):
            ui = fld.u_values[i, :, mid]
            vi = fld.v_values[i, :, mid]
            for j in range(fld.n):
                f.write(f"{x[i]:.17g},{x[j]:.17g},"
                        f"{ui[j]:.17g},{vi[j]:.17g}\n")
