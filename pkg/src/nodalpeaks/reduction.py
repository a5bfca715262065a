"""Reduced radial energy models: power well plus ring-interaction
exponential, their minimizers, and measured-landscape comparison."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParam, NoInteriorMin

SYNCHRONIZED = "Synchronized"
SEGREGATED_R = "SegregatedR"
SEGREGATED_RHO = "SegregatedRho"
_MODES = (SYNCHRONIZED, SEGREGATED_R, SEGREGATED_RHO)


@dataclass(frozen=True)
class ReducedModel:
    """f(r) = aB r^m + bC0_coeff r^n + C_int e^{-2 r sin(pi/2k)/eps}.

    Segregated modes use the same formula with the unused power
    coefficient zeroed; the mode tag records which ring radius the
    variable refers to.
    """

    aB: float
    bC0_coeff: float
    C_int: float
    m: float
    n: float
    k: int
    eps: float
    mode: str = SYNCHRONIZED

    def __post_init__(self):
        if self.C_int <= 0:
            raise InvalidParam(
                f"interaction coefficient must be positive, got "
                f"{self.C_int}")
        if self.m <= 1 or self.n <= 1:
            raise InvalidParam(
                f"power exponents must exceed 1, got m={self.m} "
                f"n={self.n}")
        if self.k < 1 or int(self.k) != self.k:
            raise InvalidParam(f"k must be a positive integer, got "
                               f"{self.k}")
        if not 0 < self.eps < 1:
            raise InvalidParam(f"need 0 < eps < 1, got {self.eps}")
        if self.mode not in _MODES:
            raise InvalidParam(f"unknown mode {self.mode!r}")

    @property
    def s_k(self) -> float:
        return math.sin(math.pi / (2 * self.k))

    def value(self, r):
        c = 2 * self.s_k / self.eps
        return (self.aB * r ** self.m + self.bC0_coeff * r ** self.n
                + self.C_int * np.exp(-c * np.asarray(r, dtype=float)))

    def deriv(self, r):
        c = 2 * self.s_k / self.eps
        return (self.aB * self.m * r ** (self.m - 1)
                + self.bC0_coeff * self.n * r ** (self.n - 1)
                - c * self.C_int * np.exp(-c * np.asarray(r, dtype=float)))

    def second(self, r):
        c = 2 * self.s_k / self.eps
        return (self.aB * self.m * (self.m - 1) * r ** (self.m - 2)
                + self.bC0_coeff * self.n * (self.n - 1)
                * r ** (self.n - 2)
                + c * c * self.C_int
                * np.exp(-c * np.asarray(r, dtype=float)))


def predicted_radius(eps: float, k: int, m: float) -> float:
    """Leading-order minimizer location m/(2 sin(pi/2k)) eps ln(1/eps)."""
    if not 0 < eps < 1:
        raise InvalidParam(f"need 0 < eps < 1, got {eps}")
    if k < 1 or int(k) != k:
        raise InvalidParam(f"k must be a positive integer, got {k}")
    if m <= 0:
        raise InvalidParam(f"m must be positive, got {m}")
    return m / (2 * math.sin(math.pi / (2 * k))) * eps * math.log(1 / eps)


def _leading_coefficient(model: ReducedModel) -> float:
    """Coefficient of the power term that dominates as r -> 0+."""
    terms = [(model.m, model.aB), (model.n, model.bC0_coeff)]
    live = [(e, c) for e, c in terms if c != 0.0]
    if not live:
        return 0.0
    e_min = min(e for e, _ in live)
    if abs(model.m - model.n) < 1e-14:
        return model.aB + model.bC0_coeff
    return sum(c for e, c in live if e == e_min)


def minimize_model(model: ReducedModel,
                   interval: tuple[float, float]) -> tuple[float, float,
                                                           bool]:
    """Interior minimizer of the model on [low, high].

    Golden-section localization refined by Newton on f' with a
    bisection safeguard. Raises NoInteriorMin when the landscape has no
    sign change of f' inside (minimum pinned to an endpoint), which
    also catches nonpositive leading coefficients.
    """
    lo, hi = interval
    if not (0 < lo < hi):
        raise InvalidParam(f"bad interval ({lo}, {hi})")
    if _leading_coefficient(model) <= 0:
        raise NoInteriorMin(
            "nonpositive leading power coefficient: landscape has no "
            "interior minimum")
    if model.deriv(lo) >= 0:
        raise NoInteriorMin(
            f"f is nondecreasing at r = {lo:g}: minimum at the lower "
            f"endpoint")
    if model.deriv(hi) <= 0:
        raise NoInteriorMin(
            f"f is nonincreasing at r = {hi:g}: minimum at the upper "
            f"endpoint")
    # golden localization of the value minimum
    invphi = (math.sqrt(5.0) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = model.value(c), model.value(d)
    for _ in range(40):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = model.value(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = model.value(d)
    r = 0.5 * (a + b)
    # safeguarded Newton on f' inside the sign bracket
    blo, bhi = lo, hi
    for _ in range(100):
        f1 = model.deriv(r)
        if f1 > 0:
            bhi = r
        elif f1 < 0:
            blo = r
        else:
            break
        rn = r - f1 / model.second(r)
        if not blo < rn < bhi:
            rn = 0.5 * (blo + bhi)
        if abs(rn - r) < 1e-15 * r:
            r = rn
            break
        r = rn
    tol = 1e-9 * (hi - lo)
    interior = (r - lo) > tol and (hi - r) > tol
    return float(r), float(model.value(r)), interior


def minimize_segregated(modelR: ReducedModel, modelRho: ReducedModel,
                        box: tuple[tuple[float, float],
                                   tuple[float, float]]):
    """Minimize the separable segregated landscape g(r) + h(rho) over a
    product of radius windows: ((r1, rho1), value, interior).

    The neglected cross-ring coupling at the minimizer is available
    from cross_term_bound.
    """
    r_int, rho_int = box
    r1, g1, int_r = minimize_model(modelR, r_int)
    rho1, h1, int_rho = minimize_model(modelRho, rho_int)
    return (r1, rho1), g1 + h1, (int_r and int_rho)


def cross_term_bound(modelR: ReducedModel, modelRho: ReducedModel,
                     r: float, rho: float) -> float:
    """Scale of the dropped cross-ring term at (r, rho): geometric-mean
    constant times e^{-2 d_xy/eps}, with d_xy the closest distance
    between the two rings' peaks. Its exponent beats both retained
    exponentials, so the ratio to them vanishes as eps does."""
    if modelR.k != modelRho.k or modelR.eps != modelRho.eps:
        raise InvalidParam("mismatched factor models")
    d_xy = math.sqrt(r * r + rho * rho
                     - 2 * r * rho * math.cos(math.pi / (2 * modelR.k)))
    return (math.sqrt(modelR.C_int * modelRho.C_int)
            * math.exp(-2 * d_xy / modelR.eps))


@dataclass(frozen=True)
class LandscapeTable:
    """Sampled measured landscape with its discrete minimizer and the
    comparison against the predicted radius."""

    radii: np.ndarray
    values: np.ndarray
    r_star: float
    f_star: float
    predicted: float
    ratio_to_predicted: float


def measured_landscape(eps: float, k: int, r_samples, pipeline,
                       m: float, workers: int = 1) -> LandscapeTable:
    """Evaluate the build-and-integrate pipeline at each radius.

    pipeline maps a radius to the measured energy of the assembled
    field. Samples run independently (optionally in a thread pool) and
    the table is assembled in radius order; among equal minima the
    smallest radius wins.
    """
    rs = np.sort(np.asarray(r_samples, dtype=float))
    if rs.size < 1:
        raise InvalidParam("need at least one radius sample")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = np.array(list(pool.map(pipeline, rs)))
    else:
        vals = np.array([pipeline(r) for r in rs])
    i = int(np.argmin(vals))
    pred = predicted_radius(eps, k, m)
    return LandscapeTable(radii=rs, values=vals, r_star=float(rs[i]),
                          f_star=float(vals[i]), predicted=pred,
                          ratio_to_predicted=float(rs[i] / pred))
