"""Config-driven experiment sweeps.

Parses a flat TOML config, checks it against the hypotheses of the
target regime, and runs the full pipeline for every (eps, mode) point:
predicted radii, reduced-model landscapes and minimizers, expansion fit
slopes, and (where the grid solver applies) a symmetry-constrained
Newton solve with checkpointed artifacts. Every output file is
re-derivable from the config alone; CSV and JSON writes are
deterministic so identical configs produce byte-identical artifacts.
"""

import functools
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .ansatz import (GridSpec, PeakConfiguration, admissible_interval,
                     build_segregated, build_synchronized, field_slice_csv)
from .coupled import classify
from .energy import (PotentialModel, energy, moments,
                     multipeak_prediction_seg, multipeak_prediction_sync,
                     pair_interaction, single_peak_measured)
from .errors import (ConfigInvalid, InvalidParam, NoInteriorMin,
                     NodalPeaksError, SingularBeta)
from .ground_state import profile_to_text, solve_ground_state
from .reduction import (SEGREGATED_R, SEGREGATED_RHO, ReducedModel,
                        cross_term_bound, measured_landscape, minimize_model,
                        minimize_segregated, predicted_radius)
from .solver import (MODE_SEGREGATED, MODE_SYNCHRONIZED, SolveOptions,
                     newton_solve, profile_gap_seg, profile_gap_sync,
                     read_checkpoint, write_checkpoint)

MODE_SYNC = "sync"
MODE_SEG = "seg"

# fitted pair constant is separation-independent in the compensated
# normalization; any D >= 10 gives the same value to ~1e-6
_CHAT_SEPARATION = 12.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Raw sweep parameters, one-to-one with the TOML file."""

    mode: str
    mu1: float
    mu2: float
    beta: float
    k: int
    a: float
    m: float
    theta_p: float
    c_hot_p: float
    b: float
    n: float
    delta_q: float
    c_hot_q: float
    eps_list: tuple
    delta_seps: float
    out_dir: str
    beta_guard: float
    grid_L: float | None
    grid_n: int | None
    newton_tol: float
    max_iters: int
    linear_maxiter: int
    landscape_points: int
    landscape_measured: bool


_TOP_KEYS = {"mode", "mu1", "mu2", "beta", "k", "eps_list", "delta_seps",
             "out_dir", "beta_guard", "P", "Q", "grid", "solver",
             "landscape"}
_SECTION_KEYS = {
    "P": {"a", "m", "theta", "c_hot"},
    "Q": {"b", "n", "delta", "c_hot"},
    "grid": {"L", "n"},
    "solver": {"newton_tol", "max_iters", "linear_maxiter"},
    "landscape": {"points", "measured"},
}


def _require(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigInvalid(f"missing required key {key!r} in {where}")
    return table[key]


def load_config(path: str) -> ExperimentConfig:
    """Parse and structurally check a TOML experiment config.

    Unknown keys are rejected outright: a silently ignored typo in a
    sweep config is worse than a hard failure.
    """
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigInvalid(f"malformed TOML: {exc}") from exc

    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
    for sec, allowed in _SECTION_KEYS.items():
        extra = set(raw.get(sec, {})) - allowed
        if extra:
            raise ConfigInvalid(
                f"unknown keys in [{sec}]: {sorted(extra)}")

    p_tab = _require(raw, "P", "config")
    q_tab = _require(raw, "Q", "config")
    grid = raw.get("grid", {})
    solver = raw.get("solver", {})
    land = raw.get("landscape", {})
    eps_list = _require(raw, "eps_list", "config")
    if not isinstance(eps_list, list) or not eps_list:
        raise ConfigInvalid("eps_list must be a non-empty array")

    return ExperimentConfig(
        mode=str(_require(raw, "mode", "config")),
        mu1=float(_require(raw, "mu1", "config")),
        mu2=float(_require(raw, "mu2", "config")),
        beta=float(_require(raw, "beta", "config")),
        k=int(_require(raw, "k", "config")),
        a=float(_require(p_tab, "a", "[P]")),
        m=float(_require(p_tab, "m", "[P]")),
        theta_p=float(p_tab.get("theta", 1.0)),
        c_hot_p=float(p_tab.get("c_hot", 0.0)),
        b=float(_require(q_tab, "b", "[Q]")),
        n=float(_require(q_tab, "n", "[Q]")),
        delta_q=float(q_tab.get("delta", 1.0)),
        c_hot_q=float(q_tab.get("c_hot", 0.0)),
        eps_list=tuple(float(e) for e in eps_list),
        delta_seps=float(raw.get("delta_seps", 0.5)),
        out_dir=str(raw.get("out_dir", "results")),
        beta_guard=float(raw.get("beta_guard", 0.1)),
        grid_L=float(grid["L"]) if "L" in grid else None,
        grid_n=int(grid["n"]) if "n" in grid else None,
        newton_tol=float(solver.get("newton_tol", 1e-8)),
        max_iters=int(solver.get("max_iters", 40)),
        linear_maxiter=int(solver.get("linear_maxiter", 700)),
        landscape_points=int(land.get("points", 33)),
        landscape_measured=bool(land.get("measured", False)),
    )


@functools.lru_cache(maxsize=8)
def _ground(mu: float):
    return solve_ground_state(mu)


def validate_config(cfg: ExperimentConfig) -> list[str]:
    """Diagnostics for a config: 'error: ...' lines violate a regime
    hypothesis and block run(); 'warning: ...' lines do not.

    Non-mutating; safe on configs that would fail to run.
    """
    diags = []

    def err(msg):
        diags.append("error: " + msg)

    def warn(msg):
        diags.append("warning: " + msg)

    if cfg.mode not in (MODE_SYNC, MODE_SEG):
        err(f"mode must be 'sync' or 'seg', got {cfg.mode!r}")
        return diags
    if cfg.mu1 <= 0 or cfg.mu2 <= 0:
        err(f"mu1, mu2 must be positive, got ({cfg.mu1}, {cfg.mu2})")
    if cfg.k < 1:
        err(f"k must be a positive integer, got {cfg.k}")
    for e in cfg.eps_list:
        if not 0 < e < 1:
            err(f"every eps must lie in (0, 1), got {e}")
    if cfg.m <= 1 or cfg.n <= 1:
        err(f"potential exponents must exceed 1, got m={cfg.m} n={cfg.n}")
    if not 0 < cfg.delta_seps < min(cfg.m, cfg.n):
        err(f"delta_seps must lie in (0, min(m, n)), got {cfg.delta_seps}")
    if cfg.theta_p <= 0 or cfg.delta_q <= 0:
        err("higher-order exponents theta, delta must be positive")
    if cfg.landscape_points < 3:
        err(f"landscape points must be >= 3, got {cfg.landscape_points}")
    if cfg.grid_n is not None and (cfg.grid_n < 3 or cfg.grid_n % 2 == 0):
        err(f"grid n must be odd and >= 3, got {cfg.grid_n}")
    if [d for d in diags if d.startswith("error")]:
        return diags

    if cfg.mu1 * cfg.mu2 > 0 and abs(
            cfg.beta * cfg.beta / (cfg.mu1 * cfg.mu2) - 1) < 0.05:
        warn("beta^2 within 5% of mu1*mu2: synchronized amplitudes "
             "blow up near the singular coupling")

    if cfg.mode == MODE_SYNC:
        try:
            params = classify(cfg.mu1, cfg.mu2, cfg.beta)
        except SingularBeta as exc:
            err(str(exc))
            return diags
        if not params.synchronized:
            err(f"regime {params.regime} admits no synchronized "
                f"amplitude pair at beta={cfg.beta}")
            return diags
        if cfg.beta == 0:
            warn("beta = 0 decouples the components; coupling "
                 "diagnostics are vacuous")
        if cfg.m < cfg.n and cfg.a <= 0:
            err(f"condition (1) violated: m < n requires a > 0 "
                f"(a={cfg.a}, m={cfg.m}, n={cfg.n})")
        elif cfg.m > cfg.n and cfg.b <= 0:
            err(f"condition (1) violated: m > n requires b > 0 "
                f"(b={cfg.b}, m={cfg.m}, n={cfg.n})")
        elif cfg.m == cfg.n:
            w2 = moments(_ground(1.0))[0]
            combo = (cfg.a * 0.5 * params.alpha ** 2
                     + cfg.b * 0.5 * params.gamma ** 2) * w2
            if combo <= 0:
                err(f"condition (2) violated: m = n requires "
                    f"a*B + b*C0 > 0, got {combo:.6g}")
        if cfg.k > 2:
            warn("grid symmetrization supports k <= 2; points will "
                 "record predictions only")
    else:
        if cfg.m != cfg.n:
            err(f"segregated regime requires equal potential powers "
                f"m = n, got m={cfg.m} n={cfg.n}")
        if cfg.a <= 0 or cfg.b <= 0:
            err(f"segregated regime requires a > 0 and b > 0, got "
                f"a={cfg.a} b={cfg.b}")
        if cfg.beta >= cfg.beta_guard:
            err(f"segregated regime requires beta below the guard "
                f"{cfg.beta_guard}, got beta={cfg.beta}")
        elif cfg.beta >= 0:
            warn("grid solve requires beta < 0; solve will be skipped")
        if cfg.k != 1:
            warn("segregated grid solve supports k = 1; points will "
                 "record predictions only")

    return diags


def _solve_supported(cfg: ExperimentConfig, params) -> tuple[bool, str]:
    if cfg.mode == MODE_SYNC:
        if cfg.k > 2:
            return False, "grid symmetrization supports k <= 2"
        if not params.synchronized:
            return False, f"regime {params.regime} not synchronized"
    else:
        if cfg.k != 1:
            return False, "segregated grid solve supports k = 1"
        if cfg.beta >= 0:
            return False, "segregated grid solve needs beta < 0"
    return True, ""


def _potentials(cfg: ExperimentConfig, L: float):
    P = PotentialModel(a=cfg.a, m=cfg.m, c_hot=cfg.c_hot_p,
                       theta=cfg.theta_p,
                       box_radius=L if (cfg.a < 0 or cfg.c_hot_p < 0)
                       else None)
    Q = PotentialModel(a=cfg.b, m=cfg.n, c_hot=cfg.c_hot_q,
                       theta=cfg.delta_q,
                       box_radius=L if (cfg.b < 0 or cfg.c_hot_q < 0)
                       else None)
    return P, Q


def _write_csv(path: str, header: str, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(format(v, ".17g") for v in row) + "\n")


def _fit_slope(eps, P, Q, params, profile, rbar, lines):
    """Log-log slope of (measured/eps^3 - A) against radius over one
    decade around the predicted radius.

    The baseline A is measured at r = 0 rather than taken from the
    expansion: that removes the whole r-independent block including
    its eps^2 moment corrections, which would otherwise flatten the
    slope at the small-radius end.
    """
    A = single_peak_measured(eps, 0.0, P, Q, params, profile) / eps ** 3
    radii = np.geomspace(0.4 * rbar, 4.0 * rbar, 9)
    vals = np.array([single_peak_measured(eps, r, P, Q, params, profile)
                     / eps ** 3 - A for r in radii])
    if np.any(vals <= 0):
        lines.append("fit: nonpositive excess energy, slope skipped")
        return None
    slope = np.polyfit(np.log(radii), np.log(vals), 1)[0]
    return float(slope)


def _null_entry(cfg: ExperimentConfig, eps: float, rbar, window):
    return {
        "mode": cfg.mode,
        "eps": eps,
        "k": cfg.k,
        "predicted_radius": rbar,
        "window": list(window),
        "model_minimizer_r": None,
        "model_minimizer_rho": None,
        "model_minimum": None,
        "minimizer_interior": None,
        "ratio_to_predicted": None,
        "cross_scale": None,
        "fit_slope": None,
        "measured_minimizer_r": None,
        "measured_ratio": None,
        "solve_status": "skipped: not attempted",
        "newton_iterations": None,
        "final_residual": None,
        "peak_census_u": None,
        "peak_census_v": None,
        "correction_norm": None,
        "symmetry_defect": None,
        "profile_gap_h1": None,
        "profile_gap_sup": None,
    }


def _point_sync(cfg, eps, pdir, shared, resume, lines):
    prof_w, mom_w, chat, params = (shared["prof_w"], shared["mom_w"],
                                   shared["chat"], shared["params"])
    k = cfg.k
    rbar = predicted_radius(eps, k, min(cfg.m, cfg.n))
    lo, hi = admissible_interval(eps, k, cfg.m, cfg.n, cfg.delta_seps)
    entry = _null_entry(cfg, eps, rbar, (lo, hi))
    L = cfg.grid_L if cfg.grid_L else 8 * eps
    ngrid = cfg.grid_n if cfg.grid_n else 97
    P, Q = _potentials(cfg, L)

    al, ga = params.alpha, params.gamma
    w2 = mom_w[0]
    aB = cfg.a * 0.5 * al * al * w2
    bC0 = cfg.b * 0.5 * ga * ga * w2
    coeff = (0.5 * cfg.mu1 * al ** 4 + 0.5 * cfg.mu2 * ga ** 4
             + cfg.beta * al * al * ga * ga)
    s_k = math.sin(math.pi / (2 * k))
    mu_k = 1.0 if k == 1 else 2.0

    radii = np.linspace(lo, hi, cfg.landscape_points)
    rows = []
    for r in radii:
        total = multipeak_prediction_sync(eps, r, k, P, Q, params,
                                          mom_w, chat)
        power = aB * r ** cfg.m + bC0 * r ** cfg.n
        inter = (mu_k * coeff * chat * (eps / (2 * r * s_k))
                 * math.exp(-2 * r * s_k / eps))
        rows.append((r, total, power, inter))
    _write_csv(os.path.join(pdir, "landscape.csv"),
               "r,total,power_term,interaction_term", rows)

    try:
        model = ReducedModel(
            aB=aB, bC0_coeff=bC0,
            C_int=mu_k * coeff * chat * (eps / (2 * rbar * s_k)),
            m=cfg.m, n=cfg.n, k=k, eps=eps)
        r_star, f_star, interior = minimize_model(model, (lo, hi))
        entry["model_minimizer_r"] = float(r_star)
        entry["model_minimum"] = float(f_star)
        entry["minimizer_interior"] = bool(interior)
        entry["ratio_to_predicted"] = float(r_star / rbar)
    except (InvalidParam, NoInteriorMin) as exc:
        lines.append(f"model minimization failed: {exc}")

    try:
        entry["fit_slope"] = _fit_slope(eps, P, Q, params, prof_w, rbar,
                                        lines)
    except NodalPeaksError as exc:
        lines.append(f"fit slope failed: {exc}")

    if cfg.landscape_measured:
        try:
            table = _measured_sync(cfg, eps, radii[::4], P, Q, params,
                                   prof_w)
            _write_csv(os.path.join(pdir, "landscape_measured.csv"),
                       "r,total",
                       list(zip(table.radii, table.values)))
            entry["measured_minimizer_r"] = float(table.r_star)
            entry["measured_ratio"] = float(table.ratio_to_predicted)
        except NodalPeaksError as exc:
            lines.append(f"measured landscape failed: {exc}")

    _run_solve(cfg, eps, pdir, shared, resume, entry, lines,
               L, ngrid, P, Q, rbar)
    return entry


def _measured_sync(cfg, eps, radii, P, Q, params, prof_w):
    # one fixed grid across radii so discretization error cancels in
    # the argmin; box covers the outermost ring with decay margin
    hi = float(np.max(radii))
    Lm = hi + 8 * eps
    nm = 2 * math.ceil(Lm / (eps / 6)) + 1
    Pm, Qm = _potentials(cfg, Lm)
    spec = GridSpec(L=Lm, n=nm)

    def pipe(r):
        pk = PeakConfiguration(k=cfg.k, r=float(r), eps=eps)
        fld = build_synchronized(pk, params, prof_w, spec,
                                 margin_floor=6 * eps)
        return energy(fld, eps, Pm, Qm, params).total

    return measured_landscape(eps, cfg.k, radii, pipe, min(cfg.m, cfg.n))


def _point_seg(cfg, eps, pdir, shared, resume, lines):
    U1, U2, mom1, mom2 = (shared["U1"], shared["U2"], shared["mom1"],
                          shared["mom2"])
    B1_hat, B2_hat, params = (shared["B1_hat"], shared["B2_hat"],
                              shared["params"])
    k = cfg.k
    rbar = predicted_radius(eps, k, min(cfg.m, cfg.n))
    lo, hi = admissible_interval(eps, k, cfg.m, cfg.n, cfg.delta_seps)
    entry = _null_entry(cfg, eps, rbar, (lo, hi))
    L = cfg.grid_L if cfg.grid_L else 8 * eps
    ngrid = cfg.grid_n if cfg.grid_n else 97
    P, Q = _potentials(cfg, L)
    s_k = math.sin(math.pi / (2 * k))

    radii = np.linspace(lo, hi, cfg.landscape_points)
    rows = []
    for r in radii:
        total, _ = multipeak_prediction_seg(eps, r, r, k, P, Q, mom1,
                                            mom2, B1_hat, B2_hat)
        p_r = cfg.a * 0.5 * mom1[0] * r ** cfg.m
        p_rho = cfg.b * 0.5 * mom2[0] * r ** cfg.n
        decay = (eps / (2 * r * s_k)) * math.exp(-2 * r * s_k / eps)
        rows.append((r, total, p_r, B1_hat * decay, p_rho,
                     B2_hat * decay))
    _write_csv(os.path.join(pdir, "landscape.csv"),
               "r,total,power_r,interaction_r,power_rho,interaction_rho",
               rows)

    try:
        modelR = ReducedModel(
            aB=cfg.a * 0.5 * mom1[0], bC0_coeff=0.0,
            C_int=B1_hat * (eps / (2 * rbar * s_k)),
            m=cfg.m, n=cfg.n, k=k, eps=eps, mode=SEGREGATED_R)
        modelRho = ReducedModel(
            aB=cfg.b * 0.5 * mom2[0], bC0_coeff=0.0,
            C_int=B2_hat * (eps / (2 * rbar * s_k)),
            m=cfg.n, n=cfg.m, k=k, eps=eps, mode=SEGREGATED_RHO)
        (r1, rho1), val, interior = minimize_segregated(
            modelR, modelRho, ((lo, hi), (lo, hi)))
        entry["model_minimizer_r"] = float(r1)
        entry["model_minimizer_rho"] = float(rho1)
        entry["model_minimum"] = float(val)
        entry["minimizer_interior"] = bool(interior)
        entry["ratio_to_predicted"] = float(r1 / rbar)
        entry["cross_scale"] = float(
            cross_term_bound(modelR, modelRho, r1, rho1))
    except (InvalidParam, NoInteriorMin) as exc:
        lines.append(f"model minimization failed: {exc}")

    try:
        # beta = 0 synchronized amplitudes are exactly the segregated
        # species normalizations, so the same fit applies
        params_fit = classify(cfg.mu1, cfg.mu2, 0.0)
        entry["fit_slope"] = _fit_slope(eps, P, Q, params_fit,
                                        shared["prof_w"], rbar, lines)
    except NodalPeaksError as exc:
        lines.append(f"fit slope failed: {exc}")

    _run_solve(cfg, eps, pdir, shared, resume, entry, lines,
               L, ngrid, P, Q, rbar)
    return entry


def _run_solve(cfg, eps, pdir, shared, resume, entry, lines,
               L, ngrid, P, Q, rbar):
    params = shared["params"]
    ok, reason = _solve_supported(cfg, params)
    if not ok:
        entry["solve_status"] = f"skipped: {reason}"
        lines.append(f"solve skipped: {reason}")
        return
    try:
        spec = GridSpec(L=L, n=ngrid)
        margin_floor = L / 3
        if cfg.mode == MODE_SYNC:
            pk = PeakConfiguration(k=cfg.k, r=rbar, eps=eps)
            init = build_synchronized(pk, params, shared["prof_w"],
                                      spec, margin_floor=margin_floor)
            opts = SolveOptions(mode=MODE_SYNCHRONIZED, k=cfg.k,
                                newton_tol=cfg.newton_tol,
                                max_iters=cfg.max_iters,
                                linear_maxiter=cfg.linear_maxiter)
        else:
            pk = PeakConfiguration(k=cfg.k, r=rbar, eps=eps, rho=rbar)
            init = build_segregated(pk, shared["U1"], shared["U2"],
                                    spec, margin_floor=margin_floor)
            opts = SolveOptions(mode=MODE_SEGREGATED, k=cfg.k,
                                newton_tol=cfg.newton_tol,
                                max_iters=cfg.max_iters,
                                linear_maxiter=cfg.linear_maxiter)

        start, reused, rep = init, False, None
        if resume and os.path.exists(os.path.join(pdir, "report.json")):
            try:
                fld0, eps0, rep0 = read_checkpoint(pdir)
                if eps0 == eps and fld0.L == spec.L and fld0.n == spec.n:
                    if rep0.converged:
                        fld, rep, reused = fld0, rep0, True
                        lines.append("resume: converged checkpoint reused")
                    else:
                        start = fld0
                        lines.append("resume: continuing from checkpoint")
                else:
                    lines.append("resume: checkpoint grid mismatch, "
                                 "solving fresh")
            except (NodalPeaksError, OSError, ValueError, KeyError) as exc:
                lines.append(f"resume: unreadable checkpoint ({exc}), "
                             "solving fresh")

        if not reused:
            t0 = time.perf_counter()
            fld, rep = newton_solve(start, eps, P, Q, params, opts)
            lines.append(f"newton {rep.iterations} iterations in "
                         f"{time.perf_counter() - t0:.1f} s")
            write_checkpoint(pdir, fld, eps, rep)
            field_slice_csv(fld, os.path.join(pdir, "slice.csv"))

        entry["solve_status"] = ("converged" if rep.converged
                                 else "not_converged")
        entry["newton_iterations"] = int(rep.iterations)
        entry["final_residual"] = float(rep.residual_history[-1])
        entry["peak_census_u"] = list(rep.peak_census_u)
        entry["peak_census_v"] = list(rep.peak_census_v)
        entry["correction_norm"] = float(rep.correction_norm_eps)
        entry["symmetry_defect"] = float(rep.symmetry_defect_final)
        if rep.converged:
            if cfg.mode == MODE_SYNC:
                h1, sup = profile_gap_sync(fld, params)
            else:
                h1, sup = profile_gap_seg(fld, cfg.mu1, cfg.mu2, cfg.k)
            entry["profile_gap_h1"] = float(h1)
            entry["profile_gap_sup"] = float(sup)
    except NodalPeaksError as exc:
        entry["solve_status"] = f"failed: {type(exc).__name__}: {exc}"
        lines.append(entry["solve_status"])


def run_experiment(cfg: ExperimentConfig, workers: int = 1,
                   resume: bool = False) -> dict:
    """Run every (eps, mode) point and write the artifact tree.

    Raises ConfigInvalid when validation reports errors. Solver
    failures at individual points are recorded in their entries and do
    not abort the sweep. Returns the summary dict (also written to
    summary.json by the coordinator, once).
    """
    diags = validate_config(cfg)
    errors = [d for d in diags if d.startswith("error")]
    if errors:
        raise ConfigInvalid("; ".join(errors))
    if workers < 1:
        raise InvalidParam(f"workers must be >= 1, got {workers}")

    t_start = time.perf_counter()
    os.makedirs(cfg.out_dir, exist_ok=True)
    log = [f"mode={cfg.mode} k={cfg.k} eps_list={list(cfg.eps_list)}"]
    log.extend(diags)

    shared = {"params": classify(cfg.mu1, cfg.mu2, cfg.beta)}
    if cfg.mode == MODE_SYNC:
        prof_w = _ground(1.0)
        shared["prof_w"] = prof_w
        shared["mom_w"] = moments(prof_w)
        shared["chat"] = pair_interaction(prof_w, _CHAT_SEPARATION, 1.0)[1]
        with open(os.path.join(cfg.out_dir, "profile_w.txt"), "w") as fh:
            fh.write(profile_to_text(prof_w))
    else:
        U1, U2 = _ground(cfg.mu1), _ground(cfg.mu2)
        shared.update(U1=U1, U2=U2, mom1=moments(U1), mom2=moments(U2))
        shared["prof_w"] = _ground(1.0)
        nu_k = 0.5 if cfg.k == 1 else 1.0
        # fitting the pair constant from U_i = w/sqrt(mu_i) directly
        # absorbs one 1/mu_i; the species weight restores the other
        shared["B1_hat"] = nu_k * cfg.mu1 * pair_interaction(
            U1, _CHAT_SEPARATION, 1.0)[1]
        shared["B2_hat"] = nu_k * cfg.mu2 * pair_interaction(
            U2, _CHAT_SEPARATION, 1.0)[1]
        for name, prof in (("profile_u1.txt", U1), ("profile_u2.txt", U2)):
            with open(os.path.join(cfg.out_dir, name), "w") as fh:
                fh.write(profile_to_text(prof))

    def point(eps):
        lines = [f"[{cfg.mode} eps={eps:g}] start"]
        tag = f"{cfg.mode}_eps{eps:g}"
        pdir = os.path.join(cfg.out_dir, tag)
        os.makedirs(pdir, exist_ok=True)
        t0 = time.perf_counter()
        if cfg.mode == MODE_SYNC:
            entry = _point_sync(cfg, eps, pdir, shared, resume, lines)
        else:
            entry = _point_seg(cfg, eps, pdir, shared, resume, lines)
        lines.append(f"[{cfg.mode} eps={eps:g}] done in "
                     f"{time.perf_counter() - t0:.1f} s")
        return entry, lines

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(point, cfg.eps_list))
    else:
        results = [point(eps) for eps in cfg.eps_list]

    entries = []
    for entry, lines in results:
        entries.append(entry)
        log.extend(lines)

    summary = {"config": asdict(cfg) | {"eps_list": list(cfg.eps_list)},
               "points": entries}
    with open(os.path.join(cfg.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    log.append(f"total {time.perf_counter() - t_start:.1f} s")
    with open(os.path.join(cfg.out_dir, "run.log"), "w") as fh:
        fh.write("\n".join(log) + "\n")
    return summary
