import math

import numpy as np
import pytest

from nodalpeaks.ansatz import (
    GridField,
    GridSpec,
    PeakConfiguration,
    admissible_interval,
    boundary_level,
    build_segregated,
    build_synchronized,
    field_from_text,
    field_slice_csv,
    field_to_text,
    offset_positions,
    peak_positions,
    peak_signs,
    symmetry_defect,
)
from nodalpeaks.coupled import classify
from nodalpeaks.errors import (
    BoxTooSmall,
    GridMismatch,
    InvalidParam,
    RegimeMismatch,
)
from nodalpeaks.ground_state import evaluate


# --- ring geometry ---

def test_peak_positions_k1():
    pts = peak_positions(1, 0.3)
    assert pts.shape == (2, 3)
    np.testing.assert_allclose(pts[0], [0.3, 0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(pts[1], [-0.3, 0.0, 0.0], atol=1e-15)


def test_peak_positions_k2():
    pts = peak_positions(2, 1.0)
    expect = np.array([[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]],
                      dtype=float)
    np.testing.assert_allclose(pts, expect, atol=1e-15)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_ring_radii_exact(k):
    pts = peak_positions(k, 0.7)
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 0.7,
                               rtol=1e-14)
    assert np.all(pts[:, 2] == 0.0)


@pytest.mark.parametrize("k", [1, 2, 4])
def test_adjacent_chord(k):
    # nearest-neighbour separation on the ring is 2 r sin(pi/2k)
    r = 0.5
    pts = peak_positions(k, r)
    d01 = np.linalg.norm(pts[0] - pts[1])
    assert d01 == pytest.approx(2 * r * math.sin(math.pi / (2 * k)),
                                rel=1e-14)
    gaps = [np.linalg.norm(p - q) for i, p in enumerate(pts)
            for q in pts[i + 1:]]
    assert min(gaps) == pytest.approx(d01, rel=1e-12)


def test_offset_ring_interleaves():
    k = 3
    xa = np.arctan2(*peak_positions(k, 1.0)[:, [1, 0]].T)
    ya = np.arctan2(*offset_positions(k, 1.0)[:, [1, 0]].T)
    # offset angles sit exactly half a step past the primary ones
    np.testing.assert_allclose(np.sort(ya % (2 * np.pi)),
                               np.sort((xa + np.pi / (2 * k)) % (2 * np.pi)),
                               atol=1e-12)


def test_offset_positions_k1():
    pts = offset_positions(1, 0.4)
    np.testing.assert_allclose(pts[0], [0.0, 0.4, 0.0], atol=1e-15)
    np.testing.assert_allclose(pts[1], [0.0, -0.4, 0.0], atol=1e-15)


def test_signs_alternate():
    s = peak_signs(3)
    assert s[0] == 1.0
    assert np.all(s[::2] == 1.0) and np.all(s[1::2] == -1.0)
    assert s.sum() == 0.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_rotation_advances_ring(k):
    # R_{pi/k} maps each center to its neighbour, where the sign flips
    pts = peak_positions(k, 0.9)
    th = np.pi / k
    R = np.array([[np.cos(th), -np.sin(th), 0],
                  [np.sin(th), np.cos(th), 0], [0, 0, 1]])
    rotated = pts @ R.T
    np.testing.assert_allclose(rotated, np.roll(pts, -1, axis=0),
                               atol=1e-12)
    s = peak_signs(k)
    np.testing.assert_allclose(np.roll(s, -1), -s)


@pytest.mark.parametrize("bad", [0, -1, 2.5])
def test_bad_k_rejected(bad):
    with pytest.raises(InvalidParam):
        peak_positions(bad, 1.0)
    with pytest.raises(InvalidParam):
        offset_positions(bad, 1.0)


def test_nonpositive_radius_rejected():
    with pytest.raises(InvalidParam):
        peak_positions(1, 0.0)
    with pytest.raises(InvalidParam):
        offset_positions(2, -0.1)


# --- admissible radius window ---

def test_admissible_interval_at_inv_e():
    # eps = 1/e makes eps*ln(1/eps) = 1/e; k = 1 divides by 2
    lo, hi = admissible_interval(math.exp(-1), 1, 2.0, 3.0, 1.0)
    assert lo == pytest.approx(math.exp(-1) / 2, rel=1e-14)
    assert hi == pytest.approx(3 * math.exp(-1) / 2, rel=1e-14)


def test_admissible_interval_ratio():
    lo, hi = admissible_interval(0.1, 2, 4.0, 2.0, 0.5)
    assert hi / lo == pytest.approx(2.5 / 1.5, rel=1e-13)


def test_admissible_interval_scaling():
    vals = []
    for eps in (0.2, 0.1, 0.05):
        lo, hi = admissible_interval(eps, 1, 2.0, 2.0, 0.8)
        vals.append((lo / (eps * math.log(1 / eps)),
                     hi / (eps * math.log(1 / eps))))
    for a, b in vals[1:]:
        assert a == pytest.approx(vals[0][0], rel=1e-13)
        assert b == pytest.approx(vals[0][1], rel=1e-13)


def test_admissible_interval_k_dependence():
    lo1, _ = admissible_interval(0.1, 1, 2.0, 2.0, 0.5)
    lo2, _ = admissible_interval(0.1, 2, 2.0, 2.0, 0.5)
    assert lo2 / lo1 == pytest.approx(1 / math.sin(math.pi / 4), rel=1e-13)


@pytest.mark.parametrize("eps", [0.0, 1.0, 1.3, -0.2])
def test_admissible_interval_bad_eps(eps):
    with pytest.raises(InvalidParam):
        admissible_interval(eps, 1, 2.0, 2.0, 0.5)


@pytest.mark.parametrize("delta", [0.0, 2.0, 2.5, -1.0])
def test_admissible_interval_bad_delta(delta):
    with pytest.raises(InvalidParam):
        admissible_interval(0.1, 1, 2.0, 3.0, delta)


# --- configuration and grids ---

def test_configuration_fields():
    cfg = PeakConfiguration(k=2, r=0.4, eps=0.1, rho=0.5)
    assert cfg.x_points.shape == (4, 3)
    assert cfg.y_points.shape == (4, 3)
    np.testing.assert_allclose(np.linalg.norm(cfg.y_points, axis=1), 0.5)
    assert cfg.signs[0] == 1.0
    with pytest.raises(ValueError):
        cfg.x_points[0, 0] = 9.0
    with pytest.raises(AttributeError):
        cfg.r = 0.2


def test_configuration_without_offset_ring():
    cfg = PeakConfiguration(k=1, r=0.4, eps=0.1)
    assert cfg.y_points is None


def test_configuration_bad_eps():
    with pytest.raises(InvalidParam):
        PeakConfiguration(k=1, r=0.4, eps=0.0)


def test_grid_spec_spacing():
    spec = GridSpec(L=0.8, n=81)
    assert spec.h == pytest.approx(0.02, rel=1e-15)


@pytest.mark.parametrize("n", [2, 80, 1])
def test_grid_spec_bad_n(n):
    with pytest.raises(InvalidParam):
        GridSpec(L=1.0, n=n)


def test_grid_spec_cover_defaults():
    eps = 0.1
    spec = GridSpec.cover(0.3, eps)
    assert spec.L == pytest.approx(0.3 + 8 * eps * math.log(1 / eps))
    assert spec.n % 2 == 1
    assert spec.h <= eps / 8 * 1.01


def test_grid_spec_cover_cap():
    spec = GridSpec.cover(0.3, 0.05, n_cap=97)
    assert spec.n == 97


def test_grid_field_validation():
    n = 5
    good = np.zeros((n, n, n))
    with pytest.raises(GridMismatch):
        GridField(L=1.0, n=n, u_values=np.zeros((n, n, n + 1)),
                  v_values=good)
    bad = good.copy()
    bad[2, 2, 2] = np.nan
    with pytest.raises(InvalidParam):
        GridField(L=1.0, n=n, u_values=bad, v_values=good.copy())


def test_grid_field_axis():
    fld = GridField(L=1.5, n=7, u_values=np.zeros((7, 7, 7)),
                    v_values=np.zeros((7, 7, 7)))
    x = fld.axis()
    assert x[0] == -1.5 and x[-1] == 1.5 and x[3] == 0.0
    assert fld.h == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fld.u_values[0, 0, 0] = 1.0


# --- assembled fields ---

EPS = 0.1
R = 0.3
SPEC = GridSpec(L=0.8, n=81)
FLOOR = 0.45


def test_build_synchronized_values(profile1):
    params = classify(1.0, 1.0, 0.5)
    cfg = PeakConfiguration(k=1, r=R, eps=EPS)
    fld = build_synchronized(cfg, params, profile1, SPEC,
                             margin_floor=FLOOR)
    x = fld.axis()
    i = int(np.argmin(np.abs(x - R)))
    mid = (fld.n - 1) // 2
    # the opposite peak sits at distance 2r, so it bleeds in at w(2r/eps)
    expect = params.alpha * (evaluate(profile1, 0.0)
                             - evaluate(profile1, 2 * R / EPS))
    assert fld.u_values[i, mid, mid] == pytest.approx(expect, abs=1e-9)
    # components are proportional: (alpha, gamma) * same scalar field
    diff = params.gamma * fld.u_values - params.alpha * fld.v_values
    assert np.abs(diff).max() < 1e-14
    # odd symmetry kills the field at the origin
    assert fld.u_values[mid, mid, mid] == 0.0


def test_build_synchronized_defect(profile1):
    params = classify(1.0, 1.0, 0.5)
    for k in (1, 2):
        cfg = PeakConfiguration(k=k, r=R, eps=EPS)
        fld = build_synchronized(cfg, params, profile1, SPEC,
                                 margin_floor=FLOOR)
        assert symmetry_defect(fld, k) < 1e-12


def test_build_synchronized_margin_guard(profile1):
    params = classify(1.0, 1.0, 0.5)
    cfg = PeakConfiguration(k=1, r=R, eps=EPS)
    # default decay margin 6 eps ln(1/eps) = 1.38 does not fit in L = 0.8
    with pytest.raises(BoxTooSmall):
        build_synchronized(cfg, params, profile1, SPEC)


def test_build_synchronized_wrong_regime(profile1):
    params = classify(1.0, 1.0, -1.5)
    cfg = PeakConfiguration(k=1, r=R, eps=EPS)
    with pytest.raises(RegimeMismatch):
        build_synchronized(cfg, params, profile1, SPEC,
                           margin_floor=FLOOR)


def test_build_segregated_values(profile1, profile2):
    cfg = PeakConfiguration(k=1, r=R, eps=EPS, rho=R)
    fld = build_segregated(cfg, profile1, profile2, SPEC,
                           margin_floor=FLOOR)
    x = fld.axis()
    i = int(np.argmin(np.abs(x - R)))
    mid = (fld.n - 1) // 2
    eu = evaluate(profile1, 0.0) - evaluate(profile1, 2 * R / EPS)
    ev = evaluate(profile2, 0.0) - evaluate(profile2, 2 * R / EPS)
    assert fld.u_values[i, mid, mid] == pytest.approx(eu, abs=1e-9)
    assert fld.v_values[mid, i, mid] == pytest.approx(ev, abs=1e-9)
    # v's ring is u's rotated a quarter turn when profiles and radii match
    same = build_segregated(cfg, profile1, profile1, SPEC,
                            margin_floor=FLOOR)
    vrot = np.transpose(same.v_values, (1, 0, 2))[:, ::-1, :]
    assert np.abs(vrot - same.u_values).max() < 1e-12


def test_build_segregated_needs_rho(profile1, profile2):
    cfg = PeakConfiguration(k=1, r=R, eps=EPS)
    with pytest.raises(InvalidParam):
        build_segregated(cfg, profile1, profile2, SPEC,
                         margin_floor=FLOOR)


# --- symmetry defect on analytic fields ---

def _linear_field(coord):
    x = np.linspace(-1.0, 1.0, 41)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    arr = (X, Y, Z)[coord].copy()
    return GridField(L=1.0, n=41, u_values=arr, v_values=arr.copy())


def test_symmetry_defect_x1_clean():
    # x1 is odd under the half-turn and even in x2, x3
    assert symmetry_defect(_linear_field(0), 1) < 1e-14


def test_symmetry_defect_x2_evenness():
    # evenness in x2 fails maximally: |(-x2) - x2| peaks at 2L
    assert symmetry_defect(_linear_field(1), 1) == pytest.approx(2.0)


def test_symmetry_defect_quarter_turn():
    # x1 -> -x2 under the quarter turn, so |f(Rx) + f(x)| peaks at 2L
    assert symmetry_defect(_linear_field(0), 2) == pytest.approx(2.0)


def test_symmetry_defect_k2_invariant():
    x = np.linspace(-1.0, 1.0, 41)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    arr = (X**2 - Y**2) * np.exp(-(X**2 + Y**2 + Z**2))
    fld = GridField(L=1.0, n=41, u_values=arr, v_values=arr.copy())
    assert symmetry_defect(fld, 2) < 1e-13


def test_symmetry_defect_generic_angle():
    # k = 3 exercises the interpolated rotation path
    x = np.linspace(-1.0, 1.0, 41)
    X, Y, Z = np.meshgrid(x, x, x, indexing="ij")
    r2 = X**2 + Y**2
    th = np.arctan2(Y, X)
    arr = r2 * np.cos(3 * th) * np.exp(-3 * r2 - Z**2)
    fld = GridField(L=1.0, n=41, u_values=arr, v_values=arr.copy())
    # cos(3 theta) flips sign under rotation by pi/3; tolerance is set
    # by linear interpolation error on h = 0.05
    assert symmetry_defect(fld, 3) < 5e-3


def test_boundary_level():
    n = 9
    u = np.zeros((n, n, n))
    u[4, 4, 4] = 2.0
    u[0, 4, 4] = 0.5
    fld = GridField(L=1.0, n=n, u_values=u, v_values=np.zeros((n, n, n)))
    assert boundary_level(fld) == pytest.approx(0.25)


# --- serialization ---

def test_field_text_roundtrip(tmp_path, rng):
    n = 5
    fld = GridField(L=0.7, n=n, u_values=rng.standard_normal((n, n, n)),
                    v_values=rng.standard_normal((n, n, n)))
    p = tmp_path / "fld.txt"
    field_to_text(fld, 0.125, str(p))
    back, eps = field_from_text(str(p))
    assert eps == 0.125
    assert back.L == fld.L and back.n == fld.n
    np.testing.assert_array_equal(back.u_values, fld.u_values)
    np.testing.assert_array_equal(back.v_values, fld.v_values)


def test_field_text_bad_header(tmp_path):
    p = tmp_path / "junk.txt"
    p.write_text("something else\n1.0\n")
    with pytest.raises(InvalidParam):
        field_from_text(str(p))


def test_field_text_truncated(tmp_path):
    n = 5
    fld = GridField(L=0.7, n=n, u_values=np.ones((n, n, n)),
                    v_values=np.ones((n, n, n)))
    p = tmp_path / "fld.txt"
    field_to_text(fld, 0.1, str(p))
    lines = p.read_text().splitlines()
    p.write_text("\n".join(lines[:-10]) + "\n")
    with pytest.raises(InvalidParam):
        field_from_text(str(p))


def test_field_slice_csv(tmp_path):
    n = 5
    u = np.arange(n**3, dtype=float).reshape(n, n, n)
    fld = GridField(L=1.0, n=n, u_values=u, v_values=2 * u)
    p = tmp_path / "slice.csv"
    field_slice_csv(fld, str(p))
    lines = p.read_text().splitlines()
    assert lines[0] == "x1,x2,u,v"
    assert len(lines) == 1 + n * n
    first = lines[1].split(",")
    assert float(first[0]) == -1.0 and float(first[1]) == -1.0
    assert float(first[2]) == u[0, 0, 2]
    assert float(first[3]) == 2 * u[0, 0, 2]
