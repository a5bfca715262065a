import math

import numpy as np
import pytest

from nodalpeaks.ansatz import admissible_interval
from nodalpeaks.errors import InvalidParam, NoInteriorMin
from nodalpeaks.reduction import (
    SEGREGATED_R,
    SEGREGATED_RHO,
    ReducedModel,
    cross_term_bound,
    measured_landscape,
    minimize_model,
    minimize_segregated,
    predicted_radius,
)


def test_predicted_radius_at_inv_e():
    assert predicted_radius(math.exp(-1), 1, 2.0) == pytest.approx(
        math.exp(-1), rel=1e-14)


def test_predicted_radius_linear_in_m():
    full = predicted_radius(0.1, 2, 4.0)
    half = predicted_radius(0.1, 2, 2.0)
    assert half == pytest.approx(full / 2, rel=1e-14)


def test_predicted_radius_k2_value():
    val = predicted_radius(1e-3, 2, 2.0)
    assert val == pytest.approx(9.769e-3, rel=1e-3)


@pytest.mark.parametrize("eps", [1.0, 1.2, 0.0, -0.1])
def test_predicted_radius_bad_eps(eps):
    with pytest.raises(InvalidParam):
        predicted_radius(eps, 1, 2.0)


def test_model_validation():
    ok = dict(aB=1.0, bC0_coeff=0.0, C_int=1.0, m=2.0, n=2.0, k=1,
              eps=0.1)
    ReducedModel(**ok)
    with pytest.raises(InvalidParam):
        ReducedModel(**{**ok, "C_int": 0.0})
    with pytest.raises(InvalidParam):
        ReducedModel(**{**ok, "m": 1.0})
    with pytest.raises(InvalidParam):
        ReducedModel(**{**ok, "eps": 1.0})
    with pytest.raises(InvalidParam):
        ReducedModel(**{**ok, "mode": "Diagonal"})


def unit_model(eps, C=1.0, m=2.0, k=1):
    return ReducedModel(aB=1.0, bC0_coeff=0.0, C_int=C, m=m, n=m, k=k,
                        eps=eps)


def test_minimize_model_against_dense_scan():
    eps = 1e-3
    model = unit_model(eps)
    window = admissible_interval(eps, 1, 2.0, 2.0, 0.4)
    r_star, f_star, interior = minimize_model(model, window)
    assert interior
    grid = np.linspace(window[0], window[1], 100001)
    scan = grid[np.argmin(model.value(grid))]
    assert abs(r_star - scan) <= grid[1] - grid[0]
    # leading-order location is eps ln(1/eps); the log-correction pulls
    # the true minimizer about 13% below it at this eps
    scaled = r_star / (eps * math.log(1 / eps))
    assert abs(scaled - 1.0) < 0.15


def test_minimize_model_first_order_condition():
    model = unit_model(1e-2, C=10.0)
    window = admissible_interval(1e-2, 1, 2.0, 2.0, 0.8)
    r_star, _, _ = minimize_model(model, window)
    assert abs(model.deriv(r_star)) < 1e-10 * model.second(r_star) * r_star


def test_minimize_model_boundary_values_larger():
    model = unit_model(1e-2, C=10.0)
    window = admissible_interval(1e-2, 1, 2.0, 2.0, 0.8)
    r_star, f_star, interior = minimize_model(model, window)
    assert interior
    assert model.value(window[0]) > f_star
    assert model.value(window[1]) > f_star


def test_minimize_model_negative_leading_coefficient():
    model = ReducedModel(aB=-1.0, bC0_coeff=0.0, C_int=1.0, m=2.0,
                         n=2.0, k=1, eps=0.1)
    with pytest.raises(NoInteriorMin):
        minimize_model(model, (0.1, 0.5))


def test_minimize_model_window_past_minimum():
    eps = 1e-2
    model = unit_model(eps, C=10.0)
    rbar = eps * math.log(1 / eps)
    with pytest.raises(NoInteriorMin):
        minimize_model(model, (5 * rbar, 8 * rbar))


def test_scaled_minimizer_converges():
    # the scaled minimizer approaches m from above, tightening as eps
    # drops; C sized so the log correction stays inside 10% throughout
    m = 2.0
    errs = []
    for eps in (1e-2, 1e-3, 1e-4):
        model = unit_model(eps, C=10.0, m=m)
        window = admissible_interval(eps, 1, m, m, 0.4 * m * 0.95)
        r_star, _, interior = minimize_model(model, window)
        assert interior
        scaled = r_star * 2 * math.sin(math.pi / 2) / (
            eps * math.log(1 / eps))
        assert abs(scaled - m) < 0.1 * m
        errs.append(abs(scaled - m))
    assert errs[0] > errs[1] > errs[2]


def seg_models(eps, C1=5.0, C2=5.0, a=1.0, b=1.0):
    mr = ReducedModel(aB=a, bC0_coeff=0.0, C_int=C1, m=2.0, n=2.0, k=1,
                      eps=eps, mode=SEGREGATED_R)
    mrho = ReducedModel(aB=0.0, bC0_coeff=b, C_int=C2, m=2.0, n=2.0,
                        k=1, eps=eps, mode=SEGREGATED_RHO)
    return mr, mrho


def test_minimize_segregated_symmetric():
    eps = 1e-2
    mr, mrho = seg_models(eps)
    window = admissible_interval(eps, 1, 2.0, 2.0, 0.76)
    (r1, rho1), val, interior = minimize_segregated(mr, mrho,
                                                    (window, window))
    assert interior
    assert r1 == pytest.approx(rho1, rel=1e-12)
    rr, fr, _ = minimize_model(mr, window)
    rhr, fh, _ = minimize_model(mrho, window)
    assert r1 == rr and rho1 == rhr
    assert val == pytest.approx(fr + fh, rel=1e-14)


def test_minimize_segregated_bad_factor():
    eps = 1e-2
    mr, _ = seg_models(eps)
    bad = ReducedModel(aB=0.0, bC0_coeff=-1.0, C_int=5.0, m=2.0, n=2.0,
                       k=1, eps=eps, mode=SEGREGATED_RHO)
    window = admissible_interval(eps, 1, 2.0, 2.0, 0.76)
    with pytest.raises(NoInteriorMin):
        minimize_segregated(mr, bad, (window, window))


def test_cross_term_fades():
    ratios = []
    for eps in (0.05, 0.02, 0.01):
        mr, mrho = seg_models(eps, C1=10.0, C2=10.0)
        window = admissible_interval(eps, 1, 2.0, 2.0, 0.76)
        (r1, rho1), _, _ = minimize_segregated(mr, mrho,
                                               (window, window))
        bound = cross_term_bound(mr, mrho, r1, rho1)
        c = 2 * mr.s_k / eps
        retained = (mr.C_int * math.exp(-c * r1)
                    + mrho.C_int * math.exp(-c * rho1))
        ratios.append(bound / retained)
    assert ratios[0] > ratios[1] > ratios[2]
    assert ratios[2] < 0.5 * ratios[0]


def test_cross_term_bound_mismatch():
    mr, _ = seg_models(0.05)
    _, mrho = seg_models(0.02)
    with pytest.raises(InvalidParam):
        cross_term_bound(mr, mrho, 0.1, 0.1)


def test_measured_landscape_basic():
    table = measured_landscape(0.1, 1, np.linspace(0.1, 0.5, 21),
                               lambda r: (r - 0.3) ** 2, m=2.0)
    assert table.r_star == pytest.approx(0.3)
    assert table.f_star == pytest.approx(0.0, abs=1e-12)
    assert table.predicted == pytest.approx(predicted_radius(0.1, 1, 2.0))
    assert table.ratio_to_predicted == pytest.approx(
        0.3 / table.predicted)


def test_measured_landscape_tie_break():
    table = measured_landscape(0.1, 1, [0.5, 0.2, 0.4, 0.1],
                               lambda r: abs(r - 0.3), m=2.0)
    # 0.2 and 0.4 tie; the smaller radius wins
    assert table.r_star == 0.2


def test_measured_landscape_parallel_deterministic():
    rs = np.linspace(0.05, 0.6, 34)
    f = lambda r: math.cos(9 * r) + r
    t1 = measured_landscape(0.1, 1, rs, f, m=2.0, workers=1)
    t2 = measured_landscape(0.1, 1, rs, f, m=2.0, workers=4)
    np.testing.assert_array_equal(t1.values, t2.values)
    assert t1.r_star == t2.r_star


def test_measured_landscape_tracks_model_minimizer():
    eps = 1e-2
    model = unit_model(eps, C=10.0)
    window = admissible_interval(eps, 1, 2.0, 2.0, 0.8)
    r_star, _, _ = minimize_model(model, window)
    rs = np.linspace(window[0], window[1], 41)
    table = measured_landscape(eps, 1, rs, lambda r: float(model.value(r)),
                               m=2.0)
    assert abs(table.r_star - r_star) <= rs[1] - rs[0]
