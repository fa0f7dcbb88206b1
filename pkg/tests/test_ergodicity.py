import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xyergodic.ergodicity import (
    CurveRefinementRequired,
    EquilibriumCurve,
    Verdict,
    classify,
    find_crossings,
    log_grid,
    low_temperature_plateau,
    stationary_points,
)

GRID = log_grid()


def tanh_curve(with_evaluator=True):
    f = lambda b: -math.tanh(b / 4)  # noqa: E731
    return EquilibriumCurve.from_function("toy", lambda b: (f(b), 0.0), GRID) if with_evaluator else EquilibriumCurve(
        "toy", GRID, [f(b) for b in GRID]
    )


def test_grid_shape():
    assert len(GRID) == 121
    assert GRID[0] == pytest.approx(1e-3) and GRID[-1] == pytest.approx(1e3)
    np.testing.assert_allclose(np.diff(np.log10(GRID)), 0.05)


def test_crossing_bisected_to_exact_root():
    target = -math.tanh(2.5)  # attained at beta = 10
    v = classify(target, tanh_curve(), beta_init=20)
    assert v.verdict is Verdict.ERGODIC
    assert v.crossing_beta_tilde == pytest.approx(10.0, rel=1e-5)


def test_crossing_outside_band_is_nonergodic():
    v = classify(-math.tanh(0.1), tanh_curve(), beta_init=20)
    assert v.verdict is Verdict.NONERGODIC
    assert v.crossing_beta_tilde == pytest.approx(0.4, rel=1e-5)
    assert v.band == (2.0, 200.0)


def test_value_never_attained_is_strongly_nonergodic():
    v = classify(0.3, tanh_curve(), beta_init=20)
    assert v.verdict is Verdict.STRONGLY_NONERGODIC and v.crossing_beta_tilde is None


def test_zero_curve_shortcut():
    zero = EquilibriumCurve("zero", GRID, np.zeros_like(GRID))
    assert classify(1e-6, zero, 20).verdict is Verdict.STRONGLY_NONERGODIC
    assert classify(0.0, zero, 20).verdict is Verdict.ERGODIC


def test_touching_crossing_within_match_tolerance():
    # parabola in log(beta) that touches 0.5 from below at beta = 1
    vals = 0.5 - 0.01 * np.log(GRID) ** 2
    curve = EquilibriumCurve("touch", GRID, vals)
    assert find_crossings(0.5, curve) == pytest.approx([1.0])
    assert classify(0.5, curve, beta_init=2).verdict is Verdict.ERGODIC
    assert classify(0.5 + 1e-3, curve, beta_init=2).verdict is Verdict.STRONGLY_NONERGODIC


def test_linear_interpolation_without_evaluator():
    v = classify(-math.tanh(2.5), tanh_curve(with_evaluator=False), beta_init=20)
    assert v.verdict is Verdict.ERGODIC
    assert v.crossing_beta_tilde == pytest.approx(10.0, rel=2e-2)


def test_refinement_required_at_band_edge():
    b = np.geomspace(1e-3, 1e3, 16)
    curve = EquilibriumCurve("coarse", b, np.log(b))
    edge_crossing = math.log(2.0)  # curve meets the value at the lower band edge
    k = np.searchsorted(b, 2.0)
    assert b[k - 1] < 2.0 < b[k]
    with pytest.raises(CurveRefinementRequired):
        classify(edge_crossing, curve, beta_init=20)


def test_span_check():
    curve = EquilibriumCurve("short", np.geomspace(1, 100, 30), np.zeros(30))
    with pytest.raises(ValueError):
        classify(1.0, curve, beta_init=20)


def test_curve_validation():
    with pytest.raises(ValueError):
        EquilibriumCurve("bad", [1.0, 1.0, 2.0], [0, 0, 0])
    with pytest.raises(ValueError):
        EquilibriumCurve("bad", [1.0, 2.0], [0.0])


def test_nearest_crossing_in_log_distance_wins():
    # -cos(log b) vanishes at log b = pi/2 + k pi; log 20 ~ 3.0 sits nearer pi/2 than 3 pi/2
    curve = EquilibriumCurve.from_function("osc", lambda b: (-math.cos(math.log(b)), 0.0), GRID)
    v = classify(0.0, curve, beta_init=20)
    assert v.verdict is Verdict.ERGODIC
    assert v.crossing_beta_tilde == pytest.approx(math.exp(math.pi / 2), rel=1e-5)
    assert len(v.crossings) == len([k for k in range(-5, 5) if 1e-3 < math.exp(math.pi / 2 + k * math.pi) < 1e3])


@settings(max_examples=40, deadline=None)
@given(q=st.floats(-1.2, 0.2), small=st.floats(1.5, 10), extra=st.floats(1.0, 10))
def test_widening_the_band_never_downgrades(q, small, extra):
    rank = {Verdict.STRONGLY_NONERGODIC: 0, Verdict.NONERGODIC: 1, Verdict.ERGODIC: 2}
    curve = tanh_curve()
    narrow = classify(q, curve, 20, band_factor=small)
    wide = classify(q, curve, 20, band_factor=min(small * extra, 50))
    assert rank[wide.verdict] >= rank[narrow.verdict]


@settings(max_examples=40, deadline=None)
@given(q=st.floats(-1.0, 0.0), shift=st.floats(-5, 5))
def test_shift_invariance(q, shift):
    base = tanh_curve(with_evaluator=False)
    moved = EquilibriumCurve("moved", base.beta_tilde, base.values + shift)
    try:
        a = classify(q, base, 20)
    except CurveRefinementRequired:
        # a sign change straddling a band edge must be refused for the shifted curve too
        with pytest.raises(CurveRefinementRequired):
            classify(q + shift, moved, 20)
        return
    b = classify(q + shift, moved, 20)
    assert a.verdict is b.verdict
    if a.crossing_beta_tilde is not None:
        assert b.crossing_beta_tilde == pytest.approx(a.crossing_beta_tilde, rel=1e-6)


def test_deterministic():
    a = classify(-0.7, tanh_curve(), 20).to_dict()
    b = classify(-0.7, tanh_curve(), 20).to_dict()
    assert a == b


def test_stationary_points_and_plateau():
    f = lambda b: -0.1 * math.exp(-math.log(b / 1.5) ** 2) + 0.02 * math.exp(-math.log(b / 8) ** 2)  # noqa: E731
    curve = EquilibriumCurve.from_function("dip", lambda b: (f(b), 0.0), GRID)
    ext = stationary_points(curve)
    assert len(ext) == 2
    assert ext[0][1] < ext[1][1]
    beta, value = low_temperature_plateau(curve)
    dense = max(f(b) for b in np.geomspace(3, 100, 200_000))
    assert beta == ext[1][0]
    assert dense - 1e-12 <= value <= dense + 1e-9


def test_plateau_of_monotone_curve_is_last_value():
    curve = tanh_curve()
    assert stationary_points(curve) == []
    assert low_temperature_plateau(curve) == (pytest.approx(1e3), pytest.approx(-1.0))
