import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from surfqre.errors import InfeasibleError, ValidationError
from surfqre.fitting import (MonotoneErrorModel, SuppressionModel, SurgeryModel,
                             cut_threshold_scan, fit_memory, fit_suppression, fit_surgery,
                             improve_params, min_distance, parse_calibration, predict_infidelity,
                             predict_surgery_error, rescale_t1_sample, run_memory,
                             sensitivity_sweep, synthetic_calibration, synthetic_points,
                             synthetic_surgery_data, tailedness_study)
from surfqre.fitting.tailedness import qpu_overrides, patch_qubits, ErrorModels
from surfqre.hwmodel import preset

# (mu, lambda, variant) for baseline, target and desired hardware, both model forms
TABLE_ROWS = [
    (0.0038, 2.34, "d_squared"), (0.019, 9.3, "d_squared"), (0.04, 18.0, "d_squared"),
    (0.0259, 2.119, "per_cycle"), (0.055, 7.5, "per_cycle"), (0.082, 13.5, "per_cycle"),
]


@pytest.mark.parametrize("mu,lam,variant", TABLE_ROWS)
def test_suppression_round_trip(mu, lam, variant):
    pts = synthetic_points(SuppressionModel(mu, lam, variant), range(3, 13, 2))
    m = fit_suppression(pts, variant, cut=None)
    assert m.mu == pytest.approx(mu, rel=1e-6)
    assert m.lam == pytest.approx(lam, rel=1e-6)


def test_two_points_interpolate_exactly():
    m = fit_suppression([(3, 1e-3), (5, 2e-4)], cut=None)
    assert m.residual == pytest.approx(0.0, abs=1e-12)
    assert predict_infidelity(m, 3) == pytest.approx(1e-3)
    assert predict_infidelity(m, 5) == pytest.approx(2e-4)


def test_weighted_round_trip_with_errors():
    model = SuppressionModel(0.0038, 2.34)
    pts = [(d, p, 0.1 * p) for d, p in synthetic_points(model, [3, 5, 7, 9])]
    m = fit_suppression(pts, cut=None)
    assert m.lam == pytest.approx(2.34, rel=1e-9)
    assert m.lam_err > 0


def test_cut_direction():
    pts = synthetic_points(SuppressionModel(0.0038, 2.34), range(3, 21, 2))
    above = sum(p > 10 ** -2.5 for _, p in pts)
    assert 0 < above < len(pts) - 1
    assert fit_suppression(pts).n_points == len(pts) - above
    assert fit_suppression(pts, cut_direction="below").n_points == above
    with pytest.raises(ValidationError):
        fit_suppression(pts, cut=1.0, cut_direction="below")
    with pytest.raises(ValidationError):
        fit_suppression(pts, cut_direction="sideways")


def test_zero_points_dropped():
    m = fit_suppression([(3, 1e-3), (5, 2e-4), (7, 0.0)], cut=None)
    assert m.n_points == 2


@pytest.mark.parametrize("pts", [[(3, 1e-3)], [(3, 1e-3), (3, 2e-3)], [(3, -1e-3), (5, 1e-4)]])
def test_fit_rejects(pts):
    with pytest.raises(ValidationError):
        fit_suppression(pts, cut=None)


def test_predict_values():
    m = SuppressionModel(0.0038, 2.34)
    assert predict_infidelity(m, 3) == pytest.approx(0.0038 * 9 / 2.34 ** 2, rel=1e-12)
    assert predict_infidelity(m, 3) == pytest.approx(6.25e-3, rel=2e-3)
    assert predict_infidelity(SuppressionModel(0.0038, math.inf), 3) == 0.0
    assert predict_infidelity(SuppressionModel(50.0, 1.01), 3) == 1.0
    for bad in (-1, 4, 1):
        with pytest.raises(ValidationError):
            predict_infidelity(m, bad)


def test_min_distance():
    m = SuppressionModel(0.0038, 2.34)
    d = min_distance(m, 1e-10)
    assert predict_infidelity(m, d) <= 1e-10 < predict_infidelity(m, d - 2)
    with pytest.raises(InfeasibleError):
        min_distance(m, 1e-300, cap=21)


def test_model_validation():
    with pytest.raises(ValidationError):
        SuppressionModel(-1.0, 2.0)
    with pytest.raises(ValidationError):
        SuppressionModel(1.0, 2.0, "cubic")


# --- T1 rescaling -----------------------------------------------------------------

def test_rescale_identity_and_collapse():
    x = np.array([100e-6, 150e-6, 220e-6, 90e-6])
    assert np.allclose(rescale_t1_sample(x, x.std()), x, rtol=1e-14)
    assert np.allclose(rescale_t1_sample(x, 0.0), x.mean())


def test_rescale_rejects():
    with pytest.raises(ValidationError):
        rescale_t1_sample([], 1.0)
    with pytest.raises(ValidationError):
        rescale_t1_sample([1.0, 1.0], 0.5)
    with pytest.raises(ValidationError):
        rescale_t1_sample([1.0, 2.0], -0.5)


def test_rescale_half_preserves_skewness():
    x = synthetic_calibration().t1
    y = rescale_t1_sample(x, 0.5 * x.std())
    assert stats.skew(y) == pytest.approx(stats.skew(x), rel=1e-12, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-6, 1e-3), min_size=3, max_size=40),
       st.floats(0.1, 3.0))
def test_rescale_moments(values, scale):
    x = np.array(values)
    if x.std() < 1e-9:
        return
    y = rescale_t1_sample(x, scale * x.std())
    assert y.mean() == pytest.approx(x.mean(), rel=1e-10)
    assert y.std() == pytest.approx(scale * x.std(), rel=1e-10)
    for k in (3, 4):
        zx = (x - x.mean()) / x.std()
        zy = (y - y.mean()) / y.std()
        assert np.mean(zy ** k) == pytest.approx(np.mean(zx ** k), rel=1e-8, abs=1e-8)


# --- calibration and error models ---------------------------------------------------

def test_calibration_csv_round_trip():
    t = synthetic_calibration(40, seed=3)
    back = parse_calibration(t.to_csv())
    assert len(back) == 40
    assert np.allclose(back.t1, t.t1, rtol=1e-5)


@pytest.mark.parametrize("text", [
    "a,b,c\n1,2,3\n",
    "qubit,t1_s,err_1q,err_2q,err_readout\n" + "0,1e-4,1e-3,1e-2,1e-2\n" * 5,
    "qubit,t1_s,err_1q,err_2q,err_readout\n" + "0,-1e-4,1e-3,1e-2,1e-2\n" * 25,
    "qubit,t1_s,err_1q,err_2q,err_readout\n" + "0,1e-4,1.5,1e-2,1e-2\n" * 25,
    "qubit,t1_s,err_1q,err_2q,err_readout\n" + "0,abc,1e-3,1e-2,1e-2\n" * 25,
])
def test_calibration_rejects(text):
    with pytest.raises(ValidationError):
        parse_calibration(text)


def test_monotone_model_nondecreasing():
    rng = np.random.default_rng(0)
    x = rng.uniform(1e3, 1e4, 200)
    y = 1e-4 + 1e-7 * x + rng.normal(0, 2e-4, 200)
    m = MonotoneErrorModel.fit(x, np.abs(y))
    grid = np.linspace(0, 2e4, 500)
    v = m(grid)
    assert np.all(np.diff(v) >= -1e-15)
    assert np.all((v >= m.floor) & (v <= m.ceil))


def test_qpu_overrides_cover_patch():
    calib = synthetic_calibration()
    models = ErrorModels.fit(calib)
    coords = patch_qubits(3)
    ov = qpu_overrides(3, np.full(len(coords), 150e-6), models)
    assert set(ov.t1) == set(coords)
    assert len(ov.p_dep_2q) == 4 * 4 + 4 * 2
    with pytest.raises(ValidationError):
        qpu_overrides(3, np.full(len(coords) - 1, 150e-6), models)


def test_tailedness_sigma_zero_is_point_mass():
    calib = synthetic_calibration()
    shots = 4000
    res = tailedness_study(calib, [0.0], 3, 6, preset("ibm_torino"), shots=shots, seed=1)
    row = res.infidelity[0]
    p = row.mean()
    assert p > 0
    # identical chips: the spread is pure binomial noise
    assert np.all(np.abs(row - p) < 5 * math.sqrt(p * (1 - p) / shots) + 1e-12)
    assert res.summary()["n_samples"] == 6


def test_tailedness_rejects():
    calib = synthetic_calibration()
    with pytest.raises(ValidationError):
        tailedness_study(calib, [-1.0], 3, 2, preset("ibm_torino"))
    with pytest.raises(ValidationError):
        tailedness_study(calib, [0.0], 3, 0, preset("ibm_torino"))


# --- surgery ---------------------------------------------------------------------

SURGERY = SurgeryModel(0.0045, 2.2, 0.004, 2.4, 0.0273, 1.967)
GRID = [(d, kb * d, kr * d) for d in (3, 5, 7) for kb in (1, 3) for kr in (1, 3)]


def test_surgery_round_trip():
    m = fit_surgery(synthetic_surgery_data(SURGERY, GRID))
    for name in ("mu_x", "lambda_x", "mu_t", "lambda_t", "mu_z", "lambda_z"):
        assert getattr(m, name) == pytest.approx(getattr(SURGERY, name), rel=0.02), name


def test_surgery_time_like_decreases_in_rounds():
    vals = [SURGERY.time_like(5, 5, r) for r in (5, 9, 15)]
    assert vals[0] > vals[1] > vals[2]
    assert SURGERY.p_zero(5, 5, 15) > SURGERY.p_zero(5, 5, 5)


def test_surgery_rejects():
    data = synthetic_surgery_data(SURGERY, [(3, 3, 3), (3, 9, 3)])
    with pytest.raises(ValidationError):
        fit_surgery(data)
    zeros = [(d, b, r, 0.0, 0.0) for d, b, r in GRID]
    with pytest.raises(ValidationError):
        fit_surgery(zeros)
    with pytest.raises(ValidationError):
        SurgeryModel(0.0, 2, 1, 2, 1, 2)


def test_predict_surgery_error_hand_value():
    v = predict_surgery_error(0.0038, 2.34, 0.0273, 1.967, 3, 3, 3, 1, 1)
    assert v == pytest.approx(0.0038 * 36 / 2.34 ** 2 + 0.0273 * 9 / 1.967 ** 2, rel=1e-12)
    assert v == pytest.approx(0.08848688425266152, rel=1e-12)


def test_predict_surgery_error_reductions():
    mu, lam = 0.0038, 2.34
    base = predict_surgery_error(mu, lam, 0.0273, 1.967, 5, 0, 4)
    assert base == pytest.approx(mu * 5 * 9 * lam ** -3, rel=1e-12)
    a = predict_surgery_error(mu, lam, 0.0273, 1.967, 5, 4, 4, 0, 2)
    b = predict_surgery_error(mu, lam, 0.0273, 1.967, 5, 4, 4, 0, 4)
    assert b - a == pytest.approx(mu * 5 * 2 * lam ** -3, rel=1e-9)
    for bad in ({"d": 4}, {"r": -1}):
        args = dict(mu=mu, lam=lam, mu_t=0.03, lam_t=2.0, d=3, b=3, r=3) | bad
        with pytest.raises(ValidationError):
            predict_surgery_error(**args)


# --- Monte Carlo studies at small scale -----------------------------------------------

def test_improve_params():
    base = preset("baseline")
    g = improve_params(base, "coherence", 2)
    assert g.t1 == 2 * base.t1 and g.err_2q == base.err_2q
    s = improve_params(base, "spam", 4)
    assert s.err_meas == base.err_meas / 4 and s.t1 == base.t1
    assert improve_params(base, "all", 1) == base
    with pytest.raises(ValidationError):
        improve_params(base, "gates", 0.5)
    with pytest.raises(ValidationError):
        improve_params(base, "cosmic", 2)


def test_memory_run_deterministic_and_fit():
    hw = preset("target")
    a = run_memory(hw, [3, 5], 20_000, seed=3)
    b = run_memory(hw, [3, 5], 20_000, seed=3)
    assert a == b
    assert a[0].rate > a[1].rate
    m = fit_memory(a)
    assert m.lam > 1


def test_sensitivity_factor_one_matches_base():
    hw = preset("baseline")
    pts = sensitivity_sweep(hw, "gates", [1.0], distances=(3, 5), shots=20_000, seed=5)
    base = fit_memory(run_memory(hw, (3, 5), 20_000, seed=5))
    assert pts[0].lam == pytest.approx(base.lam, rel=1e-12)


def test_sensitivity_records_bad_factor():
    pts = sensitivity_sweep(preset("baseline"), "gates", [0.5], distances=(3, 5), shots=100)
    assert pts[0].error is not None and math.isnan(pts[0].lam)


def test_cut_scan_small():
    cells = cut_threshold_scan([3], [None, 0.2], {"b": 3, "r_m": 3, "n_cuts": 2},
                               preset("baseline"), 5000, seed=2)
    assert len(cells) == 2 and all(c.error is None for c in cells)
    assert cells[1].n_cuts == 2 and cells[0].n_cuts == 0
    assert cells[1].p_plus + cells[1].p_zero > cells[0].p_plus + cells[0].p_zero
