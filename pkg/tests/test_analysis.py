import math

import numpy as np
import pytest

from cuspwave.analysis import (
    auto_window,
    cusp_exponent_fit,
    fit_exponent,
    lower_bound_check,
    wave_audit,
)
from cuspwave.nonlinearity import NonlinearitySpec, mu_of_speed
from cuspwave.spectral import CosineSeries, Grid, SymbolSpec, analyze
from cuspwave.steady import BranchPoint, SteadyProblem, make_branch_point


def _problem(alpha=0.7, eps=0.0, N=4096, M=1024, kind="abs", p=2.0):
    return SteadyProblem(
        SymbolSpec("neg_order", alpha), NonlinearitySpec(kind, p, eps), Grid(N), M
    )


def _planted_wave(problem, exponent, mu=1.0):
    """Fake branch point whose crest gap is exactly |x|^exponent."""
    target = mu - np.abs(problem.grid.nodes) ** exponent
    mean = float(np.mean(target))
    phi = analyze(target, problem.grid, problem.M, warn_tol=np.inf)
    return BranchPoint(
        phi=phi,
        c=1.0,
        s=float(phi.coeffs[0]),
        residual_norm=0.0,
        max_value=float(np.max(target - mean)),
        mu_eps=mu - mean,
    )


def test_fit_exponent_recovers_power_law():
    x = np.geomspace(1e-3, 1e-1, 50)
    assert fit_exponent(x, 3.7 * x**0.42) == pytest.approx(0.42, abs=1e-12)
    with pytest.raises(ValueError):
        fit_exponent(x, -x)


def test_auto_window_scales():
    prob = _problem(alpha=0.5, eps=0.0, N=4096, M=1024)
    x_lo, x_hi = auto_window(prob)
    assert x_lo == pytest.approx(8.0 * math.pi / 4096)
    assert x_hi == pytest.approx(math.pi / 8.0)
    # a large eps pushes the window start up to 2 eps^(1/alpha)
    prob_eps = _problem(alpha=0.5, eps=0.3, N=4096, M=1024)
    assert auto_window(prob_eps)[0] == pytest.approx(2.0 * 0.3**2)


def test_planted_cusp_exponent_recovered():
    prob = _problem(alpha=0.7)
    wave = _planted_wave(prob, 0.7)
    assert cusp_exponent_fit(wave, prob) == pytest.approx(0.7, abs=1e-3)


def test_planted_smooth_crest_fits_two():
    prob = _problem(alpha=0.7)
    wave = _planted_wave(prob, 2.0)
    assert cusp_exponent_fit(wave, prob) == pytest.approx(2.0, abs=1e-2)


def test_window_validation_and_node_count():
    prob = _problem()
    wave = _planted_wave(prob, 0.7)
    with pytest.raises(ValueError):
        cusp_exponent_fit(wave, prob, window=(0.5, 0.1))  # reversed
    with pytest.raises(ValueError):
        cusp_exponent_fit(wave, prob, window=(3.13, 3.14))  # too few nodes


def test_lower_bound_distinguishes_cusp_from_smooth():
    prob = _problem(alpha=0.7)
    cusped = _planted_wave(prob, 0.7)
    ok, lo, hi = lower_bound_check(cusped, prob)
    assert ok and lo > 0.9 and hi < 1.1  # ratio is exactly 1 in theory
    smooth = _planted_wave(prob, 2.0)
    ok2, lo2, _ = lower_bound_check(smooth, prob, floor=0.5)
    assert not ok2 and lo2 < 0.5


def test_trivial_wave_audit():
    prob = _problem(alpha=0.5, eps=0.1, N=256, M=64, p=2.0)
    wave = make_branch_point(prob, CosineSeries(np.zeros(prob.M)), 0.7)
    report = wave_audit(wave, prob)
    assert report.monotone_ok
    assert report.range_ok
    assert report.speed_bound_ok
    assert math.isnan(report.antisymmetry_defect)  # abs kind: not applicable
    assert report.max_gap == pytest.approx(mu_of_speed(prob.nonlinearity, 0.7))


def test_audit_never_raises_on_degenerate_window():
    # tiny grid: the window holds too few nodes; fit fields fall back to NaN
    prob = _problem(alpha=0.5, eps=0.1, N=16, M=4)
    wave = make_branch_point(prob, CosineSeries(np.zeros(prob.M)), 0.7)
    report = wave_audit(wave, prob)
    assert math.isnan(report.alpha_hat)
    assert report.monotone_ok


def test_audit_flags_speed_above_kernel_bound():
    prob = _problem(alpha=0.5, eps=0.1, N=256, M=64, p=2.0)
    wave = make_branch_point(prob, CosineSeries(np.zeros(prob.M)), 50.0)
    report = wave_audit(wave, prob)
    assert not report.speed_bound_ok
