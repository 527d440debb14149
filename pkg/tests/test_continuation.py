import numpy as np
import pytest

from cuspwave.continuation import (
    ContinuationConfig,
    branch_follow,
    local_predictor,
    predictor_speed_candidates,
    verify_asymptotics,
)
from cuspwave.nonlinearity import NonlinearitySpec, mu_of_speed
from cuspwave.spectral import Grid, SymbolSpec
from cuspwave.steady import SteadyProblem, residual


def _problem(kind="abs", p=2.0, eps=0.1, alpha=0.5, M=32, N=128):
    return SteadyProblem(
        SymbolSpec("neg_order", alpha), NonlinearitySpec(kind, p, eps), Grid(N), M
    )


def test_config_validation():
    with pytest.raises(ValueError):
        ContinuationConfig(ds=1e-8, ds_min=1e-7)
    with pytest.raises(ValueError):
        ContinuationConfig(crest_margin=1.5)
    with pytest.raises(ValueError):
        ContinuationConfig(eps_schedule=(1e-3, 1e-2))  # must decrease
    with pytest.raises(ValueError):
        ContinuationConfig(s0=-1.0)
    ContinuationConfig()  # defaults are valid


def test_speed_candidates_closed_forms():
    # abs, p = 2, alpha = 0.5, k = 1: proof candidate is 1/(2(1 - 2^-1/2))
    prob = _problem(p=2.0, eps=0.1, alpha=0.5)
    cands = predictor_speed_candidates(prob, 1)
    expected_proof = 0.5 / (1.0 - 2.0**-0.5)
    assert cands["proof"] == pytest.approx(expected_proof, rel=1e-14)
    assert cands["theorem"] == pytest.approx(2.0 * expected_proof, rel=1e-14)
    # sgn closed form: 3(p-1) eps^(p-3) / 8
    prob_s = _problem(kind="sgn", p=2.5, eps=0.1)
    cands_s = predictor_speed_candidates(prob_s, 1)
    assert cands_s["proof"] == pytest.approx(0.375 * 1.5 * 0.1**-0.5, rel=1e-14)


def test_predictor_structure():
    prob = _problem(p=2.0, eps=0.1)
    phi, c = local_predictor(1, 1e-2, prob)
    assert phi.coeffs[0] == pytest.approx(1e-2)
    assert phi.coeffs[1] != 0.0  # second harmonic present for abs
    assert np.all(phi.coeffs[2:] == 0.0)
    assert c > 1.0  # above the bifurcation speed m(1) = 1

    prob_s = _problem(kind="sgn", p=2.5, eps=0.1)
    phi_s, _ = local_predictor(1, 1e-2, prob_s)
    assert phi_s.antisymmetric
    assert phi_s.coeffs[2] != 0.0  # third harmonic
    assert np.all(phi_s.coeffs[1::2] == 0.0)
    with pytest.raises(ValueError):
        local_predictor(2, 1e-2, prob_s)  # sgn branches need odd k


def test_predictor_smooth_case_odd_power():
    # eps = 0, integer p = 3: cubic generates the third harmonic and an
    # s^2 speed correction with coefficient binom(3,1)/4 = 3/4
    prob = _problem(kind="abs", p=3.0, eps=0.0)
    norms = []
    for s in (1e-2, 5e-3):
        phi, c = local_predictor(1, s, prob)
        assert c == pytest.approx(1.0 + 0.75 * s * s, rel=1e-12)
        res = residual(prob, phi, c)
        norms.append(float(np.max(np.abs(res.coeffs))))
    # residual is O(s^3): halving s should cut it by about 8
    assert norms[0] / norms[1] == pytest.approx(8.0, rel=0.2)


def test_predictor_smooth_case_rejects_non_integer_p():
    prob = _problem(kind="abs", p=2.5, eps=0.0)
    with pytest.raises(ValueError):
        local_predictor(1, 1e-2, prob)


def test_verify_asymptotics_identifies_speed_coefficient():
    prob = _problem(p=2.0, eps=0.1, M=32, N=128)
    report = verify_asymptotics(prob, 1, [2.5e-3, 5e-3, 1e-2])
    assert report["phi_rel_dev"] < 0.02
    assert report["speed_rel_dev_proof"] < 0.02
    # the independent quadrature agrees with whichever candidate matched
    fitted = report["fitted_speed_coeff"]
    assert report["solvability_quadrature"] == pytest.approx(fitted, rel=0.02)
    assert report["matching_candidate"] == "proof"


def test_branch_follow_reaches_crest_small_problem():
    prob = _problem(p=2.0, eps=0.1, M=64, N=256)
    config = ContinuationConfig(
        s0=1e-2, ds=5e-3, ds_max=5e-2, newton_tol=1e-11, crest_margin=1e-2
    )
    branch = branch_follow(prob, config)
    assert branch.terminated_reason == "crest_reached"
    last = branch.points[-1]
    assert last.max_value >= 0.98 * last.mu_eps
    assert last.max_value < last.mu_eps
    # residuals certified along the whole branch, and heights grow monotonically
    assert all(bp.residual_norm <= config.newton_tol for bp in branch.points)
    heights = [bp.max_value for bp in branch.points]
    assert all(a <= b for a, b in zip(heights[:-1], heights[1:]))
    # first point agrees with the predictor to O(s0^3)
    phi0, c0 = local_predictor(1, config.s0, prob)
    first = branch.points[0]
    assert np.max(np.abs(first.phi.coeffs[:2] - phi0.coeffs[:2])) < 10.0 * config.s0**3
    # speed stays in the admissible window (above the bifurcation point)
    alpha = prob.symbol.alpha
    for bp in branch.points:
        assert bp.c > 1.0**-alpha - 1e-12


def test_branch_points_stay_below_crest_height():
    prob = _problem(kind="sgn", p=2.5, eps=0.1, M=64, N=256)
    config = ContinuationConfig(s0=1e-2, newton_tol=1e-11)
    branch = branch_follow(prob, config)
    assert branch.terminated_reason == "crest_reached"
    for bp in branch.points:
        assert bp.max_value < mu_of_speed(prob.nonlinearity, bp.c)
        assert bp.phi.antisymmetric
