"""Branch following: local predictors, pseudo-arclength stepping, eps-homotopy.

A branch starts from the analytic small-amplitude expansion at a bifurcation
point c = m(k), is continued by secant-predictor pseudo-arclength steps in
(coefficients, speed) space, and stops when the crest value approaches the
degeneracy height mu_eps.  The eps-homotopy then re-anchors near-crest waves
on a decreasing schedule of regularization parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson
from scipy.special import comb

from .errors import ConvergenceError
from .nonlinearity import NonlinearitySpec, mu_of_speed, n_eval
from .spectral import CosineSeries, synthesize
from .steady import (
    SteadyProblem,
    dense_jacobian,
    make_branch_point,
    newton_solve,
    residual,
    _active_indices,
    _solve_monitored,
)

__all__ = [
    "ContinuationConfig",
    "Branch",
    "local_predictor",
    "predictor_speed_candidates",
    "verify_asymptotics",
    "branch_follow",
    "eps_homotopy",
]


@dataclass
class ContinuationConfig:
    s0: float = 1e-2
    ds: float = 5e-3
    ds_min: float = 1e-7
    ds_max: float = 5e-2
    crest_margin: float = 1e-2
    max_steps: int = 2000
    newton_tol: float = 1e-11
    eps_schedule: tuple = (1e-1, 1e-2, 1e-3)

    def __post_init__(self):
        if not 0 < self.ds_min <= self.ds <= self.ds_max:
            raise ValueError("need 0 < ds_min <= ds <= ds_max")
        if not 0 < self.crest_margin < 1:
            raise ValueError("crest_margin must lie in (0, 1)")
        if not self.s0 > 0:
            raise ValueError("s0 must be positive")
        eps = tuple(self.eps_schedule)
        if any(e <= 0 for e in eps) or any(
            later >= earlier for later, earlier in zip(eps[1:], eps[:-1])
        ):
            raise ValueError("eps_schedule must be strictly decreasing and positive")


@dataclass
class Branch:
    points: list
    terminated_reason: str
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Local predictors


def predictor_speed_candidates(problem, k):
    """The two candidate quadratic speed coefficients (see verify_asymptotics).

    Returns {"theorem": ..., "proof": ...}: the theorem-stated value and the
    one the order-s^3 solvability condition in its own proof produces.  The
    code never assumes either; verify_asymptotics decides numerically.
    """
    nl = problem.nonlinearity
    p, eps, alpha = nl.p, nl.eps, problem.symbol.alpha
    if nl.kind == "abs":
        C = (0.25 * p * eps ** (p - 2.0)) / (
            float(k) ** -alpha - (2.0 * k) ** -alpha
        )
        # proof route: c2 = (n''(0)/2) * C, i.e. p^2 eps^(2p-4) / (8 (1 - 2^-alpha))
        # at k = 1
        return {
            "theorem": 2.0 * C,
            "proof": 0.5 * p * eps ** (p - 2.0) * C,
        }
    return {
        "theorem": 0.75 * (p - 1.0) * eps ** (p - 3.0),
        "proof": 0.375 * (p - 1.0) * eps ** (p - 3.0),
    }


def local_predictor(k, s, problem):
    """Small-amplitude expansion of the branch bifurcating at c = m(k).

    eps > 0: abs gives s cos(kx) + s^2 C cos(2kx); sgn gives
    s cos(kx) + s^3 C cos(3kx) (odd frequencies only, k must be odd).
    eps = 0 needs integer p >= 2 (the smooth-case expansion); non-integer
    p has no analytic expansion and is rejected.
    """
    nl = problem.nonlinearity
    p, eps, alpha = nl.p, nl.eps, problem.symbol.alpha
    M = problem.M
    coeffs = np.zeros(M)
    coeffs[k - 1] = s
    c = float(k) ** -alpha + predictor_speed_candidates(problem, k)["proof"] * s * s

    if eps > 0:
        if nl.kind == "abs":
            C = (0.25 * p * eps ** (p - 2.0)) / (
                float(k) ** -alpha - (2.0 * k) ** -alpha
            )
            if 2 * k <= M:
                coeffs[2 * k - 1] = s * s * C
            return CosineSeries(coeffs), c
        if k % 2 == 0:
            raise ValueError("sgn branches exist only at odd k")
        C = (0.125 * (p - 1.0) * eps ** (p - 3.0)) / (
            float(k) ** -alpha - (3.0 * k) ** -alpha
        )
        if 3 * k <= M:
            coeffs[3 * k - 1] = s**3 * C
        return CosineSeries(coeffs, antisymmetric=True), c

    # smooth case: n(x) = x^p with integer p >= 2, no regularization
    if nl.kind != "sgn" and p != round(p):
        raise ValueError(
            "eps = 0 with non-integer p has no analytic local expansion; "
            "start from a small-amplitude Newton solve instead"
        )
    p_int = round(p)
    if p_int != p or p_int < 2:
        raise ValueError("smooth-case predictor needs integer p >= 2")
    if p_int % 2 == 0:
        j_range = range(p_int // 2)
    else:
        j_range = range((p_int - 3) // 2 + 1)
    for j in j_range:
        freq = (p_int - 2 * j) * k
        C_kj = (comb(p_int, j) / 2.0 ** (p_int - 1)) / (
            float(k) ** -alpha - float(freq) ** -alpha
        )
        if freq <= M:
            coeffs[freq - 1] += s**p_int * C_kj
    if p_int % 2 == 0:
        c = float(k) ** -alpha  # speed correction enters only at s^(2p-2)
    else:
        C_odd = comb(p_int, (p_int - 1) // 2) / 2.0 ** (p_int - 1)
        c = float(k) ** -alpha + s ** (p_int - 1) * C_odd
    anti = nl.kind == "sgn" and k % 2 == 1
    return CosineSeries(coeffs, antisymmetric=anti), c


def _solvability_quadrature(problem, k):
    """Quadratic speed coefficient via the order-s^3 solvability condition.

    Independent route: project the cubic-order terms of the expansion onto
    cos(kx) with plain numerical quadrature, using finite differences of
    the closed-form n-derivatives at 0 (no fitted data involved).
    """
    nl = problem.nonlinearity
    alpha = problem.symbol.alpha
    x = np.linspace(-math.pi, math.pi, 4097)
    phi1 = np.cos(k * x)
    h = 1e-4 * max(nl.eps, 1.0)
    if nl.kind == "abs":
        # n''(0) and the second-order profile phi2 = C cos(2kx)
        n2 = n_eval(nl, 0.0, 2)
        C = (0.5 * n2 / 2.0) / (float(k) ** -alpha - (2.0 * k) ** -alpha)
        phi2 = C * np.cos(2.0 * k * x)
        integrand = n2 * phi1 * phi2 * np.cos(k * x)
    else:
        # n'''(0) by central difference of the closed-form n''
        n3 = (n_eval(nl, h, 2) - n_eval(nl, -h, 2)) / (2.0 * h)
        integrand = (n3 / 6.0) * phi1**3 * np.cos(k * x)
    return float(simpson(integrand, x=x)) / math.pi


def verify_asymptotics(problem, k, s_list, tol=1e-12):
    """Fit the local expansion numerically and compare with the candidates.

    Solves fix_amplitude(s) for each s, extracts the second-harmonic (abs)
    or third-harmonic (sgn) coefficient ratio and the quadratic speed
    coefficient by least squares, and reports both paper candidates plus
    the independent solvability quadrature with relative deviations.
    """
    nl = problem.nonlinearity
    alpha = problem.symbol.alpha
    c0 = float(k) ** -alpha
    harmonic = 2 * k if nl.kind == "abs" else 3 * k
    power = 2 if nl.kind == "abs" else 3

    ratios, speeds, s_arr = [], [], []
    for s in s_list:
        phi0, c_pred = local_predictor(k, s, problem)
        guess = make_branch_point(problem, phi0, c_pred)
        bp = newton_solve(problem, guess, ("fix_amplitude", s), tol=tol)
        ratios.append(bp.phi.coeffs[harmonic - 1] / s**power)
        speeds.append(bp.c)
        s_arr.append(s)
    s_arr = np.asarray(s_arr)
    speeds = np.asarray(speeds)
    fitted_phi = float(np.mean(ratios))
    # least-squares slope of (c - c0) against s^2 through the origin
    fitted_speed = float(np.dot(speeds - c0, s_arr**2) / np.dot(s_arr**2, s_arr**2))

    if nl.kind == "abs":
        formula_phi = (0.25 * nl.p * nl.eps ** (nl.p - 2.0)) / (
            c0 - (2.0 * k) ** -alpha
        )
    else:
        formula_phi = (0.125 * (nl.p - 1.0) * nl.eps ** (nl.p - 3.0)) / (
            c0 - (3.0 * k) ** -alpha
        )
    cands = predictor_speed_candidates(problem, k)
    quad = _solvability_quadrature(problem, k)
    rel = lambda a, b: abs(a - b) / max(abs(a), abs(b), 1e-300)
    report = {
        "k": k,
        "kind": nl.kind,
        "fitted_phi_coeff": fitted_phi,
        "formula_phi_coeff": formula_phi,
        "phi_rel_dev": rel(fitted_phi, formula_phi),
        "fitted_speed_coeff": fitted_speed,
        "candidate_theorem": cands["theorem"],
        "candidate_proof": cands["proof"],
        "solvability_quadrature": quad,
        "speed_rel_dev_theorem": rel(fitted_speed, cands["theorem"]),
        "speed_rel_dev_proof": rel(fitted_speed, cands["proof"]),
        "speed_rel_dev_quadrature": rel(fitted_speed, quad),
        "speeds": speeds.tolist(),
        "s_list": s_arr.tolist(),
    }
    report["matching_candidate"] = (
        "theorem"
        if report["speed_rel_dev_theorem"] < report["speed_rel_dev_proof"]
        else "proof"
    )
    return report


# ---------------------------------------------------------------------------
# Pseudo-arclength continuation


def _pack(bp, act):
    return np.r_[bp.phi.coeffs[act], bp.c]


def _monotone_on_left_half(values, slack=-1e-12):
    """First differences of the profile are >= slack on (-pi, 0).

    The slack absorbs rounding; callers near the crest widen it to the
    solver noise floor, since the trough is flat and spectral-truncation
    ripple there sits well above 1e-12 at desk resolutions.
    """
    half = len(values) // 2
    return bool(np.all(np.diff(values[: half + 1]) >= slack))


def _arclength_correct(problem, z_pred, tangent, z_prev, ds, tol, odd, max_iter=12):
    """Newton on [F(a, c); tangent . (z - z_prev) - ds] from the predictor."""
    act = _active_indices(problem, odd)
    z = z_pred.copy()
    n_act = len(act)
    for it in range(max_iter):
        coeffs = np.zeros(problem.M)
        coeffs[act] = z[:-1]
        phi = CosineSeries(coeffs, antisymmetric=odd)
        c = float(z[-1])
        if not c > 0:
            raise ConvergenceError("corrector left the c > 0 half-space")
        res = residual(problem, phi, c)
        rnorm = float(np.max(np.abs(synthesize(res, problem.grid))))
        if rnorm <= tol:
            return make_branch_point(problem, phi, c), it
        A = np.empty((n_act + 1, n_act + 1))
        A[:n_act, :n_act] = dense_jacobian(problem, phi, c)[np.ix_(act, act)]
        A[:n_act, -1] = -coeffs[act]  # dF/dc
        A[-1, :] = tangent
        rhs = np.r_[-res.coeffs[act], -(np.dot(tangent, z - z_prev) - ds)]
        z = z + _solve_monitored(A, rhs)
    raise ConvergenceError(
        "arclength corrector did not converge",
        diagnostics={"residual_norm": rnorm, "ds": ds},
    )


def branch_follow(problem, config, start_points=None):
    """Follow the k = 1 branch from small amplitude toward the crest.

    Returns a Branch whose points all satisfy residual_norm <= newton_tol,
    are monotone on (-pi, 0), stay strictly below the crest height, and
    grow monotonically in max_value.  Termination reasons: crest_reached,
    step_floor, max_steps, or error (with diagnostics).
    """
    tol = config.newton_tol
    odd = problem.nonlinearity.kind == "sgn"
    act = _active_indices(problem, odd)

    def crest_reached(bp):
        return 0.0 <= bp.mu_eps - bp.max_value < config.crest_margin * bp.mu_eps

    points = []
    if start_points is None:
        for s in (config.s0, config.s0 * 1.25):
            phi0, c0 = local_predictor(1, s, problem)
            bp = newton_solve(
                problem,
                make_branch_point(problem, phi0, c0),
                ("fix_amplitude", s),
                tol=tol,
            )
            points.append(bp)
    else:
        points.extend(start_points)

    branch = Branch(points=points, terminated_reason="max_steps")
    for bp in points:
        if crest_reached(bp):
            branch.terminated_reason = "crest_reached"
            return branch

    ds = config.ds
    z_prev, z_curr = _pack(points[-2], act), _pack(points[-1], act)
    for _ in range(config.max_steps):
        gap = np.linalg.norm(z_curr - z_prev)
        if gap == 0.0:
            branch.terminated_reason = "error"
            branch.diagnostics["reason"] = "stalled secant"
            return branch
        tangent = (z_curr - z_prev) / gap
        try:
            bp, iters = _arclength_correct(
                problem, z_curr + ds * tangent, tangent, z_curr, ds, tol, odd
            )
        except ConvergenceError as exc:
            ds *= 0.5
            if ds < config.ds_min:
                branch.terminated_reason = "step_floor"
                branch.diagnostics["last_error"] = str(exc)
                return branch
            continue

        # reject candidates that left the admissible wave class (stepped past
        # the crest, lost monotonicity, or shrank): halve the step and retry
        # monotonicity below the spectral truncation noise (~ the magnitude
        # of the last retained coefficient) is not decidable; spurious
        # solutions violate it by many orders more than that
        noise = float(abs(bp.phi.coeffs[-1]))
        values = synthesize(bp.phi, problem.grid)
        admissible = (
            _monotone_on_left_half(values, slack=-max(1e-12, 10.0 * tol, noise))
            and bp.max_value < bp.mu_eps
            and bp.max_value >= points[-1].max_value
        )
        if not admissible:
            ds *= 0.5
            if ds < config.ds_min:
                branch.terminated_reason = "step_floor"
                branch.diagnostics["rejected_point"] = bp
                return branch
            continue

        points.append(bp)
        z_prev, z_curr = z_curr, _pack(bp, act)
        if crest_reached(bp):
            branch.terminated_reason = "crest_reached"
            return branch
        if iters <= 4:
            ds = min(ds * 1.3, config.ds_max)
    return branch


def _reanchor(problem, config, prev, eps_from, eps_to):
    """Carry a near-crest wave from one eps to a smaller one, safely.

    A direct fixed-amplitude re-solve at a 10x smaller eps can overshoot
    the new (smaller) crest height or leave the Newton basin, so the wave
    is backed off in amplitude first and eps is walked down through a few
    geometric substeps.
    """
    nl0 = problem.nonlinearity
    current = prev
    for backoff in (0.9, 0.75, 0.5, 0.25):
        s_try = prev.s * backoff
        try:
            prob_prev = SteadyProblem(
                problem.symbol,
                NonlinearitySpec(nl0.kind, nl0.p, eps_from),
                problem.grid,
                problem.M,
            )
            current = newton_solve(
                prob_prev, prev, ("fix_amplitude", s_try), tol=config.newton_tol
            )
        except ConvergenceError:
            continue
        if current.max_value < (1.0 - 2.0 * config.crest_margin) * current.mu_eps:
            break
    n_sub = 4
    for eps in np.geomspace(eps_from, eps_to, n_sub + 1)[1:]:
        prob = SteadyProblem(
            problem.symbol,
            NonlinearitySpec(nl0.kind, nl0.p, float(eps)),
            problem.grid,
            problem.M,
        )
        current = newton_solve(
            prob, current, ("fix_amplitude", current.s), tol=config.newton_tol
        )
    return current


def eps_homotopy(problem, config):
    """Drive the near-crest wave along a decreasing eps schedule.

    Runs a full continuation at the largest eps, then warm-starts each
    smaller eps from the previous near-crest wave (fix_amplitude at its s)
    and re-continues until the crest margin is met again.  Returns
    (final_points, report); on failure the report carries a failure marker
    and the points collected so far.
    """
    schedule = tuple(config.eps_schedule)
    finals, report_rows = [], []
    nl0 = problem.nonlinearity
    branch = None
    for i, eps in enumerate(schedule):
        nl = NonlinearitySpec(nl0.kind, nl0.p, eps)
        prob = SteadyProblem(problem.symbol, nl, problem.grid, problem.M)
        try:
            if i == 0:
                branch = branch_follow(prob, config)
            else:
                warm = _reanchor(problem, config, finals[-1], schedule[i - 1], eps)
                s_back = warm.s * 0.999
                warm_back = newton_solve(
                    prob, warm, ("fix_amplitude", s_back), tol=config.newton_tol
                )
                branch = branch_follow(prob, config, start_points=[warm_back, warm])
        except ConvergenceError as exc:
            return finals, {"failed_at_eps": eps, "error": str(exc), "rows": report_rows}
        if branch.terminated_reason != "crest_reached":
            return finals, {
                "failed_at_eps": eps,
                "error": f"termination {branch.terminated_reason}",
                "rows": report_rows,
            }
        bp = branch.points[-1]
        finals.append(bp)
        mu_limit = mu_of_speed(NonlinearitySpec(nl0.kind, nl0.p, 0.0), bp.c)
        report_rows.append(
            {
                "eps": eps,
                "c": bp.c,
                "max_value": bp.max_value,
                "mu_eps": bp.mu_eps,
                "mu_sharp": mu_limit,
                "gap_to_mu_sharp": abs(bp.max_value - mu_limit),
            }
        )
    return finals, {"rows": report_rows}
