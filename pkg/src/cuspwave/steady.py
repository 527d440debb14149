"""Steady travelling-wave equation on cosine coefficients.

The residual of a profile phi at speed c is

    F(phi, c) = L phi - c phi + n(phi) - mean(n(phi)),

where L is the dispersion symbol; zeros of F are steady waves.  The Newton
corrector solves the dense coefficient-space system either at fixed speed or
with the first cosine coefficient pinned (fixed amplitude, speed free).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, lu_factor, lu_solve

from .errors import ConvergenceError
from .nonlinearity import NonlinearitySpec, mu_of_speed, n_eval_grid
from .spectral import CosineSeries, Grid, SymbolSpec, analyze, apply_symbol, symbol_value, synthesize

__all__ = [
    "SteadyProblem",
    "BranchPoint",
    "residual",
    "jacobian_apply",
    "dense_jacobian",
    "newton_solve",
    "make_branch_point",
]

COND_LIMIT = 1e14


@dataclass(frozen=True)
class SteadyProblem:
    symbol: SymbolSpec
    nonlinearity: NonlinearitySpec
    grid: Grid
    M: int

    def __post_init__(self):
        if self.M < 1:
            raise ValueError("M must be positive")
        if self.grid.N < 4 * self.M:
            raise ValueError(
                f"grid.N = {self.grid.N} violates the dealiasing rule N >= 4M = {4 * self.M}"
            )


@dataclass
class BranchPoint:
    """A converged point on a bifurcation branch."""

    phi: CosineSeries
    c: float
    s: float  # amplitude parameter, first cosine coefficient
    residual_norm: float
    max_value: float
    mu_eps: float


def make_branch_point(problem, phi, c):
    res = residual(problem, phi, c)
    values = synthesize(phi, problem.grid)
    return BranchPoint(
        phi=phi,
        c=c,
        s=float(phi.coeffs[0]) if phi.M else 0.0,
        residual_norm=float(np.max(np.abs(synthesize(res, problem.grid)))),
        max_value=float(np.max(values)),
        mu_eps=mu_of_speed(problem.nonlinearity, c),
    )


def _is_odd_subspace(problem, phi):
    return phi.antisymmetric and problem.nonlinearity.kind == "sgn"


def residual(problem, phi, c, diagnostics=None):
    """F(phi, c) as a zero-mean cosine series.

    For antisymmetric sgn-waves the output is projected onto odd
    frequencies; the discarded even-frequency content is recorded in
    ``diagnostics['symmetry_defect']`` when a dict is supplied.
    """
    if not c > 0:
        raise ValueError(f"speed must be positive, got {c}")
    grid = problem.grid
    values = synthesize(phi, grid)
    nvals = n_eval_grid(problem.nonlinearity, values)
    pointwise = (
        synthesize(apply_symbol(phi, problem.symbol), grid)
        - c * values
        + nvals
        - np.mean(nvals)
    )
    out = analyze(pointwise, grid, problem.M)
    if _is_odd_subspace(problem, phi):
        defect = float(np.max(np.abs(out.coeffs[1::2]))) if problem.M > 1 else 0.0
        if diagnostics is not None:
            diagnostics["symmetry_defect"] = defect
        out = CosineSeries(out.coeffs, antisymmetric=True)
    return out


def jacobian_apply(problem, phi, c, h):
    """Directional derivative of the residual at (phi, c) in direction h."""
    grid = problem.grid
    w = n_eval_grid(problem.nonlinearity, synthesize(phi, grid), order=1)
    hv = synthesize(h, grid)
    prod = w * hv
    lin = analyze(prod - np.mean(prod), grid, problem.M)
    out = apply_symbol(h, problem.symbol) - c * h
    coeffs = np.zeros(problem.M)
    coeffs[: out.M] += out.coeffs
    coeffs += lin.coeffs
    return CosineSeries(coeffs, antisymmetric=h.antisymmetric and phi.antisymmetric)


def dense_jacobian(problem, phi, c):
    """Full M x M coefficient-space Jacobian of the residual in phi.

    Equals the column-by-column assembly from jacobian_apply exactly: the
    nonlinear part of column k is (1/2)(w_hat_{k+j} + w_hat_{|k-j|}) with
    w_hat the discrete cosine coefficients of w = n'(phi) on the padded
    grid (w_hat_0 defined as twice the mean so the formula covers j = k),
    by the product-to-sum identity applied to the same discrete transform.
    Building it from one transform of w is O(N log N + M^2) instead of
    O(M N log N).
    """
    grid, M = problem.grid, problem.M
    w = n_eval_grid(problem.nonlinearity, synthesize(phi, grid), order=1)
    spectrum = np.fft.rfft(0.5 * (w + np.roll(w[::-1], 1)))
    m = np.arange(2 * M + 1)
    w_hat = (2.0 / grid.N) * (-1.0) ** m * spectrum[: 2 * M + 1].real
    j = np.arange(1, M + 1)
    J = 0.5 * (w_hat[j[:, None] + j[None, :]] + w_hat[np.abs(j[:, None] - j[None, :])])
    J += np.diag(symbol_value(problem.symbol, j) - c)
    return J


def _solve_monitored(A, rhs):
    """Direct solve with a reciprocal-condition estimate from the LU factors."""
    lu, piv = lu_factor(A)
    gecon = get_lapack_funcs("gecon", (A,))
    rcond, info = gecon(lu, np.linalg.norm(A, 1), norm="1")
    if info != 0 or not np.isfinite(rcond) or (rcond > 0 and 1.0 / rcond > COND_LIMIT):
        raise ConvergenceError(
            "Jacobian nearly singular (crest proximity or bifurcation point)",
            diagnostics={"condition_estimate": np.inf if rcond == 0 else 1.0 / rcond},
        )
    return lu_solve((lu, piv), rhs)


def _active_indices(problem, antisymmetric):
    if antisymmetric:
        return np.arange(0, problem.M, 2)  # coefficients of cos((2m+1)x)
    return np.arange(problem.M)


def newton_solve(problem, guess, constraint, tol=1e-12, max_iter=25, history=None):
    """Newton corrector; ``constraint`` is "fix_speed" or ("fix_amplitude", s).

    Under fix_amplitude the first cosine coefficient is pinned and the
    speed joins the unknowns.  Returns a BranchPoint with residual_norm
    <= tol or raises ConvergenceError.
    """
    phi = CosineSeries(
        np.copy(np.pad(guess.phi.coeffs, (0, problem.M - guess.phi.M))),
        antisymmetric=guess.phi.antisymmetric,
    )
    c = float(guess.c)
    odd = _is_odd_subspace(problem, phi)
    act = _active_indices(problem, odd)
    fix_amplitude = constraint != "fix_speed"
    if fix_amplitude:
        s_pin = float(constraint[1])
        phi.coeffs[0] = s_pin

    for _ in range(max_iter):
        res = residual(problem, phi, c)
        rnorm = float(np.max(np.abs(synthesize(res, problem.grid))))
        if history is not None:
            history.append(rnorm)
        if rnorm <= tol:
            return make_branch_point(problem, phi, c)
        J = dense_jacobian(problem, phi, c)[np.ix_(act, act)]
        F = res.coeffs[act]
        if fix_amplitude:
            # unknowns: coefficients except the pinned first one, plus c
            A = np.empty((len(act), len(act)))
            A[:, :-1] = J[:, 1:]
            A[:, -1] = -phi.coeffs[act]  # dF/dc
            delta = _solve_monitored(A, -F)
            phi.coeffs[act[1:]] += delta[:-1]
            c += float(delta[-1])
            if not c > 0:
                raise ConvergenceError(
                    "Newton drove the speed nonpositive",
                    diagnostics={"c": c, "residual_norm": rnorm},
                )
        else:
            delta = _solve_monitored(J, -F)
            phi.coeffs[act] += delta
    raise ConvergenceError(
        "Newton did not reach tolerance",
        diagnostics={"residual_norm": rnorm, "tol": tol, "iterations": max_iter},
    )
