"""The two nonlinearity families, their regularizations, and crest heights.

kind = "abs":  n(x) = |x|^p,        regularized (x^2 + eps^2)^(p/2) - eps^p
kind = "sgn":  n(x) = x |x|^(p-1),  regularized x ((x^2 + eps^2)^((p-1)/2) - eps^(p-1))

All closed forms are written in |x| and sign(x) so non-integer powers never
see a negative base.  mu_of_speed returns the height at which the travelling
frame c - n'(phi) degenerates, the wave-height ceiling of the steady problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NonsmoothPointError

__all__ = ["NonlinearitySpec", "n_eval", "n_eval_grid", "mu_of_speed"]


@dataclass(frozen=True)
class NonlinearitySpec:
    kind: str
    p: float
    eps: float = 0.0

    def __post_init__(self):
        if self.kind not in ("abs", "sgn"):
            raise ValueError(f"kind must be 'abs' or 'sgn', got {self.kind!r}")
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if self.eps < 0:
            raise ValueError(f"eps must be nonnegative, got {self.eps}")


def _n_sharp(kind, p, x, order):
    """Unregularized n and derivatives; |x|, sign(x) form."""
    ax, sx = abs(x), math.copysign(1.0, x) if x != 0 else 0.0
    if kind == "abs":
        if order == 0:
            return ax**p
        if order == 1:
            return p * sx * ax ** (p - 1.0)
        if x == 0.0:
            if p < 2.0:
                raise NonsmoothPointError(
                    f"n'' of |x|^{p} is unbounded at x = 0 for p < 2"
                )
            return 2.0 if p == 2.0 else 0.0
        return p * (p - 1.0) * ax ** (p - 2.0)
    # sgn
    if order == 0:
        return sx * ax**p
    if order == 1:
        return p * ax ** (p - 1.0)
    if x == 0.0:
        if p < 2.0:
            raise NonsmoothPointError(
                f"n'' of x|x|^{p - 1} is unbounded at x = 0 for p < 2"
            )
        return 0.0
    return p * (p - 1.0) * sx * ax ** (p - 2.0)


def n_eval(spec, x, order=0):
    """n^eps(x) or its first or second derivative, in closed form."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1, or 2, got {order}")
    x = float(x)
    p, eps = spec.p, spec.eps
    if eps == 0.0:
        return _n_sharp(spec.kind, p, x, order)
    r2 = x * x + eps * eps
    if spec.kind == "abs":
        if order == 0:
            return r2 ** (0.5 * p) - eps**p
        if order == 1:
            return p * x * r2 ** (0.5 * p - 1.0)
        return p * r2 ** (0.5 * p - 1.0) + p * (p - 2.0) * x * x * r2 ** (0.5 * p - 2.0)
    if order == 0:
        return x * (r2 ** (0.5 * (p - 1.0)) - eps ** (p - 1.0))
    if order == 1:
        return (
            r2 ** (0.5 * (p - 1.0))
            - eps ** (p - 1.0)
            + (p - 1.0) * x * x * r2 ** (0.5 * (p - 3.0))
        )
    return 3.0 * (p - 1.0) * x * r2 ** (0.5 * (p - 3.0)) + (p - 1.0) * (
        p - 3.0
    ) * x**3 * r2 ** (0.5 * (p - 5.0))


def n_eval_grid(spec, x, order=0):
    """Vectorized n_eval for collocation grids (orders 0 and 1 only).

    The eps = 0 second derivative can be singular pointwise, so grid code
    sticks to orders the quadrature actually needs.
    """
    if order not in (0, 1):
        raise ValueError(f"grid evaluation supports orders 0 and 1, got {order}")
    x = np.asarray(x, dtype=float)
    p, eps = spec.p, spec.eps
    ax = np.abs(x)
    if eps == 0.0:
        if spec.kind == "abs":
            return ax**p if order == 0 else p * np.sign(x) * ax ** (p - 1.0)
        return np.sign(x) * ax**p if order == 0 else p * ax ** (p - 1.0)
    r2 = x * x + eps * eps
    if spec.kind == "abs":
        if order == 0:
            return r2 ** (0.5 * p) - eps**p
        return p * x * r2 ** (0.5 * p - 1.0)
    if order == 0:
        return x * (r2 ** (0.5 * (p - 1.0)) - eps ** (p - 1.0))
    return (
        r2 ** (0.5 * (p - 1.0))
        - eps ** (p - 1.0)
        + (p - 1.0) * x * x * r2 ** (0.5 * (p - 3.0))
    )


def mu_of_speed(spec, c):
    """Smallest positive solution of (n^eps)'(x) = c.

    For eps = 0 this is (c/p)^(1/(p-1)) in closed form (both kinds).  For
    eps > 0, (n^eps)' is continuous, vanishes at 0 and increases to
    infinity, so the root is found by bracketing, bisection to 1e-3, and a
    Newton polish to 1e-14 relative.
    """
    if not c > 0:
        raise ValueError(f"speed must be positive, got {c}")
    p, eps = spec.p, spec.eps
    if eps == 0.0:
        return (c / p) ** (1.0 / (p - 1.0))

    f = lambda x: n_eval(spec, x, order=1) - c
    hi = max(1.0, (2.0 * c / p) ** (1.0 / (p - 1.0)) + eps)
    for _ in range(60):
        if f(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(
            "could not bracket the crest height",
            diagnostics={"c": c, "hi": hi, "f_hi": f(hi)},
        )
    lo = 0.0
    while hi - lo > 1e-3 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    x = 0.5 * (lo + hi)
    for _ in range(60):
        step = f(x) / n_eval(spec, x, order=2)
        x -= step
        if abs(step) <= 1e-14 * abs(x):
            return x
    raise ConvergenceError(
        "Newton polish for the crest height stalled",
        diagnostics={"c": c, "x": x, "residual": f(x)},
    )
