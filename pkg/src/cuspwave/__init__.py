"""Numerical laboratory for periodic cusped waves under negative-order dispersion.

Subpackages compute the singular periodic convolution kernel, represent even
zero-mean waves as cosine series, assemble and solve the steady travelling-wave
equation, follow bifurcation branches toward the highest wave, and run
post-hoc regularity diagnostics.
"""

from .errors import (
    AccuracyError,
    ConvergenceError,
    NonsmoothPointError,
    SingularityError,
)

__all__ = [
    "AccuracyError",
    "ConvergenceError",
    "NonsmoothPointError",
    "SingularityError",
]

__version__ = "0.1.0"
