"""Seeded generators for random physical two-mode states.

All generators take a ``numpy.random.Generator`` (see
:func:`gausscat.numerics.seeded_rng`) and return states that are physical
by construction, so no rejection loop depends on floating-point luck.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import NDArray

from .gaussian import BlockState, CovarianceMatrix, PureStateParam, balanced_state, symmetric_state


def _rotation(angle: float) -> NDArray[np.float64]:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def random_pd(rng: np.random.Generator, log_range: float = 2.0) -> NDArray[np.float64]:
    """Random 2x2 positive definite matrix with log-eigenvalues in
    ``[-log_range, log_range]``."""
    r = _rotation(rng.uniform(0.0, math.pi))
    w = np.exp(rng.uniform(-log_range, log_range, size=2))
    return r @ np.diag(w) @ r.T


def random_block_state(rng: np.random.Generator, log_range: float = 1.5, noise: float = 1.5) -> BlockState:
    """Block state with ``cx = inv(cp) + N``, ``N >= 0``.

    For block states ``sigma + i Omega >= 0`` is equivalent to
    ``cx >= inv(cp)``, so every draw is physical.
    """
    cp = random_pd(rng, log_range)
    r = _rotation(rng.uniform(0.0, math.pi))
    extra = r @ np.diag(rng.uniform(0.0, noise, size=2)) @ r.T
    cx = np.linalg.inv(cp) + extra
    return BlockState(0.5 * (cx + cx.T), cp)


def symmetric_is_physical(a: float, c1: float, c2: float) -> bool:
    """After a balanced beam splitter a symmetric state is a product of
    single-mode states with variances ``(a+c1, a+c2)`` and ``(a-c1, a-c2)``."""
    return a > abs(c1) and a > abs(c2) and (a + c1) * (a + c2) >= 1.0 and (a - c1) * (a - c2) >= 1.0


def random_symmetric_params(rng: np.random.Generator, a_range: tuple[float, float] = (1.0, 5.0)) -> tuple[float, float, float]:
    while True:
        a = rng.uniform(*a_range)
        c1, c2 = rng.uniform(-a, a, size=2)
        if symmetric_is_physical(a, c1, c2):
            return float(a), float(c1), float(c2)


def random_symmetric_state(rng: np.random.Generator) -> CovarianceMatrix:
    return symmetric_state(*random_symmetric_params(rng))


def balanced_c_range(a: float, b: float) -> tuple[float, float]:
    """``(c_classical, c_max)``: the state is separable for
    ``c^2 <= (a-1)(b-1)`` and physical for ``c^2 <= (min-1)(max+1)``."""
    lo, hi = min(a, b), max(a, b)
    return math.sqrt(max((a - 1.0) * (b - 1.0), 0.0)), math.sqrt(max((lo - 1.0) * (hi + 1.0), 0.0))


def random_balanced_params(
    rng: np.random.Generator,
    ab_range: tuple[float, float] = (1.0, 5.0),
    entangled: bool = True,
) -> tuple[float, float, float]:
    """``a, b`` uniform in ``ab_range``; ``c`` uniform over the entangled
    (or the whole physical) interval."""
    while True:
        a, b = rng.uniform(*ab_range, size=2)
        c_sep, c_max = balanced_c_range(a, b)
        lo = c_sep if entangled else 0.0
        if c_max - lo > 1e-6:
            c = rng.uniform(lo, c_max)
            if c > lo and c > 0.0:
                return float(a), float(b), float(c)


def random_balanced_state(rng: np.random.Generator, entangled: bool = True) -> CovarianceMatrix:
    return balanced_state(*random_balanced_params(rng, entangled=entangled))


def random_pure_param(rng: np.random.Generator, z_range: tuple[float, float] = (0.1, 10.0), y_max: float = 3.0) -> PureStateParam:
    """``z`` with eigenvalues in ``z_range``, ``y`` symmetric with entries
    bounded by ``y_max``."""
    r = _rotation(rng.uniform(0.0, math.pi))
    z = r @ np.diag(rng.uniform(*z_range, size=2)) @ r.T
    y01 = rng.uniform(-y_max, y_max)
    y = np.array([[rng.uniform(-y_max, y_max), y01], [y01, rng.uniform(-y_max, y_max)]])
    return PureStateParam(z, y)


__all__ = [
    "random_pd",
    "random_block_state",
    "symmetric_is_physical",
    "random_symmetric_params",
    "random_symmetric_state",
    "balanced_c_range",
    "random_balanced_params",
    "random_balanced_state",
    "random_pure_param",
]
