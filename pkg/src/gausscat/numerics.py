"""Small numerical kernels: symmetric eigensolver, 1D/ND minimizers, seeded RNG."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize

from .errors import BadBracket, NonSymmetricError

SYMMETRY_TOL = 1e-9
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MinimizeResult:
    argmin: NDArray[np.float64]
    value: float
    iterations: int
    converged: bool


def eig_sym(m: ArrayLike, vectors: bool = False):
    """Eigenvalues of a small real symmetric matrix in ascending order.

    The 2x2 case uses the closed form; larger sizes go through LAPACK.
    With ``vectors=True`` a ``(values, vectors)`` pair is returned, the
    columns of ``vectors`` being the normalized eigenvectors.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NonSymmetricError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > SYMMETRY_TOL * scale:
        raise NonSymmetricError(f"matrix not symmetric (max asymmetry {asym:.3e})")
    m = 0.5 * (m + m.T)
    if m.shape == (2, 2):
        a, b, d = m[0, 0], m[0, 1], m[1, 1]
        mean = 0.5 * (a + d)
        rad = math.hypot(0.5 * (a - d), b)
        vals = np.array([mean - rad, mean + rad])
        if not vectors:
            return vals
        if rad == 0.0:
            return vals, np.eye(2)
        # eigenvector of the larger eigenvalue, angle of the principal axis
        theta = 0.5 * math.atan2(2.0 * b, a - d)
        c, s = math.cos(theta), math.sin(theta)
        vecs = np.array([[-s, c], [c, s]])
        return vals, vecs
    if vectors:
        return np.linalg.eigh(m)
    return np.linalg.eigvalsh(m)


def golden_minimize(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-12,
    max_iter: int = 500,
) -> MinimizeResult:
    """Golden-section search for a minimum of ``f`` on ``[lo, hi]``.

    Stops once the bracket is narrower than ``tol``. The returned point is
    the best of the final interior probes, so ``value`` never exceeds the
    first probe.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise BadBracket(f"invalid bracket [{lo}, {hi}]")
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    it = 0
    while hi - lo > tol and it < max_iter:
        it += 1
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        if x2 <= x1:
            # interval at floating-point resolution
            break
    x, fx = (x1, f1) if f1 <= f2 else (x2, f2)
    return MinimizeResult(np.array([x]), float(fx), it, hi - lo <= tol or x2 <= x1)


def scan_golden(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    points: int = 720,
    tol: float = 1e-12,
    periodic: bool = True,
    values: NDArray[np.float64] | None = None,
) -> MinimizeResult:
    """Uniform scan followed by golden refinement on the best bracket.

    ``values`` may carry precomputed scan values (vectorized callers).
    """
    n = points
    step = (hi - lo) / n if periodic else (hi - lo) / (n - 1)
    grid = lo + step * np.arange(n)
    if values is None:
        values = np.array([f(float(t)) for t in grid])
    k = int(np.argmin(values))
    if periodic:
        a, b = grid[k] - step, grid[k] + step
    else:
        a, b = grid[max(k - 1, 0)], grid[min(k + 1, n - 1)]
    res = golden_minimize(f, (a, b), tol=tol)
    if values[k] < res.value:
        return MinimizeResult(np.array([grid[k]]), float(values[k]), res.iterations, res.converged)
    return res


def nelder_minimize(
    f: Callable[[NDArray[np.float64]], float],
    start: Sequence[float],
    scale: float | Sequence[float] = 0.1,
    tol: float = 1e-10,
    max_iter: int = 20000,
) -> MinimizeResult:
    """Derivative-free Nelder-Mead minimization.

    ``scale`` sets the initial simplex edge along every coordinate.
    Exhausting ``max_iter`` returns the best point found with
    ``converged=False``.
    """
    x0 = np.asarray(start, dtype=float)
    k = x0.size
    steps = np.broadcast_to(np.asarray(scale, dtype=float), (k,))
    simplex = np.vstack([x0] + [x0 + steps[i] * np.eye(k)[i] for i in range(k)])
    f0 = float(f(x0))
    res = minimize(
        f,
        x0,
        method="Nelder-Mead",
        options={
            "initial_simplex": simplex,
            "xatol": tol,
            "fatol": tol,
            "maxiter": max_iter,
            "maxfev": 2 * max_iter,
            "adaptive": k > 2,
        },
    )
    x, val = np.asarray(res.x, dtype=float), float(res.fun)
    if val > f0:
        x, val = x0, f0
    return MinimizeResult(x, val, int(res.nit), bool(res.success))


def slsqp_minimize(
    f: Callable[[NDArray[np.float64]], float],
    start: Sequence[float],
    ineq: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    tol: float = 1e-12,
    max_iter: int = 500,
) -> MinimizeResult:
    """Smooth local minimization subject to ``ineq(x) >= 0`` (SLSQP).

    Gradients are finite differences, so ``f`` and ``ineq`` should be
    smooth near the solution. Constraints hold only to the solver's own
    tolerance; callers needing exact feasibility must check the result.
    """
    x0 = np.asarray(start, dtype=float)
    res = minimize(
        f,
        x0,
        method="SLSQP",
        constraints=[{"type": "ineq", "fun": ineq}],
        options={"ftol": tol, "maxiter": max_iter},
    )
    return MinimizeResult(np.asarray(res.x, dtype=float), float(res.fun), int(res.nit), bool(res.success))


def seeded_rng(seed: int | None = 0) -> np.random.Generator:
    """Deterministic generator (PCG64) for a given integer seed."""
    return np.random.Generator(np.random.PCG64(seed))
