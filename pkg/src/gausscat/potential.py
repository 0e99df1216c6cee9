"""EoF-potential: upper bound, closed forms and passive-circuit search.

The EoF-potential of a two-mode state is the largest EoF reachable by a
passive (energy-conserving) linear-optical circuit acting on the state plus
vacuum ancillas, followed by discarding the ancillas. It is bounded below
by the EoF of every candidate circuit output and above by ``h(exp(-S))``
where ``S`` is the squeezing of formation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import NDArray

from .errors import UnsupportedClass, Unphysical
from .gaussian import (
    CROSS_TOL,
    BlockState,
    ClassKind,
    CovarianceMatrix,
    SymplecticOp,
    apply_symplectic,
    beam_splitter,
    classify,
    direct_sum_vacuum,
    identity_op,
    is_block,
    partial_trace,
    phase_rotation,
    validate_physical,
)
from .measures import aux_h, eof, eof_balanced, eof_block, sof_dispatch
from .numerics import golden_minimize

CHAIN_TOL = 1e-7
IMPROVE_TOL = 1e-9
MAX_CYCLES = 50
# value error is quadratic in the angle error near a maximum
ANGLE_TOL = 1e-7
TIE_TOL = 1e-10
# EoF of rotated states carries roundoff at this level
NOISE_TOL = 1e-12

FAMILY_PASSIVE = "passive-2"
FAMILY_ANCILLA = "ancilla-1"


@dataclass(frozen=True)
class CircuitSpec:
    """A point in one of the two searched circuit families.

    ``passive-2`` is ``B(theta) R_0(delta)`` on the two modes: a phase
    ``delta`` on mode 0 followed by a beam splitter. ``ancilla-1`` is
    ``[B(theta2)+1][1+B(pi/2)][B(theta1)+1]`` on the two modes plus one
    vacuum, optionally with the two system modes swapped right after the
    first beam splitter. The swap is equivalent to ``theta1 + pi/2`` up to
    a sign on the discarded mode, so the search leaves it off.
    """

    family: str
    params: tuple[float, ...]
    swap: bool = False

    @property
    def n_modes(self) -> int:
        return 2 if self.family == FAMILY_PASSIVE else 3

    def op(self) -> SymplecticOp:
        if self.family == FAMILY_PASSIVE:
            theta, delta = self.params
            return beam_splitter(theta) @ phase_rotation(delta, 0)
        theta1, theta2 = self.params
        first = beam_splitter(theta1, (0, 1), 3)
        if self.swap:
            first = mode_swap(0, 1, 3) @ first
        return beam_splitter(theta2, (0, 1), 3) @ beam_splitter(math.pi / 2, (1, 2), 3) @ first

    def apply(self, cov: CovarianceMatrix) -> CovarianceMatrix:
        if self.family == FAMILY_PASSIVE:
            return apply_symplectic(cov, self.op())
        big = apply_symplectic(direct_sum_vacuum(cov, 1), self.op())
        return partial_trace(big, [0, 1])

    def apply_fast(self, m: NDArray[np.float64]) -> NDArray[np.float64]:
        """``apply`` on a raw XPXP matrix, skipping operation validation."""
        if self.family == FAMILY_PASSIVE:
            theta, delta = self.params
            c, s = math.cos(theta), math.sin(theta)
            cd, sd = math.cos(delta), math.sin(delta)
            r = np.array([[cd, sd], [-sd, cd]])
            k = np.block([[c * r, s * np.eye(2)], [-s * r, c * np.eye(2)]])
            return k @ m @ k.T
        theta1, theta2 = self.params
        c1, s1 = math.cos(theta1), math.sin(theta1)
        c2, s2 = math.cos(theta2), math.sin(theta2)
        b1 = np.array([[c1, s1, 0.0], [-s1, c1, 0.0], [0.0, 0.0, 1.0]])
        if self.swap:
            b1 = b1[[1, 0, 2]]
        mid = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]])
        b2 = np.array([[c2, s2, 0.0], [-s2, c2, 0.0], [0.0, 0.0, 1.0]])
        u = (b2 @ mid @ b1)[:2]
        k = np.kron(u, np.eye(2))
        big = np.eye(6)
        big[:4, :4] = m
        return k @ big @ k.T

    def describe(self) -> dict:
        if self.family == FAMILY_PASSIVE:
            theta, delta = self.params
            params = {"theta": theta, "delta": delta}
        else:
            theta1, theta2 = self.params
            params = {"theta1": theta1, "theta_mid": math.pi / 2, "theta2": theta2, "swap": self.swap}
        return {"family": self.family, "n_modes": self.n_modes, "params": params}


@dataclass(frozen=True)
class PotentialReport:
    """Bounds on the EoF-potential, all in bits.

    ``upper`` is ``None`` for states with cross-quadrature correlations,
    where the squeezing of formation is not available; ``gap`` is then
    ``None`` as well.
    """

    lower: float
    upper: float | None
    closed: float | None
    best_circuit: CircuitSpec | None
    gap: float | None
    chain_ok: bool
    by_family: dict = field(default_factory=dict)


def mode_swap(i: int, j: int, n_modes: int) -> SymplecticOp:
    """Permutation exchanging modes ``i`` and ``j``."""
    perm = list(range(n_modes))
    perm[i], perm[j] = perm[j], perm[i]
    m = np.zeros((2 * n_modes, 2 * n_modes))
    for k, src in enumerate(perm):
        m[2 * k, 2 * src] = 1.0
        m[2 * k + 1, 2 * src + 1] = 1.0
    return SymplecticOp(m, n_modes, None, f"SWAP{i}{j}")


def potential_upper_bound(cov: CovarianceMatrix) -> float:
    """``h(exp(-S))`` in bits; zero for classical states."""
    s = sof_dispatch(cov).value
    return aux_h(math.exp(-s)) if s > 0.0 else 0.0


def potential_closed(cov: CovarianceMatrix) -> float:
    """Exact EoF-potential for symmetric and balanced correlated states."""
    cls = classify(cov)
    if cls.kind is ClassKind.SYMMETRIC:
        return potential_upper_bound(cov)
    if cls.kind is ClassKind.BALANCED:
        return eof_balanced(*cls.params).value
    raise UnsupportedClass(
        f"no closed-form EoF-potential for class {cls.kind.value}; use potential_search for bounds"
    )


def _symmetric_lambdas(a: float, c1: float, c2: float) -> list[tuple[float, int]]:
    # mode 0 after B(pi/4) carries (a+c1, a+c2), mode 1 carries (a-c1, a-c2)
    return sorted([(a + c1, 0), (a + c2, 0), (a - c1, 1), (a - c2, 1)])


def symmetric_saturating_circuit(cov: CovarianceMatrix) -> tuple[CovarianceMatrix, SymplecticOp]:
    """Apply the one-ancilla circuit that reaches ``h(exp(-S))``.

    The circuit is only needed when exactly one of the four local variances
    after a balanced beam splitter lies below one. In every other case the
    state already saturates the bound and the identity is returned.
    """
    cls = classify(cov)
    if cls.kind is not ClassKind.SYMMETRIC:
        raise UnsupportedClass("the saturating circuit is defined for symmetric states only")
    lam = _symmetric_lambdas(*cls.params)
    if not (lam[0][0] < 1.0 <= lam[1][0]):
        return cov, identity_op(2)
    spec = CircuitSpec(FAMILY_ANCILLA, (math.pi / 4, math.pi / 4), swap=lam[0][1] == 1)
    return spec.apply(cov), spec.op()


def _safe_eof(cov: CovarianceMatrix) -> float:
    try:
        return eof(cov).value
    except Unphysical:
        return -math.inf


def _search_eof(m: NDArray[np.float64]) -> float:
    """EoF of a circuit output given as a raw XPXP matrix.

    Block outputs go straight to the ellipse solver, skipping the
    classification that :func:`eof` performs; everything else takes the
    general route.
    """
    if max(abs(m[0, 1]), abs(m[0, 3]), abs(m[2, 1]), abs(m[2, 3])) <= CROSS_TOL:
        try:
            return eof_block(BlockState(m[0::2, 0::2], m[1::2, 1::2])).value
        except Unphysical:
            return -math.inf
    return _safe_eof(CovarianceMatrix(m))


def _refine(
    value_of: Callable[[tuple[float, ...]], float],
    x: tuple[float, ...],
    fx: float,
    step: float,
    ceiling: float,
) -> tuple[tuple[float, ...], float]:
    """Cyclic coordinate golden-section ascent around ``x``.

    Stops early once ``fx`` reaches ``ceiling`` (a known upper bound).
    """
    x = list(x)
    for _ in range(MAX_CYCLES):
        if fx >= ceiling - IMPROVE_TOL:
            break
        start = fx
        for k in range(len(x)):
            def g(t, k=k):
                y = list(x)
                y[k] = t
                return -value_of(tuple(y))

            res = golden_minimize(g, (x[k] - step, x[k] + step), tol=ANGLE_TOL)
            if -res.value > fx + NOISE_TOL:
                x[k], fx = float(res.argmin[0]), -res.value
        if fx - start < IMPROVE_TOL:
            break
    return tuple(x), fx


def _search_family(
    cov: CovarianceMatrix,
    family: str,
    grid: int,
    restarts: int,
    seeds: list[CircuitSpec],
    ceiling: float,
) -> tuple[CircuitSpec, float]:
    angles = [math.pi * i / grid for i in range(grid)]
    step = math.pi / grid
    cache: dict[tuple[float, ...], float] = {}

    m = cov.xpxp()

    def value_of(p):
        if p not in cache:
            cache[p] = _search_eof(CircuitSpec(family, p).apply_fast(m))
        return cache[p]

    scored = [(value_of((u, v)), (u, v)) for u in angles for v in angles]
    scored.sort(key=lambda t: (-t[0], t[1]))
    starts = [p for _, p in scored[:restarts]]
    starts += [s.params for s in seeds if s.family == family and s.params not in starts]
    found = [_refine(value_of, p, value_of(p), step, ceiling) for p in starts]
    q, fq = _pick(found)
    return CircuitSpec(family, q), fq


def _pick(found):
    """Best value; among values within ``TIE_TOL`` of it, the
    lexicographically smallest parameter vector."""
    top = max(v for _, v in found)
    return min((item for item in found if item[1] >= top - TIE_TOL), key=lambda item: item[0])


def potential_search(
    cov: CovarianceMatrix,
    grid: int = 32,
    restarts: int = 2,
    ancillas: int = 1,
) -> PotentialReport:
    """Lower-bound the EoF-potential by searching two circuit families.

    Each family is scanned on a ``grid x grid`` mesh of its two angles over
    ``[0, pi)``. The best ``restarts`` mesh points, together with the
    identity and the symmetric saturating circuit, are refined by cyclic
    golden-section line searches until an entire cycle gains less than
    ``1e-9`` bits or the upper bound is reached. ``ancillas=0`` restricts
    the search to two-mode passive circuits.
    """
    if cov.n_modes != 2:
        raise UnsupportedClass("the EoF-potential is implemented for two-mode states only")
    if ancillas not in (0, 1):
        raise UnsupportedClass("ancilla budget must be 0 or 1")
    rep = validate_physical(cov)
    if not rep.is_physical:
        raise Unphysical(rep.nu_minus)

    seeds = [
        CircuitSpec(FAMILY_PASSIVE, (0.0, 0.0)),
        CircuitSpec(FAMILY_ANCILLA, (math.pi / 4, math.pi / 4)),
        CircuitSpec(FAMILY_ANCILLA, (3 * math.pi / 4, math.pi / 4)),
    ]
    upper = potential_upper_bound(cov) if is_block(cov) else None
    ceiling = math.inf if upper is None else upper
    families = [FAMILY_PASSIVE] + ([FAMILY_ANCILLA] if ancillas == 1 else [])
    by_family = {}
    found = []
    for fam in families:
        spec, val = _search_family(cov, fam, grid, restarts, seeds, ceiling)
        by_family[fam] = val
        found.append(((families.index(fam),), val, spec))
    # ties go to the family without ancilla
    top = max(v for _, v, _ in found)
    _, lower, best = min((f for f in found if f[1] >= top - TIE_TOL), key=lambda f: f[0])
    lower = max(lower, 0.0)

    try:
        closed = potential_closed(cov)
    except UnsupportedClass:
        closed = None
    chain_ok = True
    if upper is not None:
        chain_ok = lower <= upper + CHAIN_TOL
    if closed is not None:
        chain_ok = chain_ok and lower <= closed + CHAIN_TOL
        if upper is not None:
            chain_ok = chain_ok and closed <= upper + 1e-10
    gap = None if upper is None else upper - lower
    return PotentialReport(lower, upper, closed, best, gap, chain_ok, by_family)


__all__ = [
    "CircuitSpec",
    "PotentialReport",
    "FAMILY_PASSIVE",
    "FAMILY_ANCILLA",
    "mode_swap",
    "potential_upper_bound",
    "potential_closed",
    "symmetric_saturating_circuit",
    "potential_search",
]
