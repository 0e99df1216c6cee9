"""Covariance matrices, symplectic operations and state classification.

Conventions
-----------
* Vacuum variance is 1 (``x = a + a^dag``).
* The canonical quadrature ordering is XPXP, ``(x1, p1, x2, p2, ...)``, and
  the symplectic form is ``Omega = (+) [[0, 1], [-1, 0]]``.  XXPP,
  ``(x1, x2, ..., p1, p2, ...)``, is only a view used for block algebra.
* Beam splitters mix modes ``i, j`` with ``[[cos t, sin t], [-sin t, cos t]]``
  acting identically on the x and p quadratures, so ``x_i' = cos t x_i +
  sin t x_j``.  ``t = pi/4`` is balanced and ``t = pi/2`` swaps the modes up
  to a sign.
* Two-mode squeezed vacuum ``tmsv(r)`` has x-correlation ``+sinh 2r`` and
  p-correlation ``-sinh 2r``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import (
    BadModeIndex,
    DimensionMismatch,
    HasCrossCorrelations,
    NonSymmetricError,
    NumericalFailure,
    ZNotPositiveDefinite,
)
from .numerics import eig_sym

EPS_PHYS = 1e-9
SYMMETRIZE_TOL = 1e-9
CLASSIFY_TOL = 1e-9
CROSS_TOL = 1e-10
SYMPLECTIC_TOL = 1e-10


class Ordering(str, enum.Enum):
    XPXP = "xpxp"
    XXPP = "xxpp"


def _xxpp_perm(n_modes: int) -> NDArray[np.int64]:
    """Indices selecting XXPP entries from an XPXP vector."""
    return np.concatenate([np.arange(0, 2 * n_modes, 2), np.arange(1, 2 * n_modes, 2)])


def _frozen(a: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class CovarianceMatrix:
    """Covariance matrix of a zero-mean Gaussian state.

    The input is symmetrized on construction; asymmetry above ``1e-9``
    raises :class:`NonSymmetricError`.
    """

    matrix: NDArray[np.float64]
    ordering: Ordering = Ordering.XPXP

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionMismatch(f"covariance matrix must be 2n x 2n, got {m.shape}")
        asym = float(np.max(np.abs(m - m.T)))
        if asym > SYMMETRIZE_TOL:
            raise NonSymmetricError(f"covariance matrix not symmetric (max asymmetry {asym:.3e})")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + m.T)))
        object.__setattr__(self, "ordering", Ordering(self.ordering))

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def xpxp(self) -> NDArray[np.float64]:
        if self.ordering is Ordering.XPXP:
            return self.matrix
        return reorder(self, Ordering.XPXP).matrix

    def xxpp(self) -> NDArray[np.float64]:
        if self.ordering is Ordering.XXPP:
            return self.matrix
        return reorder(self, Ordering.XXPP).matrix

    def __repr__(self) -> str:
        return f"CovarianceMatrix(ordering={self.ordering.value}, matrix={self.matrix.tolist()})"


@dataclass(frozen=True)
class BlockState:
    """State without x-p correlations, ``cx (+) cp`` in XXPP ordering."""

    cx: NDArray[np.float64]
    cp: NDArray[np.float64]

    def __post_init__(self):
        for name in ("cx", "cp"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (2, 2):
                raise DimensionMismatch(f"{name} must be 2x2, got {m.shape}")
            if abs(m[0, 1] - m[1, 0]) > SYMMETRIZE_TOL:
                raise NonSymmetricError(f"{name} not symmetric")
            object.__setattr__(self, name, _frozen(0.5 * (m + m.T)))

    def to_covariance(self) -> CovarianceMatrix:
        z = np.zeros((2, 2))
        full = np.block([[self.cx, z], [z, self.cp]])
        return reorder(CovarianceMatrix(full, Ordering.XXPP), Ordering.XPXP)


class OpKind(str, enum.Enum):
    PASSIVE = "passive"
    ACTIVE = "active"
    MIXED = "mixed"


@functools.lru_cache(maxsize=16)
def symplectic_form(n_modes: int) -> NDArray[np.float64]:
    """Block-diagonal symplectic form for ``n_modes`` modes (XPXP).

    The returned array is shared and read-only.
    """
    return _frozen(np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]])))


@dataclass(frozen=True)
class SymplecticOp:
    """Symplectic matrix acting on XPXP covariance matrices.

    ``kind`` is inferred when omitted: orthogonal matrices are passive.
    """

    matrix: NDArray[np.float64]
    n_modes: int = 0
    kind: OpKind | None = None
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
            raise DimensionMismatch(f"symplectic matrix must be 2n x 2n, got {m.shape}")
        n = m.shape[0] // 2
        if self.n_modes and self.n_modes != n:
            raise DimensionMismatch(f"n_modes={self.n_modes} but matrix is {m.shape}")
        om = symplectic_form(n)
        err = float(np.max(np.abs(m @ om @ m.T - om)))
        if err > SYMPLECTIC_TOL * max(1.0, float(np.max(np.abs(m))) ** 2):
            raise NumericalFailure(f"matrix is not symplectic (residual {err:.3e})")
        orthogonal = float(np.max(np.abs(m @ m.T - np.eye(2 * n)))) <= SYMPLECTIC_TOL
        kind = self.kind
        if kind is None:
            kind = OpKind.PASSIVE if orthogonal else OpKind.ACTIVE
        kind = OpKind(kind)
        if kind is OpKind.PASSIVE and not orthogonal:
            raise NumericalFailure("passive operation must be orthogonal")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "kind", kind)

    def __matmul__(self, other: "SymplecticOp") -> "SymplecticOp":
        """Composition; ``(a @ b)`` applies ``b`` first."""
        if self.n_modes != other.n_modes:
            raise DimensionMismatch("cannot compose operations on different mode counts")
        kinds = {self.kind, other.kind}
        kind = OpKind.PASSIVE if kinds == {OpKind.PASSIVE} else None
        label = " . ".join(s for s in (self.label, other.label) if s)
        return SymplecticOp(self.matrix @ other.matrix, self.n_modes, kind, label)

    def inverse(self) -> "SymplecticOp":
        om = symplectic_form(self.n_modes)
        return SymplecticOp(-om @ self.matrix.T @ om, self.n_modes, self.kind, f"inv({self.label})")


@dataclass(frozen=True)
class PureStateParam:
    z: NDArray[np.float64]
    y: NDArray[np.float64]

    def __post_init__(self):
        for name in ("z", "y"):
            m = np.array(getattr(self, name), dtype=float)
            if m.shape != (2, 2):
                raise DimensionMismatch(f"{name} must be 2x2")
            object.__setattr__(self, name, _frozen(0.5 * (m + m.T)))


class ClassKind(str, enum.Enum):
    SYMMETRIC = "symmetric"
    BALANCED = "balanced"
    BLOCK = "block"
    GENERAL = "general"


@dataclass(frozen=True)
class StateClass:
    """Classification result.

    ``params`` holds ``(a, c1, c2)`` for symmetric states, ``(a, b, c)`` for
    balanced correlated states and ``(a1, b1, c1, a2, b2, c2)`` for other
    block states.  A symmetric state that is also balanced keeps its
    symmetric parameters and sets ``balanced`` with ``balanced_params``.
    """

    kind: ClassKind
    params: tuple[float, ...] = ()
    balanced: bool = False
    balanced_params: tuple[float, ...] = ()


@dataclass(frozen=True)
class PhysicalityReport:
    is_physical: bool
    nu_minus: float
    nu_plus: float
    positive_definite: bool = field(default=True)


# --------------------------------------------------------------------------
# orderings, constructors


def reorder(cov: CovarianceMatrix, target: Ordering | str) -> CovarianceMatrix:
    target = Ordering(target)
    if cov.ordering is target:
        return cov
    perm = _xxpp_perm(cov.n_modes)
    m = cov.matrix
    if target is Ordering.XXPP:
        out = m[np.ix_(perm, perm)]
    else:
        inv = np.argsort(perm)
        out = m[np.ix_(inv, inv)]
    return CovarianceMatrix(out, target)


def as_covariance(m: CovarianceMatrix | ArrayLike, ordering: Ordering | str = Ordering.XPXP) -> CovarianceMatrix:
    if isinstance(m, CovarianceMatrix):
        return m
    return CovarianceMatrix(np.asarray(m, dtype=float), Ordering(ordering))


def vacuum(n_modes: int = 2) -> CovarianceMatrix:
    return CovarianceMatrix(np.eye(2 * n_modes))


def tmsv(r: float) -> CovarianceMatrix:
    ch, sh = math.cosh(2 * r), math.sinh(2 * r)
    return from_blocks([[ch, sh], [sh, ch]], [[ch, -sh], [-sh, ch]])


def from_blocks(cx: ArrayLike, cp: ArrayLike) -> CovarianceMatrix:
    return BlockState(np.asarray(cx, float), np.asarray(cp, float)).to_covariance()


def symmetric_state(a: float, c1: float, c2: float) -> CovarianceMatrix:
    return from_blocks([[a, c1], [c1, a]], [[a, c2], [c2, a]])


def balanced_state(a: float, b: float, c: float) -> CovarianceMatrix:
    return from_blocks([[a, c], [c, b]], [[a, -c], [-c, b]])


# --------------------------------------------------------------------------
# spectra and physicality


def _mode_blocks(m: NDArray[np.float64]):
    return m[:2, :2], m[2:, 2:], m[:2, 2:]


def _det2(m) -> float:
    return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def symplectic_eigenvalues_invariants(cov: CovarianceMatrix) -> tuple[float, float]:
    """Two-mode symplectic spectrum from ``Delta = det A + det B + 2 det C``
    and ``det sigma``.

    Loses about ``sqrt(eps)`` relative accuracy when the two eigenvalues
    nearly coincide (pure states).
    """
    if cov.n_modes != 2:
        raise DimensionMismatch("invariant formula needs a two-mode state")
    m = cov.xpxp()
    a, b, c = _mode_blocks(m)
    delta = _det2(a) + _det2(b) + 2.0 * _det2(c)
    det = float(np.linalg.det(m))
    disc = delta * delta - 4.0 * det
    if disc < -1e-9 * max(1.0, delta * delta):
        raise NumericalFailure(f"inconsistent invariants (Delta^2 - 4 det = {disc:.3e})")
    root = math.sqrt(max(disc, 0.0))
    hi2 = 0.5 * (delta + root)
    lo2 = det / hi2 if hi2 > 0 and det > 0 else 0.5 * (delta - root)
    return (math.sqrt(max(lo2, 0.0)), math.sqrt(max(hi2, 0.0)))


def symplectic_eigenvalues(cov: CovarianceMatrix) -> tuple[float, ...]:
    """Symplectic spectrum in ascending order.

    Positive-definite inputs use the symmetric eigenproblem of ``K^T K``
    with ``K = sigma^(1/2) Omega sigma^(1/2)``; otherwise the two-mode
    invariants are used. That eigenproblem resolves small eigenvalues only
    to about ``eps * |sigma|`` absolute, so for two modes the smaller one is
    recovered from ``nu_- nu_+ = sqrt(det sigma)`` instead.
    """
    m = cov.xpxp()
    w, v = np.linalg.eigh(m)
    if w[0] <= 0.0:
        if cov.n_modes == 2:
            return symplectic_eigenvalues_invariants(cov)
        raise NumericalFailure("symplectic spectrum needs a positive-definite matrix")
    sq = (v * np.sqrt(w)) @ v.T
    k = sq @ symplectic_form(cov.n_modes) @ sq
    nu2 = np.linalg.eigvalsh(k.T @ k)[::2]
    nus = [math.sqrt(max(float(x), 0.0)) for x in nu2]
    if cov.n_modes == 2 and nus[1] > 0.0:
        det = float(np.linalg.det(m))
        if det > 0.0:
            nus[0] = min(math.sqrt(det) / nus[1], nus[1])
    return tuple(nus)


def validate_physical(cov: CovarianceMatrix) -> PhysicalityReport:
    m = cov.matrix
    pd = bool(eig_sym(m)[0] > 0.0) if m.shape[0] <= 6 else bool(np.linalg.eigvalsh(m)[0] > 0.0)
    nus = symplectic_eigenvalues(cov)
    ok = pd and nus[0] >= 1.0 - EPS_PHYS
    return PhysicalityReport(ok, nus[0], nus[-1], pd)


def is_physical(cov: CovarianceMatrix) -> bool:
    return validate_physical(cov).is_physical


# --------------------------------------------------------------------------
# operations


def partial_transpose(cov: CovarianceMatrix, mode: int | None = None) -> CovarianceMatrix:
    """Flip the momentum of ``mode`` (default: the last mode)."""
    n = cov.n_modes
    mode = n - 1 if mode is None else mode
    if not 0 <= mode < n:
        raise BadModeIndex(f"mode {mode} out of range for {n} modes")
    flip = np.ones(2 * n)
    flip[2 * mode + 1] = -1.0
    m = cov.xpxp() * np.outer(flip, flip)
    return CovarianceMatrix(m)


def apply_symplectic(cov: CovarianceMatrix, op: SymplecticOp) -> CovarianceMatrix:
    if op.n_modes != cov.n_modes:
        raise DimensionMismatch(f"operation acts on {op.n_modes} modes, state has {cov.n_modes}")
    s = op.matrix
    return CovarianceMatrix(s @ cov.xpxp() @ s.T)


def _check_mode(i: int, n_modes: int):
    if not (isinstance(i, (int, np.integer)) and 0 <= i < n_modes):
        raise BadModeIndex(f"mode {i} out of range for {n_modes} modes")


def beam_splitter(theta: float, modes: tuple[int, int] = (0, 1), n_modes: int = 2) -> SymplecticOp:
    i, j = modes
    _check_mode(i, n_modes)
    _check_mode(j, n_modes)
    if i == j:
        raise BadModeIndex("beam splitter needs two distinct modes")
    c, s = math.cos(theta), math.sin(theta)
    m = np.eye(2 * n_modes)
    for q in (0, 1):
        ii, jj = 2 * i + q, 2 * j + q
        m[ii, ii], m[ii, jj] = c, s
        m[jj, ii], m[jj, jj] = -s, c
    return SymplecticOp(m, n_modes, OpKind.PASSIVE, f"B{i}{j}({theta:.6g})")


def phase_rotation(phi: float, mode: int = 0, n_modes: int = 2) -> SymplecticOp:
    _check_mode(mode, n_modes)
    c, s = math.cos(phi), math.sin(phi)
    m = np.eye(2 * n_modes)
    k = 2 * mode
    m[k : k + 2, k : k + 2] = [[c, s], [-s, c]]
    return SymplecticOp(m, n_modes, OpKind.PASSIVE, f"R{mode}({phi:.6g})")


def single_mode_squeezer(r: float, mode: int = 0, n_modes: int = 2) -> SymplecticOp:
    _check_mode(mode, n_modes)
    m = np.eye(2 * n_modes)
    m[2 * mode, 2 * mode] = math.exp(r)
    m[2 * mode + 1, 2 * mode + 1] = math.exp(-r)
    kind = OpKind.PASSIVE if r == 0 else OpKind.ACTIVE
    return SymplecticOp(m, n_modes, kind, f"S{mode}({r:.6g})")


def identity_op(n_modes: int) -> SymplecticOp:
    return SymplecticOp(np.eye(2 * n_modes), n_modes, OpKind.PASSIVE, "I")


def direct_sum_vacuum(cov: CovarianceMatrix, n: int) -> CovarianceMatrix:
    if n < 0:
        raise DimensionMismatch("number of ancilla modes must be >= 0")
    if n == 0:
        return cov
    m = cov.xpxp()
    k = m.shape[0]
    out = np.eye(k + 2 * n)
    out[:k, :k] = m
    return CovarianceMatrix(out)


def partial_trace(cov: CovarianceMatrix, keep: Sequence[int]) -> CovarianceMatrix:
    keep = list(keep)
    if not keep:
        raise BadModeIndex("keep must name at least one mode")
    for i in keep:
        _check_mode(i, cov.n_modes)
    idx = np.array([2 * i + q for i in keep for q in (0, 1)])
    return CovarianceMatrix(cov.xpxp()[np.ix_(idx, idx)])


def to_block(cov: CovarianceMatrix) -> BlockState:
    if cov.n_modes != 2:
        raise DimensionMismatch("block form is defined for two-mode states")
    m = cov.xxpp()
    coupling = float(np.max(np.abs(m[:2, 2:])))
    if coupling > CROSS_TOL:
        raise HasCrossCorrelations(coupling)
    return BlockState(m[:2, :2], m[2:, 2:])


def is_block(cov: CovarianceMatrix) -> bool:
    return cov.n_modes == 2 and float(np.max(np.abs(cov.xxpp()[:2, 2:]))) <= CROSS_TOL


def classify(cov: CovarianceMatrix) -> StateClass:
    if not is_block(cov):
        return StateClass(ClassKind.GENERAL)
    blk = to_block(cov)
    a1, b1, c1 = blk.cx[0, 0], blk.cx[1, 1], blk.cx[0, 1]
    a2, b2, c2 = blk.cp[0, 0], blk.cp[1, 1], blk.cp[0, 1]
    tol = CLASSIFY_TOL
    balanced = abs(a1 - a2) <= tol and abs(b1 - b2) <= tol and abs(c1 + c2) <= tol and c1 > tol
    bparams = (float(a1), float(b1), float(c1)) if balanced else ()
    if max(abs(a1 - b1), abs(a1 - a2), abs(a1 - b2)) <= tol:
        return StateClass(ClassKind.SYMMETRIC, (float(a1), float(c1), float(c2)), balanced, bparams)
    if balanced:
        return StateClass(ClassKind.BALANCED, bparams, True, bparams)
    return StateClass(ClassKind.BLOCK, tuple(float(v) for v in (a1, b1, c1, a2, b2, c2)))


def pure_from_zy(p: PureStateParam) -> CovarianceMatrix:
    z, y = p.z, p.y
    w = eig_sym(z)
    if w[0] <= 0.0:
        raise ZNotPositiveDefinite(f"z has eigenvalue {w[0]:.3e}")
    zi = np.linalg.inv(z)
    full = np.block([[z, z @ y], [y @ z, y @ z @ y + zi]])
    return reorder(CovarianceMatrix(full, Ordering.XXPP), Ordering.XPXP)
