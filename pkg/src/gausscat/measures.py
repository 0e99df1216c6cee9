"""Entanglement of formation (bits) and squeezing of formation (nats).

Block states ``cx (+) cp`` reduce both measures to a search over pure
states ``pi(z, 0)`` with ``inv(cp) <= z <= cx``.  Writing a 2x2 symmetric
matrix as ``[[m0 + m1, m2], [m2, m0 - m1]]`` maps it to the point
``(m1, m2, m0)``; the two Loewner constraints become an upward cone with
apex ``inv(cp)`` and a downward cone with apex ``cx``, both with 45 degree
walls.  Their surfaces meet on an ellipse whose foci are the in-plane
projections of the two apexes.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .errors import (
    DegenerateGeometry,
    DomainError,
    GaussCatError,
    NoFeasiblePoint,
    NotPure,
    RegimeViolation,
    UnsupportedClass,
    Unphysical,
)
from .gaussian import (
    EPS_PHYS,
    BlockState,
    ClassKind,
    CovarianceMatrix,
    PureStateParam,
    balanced_state,
    classify,
    partial_transpose,
    symplectic_eigenvalues,
    symplectic_form,
    to_block,
    validate_physical,
)
from .numerics import eig_sym, nelder_minimize, scan_golden, seeded_rng, slsqp_minimize

PURITY_TOL = 1e-6
CLASSICAL_TOL = 1e-9
FEASIBLE_TOL = 1e-9
SCAN_POINTS = 720
POLISH_RUNS = 3
RETRACT_STEPS = 60
POLISH_ROUNDS = 6
INTERIOR_MARGIN = 1e-6
_PRINCIPAL = [list(c) for k in range(1, 5) for c in itertools.combinations(range(4), k)]
LN2 = math.log(2.0)


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    ELLIPSE_1D = "ellipse_1d"
    CONVEX_ROOF_ND = "convex_roof_nd"
    # optimum at a cone apex or at the unconstrained minimizer of one cone
    VERTEX = "vertex"


@dataclass(frozen=True)
class MeasureResult:
    value: float
    method: Method
    witness: Any = None
    info: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value


def nats_to_bits(v: float) -> float:
    return v / LN2


def bits_to_nats(v: float) -> float:
    return v * LN2


# --------------------------------------------------------------------------
# auxiliary function and pure-state measures


def aux_h(x: float) -> float:
    """Entropy (bits) of a pure two-mode state whose partial transpose has
    smallest symplectic eigenvalue ``x``; zero for ``x >= 1``."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"aux_h needs x > 0, got {x}")
    if x >= 1.0:
        return 0.0
    plus = (1.0 + x) ** 2 / (4.0 * x)
    minus = (1.0 - x) ** 2 / (4.0 * x)
    # plus - minus = 1, so plus*log(plus) - minus*log(minus) equals
    # log(plus) + minus*log1p(1/minus); this avoids cancelling two large terms
    out = math.log2(plus)
    if minus > 0.0:
        out += minus * math.log1p(1.0 / minus) / LN2
    return max(out, 0.0)


def _require_pure(pi: CovarianceMatrix) -> tuple[float, float]:
    nus = symplectic_eigenvalues(pi)
    if max(abs(n - 1.0) for n in nus) > PURITY_TOL:
        raise NotPure(f"state is not pure (symplectic eigenvalues {nus})")
    return nus


def entropy_of_entanglement(pi: CovarianceMatrix) -> MeasureResult:
    _require_pure(pi)
    nu = symplectic_eigenvalues(partial_transpose(pi))[0]
    return MeasureResult(aux_h(nu) if nu < 1.0 else 0.0, Method.CLOSED_FORM, info={"nu_pt": nu})


def sof_pure(pi: CovarianceMatrix) -> MeasureResult:
    """Total squeezing ``sum |r_i|`` of a pure state, from its two smallest
    ordinary eigenvalues."""
    _require_pure(pi)
    lam = eig_sym(pi.xpxp())
    return MeasureResult(-0.5 * math.log(lam[0] * lam[1]), Method.CLOSED_FORM)


def _sof_of_z(z: NDArray[np.float64]) -> float:
    lam = eig_sym(z)
    return 0.5 * (abs(math.log(lam[0])) + abs(math.log(lam[1])))


# --------------------------------------------------------------------------
# cone geometry


def cone_coords(m: NDArray[np.float64]) -> tuple[float, float, float]:
    """``(m1, m2, m0)`` with ``m = [[m0 + m1, m2], [m2, m0 - m1]]``."""
    return (0.5 * (m[0, 0] - m[1, 1]), float(m[0, 1]), 0.5 * (m[0, 0] + m[1, 1]))


def from_cone_coords(m1: float, m2: float, m0: float) -> NDArray[np.float64]:
    return np.array([[m0 + m1, m2], [m2, m0 - m1]])


@dataclass(frozen=True)
class EllipseParam:
    """Intersection of the two cone surfaces.

    ``x_focus``/``p_focus`` are the in-plane coordinates of the apexes of
    ``cx`` and ``inv(cp)``; ``x0``/``p0`` their heights.  ``gamma`` is the
    angle of the focal axis, ``r1``/``r2`` the semi-axes.
    """

    gamma: float
    r1: float
    r2: float
    center: tuple[float, float]
    x_focus: tuple[float, float]
    p_focus: tuple[float, float]
    x0: float
    p0: float

    @property
    def foci(self):
        return self.x_focus, self.p_focus

    @property
    def apex_heights(self):
        return self.x0, self.p0

    def __post_init__(self):
        object.__setattr__(self, "_axis", (math.cos(self.gamma), math.sin(self.gamma)))

    def point(self, phi):
        """``(z1, z2, z0)`` on the ellipse; accepts scalars or arrays."""
        cg, sg = self._axis
        if isinstance(phi, np.ndarray):
            sp, cpp = np.sin(phi), np.cos(phi)
            z1 = self.center[0] + self.r1 * cg * sp - self.r2 * sg * cpp
            z2 = self.center[1] + self.r1 * sg * sp + self.r2 * cg * cpp
            z0 = self.x0 - np.hypot(self.x_focus[0] - z1, self.x_focus[1] - z2)
            return z1, z2, z0
        sp, cpp = math.sin(phi), math.cos(phi)
        z1 = self.center[0] + self.r1 * cg * sp - self.r2 * sg * cpp
        z2 = self.center[1] + self.r1 * sg * sp + self.r2 * cg * cpp
        z0 = self.x0 - math.hypot(self.x_focus[0] - z1, self.x_focus[1] - z2)
        return z1, z2, z0

    def z_matrix(self, phi: float) -> NDArray[np.float64]:
        return from_cone_coords(*self.point(phi))

    def residuals(self, phi) -> tuple[Any, Any]:
        """Distances of ``z(phi)`` from the two cone surfaces."""
        z1, z2, z0 = self.point(phi)
        up = (self.x0 - z0) - np.hypot(self.x_focus[0] - z1, self.x_focus[1] - z2)
        down = (z0 - self.p0) - np.hypot(z1 - self.p_focus[0], z2 - self.p_focus[1])
        return up, down


def _build_ellipse(cx: NDArray[np.float64], cp_inv: NDArray[np.float64]) -> EllipseParam:
    x1, x2, x0 = cone_coords(cx)
    p1, p2, p0 = cone_coords(cp_inv)
    r1 = 0.5 * (x0 - p0)
    half_sep2 = 0.25 * ((x1 - p1) ** 2 + (x2 - p2) ** 2)
    r2sq = r1 * r1 - half_sep2
    if r2sq < -1e-12 or r1 < -1e-12:
        raise DegenerateGeometry(f"cone apexes are not nested (r2^2 = {r2sq:.3e}); state is unphysical")
    gamma = math.atan2(x2 - p2, x1 - p1)
    return EllipseParam(
        gamma=gamma,
        r1=max(r1, 0.0),
        r2=math.sqrt(max(r2sq, 0.0)),
        center=(0.5 * (x1 + p1), 0.5 * (x2 + p2)),
        x_focus=(x1, x2),
        p_focus=(p1, p2),
        x0=x0,
        p0=p0,
    )


def _straddles(ev) -> bool:
    return ev[0] < 1.0 - CLASSICAL_TOL and ev[1] > 1.0 + CLASSICAL_TOL


def ellipse_parametrize(s: BlockState) -> EllipseParam:
    """Ellipse for a block state whose ``cx`` and ``cp`` each have one
    eigenvalue above and one below 1."""
    if not (_straddles(eig_sym(s.cx)) and _straddles(eig_sym(s.cp))):
        raise RegimeViolation("cx and cp must each have one eigenvalue below and one above 1")
    return _build_ellipse(s.cx, np.linalg.inv(s.cp))


def _minimize_on_ellipse(ell: EllipseParam, scalar_obj, vector_obj) -> tuple[float, float]:
    """Scan + golden refinement over the ellipse angle; returns ``(phi, value)``."""
    if ell.r1 <= 1e-15:
        return 0.0, scalar_obj(0.0)
    grid = (2.0 * math.pi / SCAN_POINTS) * np.arange(SCAN_POINTS)
    # objective error is quadratic in the angle error, so 1e-9 rad suffices
    res = scan_golden(scalar_obj, 0.0, 2.0 * math.pi, SCAN_POINTS, 1e-9, True, vector_obj(grid))
    return float(res.argmin[0]), res.value


# --------------------------------------------------------------------------
# squeezing of formation


def _check_block_physical(s: BlockState) -> NDArray[np.float64]:
    if eig_sym(s.cx)[0] <= 0 or eig_sym(s.cp)[0] <= 0:
        raise Unphysical(0.0, "block covariance is not positive definite")
    cp_inv = np.linalg.inv(s.cp)
    gap = eig_sym(s.cx - cp_inv)[0]
    if gap < -EPS_PHYS * max(1.0, float(np.max(np.abs(s.cx)))):
        nu = validate_physical(s.to_covariance()).nu_minus
        raise Unphysical(nu)
    return cp_inv


def sof_block(s: BlockState) -> MeasureResult:
    """Squeezing of formation of a state without x-p correlations.

    Minimizes the squeezing of ``pi(z, 0)`` over ``inv(cp) <= z <= cx``.
    When both ``cx`` and ``cp`` straddle 1 every feasible ``z`` does too and
    the optimum sits on the ellipse where both constraints bind; the ratio
    ``(z1^2 + z2^2) / z0^2`` is minimized there.  Otherwise the optimum is a
    cone apex, the closest point to the identity along one cone, or (when
    that point is infeasible) again on the ellipse.
    """
    cp_inv = _check_block_physical(s)
    ex, ep = eig_sym(s.cx, vectors=True), eig_sym(cp_inv, vectors=True)
    (e1, e2), vx = ex
    (q1, q2), vp = ep
    lo, hi = 1.0 - CLASSICAL_TOL, 1.0 + CLASSICAL_TOL
    if e1 >= lo and q2 <= hi:
        return MeasureResult(0.0, Method.CLOSED_FORM, {"z": np.eye(2)}, {"regime": "classical"})
    if e2 < lo:
        return MeasureResult(_sof_of_z(s.cx), Method.VERTEX, {"z": np.array(s.cx)}, {"regime": "x_apex"})
    if q1 > hi:
        return MeasureResult(_sof_of_z(cp_inv), Method.VERTEX, {"z": cp_inv}, {"regime": "p_apex"})

    ell = _build_ellipse(s.cx, cp_inv)
    if e1 < lo and q2 > hi:
        def f(phi):
            z1, z2, z0 = ell.point(phi)
            return (z1 * z1 + z2 * z2) / (z0 * z0)

        def fv(phi):
            z1, z2, z0 = ell.point(phi)
            return (z1 * z1 + z2 * z2) / (z0 * z0)

        phi, val = _minimize_on_ellipse(ell, f, fv)
        z1, z2, z0 = ell.point(phi)
        rho = math.hypot(z1, z2)
        value = 0.5 * math.log((z0 + rho) / (z0 - rho))
        return MeasureResult(value, Method.ELLIPSE_1D, {"phi": phi, "z": ell.z_matrix(phi)}, {"regime": "ellipse"})

    # one side straddles, the other sits on one side of the identity
    if e1 < lo:
        cand = e1 * np.outer(vx[:, 0], vx[:, 0]) + np.outer(vx[:, 1], vx[:, 1])
        feasible = eig_sym(cand - cp_inv)[0] >= -FEASIBLE_TOL
    else:
        cand = np.outer(vp[:, 0], vp[:, 0]) + q2 * np.outer(vp[:, 1], vp[:, 1])
        feasible = eig_sym(s.cx - cand)[0] >= -FEASIBLE_TOL
    if feasible:
        return MeasureResult(_sof_of_z(cand), Method.VERTEX, {"z": cand}, {"regime": "one_sided"})

    def g(phi):
        z1, z2, z0 = ell.point(phi)
        rho = math.hypot(z1, z2)
        return 0.5 * (abs(math.log(z0 - rho)) + abs(math.log(z0 + rho)))

    def gv(phi):
        z1, z2, z0 = ell.point(phi)
        rho = np.hypot(z1, z2)
        return 0.5 * (np.abs(np.log(z0 - rho)) + np.abs(np.log(z0 + rho)))

    phi, val = _minimize_on_ellipse(ell, g, gv)
    return MeasureResult(val, Method.ELLIPSE_1D, {"phi": phi, "z": ell.z_matrix(phi)}, {"regime": "one_sided_rim"})


def _symmetric_physical(a: float, c1: float, c2: float):
    prods = ((a + c1) * (a + c2), (a - c1) * (a - c2))
    if min(a + c1, a - c1, a + c2, a - c2) <= 0 or min(prods) < (1.0 - EPS_PHYS) ** 2:
        pos = [p for p in prods if p > 0]
        raise Unphysical(math.sqrt(min(pos)) if pos else 0.0)


def _balanced_physical(a: float, b: float, c: float):
    cov = balanced_state(a, b, c)
    rep = validate_physical(cov)
    if not rep.is_physical:
        raise Unphysical(rep.nu_minus)


def sof_symmetric(a: float, c1: float, c2: float) -> MeasureResult:
    _symmetric_physical(a, c1, c2)
    mu_p = min(1.0, math.sqrt(a + c1), math.sqrt(a + c2))
    mu_m = min(1.0, math.sqrt(a - c1), math.sqrt(a - c2))
    value = -math.log(mu_p * mu_m)
    return MeasureResult(max(0.0, value), Method.CLOSED_FORM, info={"mu_plus": mu_p, "mu_minus": mu_m})


def balanced_lambdas(a: float, b: float, c: float) -> tuple[float, float]:
    """Eigenvalues ``(lambda_-, lambda_+)`` of the optimal ``z`` for a
    balanced correlated state, ``lambda_+ * lambda_- = 1``."""
    root = math.sqrt(max((1.0 - a * b + c * c) ** 2 - (a - b) ** 2, 0.0))
    lam_p = (a + b + 2.0 * c) / (1.0 + a * b - c * c + root)
    return 1.0 / lam_p, lam_p


def balanced_is_classical(a: float, b: float, c: float) -> bool:
    return 1.0 - a - b + a * b >= c * c


def sof_balanced(a: float, b: float, c: float) -> MeasureResult:
    _balanced_physical(a, b, c)
    if balanced_is_classical(a, b, c):
        return MeasureResult(0.0, Method.CLOSED_FORM, info={"regime": "classical"})
    lam_m, lam_p = balanced_lambdas(a, b, c)
    z = 0.5 * lam_p * np.array([[1.0, 1.0], [1.0, 1.0]]) + 0.5 * lam_m * np.array([[1.0, -1.0], [-1.0, 1.0]])
    return MeasureResult(max(math.log(lam_p), 0.0), Method.CLOSED_FORM, {"z": z}, {"lambda_plus": lam_p})


def sof_dispatch(cov: CovarianceMatrix) -> MeasureResult:
    cls = classify(cov)
    if cls.kind is ClassKind.SYMMETRIC:
        return sof_symmetric(*cls.params)
    if cls.kind is ClassKind.BALANCED:
        return sof_balanced(*cls.params)
    if cls.kind is ClassKind.BLOCK:
        return sof_block(to_block(cov))
    raise UnsupportedClass(
        "squeezing of formation is only available for states without cross-quadrature "
        "correlations (<x_i p_j> = 0); this is not the most general class of states"
    )


# --------------------------------------------------------------------------
# entanglement of formation


def eof_symmetric(a: float, c1: float, c2: float) -> MeasureResult:
    _symmetric_physical(a, c1, c2)
    lam = sorted((a + c1, a - c1, a + c2, a - c2))
    prod = lam[0] * lam[1]
    value = aux_h(math.sqrt(prod)) if prod < 1.0 else 0.0
    return MeasureResult(value, Method.CLOSED_FORM, info={"lambda1": lam[0], "lambda2": lam[1]})


def balanced_kappa_tau(a: float, b: float, c: float) -> dict:
    """Alternative parametrization of the balanced-state EoF.

    Returns ``kappa``, ``tau1``, ``tau2``, the squeezing ``r_o`` of the
    optimal pure state, ``lambda_minus`` in its kappa/tau form and the EoF
    from the cosh/sinh expression.
    """
    kappa = a * b - c * c + 1.0
    tau1 = 2.0 * c + a + b
    tau2 = 2.0 * c - a - b
    k2 = kappa * kappa
    inner = k2 + tau1 * tau2
    r_o = 0.25 * math.log((2.0 * k2 + tau1 * tau2 - 2.0 * math.sqrt(k2 * inner)) / (tau2 * tau2))
    lam_m = (kappa + math.sqrt(inner)) / tau1
    ch2, sh2 = math.cosh(r_o) ** 2, math.sinh(r_o) ** 2
    eof = ch2 * math.log2(ch2) - (sh2 * math.log2(sh2) if sh2 > 0 else 0.0)
    return {"kappa": kappa, "tau1": tau1, "tau2": tau2, "r_o": r_o, "lambda_minus": lam_m, "eof": eof}


def eof_balanced(a: float, b: float, c: float) -> MeasureResult:
    _balanced_physical(a, b, c)
    if balanced_is_classical(a, b, c):
        return MeasureResult(0.0, Method.CLOSED_FORM, info={"regime": "classical"})
    lam_m, _ = balanced_lambdas(a, b, c)
    value = aux_h(lam_m) if lam_m < 1.0 else 0.0
    return MeasureResult(value, Method.CLOSED_FORM, info={"lambda_minus": lam_m})


def _nu_pt_of_z(z1, z2, z0):
    w = np.sqrt(z0 * z0 - z1 * z1)
    az = np.abs(z2)
    return np.sqrt((w - az) / (w + az))


def _nu_pt_block(cx: NDArray[np.float64], cp: NDArray[np.float64]) -> float:
    """Smallest partially transposed symplectic eigenvalue of a block state.

    Transposing mode 2 flips the sign of ``cp[0, 1]``; the symplectic
    eigenvalues of a block state are the square roots of the eigenvalues of
    ``cx cp``. The smaller one is taken as ``det / larger`` to avoid
    cancellation.
    """
    prod = cx @ np.array([[cp[0, 0], -cp[0, 1]], [-cp[0, 1], cp[1, 1]]])
    tr = prod[0, 0] + prod[1, 1]
    det = prod[0, 0] * prod[1, 1] - prod[0, 1] * prod[1, 0]
    big = 0.5 * (tr + math.sqrt(max(tr * tr - 4.0 * det, 0.0)))
    return math.sqrt(det / big)


def eof_block(s: BlockState) -> MeasureResult:
    """EoF of a block state by maximizing the partially transposed
    symplectic eigenvalue of ``pi(z, 0)`` along the cone-intersection ellipse.

    For ``pi(z, 0)`` that eigenvalue is ``sqrt((w - |z2|) / (w + |z2|))`` with
    ``w = sqrt(z0^2 - z1^2)``.
    """
    cp_inv = _check_block_physical(s)
    nu_pt = _nu_pt_block(s.cx, s.cp)
    if nu_pt >= 1.0 - 1e-13:
        return MeasureResult(0.0, Method.CLOSED_FORM, info={"regime": "separable", "nu_pt": nu_pt})
    ell = _build_ellipse(s.cx, cp_inv)

    def q(phi):
        z1, z2, z0 = ell.point(phi)
        return z2 * z2 / (z0 * z0 - z1 * z1)

    def qv(phi):
        z1, z2, z0 = ell.point(phi)
        return z2 * z2 / (z0 * z0 - z1 * z1)

    phi, qmin = _minimize_on_ellipse(ell, q, qv)
    z1, z2, z0 = ell.point(phi)
    nu = float(_nu_pt_of_z(z1, z2, z0))
    return MeasureResult(aux_h(nu), Method.ELLIPSE_1D, {"phi": phi, "z": ell.z_matrix(phi)}, {"nu_pt": nu})


def _rotation_fix(u: NDArray[np.float64]) -> tuple[NDArray[np.float64], float]:
    if np.linalg.det(u) < 0:
        u = u.copy()
        u[:, 1] *= -1.0
        return u, -1.0
    return u, 1.0


def standard_form(cov: CovarianceMatrix) -> BlockState:
    """Local symplectic normal form ``A = a 1``, ``B = b 1``,
    ``C = diag(c1, c2)``, returned as a block state."""
    m = cov.xpxp()
    blocks = []
    for k in (0, 1):
        w, o = eig_sym(m[2 * k : 2 * k + 2, 2 * k : 2 * k + 2], vectors=True)
        o, _ = _rotation_fix(o)
        det = math.sqrt(w[0] * w[1])
        blocks.append((det, np.diag(np.sqrt(det / w)) @ o.T))
    (a, l1), (b, l2) = blocks
    c = l1 @ m[:2, 2:] @ l2.T
    u, sing, vt = np.linalg.svd(c)
    _, sign_u = _rotation_fix(u)
    _, sign_v = _rotation_fix(vt.T)
    c1, c2 = sing[0], sing[1] * sign_u * sign_v
    return BlockState(np.array([[a, c1], [c1, b]]), np.array([[a, c2], [c2, b]]))


def eof(cov: CovarianceMatrix) -> MeasureResult:
    """EoF of any physical two-mode Gaussian state.

    Pure states use the entropy of entanglement, the two special classes
    their closed forms, block states the ellipse search; other states are
    first brought to standard form by local operations.
    """
    if cov.n_modes != 2:
        raise UnsupportedClass("EoF is implemented for two-mode states only")
    rep = validate_physical(cov)
    if not rep.is_physical:
        raise Unphysical(rep.nu_minus)
    if rep.nu_plus - 1.0 < 1e-9:
        return entropy_of_entanglement(cov)
    cls = classify(cov)
    if cls.kind is ClassKind.SYMMETRIC:
        return eof_symmetric(*cls.params)
    if cls.kind is ClassKind.BALANCED:
        return eof_balanced(*cls.params)
    if cls.kind is ClassKind.BLOCK:
        return eof_block(to_block(cov))
    return eof_block(standard_form(cov))


# --------------------------------------------------------------------------
# numerical convex roof


def williamson_pure_part(cov: CovarianceMatrix) -> CovarianceMatrix:
    """``S S^T`` for ``sigma = S D S^T`` (Williamson form); ``sigma - S S^T >= 0``."""
    m = cov.xpxp()
    w, v = np.linalg.eigh(m)
    sq = (v * np.sqrt(w)) @ v.T
    k = sq @ symplectic_form(cov.n_modes) @ sq
    kw, kv = np.linalg.eigh(k.T @ k)
    abs_k_inv = (kv / np.sqrt(kw)) @ kv.T
    return CovarianceMatrix(sq @ abs_k_inv @ sq)


def _sym2(a: float, b: float, c: float) -> NDArray[np.float64]:
    return np.array([[a, b], [b, c]])


def _expm_sym2(l00: float, l01: float, l11: float) -> tuple[float, float, float]:
    """Entries ``(z00, z01, z11)`` of ``expm([[l00, l01], [l01, l11]])``."""
    mean = 0.5 * (l00 + l11)
    half = 0.5 * (l00 - l11)
    rad = math.hypot(half, l01)
    em = math.exp(mean)
    if rad < 1e-12:
        ch, shr = 1.0, 1.0
    else:
        ch, shr = math.cosh(rad), math.sinh(rad) / rad
    return em * (ch + shr * half), em * shr * l01, em * (ch - shr * half)


def _pure_entries(v) -> NDArray[np.float64]:
    """XXPP matrix of ``pi(z, y)`` for the six search coordinates."""
    z00, z01, z11 = _expm_sym2(v[0], v[1], v[2])
    y00, y01, y11 = v[3], v[4], v[5]
    det = z00 * z11 - z01 * z01
    i00, i01, i11 = z11 / det, -z01 / det, z00 / det
    # zy (not symmetric) and y z y + inv(z)
    a00, a01 = z00 * y00 + z01 * y01, z00 * y01 + z01 * y11
    a10, a11 = z01 * y00 + z11 * y01, z01 * y01 + z11 * y11
    b00 = y00 * a00 + y01 * a10 + i00
    b01 = y00 * a01 + y01 * a11 + i01
    b11 = y01 * a01 + y11 * a11 + i11
    return np.array(
        [
            [z00, z01, a00, a01],
            [z01, z11, a10, a11],
            [a00, a10, b00, b01],
            [a01, a11, b01, b11],
        ]
    )


def _unpack(v) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    z00, z01, z11 = _expm_sym2(v[0], v[1], v[2])
    return _sym2(z00, z01, z11), _sym2(v[3], v[4], v[5])


def _pack(z, y) -> NDArray[np.float64]:
    w, u = eig_sym(z, vectors=True)
    lz = (u * np.log(w)) @ u.T
    return np.array([lz[0, 0], lz[0, 1], lz[1, 1], y[0, 0], y[0, 1], y[1, 1]])


def _pure_xxpp(z, y):
    zi = np.linalg.inv(z)
    zy = z @ y
    return np.block([[z, zy], [zy.T, y @ zy + zi]])


def _entropy_xxpp(p) -> float:
    """Entropy of a pure XXPP matrix via the partially transposed invariant."""
    det_a = p[0, 0] * p[2, 2] - p[0, 2] * p[0, 2]
    det_b = p[1, 1] * p[3, 3] - p[1, 3] * p[1, 3]
    det_c = p[0, 1] * p[2, 3] - p[0, 3] * p[1, 2]
    delta = det_a + det_b - 2.0 * det_c
    if delta <= 2.0:
        return 0.0
    nu2 = 2.0 / (delta + math.sqrt(delta * delta - 4.0))
    return aux_h(math.sqrt(nu2))


def _retract(inside, target, feasible) -> NDArray[np.float64]:
    """Furthest point of the segment ``inside -> target`` accepted by
    ``feasible``, found by bisection; ``inside`` must be accepted."""
    if feasible(target):
        return target
    lo, hi = 0.0, 1.0
    for _ in range(RETRACT_STEPS):
        mid = 0.5 * (lo + hi)
        if feasible(inside + mid * (target - inside)):
            lo = mid
        else:
            hi = mid
    return inside + lo * (target - inside)


def eof_numeric(cov: CovarianceMatrix, restarts: int = 16, tol: float = 1e-9, seed: int = 0) -> MeasureResult:
    """Convex-roof EoF by direct search over pure states ``pi(z, y)``.

    ``z = expm(L)`` with ``L`` symmetric keeps ``z`` positive definite; the
    constraint ``sigma - pi >= 0`` enters through a hinge penalty on its
    smallest eigenvalue whose weight grows tenfold (at most six times)
    until the point is feasible to ``1e-9``.  The first run starts at the
    Williamson pure part, the rest at seeded perturbations of it.

    The best few runs are then polished by SLSQP with the constraint
    written as nonnegative principal minors of ``sigma - pi``. SLSQP only
    meets constraints to its own tolerance, so the polished point is pulled
    back along the segment from its feasible start until ``sigma - pi`` is
    again PSD to ``1e-9``, and the polish is repeated from there while it
    keeps gaining. The result is therefore an upper bound on the
    true value.
    """
    rep = validate_physical(cov)
    if not rep.is_physical:
        raise Unphysical(rep.nu_minus)
    sigma = cov.xxpp()
    if rep.nu_plus - 1.0 < 1e-9:
        # pure input: the only admissible decomposition is sigma itself
        z = sigma[:2, :2]
        y = np.linalg.solve(z, sigma[:2, 2:])
        val = entropy_of_entanglement(cov).value
        return MeasureResult(val, Method.CONVEX_ROOF_ND, PureStateParam(z, y), {"feasible_runs": 1})
    pi0 = williamson_pure_part(cov).xxpp()
    if np.linalg.eigvalsh(sigma - pi0)[0] < -FEASIBLE_TOL:
        shrink = pi0.copy()
        for _ in range(20):
            shrink[:2, :2] *= 0.9
            z0 = shrink[:2, :2]
            y0 = np.linalg.solve(z0, pi0[:2, 2:])
            cand = _pure_xxpp(z0, 0.5 * (y0 + y0.T))
            if np.linalg.eigvalsh(sigma - cand)[0] >= -FEASIBLE_TOL:
                pi0 = cand
                break
        else:
            raise NoFeasiblePoint("no pure state below sigma found from the Williamson start")
    z0 = pi0[:2, :2]
    y0 = np.linalg.solve(z0, pi0[:2, 2:])
    v0 = _pack(z0, 0.5 * (y0 + y0.T))
    rng = seeded_rng(seed)

    eigvalsh = np.linalg.eigvalsh

    def deficit(v):
        p = _pure_entries(v)
        return p, -eigvalsh(sigma - p)[0]

    def descend(v, tol_, max_iter):
        weight = 10.0
        for _ in range(7):
            def obj(u, weight=weight):
                p, d = deficit(u)
                return _entropy_xxpp(p) + weight * max(d, 0.0)

            v = nelder_minimize(obj, v, 0.1, tol_, max_iter).argmin
            p, d = deficit(v)
            if d <= FEASIBLE_TOL:
                return v, _entropy_xxpp(p), True
            weight *= 10.0
        return v, _entropy_xxpp(p), False

    # coarse multi-start, then polish the best feasible run
    coarse_tol = max(tol, 1e-4)
    runs = []
    for k in range(restarts):
        start = v0 if k == 0 else v0 + rng.normal(scale=0.25, size=6)
        v, val, ok = descend(start, coarse_tol, 400)
        if ok:
            runs.append((val, tuple(np.round(v, 12)), v))
    if not runs:
        raise NoFeasiblePoint("penalty escalation did not reach a feasible pure state")
    runs.sort(key=lambda r: (r[0], r[1]))
    best, _, v = runs[0]
    if tol < coarse_tol:
        # PSD is equivalent to all principal minors being nonnegative; unlike
        # the smallest eigenvalue these are smooth, so SLSQP converges tightly.
        scale = float(np.max(np.abs(sigma)))

        def minors(u):
            d = (sigma - _pure_entries(u)) / scale
            return np.array([np.linalg.det(d[np.ix_(s, s)]) for s in _PRINCIPAL])

        def entropy(u):
            return _entropy_xxpp(_pure_entries(u))

        def feasible(x):
            return deficit(x)[1] <= FEASIBLE_TOL

        # Retracting from a point on the constraint surface gains almost
        # nothing, so a strictly interior anchor is preferred when one exists.
        interior = v0 if deficit(v0)[1] < -INTERIOR_MARGIN * scale else None

        for val, _, u in runs[:POLISH_RUNS]:
            # each round restarts SLSQP from the last retracted point; a wild
            # step that leaves the domain ends the run at its last good point
            for _ in range(POLISH_ROUNDS):
                try:
                    with np.errstate(all="ignore"):
                        res = slsqp_minimize(entropy, u, minors, tol * 1e-3)
                        w = _retract(u if interior is None else interior, res.argmin, feasible)
                        w_val = entropy(w)
                except (GaussCatError, ArithmeticError, ValueError, np.linalg.LinAlgError):
                    break
                if not (math.isfinite(w_val) and w_val < val - tol):
                    if math.isfinite(w_val) and w_val < val:
                        u, val = w, w_val
                    break
                u, val = w, w_val
            if val < best:
                best, v = val, u
    z, y = _unpack(v)
    return MeasureResult(best, Method.CONVEX_ROOF_ND, PureStateParam(z, y), {"feasible_runs": len(runs)})


__all__ = [
    "Method",
    "MeasureResult",
    "EllipseParam",
    "aux_h",
    "entropy_of_entanglement",
    "sof_pure",
    "sof_block",
    "sof_symmetric",
    "sof_balanced",
    "sof_dispatch",
    "eof_symmetric",
    "eof_balanced",
    "eof_block",
    "eof",
    "eof_numeric",
    "ellipse_parametrize",
    "balanced_kappa_tau",
    "balanced_lambdas",
    "standard_form",
    "williamson_pure_part",
    "nats_to_bits",
    "bits_to_nats",
]
