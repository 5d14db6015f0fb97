"""Explicit dilations from angle theta to theta' and the matching obstruction.

Given a pair ``(U, V)`` with ``VU = e^{i theta} UV`` on ``C^m`` and a target
angle ``theta'``, put ``gamma = theta' - theta`` and let ``x`` be the top
eigenvector of ``h_gamma`` (clock/shift matrices ``X, Y`` of order ``n``).
With ``phi_u = <x, Xx>`` and ``phi_v = <x, Yx>``,

    U' = U (x) X / phi_u,    V' = V (x) Y / phi_v,    W h = h (x) x

gives ``V'U' = e^{i theta'} U'V'``, ``W*U'W = U``, ``W*V'W = V`` and
``||U'|| = ||V'|| = 4 / ||h_gamma||``.  The obstruction side evaluates the
degree-one polynomial ``P(z, w) = lambda + z X* + w Y`` on ``(U, V)`` and on
the torus of radius ``r``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from . import config
from .angles import RationalAngle, angle_distance
from .errors import DegenerateStateError, DomainError, ShapeError, SizeError
from .mathieu import host_norm, norm_details
from .rotrep import (
    EXACT_NORM_LIMIT,
    PhasePair,
    clock_matrix,
    commutation_defect,
    default_tolerance,
    matrix_from_json,
    matrix_to_json,
    opnorm,
    shift_matrix,
    unitarity_defect,
)
from .spectral import nonnegativity_defect

log = logging.getLogger(__name__)

STATE_TOL = 1e-10
# per-unit-dimension tolerance for certificate residuals
RESIDUAL_TOL = 1e-10


# ---------------------------------------------------------------------------
# the optimal state
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class StateData:
    """Vector state on a representation ``(rep_u, rep_v)`` of the angle gamma.

    Normally ``rep_u = X``, ``rep_v = Y`` and ``x`` is the top eigenvector of
    ``h_gamma``.  When ``symmetrized`` the representation is the orbit sum
    ``diag(X, Y*, X*, Y)``, ``diag(Y, X, Y*, X*)`` and ``x`` is four stacked
    copies of the eigenvector, scaled to unit length.
    """

    gamma: RationalAngle
    x: np.ndarray
    phi_u: complex
    phi_v: complex
    rep_u: np.ndarray
    rep_v: np.ndarray
    norm: float
    symmetrized: bool = False

    @property
    def dim(self) -> int:
        return self.x.size


def optimal_state(gamma: RationalAngle, tol: float = STATE_TOL, *, force_symmetrize: bool = False) -> StateData:
    """Top eigenvector state of ``h_gamma`` with ``phi_u = phi_v = ||h_gamma|| / 4``."""
    nd = norm_details(gamma)
    x = np.asarray(nd.eigenvector, dtype=float).copy()
    x /= np.linalg.norm(x)
    if nonnegativity_defect(x) > math.sqrt(tol):
        log.warning("top eigenvector at %s has no nonnegative representative", gamma)
    xm, ym = clock_matrix(gamma), shift_matrix(gamma.n)
    phi_u = complex(np.vdot(x, xm @ x))
    phi_v = complex(np.vdot(x, ym @ x))
    if abs(phi_u - phi_v) > tol or force_symmetrize:
        if not force_symmetrize:
            log.warning("phi_u != phi_v at %s (gap %.2e); using the symmetrized state", gamma, abs(phi_u - phi_v))
        return _symmetrized_state(gamma, x, xm, ym, nd.norm)
    if abs(phi_u) < tol:
        raise DegenerateStateError(f"vanishing state value at {gamma}")
    return StateData(gamma, x, phi_u, phi_v, xm, ym, nd.norm, False)


def _symmetrized_state(gamma, x, xm, ym, norm) -> StateData:
    # the order-4 automorphism u -> v*, v -> u permutes these four blocks
    us = [xm, ym.conj().T, xm.conj().T, ym]
    vs = [ym, xm, ym.conj().T, xm.conj().T]
    rep_u = _block_diag(us)
    rep_v = _block_diag(vs)
    big = np.tile(x, 4) / 2.0
    phi_u = complex(np.vdot(big, rep_u @ big))
    phi_v = complex(np.vdot(big, rep_v @ big))
    if abs(phi_u) < STATE_TOL:
        raise DegenerateStateError(f"vanishing symmetrized state value at {gamma}")
    return StateData(gamma, big, phi_u, phi_v, rep_u, rep_v, norm, True)


def _block_diag(blocks) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    i = 0
    for b in blocks:
        k = b.shape[0]
        out[i : i + k, i : i + k] = b
        i += k
    return out


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

RESIDUAL_KEYS = (
    "isometry",
    "compression_u",
    "compression_v",
    "commutation",
    "norm_u",
    "norm_v",
    "unitary_u",
    "unitary_v",
    "scale",
)


@dataclass(frozen=True, eq=False)
class DilationCertificate:
    """A dilation ``(U', V', W, c)`` of ``source`` to the angle ``theta_prime``.

    ``U_prime`` and ``V_prime`` are dense arrays, or CSR matrices once the
    dimension exceeds the dense norm limit.
    """

    source: PhasePair
    theta_prime: RationalAngle
    gamma: RationalAngle
    U_prime: object
    V_prime: object
    W: object
    scale: float
    residuals: dict = field(default_factory=dict)
    symmetrized: bool = False

    @property
    def dim(self) -> int:
        return self.U_prime.shape[0]

    @property
    def target(self) -> PhasePair:
        return PhasePair(_dense(self.U_prime), _dense(self.V_prime), self.theta_prime)

    def to_json(self) -> dict:
        return {
            "source": self.source.to_json(),
            "theta_prime": str(self.theta_prime),
            "gamma": str(self.gamma),
            "U_prime": matrix_to_json(self.U_prime),
            "V_prime": matrix_to_json(self.V_prime),
            "W": matrix_to_json(self.W),
            "scale": self.scale,
            "symmetrized": self.symmetrized,
            "residuals": dict(self.residuals),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data) -> "DilationCertificate":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            source=PhasePair.from_json(data["source"]),
            theta_prime=RationalAngle.from_json(data["theta_prime"]),
            gamma=RationalAngle.from_json(data["gamma"]),
            U_prime=matrix_from_json(data["U_prime"]),
            V_prime=matrix_from_json(data["V_prime"]),
            W=matrix_from_json(data["W"]),
            scale=float(data["scale"]),
            residuals=dict(data.get("residuals", {})),
            symmetrized=bool(data.get("symmetrized", False)),
        )

    def replace(self, **changes) -> "DilationCertificate":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return DilationCertificate(**fields)


def _dense(m) -> np.ndarray:
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def _kron(a, b, sparse: bool):
    if sparse:
        return sp.kron(sp.csr_matrix(a), sp.csr_matrix(b), format="csr")
    return np.kron(a, b)


def build_dilation(
    pair: PhasePair,
    theta_prime: RationalAngle,
    *,
    max_dim: int | None = None,
    force_symmetrize: bool = False,
) -> DilationCertificate:
    """Dilate ``pair`` (at ``pair.angle``) to scalar multiples of ``theta_prime``-commuting unitaries."""
    m = pair.dim
    tol = default_tolerance(m)
    if unitarity_defect(pair.U) > tol or unitarity_defect(pair.V) > tol:
        raise DomainError("source matrices are not unitary within tolerance")
    defect = commutation_defect(pair)
    if defect > tol:
        raise DomainError(f"source pair violates VU = qUV (defect {defect:.2e} at {pair.angle})")
    gamma = RationalAngle.from_fraction(theta_prime.fraction - pair.angle.fraction)
    factor = 4 if force_symmetrize else 1
    cap = config.dilation_max_dim() if max_dim is None else int(max_dim)
    if m * gamma.n * factor > cap:
        raise SizeError(f"dilation dimension {m * gamma.n * factor} exceeds the cap {cap}")
    state = optimal_state(gamma, force_symmetrize=force_symmetrize)
    if state.symmetrized and m * state.dim > cap:
        raise SizeError(f"symmetrized dilation dimension {m * state.dim} exceeds the cap {cap}")
    sparse = m * state.dim > EXACT_NORM_LIMIT
    u_prime = _kron(pair.U, state.rep_u / state.phi_u, sparse)
    v_prime = _kron(pair.V, state.rep_v / state.phi_v, sparse)
    w = _kron(np.eye(m), state.x[:, None].astype(complex), sparse)
    scale = 4.0 / state.norm
    cert = DilationCertificate(
        source=pair,
        theta_prime=theta_prime,
        gamma=gamma,
        U_prime=u_prime,
        V_prime=v_prime,
        W=w,
        scale=scale,
        symmetrized=state.symmetrized,
    )
    report = verify_certificate(cert)
    return cert.replace(residuals=report.residuals)


class VerificationReport(NamedTuple):
    residuals: dict
    tolerance: float
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "residuals": self.residuals,
            "failures": list(self.failures),
        }


def _norm_residual(a, c: float, unitary_defect: float) -> float:
    """``| ||A|| - c |``, exact for small matrices, bounded via ``||(A/c)*(A/c) - I||`` otherwise."""
    if not sp.issparse(a) and max(a.shape) <= EXACT_NORM_LIMIT:
        return abs(float(np.linalg.norm(a, 2)) - c)
    # ||A/c||^2 lies in [1 - d, 1 + d]
    d = unitary_defect
    return c * max(math.sqrt(1 + d) - 1, 1 - math.sqrt(max(0.0, 1 - d)))


def verify_certificate(cert, tolerance: float | None = None) -> VerificationReport:
    """Recompute every certificate invariant from the stored matrices."""
    if isinstance(cert, (str, dict)):
        cert = DilationCertificate.from_json(cert)
    u, v = cert.source.U, cert.source.V
    up, vp, w, c = cert.U_prime, cert.V_prime, cert.W, float(cert.scale)
    m = u.shape[0]
    big = up.shape[0]
    if w.shape != (big, m) or vp.shape != up.shape:
        raise ShapeError(f"inconsistent certificate shapes {up.shape}, {vp.shape}, {w.shape}")
    wh = w.conj().T
    res = {}
    res["isometry"] = opnorm(_as_small(wh @ w) - np.eye(m))
    res["compression_u"] = opnorm(_as_small(wh @ (up @ w)) - u)
    res["compression_v"] = opnorm(_as_small(wh @ (vp @ w)) - v)
    q = cert.theta_prime.q
    res["commutation"] = opnorm(vp @ up - q * (up @ vp))
    res["unitary_u"] = unitarity_defect(up / c)
    res["unitary_v"] = unitarity_defect(vp / c)
    res["norm_u"] = _norm_residual(up, c, res["unitary_u"])
    res["norm_v"] = _norm_residual(vp, c, res["unitary_v"])
    gamma = RationalAngle.from_fraction(cert.theta_prime.fraction - cert.source.angle.fraction)
    res["scale"] = abs(c - 4.0 / host_norm(gamma))
    res = {k: float(res[k]) for k in RESIDUAL_KEYS}
    tol = RESIDUAL_TOL * max(1, big) if tolerance is None else float(tolerance)
    failures = tuple(k for k in RESIDUAL_KEYS if not res[k] <= tol)
    return VerificationReport(res, tol, failures)


def _as_small(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------


class BoundCheck(NamedTuple):
    value: float
    bound: float

    @property
    def ok(self) -> bool:
        return self.value <= self.bound


def weyl_bound_check(gamma: RationalAngle) -> BoundCheck:
    """``c_gamma`` against the exponential bound ``exp(|gamma| / 4)``."""
    c = 4.0 / host_norm(gamma)
    return BoundCheck(c, math.exp(angle_distance(gamma, RationalAngle(0, 1)) / 4.0))


@dataclass(frozen=True)
class ObstructionReport:
    """Evaluation of ``(||P(U,V)||^2 - sup ||P(z,w)||^2) / lambda``.

    ``rhs`` is the maximum over a torus grid at least as fine as ``grid``
    points per circle, so ``margin`` is an upper estimate; ``slack`` bounds how far the grid maximum can fall short of the
    supremum, and ``certified`` means ``margin > slack``.  ``closed_form`` is
    the analytic lower bound ``4 - r ||h|| + (4 - 4 r^2) / lambda``.
    """

    angle: RationalAngle
    r: float
    lam: float
    grid: int
    lhs: float
    rhs: float
    margin: float
    closed_form: float
    slack: float
    fixed_vector_residual: float

    @property
    def certified(self) -> bool:
        return self.margin > self.slack

    def to_json(self) -> dict:
        return {
            "angle": str(self.angle),
            "r": self.r,
            "lambda": self.lam,
            "grid": self.grid,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "closed_form": self.closed_form,
            "slack": self.slack,
            "certified": self.certified,
            "fixed_vector_residual": self.fixed_vector_residual,
        }


def lower_bound_margin(a: RationalAngle, r: float, lam: float = 100.0, grid: int = 256) -> ObstructionReport:
    """Certify that ``(X, Y)`` has no commuting normal dilation of norm ``r``.

    A positive certified margin shows ``||P(X, Y)|| > sup_{r T^2} ||P||`` for
    ``P(z, w) = lam + z X* + w Y``.
    """
    if not r > 0 or not lam > 0:
        raise DomainError("r and lambda must be positive")
    if grid < 8:
        raise DomainError(f"grid must be >= 8, got {grid}")
    n = a.n
    if n * n > config.dense_limit():
        raise SizeError(f"n^2 = {n * n} exceeds the dense limit {config.dense_limit()}")
    x, y = clock_matrix(a), shift_matrix(n)
    xs = x.conj().T
    eye = np.eye(n)
    p_uv = (lam * sp.identity(n * n) + sp.kron(xs, x) + sp.kron(y, y)).tocsr()
    xi = eye.reshape(-1) / math.sqrt(n)
    fixed_res = float(np.linalg.norm(p_uv @ xi - (lam + 2.0) * xi))
    lhs = _invariant_block_norm(p_uv, n) ** 2

    rhs, step = _torus_sup_sq(xs, y, r, lam, grid)
    # Rayleigh argument: the top eigenvector v of A = P*P at the maximiser
    # gives a trigonometric polynomial v*A v <= ||P||^2 peaking there, whose
    # second angular derivatives are bounded by 2 lam r + 2 r^2 (diagonal)
    # and 2 r^2 (mixed); grid points are at most step/2 away in each angle
    slack = (2.0 * lam * r + 4.0 * r * r) * (step / 2) ** 2 / lam
    # rounding in the grid norms
    slack += 64 * float(np.finfo(float).eps) * (lam + 2 * r) ** 2 / lam
    closed = 4.0 - r * host_norm(a) + (4.0 - 4.0 * r * r) / lam
    margin = (lhs - rhs) / lam
    return ObstructionReport(
        a, float(r), float(lam), int(grid), lhs, rhs, float(margin), float(closed), float(slack), fixed_res
    )


def _invariant_block_norm(p_uv, n: int) -> float:
    """Operator norm of ``P`` through its invariant blocks.

    ``X* (x) X`` is diagonal and ``Y (x) Y`` shifts both indices together, so the
    span of ``e_j (x) e_{j+d}`` is invariant for each ``d``; the invariance is
    checked, then the ``n x n`` blocks are normed densely.
    """
    j = np.arange(n)
    best = 0.0
    for d in range(n):
        idx = j * n + (j + d) % n
        rows = p_uv[idx]
        block = rows[:, idx].toarray()
        outside = abs(rows).sum() - np.abs(block).sum()
        if outside > 1e-12 * max(1.0, np.abs(block).sum()):
            raise AssertionError("polynomial does not preserve the diagonal blocks")
        best = max(best, float(np.linalg.norm(block, 2)))
    return best


def _torus_sup_sq(xs, y, r, lam, grid) -> tuple[float, float]:
    """Grid maximum of ``||lam + z X* + w Y||^2`` over ``|z| = |w| = r``.

    Conjugating by ``Y`` (resp. ``X``) rotates ``z`` (resp. ``w``) by ``q``, so
    one arc of length ``2 pi / n`` per variable suffices.  Each arc gets
    ``ceil(grid / n)`` points, never coarser than a ``grid``-point circle.
    Returns the maximum and the angular step.
    """
    n = xs.shape[0]
    per_arc = -(-grid // n)
    step = 2 * math.pi / (n * per_arc)
    ph = r * np.exp(1j * step * np.arange(per_arc))
    base = lam * np.eye(n) + np.zeros((per_arc, n, n), dtype=complex)
    wy = ph[:, None, None] * y
    best = 0.0
    for z in ph:
        mats = base + z * xs + wy
        gram = mats.conj().transpose(0, 2, 1) @ mats
        best = max(best, float(np.linalg.eigvalsh(gram)[:, -1].max()))
    return best, step


# ---------------------------------------------------------------------------
# synthetic compression check
# ---------------------------------------------------------------------------


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with the phase correction."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


class CompressionCheck(NamedTuple):
    defect: float
    bound: float
    compression_error: float

    @property
    def ok(self) -> bool:
        return self.defect <= self.bound + 1e-12


def compression_defect_check(c: float, m: int, seed: int = 0) -> CompressionCheck:
    """Build a unitary ``U`` whose compression to ``C^m`` is ``c U'`` and measure ``||U - (U' + R)||``.

    ``U`` is the unitary dilation ``[[cU', sI], [sI, -cU'*]]`` (``s = sqrt(1 - c^2)``)
    twisted by random unitaries on the complement, so ``R`` is generic.
    """
    if not 0.0 <= c <= 1.0:
        raise DomainError("c must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    u1 = random_unitary(m, rng)
    s = math.sqrt(1.0 - c * c)
    eye = np.eye(m)
    big = np.block([[c * u1, s * eye], [s * eye, -c * u1.conj().T]])
    q1, q2 = random_unitary(m, rng), random_unitary(m, rng)
    left = _block_diag([eye, q1])
    right = _block_diag([eye, q2])
    u = left @ big @ right
    comp_err = float(np.linalg.norm(u[:m, :m] - c * u1, 2))
    rest = u[m:, m:]
    direct = _block_diag([u1, rest])
    defect = float(np.linalg.norm(u - direct, 2))
    return CompressionCheck(defect, 2.0 * s, comp_err)


__all__ = [
    "StateData",
    "optimal_state",
    "DilationCertificate",
    "build_dilation",
    "verify_certificate",
    "VerificationReport",
    "weyl_bound_check",
    "ObstructionReport",
    "lower_bound_margin",
    "compression_defect_check",
    "random_unitary",
]
