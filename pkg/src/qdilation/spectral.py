"""Eigensolvers: dense Hermitian spectra and a matrix-free top eigenpair solver.

The top eigenpair of a periodic Jacobi matrix is found with thick-restart
Lanczos (full reorthogonalization, Krylov dimension at most 300).  Near the
top of Hofstadter-type spectra the leading eigenvalues can be separated by
less than 1e-7, which stalls plain Lanczos; in that case the top eigenvalue is
isolated by Sylvester-inertia bisection and Lanczos is rerun on the
shift-inverted operator ``(sigma - H)^-1``.  Both the inertia counts and the
shifted solves come from one O(n) sparse LDL^T factorization.

Every returned eigenpair is certified: the residual is recomputed from
scratch and an inertia count proves that no eigenvalue lies above
``eigenvalue + residual``.
"""

from __future__ import annotations

import hashlib
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import config
from .errors import ConvergenceError, DomainError, SizeError

log = logging.getLogger(__name__)

MAX_KRYLOV_DIM = 300
# cap on the Lanczos basis memory (float64 entries)
_BASIS_BUDGET = 4e7


@dataclass(frozen=True, eq=False)
class PeriodicJacobiMatrix:
    """``diag(d) + c*(S + S^T)`` with ``S`` the cyclic shift (corners included)."""

    diagonal: np.ndarray
    coupling: float = 1.0

    def __post_init__(self):
        d = np.ascontiguousarray(self.diagonal, dtype=float)
        if d.ndim != 1 or d.size == 0:
            raise DomainError("diagonal must be a nonempty 1-d array")
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "coupling", float(self.coupling))

    @property
    def n(self) -> int:
        return self.diagonal.size

    def matvec(self, x: np.ndarray) -> np.ndarray:
        d = self.diagonal if x.ndim == 1 else self.diagonal[:, None]
        return d * x + self.coupling * (np.roll(x, 1, axis=0) + np.roll(x, -1, axis=0))

    def to_sparse(self) -> sp.csc_matrix:
        n = self.n
        k = np.arange(n)
        rows = np.concatenate([k, k, (k + 1) % n])
        cols = np.concatenate([k, (k + 1) % n, k])
        vals = np.concatenate([self.diagonal, np.full(2 * n, self.coupling)])
        # duplicate (row, col) pairs are summed, which handles n = 1, 2
        return sp.csc_matrix((vals, (rows, cols)), shape=(n, n))

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def gershgorin(self) -> tuple[float, float]:
        w = 2.0 * abs(self.coupling)
        return float(self.diagonal.min() - w), float(self.diagonal.max() + w)

    def fingerprint(self) -> int:
        h = hashlib.sha256()
        h.update(self.n.to_bytes(8, "little"))
        h.update(self.diagonal.tobytes())
        h.update(np.float64(self.coupling).tobytes())
        return int.from_bytes(h.digest()[:8], "little")


@dataclass(frozen=True, eq=False)
class EigenResult:
    eigenvalue: float
    eigenvector: np.ndarray
    residual: float
    iterations: int = 0
    factorizations: int = 0
    degenerate: bool = False
    method: str = "lanczos"
    meta: dict = field(default_factory=dict)


def dense_spectrum(h, *, limit: int | None = None, hermitian_tol: float = 1e-12) -> np.ndarray:
    """All eigenvalues of a Hermitian matrix, ascending, with multiplicity."""
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {h.shape}")
    limit = config.dense_limit() if limit is None else limit
    if h.shape[0] > limit:
        raise SizeError(
            f"dimension {h.shape[0]} exceeds the dense limit {limit}; "
            "use top_eigenpair (Lanczos) for large periodic Jacobi matrices"
        )
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    if np.abs(h - h.conj().T).max(initial=0.0) > hermitian_tol * scale:
        raise DomainError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(h)


def nonnegativity_defect(x) -> float:
    """How far a vector is from having a nonnegative representative.

    The vector is normalized and rotated so its largest-modulus entry is
    positive real; the result is ``max(0, -min Re x) + max |Im x|``.
    """
    x = np.asarray(x, dtype=complex).ravel()
    nrm = np.linalg.norm(x)
    if nrm == 0:
        raise DomainError("zero vector has no direction")
    x = x / nrm
    k = int(np.argmax(np.abs(x)))
    x = x * (np.conj(x[k]) / abs(x[k]))
    return float(max(0.0, -x.real.min()) + np.abs(x.imag).max())


def align_phase(x: np.ndarray) -> np.ndarray:
    """Fix the global phase so the largest-modulus entry is positive real."""
    k = int(np.argmax(np.abs(x)))
    phase = x[k] / abs(x[k])
    y = x / phase
    if np.isrealobj(x):
        return y.real if isinstance(y, np.ndarray) else y
    return y


# ---------------------------------------------------------------------------
# inertia
# ---------------------------------------------------------------------------


class _Shifted:
    """LDL^T factorization of ``sigma*I - H``; inertia plus fast solves."""

    def __init__(self, h: PeriodicJacobiMatrix, sigma: float):
        n = h.n
        a = (sigma * sp.identity(n, format="csc") - h.to_sparse()).tocsc()
        for _ in range(8):
            try:
                lu = spla.splu(
                    a,
                    permc_spec="NATURAL",
                    diag_pivot_thresh=0.0,
                    options={"SymmetricMode": True},
                )
            except RuntimeError:
                # exactly singular: sigma hit an eigenvalue, nudge it
                sigma = math.nextafter(sigma, math.inf) + 4 * math.ulp(sigma)
                a = (sigma * sp.identity(n, format="csc") - h.to_sparse()).tocsc()
                continue
            pivots = lu.U.diagonal()
            natural = np.array_equal(lu.perm_r, np.arange(n)) and np.array_equal(
                lu.perm_c, np.arange(n)
            )
            if natural and np.all(pivots != 0):
                break
            sigma = math.nextafter(sigma, math.inf) + 4 * math.ulp(sigma)
            a = (sigma * sp.identity(n, format="csc") - h.to_sparse()).tocsc()
        else:
            raise ConvergenceError(f"could not factor sigma*I - H near sigma={sigma}")
        self.sigma = sigma
        self.lu = lu
        self.count_above = int(np.count_nonzero(pivots < 0))

    def solve(self, x: np.ndarray) -> np.ndarray:
        return self.lu.solve(x)


def count_above(h: PeriodicJacobiMatrix, sigma: float) -> int:
    """Number of eigenvalues of ``h`` strictly greater than ``sigma``."""
    return _Shifted(h, sigma).count_above


# ---------------------------------------------------------------------------
# thick-restart Lanczos
# ---------------------------------------------------------------------------


def _orthogonalize(q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Classical Gram-Schmidt against the rows of q, applied twice."""
    h = q @ w
    w -= h @ q
    h2 = q @ w
    w -= h2 @ q
    return h + h2


def _lanczos_top(apply, n, v0, m, keep, max_matvec, conv_tol, deadline, rng, relative=False):
    """Top Ritz pair of a symmetric operator.

    Returns ``(ritz_values_desc, ritz_vector, residual_estimate, matvecs)``.
    ``ritz_values_desc`` holds the two largest Ritz values (or one).  With
    ``relative`` the convergence test scales ``conv_tol`` by the top Ritz value.
    """
    m = min(m, n)
    keep = max(1, min(keep, m - 1))
    # basis vectors are stored as rows so that slices stay contiguous
    q = np.zeros((m + 1, n))
    t = np.zeros((m + 1, m + 1))
    q[0] = v0 / np.linalg.norm(v0)
    j0 = 0
    matvecs = 0
    while True:
        size = m
        exhausted = False
        for j in range(j0, m):
            if deadline is not None and time.monotonic() > deadline:
                raise ConvergenceError("deadline exceeded during Lanczos iteration")
            w = apply(q[j])
            matvecs += 1
            h = _orthogonalize(q[: j + 1], w)
            t[: j + 1, j] = h
            t[j, : j + 1] = h
            beta = np.linalg.norm(w)
            scale = max(1.0, abs(h[j]))
            if beta <= 1e-13 * scale:
                if j + 1 >= n:
                    size, exhausted = j + 1, True
                    break
                # invariant subspace: continue with a fresh orthogonal direction
                w = rng.standard_normal(n)
                _orthogonalize(q[: j + 1], w)
                w /= np.linalg.norm(w)
                beta = 0.0
                q[j + 1] = w
            else:
                q[j + 1] = w / beta
            t[j + 1, j] = t[j, j + 1] = beta
        s = t[:size, :size]
        theta, y = np.linalg.eigh(0.5 * (s + s.T))
        coupling = np.zeros(size) if exhausted else t[size, :size]
        est = abs(coupling @ y[:, -1])
        top_two = theta[::-1][:2]
        limit = conv_tol * abs(theta[-1]) if relative else conv_tol
        if exhausted or est <= limit or matvecs >= max_matvec:
            x = y[:, -1] @ q[:size]
            return top_two, x / np.linalg.norm(x), est, matvecs
        yk = y[:, -keep:]
        qk = yk.T @ q[:size]
        q_next = q[size].copy()
        ck = coupling @ yk
        t[:] = 0.0
        t[:keep, :keep] = np.diag(theta[-keep:])
        t[keep, :keep] = ck
        t[:keep, keep] = ck
        q[:] = 0.0
        q[:keep] = qk
        q[keep] = q_next
        j0 = keep


def _start_vector(h: PeriodicJacobiMatrix, seed):
    rng = np.random.default_rng(h.fingerprint() if seed is None else seed)
    return rng.standard_normal(h.n), rng


def top_eigenpair(
    h: PeriodicJacobiMatrix,
    tol: float = 1e-10,
    *,
    krylov_dim: int = MAX_KRYLOV_DIM,
    max_iter: int = 20000,
    seed: int | None = None,
    deadline: float | None = None,
) -> EigenResult:
    """Algebraically largest eigenvalue of ``h`` and a unit eigenvector.

    ``deadline`` is an absolute ``time.monotonic()`` value for cooperative
    cancellation.  Raises ``ConvergenceError`` (carrying the best iterate)
    when the operator-application budget ``max_iter`` runs out.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    n = h.n
    v0, rng = _start_vector(h, seed)
    m = min(krylov_dim, MAX_KRYLOV_DIM, n, max(20, int(_BASIS_BUDGET // max(n, 1))))
    keep = max(1, min(m // 3, 40))
    used = 0
    factorizations = 0
    method = "lanczos"

    def finish(x):
        x = align_phase(x / np.linalg.norm(x))
        hx = h.matvec(x)
        lam = float(x @ hx)
        return lam, x, float(np.linalg.norm(hx - lam * x))

    ritz, x, _, mv = _lanczos_top(
        h.matvec, n, v0, m, keep, min(max_iter, m), 0.1 * tol, deadline, rng
    )
    used += mv
    lam, x, res = finish(x)
    best = EigenResult(lam, x, res, used, factorizations, False, method)

    certified = False
    if res <= tol:
        factorizations += 1
        certified = count_above(h, lam + res + _guard(lam)) == 0

    if not certified:
        if used >= max_iter:
            raise ConvergenceError(
                f"operator budget {max_iter} exhausted with residual {res:.3e}", best
            )
        method = "lanczos+shift-invert"
        lam, x, res, extra_mv, extra_f = _shift_invert_refine(
            h, lam, res, tol, max_iter - used, deadline, rng, finish
        )
        used += extra_mv
        factorizations += extra_f
        best = EigenResult(lam, x, res, used, factorizations, False, method)
        if res > tol:
            raise ConvergenceError(
                f"top eigenpair residual {res:.3e} above tol {tol:.1e}", best
            )
        factorizations += 1
        if count_above(h, lam + res + _guard(lam)) != 0:
            raise ConvergenceError("could not certify the top eigenvalue", best)

    factorizations += 1
    degenerate = count_above(h, lam - res - 10 * tol - _guard(lam)) >= 2
    if degenerate:
        log.warning("top eigenvalue %.15g is (nearly) degenerate at tol %.1e", lam, tol)
    return EigenResult(
        eigenvalue=lam,
        eigenvector=x,
        residual=res,
        iterations=used,
        factorizations=factorizations,
        degenerate=degenerate,
        method=method,
        meta={"ritz": [float(v) for v in ritz], "krylov_dim": m},
    )


def _guard(lam: float) -> float:
    return 64 * math.ulp(max(1.0, abs(lam)))


def _shift_invert_refine(h, lam0, res0, tol, budget, deadline, rng, finish):
    """Lanczos on ``(sigma - H)^-1`` with ``sigma`` a certified upper bound.

    Each round runs a short Lanczos on the inverse, then pulls ``sigma`` down
    towards the new Rayleigh quotient; a move is accepted only when the
    inertia count shows no eigenvalue above the new shift.
    """
    lo_g, hi_g = h.gershgorin()
    factorizations = 0
    used = 0

    def factor(s):
        nonlocal factorizations
        if deadline is not None and time.monotonic() > deadline:
            raise ConvergenceError("deadline exceeded while factoring a shift")
        factorizations += 1
        return _Shifted(h, s)

    # lam0 is a Rayleigh quotient, hence lo <= lambda_max
    lo = lam0
    step = max(res0, 1e-8 * max(1.0, abs(lam0)))
    while True:
        sigma = lam0 + step
        if sigma >= hi_g:
            shifted = factor(hi_g + _guard(hi_g))
            break
        shifted = factor(sigma)
        if shifted.count_above == 0:
            break
        lo = sigma
        step *= 8.0

    # an inverse residual e at top value mu gives an H-residual of about
    # ||sigma - H|| * e / mu, so the test is relative to mu
    inner_tol = 0.1 * tol / max(1.0, hi_g - lo_g)
    x_best, lam_best, res_best = None, lam0, math.inf
    for _ in range(40):
        v0 = rng.standard_normal(h.n) if x_best is None else x_best.copy()
        ritz, x, _, mv = _lanczos_top(
            shifted.solve,
            h.n,
            v0,
            30,
            10,
            max(1, min(budget - used, 60)),
            inner_tol,
            deadline,
            rng,
            relative=True,
        )
        used += mv
        lam, x, res = finish(x)
        if res < res_best:
            x_best, lam_best, res_best = x, lam, res
        if res_best <= tol or used >= budget:
            break
        sigma = shifted.sigma
        lo = max(lo, lam)
        # Ritz values of (sigma - H)^-1 never exceed its top eigenvalue, so
        # sigma - 1/ritz is a lower bound for lambda_max, and a much sharper
        # one than the Rayleigh quotient of an unconverged vector
        if ritz[0] > 0:
            lo = max(lo, sigma - 1.0 / ritz[0])
        gap = sigma - lo
        # clustered tops need a shift far closer to lambda_max than to the
        # next eigenvalue: try tiny offsets first, fall back towards bisection
        for frac in (2.0**-20, 2.0**-14, 2.0**-8, 2.0**-4, 0.5):
            cand = lo + max(frac * gap, _guard(lo))
            if cand >= sigma:
                continue
            trial = factor(cand)
            if trial.count_above == 0:
                shifted = trial
                break
            lo = cand
            gap = sigma - lo
    return lam_best, x_best, res_best, used, factorizations
