"""Finite-dimensional representations of the rotation relation ``VU = qUV``.

All matrices are dense ``complex128`` numpy arrays.  The clock matrix is
diagonal and the shift matrix a cyclic permutation, so the structured helpers
(:func:`clock_diagonal`, :func:`apply_shift`) build and apply them in O(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .angles import RationalAngle, unit_roots
from .errors import DomainError, ShapeError

# above this dimension operator norms are replaced by the cheap upper bound
# sqrt(||A||_1 ||A||_inf), which is still sound for pass/fail checks
EXACT_NORM_LIMIT = 512


def default_tolerance(n: int) -> float:
    """Unitarity/commutation tolerance: 1e-12 up to n = 10**4, linear above."""
    return 1e-12 * max(1.0, n / 1e4)


def opnorm(a) -> float:
    """Operator 2-norm (largest singular value), or an upper bound for big inputs."""
    if sp.issparse(a):
        a1 = abs(a).sum(axis=0).max() if a.nnz else 0.0
        ainf = abs(a).sum(axis=1).max() if a.nnz else 0.0
        return float(math.sqrt(a1 * ainf))
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    if a.ndim == 1 or min(a.shape) == 1:
        return float(np.linalg.norm(a))
    if max(a.shape) <= EXACT_NORM_LIMIT:
        return float(np.linalg.norm(a, 2))
    absa = np.abs(a)
    return float(math.sqrt(absa.sum(axis=0).max() * absa.sum(axis=1).max()))


def unitarity_defect(m) -> float:
    """``||M* M - I||``."""
    if sp.issparse(m):
        prod = (m.conj().T @ m).tocsr()
        return opnorm(prod - sp.identity(m.shape[0], format="csr"))
    m = np.asarray(m)
    return opnorm(m.conj().T @ m - np.eye(m.shape[0]))


def clock_diagonal(a: RationalAngle) -> np.ndarray:
    return unit_roots(np.arange(a.n, dtype=np.int64) * a.p, a.n)


def clock_matrix(a: RationalAngle) -> np.ndarray:
    """``X = diag(1, q, ..., q**(n-1))`` with ``n`` the order of ``q``."""
    return np.diag(clock_diagonal(a))


def shift_matrix(n: int) -> np.ndarray:
    """Cyclic shift with ones on the superdiagonal and in the lower-left corner."""
    if n < 1:
        raise DomainError(f"dimension must be >= 1, got {n}")
    return np.roll(np.eye(n, dtype=complex), 1, axis=1)


def apply_shift(x: np.ndarray) -> np.ndarray:
    """``Y @ x`` in O(n): ``(Yx)_k = x_{k+1}`` cyclically."""
    return np.roll(x, -1, axis=0)


def fourier_matrix(a: RationalAngle) -> np.ndarray:
    """``F[k, l] = exp(i*gamma*k*l)/sqrt(n)`` with ``gamma = 2*pi*p/n``.

    F is unitary and implements ``F* X F = Y*``, ``F* Y F = X``.
    """
    n = a.n
    k = np.arange(n, dtype=np.int64)
    kl = (np.outer(k, k) % n) * a.p
    return unit_roots(kl, n) / math.sqrt(n)


def check_unimodular(z: complex, name: str, eps: float = 1e-12) -> complex:
    z = complex(z)
    if abs(abs(z) - 1.0) > eps:
        raise DomainError(f"{name} must be unimodular, got |{name}| = {abs(z)}")
    return z


@dataclass(frozen=True, eq=False)
class PhasePair:
    """Two square matrices that are supposed to satisfy ``V U = q U V``."""

    U: np.ndarray
    V: np.ndarray
    angle: RationalAngle

    def __post_init__(self):
        u, v = np.asarray(self.U, dtype=complex), np.asarray(self.V, dtype=complex)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ShapeError(f"U must be square, got shape {u.shape}")
        if u.shape != v.shape:
            raise ShapeError(f"U and V shapes differ: {u.shape} vs {v.shape}")
        object.__setattr__(self, "U", u)
        object.__setattr__(self, "V", v)

    @property
    def dim(self) -> int:
        return self.U.shape[0]

    @property
    def q(self) -> complex:
        return self.angle.q

    def to_json(self) -> dict:
        return {
            "angle": str(self.angle),
            "U": matrix_to_json(self.U),
            "V": matrix_to_json(self.V),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PhasePair":
        return cls(
            matrix_from_json(data["U"]),
            matrix_from_json(data["V"]),
            RationalAngle.from_json(data["angle"]),
        )


def standard_pair(a: RationalAngle, alpha: complex = 1.0, beta: complex = 1.0) -> PhasePair:
    """The irreducible pair ``(alpha X, beta Y)``; ``(1, 1)`` is the standard representation."""
    alpha = check_unimodular(alpha, "alpha")
    beta = check_unimodular(beta, "beta")
    return PhasePair(alpha * clock_matrix(a), beta * shift_matrix(a.n), a)


def commutation_defect(pair: PhasePair) -> float:
    """``||V U - exp(i*theta) U V||``."""
    u, v = pair.U, pair.V
    if u.shape != v.shape:
        raise ShapeError(f"U and V shapes differ: {u.shape} vs {v.shape}")
    return opnorm(v @ u - pair.q * (u @ v))


def tensor_pair(p1: PhasePair, p2: PhasePair) -> PhasePair:
    """``(U1 (x) U2, V1 (x) V2)``; the commutation phases multiply."""
    return PhasePair(np.kron(p1.U, p2.U), np.kron(p1.V, p2.V), p1.angle + p2.angle)


def matrix_to_json(m) -> dict:
    """``{"n", "re", "im"}`` (row-major) for square matrices, ``rows``/``cols`` otherwise.

    Sparse input is written as coordinates: ``{"format": "coo", "row", "col", "re", "im"}``.
    """
    out = {}
    shape = m.shape
    if len(shape) != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {shape}")
    if shape[0] == shape[1]:
        out["n"] = int(shape[0])
    else:
        out["rows"], out["cols"] = int(shape[0]), int(shape[1])
    if sp.issparse(m):
        coo = sp.coo_matrix(m)
        coo.sum_duplicates()
        out["format"] = "coo"
        out["row"] = coo.row.tolist()
        out["col"] = coo.col.tolist()
        data = coo.data.astype(complex)
    else:
        data = np.asarray(m, dtype=complex).reshape(-1)
    out["re"] = data.real.tolist()
    out["im"] = data.imag.tolist()
    return out


def matrix_from_json(data: dict):
    """Inverse of :func:`matrix_to_json`; coordinate input yields a CSR matrix."""
    if "n" in data:
        rows = cols = int(data["n"])
    else:
        rows, cols = int(data["rows"]), int(data["cols"])
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    if re.size != im.size:
        raise ShapeError(f"re/im lengths differ: {re.size} vs {im.size}")
    if data.get("format") == "coo":
        r, c = np.asarray(data["row"], dtype=np.int64), np.asarray(data["col"], dtype=np.int64)
        if r.size != re.size or c.size != re.size:
            raise ShapeError("coordinate arrays do not match the value arrays")
        return sp.csr_matrix((re + 1j * im, (r, c)), shape=(rows, cols))
    if re.size != rows * cols:
        raise ShapeError(f"expected {rows * cols} entries, got {re.size}/{im.size}")
    return (re + 1j * im).reshape(rows, cols)
