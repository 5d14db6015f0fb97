"""The almost Mathieu Hamiltonian at rational angles: norms, spectra, bands.

For ``theta = 2*pi*p/n`` and unimodular phases the Hamiltonian is

    h^(alpha, beta) = alpha X + conj(alpha) X* + beta Y + conj(beta) Y*,

an ``n x n`` Hermitian matrix.  At ``alpha = beta = 1`` it is the periodic
Jacobi matrix with diagonal ``2 cos(k theta)`` and unit couplings, and its top
eigenvalue is the norm of ``u + u* + v + v*`` in the rotation algebra.

The spectrum of ``h^(alpha, beta)`` depends on the phases only through
``alpha**n`` and ``beta**n`` (conjugate by ``X`` or ``Y`` to multiply a phase
by ``q``), which keeps the torus sampling cheap: ``G`` effective phases per
circle reproduce a ``(G*n) x (G*n)`` uniform grid of the torus.  Band edges
sit at ``alpha**n, beta**n in {+1, -1}``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import config
from .angles import TWO_PI, RationalAngle, angle_distance, cos_turns
from .errors import ConvergenceError, DomainError, QDilationError, SizeError
from .rotrep import check_unimodular, clock_diagonal, shift_matrix
from .spectral import PeriodicJacobiMatrix, count_above, top_eigenpair

# residual target for iterative norms; the dense path is at machine precision
NORM_TOL = 1e-11
# Lipschitz constant of the phase dependence: ||dh|| <= 2|d alpha| + 2|d beta|
PHASE_LIPSCHITZ = 4.0
# kappa for u + u* + v + v* (four words of length one)
KAPPA = 4.0

_CHUNK = 256


class BandEdgeError(QDilationError):
    """Grid-sampled eigenvalues escaped the computed band edges."""


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    angle: RationalAngle
    alpha: complex
    beta: complex
    matrix: np.ndarray

    @property
    def n(self) -> int:
        return self.angle.n

    def hermitian_defect(self) -> float:
        m = self.matrix
        return float(np.abs(m - m.conj().T).max())

    def is_real(self, tol: float = 1e-15) -> bool:
        return float(np.abs(self.matrix.imag).max()) <= tol


def hamiltonian(a: RationalAngle, alpha: complex = 1.0, beta: complex = 1.0) -> HamiltonianMatrix:
    """``alpha X + conj(alpha) X* + beta Y + conj(beta) Y*`` as a dense matrix."""
    alpha = check_unimodular(alpha, "alpha")
    beta = check_unimodular(beta, "beta")
    xd = alpha * clock_diagonal(a)
    y = beta * shift_matrix(a.n)
    m = np.diag(xd + xd.conj()) + y + y.conj().T
    if alpha.imag == 0 and beta.imag == 0:
        m = m.real.astype(complex)
    return HamiltonianMatrix(a, alpha, beta, m)


def jacobi_form(a: RationalAngle, alpha_turn: Fraction = Fraction(0)) -> PeriodicJacobiMatrix:
    """Real form of ``h^(alpha, 1)`` with ``alpha = exp(2*pi*i*alpha_turn)``.

    The diagonal ``2 cos(2*pi*(k p / n + alpha_turn))`` is evaluated from exact
    integer residues.
    """
    t = Fraction(alpha_turn) % 1
    den = a.n * t.denominator
    if a.n * den < 2**62:
        ks = np.arange(a.n, dtype=np.int64) * (a.p * t.denominator) + t.numerator * a.n
        d = 2.0 * cos_turns(ks % den, den)
    else:
        # residues would overflow int64; reduce exactly, round once
        turns = [(Fraction(k * a.p, a.n) + t) % 1 for k in range(a.n)]
        d = 2.0 * np.cos(TWO_PI * np.array([float(x - (2 * x > 1)) for x in turns]))
    return PeriodicJacobiMatrix(d, 1.0)


def _signed_corner_dense(diagonal: np.ndarray, corner: float) -> np.ndarray:
    """Dense periodic Jacobi matrix whose wrap-around coupling is ``corner``."""
    n = diagonal.size
    m = np.diag(diagonal)
    if n == 1:
        return m + 2.0 * corner
    k = np.arange(n - 1)
    m[k, k + 1] = m[k + 1, k] = 1.0
    m[0, n - 1] += corner
    m[n - 1, 0] += corner
    return m


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class NormResult:
    angle: RationalAngle
    norm: float
    tolerance: float
    residual: float
    method: str
    iterations: int = 0
    eigenvector: np.ndarray | None = None

    @property
    def constant(self) -> float:
        return 4.0 / self.norm


def norm_details(a: RationalAngle, tol: float = NORM_TOL, *, deadline: float | None = None) -> NormResult:
    """Top eigenvalue of ``h^(1,1)`` with its eigenvector and solver bookkeeping.

    Results are memoized per ``(angle, tol)``; a concurrent duplicate
    computation is harmless because results are deterministic.
    """
    key = (a, float(tol))
    hit = _NORM_CACHE.get(key)
    if hit is None:
        hit = _norm_compute(a, key[1], deadline)
        _NORM_CACHE[key] = hit
    return hit


_NORM_CACHE: dict = {}


def clear_cache() -> None:
    _NORM_CACHE.clear()


def _norm_compute(a: RationalAngle, tol: float, deadline) -> NormResult:
    h = jacobi_form(a)
    if a.n <= config.norm_crossover():
        dense = h.to_dense()
        w, v = np.linalg.eigh(dense)
        lam, x = float(w[-1]), v[:, -1]
        x = x * np.sign(x[np.argmax(np.abs(x))])
        res = float(np.linalg.norm(dense @ x - lam * x))
        # the spectrum is symmetric, so the top eigenvalue is the norm
        assert -w[0] <= lam + 1e-10, "top eigenvalue is not the norm"
        # backward-stable dense eigensolver: error O(n eps ||h||)
        result = NormResult(a, lam, res + 16 * a.n * np.finfo(float).eps, res, "dense", 0, x)
    else:
        r = top_eigenpair(h, tol, deadline=deadline)
        flipped = PeriodicJacobiMatrix(-h.diagonal, -1.0)
        if count_above(flipped, r.eigenvalue + r.residual + tol) != 0:
            raise ConvergenceError("lowest eigenvalue exceeds the top one in modulus")
        result = NormResult(a, r.eigenvalue, tol, r.residual, r.method, r.iterations, r.eigenvector)
    result.eigenvector.flags.writeable = False
    return result


def host_norm(a: RationalAngle, tol: float = NORM_TOL) -> float:
    """``||X + X* + Y + Y*||`` at ``theta = 2*pi*p/n``, the norm of ``h_theta``."""
    return norm_details(a, tol).norm


def dilation_constant(a: RationalAngle, tol: float = NORM_TOL) -> float:
    """``4 / ||h_theta||``."""
    return 4.0 / host_norm(a, tol)


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------


def _batched_eigvalsh(a: RationalAngle, alpha_turns: np.ndarray, beta_turns: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``h^(alpha, beta)`` for arrays of phases given in turns."""
    n = a.n
    if n > config.dense_limit():
        raise SizeError(f"dimension {n} exceeds the dense limit {config.dense_limit()}")
    xd = clock_diagonal(a)
    y = shift_matrix(n)
    out = []
    for s in range(0, len(alpha_turns), _CHUNK):
        at = alpha_turns[s : s + _CHUNK]
        bt = beta_turns[s : s + _CHUNK]
        al = np.exp(2j * np.pi * at)[:, None]
        be = np.exp(2j * np.pi * bt)[:, None, None]
        diag = 2.0 * (al * xd).real
        m = be * y + (be * y).conj().transpose(0, 2, 1)
        idx = np.arange(n)
        m[:, idx, idx] += diag
        out.append(np.linalg.eigvalsh(m))
    return np.concatenate(out, axis=0)


def _edge_eigenvalues(a: RationalAngle) -> np.ndarray:
    """Eigenvalues at the four edge phases ``alpha**n, beta**n in {+1, -1}``.

    Returns a ``(4, n)`` array of ascending eigenvalues.  All four are real
    symmetric problems: ``alpha = exp(i pi / n)`` shifts the diagonal by half a
    step, and ``beta = exp(i pi / n)`` is gauge equivalent to flipping the sign
    of the corner coupling.
    """
    rows = []
    half = Fraction(1, 2 * a.n)
    for at in (Fraction(0), half):
        d = jacobi_form(a, at).diagonal
        for corner in (1.0, -1.0):
            rows.append(np.linalg.eigvalsh(_signed_corner_dense(d, corner)))
    return np.array(rows)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sampled points of ``sigma(h_theta)`` with a Hausdorff enclosure radius."""

    angle: RationalAngle
    values: np.ndarray
    radius: float
    phase_grid: int

    def max(self) -> float:
        return float(self.values[-1])

    def min(self) -> float:
        return float(self.values[0])


def spectrum(a: RationalAngle, phase_grid: int = 16) -> Spectrum:
    """Union of ``sigma(h^(alpha, beta))`` over a uniform torus grid.

    ``alpha**n`` and ``beta**n`` run over the ``G``-th roots of unity, which is
    the same union as a ``(G*n) x (G*n)`` uniform grid on the torus.  The four
    sign pairs and the band-edge phases are always included.  Every sample is
    a true spectral point and every spectral point lies within ``radius`` of a
    sample.
    """
    g = int(phase_grid)
    if g < 2:
        raise DomainError(f"phase_grid must be >= 2, got {phase_grid}")
    n = a.n
    j = np.arange(g)
    at, bt = np.meshgrid(j / (g * n), j / (g * n), indexing="ij")
    signs = np.array([0.0, 0.5])
    sa, sb = np.meshgrid(signs, signs, indexing="ij")
    at = np.concatenate([at.ravel(), sa.ravel()])
    bt = np.concatenate([bt.ravel(), sb.ravel()])
    vals = _batched_eigvalsh(a, at, bt).ravel()
    vals = np.concatenate([vals, _edge_eigenvalues(a).ravel()])
    vals = np.sort(vals)
    # drop repeats that differ only by rounding
    vals = vals[np.concatenate([[True], np.diff(vals) > 1e-13])]
    return Spectrum(a, vals, PHASE_LIPSCHITZ * 2 * math.pi / g, g)


def hausdorff(x, y) -> float:
    """Hausdorff distance between two finite subsets of the real line."""
    x = np.sort(np.asarray(x, dtype=float))
    y = np.sort(np.asarray(y, dtype=float))
    if x.size == 0 or y.size == 0:
        raise DomainError("Hausdorff distance of an empty set")
    return max(_directed(x, y), _directed(y, x))


def _directed(x: np.ndarray, y: np.ndarray) -> float:
    i = np.clip(np.searchsorted(y, x), 1, y.size - 1) if y.size > 1 else np.zeros(x.size, int)
    d = np.abs(x - y[i])
    if y.size > 1:
        d = np.minimum(d, np.abs(x - y[i - 1]))
    return float(d.max())


# ---------------------------------------------------------------------------
# bands and the butterfly sweep
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BandRecord:
    angle: RationalAngle
    band: int
    lower: float
    upper: float
    norm: float
    constant: float

    def row(self) -> dict:
        return {
            "n": self.angle.n,
            "p": self.angle.p,
            "theta": self.angle.theta,
            "band": self.band,
            "lo": self.lower,
            "hi": self.upper,
            "norm": self.norm,
            "c": self.constant,
        }


def bands(a: RationalAngle, phase_grid: int | None = None, tol: float = 1e-9) -> list[BandRecord]:
    """Band intervals of ``h_theta``: the range of the j-th eigenvalue over all phases.

    With ``phase_grid`` every grid-sampled eigenvalue is checked against the
    computed edges; an escape larger than ``tol`` raises ``BandEdgeError``.
    """
    edges = _edge_eigenvalues(a)
    lo, hi = edges.min(axis=0), edges.max(axis=0)
    if phase_grid:
        g = int(phase_grid)
        j = np.arange(g) / (g * a.n)
        at, bt = np.meshgrid(j, j, indexing="ij")
        sampled = _batched_eigvalsh(a, at.ravel(), bt.ravel())
        escape = max(float((lo - sampled.min(axis=0)).max()), float((sampled.max(axis=0) - hi).max()))
        if escape > tol:
            raise BandEdgeError(f"sampled eigenvalues leave the band edges by {escape:.3e} at {a}")
    norm = host_norm(a)
    if abs(norm - max(-lo[0], hi[-1])) > 1e-9:
        raise BandEdgeError(f"band edges disagree with the norm at {a}")
    c = 4.0 / norm
    return [BandRecord(a, j + 1, float(lo[j]), float(hi[j]), norm, c) for j in range(a.n)]


def farey(max_denominator: int) -> list[RationalAngle]:
    """Reduced fractions in ``[0, 1)`` with denominator at most ``max_denominator``, ascending."""
    if max_denominator < 1:
        raise DomainError("max_denominator must be >= 1")
    out = []
    a, b, c, d = 0, 1, 1, max_denominator
    while (a, b) != (1, 1):
        out.append(RationalAngle(a, b))
        k = (max_denominator + b) // d
        a, b, c, d = c, d, k * c - a, k * d - b
    return out


def butterfly(max_denominator: int, workers: int | None = None, phase_grid: int | None = None) -> list[BandRecord]:
    """Band records for every reduced ``p/n`` with ``n <= max_denominator``, sorted by (n, p, band)."""
    angles = farey(max_denominator)
    workers = config.default_workers() if workers is None else int(workers)
    if workers < 1:
        raise DomainError("workers must be >= 1")

    def task(a):
        return bands(a, phase_grid)

    if workers == 1:
        chunks = [task(a) for a in angles]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(task, angles))
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.angle.n, r.angle.p, r.band))
    return records


CSV_HEADER = ["n", "p", "theta", "band", "lo", "hi", "norm", "c"]


def _fmt(x: float) -> str:
    return "%.17g" % x


def butterfly_csv(records: list[BandRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        row = r.row()
        w.writerow([str(row[k]) if isinstance(row[k], int) else _fmt(row[k]) for k in CSV_HEADER])
    return buf.getvalue()


def butterfly_json(records: list[BandRecord]) -> str:
    # floats are emitted with repr, which round-trips binary64 exactly
    return json.dumps([r.row() for r in records], indent=None, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# continuity checks
# ---------------------------------------------------------------------------


class HolderGap(NamedTuple):
    distance: float
    bound: float
    slack: float

    @property
    def ok(self) -> bool:
        return self.distance <= self.bound + self.slack


def holder_gap(a: RationalAngle, b: RationalAngle, phase_grid: int = 16) -> HolderGap:
    """Hausdorff distance of the sampled spectra against ``sqrt(2) kappa |dtheta|^(1/2)``."""
    sa, sb = spectrum(a, phase_grid), spectrum(b, phase_grid)
    dist = hausdorff(sa.values, sb.values)
    bound = math.sqrt(2.0) * KAPPA * math.sqrt(angle_distance(a, b))
    return HolderGap(dist, bound, sa.radius + sb.radius)


class LipschitzCheck(NamedTuple):
    delta: float
    bound: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return self.delta <= self.bound + self.tolerance


def lipschitz_norm_check(a: RationalAngle, b: RationalAngle) -> LipschitzCheck:
    """``| ||h_a|| - ||h_b|| |`` against ``|theta_a - theta_b|``."""
    na, nb = norm_details(a), norm_details(b)
    return LipschitzCheck(abs(na.norm - nb.norm), angle_distance(a, b), float(na.tolerance + nb.tolerance))


def lipschitz_constant_check(a: RationalAngle, b: RationalAngle, constant: float = 0.39) -> LipschitzCheck:
    """``|c_a - c_b|`` against ``0.39 |theta_a - theta_b|``."""
    na, nb = norm_details(a), norm_details(b)
    tol = float(2.0 * (na.tolerance + nb.tolerance))
    return LipschitzCheck(abs(na.constant - nb.constant), constant * angle_distance(a, b), tol)
