"""Quick end-to-end checks against closed-form values (used by ``qdil selftest``)."""

from __future__ import annotations

import math

import numpy as np

from .angles import RationalAngle
from .dilation import build_dilation, lower_bound_margin, verify_certificate
from .mathieu import dilation_constant, host_norm
from .rotrep import clock_matrix, fourier_matrix, shift_matrix, standard_pair

GOLDEN = (1 + math.sqrt(5)) / 2


def _check(name: str, value: float, expected: float, tol: float) -> dict:
    err = abs(value - expected)
    return {"name": name, "value": value, "expected": expected, "error": err, "passed": bool(err <= tol)}


def run_selftest() -> list[dict]:
    third, two_fifths = RationalAngle(1, 3), RationalAngle(2, 5)
    out = [
        _check("norm 1/3", host_norm(third), 1 + math.sqrt(3), 1e-10),
        _check("c 1/3", dilation_constant(third), 2 * math.sqrt(3) - 2, 1e-10),
        _check("norm 2/5", host_norm(two_fifths), GOLDEN + 1, 1e-10),
        _check("c 1/2", dilation_constant(RationalAngle(1, 2)), math.sqrt(2), 1e-10),
    ]
    a = RationalAngle(3, 7)
    f, x, y = fourier_matrix(a), clock_matrix(a), shift_matrix(7)
    fourier = np.linalg.norm(f.conj().T @ x @ f - y.conj().T, 2) + np.linalg.norm(f.conj().T @ y @ f - x, 2)
    out.append(_check("fourier 3/7", float(fourier), 0.0, 1e-13))
    cert = build_dilation(standard_pair(third), RationalAngle(0, 1))
    report = verify_certificate(cert)
    out.append({"name": "certificate 1/3 -> 0", "value": max(report.residuals.values()), "passed": report.passed})
    obs = lower_bound_margin(third, 1.40, 100.0, 64)
    out.append({"name": "obstruction 1/3 at r=1.40", "value": obs.margin, "slack": obs.slack, "passed": obs.certified})
    return out
