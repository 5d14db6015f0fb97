import json
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from qdilation.angles import RationalAngle
from qdilation.dilation import (
    DilationCertificate,
    build_dilation,
    compression_defect_check,
    lower_bound_margin,
    optimal_state,
    verify_certificate,
    weyl_bound_check,
)
from qdilation.errors import DomainError, ShapeError, SizeError
from qdilation.mathieu import dilation_constant, farey, host_norm
from qdilation.rotrep import PhasePair, clock_matrix, shift_matrix, standard_pair, unitarity_defect

GOLDEN = (1 + math.sqrt(5)) / 2
ZERO = RationalAngle(0, 1)


def test_state_trivial():
    s = optimal_state(ZERO)
    assert s.x.tolist() == [1.0]
    assert s.phi_u == pytest.approx(1) and s.phi_v == pytest.approx(1)


def test_state_two_fifths():
    s = optimal_state(RationalAngle(2, 5))
    ref = np.array([2 * GOLDEN, 1, 1, 1, 1])
    assert abs(abs(s.x @ ref) / np.linalg.norm(ref) - 1) < 1e-12
    assert s.phi_u == pytest.approx((GOLDEN + 1) / 4, abs=1e-12)
    assert s.phi_v == pytest.approx((GOLDEN + 1) / 4, abs=1e-12)
    assert not s.symmetrized


def test_state_third():
    s = optimal_state(RationalAngle(1, 3))
    assert abs(s.phi_u) == pytest.approx((1 + math.sqrt(3)) / 4, abs=1e-12)
    assert abs(s.phi_u - s.phi_v) < 1e-12


@given(st.builds(RationalAngle, st.integers(0, 30), st.integers(1, 30)))
def test_state_values_equal_quarter_norm(g):
    s = optimal_state(g)
    q = host_norm(g) / 4
    assert abs(abs(s.phi_u) - q) < 1e-10 and abs(abs(s.phi_v) - q) < 1e-10


def test_symmetrized_state_keeps_values():
    g = RationalAngle(2, 7)
    plain, sym = optimal_state(g), optimal_state(g, force_symmetrize=True)
    assert sym.symmetrized and sym.dim == 4 * plain.dim
    assert abs(np.linalg.norm(sym.x) - 1) < 1e-14
    assert sym.phi_u == pytest.approx(plain.phi_u, abs=1e-12)
    assert sym.phi_v == pytest.approx(plain.phi_v, abs=1e-12)


def test_trivial_certificate():
    pair = standard_pair(RationalAngle(1, 3))
    cert = build_dilation(pair, RationalAngle(1, 3))
    assert cert.gamma == ZERO and cert.scale == pytest.approx(1.0)
    assert np.allclose(cert.U_prime, pair.U)
    assert verify_certificate(cert).passed


def test_third_to_commuting():
    pair = standard_pair(RationalAngle(1, 3))
    cert = build_dilation(pair, ZERO)
    assert cert.dim == 9
    assert cert.scale == pytest.approx(2 * math.sqrt(3) - 2, abs=1e-12)
    w = cert.W
    assert np.linalg.norm(w.conj().T @ cert.U_prime @ w - pair.U, 2) < 1e-12
    up, vp = cert.U_prime, cert.V_prime
    assert np.linalg.norm(up @ vp - vp @ up, 2) < 1e-12
    assert unitarity_defect(up / cert.scale) < 1e-12


def test_half_turn_to_commuting():
    cert = build_dilation(standard_pair(RationalAngle(1, 2)), ZERO)
    assert cert.dim == 4
    assert cert.scale == pytest.approx(math.sqrt(2), abs=1e-12)
    assert verify_certificate(cert).passed


def test_scaled_isometry_fails():
    cert = build_dilation(standard_pair(RationalAngle(1, 3)), ZERO)
    report = verify_certificate(cert.replace(W=0.9 * cert.W))
    assert not report.passed
    assert "isometry" in report.failures
    assert report.residuals["isometry"] == pytest.approx(0.19, abs=1e-12)


def test_halved_scale_fails():
    cert = build_dilation(standard_pair(RationalAngle(1, 3)), ZERO)
    report = verify_certificate(cert.replace(scale=cert.scale / 2))
    assert {"norm_u", "norm_v", "scale"} <= set(report.failures)


def test_verifier_ignores_stored_residuals():
    cert = build_dilation(standard_pair(RationalAngle(2, 5)), RationalAngle(1, 7))
    bad = cert.replace(V_prime=cert.V_prime @ np.diag(np.exp(1j * np.arange(cert.dim))))
    assert bad.residuals == cert.residuals
    assert not verify_certificate(bad).passed


def test_certificate_json_roundtrip():
    cert = build_dilation(standard_pair(RationalAngle(2, 5)), RationalAngle(1, 4))
    text = cert.dumps()
    back = DilationCertificate.from_json(text)
    assert back.theta_prime == RationalAngle(1, 4)
    assert back.gamma == cert.gamma
    assert verify_certificate(text).passed
    assert verify_certificate(json.loads(text)).passed


def test_sparse_certificate_path():
    cert = build_dilation(standard_pair(RationalAngle(1, 23)), ZERO)
    assert cert.dim == 529 and sp.issparse(cert.U_prime)
    report = verify_certificate(DilationCertificate.from_json(cert.dumps()))
    assert report.passed
    assert report.residuals["scale"] < 1e-12


def test_forced_symmetrization_certificate():
    cert = build_dilation(standard_pair(RationalAngle(1, 3)), ZERO, force_symmetrize=True)
    assert cert.symmetrized and cert.dim == 36
    assert verify_certificate(cert).passed


def test_noncommuting_source_rejected():
    a = RationalAngle(1, 3)
    bad = PhasePair(clock_matrix(a), shift_matrix(3), RationalAngle(1, 4))
    with pytest.raises(DomainError):
        build_dilation(bad, ZERO)
    with pytest.raises(DomainError):
        build_dilation(PhasePair(2 * np.eye(2), np.eye(2), ZERO), ZERO)


def test_dimension_cap():
    with pytest.raises(SizeError):
        build_dilation(standard_pair(RationalAngle(1, 30)), ZERO, max_dim=500)


def test_dimension_cap_env(monkeypatch):
    monkeypatch.setenv("QDIL_MAX_DIM", "8")
    with pytest.raises(SizeError):
        build_dilation(standard_pair(RationalAngle(1, 3)), ZERO)


def test_inconsistent_shapes():
    cert = build_dilation(standard_pair(RationalAngle(1, 3)), ZERO)
    with pytest.raises(ShapeError):
        verify_certificate(cert.replace(W=cert.W[:-1]))


@given(
    st.builds(RationalAngle, st.integers(0, 8), st.integers(1, 8)),
    st.builds(RationalAngle, st.integers(0, 8), st.integers(1, 8)),
)
def test_any_pair_of_angles_dilates(src, dst):
    cert = build_dilation(standard_pair(src), dst)
    assert verify_certificate(cert).passed
    assert cert.scale == pytest.approx(dilation_constant(dst - src), abs=1e-12)


def test_weyl_examples():
    assert weyl_bound_check(ZERO) == pytest.approx((1.0, 1.0))
    c, bound = weyl_bound_check(RationalAngle(1, 3))
    assert c == pytest.approx(2 * math.sqrt(3) - 2, abs=1e-12)
    assert bound == pytest.approx(math.exp(math.pi / 6))
    c, bound = weyl_bound_check(RationalAngle(1, 2))
    assert c == pytest.approx(math.sqrt(2)) and bound == pytest.approx(math.exp(math.pi / 4))


@given(st.builds(RationalAngle, st.integers(0, 40), st.integers(1, 40)))
def test_weyl_bound_holds(g):
    assert weyl_bound_check(g).ok


def test_obstruction_third():
    r = lower_bound_margin(RationalAngle(1, 3), 1.40)
    assert r.certified and r.margin > 0
    assert r.fixed_vector_residual < 1e-12
    assert r.lhs == pytest.approx(102.0**2)


def test_obstruction_closed_form_floor():
    r = lower_bound_margin(RationalAngle(1, 3), 1.0, 10.0)
    assert r.closed_form == pytest.approx(4 - (1 + math.sqrt(3)), abs=1e-12)
    assert r.margin >= r.closed_form - r.slack


def test_obstruction_absent_when_commuting():
    for r in (1.0, 1.5):
        rep = lower_bound_margin(ZERO, r, 50.0, 64)
        assert rep.margin <= rep.slack
        assert not rep.certified


def test_obstruction_domain():
    with pytest.raises(DomainError):
        lower_bound_margin(RationalAngle(1, 3), -1.0)
    with pytest.raises(DomainError):
        lower_bound_margin(RationalAngle(1, 3), 1.0, grid=4)


def test_obstruction_brackets_constant_for_small_denominators():
    for g in farey(12)[1:]:
        c = dilation_constant(g)
        below = lower_bound_margin(g, c - 0.01)
        assert below.certified, g


@pytest.mark.slow
def test_obstruction_pincer_to_forty():
    for g in farey(40)[1:]:
        assert lower_bound_margin(g, dilation_constant(g) - 0.01).certified, g


@given(st.floats(0, 1), st.integers(1, 6), st.integers(0, 1000))
def test_compression_defect_bound(c, m, seed):
    chk = compression_defect_check(c, m, seed)
    assert chk.compression_error < 1e-12
    assert chk.ok


def test_compression_defect_domain():
    with pytest.raises(DomainError):
        compression_defect_check(1.5, 3)
