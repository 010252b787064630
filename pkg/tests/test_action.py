import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectral_lab.action import (
    ActionConfig,
    CutoffFunction,
    FermionState,
    bosonic_action,
    circle_spectrum,
    contour_radius,
    cross_term_quadratic,
    cutoff_eval,
    extended_action,
    fermionic_action,
    perturbative_expansion,
    state_projector,
    weyl_count,
    weyl_slope,
)
from spectral_lab.errors import DimensionMismatch, NegativeArgument, NonSmoothCutoff, ZeroState
from spectral_lab.leptons import LeptonModelParams, build_lepton_triple, physical_projector

from conftest import random_hermitian, random_state, random_unitary

SIGMA3 = np.diag([1.0, -1.0])
SHARP = CutoffFunction("sharp")
GAUSS = CutoffFunction("gaussian")


def test_cutoff_values():
    assert cutoff_eval(SHARP, 0.5) == 1.0
    assert cutoff_eval(SHARP, 1.5) == 0.0
    assert cutoff_eval(SHARP, 1.0) == 1.0
    assert cutoff_eval(GAUSS, 1.0) == pytest.approx(0.36788, abs=1e-5)
    assert cutoff_eval(CutoffFunction("polynomial-decay", (2,)), 1.0) == 0.25
    assert cutoff_eval(CutoffFunction("polynomial", (1, 2, 3)), 2.0) == 17.0


def test_cutoff_rejects_negative_and_bad_params():
    with pytest.raises(NegativeArgument):
        cutoff_eval(GAUSS, -0.1)
    with pytest.raises(ValueError):
        CutoffFunction("polynomial-decay", ())
    with pytest.raises(ValueError):
        CutoffFunction("lorentzian")
    assert CutoffFunction.from_dict({"kind": "polynomial", "params": [1, 0, 0]}).degree == 0


def test_state_projector_examples():
    np.testing.assert_allclose(state_projector([1, 0]), np.diag([1, 0]))
    np.testing.assert_allclose(state_projector([1, 1]), 0.5 * np.ones((2, 2)), atol=1e-15)
    np.testing.assert_allclose(state_projector([2, 0]), np.diag([1, 0]))
    with pytest.raises(ZeroState):
        state_projector([0, 0])


def test_state_projector_properties(rng):
    for _ in range(100):
        n = int(rng.integers(1, 10))
        p = state_projector(random_state(rng, n))
        assert np.max(np.abs(p @ p - p)) < 1e-12
        assert np.max(np.abs(p - p.conj().T)) < 1e-12
        assert abs(np.trace(p) - 1) < 1e-12


def test_bosonic_action_counts_with_sharp_cutoff():
    d = np.diag([-2.0, -1.0, 1.0, 2.0])
    assert bosonic_action(d, ActionConfig(1.5, SHARP)) == 2
    assert bosonic_action(d, ActionConfig(3.0, SHARP)) == 4


def test_bosonic_action_gaussian_sigma3():
    assert bosonic_action(SIGMA3, ActionConfig(1.0, GAUSS)) == pytest.approx(2 * math.exp(-1), abs=1e-12)


def test_bosonic_action_unitary_invariance(rng):
    d = random_hermitian(rng, 7)
    u = random_unitary(rng, 7)
    cfg = ActionConfig(1.3, GAUSS)
    assert abs(bosonic_action(u @ d @ u.conj().T, cfg) - bosonic_action(d, cfg)) < 1e-9


def test_bosonic_action_monotone_in_lambda(rng):
    d = random_hermitian(rng, 6, scale=3.0)
    vals = [bosonic_action(d, ActionConfig(lam, GAUSS)) for lam in np.linspace(0.1, 20, 60)]
    assert np.all(np.diff(vals) >= 0)


def test_bosonic_action_with_projector_matches_direct_trace(rng):
    d = random_hermitian(rng, 5)
    v = random_unitary(rng, 5)[:, :3]
    pi = v @ v.conj().T
    cfg = ActionConfig(0.9, GAUSS, pi)
    w, vec = np.linalg.eigh(d)
    fd = (vec * np.exp(-(w**2) / 0.81)) @ vec.conj().T
    assert bosonic_action(d, cfg) == pytest.approx(np.trace(pi @ fd @ pi).real, abs=1e-12)


def test_action_config_validates_projector():
    with pytest.raises(ValueError):
        ActionConfig(1.0, GAUSS, np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        ActionConfig(0.0)


def test_fermionic_action_examples(rng):
    assert fermionic_action(SIGMA3, [1, 0]) == 1.0
    assert fermionic_action(SIGMA3, np.array([1, 1]) / np.sqrt(2)) == pytest.approx(0.0, abs=1e-15)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        d, psi = random_hermitian(rng, n), random_state(rng, n)
        oracle = sum(np.conj(psi[i]) * d[i, k] * psi[k] for i in range(n) for k in range(n))
        assert fermionic_action(d, psi) == pytest.approx(oracle.real, abs=1e-10)
    with pytest.raises(DimensionMismatch):
        fermionic_action(SIGMA3, [1, 0, 0])


def test_extended_action_zero_state_is_bosonic(rng):
    d = random_hermitian(rng, 6)
    cfg = ActionConfig(1.1, GAUSS)
    assert extended_action(d, FermionState.zero(6), cfg) == bosonic_action(d, cfg)
    assert extended_action(d, None, cfg) == bosonic_action(d, cfg)


def test_extended_action_identity_projector(rng):
    d, psi = random_hermitian(rng, 5), random_state(rng, 5)
    a = extended_action(d, psi, ActionConfig(1.0, GAUSS))
    b = extended_action(d, psi, ActionConfig(1.0, GAUSS, np.eye(5)))
    assert a == pytest.approx(b, abs=1e-12)


def test_extended_action_linear_cutoff_matches_direct_square(rng):
    lin = CutoffFunction("polynomial", (0.0, 1.0))
    for lam in (0.5, 1.0, 3.0):
        d, psi = random_hermitian(rng, 6), random_state(rng, 6)
        p = np.outer(psi, psi.conj()) / np.vdot(psi, psi)
        m = d + p
        assert extended_action(d, psi, ActionConfig(lam, lin)) == pytest.approx(
            np.trace(m @ m).real / lam**2, abs=1e-10
        )


def _brute_force_cross_term(d, psi):
    """Sum over the four words of (DP + PD)^2 with explicit index loops."""
    v = psi / np.linalg.norm(psi)
    p = np.outer(v, v.conj())
    words = [(d, p, d, p), (d, p, p, d), (p, d, d, p), (p, d, p, d)]
    return sum(np.einsum("ij,jk,kl,li->", *w) for w in words).real


def test_cross_term_examples():
    r = cross_term_quadratic(SIGMA3, [1, 0])
    assert (r.lhs, r.paper_rhs, r.derived_rhs) == pytest.approx((4.0, 4.0, 4.0))
    r = cross_term_quadratic(SIGMA3, np.array([1, 1]) / np.sqrt(2))
    assert r.lhs == pytest.approx(2.0, abs=1e-12)
    assert r.paper_rhs == pytest.approx(1.0, abs=1e-12)
    assert r.derived_rhs == pytest.approx(2.0, abs=1e-12)
    assert r.paper_discrepancy == pytest.approx(1.0, abs=1e-12)
    r = cross_term_quadratic(np.zeros((3, 3)), [1, 2, 3])
    assert r.lhs == r.paper_rhs == r.derived_rhs == 0
    with pytest.raises(ZeroState):
        cross_term_quadratic(SIGMA3, [0, 0])


def test_cross_term_closed_form_matches_brute_force(rng):
    for _ in range(100):
        n = int(rng.integers(2, 9))
        d, psi = random_hermitian(rng, n), random_state(rng, n)
        r = cross_term_quadratic(d, psi)
        oracle = _brute_force_cross_term(d, psi)
        assert r.lhs == pytest.approx(oracle, abs=1e-10)
        assert abs(r.derived_discrepancy) < 1e-10
        assert r.as_record()["derived_rhs"] == r.derived_rhs


def _taylor_by_vandermonde(d, psi, coeffs_f, lam, pi, degree):
    """Coefficients of the polynomial e -> Tr pi f((D + e P)^2 / lam^2) pi from exact samples."""
    p = state_projector(psi)
    es = np.linspace(-1.0, 1.0, degree + 1)
    vals = []
    for e in es:
        x = (d + e * p) @ (d + e * p) / lam**2
        fx = sum(c * np.linalg.matrix_power(x, k) for k, c in enumerate(coeffs_f))
        vals.append(np.trace(pi @ fx @ pi).real)
    return np.linalg.solve(np.vander(es, increasing=True), vals)


def test_expansion_polynomial_matches_vandermonde_oracle(rng):
    poly = CutoffFunction("polynomial", (0.5, -1.0, 0.25))
    for _ in range(10):
        d, psi = random_hermitian(rng, 5), random_state(rng, 5)
        pi = np.diag([1.0, 1.0, 1.0, 0.0, 0.0]).astype(complex)
        cfg = ActionConfig(1.7, poly, pi)
        got = perturbative_expansion(d, psi, cfg, 4)
        want = _taylor_by_vandermonde(d, psi, poly.params, 1.7, pi, 4)
        np.testing.assert_allclose(got, want, atol=1e-9)


def test_expansion_linear_cutoff_coefficients(rng):
    d, psi = random_hermitian(rng, 4), random_state(rng, 4)
    lam = 1.6
    p = state_projector(psi)
    c = perturbative_expansion(d, psi, ActionConfig(lam, CutoffFunction("polynomial", (0, 1))), 2)
    assert c[1] == pytest.approx(np.trace(d @ p + p @ d).real / lam**2, abs=1e-12)
    assert c[2] == pytest.approx(1 / lam**2, abs=1e-12)


def test_expansion_order_zero_and_zero_state(rng):
    d = random_hermitian(rng, 4)
    cfg = ActionConfig(1.0, GAUSS)
    assert perturbative_expansion(d, [1, 0, 0, 0], cfg, 0) == [bosonic_action(d, cfg)]
    c = perturbative_expansion(d, FermionState.zero(4), cfg, 3)
    assert c[1:] == [0.0, 0.0, 0.0]


def test_expansion_sharp_cutoff_rejected(rng):
    d = random_hermitian(rng, 3)
    assert perturbative_expansion(d, [1, 0, 0], ActionConfig(1.0, SHARP), 0) == [bosonic_action(d, ActionConfig(1.0, SHARP))]
    with pytest.raises(NonSmoothCutoff):
        perturbative_expansion(d, [1, 0, 0], ActionConfig(1.0, SHARP), 1)
    with pytest.raises(ValueError):
        perturbative_expansion(d, [1, 0, 0], ActionConfig(1.0, GAUSS), 5)


def _richardson_derivatives(s, h):
    """First and second derivatives at 0 by central differences, extrapolated once."""
    def d1(h):
        return (s(h) - s(-h)) / (2 * h)

    def d2(h):
        return (s(h) - 2 * s(0.0) + s(-h)) / h**2

    return (4 * d1(h / 2) - d1(h)) / 3, (4 * d2(h / 2) - d2(h)) / 3


@pytest.mark.parametrize("cutoff", [GAUSS, CutoffFunction("polynomial-decay", (3.0,))])
def test_expansion_smooth_cutoff_matches_finite_differences(rng, cutoff):
    for lam in (0.7, 2.0):
        d, psi = random_hermitian(rng, 5), random_state(rng, 5)
        cfg = ActionConfig(lam, cutoff)

        def s(e):
            return extended_action(d + (e - 1) * state_projector(psi), psi, cfg)

        c = perturbative_expansion(d, psi, cfg, 4)
        first, second = _richardson_derivatives(s, 1e-3 * np.linalg.norm(d, 2))
        assert c[1] == pytest.approx(first, rel=1e-7, abs=1e-9)
        assert c[2] == pytest.approx(second / 2, rel=1e-5, abs=1e-7)


def test_expansion_gaussian_series_converges(rng):
    # s is entire in e; on a small state weight the truncated series is accurate
    d, psi = random_hermitian(rng, 4), random_state(rng, 4)
    cfg = ActionConfig(2.0, GAUSS)
    c = perturbative_expansion(d, psi, cfg, 4)
    e = 0.05
    s = extended_action(d + (e - 1) * state_projector(psi), psi, cfg)
    assert sum(ck * e**k for k, ck in enumerate(c)) == pytest.approx(s, abs=1e-8)


def test_contour_radius_bounded():
    assert contour_radius(np.zeros((2, 2)), 1.0) == pytest.approx(math.sqrt(0.5))
    assert contour_radius(np.eye(2), 100.0) == 1.0
    r = contour_radius(10 * np.eye(2), 1.0)
    assert 0 < r < 0.05
    assert r * (2 * 10 + r) == pytest.approx(0.5)


def test_projected_expansion_on_lepton_model():
    p = LeptonModelParams(y_e=0.6, y_nu=0.2, v=1.0, include_sterile=True)
    t = build_lepton_triple(p)
    psi = np.zeros(8, complex)
    psi[[0, 3]] = [1.0, 0.5]
    poly = CutoffFunction("polynomial", (1.0, -0.5, 0.1))
    cfg = ActionConfig(1.0, poly, physical_projector(p))
    c = perturbative_expansion(t, psi, cfg, 4)
    assert math.fsum(c) == pytest.approx(extended_action(t, psi, cfg), abs=1e-9)


def test_weyl_count_examples():
    spec = circle_spectrum(-50, 49)
    assert spec.size == 100 and spec[0] == -49.5 and spec[-1] == 49.5
    assert weyl_count(spec, 10.2) == 20
    assert weyl_count(spec, 0.4) == 0
    assert weyl_slope(spec, 10, 40) == pytest.approx(2.0, rel=0.05)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=1, max_size=30), st.floats(0.01, 60))
def test_weyl_count_equals_sharp_bosonic_action(spectrum, lam):
    d = np.diag(spectrum)
    assert weyl_count(spectrum, lam) == round(bosonic_action(d, ActionConfig(lam, SHARP)))
