import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levels_lab.bridge import (
    Bridge,
    GluedMap,
    GridSpec,
    PowerModulus,
    check_lemma_hypothesis,
    empirical_omega_norm,
    lemma_value,
    phi,
    phi_inv,
    unit_derivative,
    unit_derivative_half,
    unit_half,
)
from levels_lab.errors import DomainError, ParameterError

ULP4 = 4 * np.finfo(float).eps


def phi_oracle(a, b, x):
    a, b, x = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(x)
    return -mpmath.cot(mpmath.pi * (x - a) / (b - a)) / (b - a)


def test_phi_examples():
    assert phi(0, 1, 0.5) == pytest.approx(0.0, abs=1e-16)
    assert phi(0, 1, 0.25) == pytest.approx(-1.0, rel=1e-15)
    assert phi(0, 1, 0.75) == pytest.approx(1.0, rel=1e-15)
    assert phi(2, 4, 3) == pytest.approx(0.0, abs=1e-16)


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(1e-6, 10), st.floats(1e-6, 1 - 1e-6))
def test_phi_matches_cot_oracle(a, L, t):
    b = a + L
    x = a + t * L
    if not a < x < b:
        return
    want = float(phi_oracle(a, b, x))
    assert phi(a, b, x) == pytest.approx(want, rel=1e-9, abs=1e-9 / L)


@settings(max_examples=200)
@given(st.floats(1e-9, 1 - 1e-9))
def test_phi_inv_roundtrip_x(t):
    x = t
    assert abs(phi_inv(0.0, 1.0, phi(0.0, 1.0, x)) - x) <= ULP4 * max(x, 1 - x) + 4 * np.finfo(float).eps


@settings(max_examples=200)
@given(st.floats(-1e12, -1.0))
def test_phi_inv_roundtrip_y(y):
    # away from the poles and the centre the chart is well conditioned
    assert phi(0.0, 1.0, phi_inv(0.0, 1.0, y)) == pytest.approx(y, rel=ULP4 * 4)


def test_phi_domain_errors():
    with pytest.raises(DomainError):
        phi(0, 1, 0.0)
    with pytest.raises(DomainError):
        phi_inv(0, 1, float("inf"))


def test_unit_bridge_identity_at_ratio_one():
    for t in np.linspace(0, 0.5, 11):
        assert unit_half(t, 1.0) == pytest.approx(t, abs=1e-16)
        assert unit_derivative_half(t, 1.0) == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=200)
@given(st.floats(0.0, 0.5), st.floats(0.05, 20.0))
def test_unit_derivative_matches_tan_formula(t, r):
    w = math.tan(math.pi * t)
    want = r * r * (1 + w * w) / (r * r + w * w)
    assert unit_derivative_half(t, r) == pytest.approx(want, rel=1e-12)
    assert float(unit_derivative(np.array(t), np.array(1 - t), r)) == pytest.approx(want, rel=1e-12)


def test_unit_half_is_half_of_bridge():
    for r in (0.5, 1.7, 3.0):
        assert unit_half(0.5, r) == pytest.approx(0.5, abs=1e-16)
        assert unit_half(0.0, r) == 0.0


@settings(max_examples=100)
@given(st.floats(-5, 5), st.floats(1e-4, 3), st.floats(-5, 5), st.floats(1e-4, 3))
def test_bridge_endpoints_and_monotone(a, L, a2, L2):
    br = Bridge(a, a + L, a2, a2 + L2)
    assert br.eval(br.a) == br.a2
    assert br.eval(br.b) == pytest.approx(br.b2, abs=1e-15 * (1 + abs(br.b2)))
    assert br.deriv(br.a) == pytest.approx(1.0, abs=1e-15)
    assert br.deriv(br.b) == pytest.approx(1.0, abs=1e-15)
    xs = np.linspace(br.a, br.b, 41)
    ys = [br.eval(x) for x in xs]
    assert all(p <= q for p, q in zip(ys, ys[1:]))


@settings(max_examples=100)
@given(st.floats(0.05, 0.95), st.floats(0.3, 3.0))
def test_bridge_inverse_and_derivative(t, r):
    br = Bridge(0.0, 1.0, 2.0, 2.0 + r)
    x = t
    y = br.eval(x)
    assert br.inverse().eval(y) == pytest.approx(x, abs=1e-13)
    h = 1e-6
    fd = (br.eval(x + h) - br.eval(x - h)) / (2 * h)
    assert br.deriv(x) == pytest.approx(fd, rel=1e-7)
    assert br.deriv(x) * br.inverse().deriv(y) == pytest.approx(1.0, rel=1e-12)


def test_bridge_rejects_degenerate():
    with pytest.raises(DomainError):
        Bridge(1.0, 1.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        Bridge(0.0, 1.0, 0.0, 1.0).eval(2.0)


def test_modulus_validation():
    with pytest.raises(ParameterError):
        PowerModulus(0.0)
    assert PowerModulus(0.5)(4.0) == 2.0


def test_lemma_certificate_fields():
    mod = PowerModulus(0.5)
    cert = check_lemma_hypothesis((0.0, 0.01), (0.0, 0.011), mod, M=1.0)
    assert cert.value == pytest.approx(0.1 / 0.1, rel=1e-12)
    assert cert.passed and cert.norm_bound == pytest.approx(6 * math.pi)
    assert not check_lemma_hypothesis((0.0, 0.01), (0.0, 0.03), mod, M=100.0).ratio_ok
    assert not check_lemma_hypothesis((0.0, 0.01), (0.0, 0.011), mod, M=0.5).bound_ok


def test_grid_refinement_is_nested():
    coarse = GridSpec(samples=16).positions(3)
    fine = GridSpec(samples=64).positions(3)
    assert np.array_equal(fine[:16], coarse)


lemma_cases = st.tuples(
    st.floats(1e-6, 1.0),  # |I|
    st.floats(0.55, 1.95),  # |I| / |J| before clipping by the modulus
    st.floats(0.05, 1.0),  # alpha
    st.floats(1.0, 4.0),  # slack on M
)


def _roundoff_floor(mod, h_min):
    # D carries a few ulps of rounding; divided by omega at the finest scale
    return 16 * np.finfo(float).eps / float(mod(h_min))


def _lemma_instance(L, q, alpha, slack):
    mod = PowerModulus(alpha)
    br = Bridge(0.3, 0.3 + L, 0.1, 0.1 + L / q)
    # M from the rounded lengths the bridge actually sees
    M = max(lemma_value(br.length_in, br.length_out, mod), 1e-300) * slack
    return mod, br, M


@settings(max_examples=200, deadline=None)
@given(lemma_cases)
def test_lemma_seminorm_bound(case):
    L, q, alpha, slack = case
    mod, br, M = _lemma_instance(L, q, alpha, slack)
    assert check_lemma_hypothesis((br.a, br.b), (br.a2, br.b2), mod, M).passed
    grid = GridSpec(j_max=12, samples=32)
    norm = empirical_omega_norm(br.deriv_array, (br.a, br.b), mod, grid)
    assert norm <= 6 * math.pi * M + _roundoff_floor(mod, br.length_in * 2.0 ** -grid.j_max)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-5, 0.2), st.floats(0.55, 1.95)), min_size=2, max_size=6), st.floats(0.05, 1.0))
def test_glued_chain_seminorm_bound(pieces, alpha):
    mod = PowerModulus(alpha)
    bridges, x, y, M = [], 0.0, 0.0, 0.0
    for L, q in pieces:
        br = Bridge(x, x + L, y, y + L / q)
        M = max(M, lemma_value(br.length_in, br.length_out, mod))
        bridges.append(br)
        x, y = br.b, br.b2
    M = max(M, 1e-300)
    glued = GluedMap(bridges)
    grid = GridSpec(j_max=14, samples=64)
    norm = empirical_omega_norm(glued.deriv_array, glued.interval, mod, grid)
    span = glued.interval[1] - glued.interval[0]
    assert norm <= 12 * math.pi * M + _roundoff_floor(mod, span * 2.0 ** -grid.j_max)


def test_glued_map_requires_contiguity():
    with pytest.raises(DomainError):
        GluedMap([Bridge(0, 1, 0, 1), Bridge(1.5, 2, 1, 2)])
    g = GluedMap([Bridge(0, 1, 0, 2), Bridge(1, 2, 2, 2.5)])
    assert g.eval(1.0) == 2.0
    assert g.deriv_array(np.array([0.0, 1.0, 2.0])) == pytest.approx([1.0, 1.0, 1.0])
