import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gausspsh import functions as fn
from gausspsh import semigroups as sg
from gausspsh.measure import GrowthClassError, build_grid, integrate

G20 = build_grid(1, 20)
G40 = build_grid(1, 40)


def test_semigroup_time():
    tt = sg.SemigroupTime(1.0)
    assert tt.c == pytest.approx(math.exp(-0.5))
    assert tt.s2 == pytest.approx(1 - math.exp(-1))
    assert sg.SemigroupTime(1e-12).s2 == pytest.approx(1e-12, rel=1e-9)
    assert sg.SemigroupTime(math.inf).s2 == 1.0
    with pytest.raises(ValueError):
        sg.SemigroupTime(-1)


@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_ou_on_abs2(t):
    # P_t^ou |w|^2 = e^{-t}|z|^2 + 1 - e^{-t}
    z = np.array([[0.5 - 0.3j], [1.5j]])
    expect = np.exp(-t) * np.abs(z[:, 0]) ** 2 + 1 - np.exp(-t)
    assert np.allclose(sg.ou_apply(fn.abs_power(2), t, z, G20), expect, atol=1e-13)


@pytest.mark.parametrize("t", [0.1, 1.0, 3.0])
def test_pt_eigenfunctions(t):
    z = np.array([[0.5 - 0.3j], [0.2 + 0.9j]])
    zbar = fn.coordinate(0, conjugate=True)
    assert np.allclose(sg.pt_apply(zbar, t, z, G40), np.exp(-t) * np.conj(z[:, 0]), atol=1e-12)
    # holomorphic functions are fixed
    cube = fn.poly_field(fn.HoloPoly(1, {(3,): 1, (1,): 2}))
    assert np.allclose(sg.pt_apply(cube, t, z, G40), cube(z), atol=1e-12)
    expect = 1 + np.exp(-t) * (np.abs(z[:, 0]) ** 2 - 1)
    assert np.allclose(sg.pt_apply(fn.abs_power(2), t, z, G40), expect, atol=1e-12)


@pytest.mark.parametrize("a,t", [(0.5, 1.0), (-1.0, 0.3), (2.0, 0.7)])
def test_pt_on_exp_linear_closed_form(a, t):
    z = np.array([0.3 + 0.1j])
    s2 = sg.SemigroupTime(t).s2
    exact = np.exp(s2 * a) * np.exp(a * z[0] + (1 - s2) * np.conj(z[0]))
    assert sg.pt_apply(fn.exp_linear(a), t, z, G40) == pytest.approx(exact, rel=1e-8)


def test_endpoints():
    z = np.array([[0.3 + 0.2j]])
    f = fn.abs_power(4)
    assert sg.ou_apply(f, 0, z, G20) == pytest.approx(f(z))
    assert sg.ou_apply(f, math.inf, z, G20) == pytest.approx(2)


def test_bargmann_projection():
    z = np.array([[0.3 + 0.2j], [-1.0]])
    assert np.allclose(sg.bargmann_project(fn.abs_power(2), z, G20), 1)
    assert np.allclose(sg.bargmann_project(fn.coordinate(0, conjugate=True), z, G20), 0, atol=1e-13)
    f = fn.field_from_callable(lambda w: np.conj(w[..., 0]) * w[..., 0] ** 2, n=1)
    assert np.allclose(sg.bargmann_project(f, z, G20), 2 * z[:, 0], atol=1e-12)
    with pytest.raises(GrowthClassError):
        sg.bargmann_project(fn.exp_linear(0.5), z, G20)


@pytest.mark.parametrize("kind", ["K", "Kou"])
@pytest.mark.parametrize("t", [0.5, 2.0])
def test_kernel_mass_is_one(kind, t):
    assert sg.kernel_mass(kind, t, [0.3 - 0.4j], G40) == pytest.approx(1, abs=1e-10)


def test_kernels_agree_on_the_diagonal_modulus():
    # at z = 0 both kernels reduce to the same Gaussian in w
    w = np.array([[0.4 + 0.2j]])
    z = np.zeros((1, 1))
    assert sg.kernel("K", 1.0, z, w) == pytest.approx(sg.kernel("Kou", 1.0, z, w))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([0.3, 0.5, 0.7]), st.sampled_from([0.3, 0.5, 0.7]))
def test_compose(seed, t, s):
    rng = np.random.default_rng(seed)
    xi, w = [(rng.uniform(-0.7, 0.7) + 1j * rng.uniform(-0.7, 0.7)) for _ in range(2)]
    assert sg.compose_check(t, s, [xi], [w], G20) < 1e-6


@pytest.mark.parametrize("kind", ["K", "Kou"])
def test_circular_average(kind):
    rng = np.random.default_rng(1)
    for n in (1, 2, 3):
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        w = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        lhs, rhs = sg.circular_kernel_average(0.8, z, w, kind=kind)
        assert lhs == pytest.approx(rhs, rel=1e-8)


def test_kernel_hermitian_in_gamma_density():
    rng = np.random.default_rng(2)
    Z = rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2))
    W = rng.standard_normal((20, 2)) + 1j * rng.standard_normal((20, 2))
    assert np.max(sg.kernel_hermitian_residual("K", 0.6, Z, W)) < 1e-12
    assert np.max(sg.kernel_hermitian_residual("Kou", 0.6, Z, W)) < 1e-12


def test_equality_on_circular_fields():
    G = build_grid(2, 8)
    assert sg.equality_on_circular(fn.abs_power(4, n=2), 0.7, [0.5, 0.2j], G) < 1e-10
    assert sg.equality_on_circular(fn.abs_power(1 / 3), 0.7, [1 + 1j], G20, G40) < 1e-3
    with pytest.raises(sg.HypothesisError):
        sg.equality_on_circular(fn.exp_linear(0.5), 0.7, [0.1], G20)


def test_contraction_and_hermitian():
    f = fn.make_field(fn.LogPshProduct(((fn.HoloPoly(1, {(1,): 1, (0,): 0.5j}), 2),)))
    g16, g32 = build_grid(1, 16), build_grid(1, 32)
    for t in (0.1, 1.0, 5.0):
        assert sg.contraction_ratio(f, t, g16, g32) <= 1 + 1e-10
        assert sg.hermitian_gap(f, fn.exp_linear(0.3), t, g16, g32) < 1e-9


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_hormander_decay(t):
    f = fn.make_field(fn.LogPshProduct(((fn.HoloPoly(1, {(2,): 1, (0,): 1}), 2),)))
    lhs, rhs = sg.hormander_terms(f, t, build_grid(1, 16), build_grid(1, 32))
    assert lhs <= rhs * (1 + 1e-10)


def test_continuity_at_zero():
    prof = sg.continuity_profile(sg.bump(2.0), [1.0, 0.1, 0.01, 0.001], G20, G40)
    assert all(a > b for a, b in zip(prof, prof[1:]))
    assert prof[-1] < 1e-3


def test_bump_is_compactly_supported():
    b = sg.bump(1.5)
    assert b(np.array([[1.6]]))[0] == 0
    assert b(np.array([[0.0]]))[0] == pytest.approx(math.exp(-1))


def test_lp_signature_slope():
    sig = sg.lp_signature(1.0, 4, [1, 2, 4])
    pred = sig["predicted_slope"]
    assert pred == pytest.approx(-4 * (1 - math.exp(-1)))
    for s in sig["slopes"]:
        assert s == pytest.approx(pred, rel=1e-6)
    # p = 2 is the L^2 case: no exponential dependence on a
    sig2 = sg.lp_signature(1.0, 2, [1, 2])
    assert abs(sig2["slopes"][0]) < 1e-6


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        sg.ou_apply(fn.abs_power(2, n=2), 1.0, [0.1], G20)


def test_projection_of_circular_field_is_constant():
    from gausspsh.lab import random_poly

    rng = np.random.default_rng(8)
    Z = rng.standard_normal((5, 1)) + 1j * rng.standard_normal((5, 1))
    for _ in range(5):
        f = fn.make_field(fn.LogPshProduct(((random_poly(1, rng, 3, homogeneous=True), 2.0),)))
        proj = sg.bargmann_project(f, Z, G20)
        assert np.allclose(proj, proj[0], atol=1e-10 * max(1, abs(proj[0])))
        assert proj[0] == pytest.approx(integrate(f, G20), rel=1e-10)
