import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nptorus.geometry import (
    ModeIndex,
    SingularLocus,
    ToroidalPoint,
    TorusShape,
    cartesian_to_toroidal,
    density_basis,
    density_constant,
    harmonic_at,
    harmonic_eval,
    measure_density,
    solution_at,
    surface_frame,
    toroidal_to_cartesian,
)
from nptorus.ring import DomainError

LN3 = math.log(3.0)


@pytest.mark.parametrize(
    "p,a,expected",
    [
        (ToroidalPoint(LN3, 0.0, 0.0), 1.0, (2.0, 0.0, 0.0)),
        (ToroidalPoint(LN3, 0.0, math.pi), 1.0, (0.5, 0.0, 0.0)),
        (ToroidalPoint(LN3, math.pi / 2, 0.0), 2.0, (0.0, 4.0, 0.0)),
    ],
)
def test_toroidal_to_cartesian_examples(p, a, expected):
    np.testing.assert_allclose(toroidal_to_cartesian(p, TorusShape(a, 1.0)), expected, atol=1e-14)


@pytest.mark.parametrize("v,sigma", [((2.0, 0.0, 0.0), 0.0), ((0.5, 0.0, 0.0), math.pi)])
def test_cartesian_to_toroidal_examples(v, sigma):
    p = cartesian_to_toroidal(v, TorusShape(1.0, 1.0))
    assert p.tau == pytest.approx(LN3, abs=1e-14)
    assert p.phi == pytest.approx(0.0, abs=1e-14)
    assert p.sigma == pytest.approx(sigma, abs=1e-14)


@given(
    st.floats(0.05, 5.0), st.floats(0.0, 2 * math.pi, exclude_max=True),
    st.floats(0.0, 2 * math.pi, exclude_max=True), st.floats(0.3, 3.0),
)
@settings(max_examples=200)
def test_roundtrip(tau, phi, sigma, a):
    shape = TorusShape(a, 1.0)
    p = ToroidalPoint(tau, phi, sigma)
    x = toroidal_to_cartesian(p, shape)
    back = cartesian_to_toroidal(x, shape)
    assert back.tau == pytest.approx(tau, abs=1e-12 * max(1.0, tau))
    assert abs(math.remainder(back.phi - phi, 2 * math.pi)) < 1e-12
    assert abs(math.remainder(back.sigma - sigma, 2 * math.pi)) < 1e-11
    np.testing.assert_allclose(toroidal_to_cartesian(back, shape), x, atol=1e-12 * max(1.0, np.abs(x).max()))


def test_singular_loci():
    shape = TorusShape(1.0, 1.0)
    with pytest.raises(SingularLocus):
        cartesian_to_toroidal((1.0, 0.0, 0.0), shape)
    with pytest.raises(SingularLocus):
        cartesian_to_toroidal((0.0, 0.0, 0.7), shape)


def test_shape_validation():
    with pytest.raises(ValueError):
        TorusShape(0.0, 1.0)
    with pytest.raises(ValueError):
        TorusShape(1.0, -1.0)
    with pytest.raises(ValueError):
        ToroidalPoint(0.0, 0.0, 0.0)


def test_surface_frame_example():
    shape = TorusShape(1.0, LN3)
    f = surface_frame(0.0, 0.0, shape)
    np.testing.assert_allclose(f.position, (2.0, 0.0, 0.0), atol=1e-14)
    # +tau points toward the focal ring, here the -x direction
    np.testing.assert_allclose(f.normal, (-1.0, 0.0, 0.0), atol=1e-14)
    assert f.measure_density == pytest.approx(3.0, rel=1e-14)


def test_normal_is_finite_difference_of_position():
    shape = TorusShape(1.3, 0.9)
    for phi, sigma in [(0.3, 1.1), (2.0, 4.0), (5.5, 0.2)]:
        h = 1e-6
        d = (toroidal_to_cartesian(ToroidalPoint(0.9 + h, phi, sigma), shape)
             - toroidal_to_cartesian(ToroidalPoint(0.9 - h, phi, sigma), shape))
        np.testing.assert_allclose(surface_frame(phi, sigma, shape).normal, d / np.linalg.norm(d), atol=1e-8)


def test_normal_orthogonal_to_tangents():
    shape = TorusShape(1.0, 1.2)
    h = 1e-6
    for phi, sigma in [(0.1, 0.2), (1.0, 3.0), (4.0, 5.0)]:
        nu = surface_frame(phi, sigma, shape).normal
        pos = lambda ph, s: toroidal_to_cartesian(ToroidalPoint(1.2, ph, s), shape)
        ds = (pos(phi, sigma + h) - pos(phi, sigma - h)) / (2 * h)
        dp = (pos(phi + h, sigma) - pos(phi - h, sigma)) / (2 * h)
        assert abs(nu @ ds) / np.linalg.norm(ds) < 1e-8
        assert abs(nu @ dp) / np.linalg.norm(dp) < 1e-8
        # measure density is |ds x dp|
        assert np.linalg.norm(np.cross(ds, dp)) == pytest.approx(measure_density(sigma, shape), rel=1e-8)


@pytest.mark.parametrize("tau0", [0.5, 1.0, 2.5])
def test_area_matches_ring_torus(tau0):
    shape = TorusShape(1.7, tau0)
    n = 512
    s = 2 * np.pi * np.arange(n) / n
    area = measure_density(s, shape).sum() * (2 * np.pi / n) * 2 * np.pi
    assert area == pytest.approx(shape.area(), rel=1e-10)
    assert shape.area() == pytest.approx(4 * math.pi**2 * shape.major_radius * shape.minor_radius)


def test_density_basis_examples():
    shape = TorusShape(1.0, LN3)
    val = density_basis(ModeIndex(0, 0), 0.0, math.pi, shape)
    assert val == pytest.approx(0.75 * (8.0 / 3.0) ** 1.5, rel=1e-14)
    assert density_constant(0, 0, shape) == pytest.approx(1.0 / math.sinh(LN3))
    assert density_constant(1, 0, shape) == pytest.approx(1.0 / (4.0 * math.sinh(LN3)))


def test_density_conjugation_symmetry():
    shape = TorusShape(1.0, 0.8)
    phi, sigma = np.meshgrid(np.linspace(0, 6, 7), np.linspace(0, 6, 5))
    for m in range(-3, 4):
        for n in range(-3, 4):
            lhs = np.conj(density_basis(ModeIndex(m, n), phi, sigma, shape))
            ratio = density_constant(m, n, shape) / density_constant(-m, -n, shape)
            rhs = density_basis(ModeIndex(-m, -n), phi, sigma, shape) * ratio
            np.testing.assert_allclose(lhs, rhs, rtol=1e-14)


def test_solution_continuity_on_surface():
    shape = TorusShape(1.0, 1.0)
    for m in range(-3, 4):
        for n in range(-3, 4):
            p = ToroidalPoint(1.0, 0.7, 2.1)
            u_in = harmonic_eval("u_in", ModeIndex(m, n), p, shape)
            u_out = harmonic_eval("u_out", ModeIndex(m, n), p, shape)
            assert abs(u_in - u_out) < 1e-12


def test_branch_domain_errors():
    shape = TorusShape(1.0, 1.0)
    with pytest.raises(DomainError):
        harmonic_eval("u_in", ModeIndex(0, 0), ToroidalPoint(0.5, 0, 0), shape)
    with pytest.raises(DomainError):
        harmonic_eval("u_out", ModeIndex(0, 0), ToroidalPoint(1.5, 0, 0), shape)
    with pytest.raises(ValueError):
        harmonic_eval("X", ModeIndex(0, 0), ToroidalPoint(1.5, 0, 0), shape)


def _laplacian(f, x, h):
    total = -6.0 * f(x)
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        total += f(x + e) + f(x - e)
    return total / h**2


@pytest.mark.parametrize("m,n", [(0, 0), (1, 2), (2, -1)])
def test_harmonicity_of_outer_solution(m, n):
    shape = TorusShape(1.0, 1.0)
    x = toroidal_to_cartesian(ToroidalPoint(0.5, 0.4, 1.9), shape)
    f = lambda v: solution_at(ModeIndex(m, n), v, shape)
    lap = [abs(_laplacian(f, x, h)) for h in (4e-2, 2e-2, 1e-2)]
    # O(h^2): halving h divides the discrete Laplacian by about four
    assert lap[1] < 0.3 * lap[0]
    assert lap[2] < 0.3 * lap[1]


def test_G_and_H_are_harmonic():
    shape = TorusShape(1.0, 1.0)
    x = toroidal_to_cartesian(ToroidalPoint(1.4, 0.2, 0.6), shape)
    for kind in ("G", "H"):
        f = lambda v: harmonic_at(kind, ModeIndex(1, 1), v, shape)
        lap = [abs(_laplacian(f, x, h)) for h in (2e-2, 1e-2)]
        assert lap[1] < 0.35 * lap[0]


def test_decay_of_outer_solution():
    shape = TorusShape(1.0, 1.0)
    r1, r2 = 1e3, 2e3
    u0 = [abs(solution_at(ModeIndex(0, 1), (r, 0.0, 0.0), shape)) for r in (r1, r2)]
    u1 = [abs(solution_at(ModeIndex(1, 1), (r, 0.0, 0.0), shape)) for r in (r1, r2)]
    # m = 0 decays like 1/|x|, m = 1 like 1/|x|^2
    assert u0[0] / u0[1] == pytest.approx(2.0, rel=1e-2)
    assert u1[0] / u1[1] == pytest.approx(4.0, rel=1e-2)


def test_G_bounded_near_focal_ring_H_bounded_near_axis():
    shape = TorusShape(1.0, 1.0)
    for n in (-2, 0, 2):
        g = [abs(harmonic_eval("G", ModeIndex(1, n), ToroidalPoint(t, 0.0, 0.3), shape)) for t in (6.0, 9.0, 12.0)]
        h = [abs(harmonic_eval("H", ModeIndex(1, n), ToroidalPoint(t, 0.0, 0.3), shape)) for t in (1e-2, 1e-3, 1e-4)]
        assert max(g) < 2.0 * g[0]
        assert max(h) <= 1.01 * h[0]
