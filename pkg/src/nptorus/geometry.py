"""Toroidal coordinates, the surface tau = tau0, toroidal harmonics and the
density basis phi_n^m.

Conventions: ``x = a sinh(tau) cos(phi) / (cosh(tau) - cos(sigma))`` and so
on; the solid torus is ``tau > tau0``. ``SurfaceFrame.normal`` points along
increasing tau, which is *into* the solid torus. Code that needs the
outward normal negates it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ring import DomainError, gamma_half_ratio, ring_P, ring_Q

TWO_PI = 2.0 * math.pi


class SingularLocus(ValueError):
    """Point on the z-axis (tau = 0) or the focal ring (tau = inf)."""


@dataclass(frozen=True)
class TorusShape:
    a: float
    tau0: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"focal radius a must be positive, got {self.a}")
        if not (self.tau0 > 0 and math.isfinite(self.tau0)):
            raise ValueError(f"tau0 must be positive and finite, got {self.tau0}")

    @property
    def z0(self) -> float:
        return math.cosh(self.tau0)

    @property
    def major_radius(self) -> float:
        """Centre-line radius of the equivalent ring torus."""
        return self.a * math.cosh(self.tau0) / math.sinh(self.tau0)

    @property
    def minor_radius(self) -> float:
        return self.a / math.sinh(self.tau0)

    def area(self) -> float:
        return 4.0 * math.pi**2 * self.major_radius * self.minor_radius


@dataclass(frozen=True)
class ToroidalPoint:
    tau: float
    phi: float
    sigma: float

    def __post_init__(self):
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise ValueError(f"tau must be positive and finite, got {self.tau}")


@dataclass(frozen=True)
class ModeIndex:
    m: int
    n: int


@dataclass(frozen=True)
class SurfaceFrame:
    position: np.ndarray
    normal: np.ndarray
    measure_density: float


def _xyz(tau, phi, sigma, a):
    d = np.cosh(tau) - np.cos(sigma)
    rho = a * np.sinh(tau) / d
    return np.stack(
        np.broadcast_arrays(rho * np.cos(phi), rho * np.sin(phi), a * np.sin(sigma) / d),
        axis=-1,
    )


def _tau_direction(tau, phi, sigma):
    """Unit vector along increasing tau (vectorised)."""
    ch = np.cosh(tau)
    d = ch - np.cos(sigma)
    radial = (1.0 - ch * np.cos(sigma)) / d
    return np.stack(
        np.broadcast_arrays(
            radial * np.cos(phi), radial * np.sin(phi), -np.sinh(tau) * np.sin(sigma) / d
        ),
        axis=-1,
    )


def toroidal_to_cartesian(p: ToroidalPoint, shape: TorusShape) -> np.ndarray:
    return _xyz(p.tau, p.phi, p.sigma, shape.a)


def cartesian_to_toroidal(v, shape: TorusShape) -> ToroidalPoint:
    x, y, z = (float(c) for c in v)
    a = shape.a
    rho = math.hypot(x, y)
    d_near = math.hypot(rho - a, z)
    d_far = math.hypot(rho + a, z)
    if d_near == 0.0:
        raise SingularLocus("point lies on the focal ring")
    tau = math.log(d_far / d_near)
    if not tau > 0:
        raise SingularLocus("point lies on the z-axis")
    sigma = math.atan2(2.0 * a * z, rho * rho + z * z - a * a) % TWO_PI
    phi = math.atan2(y, x) % TWO_PI
    return ToroidalPoint(tau, phi, sigma)


def measure_density(sigma, shape: TorusShape):
    """Area element per d(sigma) d(phi) on tau = tau0."""
    d = shape.z0 - np.cos(sigma)
    return shape.a**2 * math.sinh(shape.tau0) / d**2


def surface_frame(phi: float, sigma: float, shape: TorusShape) -> SurfaceFrame:
    return SurfaceFrame(
        position=_xyz(shape.tau0, phi, sigma, shape.a),
        normal=_tau_direction(shape.tau0, phi, sigma),
        measure_density=float(measure_density(sigma, shape)),
    )


def density_constant(m: int, n: int, shape: TorusShape) -> float:
    """(-1)^m Gamma(n+m+1/2) / (a sinh(tau0) Gamma(n-m+1/2))."""
    return (-1) ** m * gamma_half_ratio(n, m) / (shape.a * math.sinh(shape.tau0))


def density_basis(idx: ModeIndex, phi, sigma, shape: TorusShape):
    """phi_n^m(phi, sigma); broadcasts over array angles."""
    c = density_constant(idx.m, idx.n, shape)
    return c * (shape.z0 - np.cos(sigma)) ** 1.5 * np.exp(1j * (idx.m * phi + idx.n * sigma))


def harmonic_eval(kind: str, idx: ModeIndex, p: ToroidalPoint, shape: TorusShape) -> complex:
    """G_mn, H_mn, or the piecewise solution u_mn at a toroidal point.

    ``u_in`` = P^m_{n-1/2}(z0) G_mn requires tau >= tau0 (inside the solid
    torus), ``u_out`` = Q^m_{n-1/2}(z0) H_mn requires tau <= tau0.
    """
    m, n = idx.m, idx.n
    z = math.cosh(p.tau)
    angular = math.sqrt(z - math.cos(p.sigma)) * np.exp(1j * (m * p.phi + n * p.sigma))
    if kind == "G":
        return ring_Q(m, n, z).value * angular
    if kind == "H":
        return ring_P(m, n, z).value * angular
    if kind == "u_in":
        if p.tau < shape.tau0:
            raise DomainError(f"u_in needs tau >= tau0, got tau={p.tau}")
        return ring_P(m, n, shape.z0).value * ring_Q(m, n, z).value * angular
    if kind == "u_out":
        if p.tau > shape.tau0:
            raise DomainError(f"u_out needs tau <= tau0, got tau={p.tau}")
        return ring_Q(m, n, shape.z0).value * ring_P(m, n, z).value * angular
    raise ValueError(f"unknown harmonic kind {kind!r}")


def harmonic_at(kind: str, idx: ModeIndex, v, shape: TorusShape) -> complex:
    """harmonic_eval at a Cartesian point."""
    return harmonic_eval(kind, idx, cartesian_to_toroidal(v, shape), shape)


def solution_at(idx: ModeIndex, v, shape: TorusShape) -> complex:
    """u_mn at a Cartesian point, picking the branch from its tau."""
    p = cartesian_to_toroidal(v, shape)
    return harmonic_eval("u_in" if p.tau >= shape.tau0 else "u_out", idx, p, shape)
