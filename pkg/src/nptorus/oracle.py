"""Brute-force surface quadrature for the single-layer potential and K*.

Nothing here uses the ring-function expansions; the only inputs are the
surface parametrisation, the density samples and the kernels
``Gamma(x) = 1/(4 pi |x|)`` and ``<x - y, nu_x> / (4 pi |x - y|^3)``
(``nu_x`` the outward normal).

Three routes:

* ``single_layer_eval`` -- tensor trapezoidal rule, valid away from the
  surface.
* ``two_sided_normal_derivative`` -- graded Gauss-Legendre panels around
  the target, a ladder of offsets on both sides of the surface and
  polynomial extrapolation to the boundary.
* ``np_apply`` -- punctured trapezoidal rule on the surface (self node
  dropped). Its error is ``c1 h + c3 h^3 + ...``; by default three nested
  source grids are combined by Richardson extrapolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .assembly import assemble_block, assemble_product_form
from .geometry import (
    ModeIndex,
    TorusShape,
    _tau_direction,
    _xyz,
    density_basis,
    density_constant,
    measure_density,
)
from .kernels import azimuthal_kernel, kstar_apply, slp_apply

TWO_PI = 2.0 * math.pi


class TooClose(ValueError):
    """Target too near the surface for the trapezoidal rule."""


class ExtrapolationDiverged(ArithmeticError):
    """Boundary-limit ladder did not settle."""


@dataclass(frozen=True)
class QuadratureGrid:
    n_sigma: int = 256
    n_phi: int = 128

    def __post_init__(self):
        for name in ("n_sigma", "n_phi"):
            v = getattr(self, name)
            if v < 4 or v % 2:
                raise ValueError(f"{name} must be an even integer >= 4, got {v}")

    @property
    def sigma(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_sigma) / self.n_sigma

    @property
    def phi(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_phi) / self.n_phi

    def refine(self, factor: int = 2) -> "QuadratureGrid":
        return QuadratureGrid(self.n_sigma * factor, self.n_phi * factor)

    def weights(self, shape: TorusShape) -> np.ndarray:
        """(n_sigma, n_phi) area weights."""
        w = measure_density(self.sigma, shape) * (TWO_PI / self.n_sigma) * (TWO_PI / self.n_phi)
        return np.repeat(w[:, None], self.n_phi, axis=1)

    def positions(self, shape: TorusShape) -> np.ndarray:
        """(n_sigma, n_phi, 3) node coordinates."""
        return _xyz(shape.tau0, self.phi[None, :], self.sigma[:, None], shape.a)

    def outward_normals(self, shape: TorusShape) -> np.ndarray:
        return -_tau_direction(shape.tau0, self.phi[None, :], self.sigma[:, None])

    def density(self, idx: ModeIndex, shape: TorusShape) -> np.ndarray:
        return density_basis(idx, self.phi[None, :], self.sigma[:, None], shape)

    def metadata(self) -> dict:
        return {"n_sigma": self.n_sigma, "n_phi": self.n_phi}


@dataclass
class SampledField:
    idx: ModeIndex
    grid: QuadratureGrid
    # (n_sigma, n_phi)
    values: np.ndarray


class OneSided(NamedTuple):
    """Boundary limits of d/d(+tau) S[phi]: ``inner`` from tau0+ (inside the
    solid torus), ``outer`` from tau0-."""

    inner: complex
    outer: complex


def _as_modes(idx):
    if isinstance(idx, ModeIndex):
        return [idx], True
    return list(idx), False


def _richardson(values, orders=(1, 3, 5)):
    """Combine results from grids with h, h/2, h/4, ... (coarse first)."""
    vals = list(values)
    for p in orders[: len(vals) - 1]:
        f = 2.0**p
        vals = [(f * fine - coarse) / (f - 1.0) for coarse, fine in zip(vals, vals[1:])]
    return vals[0]


# ---------------------------------------------------------------------------
# single-layer potential off the surface
# ---------------------------------------------------------------------------


def _local_spacing(sigma, grid: QuadratureGrid, shape: TorusShape):
    scale = shape.a / (shape.z0 - np.cos(sigma))
    return scale * np.maximum(TWO_PI / grid.n_sigma, math.sinh(shape.tau0) * TWO_PI / grid.n_phi)


def single_layer_eval(idx, point, grid: QuadratureGrid, shape: TorusShape, safety: float = 3.0):
    """S[phi_n^m](point) by the tensor trapezoidal rule.

    ``idx`` may be one ModeIndex (complex result) or a sequence (array).
    Raises TooClose when the nearest node is within ``safety`` local grid
    spacings of the point.
    """
    modes, single = _as_modes(idx)
    point = np.asarray(point, dtype=float)
    pos = grid.positions(shape).reshape(-1, 3)
    dist = np.linalg.norm(pos - point, axis=1)
    j = int(np.argmin(dist))
    h = _local_spacing(grid.sigma[j // grid.n_phi], grid, shape)
    if dist[j] < safety * h:
        raise TooClose(f"point is {dist[j]:.3g} from the surface, needs >= {safety * h:.3g}")
    w = grid.weights(shape).reshape(-1)
    q = np.array([grid.density(md, shape).reshape(-1) * w for md in modes])
    pot, _ = slp_apply(point[None, :], np.zeros((1, 3)), pos, q)
    out = pot[:, 0]
    return out[0] if single else out


# ---------------------------------------------------------------------------
# one-sided normal derivatives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ladder:
    """Offsets tau0 +- delta_k, delta_k = delta0 2^-k, k < levels, where
    delta0 (in tau) corresponds to ``scale`` * a / sinh(tau0) physically."""

    scale: float = 0.1
    levels: int = 7
    panel_order: int = 16
    rtol: float = 1e-6


def _graded_rule(center: float, h_min: float, order: int):
    """Nodes/weights on one period around ``center``: composite
    Gauss-Legendre on panels with breakpoints center +- pi 2^-j."""
    x, w = np.polynomial.legendre.leggauss(order)
    levels = max(1, math.ceil(math.log2(math.pi / h_min)))
    edges = math.pi * 2.0 ** -np.arange(levels + 1)
    breaks = np.concatenate([-edges, edges[::-1]])
    nodes, weights = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(center + 0.5 * (hi + lo) + half * x)
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _neville(xs, ys):
    """Tableau diagonal of the interpolating polynomials evaluated at 0."""
    xs = np.asarray(xs, dtype=float)
    t = [np.asarray(y) for y in ys]
    diag = [t[0]]
    for k in range(1, len(xs)):
        t = [
            (xs[i + k] * t[i] - xs[i] * t[i + 1]) / (xs[i + k] - xs[i])
            for i in range(len(t) - 1)
        ]
        diag.append(t[0])
    return diag


def two_sided_normal_derivative(idx, phi: float, sigma: float, shape: TorusShape, ladder: Ladder | None = None):
    """One-sided limits of the derivative of S[phi_n^m] along +tau at (phi, sigma).

    Returns OneSided(inner, outer); with a sequence of modes each field is an
    array. ``outer - inner`` is the jump and the mean is K*[phi_n^m].
    """
    ladder = ladder or Ladder()
    modes, single = _as_modes(idx)
    z0, sh = shape.z0, math.sinh(shape.tau0)
    delta0 = ladder.scale * (z0 - math.cos(sigma)) / sh
    deltas = delta0 * 2.0 ** -np.arange(ladder.levels)
    d_min = deltas[-1]
    s_nodes, s_w = _graded_rule(sigma, 0.5 * d_min, ladder.panel_order)
    p_nodes, p_w = _graded_rule(phi, 0.5 * d_min / sh, ladder.panel_order)
    src = _xyz(shape.tau0, p_nodes[None, :], s_nodes[:, None], shape.a).reshape(-1, 3)
    w = (measure_density(s_nodes, shape) * s_w)[:, None] * p_w[None, :]
    q = np.array([
        (density_basis(md, p_nodes[None, :], s_nodes[:, None], shape) * w).reshape(-1) for md in modes
    ])
    taus = np.concatenate([shape.tau0 + deltas, shape.tau0 - deltas])
    tgt = _xyz(taus, phi, sigma, shape.a)
    direction = np.broadcast_to(_tau_direction(shape.tau0, phi, sigma), tgt.shape)
    _, dn = slp_apply(tgt, direction, src, q)
    k = ladder.levels
    limits = []
    for side in (dn[:, :k], dn[:, k:]):
        diag = _neville(deltas, side.T)
        est, prev = diag[-1], diag[-2]
        scale = np.maximum(np.abs(side).max(axis=1), 1e-300)
        if np.any(np.abs(est - prev) > ladder.rtol * scale):
            raise ExtrapolationDiverged(
                f"ladder change {np.max(np.abs(est - prev) / scale):.2e} exceeds rtol {ladder.rtol:g}"
            )
        limits.append(est)
    inner, outer = limits
    if single:
        return OneSided(complex(inner[0]), complex(outer[0]))
    return OneSided(inner, outer)


# ---------------------------------------------------------------------------
# K* on the surface
# ---------------------------------------------------------------------------


def _azimuthal_profiles(m: int, ns, grid: QuadratureGrid, shape: TorusShape, levels: int):
    """sigma-profiles g_n with K*[phi_n^m](phi, sigma_i) = g_n[i] e^{i m phi}."""
    out = []
    for k in range(levels):
        src = grid.refine(2**k)
        self_idx = np.arange(grid.n_sigma) * 2**k
        K = azimuthal_kernel(grid.sigma, self_idx, src.sigma, src.phi, shape.tau0, shape.a, [m])[0]
        prof = np.array([density_basis(ModeIndex(m, n), 0.0, src.sigma, shape) for n in ns])
        out.append(prof @ K.T)
    return _richardson(out)


def _pointwise(modes, grid: QuadratureGrid, shape: TorusShape, levels: int):
    tx = grid.positions(shape).reshape(-1, 3)
    tnu = grid.outward_normals(shape).reshape(-1, 3)
    ii, jj = np.meshgrid(np.arange(grid.n_sigma), np.arange(grid.n_phi), indexing="ij")
    out = []
    for k in range(levels):
        src = grid.refine(2**k)
        self_idx = ((ii * 2**k) * src.n_phi + jj * 2**k).reshape(-1)
        w = src.weights(shape).reshape(-1)
        q = np.array([src.density(md, shape).reshape(-1) * w for md in modes])
        out.append(kstar_apply(tx, tnu, src.positions(shape).reshape(-1, 3), q, self_idx))
    return _richardson(out).reshape(len(modes), grid.n_sigma, grid.n_phi)


def np_apply(idx: ModeIndex, grid: QuadratureGrid, shape: TorusShape, levels: int = 3, pointwise: bool = False) -> SampledField:
    """K*[phi_n^m] at the nodes of ``grid``.

    Sources are ``grid`` refined by 1, 2, ..., 2^(levels-1); the punctured sums
    are Richardson-combined. The default uses rotational symmetry (targets on
    phi = 0, result spread by e^{i m phi}); ``pointwise=True`` evaluates every
    target node directly, which costs O(grid^2 4^levels).
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    if pointwise:
        vals = _pointwise([idx], grid, shape, levels)[0]
    else:
        g = _azimuthal_profiles(idx.m, [idx.n], grid, shape, levels)[0]
        vals = g[:, None] * np.exp(1j * idx.m * grid.phi)[None, :]
    return SampledField(idx, grid, vals)


def project_basis(field: SampledField, m: int, l: int, shape: TorusShape) -> complex:
    """Coefficient of phi_l^m in a sampled field."""
    g = field.grid
    weight = density_constant(m, l, shape) * (shape.z0 - np.cos(g.sigma))[:, None] ** 1.5
    unweighted = field.values / weight * np.exp(-1j * m * g.phi)[None, :]
    return complex(np.mean(unweighted * np.exp(-1j * l * g.sigma)[:, None]))


def oracle_matrix(m: int, N: int, shape: TorusShape, grid: QuadratureGrid | None = None, levels: int = 3) -> np.ndarray:
    """Operator-form block [n, l] from quadrature (complex, imaginary part ~0)."""
    grid = grid or QuadratureGrid()
    ns = np.arange(-N, N + 1)
    prof = _azimuthal_profiles(m, ns, grid, shape, levels)
    weight = (shape.z0 - np.cos(grid.sigma)) ** 1.5
    coef = np.fft.fft(prof / weight, axis=1) / grid.n_sigma
    # column l holds the e^{i l sigma} coefficient, divided by Gamma_ml
    consts = np.array([density_constant(m, int(l), shape) for l in ns])
    return coef[:, ns % grid.n_sigma] / consts[None, :]


def oracle_report(m: int, N: int, shape: TorusShape, grid: QuadratureGrid | None = None, levels: int = 3) -> dict:
    """Entrywise comparison of the oracle block with the analytic one, plus
    the product-form diagonal for reference."""
    grid = grid or QuadratureGrid()
    oracle = oracle_matrix(m, N, shape, grid, levels)
    analytic = assemble_block(m, N, shape).entries
    product = assemble_product_form(m, N, shape)
    ns = list(range(-N, N + 1))
    entries = []
    for i, n in enumerate(ns):
        for j, l in enumerate(ns):
            a, o = float(analytic[i, j]), oracle[i, j]
            err = abs(o - a)
            entries.append({
                "n": n, "l": l, "analytic": a, "oracle_re": float(o.real), "oracle_im": float(o.imag),
                "abs_err": err, "rel_err": err / abs(a) if a else None,
            })
    interior = ~product.affected
    diag_o = np.diag(oracle).real[interior]
    return {
        "m": m, "N": N, "a": shape.a, "tau0": shape.tau0,
        "grid": grid.metadata(), "levels": levels,
        "max_abs_err": max(e["abs_err"] for e in entries),
        "max_abs_err_product_diag": float(np.max(np.abs(diag_o - np.diag(product.entries)[interior]))),
        "entries": entries,
    }
