"""Per-m matrix blocks of the NP operator in the basis {phi_n^m}.

Row n of the operator form lists the coefficients of K*[phi_n^m] in the
basis, so ``K*[phi_n] = sum_l A[n, l] phi_l``. The coefficient form (the
matrix acting on coefficient vectors) is its transpose.

Two off-diagonal variants are exposed through ``r_form``:

``"derived"`` (default)
    ``R_nl = (-1)^m sinh(tau0)/2 e^{-|l-n| tau0} Q^m_{n-1/2} P^m_{n-1/2}
    Gamma(l-m+1/2)/Gamma(l+m+1/2)``; this is what the Fourier expansion of
    ``sinh(tau0) / (cosh(tau0) - cos(sigma))`` produces and what the quadrature
    oracle reproduces.
``"column"``
    ``R_nl = (-1)^m sinh(tau0)/2 e^{-|l-n| tau0} Q^m_{n-1/2} P^{-m}_{l-1/2}``.
    Identical on the diagonal, wrong off it (P carries the column index);
    used to compare against the closed matrix formula built from S, E, Z, Q, P.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._accel import thread_count
from .geometry import ModeIndex, TorusShape, density_basis
from .ring import gamma_half_ratio, ring_derivative, ring_P, ring_Q

CONVENTIONS = ("operator_form", "coefficient_form")
R_FORMS = ("derived", "column")


@dataclass
class NPBlock:
    m: int
    N: int
    shape: TorusShape
    entries: np.ndarray
    convention: str = "operator_form"
    r_form: str = "derived"
    # R = sinh(tau0)/2 * diag(row_factor) @ E @ diag(col_factor) in operator form
    diag: np.ndarray = field(default=None, repr=False)
    row_factor: np.ndarray = field(default=None, repr=False)
    col_factor: np.ndarray = field(default=None, repr=False)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    def operator_entries(self) -> np.ndarray:
        return self.entries if self.convention == "operator_form" else self.entries.T

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "N": self.N,
            "a": self.shape.a,
            "tau0": self.shape.tau0,
            "convention": self.convention,
            "r_form": self.r_form,
            "entries": [[float(v) for v in row] for row in self.entries],
        }


@dataclass
class StructuralMatrices:
    S: np.ndarray
    E: np.ndarray
    Z: np.ndarray
    Qm: np.ndarray
    Pm_neg: np.ndarray


@dataclass
class ProductForm:
    entries: np.ndarray
    # rows/columns where the shift S reaches outside [-N, N]
    affected: np.ndarray


def _q(m, n, z):
    return ring_Q(m, n, z).value


def _p(order, n, z):
    return ring_P(order, n, z).value


def diag_D(m: int, n: int, shape: TorusShape) -> float:
    z0 = shape.z0
    q0, q1 = _q(m, n, z0), _q(m, n + 1, z0)
    p0, p1 = _p(-m, n, z0), _p(-m, n + 1, z0)
    return 0.5 * (-1) ** m * (
        (n - m + 0.5) * q1 * p0 + (n + m + 0.5) * q0 * p1 - (2 * n + 1) * z0 * q0 * p0
    )


def diag_D_derivative_form(m: int, n: int, shape: TorusShape, deriv=ring_derivative) -> float:
    """D_nn before the derivative recurrence is applied:
    (-1)^m sinh^2(tau0)/2 * Gamma(n-m+1/2)/Gamma(n+m+1/2) * (Q P' + P Q'),
    with P, Q of order m. ``deriv(kind, order, n, z)`` supplies derivatives.
    """
    z0 = shape.z0
    p, q = _p(m, n, z0), _q(m, n, z0)
    dp, dq = deriv("P", m, n, z0), deriv("Q", m, n, z0)
    return (
        0.5 * (-1) ** m * math.sinh(shape.tau0) ** 2 / gamma_half_ratio(n, m)
        * (q * dp + p * dq)
    )


def offdiag_R(m: int, n: int, l: int, shape: TorusShape, form: str = "derived") -> float:
    tau0, z0 = shape.tau0, shape.z0
    scale = 0.5 * (-1) ** m * math.sinh(tau0) * math.exp(-abs(l - n) * tau0)
    if form == "derived":
        return scale * _q(m, n, z0) * _p(m, n, z0) / gamma_half_ratio(l, m)
    if form == "column":
        return scale * _q(m, n, z0) * _p(-m, l, z0)
    raise ValueError(f"unknown R form {form!r}")


def exponential_matrix(N: int, tau0: float) -> np.ndarray:
    idx = np.arange(-N, N + 1)
    return np.exp(-np.abs(idx[:, None] - idx[None, :]) * tau0)


def assemble_block(
    m: int, N: int, shape: TorusShape, convention: str = "operator_form",
    r_form: str = "derived",
) -> NPBlock:
    if N < 1:
        raise ValueError(f"truncation half-width N must be >= 1, got {N}")
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}")
    z0 = shape.z0
    idx = np.arange(-N, N + 1)
    q = np.array([_q(m, n, z0) for n in range(-N, N + 2)])
    p_neg = np.array([_p(-m, n, z0) for n in range(-N, N + 2)])
    q0, q1 = q[:-1], q[1:]
    p0, p1 = p_neg[:-1], p_neg[1:]
    sign = (-1) ** m
    diag = 0.5 * sign * (
        (idx - m + 0.5) * q1 * p0 + (idx + m + 0.5) * q0 * p1 - (2 * idx + 1) * z0 * q0 * p0
    )
    if r_form == "derived":
        ratios = np.array([gamma_half_ratio(n, m) for n in idx])
        # Q^m P^m = Q^m P^{-m} * ratio
        row = sign * q0 * p0 * ratios
        col = 1.0 / ratios
    elif r_form == "column":
        row = sign * q0
        col = p0
    else:
        raise ValueError(f"unknown R form {r_form!r}")
    E = exponential_matrix(N, shape.tau0)
    entries = 0.5 * math.sinh(shape.tau0) * row[:, None] * E * col[None, :]
    entries[np.diag_indices_from(entries)] += diag
    if convention == "coefficient_form":
        entries = entries.T.copy()
    return NPBlock(m, N, shape, entries, convention, r_form, diag, row, col)


def assemble_blocks(ms, N: int, shape: TorusShape, **kwargs) -> list[NPBlock]:
    """assemble_block for several m; result order follows ``ms``."""
    ms = list(ms)
    workers = min(thread_count(), max(len(ms), 1))
    if workers <= 1:
        return [assemble_block(m, N, shape, **kwargs) for m in ms]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda m: assemble_block(m, N, shape, **kwargs), ms))


def structural_matrices(m: int, N: int, shape: TorusShape) -> StructuralMatrices:
    size = 2 * N + 1
    idx = np.arange(-N, N + 1)
    z0 = shape.z0
    return StructuralMatrices(
        S=np.eye(size, k=1),
        E=exponential_matrix(N, shape.tau0),
        Z=np.diag(idx.astype(float)),
        Qm=np.diag([_q(m, n, z0) for n in idx]),
        Pm_neg=np.diag([_p(-m, n, z0) for n in idx]),
    )


def assemble_product_form(
    m: int, N: int, shape: TorusShape, z_term_factor: float = 2.0
) -> ProductForm:
    """The closed matrix formula in S, E, Z, Q, P, evaluated on [-N, N].

    ``z_term_factor`` multiplies ``cosh(tau0) (2Z + I) Q P`` in the last
    term; 2 gives the uncorrected form, 1 the corrected one.
    """
    if N < 1:
        raise ValueError(f"truncation half-width N must be >= 1, got {N}")
    sm = structural_matrices(m, N, shape)
    S, E, Z, Q, P = sm.S, sm.E, sm.Z, sm.Qm, sm.Pm_neg
    eye = np.eye(2 * N + 1)
    entries = 0.5 * (-1) ** m * (
        (Z + (0.5 - m) * eye) @ S @ Q @ S.T @ P
        + (Z + (0.5 + m) * eye) @ Q @ S @ P @ S.T
        + math.sinh(shape.tau0) * Q @ E @ P
        - z_term_factor * shape.z0 * (2 * Z + eye) @ Q @ P
    )
    affected = np.zeros(2 * N + 1, dtype=bool)
    affected[-1] = True
    return ProductForm(entries, affected)


def consistency_delta(
    m: int, N: int, shape: TorusShape, r_form: str = "column", z_term_factor: float = 2.0
) -> np.ndarray:
    """Product form minus the block, on interior indices only.

    Against the column-form R the difference is the diagonal
    -((-1)^m/2) z0 (2n+1) Q^m_{n-1/2} P^{-m}_{n-1/2}; with ``z_term_factor=1``
    it vanishes.
    """
    thm = assemble_product_form(m, N, shape, z_term_factor)
    block = assemble_block(m, N, shape, r_form=r_form)
    keep = ~thm.affected
    return (thm.entries - block.entries)[np.ix_(keep, keep)]


def predicted_delta(m: int, N: int, shape: TorusShape) -> np.ndarray:
    """Diagonal of the closed-form product-form minus block difference (interior)."""
    z0 = shape.z0
    idx = np.arange(-N, N)
    return np.array([
        -0.5 * (-1) ** m * z0 * (2 * n + 1) * _q(m, n, z0) * _p(-m, n, z0) for n in idx
    ])


def kstar_closed_form(m: int, n: int, phi, sigma, shape: TorusShape):
    """K*[phi_n^m] at surface angles, before any Fourier expansion:

    (-1)^m sinh^2(tau0)/2 * Gamma(n-m+1/2)/Gamma(n+m+1/2) * phi_n^m
    * [P Q / (z0 - cos sigma) + Q P' + P Q'], order-m functions at z0.
    """
    z0 = shape.z0
    p, q = _p(m, n, z0), _q(m, n, z0)
    dp, dq = ring_derivative("P", m, n, z0), ring_derivative("Q", m, n, z0)
    bracket = p * q / (z0 - np.cos(sigma)) + q * dp + p * dq
    factor = 0.5 * (-1) ** m * math.sinh(shape.tau0) ** 2 / gamma_half_ratio(n, m)
    return factor * density_basis(ModeIndex(m, n), phi, sigma, shape) * bracket
