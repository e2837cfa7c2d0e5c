"""Ring (toroidal) functions: associated Legendre functions of half-integer
degree, P^m_{n-1/2}(z) and Q^m_{n-1/2}(z), for real z > 1.

Values come from direct quadrature of integral representations:

* ``P`` -- periodic trapezoidal rule over one period of
  ``cos(m t) / (z + sqrt(z^2-1) cos t)^(n+1/2)``, refined by node doubling.
* ``Q`` -- double-exponential (exp-sinh) quadrature of
  ``cosh(m t) / (z + sqrt(z^2-1) cosh t)^(n+1/2)`` on ``[0, inf)`` when that
  integral converges (``|n| >= |m|``), otherwise the Fourier-cosine form
  ``Q^m_{n-1/2}(z) = (-1)^m Gamma(m+1/2) (z^2-1)^(m/2) / (2 sqrt(2 pi))
  * int_0^{2pi} cos(n t) / (z - cos t)^(m+1/2) dt``.

Both kinds use the convention without the Condon-Shortley phase (the
"type 3" functions of Hobson), so for example ``P^1_{1/2}(z) > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

DEFAULT_TOL = 1e-13
_MAX_PERIODIC_NODES = 1 << 17
_MIN_DE_STEP = 2.0**-9
_DE_UMAX = 4.5
_TAIL_CUTOFF = 1e-18
_EPS = 4.0 * np.finfo(float).eps


class DomainError(ValueError):
    """Argument outside the supported domain (z <= 1, region mismatch...)."""


class ConvergenceError(ArithmeticError):
    """Quadrature refinement hit its cap without meeting the tolerance."""


class OverflowGuard(ArithmeticError):
    """cosh(m t) growth defeats the decay of the Q integrand (|m| >= n + 1/2)."""


@dataclass(frozen=True)
class RingFunctionValue:
    kind: str
    m: int
    n: int
    z: float
    value: float
    est_abs_error: float

    def __float__(self) -> float:
        return float(self.value)


def _pochhammer(x0: float, k: int) -> float:
    """Gamma(x0 + k) / Gamma(x0) for integer k as a finite product."""
    out = 1.0
    if k >= 0:
        for j in range(k):
            out *= x0 + j
    else:
        for j in range(1, -k + 1):
            out /= x0 - j
    return out


def gamma_half_ratio(n: int, m: int) -> float:
    """Gamma(n + m + 1/2) / Gamma(n - m + 1/2), exact up to rounding.

    All factors are half-integers, so the product never hits a pole.

    >>> gamma_half_ratio(1, 1)
    0.75
    >>> gamma_half_ratio(0, 1)
    -0.25
    """
    return _pochhammer(n - m + 0.5, 2 * m)


def _check_z(z: float) -> float:
    z = float(z)
    if not z > 1.0:
        raise DomainError(f"ring functions need z > 1, got {z!r}")
    return z


def _periodic_trapezoid(f, tol: float, m_min: int):
    """Trapezoidal rule on [0, 2 pi) with node doubling.

    Returns (integral, |I_2M - I_M|). Convergence is geometric for the
    analytic periodic integrands used here, so the last difference bounds
    the error of the returned (finer) value.
    """
    n_nodes = 32
    while n_nodes < m_min:
        n_nodes *= 2
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    vals = f(theta)
    total = vals.sum()
    abs_total = np.abs(vals).sum()
    integral = 2.0 * np.pi * total / n_nodes
    while n_nodes < _MAX_PERIODIC_NODES:
        mid = 2.0 * np.pi * (np.arange(n_nodes) + 0.5) / n_nodes
        vals = f(mid)
        total += vals.sum()
        abs_total += np.abs(vals).sum()
        n_nodes *= 2
        refined = 2.0 * np.pi * total / n_nodes
        err = abs(refined - integral)
        integral = refined
        l1 = 2.0 * np.pi * abs_total / n_nodes
        if err <= tol * l1:
            # rounding in the sum itself is never below a few ulps of the L1 mass
            return integral, max(err, _EPS * l1)
    raise ConvergenceError(f"periodic trapezoid did not converge with {n_nodes} nodes")


def _exp_sinh(log_f, tol: float):
    """Exp-sinh quadrature of a positive integrand on [0, inf).

    ``log_f`` returns the log of the integrand at t. Substitution
    t = exp(pi/2 sinh u), trapezoid in u with step halving. Terms below
    ``_TAIL_CUTOFF`` of the largest term are dropped.
    """

    def level_sum(u):
        t_log = 0.5 * np.pi * np.sinh(u)
        t = np.exp(t_log)
        log_terms = log_f(t) + np.log(0.5 * np.pi * np.cosh(u)) + t_log
        return log_terms

    h = 0.5
    u = np.arange(-_DE_UMAX, _DE_UMAX + h / 2, h)
    logs = level_sum(u)
    peak = logs.max()
    terms = np.exp(logs - peak)
    terms[terms < _TAIL_CUTOFF] = 0.0
    total = terms.sum()
    integral = h * total
    while h > _MIN_DE_STEP:
        h *= 0.5
        u = np.arange(-_DE_UMAX + h, _DE_UMAX, 2 * h)
        logs = level_sum(u)
        terms = np.exp(logs - peak)
        terms[terms < _TAIL_CUTOFF] = 0.0
        total += terms.sum()
        refined = h * total
        err = abs(refined - integral)
        integral = refined
        if err <= tol * integral:
            return integral * math.exp(peak), max(err, _EPS * integral) * math.exp(peak)
    raise ConvergenceError("exp-sinh quadrature did not converge")


def _log_cosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _odd_factorial(k: int) -> float:
    out = 1.0
    for j in range(1, k + 1, 2):
        out *= j
    return out


@lru_cache(maxsize=65536)
def _p_cosine(m: int, n: int, z: float, tol: float):
    s = math.sqrt((z - 1.0) * (z + 1.0))
    z_minus_s = 1.0 / (z + s)
    power = n + 0.5

    def integrand(theta):
        base = z_minus_s + 2.0 * s * np.cos(0.5 * theta) ** 2
        return np.cos(m * theta) * base**-power

    integral, err = _periodic_trapezoid(integrand, tol, 8 * (abs(m) + 1))
    pref = (-1) ** m / (2.0 * np.pi) * _pochhammer(n - m + 0.5, m)
    return pref * integral, abs(pref) * err


@lru_cache(maxsize=65536)
def _p_positive(m: int, n: int, z: float, tol: float):
    # |m|-fold integration by parts of the cosine form:
    # int_0^pi cos(k t) g^p dt = p(p-1)..(p-k+1) B^k / (2k-1)!! int_0^pi sin^2k(t) g^(p-k) dt
    # for g = A + B cos t; the right-hand integrand is positive, so no cancellation.
    k = abs(m)
    s = math.sqrt((z - 1.0) * (z + 1.0))
    z_minus_s = 1.0 / (z + s)
    power = n + 0.5 + k

    def integrand(theta):
        base = z_minus_s + 2.0 * s * np.cos(0.5 * theta) ** 2
        return np.sin(theta) ** (2 * k) * base**-power

    integral, err = _periodic_trapezoid(integrand, tol, 8 * (k + 1))
    pref = s**k / (2.0 * np.pi * _odd_factorial(2 * k - 1))
    if m > 0:
        pref *= gamma_half_ratio(n, m)
    return pref * integral, abs(pref) * err


@lru_cache(maxsize=65536)
def _q_heine(m: int, n: int, z: float, tol: float):
    gap = n + 0.5 - abs(m)
    if gap <= 0:
        raise OverflowGuard(
            f"Q integral diverges for m={m}, n={n}: cosh(mt) beats the decay"
        )
    s = math.sqrt((z - 1.0) * (z + 1.0))
    log_z, log_s = math.log(z), math.log(s)
    power = n + 0.5

    def log_f(t):
        return _log_cosh(m * t) - power * np.logaddexp(log_z, log_s + _log_cosh(t))

    integral, err = _exp_sinh(log_f, tol)
    pref = (-1) ** m * _pochhammer(n - m + 0.5, m)
    return pref * integral, abs(pref) * err


@lru_cache(maxsize=65536)
def _q_fourier(m: int, n: int, z: float, tol: float):
    # Cosine form after |n|-fold integration by parts (see _p_positive).
    k = abs(n)
    zm1 = z - 1.0
    power = m + 0.5 + k

    def integrand(theta):
        base = zm1 + 2.0 * np.sin(0.5 * theta) ** 2
        return np.sin(theta) ** (2 * k) * base**-power

    integral, err = _periodic_trapezoid(integrand, tol, 8 * (k + 1))
    s = math.sqrt(zm1 * (z + 1.0))
    # Gamma(m + 1/2) * (m + 1/2)_k = sqrt(pi) * (1/2)_{m+k}
    pref = (
        (-1) ** m * math.sqrt(math.pi) * _pochhammer(0.5, m + k)
        / (2.0 * math.sqrt(2.0 * math.pi) * _odd_factorial(2 * k - 1)) * s**m
    )
    return pref * integral, abs(pref) * err


def ring_P(
    m: int, n: int, z: float, tol: float = DEFAULT_TOL, form: str = "positive"
) -> RingFunctionValue:
    """P^m_{n-1/2}(z) from the periodic integral representation.

    ``form="cosine"`` integrates ``cos(m t) / (z + sqrt(z^2-1) cos t)^(n+1/2)``
    literally; the default ``"positive"`` integrates the equivalent
    ``sin^(2|m|) t`` form, which keeps full relative accuracy when P^m is small.
    """
    z = _check_z(z)
    if form == "positive":
        value, err = _p_positive(int(m), int(n), z, tol)
    elif form == "cosine":
        value, err = _p_cosine(int(m), int(n), z, tol)
    else:
        raise ValueError(f"unknown form {form!r}")
    return RingFunctionValue("P", int(m), int(n), z, value, err)


def ring_Q(
    m: int, n: int, z: float, tol: float = DEFAULT_TOL, method: str = "auto"
) -> RingFunctionValue:
    """Q^m_{n-1/2}(z).

    ``method="auto"`` folds n to |n| (Q is even in the degree index at
    half-integer degree) and uses the semi-infinite integral when it
    converges, the Fourier-cosine form otherwise. ``"heine"`` forces the
    semi-infinite integral at the given n and raises OverflowGuard when it
    diverges; ``"fourier"`` forces the cosine form.
    """
    z = _check_z(z)
    m, n = int(m), int(n)
    if method == "heine":
        value, err = _q_heine(m, n, z, tol)
    elif method == "fourier":
        value, err = _q_fourier(m, n, z, tol)
    elif method == "auto":
        nn = abs(n)
        if nn >= abs(m):
            value, err = _q_heine(m, nn, z, tol)
        else:
            value, err = _q_fourier(m, nn, z, tol)
    else:
        raise ValueError(f"unknown method {method!r}")
    return RingFunctionValue("Q", m, n, z, value, err)


def _value(kind: str, order: int, n: int, z: float, tol: float) -> float:
    if kind == "P":
        return ring_P(order, n, z, tol).value
    if kind == "Q":
        return ring_Q(order, n, z, tol).value
    raise ValueError(f"kind must be 'P' or 'Q', got {kind!r}")


def ring_derivative(kind: str, order: int, n: int, z: float, tol: float = DEFAULT_TOL) -> float:
    """d/dz of P^order_{n-1/2} or Q^order_{n-1/2} from the degree recurrence

    (z^2 - 1) f'(z) = (n + 1/2 - order) f_{n+1/2}(z) - (n + 1/2) z f_{n-1/2}(z).
    """
    z = _check_z(z)
    f_next = _value(kind, order, n + 1, z, tol)
    f = _value(kind, order, n, z, tol)
    return ((n + 0.5 - order) * f_next - (n + 0.5) * z * f) / ((z - 1.0) * (z + 1.0))


def ring_deriv(kind: str, m: int, n: int, z: float, tol: float = DEFAULT_TOL) -> float:
    """Derivative of P^{-m}_{n-1/2} (kind "P") or Q^m_{n-1/2} (kind "Q")."""
    if kind == "P":
        return ring_derivative("P", -m, n, z, tol)
    if kind == "Q":
        return ring_derivative("Q", m, n, z, tol)
    raise ValueError(f"kind must be 'P' or 'Q', got {kind!r}")


def unscaled_deriv(kind: str, order: int, n: int, z: float, tol: float = DEFAULT_TOL) -> float:
    """The degree recurrence read as ``f'(z) = ...`` without the (z^2 - 1) factor.

    Same signature as :func:`ring_derivative`. Kept only to show that it breaks
    the Wronskian; never used downstream.
    """
    z = _check_z(z)
    f_next = _value(kind, order, n + 1, z, tol)
    f = _value(kind, order, n, z, tol)
    return (n + 0.5 - order) * f_next - (n + 0.5) * z * f


def wronskian_rhs(m: int, n: int, z: float) -> float:
    return (-1) ** m * gamma_half_ratio(n, m) / ((z - 1.0) * (z + 1.0))


def wronskian_residual(
    m: int, n: int, z: float, tol: float = DEFAULT_TOL, scaled: bool = False,
    unscaled: bool = False,
) -> float:
    """|Q P' - P Q' - (-1)^m Gamma(n+m+1/2) / (Gamma(n-m+1/2) (z^2-1))|.

    Both functions carry order m. With ``scaled=True`` the residual is divided
    by max(1, |rhs|), i.e. absolute for small right-hand sides and relative
    for large ones. ``unscaled=True`` swaps in :func:`unscaled_deriv`.
    """
    z = _check_z(z)
    deriv = unscaled_deriv if unscaled else ring_derivative
    p = ring_P(m, n, z, tol).value
    q = ring_Q(m, n, z, tol).value
    dp = deriv("P", m, n, z, tol)
    dq = deriv("Q", m, n, z, tol)
    rhs = wronskian_rhs(m, n, z)
    res = abs(q * dp - p * dq - rhs)
    if scaled:
        res /= max(1.0, abs(rhs))
    return res
