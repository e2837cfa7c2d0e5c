"""Hot quadrature kernels for the boundary-integral oracle.

Each kernel has a numba implementation and a pure-numpy one with the same
signature; the public wrappers pick one from ``_accel.USE_NUMBA`` unless a
``backend`` is passed explicitly. Per-target sums run serially in a fixed
order, so results do not depend on the thread count.
"""

from __future__ import annotations

import math

import numpy as np

from . import _accel

FOUR_PI = 4.0 * math.pi
_CHUNK = 64

if _accel.numba is not None:
    from numba import njit, prange
else:  # pragma: no cover
    njit = None


def _pick(backend):
    if backend is None:
        backend = _accel.backend_name()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}")
    if backend == "numba" and njit is None:  # pragma: no cover
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def torus_nodes(sigma, phi, tau0, a):
    """Cartesian coordinates of the (sigma, phi) tensor grid on tau = tau0.

    Returns three arrays of shape (len(sigma), len(phi)).
    """
    ch, sh = math.cosh(tau0), math.sinh(tau0)
    d = ch - np.cos(sigma)[:, None]
    rho = a * sh / d
    return rho * np.cos(phi)[None, :], rho * np.sin(phi)[None, :], a * np.sin(sigma)[:, None] / d + 0.0 * phi[None, :]


# ---------------------------------------------------------------------------
# azimuthally reduced K* kernel
# ---------------------------------------------------------------------------


def _azimuthal_numpy(tgt_sigma, tgt_self, yx, yy, yz, w, cos_tab, sin_tab, tau0, a):
    ch, sh = math.cosh(tau0), math.sinh(tau0)
    phase = (cos_tab + 1j * sin_tab).T
    nm = cos_tab.shape[0]
    out = np.empty((nm, len(tgt_sigma), yx.shape[0]), dtype=complex)
    for i, s in enumerate(tgt_sigma):
        d0 = ch - math.cos(s)
        x0, x2 = a * sh / d0, a * math.sin(s) / d0
        nu0, nu2 = -(1.0 - ch * math.cos(s)) / d0, sh * math.sin(s) / d0
        dx, dy, dz = x0 - yx, -yy, x2 - yz
        r2 = dx * dx + dy * dy + dz * dz
        num = dx * nu0 + dz * nu2
        j = tgt_self[i]
        if j >= 0:
            r2[j, 0] = 1.0
            num[j, 0] = 0.0
        kern = num / (FOUR_PI * r2 * np.sqrt(r2))
        out[:, i, :] = (kern @ phase).T * w[None, :]
    return out


if njit is not None:

    @njit(parallel=True, cache=True)
    def _azimuthal_numba(tgt_sigma, tgt_self, yx, yy, yz, w, cos_tab, sin_tab, tau0, a):
        ch, sh = math.cosh(tau0), math.sinh(tau0)
        nm, n_phi = cos_tab.shape
        nt = tgt_sigma.shape[0]
        ns = yx.shape[0]
        out_re = np.empty((nm, nt, ns))
        out_im = np.empty((nm, nt, ns))
        for i in prange(nt):
            s = tgt_sigma[i]
            d0 = ch - math.cos(s)
            x0 = a * sh / d0
            x2 = a * math.sin(s) / d0
            nu0 = -(1.0 - ch * math.cos(s)) / d0
            nu2 = sh * math.sin(s) / d0
            buf = np.empty(n_phi)
            for j in range(ns):
                for k in range(n_phi):
                    dx = x0 - yx[j, k]
                    dy = yy[j, k]
                    dz = x2 - yz[j, k]
                    r2 = dx * dx + dy * dy + dz * dz
                    buf[k] = (dx * nu0 + dz * nu2) / (FOUR_PI * r2 * math.sqrt(r2))
                if j == tgt_self[i]:
                    buf[0] = 0.0
                for mi in range(nm):
                    acc_re = 0.0
                    acc_im = 0.0
                    for k in range(n_phi):
                        acc_re += buf[k] * cos_tab[mi, k]
                        acc_im += buf[k] * sin_tab[mi, k]
                    out_re[mi, i, j] = acc_re * w[j]
                    out_im[mi, i, j] = acc_im * w[j]
        return out_re, out_im


def azimuthal_kernel(tgt_sigma, tgt_self, src_sigma, src_phi, tau0, a, ms, backend=None):
    """K*-kernel summed over the azimuthal source nodes with weight e^{i m phi}.

    Targets sit at phi = 0 on tau = tau0 with parameters ``tgt_sigma``;
    ``tgt_self[i]`` is the index of the source sigma-row containing target i
    (its node at phi = src_phi[0] = 0 is dropped), or -1. The kernel is
    <x - y, nu_x> / (4 pi |x - y|^3) with nu_x the outward normal, and each
    entry includes the trapezoidal area weight of its sigma row.

    Returns complex array of shape (len(ms), len(tgt_sigma), len(src_sigma)).
    """
    tgt_sigma = np.ascontiguousarray(tgt_sigma, dtype=float)
    tgt_self = np.ascontiguousarray(tgt_self, dtype=np.int64)
    src_sigma = np.asarray(src_sigma, dtype=float)
    src_phi = np.asarray(src_phi, dtype=float)
    ms = np.atleast_1d(np.asarray(ms, dtype=float))
    yx, yy, yz = (np.ascontiguousarray(c) for c in torus_nodes(src_sigma, src_phi, tau0, a))
    d = math.cosh(tau0) - np.cos(src_sigma)
    w = a * a * math.sinh(tau0) / d**2 * (2 * math.pi / len(src_sigma)) * (2 * math.pi / len(src_phi))
    ang = np.outer(ms, src_phi)
    cos_tab, sin_tab = np.ascontiguousarray(np.cos(ang)), np.ascontiguousarray(np.sin(ang))
    if _pick(backend) == "numba":
        re, im = _azimuthal_numba(tgt_sigma, tgt_self, yx, yy, yz, w, cos_tab, sin_tab, float(tau0), float(a))
        return re + 1j * im
    return _azimuthal_numpy(tgt_sigma, tgt_self, yx, yy, yz, w, cos_tab, sin_tab, float(tau0), float(a))


# ---------------------------------------------------------------------------
# pointwise K* (punctured) and single-layer potential / normal derivative
# ---------------------------------------------------------------------------


def _kstar_numpy(tx, tnu, src, q, self_idx):
    out = np.empty((q.shape[0], tx.shape[0]), dtype=complex)
    for start in range(0, tx.shape[0], _CHUNK):
        sl = slice(start, start + _CHUNK)
        diff = tx[sl, None, :] - src[None, :, :]
        r2 = np.einsum("tsk,tsk->ts", diff, diff)
        num = np.einsum("tsk,tk->ts", diff, tnu[sl])
        rows = np.arange(r2.shape[0])
        hit = self_idx[sl] >= 0
        r2[rows[hit], self_idx[sl][hit]] = 1.0
        num[rows[hit], self_idx[sl][hit]] = 0.0
        kern = num / (FOUR_PI * r2 * np.sqrt(r2))
        out[:, sl] = (kern @ q.T).T
    return out


def _slp_numpy(tx, tdir, src, q):
    pot = np.empty((q.shape[0], tx.shape[0]), dtype=complex)
    dn = np.empty_like(pot)
    for start in range(0, tx.shape[0], _CHUNK):
        sl = slice(start, start + _CHUNK)
        diff = tx[sl, None, :] - src[None, :, :]
        r = np.sqrt(np.einsum("tsk,tsk->ts", diff, diff))
        inv = 1.0 / (FOUR_PI * r)
        pot[:, sl] = (inv @ q.T).T
        proj = np.einsum("tsk,tk->ts", diff, tdir[sl])
        dn[:, sl] = (-(proj * inv / (r * r)) @ q.T).T
    return pot, dn


if njit is not None:

    @njit(parallel=True, cache=True)
    def _kstar_numba(tx, tnu, src, q_re, q_im, self_idx):
        nq, ns = q_re.shape
        nt = tx.shape[0]
        out_re = np.zeros((nq, nt))
        out_im = np.zeros((nq, nt))
        for i in prange(nt):
            for j in range(ns):
                if j == self_idx[i]:
                    continue
                dx = tx[i, 0] - src[j, 0]
                dy = tx[i, 1] - src[j, 1]
                dz = tx[i, 2] - src[j, 2]
                r2 = dx * dx + dy * dy + dz * dz
                kern = (dx * tnu[i, 0] + dy * tnu[i, 1] + dz * tnu[i, 2]) / (FOUR_PI * r2 * math.sqrt(r2))
                for c in range(nq):
                    out_re[c, i] += kern * q_re[c, j]
                    out_im[c, i] += kern * q_im[c, j]
        return out_re, out_im

    @njit(parallel=True, cache=True)
    def _slp_numba(tx, tdir, src, q_re, q_im):
        nq, ns = q_re.shape
        nt = tx.shape[0]
        pot_re = np.zeros((nq, nt))
        pot_im = np.zeros((nq, nt))
        dn_re = np.zeros((nq, nt))
        dn_im = np.zeros((nq, nt))
        for i in prange(nt):
            for j in range(ns):
                dx = tx[i, 0] - src[j, 0]
                dy = tx[i, 1] - src[j, 1]
                dz = tx[i, 2] - src[j, 2]
                r = math.sqrt(dx * dx + dy * dy + dz * dz)
                inv = 1.0 / (FOUR_PI * r)
                g = -(dx * tdir[i, 0] + dy * tdir[i, 1] + dz * tdir[i, 2]) * inv / (r * r)
                for c in range(nq):
                    pot_re[c, i] += inv * q_re[c, j]
                    pot_im[c, i] += inv * q_im[c, j]
                    dn_re[c, i] += g * q_re[c, j]
                    dn_im[c, i] += g * q_im[c, j]
        return pot_re + 1j * pot_im, dn_re + 1j * dn_im


def _prep(tx, tdir, src, q):
    tx = np.ascontiguousarray(np.atleast_2d(tx), dtype=float)
    tdir = np.ascontiguousarray(np.atleast_2d(tdir), dtype=float)
    src = np.ascontiguousarray(src, dtype=float)
    q = np.atleast_2d(np.asarray(q, dtype=complex))
    return tx, tdir, src, q


def kstar_apply(tx, tnu, src, q, self_idx=None, backend=None):
    """sum_j <x_i - y_j, nu_i> / (4 pi |x_i - y_j|^3) q[c, j], skipping j = self_idx[i].

    ``q`` holds density times quadrature weight, one row per density.
    Returns (n_densities, n_targets).
    """
    tx, tnu, src, q = _prep(tx, tnu, src, q)
    if self_idx is None:
        self_idx = np.full(tx.shape[0], -1, dtype=np.int64)
    self_idx = np.ascontiguousarray(self_idx, dtype=np.int64)
    if _pick(backend) == "numba":
        re, im = _kstar_numba(tx, tnu, src, np.ascontiguousarray(q.real), np.ascontiguousarray(q.imag), self_idx)
        return re + 1j * im
    return _kstar_numpy(tx, tnu, src, q, self_idx)


def slp_apply(tx, tdir, src, q, backend=None):
    """Single-layer potential sum_j q[c, j] / (4 pi |x_i - y_j|) and its
    derivative along ``tdir[i]`` at each target. Returns (pot, dn), each of
    shape (n_densities, n_targets).
    """
    tx, tdir, src, q = _prep(tx, tdir, src, q)
    if _pick(backend) == "numba":
        return _slp_numba(tx, tdir, src, np.ascontiguousarray(q.real), np.ascontiguousarray(q.imag))
    return _slp_numpy(tx, tdir, src, q)
