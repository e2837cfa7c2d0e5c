import math

import numpy as np
import pytest

from nptorus.assembly import (
    assemble_block,
    assemble_blocks,
    assemble_product_form,
    consistency_delta,
    diag_D,
    diag_D_derivative_form,
    exponential_matrix,
    kstar_closed_form,
    offdiag_R,
    predicted_delta,
    structural_matrices,
)
from nptorus.geometry import ModeIndex, TorusShape, density_basis
from nptorus.ring import gamma_half_ratio, ring_P, ring_Q

SHAPE = TorusShape(1.0, 1.0)


def P(m, n, z):
    return ring_P(m, n, z).value


def Q(m, n, z):
    return ring_Q(m, n, z).value


def test_D00_m0_specialisation():
    z0 = SHAPE.z0
    expected = 0.5 * (0.5 * Q(0, 1, z0) * P(0, 0, z0) + 0.5 * Q(0, 0, z0) * P(0, 1, z0) - z0 * Q(0, 0, z0) * P(0, 0, z0))
    assert diag_D(0, 0, SHAPE) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("m", [0, 1, 2, -2])
@pytest.mark.parametrize("n", [-2, 0, 3])
def test_D_matches_derivative_form(m, n):
    assert diag_D(m, n, SHAPE) == pytest.approx(diag_D_derivative_form(m, n, SHAPE), abs=1e-10)


def test_R_diagonal_m0():
    for n in range(-3, 4):
        expected = 0.5 * math.sinh(1.0) * Q(0, n, SHAPE.z0) * P(0, n, SHAPE.z0)
        for form in ("derived", "column"):
            assert offdiag_R(0, n, n, SHAPE, form) == pytest.approx(expected, rel=1e-14)


def test_R_exponential_factor():
    shape = TorusShape(1.0, math.log(2.0))
    r02 = offdiag_R(0, 0, 2, shape)
    r00 = offdiag_R(0, 0, 0, shape)
    # derived form: the column dependence is only the gamma ratio, 1 for m = 0
    assert r02 / r00 == pytest.approx(0.25, rel=1e-14)


def test_R_ratio_identity():
    z0 = SHAPE.z0
    for m in range(0, 4):
        for n, l in [(-2, 1), (0, 3), (2, -1)]:
            lhs = offdiag_R(m, n, l, SHAPE) / offdiag_R(m, l, n, SHAPE)
            rhs = (Q(m, n, z0) * P(m, n, z0) * gamma_half_ratio(n, m)) / (Q(m, l, z0) * P(m, l, z0) * gamma_half_ratio(l, m))
            assert lhs == pytest.approx(rhs, rel=1e-12)
    # m = 0 collapses to Q_n P_n / (Q_l P_l)
    lhs = offdiag_R(0, 1, 3, SHAPE) / offdiag_R(0, 3, 1, SHAPE)
    assert lhs == pytest.approx(Q(0, 1, z0) * P(0, 1, z0) / (Q(0, 3, z0) * P(0, 3, z0)), rel=1e-12)


def test_R_forms_differ_off_diagonal():
    assert offdiag_R(1, 0, 2, SHAPE, "derived") != pytest.approx(offdiag_R(1, 0, 2, SHAPE, "column"), rel=1e-3)
    with pytest.raises(ValueError):
        offdiag_R(1, 0, 2, SHAPE, "other")


@pytest.mark.parametrize("r_form", ["derived", "column"])
def test_block_matches_entrywise(r_form):
    for m, N in [(0, 1), (2, 3), (-1, 2)]:
        block = assemble_block(m, N, SHAPE, r_form=r_form)
        idx = range(-N, N + 1)
        ref = np.array([[offdiag_R(m, n, l, SHAPE, r_form) + (diag_D(m, n, SHAPE) if n == l else 0.0) for l in idx] for n in idx])
        np.testing.assert_allclose(block.entries, ref, rtol=1e-13, atol=1e-15)
        assert block.entries.shape == (2 * N + 1, 2 * N + 1)
        assert np.isrealobj(block.entries)


def test_conventions_transpose_and_share_spectrum():
    op = assemble_block(2, 5, SHAPE)
    co = assemble_block(2, 5, SHAPE, convention="coefficient_form")
    np.testing.assert_array_equal(co.entries, op.entries.T)
    np.testing.assert_array_equal(co.operator_entries(), op.entries)
    a = np.sort_complex(np.linalg.eigvals(op.entries))
    b = np.sort_complex(np.linalg.eigvals(co.entries))
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_block_argument_checks():
    with pytest.raises(ValueError):
        assemble_block(0, 0, SHAPE)
    with pytest.raises(ValueError):
        assemble_block(0, 2, SHAPE, convention="rows")
    with pytest.raises(ValueError):
        assemble_block(0, 2, SHAPE, r_form="other")


def test_band_decay():
    N = 8
    for tau0 in (0.5, 1.0, 2.0):
        shape = TorusShape(1.0, tau0)
        block = assemble_block(1, N, shape)
        A = block.entries
        idx = np.arange(-N, N + 1)
        # |R_nl| / (|row_n| |col_l|) is exactly the exponential factor
        R = A - np.diag(block.diag)
        scaled = R / (0.5 * math.sinh(tau0) * np.outer(np.abs(block.row_factor), np.abs(block.col_factor)))
        np.testing.assert_allclose(np.abs(scaled), np.exp(-np.abs(idx[:, None] - idx[None, :]) * tau0), rtol=1e-12)
        corner = abs(A[0, -1]) / max(abs(A[0, 0]), abs(A[-1, -1]))
        C = np.max(np.abs(A)) / np.min(np.abs(np.diag(A)))
        assert corner <= C * math.exp(-2 * N * tau0) * 1e3


def test_assemble_blocks_order_independent():
    blocks = assemble_blocks([3, 0, -1], 4, SHAPE)
    for m, b in zip([3, 0, -1], blocks):
        assert b.m == m
        np.testing.assert_array_equal(b.entries, assemble_block(m, 4, SHAPE).entries)


def test_to_dict():
    d = assemble_block(0, 2, SHAPE).to_dict()
    assert d["m"] == 0 and d["N"] == 2 and d["tau0"] == 1.0 and d["convention"] == "operator_form"
    assert len(d["entries"]) == 5 and all(len(row) == 5 for row in d["entries"])


def test_structural_matrices():
    sm = structural_matrices(1, 3, SHAPE)
    idx = np.arange(-3, 4)
    np.testing.assert_array_equal(sm.E, sm.E.T)
    np.testing.assert_array_equal(np.diag(sm.E), np.ones(7))
    assert sm.E[0, 2] == pytest.approx(math.exp(-2.0))
    for i in range(7):
        for j in range(7):
            assert sm.S[i, j] == (1.0 if j == i + 1 else 0.0)
    np.testing.assert_array_equal(np.diag(sm.Z), idx)
    assert exponential_matrix(3, 1.0).shape == (7, 7)


def test_product_offdiagonal_is_column_R():
    for m in range(0, 3):
        N = 4
        thm = assemble_product_form(m, N, SHAPE).entries
        blk = assemble_block(m, N, SHAPE, r_form="column").entries
        off = ~np.eye(2 * N + 1, dtype=bool)
        # S-products are diagonal; off-diagonal entries come from Q E P only
        np.testing.assert_allclose(thm[off], blk[off], rtol=1e-13, atol=1e-16)


def test_product_first_terms_reproduce_D_products():
    m, N = 1, 4
    z0 = SHAPE.z0
    sm = structural_matrices(m, N, SHAPE)
    S, Z, Qm, Pm = sm.S, sm.Z, sm.Qm, sm.Pm_neg
    eye = np.eye(2 * N + 1)
    t1 = (Z + (0.5 - m) * eye) @ S @ Qm @ S.T @ Pm
    t2 = (Z + (0.5 + m) * eye) @ Qm @ S @ Pm @ S.T
    for i, n in enumerate(range(-N, N)):
        assert t1[i, i] == pytest.approx((n - m + 0.5) * Q(m, n + 1, z0) * P(-m, n, z0), rel=1e-13)
        assert t2[i, i] == pytest.approx((n + m + 0.5) * Q(m, n, z0) * P(-m, n + 1, z0), rel=1e-13)


@pytest.mark.parametrize("m", [0, 1, 2, 3])
def test_consistency_delta_fingerprint(m):
    N = 4
    d = consistency_delta(m, N, SHAPE)
    off = d - np.diag(np.diag(d))
    assert np.max(np.abs(off)) < 1e-12
    np.testing.assert_allclose(np.diag(d), predicted_delta(m, N, SHAPE), rtol=1e-12)
    # ratio delta_nn / (z0 (2n+1) Q P) is the constant -(-1)^m / 2
    z0 = SHAPE.z0
    ratios = [np.diag(d)[i] / (z0 * (2 * n + 1) * Q(m, n, z0) * P(-m, n, z0)) for i, n in enumerate(range(-N, N))]
    np.testing.assert_allclose(ratios, -0.5 * (-1) ** m, rtol=1e-12)
    assert np.max(np.abs(consistency_delta(m, N, SHAPE, z_term_factor=1.0))) < 1e-12


def test_product_affected_rows_flagged():
    thm = assemble_product_form(0, 3, SHAPE)
    assert thm.affected.tolist() == [False] * 6 + [True]


def test_kstar_closed_form_fourier_coefficients_match_block():
    # K*[phi_n] expanded in phi_l: coefficient of e^{i l sigma} / Gamma_ml
    m, n, N = 2, 1, 12
    ns = 256
    s = 2 * np.pi * np.arange(ns) / ns
    vals = kstar_closed_form(m, n, 0.0, s, SHAPE)
    coef = np.fft.fft(vals / (SHAPE.z0 - np.cos(s)) ** 1.5) / ns
    block = assemble_block(m, N, SHAPE).entries
    for j, l in enumerate(range(-N, N + 1)):
        gamma_ml = density_basis(ModeIndex(m, l), 0.0, 0.0, SHAPE) / (SHAPE.z0 - 1.0) ** 1.5
        assert coef[l % ns] / gamma_ml == pytest.approx(block[n + N, j], abs=1e-12)
