"""Eigenvalues of truncated NP blocks.

The off-diagonal part of a block has the rank structure
``R = sinh(tau0)/2 * diag(row) E diag(col)`` with E symmetric, so the
diagonal similarity ``Delta_nn = sqrt(row_n / col_n)`` makes it symmetric
whenever every ``row_n col_n`` is positive. ``row_n col_n`` equals
``(-1)^m Q^m_{n-1/2}(z0) P^{-m}_{n-1/2}(z0)`` for either form of R.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from ._accel import thread_count
from .assembly import NPBlock, assemble_block
from .geometry import TorusShape

SIGN_THRESHOLD = 1e-12
SYMMETRY_TOL = 1e-12


class SolverFailure(RuntimeError):
    pass


@dataclass
class BalancedBlock:
    matrix: np.ndarray
    balanced: bool
    # Delta_nn; None when balancing was unavailable
    scaling: np.ndarray | None = None

    @property
    def balance_unavailable(self) -> bool:
        return not self.balanced


@dataclass
class SpectrumReport:
    m: int
    N: int
    shape: TorusShape
    eigenvalues: np.ndarray
    max_imag_residual: float
    sign_counts: tuple
    balanced: bool
    convergence_delta: float | None = None

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "N": self.N,
            "a": self.shape.a,
            "tau0": self.shape.tau0,
            "balanced": self.balanced,
            "max_imag_residual": self.max_imag_residual,
            "convergence_delta": self.convergence_delta,
            "sign_counts": {"positive": self.sign_counts[0], "negative": self.sign_counts[1]},
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
        }


def balance_block(block: NPBlock) -> BalancedBlock:
    """Delta^-1 (D + R) Delta in operator form, or the block unchanged (flagged)."""
    A = block.operator_entries()
    row, col = block.row_factor, block.col_factor
    if row is None or col is None or np.any(row * col <= 0):
        return BalancedBlock(A.copy(), False)
    delta = np.sqrt(row / col)
    B = A * delta[None, :] / delta[:, None]
    return BalancedBlock(B, True, delta)


def _sign_counts(values, threshold=SIGN_THRESHOLD):
    re = np.real(values)
    return int(np.sum(re > threshold)), int(np.sum(re < -threshold))


def eigen_spectrum(block: NPBlock) -> SpectrumReport:
    A = block.operator_entries()
    try:
        raw = scipy.linalg.eigvals(A)
        bal = balance_block(block)
        if bal.balanced:
            B = bal.matrix
            off = B - np.diag(np.diag(B))
            asym = np.max(np.abs(off - off.T)) if off.size else 0.0
            if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(off))):
                raise SolverFailure(f"balanced block is not symmetric (|B - B^T| = {asym:.2e})")
            vals = scipy.linalg.eigh(0.5 * (B + B.T), eigvals_only=True).astype(complex)
        else:
            vals = raw
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolverFailure(f"eigensolver failed for m={block.m}, N={block.N}: {exc}") from exc
    order = np.lexsort((-vals.imag, -vals.real))
    vals = vals[order]
    return SpectrumReport(
        m=block.m,
        N=block.N,
        shape=block.shape,
        eigenvalues=vals,
        max_imag_residual=float(np.max(np.abs(raw.imag))),
        sign_counts=_sign_counts(vals),
        balanced=bal.balanced,
    )


def spectra(ms, N: int, shape: TorusShape) -> list[SpectrumReport]:
    """eigen_spectrum for several m, in the order given."""
    ms = list(ms)

    def one(m):
        return eigen_spectrum(assemble_block(m, N, shape))

    workers = min(thread_count(), max(len(ms), 1))
    if workers <= 1:
        return [one(m) for m in ms]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, ms))


def match_eigenvalues(small, large, k: int = 10):
    """Pair the top-k (by magnitude) of ``small`` with distinct entries of
    ``large`` minimising total distance; returns the per-pair deltas."""
    small = np.asarray(small)
    large = np.asarray(large)
    top = small[np.argsort(-np.abs(small), kind="stable")[:k]]
    cost = np.abs(top[:, None] - large[None, :])
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols]


def convergence_study(m: int, shape: TorusShape, N_list, k: int = 10) -> dict:
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be strictly ascending")
    reports = [eigen_spectrum(assemble_block(m, N, shape)) for N in N_list]
    steps = []
    for small, large in zip(reports, reports[1:]):
        d = float(np.max(match_eigenvalues(small.eigenvalues, large.eigenvalues, k)))
        large.convergence_delta = d
        steps.append({"N_from": small.N, "N_to": large.N, "max_delta": d})
    deltas = [s["max_delta"] for s in steps]
    rate = None
    if len(deltas) >= 2 and all(d > 0 for d in deltas):
        slope = np.polyfit([s["N_to"] for s in steps], np.log(deltas), 1)[0]
        rate = float(-slope)
    return {
        "m": m,
        "tau0": shape.tau0,
        "k": k,
        "steps": steps,
        "monotone": all(b < a for a, b in zip(deltas, deltas[1:])),
        "decay_rate": rate,
    }


def sign_census(reports, threshold: float = SIGN_THRESHOLD) -> list[dict]:
    if not reports:
        raise ValueError("sign_census needs at least one report")
    rows = []
    for r in reports:
        re = np.real(r.eigenvalues)
        rows.append({
            "m": r.m,
            "N": r.N,
            "tau0": r.shape.tau0,
            "positive": int(np.sum(re > threshold)),
            "negative": int(np.sum(re < -threshold)),
            "near_zero": int(np.sum(np.abs(re) <= threshold)),
        })
    return sorted(rows, key=lambda row: (row["tau0"], row["m"], row["N"]))


def write_csv(reports, path) -> None:
    """Long format: m, N, index, re, im (17 significant digits)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["m", "N", "index", "re", "im"])
        for r in sorted(reports, key=lambda r: (r.m, r.N)):
            for i, v in enumerate(r.eigenvalues):
                w.writerow([r.m, r.N, i, f"{v.real:.17g}", f"{v.imag:.17g}"])

