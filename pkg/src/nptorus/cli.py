"""``npt`` command line.

    npt eval --kind Q --m 0 --n 0 --z 1.25
    npt matrix --m 0 --N 8 --tau0 1.0 --out block.json
    npt spectrum --m 0..3 --N 12 --tau0 1.0 --out spec.csv
    npt validate --suite wronskian
    npt sweep --tau0 0.25:2.0:8 --m 0..3 --N 12 --out sweep.csv

Exit status: 0 success, 1 validation or numerical failure, 2 usage error.
NPT_THREADS caps the worker pools.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .assembly import assemble_block
from .geometry import TorusShape
from .oracle import ExtrapolationDiverged, TooClose
from .ring import ConvergenceError, DomainError, OverflowGuard, ring_derivative, ring_P, ring_Q
from .spectrum import SolverFailure, eigen_spectrum
from .validate import SUITES
from .validate import run as run_suite

NUMERICAL_ERRORS = (
    ConvergenceError, DomainError, OverflowGuard, ExtrapolationDiverged, TooClose, SolverFailure,
)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    tau0: float = 1.0
    a: float = 1.0
    m_list: list = field(default_factory=lambda: [0])
    N: int = 8
    n_sigma: int = 256
    n_phi: int = 128
    out: str | None = None
    fmt: str = "json"

    def __post_init__(self):
        if not self.tau0 > 0:
            raise UsageError(f"tau0 must be positive, got {self.tau0}")
        if not self.a > 0:
            raise UsageError(f"a must be positive, got {self.a}")
        if self.N < 1:
            raise UsageError(f"N must be >= 1, got {self.N}")
        for v in (self.n_sigma, self.n_phi):
            if v < 32 or v & (v - 1):
                raise UsageError(f"grid sizes must be powers of two >= 32, got {v}")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.fmt}")

    @property
    def shape(self) -> TorusShape:
        return TorusShape(self.a, self.tau0)


def parse_m_list(text: str) -> list[int]:
    """'0..3' (inclusive), '-2,0,5' or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty m range {text!r}")
            return list(range(lo, hi + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"cannot parse m list {text!r}") from None


def parse_range(text: str) -> list[float]:
    """'start:stop:count' with both endpoints included."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) != 3:
            raise ValueError
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"expected start:stop:count, got {text!r}") from None
    if count < 1:
        raise UsageError("count must be >= 1")
    return [float(v) for v in np.linspace(start, stop, count)]


def _fmt(x) -> str:
    return f"{x:.17g}"


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _pool_map(fn, items):
    workers = min(_accel.thread_count(), max(len(items), 1))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------


def cmd_eval(args) -> int:
    zs = parse_range(args.z)
    ns = parse_m_list(args.n)
    rows = []
    for z in zs:
        for n in ns:
            if args.deriv:
                value, err = ring_derivative(args.kind, args.m, n, z), None
            else:
                r = (ring_P if args.kind == "P" else ring_Q)(args.m, n, z)
                value, err = r.value, r.est_abs_error
            rows.append({"kind": args.kind, "m": args.m, "n": n, "z": z, "deriv": args.deriv,
                         "value": value, "est_abs_error": err})
    if args.format == "json":
        _emit(_json_text(rows), args.out)
    else:
        _emit(_csv_text(
            ["kind", "m", "n", "z", "deriv", "value", "est_abs_error"],
            [[r["kind"], r["m"], r["n"], _fmt(r["z"]), int(r["deriv"]), _fmt(r["value"]),
              "" if r["est_abs_error"] is None else _fmt(r["est_abs_error"])] for r in rows],
        ), args.out)
    return 0


def cmd_matrix(args, cfg: RunConfig) -> int:
    if len(cfg.m_list) != 1:
        raise UsageError("matrix takes a single --m")
    block = assemble_block(cfg.m_list[0], cfg.N, cfg.shape, convention=args.convention, r_form=args.r_form)
    if cfg.fmt == "json":
        _emit(_json_text(block.to_dict()), cfg.out)
    else:
        rows = [[n, l, _fmt(block.entries[i, j])]
                for i, n in enumerate(block.indices) for j, l in enumerate(block.indices)]
        _emit(_csv_text(["n", "l", "value"], rows), cfg.out)
    return 0


def _spectrum(tau0, a, m, N):
    return eigen_spectrum(assemble_block(m, N, TorusShape(a, tau0)))


def cmd_spectrum(args, cfg: RunConfig) -> int:
    reports = _pool_map(lambda m: _spectrum(cfg.tau0, cfg.a, m, cfg.N), cfg.m_list)
    reports.sort(key=lambda r: r.m)
    if cfg.fmt == "json":
        _emit(_json_text([r.to_dict() for r in reports]), cfg.out)
    else:
        rows = [[r.m, r.N, i, _fmt(v.real), _fmt(v.imag)] for r in reports for i, v in enumerate(r.eigenvalues)]
        _emit(_csv_text(["m", "N", "index", "re", "im"], rows), cfg.out)
    return 0


def cmd_sweep(args, cfg: RunConfig) -> int:
    taus = parse_range(args.tau0)
    for t in taus:
        if not t > 0:
            raise UsageError(f"tau0 values must be positive, got {t}")
    jobs = [(t, m) for t in taus for m in cfg.m_list]
    reports = _pool_map(lambda job: _spectrum(job[0], cfg.a, job[1], cfg.N), jobs)
    rows = []
    for (t, m), rep in sorted(zip(jobs, reports), key=lambda item: item[0]):
        rows.extend([_fmt(t), m, i, _fmt(v.real), _fmt(v.imag)] for i, v in enumerate(rep.eigenvalues))
    _emit(_csv_text(["tau0", "m", "index", "re", "im"], rows), cfg.out)
    return 0


def _summarise(report, stream):
    subs = report["reports"] if report["suite"] == "all" else [report]
    for sub in subs:
        for c in sub["checks"]:
            tag = "INFO" if c.get("informational") else ("PASS" if c["passed"] else "FAIL")
            stream.write(f"{tag} {sub['suite']}.{c['name']} value={c['value']:.3e} threshold={c['threshold']:g}\n")


def cmd_validate(args, cfg: RunConfig) -> int:
    report = run_suite(args.suite, tau0=args.tau0, a=cfg.a, grid=(cfg.n_sigma, cfg.n_phi))
    if cfg.out:
        _emit(_json_text(report), cfg.out)
    _summarise(report, sys.stdout)
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="npt", description="NP operator on tori: ring functions, matrices, spectra, checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def shape_opts(sp, tau_default=1.0):
        sp.add_argument("--tau0", type=float, default=tau_default)
        sp.add_argument("--a", type=float, default=1.0, help="focal radius")

    e = sub.add_parser("eval", help="ring function values")
    e.add_argument("--kind", choices=["P", "Q"], required=True)
    e.add_argument("--m", type=int, default=0)
    e.add_argument("--n", default="0", help="degree index n (degree n-1/2); list or range a..b")
    e.add_argument("--z", required=True, help="argument z > 1, or start:stop:count")
    e.add_argument("--deriv", action="store_true", help="d/dz instead of the value")
    e.add_argument("--format", choices=["csv", "json"], default="csv")
    e.add_argument("--out")

    mx = sub.add_parser("matrix", help="assemble and export one NP block")
    shape_opts(mx)
    mx.add_argument("--m", default="0")
    mx.add_argument("--N", type=int, default=8)
    mx.add_argument("--convention", choices=["operator_form", "coefficient_form"], default="operator_form")
    mx.add_argument("--r-form", choices=["derived", "column"], default="derived")
    mx.add_argument("--format", choices=["csv", "json"], default="json")
    mx.add_argument("--out")

    sp = sub.add_parser("spectrum", help="eigenvalues of NP blocks")
    shape_opts(sp)
    sp.add_argument("--m", default="0")
    sp.add_argument("--N", type=int, default=12)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--out")

    v = sub.add_parser("validate", help="run validation suites")
    v.add_argument("--suite", choices=sorted(SUITES) + ["all"], default="all")
    v.add_argument("--tau0", type=float, default=None, help="override the suites' default tau0 values")
    v.add_argument("--a", type=float, default=1.0)
    v.add_argument("--grid", default="256x128", help="oracle grid n_sigma x n_phi")
    v.add_argument("--out", help="write the JSON report here")

    sw = sub.add_parser("sweep", help="spectra over a tau0 range (long-format CSV)")
    sw.add_argument("--tau0", required=True, help="start:stop:count, endpoints included")
    sw.add_argument("--a", type=float, default=1.0)
    sw.add_argument("--m", default="0")
    sw.add_argument("--N", type=int, default=12)
    sw.add_argument("--out")
    return p


def _config(args) -> RunConfig:
    grid = getattr(args, "grid", "256x128")
    try:
        n_sigma, n_phi = (int(v) for v in grid.lower().split("x"))
    except ValueError:
        raise UsageError(f"grid must look like 256x128, got {grid!r}") from None
    tau0 = args.tau0 if isinstance(getattr(args, "tau0", None), float) else 1.0
    return RunConfig(
        tau0=tau0,
        a=args.a,
        m_list=parse_m_list(getattr(args, "m", "0")),
        N=getattr(args, "N", 8),
        n_sigma=n_sigma,
        n_phi=n_phi,
        out=args.out,
        fmt=getattr(args, "format", "json"),
    )


def _glue_negative(argv):
    # argparse takes "-2..2" for an option; glue it to its flag instead
    out = []
    for tok in argv:
        if out and out[-1] in ("--m", "--n") and len(tok) > 1 and tok[0] == "-" and tok[1].isdigit():
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_glue_negative(sys.argv[1:] if argv is None else list(argv)))
    _accel.configure_threads()
    try:
        if args.command == "eval":
            return cmd_eval(args)
        cfg = _config(args)
        handler = {"matrix": cmd_matrix, "spectrum": cmd_spectrum, "sweep": cmd_sweep, "validate": cmd_validate}
        return handler[args.command](args, cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"npt: error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"npt: numerical failure in {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        print(f"npt: parameters: {vars(args)}", file=sys.stderr)
        return 1


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
