"""Experiment runner: builds instances, runs pipelines, writes reports.

Commands:
    ffsim run --pipeline <name> --n <a..b> --t <list|T> --eps <x> --seed <s> --out <path>
    ffsim verify --seed <s> [--out <path>]

Exit codes: 0 pass, 1 config error, 2 criterion/pipeline failure. Reports
are JSON plus a CSV scaling table next to them; records are sorted before
writing so concurrency or enumeration order can never leak into the output.
The environment variable FFSIM_DESK_CAP overrides the dense-unitary
dimension cap.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, blockff, energymeas, frustff, lieff, schur
from .acceptance import loglog_fit, verify_all
from .circuits import count
from .errors import ConfigInvalidError, FFSimError, PipelineFailureError

PIPELINES = ("schur", "perm-ff", "frustfree-ff", "fermion-ff", "boson-ff",
             "energy-equiv")


def parse_n_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(text)]
    except ValueError as exc:
        raise ConfigInvalidError(f"bad n range {text!r}") from exc
    if not values:
        raise ConfigInvalidError(f"empty n range {text!r}")
    return values


def parse_times(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigInvalidError(f"bad time list {text!r}") from exc


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, round(1000.0 * (time.perf_counter() - start), 3)


def run_schur(ns, ts, eps, seed):
    records = []
    for n in ns:
        circuit = schur.build_schur_transform(n)
        gc = count(circuit)
        from .acceptance import _unitarity_defect

        defect, ms = _timed(_unitarity_defect, circuit)
        records.append({
            "n": n, "t": None, "count_raw": gc.raw_gates,
            "count_elementary": gc.elementary_count,
            "error_measured": defect, "iterations": None, "wall_time_ms": ms,
        })
    fit = None
    if len(ns) >= 3:
        exponent, prefactor, r2 = loglog_fit(ns, [r["count_elementary"] for r in records])
        fit = {"exponent": exponent, "prefactor": prefactor, "r2": r2,
               "x": "n", "y": "count_elementary"}
    return records, fit


def run_perm_ff(ns, ts, eps, seed):
    records = []
    for n in ns:
        h = schur.build_lmg(n, 0.5, 0.3)
        times = ts if ts else [1.0, float(2**n), float(4**n)]
        for t in times:
            (circ, rep), ms = _timed(blockff.fast_forward_permutation_invariant,
                                     h, n, t, eps, seed=seed)
            records.append({
                "n": n, "t": t, "count_raw": rep.gate_count_raw,
                "count_elementary": rep.gate_count_elementary,
                "error_measured": rep.max_error_measured,
                "iterations": None, "wall_time_ms": ms,
                "ancilla_width": rep.ancilla_width,
                "modeled_ancillas": rep.modeled_ancillas,
            })
    fit = None
    if len(ns) >= 3:
        by_n = {}
        for r in records:
            by_n.setdefault(r["n"], r["count_elementary"])
        exponent, prefactor, r2 = loglog_fit(list(by_n), list(by_n.values()))
        fit = {"exponent": exponent, "prefactor": prefactor, "r2": r2,
               "x": "n", "y": "count_elementary"}
    return records, fit


def run_frustfree_ff(ns, ts, eps, seed):
    records = []
    eps = eps if eps else 0.3
    for n in ns:
        times = ts if ts else [100.0, 1000.0]
        for big_t in times:
            ff = frustff.make_random_ff(n, 2, n + 1, 2, seed=seed + n)
            h = ff.dense()
            w, v = np.linalg.eigh(h)
            cap = 1.0 / big_t
            rng = np.random.default_rng(seed)
            low = [k for k in range(len(w)) if w[k] <= cap + 1e-12]
            coef = rng.normal(size=len(low)) + 1j * rng.normal(size=len(low))
            psi = v[:, low] @ coef
            psi /= np.linalg.norm(psi)
            (_, rep), ms = _timed(frustff.ff_low_energy_simulate,
                                  ff, big_t, cap, eps, psi, horizon=big_t)
            records.append({
                "n": n, "t": big_t, "count_raw": None, "count_elementary": None,
                "error_measured": rep.error_measured,
                "iterations": rep.reps, "wall_time_ms": ms,
                "l_bits": rep.l_bits, "delta": rep.delta, "L": rep.L,
                "symbolic_cost": rep.symbolic_cost,
            })
    return records, None


def run_fermion_ff(ns, ts, eps, seed):
    records = []
    eps = eps if eps else 1e-6
    counts, predictors = [], []
    for n in ns:
        h = lieff.random_fermionic(n, seed * 11 + n)
        big_t = max(ts) if ts else float(4**n)
        times = ts if ts else [1.0, big_t]
        for t in times:
            (out), ms = _timed(lieff.fermionic_ff_circuit, h, t, big_t, eps,
                               seed=seed + n)
            _, rep, _ = out
            records.append({
                "n": n, "t": t, "count_raw": rep.raw_gates,
                "count_elementary": rep.elementary_gates,
                "error_measured": rep.fock_error, "iterations": rep.r,
                "wall_time_ms": ms, "l_roots": rep.l,
            })
            if t == big_t:
                counts.append(rep.raw_gates)
                predictors.append(n * n * math.log(big_t))
    fit = None
    if len(counts) >= 3:
        exponent, prefactor, r2 = loglog_fit(predictors, counts)
        fit = {"exponent": exponent, "prefactor": prefactor, "r2": r2,
               "x": "n^2 log T", "y": "count_raw"}
    return records, fit


def run_boson_ff(ns, ts, eps, seed):
    records = []
    eps = eps if eps else 1e-6
    for n in ns:
        alpha = lieff.random_bosonic(n, seed * 13 + n)
        big_t = max(ts) if ts else 1000.0
        for m in (1, 2, 3):
            (out), ms = _timed(lieff.bosonic_ff_circuit, alpha, big_t, m,
                               big_t, eps, seed=seed + m)
            _, rep, _ = out
            records.append({
                "n": n, "t": big_t, "m": m, "count_raw": rep.raw_gates,
                "count_elementary": rep.elementary_gates,
                "error_measured": rep.fock_error, "iterations": rep.r,
                "wall_time_ms": ms,
            })
    return records, None


def run_energy_equiv(ns, ts, eps, seed):
    records = []
    rng = np.random.default_rng(seed)
    for n in ns:
        dim = 2**n
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = 0.5 * (m + m.conj().T)
        h /= np.linalg.norm(h, ord=2)
        t = ts[0] if ts else 5.0
        rep, ms = _timed(energymeas.equivalence_report, h, 6, 4, t, seed=seed)
        records.append({
            "n": n, "t": t, "count_raw": rep["forward"]["G"],
            "count_elementary": rep["forward"]["G"],
            "error_measured": rep["backward"]["error_measured"],
            "iterations": None, "wall_time_ms": ms,
            "forward": rep["forward"], "backward": rep["backward"],
        })
    return records, None


RUNNERS = {
    "schur": run_schur,
    "perm-ff": run_perm_ff,
    "frustfree-ff": run_frustfree_ff,
    "fermion-ff": run_fermion_ff,
    "boson-ff": run_boson_ff,
    "energy-equiv": run_energy_equiv,
}


def _record_sort_key(rec: dict):
    return (rec.get("n") or 0, rec.get("t") or 0.0, rec.get("m") or 0)


def write_report(path: Path, report: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def write_scaling_csv(path: Path, records: list[dict]):
    cols = ["n", "t", "count_raw", "count_elementary", "error_measured",
            "iterations", "wall_time_ms"]
    lines = [",".join(cols)]
    for rec in records:
        lines.append(",".join("" if rec.get(c) is None else repr(rec.get(c))
                              for c in cols))
    path.write_text("\n".join(lines) + "\n")


def cmd_run(args) -> int:
    if args.pipeline not in PIPELINES:
        raise ConfigInvalidError(f"unknown pipeline {args.pipeline!r}")
    ns = parse_n_range(args.n)
    ts = parse_times(args.t)
    try:
        records, fit = RUNNERS[args.pipeline](ns, ts, args.eps, args.seed)
    except FFSimError as exc:
        raise PipelineFailureError(args.pipeline, exc) from exc
    records.sort(key=_record_sort_key)
    report = {
        "config": {"pipeline": args.pipeline, "n": args.n, "t": args.t,
                   "eps": args.eps, "seed": args.seed},
        "provenance": {"tool": "ffsim", "version": __version__, "seed": args.seed},
        "records": records,
        "scaling_fit": fit,
    }
    out = Path(args.out)
    write_report(out, report)
    write_scaling_csv(out.with_suffix(".csv"), records)
    print(f"wrote {out} and {out.with_suffix('.csv')} ({len(records)} records)")
    return 0


def cmd_verify(args) -> int:
    report, ok = verify_all(args.seed)
    if args.out:
        write_report(Path(args.out), report)
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffsim",
                                     description="fast-forwarding circuit toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment pipeline")
    run_p.add_argument("--pipeline", required=True,
                       help=f"one of {', '.join(PIPELINES)}")
    run_p.add_argument("--n", required=True, help="size range, e.g. 2..6 or 3")
    run_p.add_argument("--t", default=None, help="comma list of times or one horizon")
    run_p.add_argument("--eps", type=float, default=None)
    run_p.add_argument("--seed", type=int, default=42)
    run_p.add_argument("--out", default="ffsim_report.json")

    ver_p = sub.add_parser("verify", help="run the acceptance suite")
    ver_p.add_argument("--seed", type=int, default=42)
    ver_p.add_argument("--out", default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        return cmd_verify(args)
    except ConfigInvalidError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except PipelineFailureError as exc:
        print(f"pipeline failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
