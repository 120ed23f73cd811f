"""Command-line entry point: builders, experiments, and file exports.

Subcommands
-----------
gadget     manifold report (JSON + table) with structural checks
effective  second-order effective Hamiltonian comparison report
walk       success-probability curves (CSV), optionally with the reference
sweep      peak-probability table over (n, J/eta) cells (CSV, resumable)
sym        sector-space walk under a weight potential (CSV)
compile    Trotter schedule export (JSON) with dense verification

Outputs are written atomically (temp file + rename) and floats are printed
with shortest round-trip precision, so identical configurations produce
byte-identical files.  A config file holds ``key = value`` lines (keys are
the long flag names with dashes or underscores); explicit command-line flags
override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dynamics, perturbation
from .compiler import schedule_error, schedule_to_dict, trotterize
from .gadget import (
    GadgetSpec,
    ManifoldStructureError,
    assemble_total,
    manifold_report,
    manifold_table,
    sector_bias_map,
)
from .symmetric_subspace import (
    build_symmetric_walk,
    load_potential_csv,
    plateau_potential,
    sector_uniform_state,
    spike_potential,
)

CURVE_COLUMNS = ["n", "J_over_eta", "t", "t_scaled", "p_success", "leakage"]
SWEEP_COLUMNS = ["n", "J_over_eta", "p_peak", "p_reference", "gap", "error"]


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_text_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rows_to_csv(columns: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(col, "")) for col in columns])
    return buf.getvalue()


def load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {raw!r} is not 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _apply_config(args: argparse.Namespace, argv: list[str]) -> None:
    """Fill argparse results from the config file; explicit flags win."""
    config = load_config(getattr(args, "config", None))
    if not config:
        return
    for key, raw in config.items():
        if not hasattr(args, key):
            raise SystemExit(f"unknown config key {key!r}")
        if _was_given(argv, key):
            continue
        current = getattr(args, key)
        if isinstance(current, bool):
            setattr(args, key, raw.lower() in ("1", "true", "yes", "on"))
        elif isinstance(current, int) and not isinstance(current, bool):
            setattr(args, key, int(raw))
        elif isinstance(current, float):
            setattr(args, key, float(raw))
        elif isinstance(current, list):
            setattr(args, key, [float(v) for v in raw.replace(",", " ").split()])
        else:
            setattr(args, key, raw)


def _was_given(argv: list[str], dest: str) -> bool:
    flags = ("--" + dest.replace("_", "-"), "--" + dest)
    return any(arg in flags or any(arg.startswith(f + "=") for f in flags)
               for arg in argv)


# -- subcommands ---------------------------------------------------------------

def cmd_gadget(args) -> int:
    if args.n > 8:
        print("error: exhaustive manifold scans are limited to n <= 8", file=sys.stderr)
        return 2
    bias = [0.0] * (args.n + 1)
    if args.mark_weight is not None:
        probe = sector_bias_map(GadgetSpec(n=args.n, J=args.J, q0=args.q0))
        bias[probe.index_for_weight(args.mark_weight)] = args.mark_sign
    elif args.mark_sector is not None:
        bias[args.mark_sector] = args.mark_sign
    spec = GadgetSpec(n=args.n, J=args.J, q0=args.q0, eta=args.eta,
                      bias=tuple(bias), correction_mode="none")
    try:
        report = manifold_report(spec)
    except ManifoldStructureError as exc:
        print(f"manifold structure violation: {exc}", file=sys.stderr)
        return 1
    print(manifold_table(spec))
    spread = report["energy_spread"]
    print(f"energy spread: {spread:.3e}   single-flip max deviation: "
          f"{report['single_flip']['max_deviation']:.3e}")
    if args.out:
        write_text_atomic(Path(args.out), json.dumps(report, indent=2) + "\n")
        print(f"wrote {args.out}")
    if report["single_flip"]["violations"]:
        return 1
    return 0


def cmd_effective(args) -> int:
    bias = [0.0] * (args.n + 1)
    if args.mark_weight is not None:
        probe = sector_bias_map(GadgetSpec(n=args.n, J=args.J, q0=args.q0))
        bias[probe.index_for_weight(args.mark_weight)] = args.mark_sign
    spec = GadgetSpec(n=args.n, J=args.J, q0=args.q0, eta=args.eta,
                      gamma_d=args.gamma_d, gamma_a=args.gamma_a, bias=tuple(bias))
    F = perturbation.fluctuation_table(spec)
    numeric = perturbation.second_order_numeric(spec)
    closed = perturbation.closed_form_effective(spec, F)
    dev = perturbation.compare_effective(numeric, closed)
    report = {
        "spec": spec.to_dict(),
        "hop_amp": closed.hop_amp,
        "same_weight_amp": closed.same_weight_amp,
        "F": [float(x) for x in F],
        "deviations": {
            "hop": dev.hop, "same_weight": dev.same_weight,
            "diagonal": dev.diagonal, "zero_class": dev.zero_class,
        },
    }
    print(json.dumps(report, indent=2))
    if args.out:
        write_text_atomic(Path(args.out), json.dumps(report, indent=2) + "\n")
    ok = (dev.hop <= args.tol_offdiag and dev.same_weight <= args.tol_offdiag
          and dev.zero_class <= args.tol_offdiag and dev.diagonal <= args.tol_diag)
    return 0 if ok else 1


def _curve_rows(n: int, ratio: float, samples: int) -> list[dict]:
    result = dynamics.run_encoded_search(n, ratio, samples=samples)
    rows = []
    for t, ts, p, leak in zip(result.times, result.scaled_times,
                              result.success_prob, result.manifold_leakage):
        rows.append({"n": n, "J_over_eta": float(ratio), "t": float(t),
                     "t_scaled": float(ts), "p_success": float(p),
                     "leakage": float(leak)})
    return rows


def _reference_rows(n: int, samples: int) -> list[dict]:
    cal = dynamics.calibration_for_ratio(n, 100.0)
    ref = dynamics.reference_run(cal, samples=samples)
    rows = []
    for t, ts, p in zip(ref.times, ref.scaled_times, ref.success_prob):
        rows.append({"n": n, "J_over_eta": math.inf, "t": float(t),
                     "t_scaled": float(ts), "p_success": float(p),
                     "leakage": 0.0})
    return rows


def cmd_walk(args) -> int:
    ratios = sorted(set(args.ratio)) if args.ratio else list(
        dynamics.default_ratio_grid())
    rows = []
    for ratio in ratios:
        rows.extend(_curve_rows(args.n, float(ratio), args.samples))
    if args.with_reference:
        rows.extend(_reference_rows(args.n, args.samples))
    rows.sort(key=lambda r: (r["n"], r["J_over_eta"], r["t"]))
    write_text_atomic(Path(args.out), rows_to_csv(CURVE_COLUMNS, rows))
    print(f"wrote {args.out} ({len(rows)} rows)")
    return 0


def _sweep_cell(n: int, ratio: float, samples: int) -> dict:
    try:
        cal = dynamics.calibration_for_ratio(n, ratio)
        enc = dynamics.run_encoded_search(n, ratio, samples=samples, calibration=cal)
        ref = dynamics.reference_run(cal, samples=samples)
        return {"n": n, "J_over_eta": float(ratio), "p_peak": enc.peak_prob,
                "p_reference": ref.peak_prob, "gap": enc.gap, "error": ""}
    except Exception as exc:  # recorded per cell, sweep continues
        return {"n": n, "J_over_eta": float(ratio), "p_peak": "", "p_reference": "",
                "gap": "", "error": f"{type(exc).__name__}: {exc}"}


def cmd_sweep(args) -> int:
    out = Path(args.out)
    n_list = [int(v) for v in args.n_list] if args.n_list else [2, 3, 4, 5, 6]
    ratios = sorted(set(args.ratio)) if args.ratio else [
        float(r) for r in dynamics.default_ratio_grid(args.ratio_count,
                                                      args.ratio_min, args.ratio_max)]
    existing: dict[tuple[str, str], dict] = {}
    if out.exists():
        with open(out, newline="") as fh:
            for row in csv.DictReader(fh):
                if row.get("error", "") == "":
                    existing[(row["n"], row["J_over_eta"])] = row
    todo = [(n, r) for n in sorted(set(n_list)) for r in ratios
            if (str(n), _fmt(float(r))) not in existing]
    if not todo and out.exists():
        print(f"{out} already complete ({len(existing)} cells); nothing to do")
        return 0
    results: list[dict] = []
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        futures = [pool.submit(_sweep_cell, n, float(r), args.samples) for n, r in todo]
        for fut in futures:
            results.append(fut.result())
    merged = {(str(r["n"]), _fmt(float(r["J_over_eta"]))): r
              for r in results}
    for key, row in existing.items():
        merged.setdefault(key, {
            "n": int(row["n"]), "J_over_eta": float(row["J_over_eta"]),
            "p_peak": float(row["p_peak"]), "p_reference": float(row["p_reference"]),
            "gap": float(row["gap"]), "error": "",
        })
    rows = sorted(merged.values(), key=lambda r: (r["n"], r["J_over_eta"]))
    write_text_atomic(out, rows_to_csv(SWEEP_COLUMNS, rows))
    failures = [r for r in rows if r["error"]]
    print(f"wrote {out} ({len(rows)} cells, {len(failures)} failed)")
    return 1 if failures else 0


def cmd_sym(args) -> int:
    if args.potential_csv:
        table = load_potential_csv(args.potential_csv)
        if table.size != args.n + 1:
            print("potential table length does not match n", file=sys.stderr)
            return 2
    elif args.potential == "spike":
        table = spike_potential(args.n, center=args.n // 4, height=args.height)
    elif args.potential == "plateau":
        table = plateau_potential(args.n, start=args.n // 4, stop=args.n // 2)
    else:
        table = np.zeros(args.n + 1)
    op = build_symmetric_walk(args.n, args.gamma, table)
    gap = dynamics.spectral_gap(op).delta
    times = np.linspace(0.0, 2.0 * math.pi / gap, args.samples)
    states = dynamics.evolve(op, sector_uniform_state(args.n), times)
    rows = []
    for k_t, t in enumerate(times):
        probs = np.abs(states[k_t]) ** 2
        for k in range(args.n + 1):
            rows.append({"t": float(t), "sector": k, "prob": float(probs[k])})
    write_text_atomic(Path(args.out), rows_to_csv(["t", "sector", "prob"], rows))
    print(f"wrote {args.out} ({len(rows)} rows, gap {gap!r})")
    return 0


def cmd_compile(args) -> int:
    spec = GadgetSpec(n=args.n, J=args.J, q0=args.q0, eta=args.eta,
                      gamma_d=args.gamma_d, gamma_a=args.gamma_a)
    H = assemble_total(spec)
    schedule = trotterize(H, args.dt, args.steps)
    doc = schedule_to_dict(schedule)
    doc["spec"] = spec.to_dict()
    doc["dt"] = args.dt
    doc["steps"] = args.steps
    verified_error = None
    if args.verify and H.layout.n_qubits <= 4:
        verified_error = schedule_error(schedule, H, args.dt * args.steps)
        doc["unitary_error"] = verified_error
        print(f"schedule unitary error vs exact evolution: {verified_error:.3e}")
    write_text_atomic(Path(args.out), json.dumps(doc, indent=2) + "\n")
    print(f"wrote {args.out} ({len(schedule.ops)} gates)")
    if verified_error is not None and verified_error > args.max_error:
        print(f"verification failed: error {verified_error:.3e} > {args.max_error}",
              file=sys.stderr)
        return 1
    return 0


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symgadget",
        description="Ising-gadget walk laboratory: builders, experiments, exports")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value config file; flags override")
        p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized verification checks")

    p = sub.add_parser("gadget", help="manifold inspection report")
    add_common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--q0", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--mark-sector", type=int, default=None,
                   help="bias-table slot to mark")
    p.add_argument("--mark-weight", type=int, default=None,
                   help="logical weight to mark (consults the slot map)")
    p.add_argument("--mark-sign", type=float, default=-1.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gadget)

    p = sub.add_parser("effective", help="effective-Hamiltonian comparison")
    add_common(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--q0", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--gamma-d", type=float, default=0.01)
    p.add_argument("--gamma-a", type=float, default=0.01)
    p.add_argument("--mark-weight", type=int, default=None)
    p.add_argument("--mark-sign", type=float, default=-1.0)
    p.add_argument("--tol-offdiag", type=float, default=1e-10)
    p.add_argument("--tol-diag", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_effective)

    p = sub.add_parser("walk", help="encoded walk curves")
    add_common(p)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--ratio", type=float, action="append",
                   help="J/eta value; repeatable (default: the 20-point grid)")
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--with-reference", action="store_true",
                   help="append the exact-reference trace as J_over_eta = inf")
    p.add_argument("--out", default="curve.csv")
    p.set_defaults(func=cmd_walk)

    p = sub.add_parser("sweep", help="peak-probability sweep")
    add_common(p)
    p.add_argument("--n", dest="n_list", type=int, action="append",
                   help="data-qubit count; repeatable (default 2..6)")
    p.add_argument("--ratio", type=float, action="append")
    p.add_argument("--ratio-count", type=int, default=20)
    p.add_argument("--ratio-min", type=float, default=5.0)
    p.add_argument("--ratio-max", type=float, default=100.0)
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--out", default="sweep.csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("sym", help="sector-space walk under a weight potential")
    add_common(p)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--potential", choices=["flat", "spike", "plateau"], default="flat")
    p.add_argument("--potential-csv", help="CSV (k, f[k]) table; overrides --potential")
    p.add_argument("--height", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=128)
    p.add_argument("--out", default="sym.csv")
    p.set_defaults(func=cmd_sym)

    p = sub.add_parser("compile", help="Trotter schedule export")
    add_common(p)
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--q0", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.0)
    p.add_argument("--gamma-d", type=float, default=0.1)
    p.add_argument("--gamma-a", type=float, default=0.1)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--verify", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--max-error", type=float, default=0.1)
    p.add_argument("--out", default="schedule.json")
    p.set_defaults(func=cmd_compile)

    return parser


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    _apply_config(args, list(argv))
    try:
        return args.func(args)
    except (ValueError, ManifoldStructureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
