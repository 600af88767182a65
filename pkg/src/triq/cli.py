"""Command-line front end.

    triq analyze STATE.json
    triq verify --n 1000 --seed 0
    triq sweep ghz-alpha --n 50
    triq secretshare --bits cafe --shots 100000 --frames random

Reports are JSON lines with sorted keys; sweeps default to CSV. Output depends
only on the arguments, so identical invocations give byte-identical files.
Exit codes: 0 success, 1 a relation failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import measures, relations, secretshare
from .correlations import bloch_vectors, corr_matrix, decompose, spectrum
from .qstate import (
    CanonicalParams,
    DensityMatrix,
    NoiseParams,
    StateFormatError,
    ValidationError,
    from_canonical,
    ghz,
    ghz_alpha,
    haar_random_pure,
    load_state,
    partial_trace,
    random_mixture,
    w_state,
    werner,
)

EXIT_OK, EXIT_RELATION, EXIT_INPUT = 0, 1, 2
FAMILIES = ("ghz-alpha", "wclass", "werner")
NAMED = {"ghz": ghz, "w": w_state}


class InputError(Exception):
    pass


# -- measures -------------------------------------------------------------


def pair_measures(rho: DensityMatrix) -> dict:
    """Spectrum, anisotropy profile and correlation measures of a two-qubit state."""
    T = corr_matrix(rho)
    a, b = bloch_vectors(rho)
    spec = spectrum(T)
    prof = decompose(spec)
    M = spec.s1 + spec.s2
    return {
        "s1": spec.s1,
        "s2": spec.s2,
        "s3": spec.s3,
        **prof.as_dict(),
        "concurrence": measures.concurrence(rho),
        "M": M,
        "chsh_max": 2 * math.sqrt(M),
        "F": (spec.s2 + spec.s3) / 2,
        "discord_first": measures.discord_from_parts(a, T),
        "discord_second": measures.discord_from_parts(b, T.T),
    }


def state_measures(state) -> dict:
    """Flat dict of pair measures prefixed by pair name, plus the three-tangle."""
    out = {}
    for p in relations.PAIRS:
        for k, v in pair_measures(partial_trace(state, p)).items():
            out[f"{p}_{k}"] = v
    out["tau"] = measures.three_tangle(state)
    return out


# -- output ---------------------------------------------------------------


def _clean(value):
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def _json_line(record: dict) -> str:
    return json.dumps(_clean(record), sort_keys=True)


def _csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in row.items()})
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _render(records: list[dict], fmt: str) -> str:
    if fmt == "csv":
        return _csv_text(records)
    return "".join(_json_line(r) + "\n" for r in records)


# -- argument parsing helpers ----------------------------------------------


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _etas(text: str) -> NoiseParams:
    try:
        values = [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eta wants three numbers a,b,c, got {text!r}") from None
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"--eta wants three numbers a,b,c, got {text!r}")
    try:
        return NoiseParams(*values)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _budget(text: str) -> tuple[int, int]:
    try:
        r, i = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--roof-budget wants RESTARTSxITERATIONS, got {text!r}") from None
    if r < 1 or i < 0:
        raise argparse.ArgumentTypeError(f"--roof-budget needs at least one restart, got {text!r}")
    return r, i


def _threads() -> int:
    raw = os.environ.get("TRIQ_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"TRIQ_THREADS must be an integer, got {raw!r}") from None


def _member_seed(*keys: int) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1, np.uint64)[0] >> 1)


# -- analyze --------------------------------------------------------------


def _load(path: str):
    try:
        return load_state(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except StateFormatError as exc:
        raise InputError(f"{path}: field {exc.field}: {exc}") from None


def cmd_analyze(args) -> int:
    state = _load(args.state)
    records = []
    for p in relations.PAIRS:
        records.append({"record": "pair", "state": state.label, "pair": p, **pair_measures(partial_trace(state, p))})
    records.append({"record": "state", "state": state.label, "tau": measures.three_tangle(state)})
    reports = relations.all_relations(state, n_random=args.n, seed=args.seed, tol=args.tol)
    records += [{"record": "relation", **r.to_dict()} for r in reports]
    if args.format == "csv":
        records = records[: len(relations.PAIRS)]
    _emit(_render(records, args.format), args.out)
    return EXIT_OK if all(r.satisfied for r in reports) else EXIT_RELATION


# -- verify ---------------------------------------------------------------


def _verify_one(task) -> list[dict]:
    kind, key, n_random, seed, tol, fault, budget = task
    if kind == "haar":
        state = haar_random_pure(key)
    elif kind == "mixed":
        state = random_mixture(key, rank=2)
    else:
        state = key
    target = relations.summarize(state)
    if fault:
        target = target.with_fault()
    if kind == "mixed" and budget is not None:
        target = state
    reports = relations.all_relations(target, n_random=n_random, seed=seed, tol=tol, roof_budget=budget)
    return [r.to_dict() | {"_tol": r.tol} for r in reports]


def _base_name(name: str) -> str:
    return name.split("[", 1)[0]


def cmd_verify(args) -> int:
    tasks = []
    for path in args.state or ():
        tasks.append(("file", _load(path), args.n_random, args.seed, args.tol, args.inject_fault, args.roof_budget))
    for name in args.named or ():
        tasks.append(("file", NAMED[name](), args.n_random, args.seed, args.tol, args.inject_fault, args.roof_budget))
    if not tasks:
        for i in range(args.n):
            tasks.append(("haar", _member_seed(args.seed, i), args.n_random, args.seed, args.tol, args.inject_fault, None))
    for i in range(args.mixed):
        key = _member_seed(args.seed, i, 1)
        tasks.append(("mixed", key, args.n_random, args.seed, args.tol, args.inject_fault, args.roof_budget))

    threads = _threads()
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_verify_one, tasks, chunksize=max(1, len(tasks) // (4 * threads))))
    else:
        results = [_verify_one(t) for t in tasks]

    summary: dict[str, dict] = {}
    failures = []
    for reports in results:
        for r in reports:
            name = _base_name(r["name"])
            entry = summary.setdefault(name, {"checked": 0, "failures": 0, "worst_residual": -math.inf})
            entry["checked"] += 1
            if not r["satisfied"]:
                entry["failures"] += 1
                failures.append(r)
            if r["residual"] > entry["worst_residual"]:
                entry["worst_residual"] = r["residual"]
                entry["worst_state"] = r["state_label"]
                entry["tol"] = r["_tol"]
    records = [{"record": "failure", **{k: v for k, v in r.items() if k != "_tol"}} for r in failures]
    records += [{"record": "summary", "relation": k, **v} for k, v in sorted(summary.items())]
    ok = not failures
    records.append({
        "record": "verdict",
        "all_satisfied": ok,
        "n_states": len(tasks),
        "failing_relations": sorted({r["name"] for r in failures}),
        "seed": args.seed,
        "fault_injected": args.inject_fault,
    })
    _emit(_render(records, "json"), args.out)
    if not ok:
        print("relation failures: " + ", ".join(records[-1]["failing_relations"]), file=sys.stderr)
    return EXIT_OK if ok else EXIT_RELATION


# -- sweep ----------------------------------------------------------------


def _sweep_rows(family: str, n: int, seed: int) -> list[dict]:
    rows = []
    if family == "ghz-alpha":
        for i in range(n):
            alpha = (math.pi / 2) * i / (n - 1) if n > 1 else 0.0
            rows.append({"alpha": alpha, "sin2_2alpha": math.sin(2 * alpha) ** 2, **state_measures(ghz_alpha(alpha))})
    elif family == "werner":
        for i in range(n):
            w = i / (n - 1) if n > 1 else 1.0
            rows.append({"W": w, "W2": w * w, **pair_measures(werner(w))})
    elif family == "wclass":
        for i in range(n):
            params = CanonicalParams.random(_member_seed(seed, i), wclass=True)
            oracle = relations.wclass_oracle(params)
            row = {k: v for k, v in zip(("l0", "l1", "l2", "l3"), params.ls)}
            row["phi"] = params.phi
            row.update(state_measures(from_canonical(params)))
            row["closed_form_residual"] = oracle.residual
            rows.append(row)
    else:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    return rows


def cmd_sweep(args) -> int:
    rows = _sweep_rows(args.family, args.n, args.seed)
    if args.format == "json":
        rows = [{"family": args.family, **r} for r in rows]
    _emit(_render(rows, args.format), args.out)
    return EXIT_OK


# -- secretshare ----------------------------------------------------------


def cmd_secretshare(args) -> int:
    try:
        bits = secretshare.parse_bits(args.bits)
    except ValidationError as exc:
        raise InputError(f"--bits: {exc}") from None
    report = secretshare.run_protocol(
        bits, pair=args.pair, frames=args.frames, noise=args.eta, shots=args.shots, seed=args.seed
    )
    record = {
        **report.to_dict(),
        "frames": args.frames,
        "pair": args.pair,
        "shots": args.shots,
        "eta": [args.eta.eta_A, args.eta.eta_B, args.eta.eta_C],
        "seed": args.seed,
    }
    _emit(_json_line(record) + "\n", args.out)
    return EXIT_OK


# -- entry point ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="triq", description="Pairwise correlation anisotropy of three-qubit states.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write here instead of stdout")

    p = sub.add_parser("analyze", parents=[common], help="profiles, measures and relations of one state file")
    p.add_argument("state", help="JSON file with 'amplitudes' or 'canonical'")
    p.add_argument("--n", type=int, default=100, help="random CHSH direction draws per pair")
    p.add_argument("--tol", type=_positive_float, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", parents=[common], help="check every relation over a random ensemble")
    p.add_argument("--n", type=_positive_int, default=1000, help="Haar-random pure states")
    p.add_argument("--n-random", type=int, default=100, help="random CHSH direction draws per pair")
    p.add_argument("--mixed", type=int, default=0, help="additional random rank-2 mixtures")
    p.add_argument("--state", action="append", help="verify this state file instead of the ensemble")
    p.add_argument("--named", action="append", choices=sorted(NAMED), help="verify a built-in state instead")
    p.add_argument("--tol", type=_positive_float, default=None)
    p.add_argument("--inject-fault", action="store_true", help="flip the sign of one T entry (self-test)")
    p.add_argument("--roof-budget", type=_budget, default=None, help="RESTARTSxITERATIONS for mixed-state roofs")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", parents=[common], help="measures along a parameter family")
    p.add_argument("family", help="one of " + ", ".join(FAMILIES))
    p.add_argument("--n", type=_positive_int, default=50)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("secretshare", parents=[common], help="simulate the gap-encoded secret-sharing protocol")
    p.add_argument("--bits", required=True, help="message as hex, four bits per digit")
    p.add_argument("--shots", type=_positive_int, default=100_000, help="shots per measurement setting")
    p.add_argument("--eta", type=_etas, default=NoiseParams(), help="per-qubit noise a,b,c")
    p.add_argument("--frames", choices=("fixed", "random"), default="fixed")
    p.add_argument("--pair", choices=relations.PAIRS, default="AB")
    p.set_defaults(func=cmd_secretshare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"triq: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as exc:
        print(f"triq: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
