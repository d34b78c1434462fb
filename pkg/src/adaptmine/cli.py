"""Headless command-line driver: mine a case base, generate synthetic
bases, or launch the analyst service.

Exit codes: 0 success, 2 flag validation, 3 load/validation failure,
4 mining budget exceeded, 5 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .casebase import KBLoadError, dump_kb, load_kb
from .exports import export_artifact
from .mining import MiningBudgetExceeded
from .service import ServiceConfig, serve
from .session import run_pipeline
from .synthetic import (
    InfeasibleSpecError,
    PlantedRule,
    SyntheticSpec,
    default_spec,
    generate_synthetic,
    ledger_document,
    scale_spec,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_LOAD = 3
EXIT_BUDGET = 4
EXIT_IO = 5

DEFAULT_OUT_ENV = "ADAPTMINE_OUT"


def _out_dir(args) -> Path:
    out = args.out or os.environ.get(DEFAULT_OUT_ENV) or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _sigma(value: str) -> float:
    sigma = float(value)
    if not 0.0 <= sigma <= 1.0:
        raise argparse.ArgumentTypeError(f"--sigma must be in [0, 1], got {value}")
    return sigma


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adaptmine",
        description="Mine case-adaptation rules from the variations between case pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="run the full pipeline non-interactively")
    mine.add_argument("kb", help="case-base file")
    mine.add_argument("--sigma", type=_sigma, default=0.1, help="support threshold (default 0.1)")
    mine.add_argument("--k-overlap", type=int, default=None,
                      help="keep only pairs whose problems share at least k properties")
    mine.add_argument("--filters", type=Path, default=None,
                      help="JSON file with per-stage filter specs")
    mine.add_argument("--out", type=Path, default=None,
                      help=f"output directory (default: ${DEFAULT_OUT_ENV} or cwd)")
    mine.add_argument("--budget-seconds", type=float, default=None,
                      help="abort mining after this many seconds")
    mine.add_argument("--workers", type=int, default=1, help="mining worker threads")
    mine.add_argument("--skip-transactions-export", action="store_true",
                      help="do not write the (possibly huge) transactions file")

    gen = sub.add_parser("gen", help="generate a synthetic case base with planted rules")
    gen.add_argument("--spec", type=Path, default=None, help="JSON synthetic spec")
    gen.add_argument("--cases", type=int, default=200, help="case count for the default spec")
    gen.add_argument("--prevalence", type=float, default=0.2,
                     help="planted-rule prevalence for the default spec")
    gen.add_argument("--profile", choices=("default", "scale"), default="default",
                     help="'scale' uses the richer vocabulary sized for throughput runs")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, default=None)

    srv = sub.add_parser("serve", help="host the analyst workbench service")
    srv.add_argument("kb", help="case-base file")
    srv.add_argument("--port", type=int, default=8765)
    srv.add_argument("--token", default=None, help="session token (random if omitted)")
    srv.add_argument("--assets", type=Path, default=None,
                     help="workbench static assets directory")
    return parser


def cmd_mine(args) -> int:
    try:
        kb = load_kb(args.kb)
    except KBLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    filters = None
    if args.filters:
        try:
            filters = json.loads(args.filters.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read filters: {exc}", file=sys.stderr)
            return EXIT_LOAD
    out = _out_dir(args)
    started = time.monotonic()
    try:
        session = run_pipeline(
            kb,
            sigma=args.sigma,
            min_overlap=args.k_overlap,
            time_budget=args.budget_seconds,
            workers=args.workers,
            filters=filters,
        )
    except MiningBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    elapsed = time.monotonic() - started
    try:
        if not args.skip_transactions_export:
            export_artifact(session, "transactions", out / "transactions.txt")
        export_artifact(session, "fcis", out / "fcis.txt")
        export_artifact(session, "rules", out / "rules.json")
        export_artifact(session, "session", out / "session.zip")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    db = session.artifacts["s6"]
    mined = session.artifacts["s7"]
    views = session.artifacts["s8"]
    print(f"cases:                {len(session.artifacts['s2'])}")
    print(f"properties:           {len(session.artifacts['s4'].universe)}")
    print(f"transactions:         {db.n_transactions}")
    print(f"fcis mined:           {len(mined)}")
    print(f"fcis after filters:   {len(views)}")
    print(f"rule candidates:      {len(session.artifacts['s9'])}")
    print(f"kb digest:            {kb.digest}")
    print(f"wall time:            {elapsed:.2f}s")
    print(f"outputs in:           {out}")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.spec:
        try:
            raw = json.loads(args.spec.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read spec: {exc}", file=sys.stderr)
            return EXIT_LOAD
        planted = tuple(PlantedRule(**p) for p in raw.pop("planted", []))
        raw.setdefault("seed", args.seed)
        try:
            spec = SyntheticSpec(planted=planted, **raw)
        except (TypeError, InfeasibleSpecError) as exc:
            print(f"error: bad spec: {exc}", file=sys.stderr)
            return EXIT_LOAD
    elif args.profile == "scale":
        spec = scale_spec(args.cases, seed=args.seed)
    else:
        spec = default_spec(args.cases, seed=args.seed, prevalence=args.prevalence)
    try:
        kb, ledger = generate_synthetic(spec)
    except InfeasibleSpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    out = _out_dir(args)
    try:
        dump_kb(kb, out / "casebase.txt")
        (out / "ledger.json").write_text(
            json.dumps(ledger_document(ledger), indent=2, sort_keys=True) + "\n"
        )
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(f"cases:      {len(kb.cases)}")
    print(f"kb digest:  {kb.digest}")
    for truth in ledger.rules:
        print(
            f"planted {truth.rule.name}: {truth.expected_support_count} pairs, "
            f"expected support {truth.expected_support:.4f}"
        )
    print(f"outputs in: {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    try:
        kb = load_kb(args.kb)
    except KBLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    assets = args.assets
    if assets is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        assets = bundled if bundled.is_dir() else None
    config = ServiceConfig(kb=kb, port=args.port, token=args.token, assets_dir=assets)
    try:
        service = serve(config)
    except OSError as exc:
        print(f"error: cannot bind port {args.port}: {exc}", file=sys.stderr)
        return EXIT_IO
    host, port = service.address
    print(f"serving on http://{host}:{port}/")
    print(f"session token: {service.token}")
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        service.stop()
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "mine":
        return cmd_mine(args)
    if args.command == "gen":
        return cmd_gen(args)
    if args.command == "serve":
        return cmd_serve(args)
    parser.error(f"unknown command {args.command!r}")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
