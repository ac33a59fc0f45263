"""Command-line driver: analyze graph files and serve the HTTP API.

Exit codes: 0 success, 1 usage error (bad flags or unreadable/malformed
input), 2 analysis failure (sampling or verification trouble).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Optional

from ._version import __version__
from .engine import (
    DEFAULT_COND_LIMIT,
    DEFAULT_NSAMPLES,
    DEFAULT_TOL_ENTRY,
    DEFAULT_TOL_RANK,
    EngineError,
    analyze,
)
from .oracle import run_verification
from .report import build_document, export_dot, export_json
from .topology import TopologyError, parse_graph

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ANALYSIS = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netident",
        description="Generic local identifiability of partially excited, "
        "partially measured networks.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser(
        "analyze",
        help="analyze a graph JSON file",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    pa.add_argument("--input", required=True, metavar="PATH",
                    help="graph JSON file: {n, edges, excited, measured}")
    pa.add_argument("--nsamples", type=int, default=DEFAULT_NSAMPLES,
                    help="independent random samples to accumulate")
    pa.add_argument("--seed", type=int, default=0,
                    help="random seed; same seed and input give identical output")
    pa.add_argument("--tol-rank", type=float, default=DEFAULT_TOL_RANK,
                    help="relative singular-value cutoff for numerical rank")
    pa.add_argument("--tol-entry", type=float, default=DEFAULT_TOL_ENTRY,
                    help="kernel-row norm below which an edge coordinate counts as zero")
    pa.add_argument("--cond-limit", type=float, default=DEFAULT_COND_LIMIT,
                    help="resample when cond(I - G) exceeds this")
    pa.add_argument("--format", choices=("json", "dot"), default="json",
                    help="output format")
    pa.add_argument("--verify", action="store_true",
                    help="run independent oracle cross-checks and append them to the report")
    pa.add_argument("--strict", action="store_true",
                    help="reject unknown fields in the input file")
    pa.add_argument("--timing", action="store_true",
                    help="record wall-clock seconds in the report "
                    "(makes output non-reproducible byte-for-byte)")

    ps = sub.add_parser(
        "serve",
        help="serve the HTTP API (and optionally a static UI bundle)",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    ps.add_argument("--port", type=int, default=8000, help="TCP port to bind")
    ps.add_argument("--host", default="127.0.0.1", help="interface to bind")
    ps.add_argument("--static-dir", default=None, metavar="DIR",
                    help="serve files from this directory under / (API stays under /api/)")
    ps.add_argument("--timeout", type=float, default=10.0,
                    help="per-request analysis timeout in seconds")
    ps.add_argument("--cors", action="store_true",
                    help="allow cross-origin API requests (UI dev mode)")
    return parser


def _fail_usage(message: str) -> int:
    print(f"netident: error: {message}", file=sys.stderr)
    return EXIT_USAGE


def _load_graph(path: str, strict: bool):
    """Read and validate a graph file; returns (topo, sets) or None after
    printing a line-anchored diagnostic."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        print(f"netident: error: {path}: {err.strerror or err}", file=sys.stderr)
        return None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        print(f"netident: error: {path}:{err.lineno}:{err.colno}: {err.msg}",
              file=sys.stderr)
        return None
    try:
        return parse_graph(data, strict=strict)
    except TopologyError as err:
        print(f"netident: error: {path}: {err}", file=sys.stderr)
        return None


def _run_analyze(args: argparse.Namespace) -> int:
    if args.nsamples < 1:
        return _fail_usage("--nsamples must be at least 1")
    if args.tol_rank <= 0 or args.tol_entry <= 0:
        return _fail_usage("tolerances must be positive")
    if args.cond_limit <= 1:
        return _fail_usage("--cond-limit must exceed 1")
    parsed = _load_graph(args.input, args.strict)
    if parsed is None:
        return EXIT_USAGE
    topo, sets = parsed

    start = time.perf_counter()
    try:
        result = analyze(
            topo,
            sets,
            nsamples=args.nsamples,
            seed=args.seed,
            tol_rank=args.tol_rank,
            tol_entry=args.tol_entry,
            cond_limit=args.cond_limit,
        )
        verification: Optional[dict] = None
        if args.verify:
            verification = run_verification(
                topo,
                sets,
                seed=args.seed,
                tol_rank=args.tol_rank,
                tol_entry=args.tol_entry,
                cond_limit=args.cond_limit,
            )
    except EngineError as err:
        print(f"netident: analysis failed: {err}", file=sys.stderr)
        return EXIT_ANALYSIS
    elapsed = time.perf_counter() - start

    doc = build_document(
        topo,
        sets,
        result,
        timing=elapsed if args.timing else None,
        verification=verification,
    )
    if args.format == "dot":
        sys.stdout.write(export_dot(doc))
    else:
        sys.stdout.buffer.write(export_json(doc))
        sys.stdout.buffer.flush()
    if verification is not None and not verification.get("pass", False):
        print("netident: verification checks FAILED (see report)", file=sys.stderr)
        return EXIT_ANALYSIS
    return EXIT_OK


def _run_serve(args: argparse.Namespace) -> int:
    from .service import create_server

    if args.port < 0 or args.port > 65535:
        return _fail_usage("--port must be in [0, 65535]")
    if args.timeout <= 0:
        return _fail_usage("--timeout must be positive")
    try:
        server = create_server(
            host=args.host,
            port=args.port,
            static_dir=args.static_dir,
            timeout_seconds=args.timeout,
            cors=args.cors,
        )
    except (OSError, ValueError) as err:
        return _fail_usage(f"cannot start server on {args.host}:{args.port}: {err}")
    host, port = server.server_address[:2]
    print(f"netident {__version__} serving on http://{host}:{port}/ "
          "(API under /api/)", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return EXIT_OK


def cli_main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems and 0 for --help/--version
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_OK if code == 0 else EXIT_USAGE
    if args.command == "analyze":
        return _run_analyze(args)
    return _run_serve(args)


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
