"""Command line front end.

Every subcommand is a thin client of the HTTP service in ``gwroot.api``:
by default the app is driven in-process (no server needed), and --server
URL points the same commands at a running instance.  Machine-readable
output goes to stdout (or --out), diagnostics to stderr.

Exit codes: 0 ok, 1 verification or check failure, 2 usage/config error,
3 runtime/sampling error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Any, Dict, List, Optional

from .errors import RUNTIME_ERROR_CODES

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


class CliFailure(Exception):
    """Abort with a message on stderr and a specific exit code."""

    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _make_client(server: Optional[str]):
    if server:
        import httpx

        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        # the in-process client pulls in starlette.testclient, which warns
        # about its httpx backend on some installs; not actionable here
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .api import app

    return TestClient(app, raise_server_exceptions=False)


def _call(client, method: str, path: str, payload: Optional[Dict] = None) -> Dict:
    import httpx

    try:
        if method == "get":
            resp = client.get(path)
        else:
            resp = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        raise CliFailure(EXIT_RUNTIME, f"service unreachable: {exc}") from exc
    if resp.status_code == 200:
        return resp.json()
    if resp.status_code == 422:
        raise CliFailure(EXIT_CONFIG, f"invalid request: {resp.text}")
    if resp.status_code >= 500:
        raise CliFailure(EXIT_RUNTIME, f"service error {resp.status_code}")
    try:
        body = resp.json()
    except ValueError:
        raise CliFailure(EXIT_RUNTIME, f"service error {resp.status_code}: {resp.text}")
    code = body.get("error", "")
    detail = body.get("detail", resp.text)
    exit_code = EXIT_RUNTIME if code in RUNTIME_ERROR_CODES else EXIT_CONFIG
    raise CliFailure(exit_code, f"{code}: {detail}")


def _load_json(path: str) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliFailure(EXIT_CONFIG, f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliFailure(EXIT_CONFIG, f"{path} is not valid JSON: {exc}") from exc


def _free_payload(data: Any) -> Dict:
    """Free-tree request body from any of the tree file shapes we emit."""
    if isinstance(data, dict) and isinstance(data.get("free"), dict):
        data = data["free"]
    if not isinstance(data, dict) or "n" not in data:
        raise CliFailure(EXIT_CONFIG, "tree file needs an object with 'n'")
    if "edges" in data:
        return {"n": data["n"], "edges": data["edges"]}
    if "parent" in data:
        edges = [[i, p] for i, p in enumerate(data["parent"]) if p >= 0]
        return {"n": data["n"], "edges": edges}
    raise CliFailure(EXIT_CONFIG, "tree file needs 'edges' or 'parent'")


def _emit(text: str, out: Optional[str]) -> None:
    if out and out != "-":
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(data: Any, out: Optional[str]) -> None:
    _emit(json.dumps(data, indent=2) + "\n", out)


def _csv_text(columns: List[str], rows: List[Dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns)
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def cmd_sample(args, client) -> int:
    payload = {
        "dist": _load_json(args.dist),
        "n": args.n,
        "count": args.count,
        "seed": args.seed,
    }
    if args.max_attempts is not None:
        payload["max_attempts"] = args.max_attempts
    body = _call(client, "post", "/sample", payload)
    lines = [json.dumps(t, separators=(",", ":")) for t in body["trees"]]
    _emit("\n".join(lines) + "\n", args.out)
    print(f"sampled {len(lines)} trees of size {args.n}", file=sys.stderr)
    return EXIT_OK


def cmd_estimate(args, client) -> int:
    payload = {
        "dist": _load_json(args.dist),
        "tree": _free_payload(_load_json(args.tree)),
        "seed": args.seed,
    }
    body = _call(client, "post", "/estimate", payload)
    _emit_json(body, args.out)
    return EXIT_OK


def cmd_posterior(args, client) -> int:
    payload = {
        "dist": _load_json(args.dist),
        "tree": _free_payload(_load_json(args.tree)),
        "method": args.method,
    }
    body = _call(client, "post", "/posterior", payload)
    _emit_json(body, args.out)
    return EXIT_OK


def cmd_verify(args, client) -> int:
    payload = {
        "suite": args.suite,
        "seed": args.seed,
        "trees": args.trees,
        "max_n": args.max_n,
    }
    body = _call(client, "post", "/verify", payload)
    _emit_json(body, args.out)
    if not body["passed"]:
        print(f"suite {args.suite} failed", file=sys.stderr)
        return EXIT_FAILED_CHECK
    return EXIT_OK


def cmd_trials(args, client) -> int:
    payload = {
        "dist": _load_json(args.dist),
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "checks": args.check or [],
    }
    body = _call(client, "post", "/trials", payload)
    _emit_json(body, args.out)
    if not body.get("checks_passed", True):
        for failure in body.get("check_failures", []):
            print(f"check failed: {failure}", file=sys.stderr)
        return EXIT_FAILED_CHECK
    return EXIT_OK


def cmd_campaign(args, client) -> int:
    entries = _load_json(args.config)
    if not isinstance(entries, list):
        raise CliFailure(EXIT_CONFIG, "campaign config must be a JSON list")
    body = _call(client, "post", "/campaign", {"entries": entries})
    rows = body["rows"]
    jsonl = "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in rows)
    _emit(jsonl, args.out)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(_csv_text(body["csv_columns"], body["csv_rows"]))
    if not all(r.get("checks_passed", True) for r in rows):
        print("one or more campaign checks failed", file=sys.stderr)
        return EXIT_FAILED_CHECK
    return EXIT_OK


def cmd_families(args, client) -> int:
    payload = {
        "n": args.n,
        "trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
    }
    body = _call(client, "post", "/families", payload)
    if args.format == "json":
        _emit_json(body["rows"], args.out)
    else:
        _emit(_csv_text(body["csv_columns"], body["csv_rows"]), args.out)
    return EXIT_OK


def cmd_predict(args, client) -> int:
    payload = {"dist": _load_json(args.dist), "n": args.n}
    body = _call(client, "post", "/predict", payload)
    _emit_json(body, args.out)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("gwroot.api:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwroot",
        description="Size-conditioned branching trees: sampling, root "
        "recovery and verification.",
    )
    parser.add_argument(
        "--server",
        metavar="URL",
        default=None,
        help="base URL of a running service (default: run in-process)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample conditioned trees to JSON lines")
    p.add_argument("--dist", required=True, metavar="FILE", help="distribution config JSON")
    p.add_argument("--n", required=True, type=int, help="tree size")
    p.add_argument("--count", type=int, default=1, help="number of trees")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-attempts", type=int, default=None, dest="max_attempts")
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("estimate", help="most likely root of a free tree")
    p.add_argument("--tree", required=True, metavar="FILE", help="free tree JSON")
    p.add_argument("--dist", required=True, metavar="FILE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("posterior", help="exact root posterior of a free tree")
    p.add_argument("--tree", required=True, metavar="FILE")
    p.add_argument("--dist", required=True, metavar="FILE")
    p.add_argument("--method", default="auto", choices=["auto", "exact", "log", "float"])
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", help="suite name (see README)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trees", type=int, default=200, help="corpus size")
    p.add_argument("--max-n", type=int, default=50, dest="max_n")
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("trials", help="Monte Carlo correctness experiment")
    p.add_argument("--dist", required=True, metavar="FILE")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--trials", required=True, type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument(
        "--check",
        action="append",
        metavar="NAME",
        help="acceptance check to evaluate (repeatable)",
    )
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("campaign", help="run a list of experiments from a config")
    p.add_argument("--config", required=True, metavar="FILE", help="JSON list of entries")
    p.add_argument("--out", default=None, metavar="PATH", help="JSON-lines output")
    p.add_argument("--csv", default=None, metavar="PATH", help="CSV summary output")

    p = sub.add_parser(
        "families", help="empirical vs predicted correctness for the classic families"
    )
    p.add_argument("--n", type=int, default=100, help="target size (bumped to feasible)")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("predict", help="theory predictions for a distribution at size n")
    p.add_argument("--dist", required=True, metavar="FILE")
    p.add_argument("--n", required=True, type=int)
    p.add_argument("--out", default=None, metavar="PATH")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


HANDLERS = {
    "sample": cmd_sample,
    "estimate": cmd_estimate,
    "posterior": cmd_posterior,
    "verify": cmd_verify,
    "trials": cmd_trials,
    "campaign": cmd_campaign,
    "families": cmd_families,
    "predict": cmd_predict,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    client = _make_client(args.server)
    try:
        return HANDLERS[args.command](args, client)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    finally:
        client.close()


if __name__ == "__main__":
    sys.exit(main())
