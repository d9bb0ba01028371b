"""Batch command-line front end.

One process runs one job: parse the inputs, run the operation, and emit
the artifact (CSV or JSON) to stdout or to --out.  Exit codes: 0 on
success, 1 on a domain error (emitted as machine-readable error JSON on
stdout), 2 on an input parse or validation error.  Outputs are
byte-deterministic for identical inputs and parameters.

Weight arguments accept inline JSON ({"family": "power", "alpha": "2"}),
a path to such a JSON file, or the shorthand family:params (power:2,
exp:3/2, power_log:1,1).  Tuple specifications are JSON objects with
"dim" and either "factors" (a list of weight objects) or "grams" (a list
of matrix file paths relative to the spec file).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import ScaleGeoError
from .spectral import (
    canonical_weight,
    invariant_table,
    make_diagonal_tuple,
    make_gram_pair,
    make_gram_tuple,
    read_matrix,
    splice_tuple,
)
from .weightfn import (
    DEFAULT_SCAN_CAP,
    equiv_check,
    exponential,
    inclusion_tail_norm,
    power,
    power_log,
    weight_from_json,
    weight_to_json,
)
from .wildperm import DEFAULT_DEPTH, Caps, grow_wild_set

__all__ = ["JobSpec", "run", "main"]


@dataclass
class JobSpec:
    """One parsed, ready-to-run job."""

    command: str
    params: dict = field(default_factory=dict)
    out: str = None
    fmt: str = None


# ---------------------------------------------------------------------------
# input parsing


def _parse_weight(text: str):
    text = text.strip()
    if not text:
        raise ValueError("empty weight specification")
    if text.startswith("{"):
        return weight_from_json(json.loads(text))
    head = text.split(":", 1)[0]
    if ":" in text and head in ("power", "exp", "power_log"):
        args = [p.strip() for p in text.split(":", 1)[1].split(",")]
        if head == "power" and len(args) == 1:
            return power(int(args[0]))
        if head == "exp" and len(args) == 1:
            return exponential(Fraction(args[0]))
        if head == "power_log" and len(args) == 2:
            return power_log(int(args[0]), int(args[1]))
        raise ValueError(f"malformed weight shorthand {text!r}")
    return weight_from_json(json.loads(Path(text).read_text()))


def _parse_tuple(path: str):
    spec_path = Path(path)
    obj = json.loads(spec_path.read_text())
    if not isinstance(obj, dict) or "dim" not in obj:
        raise ValueError("tuple spec must be a JSON object with a 'dim' key")
    dim = int(obj["dim"])
    if "factors" in obj:
        factors = [weight_from_json(w) for w in obj["factors"]]
        return make_diagonal_tuple(factors, dim)
    if "grams" in obj:
        mats = [read_matrix(spec_path.parent / g) for g in obj["grams"]]
        tup = make_gram_tuple(mats)
        if tup.dim != dim:
            raise ValueError(
                f"tuple spec 'dim' {dim} does not match the matrices ({tup.dim})"
            )
        return tup
    raise ValueError("tuple spec needs a 'factors' or a 'grams' key")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scalegeo",
        description="canonical weights, invariant tables, and wild permutation sets",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("canonicalize", help="canonical weight of a Gram pair")
    p.add_argument("--gram-h", required=True, help="outer-space Gram (CSV or JSON)")
    p.add_argument("--gram-w", required=True, help="inner-space Gram (CSV or JSON)")
    _common_out(p, default_fmt="csv")

    p = sub.add_parser("invariant", help="invariant table of a scale tuple")
    p.add_argument("--tuple", required=True, help="tuple spec JSON file")
    p.add_argument("--cap", type=int, default=DEFAULT_SCAN_CAP)
    _common_out(p, default_fmt="csv")

    p = sub.add_parser("wild", help="grow a certified wild permutation set")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)
    p.add_argument("--size", type=int, required=True)
    p.add_argument("--depth", type=int, default=DEFAULT_DEPTH)
    p.add_argument("--cap", type=int, default=DEFAULT_SCAN_CAP)
    p.add_argument("--threshold", default="10")
    p.add_argument("--n", type=int, default=32, help="rows in the CSV growth table")
    _common_out(p, default_fmt="json")

    p = sub.add_parser("equiv", help="equivalence verdict for two weights")
    p.add_argument("--f1", "--a", dest="f1", required=True)
    p.add_argument("--f2", "--b", dest="f2", required=True)
    p.add_argument("--window", type=int, default=256)
    p.add_argument("--threshold", default="10")
    _common_out(p, default_fmt="json")

    p = sub.add_parser("pairnorm", help="norm of the inclusion tail beyond rank n")
    p.add_argument("--f1", required=True)
    p.add_argument("--n", type=int, required=True)
    _common_out(p, default_fmt="json")

    p = sub.add_parser("splice", help="glue a diagonal triple to a diagonal tuple")
    p.add_argument("--tuple", required=True, help="the triple's spec JSON file")
    p.add_argument("--tail", required=True, help="the tail tuple's spec JSON file")
    _common_out(p, default_fmt="json")

    return parser


def _common_out(p: argparse.ArgumentParser, default_fmt: str):
    p.add_argument("--out", default=None, help="output path (stdout when omitted)")
    p.add_argument("--format", choices=("csv", "json"), default=default_fmt)


def _job_from_args(ns: argparse.Namespace) -> JobSpec:
    params = {}
    cmd = ns.command
    if cmd == "canonicalize":
        params["gram_h"] = read_matrix(ns.gram_h)
        params["gram_w"] = read_matrix(ns.gram_w)
    elif cmd == "invariant":
        params["tuple"] = _parse_tuple(ns.tuple)
        params["cap"] = _positive(ns.cap, "cap")
    elif cmd == "wild":
        params["f1"] = _parse_weight(ns.f1)
        params["f2"] = _parse_weight(ns.f2)
        params["size"] = _positive(ns.size, "size")
        params["depth"] = _positive(ns.depth, "depth")
        params["cap"] = _positive(ns.cap, "cap")
        params["threshold"] = _threshold(ns.threshold)
        params["rows"] = _positive(ns.n, "n")
    elif cmd == "equiv":
        params["f1"] = _parse_weight(ns.f1)
        params["f2"] = _parse_weight(ns.f2)
        params["window"] = _positive(ns.window, "window")
        params["threshold"] = _threshold(ns.threshold)
    elif cmd == "pairnorm":
        params["f1"] = _parse_weight(ns.f1)
        if ns.n < 0:
            raise ValueError("n must be nonnegative")
        params["n"] = ns.n
    elif cmd == "splice":
        params["triple"] = _parse_tuple(ns.tuple)
        params["tail"] = _parse_tuple(ns.tail)
        if ns.format != "json":
            raise ValueError("splice emits JSON only")
    return JobSpec(command=cmd, params=params, out=ns.out, fmt=ns.format)


def _positive(v: int, name: str) -> int:
    if v < 1:
        raise ValueError(f"{name} must be a positive integer")
    return v


def _threshold(text) -> Fraction:
    thr = Fraction(str(text))
    if thr < 1:
        raise ValueError("threshold must be at least 1")
    return thr


# ---------------------------------------------------------------------------
# running


def _json_value(v):
    return str(v) if isinstance(v, Fraction) else float(v)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _run_canonicalize(p: dict, fmt: str) -> str:
    pair = make_gram_pair(p["gram_h"], p["gram_w"])
    vals = canonical_weight(pair)
    if fmt == "json":
        return _dump({"n": pair.dim, "canonical_weight": [_json_value(v) for v in vals]})
    lines = ["nu,value"]
    lines += [f"{k},{float(v)!r}" for k, v in enumerate(vals, start=1)]
    return "\n".join(lines) + "\n"


def _run_invariant(p: dict, fmt: str) -> str:
    table = invariant_table(p["tuple"], scan_cap=p["cap"])
    if fmt == "json":
        return _dump(
            {
                "dim": table.dim,
                "n_spaces": table.n_spaces,
                "entries": {
                    f"{i},{j}": [_json_value(v) for v in table.entries[(i, j)]]
                    for (i, j) in sorted(table.entries)
                },
            }
        )
    return table.to_csv()


def _run_wild(p: dict, fmt: str) -> str:
    caps = Caps(scan_cap=p["cap"])
    ws = grow_wild_set(
        p["f1"], p["f2"], p["size"], depth=p["depth"], caps=caps,
        threshold=p["threshold"],
    )
    if fmt == "csv":
        return ws.growth_csv(p["rows"], scan_cap=p["cap"])
    return _dump(ws.to_json())


def _run_equiv(p: dict, fmt: str) -> str:
    v = equiv_check(p["f1"], p["f2"], p["window"], p["threshold"])
    if v.kind == "exact":
        obj = {"kind": "exact", "equivalent": v.equivalent}
    elif v.kind == "bounded_ratio":
        obj = {"kind": "bounded_ratio", "c": str(v.c), "window": v.window}
    else:
        obj = {"kind": "divergence_witness", "index": v.index, "ratio": str(v.ratio)}
    if fmt == "csv":
        lines = ["key,value"] + [f"{k},{obj[k]}" for k in obj]
        return "\n".join(lines) + "\n"
    return _dump(obj)


def _run_pairnorm(p: dict, fmt: str) -> str:
    norm = inclusion_tail_norm(p["f1"], p["n"])
    obj = {"n": p["n"], "norm": _json_value(norm), "norm_float": float(norm)}
    if fmt == "csv":
        return "n,norm\n" + f"{p['n']},{float(norm)!r}\n"
    return _dump(obj)


def _run_splice(p: dict, fmt: str) -> str:
    spliced = splice_tuple(p["triple"], p["tail"])
    return _dump(
        {
            "dim": spliced.dim,
            "factors": [weight_to_json(f) for f in spliced.factors],
        }
    )


_RUNNERS = {
    "canonicalize": _run_canonicalize,
    "invariant": _run_invariant,
    "wild": _run_wild,
    "equiv": _run_equiv,
    "pairnorm": _run_pairnorm,
    "splice": _run_splice,
}


def run(job: JobSpec) -> str:
    """Execute a parsed job and return its artifact text."""
    return _RUNNERS[job.command](job.params, job.fmt)


def _print_error(exc: Exception, stream) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc)}}
    print(json.dumps(payload), file=stream)


def main(argv=None) -> int:
    ns = _build_parser().parse_args(argv)
    try:
        job = _job_from_args(ns)
    except ScaleGeoError as exc:
        _print_error(exc, sys.stdout)
        return 1
    except Exception as exc:  # any malformed input is a parse error
        _print_error(exc, sys.stderr)
        return 2
    try:
        artifact = run(job)
    except ScaleGeoError as exc:
        _print_error(exc, sys.stdout)
        return 1
    if job.out:
        Path(job.out).write_text(artifact)
    else:
        sys.stdout.write(artifact)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
