"""Command-line front end.

Examples::

    prodlocc sets build eq5 --output eq5.json
    prodlocc sets verify eq5.json
    prodlocc analyze eq2 --partition "1|2,3"
    prodlocc threshold eq5
    prodlocc resource eq3 --m 4 --d 3
    prodlocc bound-ent --seed 0

Exit codes: 0 success / all verdicts conclusive, 1 usage or input error,
2 some verdict inconclusive (or the protocol report failed), 3 product
completion failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys

import numpy as np

from . import entanglement, locc, states
from .partitions import Partition, PartitionError, enumerate_k_partitions
from .states import StateSetError
from .tensor import RANK_RTOL

log = logging.getLogger("prodlocc")

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_COMPLETION = 0, 1, 2, 3

BUILTIN_SETS = {
    "bennett-qutrit": "two-qutrit nine-state product basis",
    "bennett-S": "its eight-state subset S",
    "bennett-3qubit": "three-qubit eight-state product basis",
    "eq1": "tripartite cyclic set in (C^d)^3, needs --d",
    "eq2": "ten states in C^3 x C^2 x C^2",
    "eq3": "m-party cyclic set in (C^d)^m, needs --m and --d",
    "eq5": "81-state basis of four qutrits",
    "six-state": "five states of eq2 plus |s>, for the bound-entanglement protocol",
    "computational": "computational basis, needs --dims",
}


class CliError(Exception):
    pass


# -- deterministic JSON ----------------------------------------------------------


def _encode(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return json.dumps(x)
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj):
    """JSON with sorted keys and 17 significant digits per float."""
    return _encode(obj) + "\n"


# -- inputs ----------------------------------------------------------------------


def build_set(name, m=None, d=None, dims=None):
    if name == "bennett-qutrit":
        return states.bennett_qutrit_basis()
    if name == "bennett-S":
        return states.bennett_subset_S()
    if name == "bennett-3qubit":
        return states.bennett_three_qubit_basis()
    if name == "eq1":
        return states.cyclic_tripartite_set(_need(d, "--d"))
    if name == "eq2":
        return states.eq2_set()
    if name == "eq3":
        return states.eq3_set(_need(m, "--m"), _need(d, "--d"))
    if name == "eq5":
        return states.eq5_basis()
    if name == "six-state":
        return states.six_state_set()
    if name == "computational":
        return states.computational_basis(_need(dims, "--dims"))
    raise CliError(f"unknown set {name!r}; choose from {', '.join(BUILTIN_SETS)}")


def _need(value, flag):
    if value is None:
        raise CliError(f"this set needs {flag}")
    return value


def resolve_set(args):
    """A built-in set by name, or a StateSet JSON file; must be orthogonal."""
    src = args.set
    if src in BUILTIN_SETS:
        s = build_set(src, args.m, args.d, args.dims)
    elif os.path.exists(src):
        s = states.load_json(src)
    else:
        raise CliError(f"{src!r} is neither a built-in set nor a file")
    rep = states.verify_set(s, args.tol)
    if not rep.orthogonal:
        raise CliError(f"{s.name or src}: states are not orthogonal (max overlap {rep.gram_residual:.3g})")
    return s


def load_unitary(path):
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: invalid JSON: {exc}") from exc
    try:
        flat = np.array([complex(re_, im) for row in data for re_, im in _pairs(row)])
    except (TypeError, ValueError) as exc:
        raise CliError(f"{path}: expected a row-major matrix of [re, im] pairs") from exc
    n = math.isqrt(flat.size)
    if n * n != flat.size:
        raise CliError(f"{path}: {flat.size} entries do not form a square matrix")
    return flat.reshape(n, n)


def _pairs(row):
    # a row is either one [re, im] pair (flat layout) or a list of pairs
    if len(row) == 2 and all(isinstance(x, (int, float)) for x in row):
        return [row]
    return row


def _dims(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad dims {text!r}") from exc


def _tolerances(args):
    return {"tol": args.tol, "rank_tol": args.rank_tol}


def _emit(args, payload):
    text = dumps(payload)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands --------------------------------------------------------------------


def cmd_sets(args):
    if args.action == "list":
        _emit(args, {"sets": [{"name": k, "description": v} for k, v in BUILTIN_SETS.items()]})
        return EXIT_OK
    if args.action == "build":
        if not args.target:
            raise CliError("sets build needs a set name")
        s = build_set(args.target, args.m, args.d, args.dims)
        _emit(args, states.to_json_dict(s))
        return EXIT_OK
    if not args.target:
        raise CliError("sets verify needs a path")
    s = states.load_json(args.target)
    rep = states.verify_set(s, args.tol)
    out = dict(rep.to_dict(), name=s.name, count=len(s), dims=list(s.dims), tolerances=_tolerances(args))
    _emit(args, out)
    return EXIT_OK if rep.orthogonal else EXIT_ERROR


def _partition(args, s):
    if not args.partition:
        raise CliError("--partition is required")
    try:
        return Partition.parse(args.partition, s.n_parties)
    except PartitionError as exc:
        raise CliError(str(exc)) from exc


def cmd_analyze(args):
    s = resolve_set(args)
    v = locc.analyze_partition(s, _partition(args, s), args.tol, args.rank_tol)
    _emit(args, dict(v.to_dict(), set=s.name, tolerances=_tolerances(args)))
    return EXIT_OK if v.conclusive else EXIT_INCONCLUSIVE


def cmd_sweep(args):
    s = resolve_set(args)
    if args.k is not None:
        try:
            enumerate_k_partitions(s.n_parties, args.k)
        except PartitionError as exc:
            raise CliError(str(exc)) from exc
    vs = locc.sweep(s, args.k, args.tol, args.rank_tol)
    _emit(args, {"set": s.name, "verdicts": [v.to_dict() for v in vs], "tolerances": _tolerances(args)})
    return EXIT_OK if all(v.conclusive for v in vs) else EXIT_INCONCLUSIVE


def cmd_classify(args):
    s = resolve_set(args)
    if s.n_parties != 3:
        raise CliError(f"classify needs a tripartite set, {s.name} has {s.n_parties} parties")
    c = locc.classify_tripartite(s, args.tol, args.rank_tol)
    _emit(args, dict(c.to_dict(), set=s.name, tolerances=_tolerances(args)))
    return EXIT_INCONCLUSIVE if c.inconclusive else EXIT_OK


def cmd_threshold(args):
    s = resolve_set(args)
    r = locc.threshold_scan(s, args.tol, args.rank_tol)
    _emit(args, dict(r.to_dict(), set=s.name, tolerances=_tolerances(args)))
    return EXIT_INCONCLUSIVE if r.upper_bound_only else EXIT_OK


def cmd_resource(args):
    s = resolve_set(args)
    r = locc.resource_placement_analysis(s, args.tol, args.rank_tol)
    _emit(args, dict(r.to_dict(), set=s.name, tolerances=_tolerances(args)))
    return EXIT_OK if all(v.conclusive for v in r.verdicts) else EXIT_INCONCLUSIVE


def cmd_bound_ent(args):
    args.set = args.set or "six-state"
    s = resolve_set(args)
    u = load_unitary(args.unitary) if args.unitary else None
    try:
        rep = entanglement.distribution_report(s, u=u, seed=args.seed)
    except entanglement.CompletionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMPLETION
    out = dict(rep.to_dict(), set=s.name, seed=args.seed, tolerances=_tolerances(args))
    out["eigenvalues"] = list(rep.eigenvalues)
    _emit(args, out)
    return EXIT_OK if rep.success else EXIT_INCONCLUSIVE


# -- parser ----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=states.ORTHO_TOL, help="orthogonality tolerance")
    common.add_argument("--rank-tol", type=float, default=RANK_RTOL, help="relative SVD rank threshold")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    common.add_argument("--format", choices=["json"], default="json")
    common.add_argument("--m", type=int, help="number of parties (eq3)")
    common.add_argument("--d", type=int, help="local dimension (eq1, eq3)")
    common.add_argument("--dims", type=_dims, help="comma-separated dims (computational)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="prodlocc", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sets", parents=[common], help="list, build, or verify state sets")
    p.add_argument("action", choices=["list", "build", "verify"])
    p.add_argument("target", nargs="?", help="set name (build) or JSON path (verify)")
    p.set_defaults(func=cmd_sets)

    for name, func, doc in [
        ("analyze", cmd_analyze, "verdict for one partition"),
        ("sweep", cmd_sweep, "verdicts for all (k-)partitions"),
        ("classify", cmd_classify, "tripartite distinguishability class"),
        ("threshold", cmd_threshold, "smallest co-located group that suffices"),
        ("resource", cmd_resource, "party pairs whose merging suffices"),
    ]:
        p = sub.add_parser(name, parents=[common], help=doc)
        p.add_argument("set", help="built-in set name or StateSet JSON path")
        if name == "analyze":
            p.add_argument("--partition", "-p", required=True, help='e.g. "1,3|2,4"')
        if name == "sweep":
            p.add_argument("--k", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("bound-ent", parents=[common], help="bound-entanglement distribution report")
    p.add_argument("--set", default="six-state")
    p.add_argument("--unitary", help="JSON file with a 3x3 row-major [[re, im], ...] matrix")
    p.set_defaults(func=cmd_bound_ent)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    if args.tol <= 0 or args.rank_tol <= 0:
        print("error: tolerances must be positive", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.func(args)
    except (CliError, StateSetError, PartitionError, entanglement.EntanglementError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
