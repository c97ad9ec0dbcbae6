"""Command line front end.

Exit codes: 0 success, 1 compare found differences, 2 validation or
usage error, 3 model-level failure (infeasible rate, field too small,
rank deficiency, size limits).
"""

import argparse
import json
import sys

import numpy as np

from .errors import (FieldTooSmallError, InfeasibleRateError, JnscError,
                     NetworkFormatError, RankDeficientError,
                     SingularMatrixError, TooLargeError, ValidationError)
from .harness import (ExperimentConfig, compare_runs, load_config, run,
                      write_csv)
from .matio import load_matrix, save_matrix
from .netcode import (build_broadcast_code, butterfly, load_network, maxflow,
                      random_dag)
from .sparsify import sparsify

_VALIDATION_EXIT = 2
_MODEL_EXIT = 3
_MODEL_ERRORS = (FieldTooSmallError, InfeasibleRateError, RankDeficientError,
                 SingularMatrixError, TooLargeError)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jnsc",
        description="joint network and source coding experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sparsify", help="sparsify a binary matrix from a file")
    sp.add_argument("--in", dest="infile", required=True, metavar="MATRIX")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--passes", type=int, default=5)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out", required=True, metavar="MATRIX")
    sp.add_argument("--transform", metavar="MATRIX",
                    help="also write the invertible transform")

    rd = sub.add_parser("rd-bench", help="randomized encoder distortion sweep")
    rd.add_argument("--n", type=int, required=True)
    rd.add_argument("--rate", type=float, required=True)
    rd.add_argument("--draws", default="1,2,4,8,16",
                    help="comma list of draw counts")
    rd.add_argument("--instances", type=int, default=50)
    rd.add_argument("--seed", type=int, required=True)
    rd.add_argument("--out", metavar="CSV")

    nc = sub.add_parser("netcode", help="build a broadcast network code")
    src = nc.add_mutually_exclusive_group(required=True)
    src.add_argument("--network", metavar="FILE", help="network text file")
    src.add_argument("--butterfly", action="store_true")
    src.add_argument("--random", type=int, metavar="NODES",
                     help="random layered DAG with this many nodes")
    nc.add_argument("--m", type=int, required=True, help="field extension degree")
    nc.add_argument("--w", type=int, help="source symbols per use "
                                          "(default: min terminal maxflow)")
    nc.add_argument("--layers", type=int, default=4)
    nc.add_argument("--edge-density", type=float, default=0.5)
    nc.add_argument("--terminals", type=int, default=2)
    nc.add_argument("--seed", type=int, required=True)
    nc.add_argument("--out", required=True, metavar="JSON")

    ber = sub.add_parser("ber", help="bit error rate sweep of syndrome decoding")
    what = ber.add_mutually_exclusive_group(required=True)
    what.add_argument("--H", dest="matrix", metavar="FILE",
                      help="parity-check matrix file")
    what.add_argument("--structured", type=int, metavar="N",
                      help="regular parity-check at this blocklength")
    what.add_argument("--design", metavar="CONFIG",
                      help="joint design config file")
    ber.add_argument("--p-list", required=True, help="comma list of crossovers")
    ber.add_argument("--bits", type=float, required=True,
                     help="simulated bits per point (0 for a header-only CSV)")
    ber.add_argument("--max-iter", type=int, default=50)
    ber.add_argument("--seed", type=int, required=True)
    ber.add_argument("--out", required=True, metavar="CSV")
    ber.add_argument("--svg", metavar="SVG")

    rn = sub.add_parser("run", help="run an experiment config file")
    rn.add_argument("config", metavar="CONFIG")
    rn.add_argument("--out", metavar="CSV", help="override the config csv path")
    rn.add_argument("--svg", metavar="SVG", help="override the config svg path")

    cp = sub.add_parser("compare", help="diff two experiment CSVs")
    cp.add_argument("a", metavar="A.CSV")
    cp.add_argument("b", metavar="B.CSV")
    cp.add_argument("--tol", type=float, default=1e-9)
    return parser


def _cmd_sparsify(args) -> int:
    A = load_matrix(args.infile)
    result = sparsify(A, args.trials, args.passes, args.seed)
    save_matrix(result.sparsified, args.out)
    if args.transform:
        save_matrix(result.transform, args.transform)
    print(f"density {A.density:.6f} -> {result.density:.6f} "
          f"({A.rows}x{A.cols}, {result.trials_used} trials)")
    return 0


def _cmd_rd_bench(args) -> int:
    config = ExperimentConfig(kind="rd_gap", seed=args.seed,
                              params={"n": args.n, "rate": args.rate,
                                      "draws_list": args.draws,
                                      "instances": args.instances})
    rows = run(config, csv_path=args.out)
    for row in rows:
        print(f"draws {row['draws']:>4}: mean distortion "
              f"{row['mean_distortion']:.6f} (bound {row['dr_bound']:.6f})")
    return 0


def _hex_list(values) -> list:
    return [format(int(v), "#x") for v in np.asarray(values).reshape(-1)]


def _matrix_rows(mat) -> list:
    return ["".join(str(int(b)) for b in row) for row in mat.to_dense()]


def _cmd_netcode(args) -> int:
    gen = np.random.default_rng(args.seed)
    if args.butterfly:
        net = butterfly()
    elif args.network:
        net = load_network(args.network)
    else:
        net = random_dag(args.random, args.layers, args.edge_density,
                         args.terminals, gen)
    w = args.w if args.w is not None else min(
        maxflow(net, t) for t in net.terminals)
    code = build_broadcast_code(net, w, args.m, gen)
    payload = {
        "nodes": list(net.nodes),
        "edges": [list(e) for e in net.edges],
        "source": net.source,
        "terminals": list(net.terminals),
        "m": code.m,
        "w": code.w,
        "maxflows": {str(t): f for t, f in code.maxflows.items()},
        "local_coeffs": [_hex_list(c) for c in code.local_coeffs],
        "global_vectors": {str(e): _hex_list(code.global_vectors.entries[:, e])
                           for e in range(len(net.edges))},
        "selected_edges": {str(t): [int(net.in_edges(t)[i]) for i in sel]
                           for t, sel in code.selected.items()},
        "transfer": {str(t): _matrix_rows(B) for t, B in code.transfer.items()},
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    for t in net.terminals:
        B = code.transfer[t]
        print(f"terminal {t}: maxflow {code.maxflows[t]}, "
              f"transfer {B.rows}x{B.cols} rank {B.rank()}")
    return 0


def _cmd_ber(args) -> int:
    params = {"p_list": args.p_list, "bits": args.bits,
              "max_iter": args.max_iter}
    if args.matrix is not None:
        params["matrix"] = args.matrix
    elif args.structured is not None:
        params["structured"] = args.structured
    else:
        params["design"] = args.design
    config = ExperimentConfig(kind="ber_sweep", seed=args.seed, params=params)
    rows = run(config, csv_path=None, svg_path=args.svg)
    write_csv("ber_sweep", rows, args.out)
    for row in rows:
        print(f"p {row['p']:g}: ber {row['ber']:.3e} "
              f"({row['bit_errors']} errors in {row['bits']} bits, "
              f"converged {row['converged_fraction']:.3f})")
    if not rows:
        print("no bits requested; wrote header only")
    return 0


def _cmd_run(args) -> int:
    config = load_config(args.config)
    rows = run(config, csv_path=args.out, svg_path=args.svg)
    target = args.out or config.csv_path
    print(f"{config.kind}: {len(rows)} rows" +
          (f" -> {target}" if target else ""))
    return 0


def _cmd_compare(args) -> int:
    report = compare_runs(args.a, args.b, tol=args.tol)
    print(report.summary(args.tol))
    return 0 if report.within(args.tol) else 1


_COMMANDS = {
    "sparsify": _cmd_sparsify,
    "rd-bench": _cmd_rd_bench,
    "netcode": _cmd_netcode,
    "ber": _cmd_ber,
    "run": _cmd_run,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValidationError, NetworkFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _VALIDATION_EXIT
    except _MODEL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _MODEL_EXIT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _VALIDATION_EXIT
    except JnscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _MODEL_EXIT
