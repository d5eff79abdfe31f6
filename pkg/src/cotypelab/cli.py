"""Command-line front end.

Subcommands: analyze, tree, isoperimetry, cotype, transfer, chain, gen.
Exit codes: 0 success / all verdicts pass, 1 an inequality verdict failed
(a finding, not a crash), 2 usage or validation error. All randomized
commands require an explicit seed, and identical command lines produce
byte-identical JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import cotype as ct
from . import separation as sep
from . import spaces as sp
from . import torus as tor
from . import transfer as tr
from .errors import CotypeLabError, MetricValidationError, NoValidSplit
from .generators import generate, parse_generator_spec


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        obj = float(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    return obj


def _emit(payload: dict, as_json: bool, human_lines) -> None:
    if as_json:
        sys.stdout.write(json.dumps(_jsonify(payload), sort_keys=True, indent=2) + "\n")
    else:
        for line in human_lines:
            sys.stdout.write(line + "\n")


def _load_input(args) -> sp.FiniteMetricSpace:
    tolerance = args.tolerance
    if args.gen is not None:
        spec = parse_generator_spec(args.gen)
        space = generate(spec)
        if tolerance != sp.DEFAULT_TOLERANCE:
            space = sp.FiniteMetricSpace(space.labels, space.dist, tolerance)
        return space
    return sp.load_space(args.input, tolerance)


def _add_input_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument("--input", help="space file (.json or .csv)")
    group.add_argument("--gen", help="generator spec, e.g. random-ultrametric=8,seed=7")
    parser.add_argument(
        "--tolerance",
        type=float,
        default=sp.DEFAULT_TOLERANCE,
        help="relative tolerance for metric checks (default 1e-9)",
    )


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--json", action="store_true", help="emit JSON instead of text")
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("COTYPELAB_THREADS", "1")),
        help="worker count; results are identical for any value",
    )


def _check_threads(args) -> None:
    if args.threads < 1:
        raise CotypeLabError("--threads must be >= 1")


# --- analyze ---------------------------------------------------------------


def _cmd_analyze(args) -> int:
    space = _load_input(args)
    k = len(space)
    um = sp.check_ultrametric(space)
    payload: dict = {
        "command": "analyze",
        "points": k,
        "labels": list(space.labels),
        "tolerance": space.tolerance,
        "metric_valid": True,
        "ultrametric": {"ok": um.ok, "witness": list(um.witness) if um.witness else None},
    }
    lines = [
        f"points: {k}",
        f"metric valid: yes (tolerance {space.tolerance!r})",
        f"ultrametric: {'yes' if um.ok else f'no, witness {um.witness}'}",
    ]
    verdicts_ok = True
    if k >= 2:
        exponent = sp.ls_metric_exponent(space)
        mode = "exact" if k <= sep.EXACT_SUBSET_LIMIT else "dendrogram"
        report = sep.separation_constant(space, mode)
        _, distortion = sp.subdominant_ultrametric(space)
        upper = 2.0 * distortion * distortion
        lower_ok = distortion <= report.c_sep * (1.0 + 1e-12)
        upper_ok = report.c_sep <= upper * (1.0 + 1e-12)
        verdicts_ok = lower_ok and upper_ok
        payload.update(
            {
                "ls_exponent": exponent,
                "separation": {
                    "c_sep": report.c_sep,
                    "mode": report.mode,
                    "witness_subset": list(report.witness_subset),
                },
                "subdominant_distortion": distortion,
                "sandwich": {
                    "lower_ok": lower_ok,
                    "upper_ok": upper_ok,
                    "upper_bound": upper,
                },
                "cotype": {
                    "q_infimum": 1.0,
                    "gamma_bound": report.c_sep,
                    "note": (
                        "finite space: for every q > 1 the cotype-q inequality holds "
                        "with constant at most c_sep once m^(q-1) >= n 3^n"
                    ),
                },
            }
        )
        lines += [
            f"direct L^s exponent: {exponent}",
            f"separation constant: {report.c_sep!r} ({report.mode}), witness {report.witness_subset}",
            f"subdominant distortion L: {distortion!r}",
            f"sandwich L <= c_sep <= 2L^2: {'ok' if verdicts_ok else 'VIOLATED'} (2L^2 = {upper!r})",
            "cotype: q_X = 1 with constant c_sep at admissible scalings",
        ]
    else:
        payload.update({"ls_exponent": None, "separation": None, "subdominant_distortion": None})
        lines.append("single point: separation diagnostics skipped")
    _emit(payload, args.json, lines)
    return 0 if verdicts_ok else 1


# --- tree ------------------------------------------------------------------


def _cmd_tree(args) -> int:
    space = _load_input(args)
    if args.C is None:
        mode = "exact" if len(space) <= sep.EXACT_SUBSET_LIMIT else "dendrogram"
        C = sep.separation_constant(space, mode).c_sep if len(space) >= 2 else 1.0
    else:
        C = args.C
    tree = sep.build_tree_structure(space, C)
    report = sep.validate_tree_structure(space, tree)
    if args.format == "dot":
        sys.stdout.write(sep.tree_to_dot(space, tree))
        return 0 if report.ok else 1
    payload = {
        "command": "tree",
        "C": tree.C,
        "valid": report.ok,
        "tree": sep.tree_to_json_obj(tree)["tree"],
    }
    _emit(payload, args.json, [sep.tree_to_json(tree).rstrip("\n")])
    return 0 if report.ok else 1


# --- isoperimetry ----------------------------------------------------------


def _cmd_isoperimetry(args) -> int:
    n, m = args.n, args.m
    if m % 2 != 0 or m < 2:
        raise CotypeLabError("m must be an even integer >= 2")
    total = m**n
    kind = args.kind
    rows = []
    all_pass = True
    if args.exhaustive:
        if total > tor.BRUTE_FORCE_LIMIT:
            raise CotypeLabError(
                f"exhaustive mode needs m^n <= {tor.BRUTE_FORCE_LIMIT}, got {total}"
            )
        mins = {
            size: tor.brute_force_min_boundary(n, m, size, kind)[0]
            for size in range(total // 2 + 1)
        }
    else:
        if args.seed is None:
            raise CotypeLabError("randomized isoperimetry requires --seed")
        if args.samples < 1:
            raise CotypeLabError("--samples must be >= 1")
        mins = {}
        for size in range(total // 2 + 1):
            if size == 0:
                mins[0] = 0
                continue
            best = None
            for i in range(args.samples):
                rng = np.random.default_rng([args.seed, size, i])
                subset = tor.TorusSubset.from_indices(
                    n, m, rng.choice(total, size=size, replace=False)
                )
                count = tor.edge_boundary(subset, kind)
                best = count if best is None else min(best, count)
            mins[size] = best
    for size in range(total // 2 + 1):
        bounds = tor.isoperimetric_bounds(size, n, m)
        reference = bounds.linfty if kind == "R" else bounds.bl
        ok = mins[size] >= reference - 1e-9
        all_pass = all_pass and ok
        rows.append(
            {
                "n": n,
                "m": m,
                "size": size,
                "min_boundary": mins[size],
                "linfty_bound": bounds.linfty,
                "bl_bound": bounds.bl,
                "verdict": "pass" if ok else "FAIL",
            }
        )
    if args.json:
        payload = {
            "command": "isoperimetry",
            "n": n,
            "m": m,
            "kind": kind,
            "mode": "exhaustive" if args.exhaustive else "random",
            "rows": rows,
            "all_pass": all_pass,
        }
        _emit(payload, True, [])
    else:
        sys.stdout.write("n,m,size,min_boundary,linfty_bound,bl_bound,verdict\n")
        for r in rows:
            sys.stdout.write(
                f"{r['n']},{r['m']},{r['size']},{r['min_boundary']},"
                f"{r['linfty_bound']!r},{r['bl_bound']!r},{r['verdict']}\n"
            )
    return 0 if all_pass else 1


# --- cotype ----------------------------------------------------------------


def _cmd_cotype(args) -> int:
    space = _load_input(args)
    q = args.q
    p = args.p if args.p is not None else q
    if args.m is None:
        if p != q:
            raise CotypeLabError("for p != q no scaling function is defined; supply -m")
        m = ct.mn_scaling_function(q, args.n)
    else:
        m = args.m
    if args.strategy in ("random", "local"):
        if args.seed is None:
            raise CotypeLabError(f"strategy {args.strategy!r} requires --seed")
        if args.budget is None:
            raise CotypeLabError(f"strategy {args.strategy!r} requires --budget")
    warning_level = ct.scaling_lower_bound(1.0, q, args.n)
    result = ct.gamma_search(space, p, q, args.n, m, args.strategy, args.budget, args.seed)
    payload: dict = {
        "command": "cotype",
        "params": {"p": p, "q": q, "n": args.n, "m": m},
        "strategy": args.strategy,
        "budget": args.budget,
        "seed": args.seed,
        "evaluations": result.evaluations,
        "best_gamma": result.best_gamma,
        "best_f": [int(v) for v in result.best_f.values],
        "evaluation": {
            "lhs": result.best_eval.lhs,
            "rhs": result.best_eval.rhs,
            "implied_gamma": result.best_eval.implied_gamma,
        },
        "scaling_warning": m < warning_level,
    }
    lines = [
        f"params: p={p} q={q} n={args.n} m={m} strategy={args.strategy}",
        f"evaluations: {result.evaluations}",
        f"best implied gamma: {result.best_gamma!r}",
        f"best f: {list(int(v) for v in result.best_f.values)}",
    ]
    if payload["scaling_warning"]:
        lines.append(f"warning: m = {m} is below the admissible scale n^(1/q) = {warning_level!r}")
    exit_code = 0
    if args.save_f:
        ct.save_function(result.best_f, args.save_f)
        payload["best_f_path"] = args.save_f
        lines.append(f"best f written to {args.save_f}")
    if args.certify:
        cert = ct.sts_certificate(space, result.best_f, q)
        payload["certificate"] = {
            "C": cert.C,
            "m_required": cert.m_required,
            "scaling_ok": cert.scaling_ok,
            "rows": [
                {
                    "level": r.level,
                    "block_size": r.block_size,
                    "level_diam": r.level_diam,
                    "boundary": r.boundary,
                    "lhs_level": r.lhs_level,
                    "rhs_level": r.rhs_level,
                    "counting_ok": r.counting_ok,
                }
                for r in cert.rows
            ],
            "lhs": cert.lhs,
            "rhs": cert.rhs,
            "bound": cert.bound,
            "counting_all_ok": cert.counting_all_ok,
            "lhs_est_ok": cert.lhs_est_ok,
            "rhs_est_ok": cert.rhs_est_ok,
            "overall_ok": cert.overall_ok,
        }
        lines.append(ct.certificate_table(cert).rstrip("\n"))
        if not (cert.overall_ok and cert.counting_all_ok and cert.scaling_ok):
            exit_code = 1
    _emit(payload, args.json, lines)
    return exit_code


# --- transfer ---------------------------------------------------------------


def _cmd_transfer(args) -> int:
    pmap = tr.load_map(args.map, args.tolerance)
    declared = {}
    if args.L is not None:
        declared["L"] = args.L
    if args.c is not None:
        declared["c"] = args.c
    if args.K is not None:
        declared["K"] = args.K
    report = tr.check_map(pmap, args.kind, declared or None, alpha=args.alpha)
    payload: dict = {
        "command": "transfer",
        "kind": args.kind,
        "check": {
            "best": report.best,
            "declared": report.declared,
            "passed": report.passed,
            "witness": {k: list(v) if isinstance(v, tuple) else v for k, v in report.witness.items()},
        },
    }
    lines = [
        f"kind: {args.kind}",
        f"fitted constants: {report.best}",
        f"declared: {report.declared or '(none)'} -> "
        f"{'n/a' if report.passed is None else ('pass' if report.passed else 'FAIL')}",
    ]
    exit_code = 0 if report.passed in (None, True) else 1
    if args.verify:
        for name in ("gamma", "p", "q", "n", "m", "samples", "seed"):
            if getattr(args, name) is None:
                raise CotypeLabError(f"--verify requires --{name}")
        params = ct.CotypeParams(args.p, args.q, args.n, args.m, args.gamma)
        if args.kind == "rough_isometry":
            Y, X = pmap.target, pmap.source
        else:
            Y, X = pmap.source, pmap.target
        verify = tr.empirical_transfer_verify(
            Y, X, pmap, params, args.kind, args.samples, args.seed, alpha=args.alpha
        )
        payload["verify"] = {
            "samples": verify.samples,
            "constants": verify.constants,
            "base_max_violation": verify.base_max_violation,
            "transferred_max_violation": verify.transferred_max_violation,
            "all_hold": verify.all_hold,
        }
        lines += [
            f"verify: {verify.samples} samples, constants {verify.constants}",
            f"base max violation: {verify.base_max_violation!r}",
            f"transferred max violation: {verify.transferred_max_violation!r}",
            f"all hold: {'yes' if verify.all_hold else 'NO'}",
        ]
        if not verify.all_hold:
            exit_code = 1
    _emit(payload, args.json, lines)
    return exit_code


# --- chain -------------------------------------------------------------------


def _cmd_chain(args) -> int:
    space = _load_input(args)
    chain = sp.find_chain(space, args.a, args.b, args.epsilon)
    payload = {
        "command": "chain",
        "a": args.a,
        "b": args.b,
        "epsilon": args.epsilon,
        "found": chain is not None,
        "chain": list(chain.points) if chain else None,
    }
    lines = [
        f"chain from {args.a} to {args.b} below {args.epsilon!r}: "
        + (str(list(chain.points)) if chain else "none")
    ]
    _emit(payload, args.json, lines)
    return 0


# --- gen ---------------------------------------------------------------------


def _cmd_gen(args) -> int:
    spec = parse_generator_spec(args.gen)
    space = generate(spec)
    sp.save_space(space, args.output)
    payload = {
        "command": "gen",
        "kind": spec.kind,
        "points": len(space),
        "output": args.output,
    }
    _emit(payload, args.json, [f"wrote {len(space)}-point space to {args.output}"])
    return 0


# --- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cotypelab",
        description="Metric cotype inequalities, separated tree structures, and "
        "torus isoperimetry on finite metric spaces.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p_an = subs.add_parser("analyze", help="metric / ultrametric / separation report")
    _add_input_args(p_an)
    _add_common(p_an)
    p_an.set_defaults(func=_cmd_analyze)

    p_tree = subs.add_parser("tree", help="emit the separated tree at a given C")
    _add_input_args(p_tree)
    _add_common(p_tree)
    p_tree.add_argument("-C", type=float, default=None, help="separation bound (default: c_sep)")
    p_tree.add_argument("--format", choices=("json", "dot"), default="json")
    p_tree.set_defaults(func=_cmd_tree)

    p_iso = subs.add_parser("isoperimetry", help="minimum edge boundaries vs bounds")
    p_iso.add_argument("-n", type=int, required=True)
    p_iso.add_argument("-m", type=int, required=True)
    p_iso.add_argument("--kind", choices=("R", "T"), default="R")
    p_iso.add_argument("--exhaustive", action="store_true")
    p_iso.add_argument("--samples", type=int, default=100)
    p_iso.add_argument("--seed", type=int, default=None)
    _add_common(p_iso)
    p_iso.set_defaults(func=_cmd_isoperimetry)

    p_cot = subs.add_parser("cotype", help="search the worst implied constant")
    _add_input_args(p_cot)
    _add_common(p_cot)
    p_cot.add_argument("-p", type=float, default=None, help="first exponent (default: q)")
    p_cot.add_argument("-q", type=float, required=True)
    p_cot.add_argument("-n", type=int, required=True)
    p_cot.add_argument("-m", type=int, default=None, help="even scale (default: scaling function)")
    p_cot.add_argument("--strategy", choices=("exhaustive", "random", "local"), default="random")
    p_cot.add_argument("--budget", type=int, default=None)
    p_cot.add_argument("--seed", type=int, default=None)
    p_cot.add_argument("--certify", action="store_true", help="emit the level certificate")
    p_cot.add_argument("--save-f", default=None, help="write the best function to a JSON file")
    p_cot.set_defaults(func=_cmd_cotype)

    p_tr = subs.add_parser("transfer", help="check a point map / verify transferred bounds")
    p_tr.add_argument("--map", required=True, help="map file (JSON)")
    p_tr.add_argument(
        "--kind", choices=tr.MAP_KINDS, required=True
    )
    p_tr.add_argument("--alpha", type=float, default=None)
    p_tr.add_argument("--L", type=float, default=None)
    p_tr.add_argument("--c", type=float, default=None)
    p_tr.add_argument("--K", type=float, default=None)
    p_tr.add_argument("--verify", action="store_true")
    p_tr.add_argument("--gamma", type=float, default=None)
    p_tr.add_argument("-p", type=float, default=None)
    p_tr.add_argument("-q", type=float, default=None)
    p_tr.add_argument("-n", type=int, default=None)
    p_tr.add_argument("-m", type=int, default=None)
    p_tr.add_argument("--samples", type=int, default=None)
    p_tr.add_argument("--seed", type=int, default=None)
    p_tr.add_argument(
        "--tolerance", type=float, default=sp.DEFAULT_TOLERANCE, help="metric check tolerance"
    )
    _add_common(p_tr)
    p_tr.set_defaults(func=_cmd_transfer)

    p_ch = subs.add_parser("chain", help="find a strict epsilon-chain between two points")
    _add_input_args(p_ch)
    _add_common(p_ch)
    p_ch.add_argument("-a", type=int, required=True)
    p_ch.add_argument("-b", type=int, required=True)
    p_ch.add_argument("--epsilon", type=float, required=True)
    p_ch.set_defaults(func=_cmd_chain)

    p_gen = subs.add_parser("gen", help="write a generated space to a file")
    p_gen.add_argument("--gen", required=True, help="generator spec")
    p_gen.add_argument("--output", required=True, help="target path (.json or .csv)")
    _add_common(p_gen)
    p_gen.set_defaults(func=_cmd_gen)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_threads(args)
        return args.func(args)
    except MetricValidationError as err:
        sys.stderr.write("invalid metric:\n")
        for violation in err.violations:
            sys.stderr.write(f"  {violation}\n")
        return 2
    except NoValidSplit as err:
        sys.stderr.write(f"{err}\n")
        return 1
    except CotypeLabError as err:
        sys.stderr.write(f"error: {err}\n")
        return 2
    except FileNotFoundError as err:
        sys.stderr.write(f"error: {err}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
