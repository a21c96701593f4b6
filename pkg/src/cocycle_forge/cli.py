"""Command-line entry point: ``cocycle-forge <command> ...``.

Exit codes: 0 when every checked property holds, 1 when a property fails
(the report carries a witness), 2 for unreadable input or a violated
input contract.  Rationals travel as ``"p/q"`` strings; JSON output is
key-sorted so identical inputs and seed give identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from typing import Optional

from . import __version__
from .coboundary import (
    ExtensionTower,
    gauge_violation,
    grid_oracle,
    grid_triples,
    solve,
    verify_coboundary,
)
from .cocycle import (
    DEFAULT_MAX_DENOM,
    DEFAULT_SAMPLES,
    FAMILIES,
    check_cocycle2,
    check_offset_laws,
    cocycle_from_json,
    random_cocycle,
)
from .conedomain import ConeDomain
from .entropy import (
    AtomSetFunction,
    DeltaFromAtoms,
    FiniteSpace,
    Partition,
    atom_measure_dependence_witness,
    check_additivity,
    delta_from_json,
    eval_Lm,
    is_measure_multiple,
    random_atom_vectors,
    random_space,
    recover_m,
    shannon_H,
)
from .errors import CocycleForgeError, RejectedInput
from .exactq import QVector
from .report import Report, jsonable, merge

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Anything that should end the run with exit code 2."""


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load(loader, *args):
    try:
        return loader(*args)
    except (CocycleForgeError, ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def _dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def _write(path: Optional[str], data) -> None:
    text = _dumps(data)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _threads() -> int:
    raw = os.environ.get("COCYCLE_FORGE_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"COCYCLE_FORGE_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise InputError("COCYCLE_FORGE_THREADS must be positive")
    return n


def _emit(args, report: Report, extra: Optional[dict] = None, started: float = 0.0) -> int:
    payload = {
        "command": args.command_echo,
        "config": {"seed": args.seed, "samples": args.samples, "max_denom": args.max_denom},
        "report": report.to_json(),
    }
    if extra:
        payload.update(jsonable(extra))
    if args.timing:
        payload["seconds"] = round(time.perf_counter() - started, 3)
    if args.format == "json":
        sys.stdout.write(_dumps(payload))
    else:
        lines = [report.line()]
        for part in report.details.get("parts", []):
            status = "PASS" if part["passed"] else "FAIL"
            lines.append(f"  {status} {part['name']} ({part['checked']} checked)")
        for key, val in sorted((extra or {}).items()):
            lines.append(f"{key}: {json.dumps(jsonable(val), sort_keys=True)}")
        if args.timing:
            lines.append(f"seconds: {payload['seconds']}")
        sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_PASS if report.passed else EXIT_FAIL


def _domain_and_cocycle(args):
    domain = _load(ConeDomain.from_json, _read_json(args.domain))
    f = _load(cocycle_from_json, _read_json(args.cocycle))
    if f.dim != domain.dim:
        raise InputError(f"cocycle dimension {f.dim} does not match domain dimension {domain.dim}")
    return domain, f


# -- commands -------------------------------------------------------------------


def cmd_validate_cocycle(args, started) -> int:
    domain, f = _domain_and_cocycle(args)
    rep = merge("validate-cocycle", [
        check_cocycle2(f, domain, args.samples, args.seed, args.max_denom),
        check_offset_laws(f, domain, min(args.samples, 100), args.seed, max_denom=args.max_denom),
    ])
    return _emit(args, rep, started=started)


def cmd_solve(args, started) -> int:
    domain, f = _domain_and_cocycle(args)
    try:
        tower = solve(domain, f, samples=args.samples, seed=args.seed, max_denom=args.max_denom)
    except RejectedInput as exc:
        rep = exc.report or Report("solve", False, 0, {"reason": str(exc)})
        return _emit(args, rep, started=started)
    rep = verify_coboundary(tower, samples=args.samples, seed=args.seed, max_denom=args.max_denom,
                            nary_samples=min(args.samples, 200))
    if args.out:
        _write(args.out, tower.to_json())
    return _emit(args, rep, {"steps": tower.case_counts()}, started)


def cmd_oracle_compare(args, started) -> int:
    domain, f = _domain_and_cocycle(args)
    if args.q < 1:
        raise InputError("--q must be positive")
    if args.tower:
        tower = _load(ExtensionTower.from_json, _read_json(args.tower), domain, f)
    else:
        try:
            tower = solve(domain, f, samples=args.samples, seed=args.seed, max_denom=args.max_denom)
        except RejectedInput as exc:
            return _emit(args, exc.report or Report("oracle-compare", False), started=started)
    oracle = _load(grid_oracle, domain, f, args.q)
    if not oracle.consistent:
        rep = Report("oracle-compare", False, oracle.n_equations,
                     {"reason": "grid system inconsistent", **oracle.witness})
        return _emit(args, rep, started=started)
    triples = grid_triples(oracle.points)
    try:
        bad = gauge_violation(oracle.values, tower.eval_h, triples)
    except CocycleForgeError as exc:
        bad = {"error": str(exc)}
    rep = Report("oracle-compare", bad is None, len(triples), bad,
                 {"grid_points": len(oracle.points), "kernel_dim": oracle.kernel_dim})
    return _emit(args, rep, started=started)


def _space_and_m(args):
    space = _load(FiniteSpace.from_json, _read_json(args.space))
    m = _load(AtomSetFunction.from_json, space, _read_json(args.m))
    return space, m


def cmd_entropy(args, started) -> int:
    if args.entropy_cmd == "eval":
        space, m = _space_and_m(args)
        A = _load(Partition.from_json, _read_json(args.partition), space.n_atoms)
        extra = {"L_m": eval_Lm(space, m, A), "H": shannon_H(space, A),
                 "prime_basis": [str(p) for p in space.prime_basis]}
        return _emit(args, Report("entropy-eval", True, 1), extra, started)

    if args.entropy_cmd == "additivity":
        space, m = _space_and_m(args)
        A = _load(Partition.from_json, _read_json(args.a), space.n_atoms)
        B = _load(Partition.from_json, _read_json(args.b), space.n_atoms)
        rep = _load(check_additivity, space, m, A, B)
        return _emit(args, rep, started=started)

    if args.entropy_cmd == "recover-m":
        space = _load(FiniteSpace.from_json, _read_json(args.space))
        delta = _load(delta_from_json, space, _read_json(args.delta))
        try:
            result = recover_m(space, delta, samples=min(args.samples, 200), seed=args.seed)
        except RejectedInput as exc:
            return _emit(args, exc.report or Report("recover-m", False, 0, {"reason": str(exc)}),
                         started=started)
        if args.out:
            _write(args.out, result.to_json())
        extra = {"method": result.method, "atoms": result.atom_values()}
        return _emit(args, result.report, extra, started)

    if args.entropy_cmd == "remark2":
        space, m = _space_and_m(args)
        witness = _load(atom_measure_dependence_witness, space, m)
        T = is_measure_multiple(space, m)
        extra = {"measure_multiple": T is not None}
        if witness is not None:
            A, A2 = witness
            extra["witness"] = {"A": A.to_json(), "A'": A2.to_json(),
                                "L_m(A)": eval_Lm(space, m, A), "L_m(A')": eval_Lm(space, m, A2)}
        # Consistency of the two directions is the checked property.
        consistent = not (T is not None and witness is not None)
        rep = Report("remark2", consistent, 1, None if consistent else extra.get("witness"))
        return _emit(args, rep, extra, started)
    raise InputError(f"unknown entropy command {args.entropy_cmd!r}")


def _gen_domain(args, rng: random.Random) -> dict:
    d, k = args.dims, args.generators
    if d < 1 or k < 1:
        raise InputError("--dims and --generators must be positive")
    gens = [QVector.unit(d, i) for i in range(min(d, k))]
    while len(gens) < k:
        # cap = (1, ..., 1) stays positive on every generator, which keeps the cone pointed
        g = QVector([rng.randint(-2, 3) for _ in range(d)])
        if sum(g) > 0 and g not in gens:
            gens.append(g)
    rng.shuffle(gens)
    return ConeDomain(d, tuple(gens), QVector([1] * d)).to_json()


def _gen(args, started) -> int:
    rng = random.Random(args.seed)
    kind = args.kind
    if kind == "domain":
        data = _gen_domain(args, rng)
    elif kind == "cocycle":
        if args.family not in FAMILIES:
            raise InputError(f"--family must be one of {', '.join(FAMILIES)}")
        data = random_cocycle(args.family, args.dims, args.out_dim, rng).to_json()
    elif kind == "space":
        data = _load(random_space, args.atoms, args.denom, rng).to_json()
    elif kind == "delta-fixture":
        if not args.space:
            raise InputError("gen delta-fixture needs --space")
        space = _load(FiniteSpace.from_json, _read_json(args.space))
        data = DeltaFromAtoms(space, random_atom_vectors(space, args.out_dim, rng)).to_json()
    else:
        raise InputError(f"unknown kind {kind!r}")
    _write(args.out, data)
    return EXIT_PASS


# -- argument parsing -------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=_positive, default=DEFAULT_SAMPLES)
    common.add_argument("--max-denom", type=_positive, default=DEFAULT_MAX_DENOM)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")

    parser = argparse.ArgumentParser(prog="cocycle-forge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate-cocycle", parents=[common], help="check symmetry, cocycle and offset laws")
    p.add_argument("domain")
    p.add_argument("cocycle")

    p = sub.add_parser("solve", parents=[common], help="build and verify a potential")
    p.add_argument("domain")
    p.add_argument("cocycle")
    p.add_argument("--out", help="write the extension tower here")

    p = sub.add_parser("oracle-compare", parents=[common], help="compare against the grid oracle")
    p.add_argument("domain")
    p.add_argument("cocycle")
    p.add_argument("--q", type=int, required=True, help="grid denominator")
    p.add_argument("--tower", help="tower file from 'solve --out' (default: solve afresh)")

    p = sub.add_parser("entropy", help="partition-entropy pipelines")
    esub = p.add_subparsers(dest="entropy_cmd", required=True)
    e = esub.add_parser("eval", parents=[common])
    e.add_argument("space")
    e.add_argument("m")
    e.add_argument("partition")
    e = esub.add_parser("additivity", parents=[common])
    e.add_argument("space")
    e.add_argument("m")
    e.add_argument("a")
    e.add_argument("b")
    e = esub.add_parser("recover-m", parents=[common])
    e.add_argument("space")
    e.add_argument("delta")
    e.add_argument("--out", help="write the recovered set function here")
    e = esub.add_parser("remark2", parents=[common])
    e.add_argument("space")
    e.add_argument("m")

    p = sub.add_parser("gen", parents=[common], help="write a seeded random instance")
    p.add_argument("kind", choices=("domain", "cocycle", "space", "delta-fixture"))
    p.add_argument("--dims", type=_positive, default=2)
    p.add_argument("--generators", type=_positive, default=3)
    p.add_argument("--family", default="bilinear")
    p.add_argument("--out-dim", type=_positive, default=1)
    p.add_argument("--atoms", type=_positive, default=4)
    p.add_argument("--denom", type=_positive, default=12)
    p.add_argument("--space", help="space file (delta-fixture)")
    p.add_argument("--out", help="output file (default: stdout)")
    return parser


COMMANDS = {
    "validate-cocycle": cmd_validate_cocycle,
    "solve": cmd_solve,
    "oracle-compare": cmd_oracle_compare,
    "entropy": cmd_entropy,
    "gen": _gen,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_PASS
    argv = sys.argv[1:] if argv is None else list(argv)
    args.command_echo = " ".join(["cocycle-forge", *argv])
    started = time.perf_counter()
    try:
        _threads()
        return COMMANDS[args.command](args, started)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except CocycleForgeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
