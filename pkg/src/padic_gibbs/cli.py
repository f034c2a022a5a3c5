"""Command-line front end: ``padic-gibbs {eval,classify,check-compat,solve,reproduce}``.

Exit codes: 0 success (classify: unique), 1 compatibility failure, 2 bad
arguments or config, 3 domain error, 10 transition, 20 inconclusive.
"""

from __future__ import annotations

import argparse
import ast
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import __version__
from .analysis import DEFAULT_SEED, classify, default_grid, reproduce_paper, solution_ball, thread_count
from .model import BoundaryField, ModelParams, check_compatibility, parse_scalar, ti_system
from .padic import DEFAULT_PRECISION, DomainError, PadicNumber, PadicVec2, PrecisionError, exp_p, is_prime, log_p
from .poly import InconsistencyError
from .solver import SolverInconclusive, digit_solve

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DOMAIN = 3


class UsageError(ValueError):
    pass


# -- expressions -------------------------------------------------------------

_FUNCS = {"exp": exp_p, "log": log_p}


def evaluate(expr: str, prime: int, precision: int) -> PadicNumber | Fraction:
    """Evaluate ``+ - * / **``, integer literals and ``exp``/``log``/``norm``
    over Q_p.  ``norm`` returns an exact rational."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"cannot parse {expr!r}: {exc.msg}") from exc
    return _eval_node(tree.body, prime, precision)


def _eval_node(node: ast.AST, p: int, n: int):
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return PadicNumber.from_rational(node.value, p, n)
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        x = _eval_node(node.operand, p, n)
        return -x if isinstance(node.op, ast.USub) else x
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            k = node.right
            if isinstance(k, ast.UnaryOp) and isinstance(k.op, ast.USub) and isinstance(k.operand, ast.Constant):
                e = -k.operand.value
            elif isinstance(k, ast.Constant):
                e = k.value
            else:
                raise UsageError("exponents must be integer literals")
            if not isinstance(e, int):
                raise UsageError("exponents must be integer literals")
            return _eval_node(node.left, p, n) ** e
        a, b = _eval_node(node.left, p, n), _eval_node(node.right, p, n)
        ops = {ast.Add: lambda: a + b, ast.Sub: lambda: a - b, ast.Mult: lambda: a * b, ast.Div: lambda: a / b}
        for op, fn in ops.items():
            if isinstance(node.op, op):
                return fn()
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1 and not node.keywords:
        name = node.func.id
        arg = _eval_node(node.args[0], p, n)
        if not isinstance(arg, PadicNumber):
            raise UsageError(f"{name}() needs a p-adic argument")
        if name == "norm":
            return arg.norm
        if name in _FUNCS:
            return _FUNCS[name](arg)
        raise UsageError(f"unknown function {name!r}")
    raise UsageError(f"unsupported expression: {ast.dump(node)}")


# -- config ------------------------------------------------------------------


def _read_json(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path} is not valid JSON: {exc}") from exc


def model_config(args: argparse.Namespace) -> dict:
    """The config as given: file contents overlaid with inline flags."""
    data: dict = {}
    if getattr(args, "config", None):
        loaded = _read_json(args.config)
        if not isinstance(loaded, dict):
            raise UsageError("a model config must be a JSON object")
        data.update(loaded)
    for key, flag in (("p", "p"), ("J", "J"), ("K", "K"), ("H", "H")):
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    if args.prec is not None:
        data["precision"] = args.prec
    data.setdefault("precision", DEFAULT_PRECISION)
    data.setdefault("H", 0)
    missing = [k for k in ("p", "J", "K") if k not in data]
    if missing:
        raise UsageError(f"model config lacks {', '.join(missing)}")
    return data


def load_params(config: dict) -> ModelParams:
    p, prec = config.get("p"), config.get("precision")
    if not isinstance(p, int) or not is_prime(p):
        raise UsageError(f"p must be a prime, got {p!r}")
    if not isinstance(prec, int) or prec < 4:
        raise UsageError("precision must be an integer >= 4")
    try:
        return ModelParams.from_json(config)
    except DomainError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from exc


def _scalar_arg(text: str):
    # keep the literal as the user wrote it so reports embed it exactly
    try:
        return int(text)
    except ValueError:
        try:
            Fraction(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from exc
        return text


# -- reports -----------------------------------------------------------------


def _envelope(command: str, config: Any, seed: int | None, body: dict) -> dict:
    return {"command": command, "version": __version__, "config": config, "seed": seed, **body}


def _emit(report: dict, text: str, args: argparse.Namespace):
    rendered = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n" if args.format == "json" else text + "\n"
    if args.out:
        Path(args.out).write_text(rendered)
    else:
        sys.stdout.write(rendered)


def _point_str(point) -> str:
    return "(" + ", ".join(x.digit_string() for x in point) + ")"


# -- commands ----------------------------------------------------------------


def cmd_eval(args: argparse.Namespace) -> int:
    if not is_prime(args.p):
        raise UsageError(f"p must be a prime, got {args.p}")
    prec = args.prec if args.prec is not None else DEFAULT_PRECISION
    value = evaluate(args.expr, args.p, prec)
    if isinstance(value, Fraction):
        body = {"norm": str(value)}
        text = str(value)
    else:
        body = {"value": value.to_json(), "digit_string": value.digit_string()}
        text = value.digit_string()
    _emit(_envelope("eval", {"expr": args.expr, "p": args.p, "precision": prec}, None, body), text, args)
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    config = model_config(args)
    params = load_params(config)
    verdict = classify(params, args.seed)
    report = _envelope("classify", config, args.seed, verdict.to_json())
    lines = [f"verdict: {verdict.tag}", f"solutions: {len(verdict.validated)} validated of {len(verdict.certificates)}"]
    lines += [f"  {_point_str(c.point)}  digits={c.certified_digits}  oracle={c.oracle_check}" for c in verdict.certificates]
    lines += [f"note: {n}" for n in verdict.discrepancy_notes]
    _emit(report, "\n".join(lines), args)
    return verdict.exit_code


def load_field(path: str, prime: int, precision: int) -> BoundaryField:
    data = _read_json(path)
    try:
        if isinstance(data, dict) and "uniform" in data:
            h1, h2 = data["uniform"]
            return BoundaryField.constant(PadicVec2(parse_scalar(h1, prime, precision), parse_scalar(h2, prime, precision)))
        return BoundaryField.from_json(data, prime, precision)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"malformed field file {path}: {exc}") from exc


def cmd_check_compat(args: argparse.Namespace) -> int:
    if args.depth > 2 or args.depth < 1:
        raise UsageError("compatibility depth must be 1 or 2")
    config = model_config(args)
    params = load_params(config)
    field = load_field(args.field, params.prime, params.working_precision)
    try:
        result = check_compatibility(field, params, args.depth)
    except KeyError as exc:
        raise UsageError(f"field file does not cover the tree: {exc}") from exc
    report = _envelope("check-compat", {**config, "field": _read_json(args.field), "depth": args.depth}, None, result.to_json())
    text = f"compatibility at depth {args.depth}: {'pass' if result.passed else 'fail'} ({result.certified_digits} digits)"
    if result.reason:
        text += f"\n{result.reason}"
    _emit(report, text, args)
    return EXIT_OK if result.passed else EXIT_FAIL


def cmd_solve(args: argparse.Namespace) -> int:
    config = model_config(args)
    params = load_params(config)
    one = params.one
    ball = solution_ball(params)
    exact = [(one, one)] if params.H.is_zero() else []
    certs = digit_solve(list(ti_system(params)), ball, params.precision, exact_roots=exact)
    report = _envelope("solve", config, None, {"ball": ball.to_json(), "certificates": [c.to_json() for c in certs]})
    lines = [f"{len(certs)} class(es) in {_point_str(ball.center)} + {params.prime}^{ball.radius} Z_p^2"]
    lines += [f"  {_point_str(c.point)}  digits={c.certified_digits}  cluster={c.cluster}" for c in certs]
    _emit(report, "\n".join(lines), args)
    return EXIT_OK


def _grid(args: argparse.Namespace) -> tuple[Any, list[dict]]:
    if not args.grid:
        return None, default_grid()
    data = _read_json(args.grid)
    if isinstance(data, dict) and "primes" in data:
        return data, default_grid(tuple(int(p) for p in data["primes"]))
    cells = data.get("cells") if isinstance(data, dict) else data
    if not isinstance(cells, list) or not all(isinstance(c, dict) and {"p", "J", "K"} <= c.keys() for c in cells):
        raise UsageError("a grid is a list of {p, J, K, H} cells or {\"primes\": [...]}")
    return data, [{"p": c["p"], "J": c["J"], "K": c["K"], "H": c.get("H", 0)} for c in cells]


def cmd_reproduce(args: argparse.Namespace) -> int:
    given, cells = _grid(args)
    prec = args.prec if args.prec is not None else DEFAULT_PRECISION
    body = reproduce_paper(cells, prec, args.seed, thread_count())
    report = _envelope("reproduce", {"grid": given, "precision": prec}, args.seed, body)
    lines = [f"{k}: " + ", ".join(f"{t} {n}" for t, n in v.items() if n) for k, v in sorted(body["summary"].items())]
    lines.append(f"deviations from the expected pattern: {body['deviations']}")
    _emit(report, "\n".join(lines), args)
    return EXIT_OK


# -- entry point -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prec", type=int, default=None, help="certified digits N (default 16)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "text"), default="json")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("config", nargs="?", help="model config JSON")
    model.add_argument("--p", type=int)
    model.add_argument("--J", type=_scalar_arg)
    model.add_argument("--K", type=_scalar_arg)
    model.add_argument("--H", type=_scalar_arg)

    parser = argparse.ArgumentParser(prog="padic-gibbs", description="p-adic Potts model on the Cayley tree")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate a p-adic expression")
    e.add_argument("expr")
    e.add_argument("--p", type=int, required=True)
    e.set_defaults(run=cmd_eval)

    c = sub.add_parser("classify", parents=[common, model], help="unique / transition / inconclusive")
    c.set_defaults(run=cmd_classify)

    k = sub.add_parser("check-compat", parents=[common, model], help="Kolmogorov compatibility of a field")
    k.add_argument("--field", required=True, help="field JSON: [[vertex, h1, h2], ...] or {\"uniform\": [h1, h2]}")
    k.add_argument("--depth", type=int, default=2)
    k.set_defaults(run=cmd_check_compat)

    s = sub.add_parser("solve", parents=[common, model], help="translation-invariant solutions")
    s.set_defaults(run=cmd_solve)

    r = sub.add_parser("reproduce", parents=[common], help="classify the whole grid")
    r.add_argument("grid", nargs="?", help="grid JSON (default: the built-in grid)")
    r.set_defaults(run=cmd_reproduce)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"padic-gibbs: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"padic-gibbs: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (SolverInconclusive, PrecisionError, InconsistencyError, ZeroDivisionError) as exc:
        print(f"padic-gibbs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 20 if isinstance(exc, SolverInconclusive) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
