"""Command-line entry point: ``cubiclab <command> [options]``.

Exit codes: 0 success, 1 failed verification or exceeded budget, 2 usage error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .poly import CubicPolynomial, PolynomialError, cubic_part, parse_polynomial
from .report import emit_report, ordered_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

TOLERANCES = {
    "orthogonality": 1e-6,
    "poisson": 1e-3,
    "mult": 1e-8,
    "delta": 10.0,
    "slice": 1e-9,
}


class UsageError(ValueError):
    pass


class VerificationFailed(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    poly: CubicPolynomial | None = None
    P: list[float] = field(default_factory=list)
    weight: str = "w1"
    out: str | None = None
    fmt: str = "csv"
    threads: int = 1
    seed: int = 0
    extra: dict[str, str] = field(default_factory=dict)

    def get(self, key: str, default: Any = None, cast=str):
        if key not in self.extra:
            return default
        try:
            return cast(self.extra[key])
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {self.extra[key]!r}") from exc


# ---------------------------------------------------------------- parsing helpers


def _int_list(text: str) -> list[int]:
    """``5``, ``5,7,9`` or ``5-40``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if re.fullmatch(r"-?\d+", part):
            out.append(int(part))
        elif m := re.fullmatch(r"(\d+)-(\d+)", part):
            out.extend(range(int(m[1]), int(m[2]) + 1))
        else:
            raise UsageError(f"cannot read integer list {text!r}")
    return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot read number list {text!r}") from exc


def load_polynomial(text: str, n: int | None = None) -> CubicPolynomial:
    """Polynomial from a string or ``@file``; n defaults to the largest variable index."""
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read().strip()
    idx = [int(k) for k in re.findall(r"x(\d+)", text)]
    if n is None:
        if not idx:
            raise UsageError("cannot infer the number of variables; pass --n")
        n = max(idx)
    return parse_polynomial(text, n)


def read_config(items: Sequence[str]) -> dict[str, str]:
    """key=value pairs, or @file holding one pair per line (# comments allowed)."""
    out: dict[str, str] = {}
    for item in items:
        lines = [item]
        if item.startswith("@"):
            with open(item[1:], encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        for line in lines:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"config entry {line!r} is not key=value")
            k, v = line.split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _common_options(with_n: bool = True) -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--poly", help="polynomial string or @file")
    if with_n:
        common.add_argument("--n", type=int, help="number of variables (default: inferred)")
    common.add_argument("--P", help="height/box parameter, or a comma list")
    common.add_argument("--Q", type=int)
    common.add_argument("--q", type=int)
    common.add_argument("--u", type=int, default=0)
    common.add_argument("--v", help="comma-separated integer vector")
    common.add_argument("--z", type=float, default=0.0)
    common.add_argument("--weight", default="w1")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--config", action="append", default=[], help="key=value or @file")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    ap = argparse.ArgumentParser(prog="cubiclab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", parents=[common], help="projective or weighted zero counts")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--projective", action="store_true")
    mode.add_argument("--weighted", action="store_true")

    p = sub.add_parser("expsum", parents=[common], help="S_u(q; z), the complete sum S_u(q; v), or T(alpha)")
    p.add_argument("mode", nargs="?", choices=("arc", "complete", "weyl"), default="arc")
    p.add_argument("--alpha", help="a/q+z, a/q or a decimal (weyl mode)")

    p = sub.add_parser("verify", parents=[common], help="run an identity check")
    p.add_argument("check", choices=("orthogonality", "poisson", "mult", "weyl-linearization", "delta", "slice"))
    p.add_argument("--m", help="slicing vector (comma-separated)")

    p = sub.add_parser("report", parents=[common], help="bound ratio tables")
    p.add_argument("kind", choices=("prop1", "weyl-bound", "prime-bounds"))
    p.add_argument("--grid-spec", help="comma-separated key=value overrides, e.g. q_max=8,z_points=4")

    p = sub.add_parser("qdecomp", parents=[common], help="q = b1 b2^2 c^2 d and dyadic censuses")
    p.add_argument("action", nargs="?", choices=("census",), help="census: same as --census <--max>")
    p.add_argument("--range", type=int, dest="qrange", help="check every q up to this bound")
    p.add_argument("--census", type=int, help="max census ratio over boxes with 2R <= this bound")
    p.add_argument("--max", type=int, dest="census_max")

    p = sub.add_parser("certify", parents=[_common_options(with_n=False)], help="exact LP certificates for the exponent cases")
    p.add_argument("--case", default="all")
    p.add_argument("--n", dest="n_range", default="5", help="an integer, a list 5,6 or a range 5-40")
    p.add_argument("--no-rho-cap", action="store_true", help="drop the constraint R <= P^{3/2}")

    p = sub.add_parser("slice", parents=[common], help="one hyperplane slice")
    p.add_argument("--m", help="slicing vector (comma-separated); searched when omitted")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--verify", action="store_true")

    sub.add_parser("growth", parents=[common], help="projective counts over P and a log-log fit")
    return ap


# ---------------------------------------------------------------- commands


def _need_poly(cfg: ExperimentConfig) -> CubicPolynomial:
    if cfg.poly is None:
        raise UsageError("--poly is required")
    return cfg.poly


def _need_P(cfg: ExperimentConfig, default: float | None = None) -> list[float]:
    P = cfg.P or ([default] if default is not None else [])
    if not P:
        raise UsageError("--P is required")
    if any(p < 1 for p in P):
        raise UsageError("P must be >= 1")
    return P


def _weight(cfg: ExperimentConfig, n: int):
    from .weights import weight_by_name

    try:
        return weight_by_name(cfg.weight, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_count(args, cfg: ExperimentConfig) -> list[dict]:
    from .counting import count_affine_weighted, count_projective

    g = _need_poly(cfg)
    Ps = _need_P(cfg)
    projective = args.projective or (not args.weighted and g.is_homogeneous_cubic())

    def one(P):
        t0 = time.perf_counter()
        if projective:
            if P != int(P):
                raise UsageError("projective counts need an integer P")
            val: Any = count_projective(g, int(P))
        else:
            val = count_affine_weighted(g, _weight(cfg, g.n), P)
        return {"P": P, "count": val, "seconds": round(time.perf_counter() - t0, 3)}

    return ordered_map(one, Ps, cfg.threads)


def _parse_alpha(text: str) -> tuple[int, int, float]:
    """``a/q+z``, ``a/q`` or a decimal, as (a, q, z)."""
    m = re.fullmatch(r"\s*(-?\d+)/(\d+)\s*(?:([+-])\s*([0-9.eE+-]+))?\s*", text)
    try:
        if m:
            z = float(m[4]) * (-1 if m[3] == "-" else 1) if m[4] else 0.0
            return int(m[1]), int(m[2]), z
        return 0, 1, float(text)
    except ValueError as exc:
        raise UsageError(f"cannot read alpha {text!r}") from exc


def cmd_expsum(args, cfg: ExperimentConfig) -> list[dict]:
    from .archimedean import minor_arc_sum, weyl_sum_at
    from .complete_sums import complete_S

    g = _need_poly(cfg)
    if args.mode == "weyl":
        if not args.alpha:
            raise UsageError("weyl mode needs --alpha")
        a, q, z = _parse_alpha(args.alpha)
        if q < 1 or math.gcd(a, q) != 1:
            raise UsageError("alpha needs a reduced fraction a/q")
        rows = []
        for P in _need_P(cfg):
            val = weyl_sum_at(a, q, z, g, _weight(cfg, g.n), P)
            rows.append({"a": a, "q": q, "z": z, "P": P, "re": val.real, "im": val.imag, "abs": abs(val)})
        return rows
    if args.q is None or args.q < 1:
        raise UsageError("--q >= 1 is required")
    if args.mode == "complete" or args.v is not None:
        v = _int_list(args.v) if args.v is not None else [0] * g.n
        if len(v) != g.n:
            raise UsageError("--v must have n entries")
        val = complete_S(args.u, args.q, v, g)
        return [{"q": args.q, "u": args.u, "v": v, "re": val.real, "im": val.imag, "abs": abs(val)}]
    rows = []
    for P in _need_P(cfg):
        val = minor_arc_sum(args.u, args.q, args.z, g, _weight(cfg, g.n), P)
        rows.append({"q": args.q, "u": args.u, "z": args.z, "P": P, "re": val.real, "im": val.imag, "abs": abs(val)})
    return rows


def cmd_verify(args, cfg: ExperimentConfig) -> list[dict]:
    check = args.check
    rows: list[dict] = []
    ok = True
    if check == "weyl-linearization":
        from .weyl import difference_form

        g = _need_poly(cfg)
        rng = np.random.default_rng(cfg.seed)
        trials = cfg.get("trials", 1000, int)
        bound = cfg.get("box", 20, int)
        failures = 0
        for _ in range(trials):
            w, x, y = (rng.integers(-bound, bound + 1, size=g.n).tolist() for _ in range(3))
            try:
                difference_form(g, w, x, y)
            except ArithmeticError:
                failures += 1
        ok = failures == 0
        rows.append({"check": check, "trials": trials, "failures": failures})
    elif check == "mult":
        from .complete_sums import multiplicativity_sides

        g = _need_poly(cfg)
        r, s = cfg.get("r", None, int), cfg.get("s", None, int)
        if r is None or s is None:
            raise UsageError("mult needs --config r=<int> --config s=<int>")
        v = _int_list(args.v) if args.v else [0] * g.n
        lhs, rhs = multiplicativity_sides(r, s, args.u, v, g)
        rel = abs(lhs - rhs) / max(1.0, abs(lhs))
        ok = rel <= TOLERANCES["mult"]
        rows.append({"check": check, "r": r, "s": s, "u": args.u, "v": v, "residual": rel})
    elif check == "orthogonality":
        from .archimedean import orthogonality_count
        from .counting import count_affine_weighted

        g = _need_poly(cfg)
        w = _weight(cfg, g.n)
        for P in _need_P(cfg):
            a, b = orthogonality_count(g, w, P), count_affine_weighted(g, w, P)
            res = abs(a - b)
            ok &= res <= TOLERANCES["orthogonality"]
            rows.append({"check": check, "P": P, "orthogonality": a, "count": b, "residual": res})
    elif check == "poisson":
        from .archimedean import poisson_report

        g = _need_poly(cfg)
        w = _weight(cfg, g.n)
        if args.q is None:
            raise UsageError("--q is required")
        T = cfg.get("truncation", None, int)
        for P in _need_P(cfg):
            rep = poisson_report(args.u, args.q, args.z, g, w, P, T)
            tol = TOLERANCES["poisson"] * (1 + abs(rep.lhs))
            ok &= rep.residual <= tol
            rows.append({"check": check, "q": args.q, "u": args.u, "z": args.z, "P": P,
                         "lhs": rep.lhs, "rhs": rep.rhs, "residual": rep.residual, "tolerance": tol})
    elif check == "delta":
        from .delta import delta_check

        g = _need_poly(cfg)
        w = _weight(cfg, g.n)
        if args.Q is None or args.Q < 1:
            raise UsageError("--Q >= 1 is required")
        for P in _need_P(cfg):
            d = delta_check(g, w, P, args.Q)
            ok &= d.constant <= TOLERANCES["delta"]
            rows.append({"check": check, "P": P, "Q": args.Q, "N": d.N, "main": d.main, "E": d.E, "constant": d.constant})
    elif check == "slice":
        from .slicer import verify_slice_identity

        g = _need_poly(cfg)
        w = _weight(cfg, g.n)
        m = _int_list(args.m) if args.m else [1] + [0] * (g.n - 1)
        for P in _need_P(cfg):
            res = verify_slice_identity(g, w, P, m)
            ok &= res <= TOLERANCES["slice"]
            rows.append({"check": check, "P": P, "m": m, "residual": res})
    if not ok:
        raise VerificationFailed(rows)
    return rows


def cmd_report(args, cfg: ExperimentConfig) -> list[dict]:
    g = _need_poly(cfg)
    if args.grid_spec:
        cfg.extra.update(read_config(args.grid_spec.split(",")))
    if args.kind == "prime-bounds":
        from .complete_sums import prime_bound_report

        limit = cfg.get("prime_limit", 31, int)
        rep = prime_bound_report(g, limit, u_choice=args.u or 1, samples=cfg.get("samples", 50, int), seed=cfg.seed)
        return [{k: v for k, v in rep.as_dict().items() if k != "rows"}]
    w = _weight(cfg, g.n)
    if args.kind == "prop1":
        from .delta import proposition1_report

        from .delta import default_grid

        rows = []
        for P in _need_P(cfg):
            grid = default_grid(P, cfg.get("q_max", 8, int), (0, 1), cfg.get("z_points", 4, int))
            rows += [dict(P=P, **r.as_dict()) for r in proposition1_report(g, w, P, grid=grid)]
        return rows
    from .weyl import weyl_bound_report

    return [
        {"P": r.P, "q": r.q, "u": r.u, "z": r.z, "lhs": r.lhs, "rhs": r.rhs, "ratio": r.ratio}
        for r in weyl_bound_report(g, w, _need_P(cfg), q_max=cfg.get("q_max", 12, int))
    ]


def cmd_qdecomp(args, cfg: ExperimentConfig) -> list[dict] | str:
    from .qdecomp import census_max_ratio, decompose, decompose_range

    if args.action == "census" and args.census is None:
        args.census = args.census_max if args.census_max is not None else cfg.get("max", None, int)
        if args.census is None:
            raise UsageError("census needs --max")
    if args.census is not None:
        if args.census < 2:
            raise UsageError("--census needs a bound >= 2")
        ratio, box = census_max_ratio(args.census)
        return [{"max_q": args.census, "max_ratio": ratio, "box": [str(x) for x in box]}]
    if args.qrange is not None:
        if args.qrange < 1:
            raise UsageError("--range needs a bound >= 1")
        bad = [D.q for D in decompose_range(args.qrange) if D.check()]
        if bad:
            raise VerificationFailed([{"limit": args.qrange, "failures": len(bad), "first": bad[:10]}])
        return [{"limit": args.qrange, "failures": 0}]
    if args.q is None or args.q < 1:
        raise UsageError("--q >= 1 is required")
    D = decompose(args.q)
    if cfg.fmt == "json" or cfg.out:
        return [dict(zip(("q", "b1", "b2", "c", "d", "d0"), D.as_row()))]
    return ",".join(map(str, D.as_row()))


def cmd_certify(args, cfg: ExperimentConfig) -> list[dict]:
    from .exponents import catalog, certify_case, get_case

    try:
        cases = catalog() if args.case == "all" else [get_case(args.case)]
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    ns = _int_list(args.n_range)
    if any(n < 4 or n > 60 for n in ns):
        raise UsageError("n must lie in [4, 60]")
    tasks = [(c, n) for c in cases for n in ns if c.applies(n) or args.case != "all"]

    def one(task):
        c, n = task
        cert = certify_case(c, n, rho_cap=not args.no_rho_cap, force=True)
        return dict(cert.as_dict(), anchor=c.bound, applies=c.applies(n))

    rows = ordered_map(one, tasks, cfg.threads)
    if not all(r["certified"] for r in rows):
        raise VerificationFailed(rows)
    return rows


def cmd_slice(args, cfg: ExperimentConfig) -> list[dict]:
    from .slicer import find_slicing_vector, slice_polynomial, verify_slice_identity

    g = _need_poly(cfg)
    if args.m:
        m = _int_list(args.m)
        search = None
    else:
        sv = find_slicing_vector(cubic_part(g), cfg.get("M", 3, int))
        m = list(sv.m)
        search = {"s_before": sv.s_before, "s_after": sv.s_after, "tried": sv.tried}
    if len(m) != g.n:
        raise UsageError("--m must have n entries")
    P = _need_P(cfg, default=1.0)[0]
    data = slice_polynomial(g, _weight(cfg, g.n), m, args.k, P)
    row: dict[str, Any] = {"P": P, **(data.as_dict() if data else {"m": m, "k": args.k, "empty": True})}
    if search:
        row.update(search)
    if args.verify:
        res = verify_slice_identity(g, _weight(cfg, g.n), P, m)
        row["residual"] = res
        if res > TOLERANCES["slice"]:
            raise VerificationFailed([row])
    return [row]


def cmd_growth(args, cfg: ExperimentConfig) -> list[dict]:
    from .counting import count_projective, fit_growth

    g = cfg.poly or CubicPolynomial.fermat(4)
    Ps = [int(p) for p in _need_P(cfg, default=None)] if cfg.P else [2**k for k in range(4, 10)]
    counts = ordered_map(lambda P: count_projective(g, P), Ps, cfg.threads)
    fit = fit_growth(list(zip(Ps, counts)))
    rows = [{"P": P, "count": c} for P, c in zip(Ps, counts)]
    rows.append({"P": "fit", "count": None, "exponent": fit.exponent, "intercept": fit.intercept, "residual": fit.residual})
    return rows


COMMANDS = {
    "count": cmd_count,
    "expsum": cmd_expsum,
    "verify": cmd_verify,
    "report": cmd_report,
    "qdecomp": cmd_qdecomp,
    "certify": cmd_certify,
    "slice": cmd_slice,
    "growth": cmd_growth,
}


def _config_from(args) -> ExperimentConfig:
    extra = read_config(args.config)
    poly_text = args.poly or extra.get("poly")
    n_arg = args.n if args.command != "certify" else None
    n = n_arg if n_arg is not None else (int(extra["n"]) if "n" in extra else None)
    poly = load_polynomial(poly_text, n) if poly_text else None
    P_text = args.P if args.P is not None else extra.get("P")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    return ExperimentConfig(
        command=args.command,
        poly=poly,
        P=_float_list(P_text) if P_text else [],
        weight=args.weight,
        out=args.out,
        fmt=args.fmt,
        threads=args.threads,
        seed=args.seed,
        extra=extra,
    )


def run(argv: Sequence[str] | None = None) -> int:
    from .counting import BudgetExceeded

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = _config_from(args)
        result = COMMANDS[args.command](args, cfg)
    except (UsageError, PolynomialError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailed as exc:
        rows = exc.args[0] if exc.args else []
        if rows:
            emit_report(rows, args.fmt, args.out)
        print("verification failed", file=sys.stderr)
        return EXIT_FAIL
    except (BudgetExceeded, OSError, ArithmeticError, LookupError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if isinstance(result, str):
        print(result)
    else:
        try:
            emit_report(result, cfg.fmt, cfg.out)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


def main() -> None:
    sys.exit(run())
