"""Command line front end.

Every subcommand writes a ``qconf/1`` JSON document (or a CSV table) and
exits with 0 on success, 2 on a bad configuration, 3 on a domain error and
4 when a limit cannot be certified.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Any, Sequence

from .confluence import ConvergenceReport, main_theorem_report, operator_report
from .errors import ConvergenceError, DomainError, QconfError
from .jfun import (
    build_jcoh_eq,
    build_jcoh_noneq,
    build_jk_eq,
    build_jk_noneq,
    check_coh_nonresonant,
)
from .qop import (
    companion,
    decreasing,
    first_nonzero,
    kth_operator_family,
    make_coh_operator,
    make_kth_operator,
    residual,
    residual_is_zero,
    residual_max,
)
from .qseries import CharacterSeries, LogPoly, PowerMarked, TruncSeries
from .qsystems import QSystem, sauloy_confluence_check
from .scalars import NumericField, RatFunc, default_bits, principal_power
from .specfun import e_q_char, ell_q_eval, q_log_limit_check, theta_eval

SCHEMA = "qconf/1"
CSV_HEADER = ("basis", "qdeg", "logdeg", "t", "value", "target", "error")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CONVERGENCE = 0, 1, 2, 3, 4


class ConfigError(QconfError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: int = 1
    D: int = 3
    variant: str = "noneq"
    q0: str = "0.5"
    z: str = "1"
    lam: tuple | None = None
    t_start: str = "1/10"
    t_ratio: str = "1/10"
    t_count: int = 4
    tol: str = "1e-3"
    bits: int = 256
    fmt: str = "json"
    output: str = "-"
    extra: tuple = ()

    def option(self, key, default=None):
        return dict(self.extra).get(key, default)


# ---------------------------------------------------------------------------
# parsing and validation


def parse_number(s: str) -> Fraction:
    """Exact value of a decimal or ``p/q`` string."""
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"not a rational number: {s!r}") from exc


def parse_lam(s: str | None) -> tuple | None:
    if s is None:
        return None
    parts = [p for p in s.split(",") if p.strip()]
    if not parts:
        raise ConfigError("--lam needs at least one value")
    return tuple(parse_number(p) for p in parts)


def t_grid(cfg: RunConfig) -> list[Fraction]:
    start, ratio = parse_number(cfg.t_start), parse_number(cfg.t_ratio)
    return [start * ratio**k for k in range(cfg.t_count)]


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.N < 0:
        raise ConfigError("N must be nonnegative")
    if cfg.D < 0:
        raise ConfigError("the truncation order must be nonnegative")
    q0 = parse_number(cfg.q0)
    if not 0 < q0 < 1:
        raise ConfigError(f"q0 must satisfy 0 < q0 < 1, got {cfg.q0}")
    if parse_number(cfg.tol) <= 0:
        raise ConfigError("tol must be positive")
    if cfg.bits < 53:
        raise ConfigError("precision must be at least 53 bits")
    if parse_number(cfg.z) == 0:
        raise ConfigError("z must be nonzero")
    if cfg.lam is not None and len(cfg.lam) != cfg.N + 1:
        raise ConfigError(f"--lam needs N + 1 = {cfg.N + 1} values, got {len(cfg.lam)}")
    start, ratio = parse_number(cfg.t_start), parse_number(cfg.t_ratio)
    if cfg.t_count < 2 or not start > 0 or not 0 < ratio < 1:
        raise ConfigError("the t-grid needs start > 0, 0 < ratio < 1 and at least two points")
    if cfg.fmt not in ("json", "csv"):
        raise ConfigError(f"unknown output format {cfg.fmt!r}")
    return cfg


# ---------------------------------------------------------------------------
# serialization


def _real_str(ctx, x, bits) -> str:
    # one decimal digit short of the working precision hides the last-bit noise
    return ctx.nstr(x, max(int(bits * 0.30103) - 1, 15), min_fixed=-4, max_fixed=6)


def encode(x, bits: int | None = None) -> Any:
    """JSON form of a scalar: exact values become strings, numerics carry their precision."""
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    if isinstance(x, RatFunc):
        if x.is_constant():
            return encode(x.as_fraction())
        r = x.reduced()
        return {"num": str(r.num), "den": str(r.den)}
    ctx = getattr(x, "context", None)
    if ctx is not None:
        bits = bits or ctx.prec
        re_, im_ = ctx.re(x), ctx.im(x)
        return {"re": _real_str(ctx, re_, bits), "im": _real_str(ctx, im_, bits), "bits": bits}
    if isinstance(x, float):
        return repr(x)
    return str(x)


_NAME = re.compile(r"^(.*?)(\d*)$")


def row_key(row: dict):
    m = _NAME.match(row["basis"])
    prefix, idx = m.group(1), int(m.group(2) or -1)
    t = row.get("t")
    tk = Fraction(t) if isinstance(t, str) and t else Fraction(-1)
    return (prefix, idx, int(row["qdeg"]), int(row["logdeg"]), tk)


def table_row(basis, qdeg, logdeg, value, t=None, target=None, error=None) -> dict:
    return {
        "basis": basis,
        "qdeg": qdeg,
        "logdeg": logdeg,
        "t": encode(Fraction(t)) if t is not None else None,
        "value": encode(value),
        "target": encode(target) if target is not None else None,
        "error": encode(error) if error is not None else None,
    }


def render(doc: dict, fmt: str) -> str:
    doc["rows"] = sorted(doc.get("rows", []), key=row_key)
    if fmt == "json":
        return json.dumps({"schema": SCHEMA, **doc}, indent=2, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in doc["rows"]:
        w.writerow([_cell(r[k]) for k in CSV_HEADER])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, dict):
        if "num" in v:
            return f"({v['num']})/({v['den']})"
        if v["im"] in ("0", "0.0"):
            return v["re"]
        sign = "" if v["im"].startswith("-") else "+"
        return f"{v['re']}{sign}{v['im']}j"
    return str(v)


def emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands


def _point(s: str):
    """Exact rational when possible, otherwise a complex literal such as ``1+1j``."""
    try:
        return Fraction(s.strip())
    except ValueError:
        try:
            return complex(s.strip().replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"not a number: {s!r}") from exc


def _equivariant(cfg: RunConfig) -> bool:
    return cfg.lam is not None


def cmd_jfun(cfg: RunConfig) -> tuple[dict, int]:
    N, D = cfg.N, cfg.D
    z = parse_number(cfg.z)
    rows = []
    if cfg.variant == "kth":
        if _equivariant(cfg):
            field = NumericField(cfg.bits)
            J = build_jk_eq(N, D, "numeric", q=parse_number(cfg.q0), z=z, lam=cfg.lam, field=field)
            for i in range(N + 1):
                for d, c in enumerate(J.series(i).coeffs):
                    rows.append(table_row(f"fixed{i}", d, 0, c))
            kind = "kth-eq"
        else:
            J = build_jk_noneq(N, D)
            for i, comp in enumerate(J.components):
                for a, s in enumerate(comp.terms):
                    for d, c in enumerate(s.coeffs):
                        if c != 0:
                            rows.append(table_row(f"pi{i}", d, a, c))
            kind = "kth-noneq"
    elif cfg.variant == "coh":
        if _equivariant(cfg):
            J = build_jcoh_eq(N, D, z, cfg.lam)
            for i in range(N + 1):
                for d, c in enumerate(J.series(i).coeffs):
                    rows.append(table_row(f"fixed{i}", d, 0, c))
            kind = "coh-eq"
        else:
            J = build_jcoh_noneq(N, D, z)
            for i, comp in enumerate(J.components):
                for a, s in enumerate(comp.terms):
                    for d, c in enumerate(s.coeffs):
                        if c != 0:
                            rows.append(table_row(f"H{i}", d, a, c))
            kind = "coh-noneq"
    else:
        raise ConfigError("jfun needs --variant kth or coh")
    doc = {"command": "jfun", "series": kind, "N": N, "truncation": D, "rows": rows}
    if _equivariant(cfg):
        doc["lam"] = [encode(l) for l in cfg.lam]
    return doc, EXIT_OK


def _corrupt(sol, degree: int):
    """Add one to the ``Q**degree`` coefficient of the log-free part."""
    if isinstance(sol, LogPoly):
        return LogPoly((_corrupt(sol.terms[0], degree),) + sol.terms[1:], sol.max_log_degree)
    if isinstance(sol, CharacterSeries):
        return CharacterSeries(_corrupt(sol.body, degree), sol.eigenvalue)
    if isinstance(sol, PowerMarked):
        return PowerMarked(_corrupt(sol.body, degree), sol.exponent)
    cs = list(sol.coeffs) + [sol.field.zero] * (sol.order + 1 - len(sol.coeffs))
    k = degree - sol.low
    if not 0 <= k < len(cs):
        raise ConfigError(f"cannot corrupt degree {degree}: series known to Q^{sol.order}")
    cs[k] = cs[k] + sol.field.one
    return TruncSeries(sol.field, tuple(cs), sol.order, sol.low)


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    N, D = cfg.N, cfg.D
    z = parse_number(cfg.z)
    eq = _equivariant(cfg)
    if cfg.variant == "kth":
        if eq:
            J = build_jk_eq(N, D)
            op = make_kth_operator("eq", N, Lam=J.Lam, field=J.field)
            sols, names, equation = list(J.columns), [f"fixed{i}" for i in range(N + 1)], \
                "prod_j (1 - Lambda_j sigma) - Q"
        else:
            J = build_jk_noneq(N, D)
            op = make_kth_operator("noneq", N, field=J.field)
            sols, names, equation = list(J.components), [f"pi{i}" for i in range(N + 1)], \
                "(1 - sigma)^(N+1) - Q"
    elif cfg.variant == "coh":
        if eq:
            check_coh_nonresonant(z, cfg.lam, D)
            J = build_jcoh_eq(N, D, z, cfg.lam)
            op = make_coh_operator("eq", N, z, cfg.lam)
            sols, names, equation = list(J.columns), [f"fixed{i}" for i in range(N + 1)], \
                "prod_j (-lambda_j + z Q d/dQ) - Q"
        else:
            J = build_jcoh_noneq(N, D, z)
            op = make_coh_operator("noneq", N, z)
            sols, names, equation = list(J.components), [f"H{i}" for i in range(N + 1)], \
                "(z Q d/dQ)^(N+1) - Q"
    else:
        raise ConfigError("verify needs --variant kth or coh")
    bad = cfg.option("corrupt")
    if bad is not None:
        sols[0] = _corrupt(sols[0], bad)
    ok, worst, located = True, 0, None
    for name, sol in zip(names, sols):
        res = residual(op, sol)
        if not residual_is_zero(res):
            ok = False
            if located is None:
                loc = first_nonzero(res)
                located = {"basis": name, "logdeg": loc[0], "qdeg": loc[1]} if loc else {"basis": name}
        m = residual_max(res)
        if m is None or worst is None:
            worst = None
        elif m > worst:
            worst = m
    doc = {
        "command": "verify",
        "equation": equation,
        "N": N,
        "truncation": D,
        "residual_max": encode(worst) if worst is not None else ("nonzero" if not ok else "0"),
        "pass": ok,
    }
    if located is not None:
        doc["first_nonzero"] = located
    return doc, EXIT_OK if ok else EXIT_FAIL


def _report_doc(rep: ConvergenceReport) -> dict:
    rows = []
    for r in rep.rows:
        for (t, v), e in zip(r.values, r.errors):
            row = table_row(r.basis, r.qdeg, r.logdeg, v, t, r.target, e)
            row["monotone"] = r.monotone
            rows.append(row)
    comps = [{"label": lab, "value": encode(v), "target": encode(tg), "error": encode(e)}
             for lab, v, tg, e in rep.comparisons]
    return {
        "variant": rep.variant,
        "level": rep.level,
        "tol": encode(Fraction(rep.tol).limit_denominator(10**12)),
        "comparisons": sorted(comps, key=lambda c: c["label"]),
        "rows": rows,
        "verdict": rep.verdict,
    }


def cmd_confluence(cfg: RunConfig) -> tuple[dict, int]:
    field = NumericField(cfg.bits)
    level = cfg.option("level", "solution")
    variant = cfg.variant
    if variant not in ("eq", "noneq"):
        raise ConfigError("confluence needs --variant eq or noneq")
    if variant == "eq" and cfg.lam is None:
        raise ConfigError("the equivariant pipeline needs --lam")
    z = parse_number(cfg.z)
    lam = cfg.lam if variant == "eq" else None
    if lam is not None:
        check_coh_nonresonant(z, lam, max(cfg.D, 1))
    ts = t_grid(cfg)
    tol = float(parse_number(cfg.tol))
    q0 = parse_number(cfg.q0)
    if level == "equation":
        rep = operator_report(variant, cfg.N, q0, z, lam, ts, tol, field)
    elif level == "solution":
        rep = main_theorem_report(variant, cfg.N, cfg.D, q0, z, lam, ts, tol, field)
    else:
        raise ConfigError(f"unknown level {level!r}")
    doc = {"command": "confluence", "N": cfg.N, "truncation": cfg.D, **_report_doc(rep)}
    return doc, EXIT_OK if rep.verdict else EXIT_CONVERGENCE


def cmd_specfun(cfg: RunConfig) -> tuple[dict, int]:
    field = NumericField(cfg.bits)
    fn = cfg.option("function")
    q = field(parse_number(cfg.option("q") or cfg.q0))
    at = field(_point(cfg.option("at")))
    rows, checks, ok = [], [], True
    if fn == "theta":
        v = theta_eval(q, at, field=field)
        rows.append(table_row("theta", 0, 0, v))
        if cfg.option("check_qde"):
            r = abs(at * theta_eval(q, q * at, field=field) - v)
            checks.append({"identity": "Q theta(qQ) = theta(Q)", "residual": encode(r)})
            ok = r < 1e-12
    elif fn == "ell":
        v = ell_q_eval(q, at, field=field)
        rows.append(table_row("ell", 0, 0, v))
        if cfg.option("check_qde"):
            r = abs(ell_q_eval(q, q * at, field=field) - v - 1)
            checks.append({"identity": "ell(qQ) = ell(Q) + 1", "residual": encode(r)})
            ok = r < 1e-10
        steps = cfg.option("steps")
        if cfg.option("log_limit"):
            ts = [Fraction(1, 2**k) for k in range(1, steps + 1)] if steps else t_grid(cfg)
            table = q_log_limit_check(q, at, ts, field)
            target = field.ctx.log(at)
            errs = []
            for t, err in table:
                qt = principal_power(q, field(t), field)
                val = (qt - 1) * ell_q_eval(qt, at, field=field)
                rows.append(table_row("logq", 0, 1, val, t, target, err))
                errs.append(err)
            mono = decreasing(errs)
            checks.append({"identity": "(q^t - 1) ell_{q^t}(Q) -> log Q", "decreasing": mono,
                           "final_error": encode(errs[-1])})
            ok = ok and mono
    elif fn == "e":
        lam = cfg.option("lam_char")
        if lam is None:
            raise ConfigError("specfun e needs --lambda")
        lam = field(_point(lam))
        v = e_q_char(q, lam, at, field)
        rows.append(table_row("e", 0, 0, v))
        if cfg.option("check_qde"):
            r = abs(e_q_char(q, lam, q * at, field) - lam * v)
            checks.append({"identity": "e(qQ) = lambda e(Q)", "residual": encode(r)})
            ok = r < 1e-10
    else:
        raise ConfigError(f"unknown function {fn!r}")
    doc = {"command": "specfun", "function": fn, "q": encode(q), "at": encode(at),
           "checks": checks, "rows": rows, "pass": ok}
    return doc, EXIT_OK if ok else EXIT_CONVERGENCE


def _divergent_family(q0, field):
    def at(t):
        q = field(q0) ** field(t)
        return QSystem.from_entries(field, q, [[field.one + field.one / (q - 1)]])
    return at


def cmd_sauloy(cfg: RunConfig) -> tuple[dict, int]:
    field = NumericField(cfg.bits)
    q0 = parse_number(cfg.q0)
    z = parse_number(cfg.z)
    ts = t_grid(cfg)
    tol = float(parse_number(cfg.tol))
    samples = [field(_point(s)) for s in (cfg.option("sample") or ("1/2", "2", "1+1j"))]
    if cfg.option("control"):
        family, target, label = _divergent_family(q0, field), None, "divergent control"
    else:
        if cfg.variant not in ("eq", "noneq"):
            raise ConfigError("sauloy-check needs --variant eq or noneq")
        if cfg.variant == "eq" and cfg.lam is None:
            raise ConfigError("the equivariant family needs --lam")
        lam = cfg.lam if cfg.variant == "eq" else None
        if lam is not None:
            check_coh_nonresonant(z, lam, 1)
        ops = kth_operator_family(cfg.variant, cfg.N, q0, z, lam, field)
        limit = companion(make_coh_operator(cfg.variant, cfg.N, z, lam))

        def family(t):
            return companion(ops(t))

        def target(Q):
            return limit.evaluate(Q, field)

        label = f"companion of the pulled back {cfg.variant} operator"
    rep = sauloy_confluence_check(family, q0, ts, samples, target=target, tol=tol, field=field)
    doc = {
        "command": "sauloy-check",
        "family": label,
        "N": cfg.N,
        "conditions": {k: v for k, v in sorted(rep.conditions.items())},
        "target_error": encode(rep.target_error) if rep.target_error is not None else None,
        "eigenvalues": [encode(e) for e in sorted(rep.eigenvalues, key=lambda e: (float(e.real), float(e.imag)))],
        "rows": [],
        "pass": rep.passed,
    }
    return doc, EXIT_OK if rep.passed else EXIT_CONVERGENCE


COMMANDS = {
    "jfun": cmd_jfun,
    "verify": cmd_verify,
    "confluence": cmd_confluence,
    "specfun": cmd_specfun,
    "sauloy-check": cmd_sauloy,
}


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser, variants: Sequence[str] | None, default_variant=None):
    if variants:
        p.add_argument("--variant", choices=variants, default=default_variant, required=default_variant is None)
    p.add_argument("--n", type=int, default=1, dest="N")
    p.add_argument("--trunc", type=int, default=3, dest="D", help="truncation order in Q")
    p.add_argument("--q0", default="0.5")
    p.add_argument("--z", default="1")
    p.add_argument("--lam", default=None, help="comma separated lambda_0..lambda_N")
    p.add_argument("--t-start", default="1/10")
    p.add_argument("--t-ratio", default="1/10")
    p.add_argument("--t-count", type=int, default=4)
    p.add_argument("--tol", default="1e-3")
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json", dest="fmt")
    p.add_argument("--output", default="-")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qconf", description="q-difference confluence toolkit for projective spaces")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("jfun", help="print J-function coefficients")
    _common(p, ("kth", "coh"))

    p = sub.add_parser("verify", help="check that a J-function solves its equation")
    _common(p, ("kth", "coh"))
    p.add_argument("--corrupt", type=int, default=None, metavar="DEG",
                   help="debug: perturb the Q^DEG coefficient before checking")

    p = sub.add_parser("confluence", help="run the q -> 1 limit")
    _common(p, ("eq", "noneq"))
    p.add_argument("--level", choices=("solution", "equation"), default="solution")

    p = sub.add_parser("specfun", help="evaluate theta, ell or e")
    p.add_argument("function", choices=("theta", "ell", "e"))
    _common(p, None)
    p.add_argument("--q", default=None)
    p.add_argument("--at", required=True)
    p.add_argument("--lambda", default=None, dest="lam_char")
    p.add_argument("--check-qde", action="store_true")
    p.add_argument("--log-limit", action="store_true")
    p.add_argument("--steps", type=int, default=None)

    p = sub.add_parser("sauloy-check", help="check the confluence conditions on a companion family")
    _common(p, ("eq", "noneq"), "eq")
    p.add_argument("--control", action="store_true", help="use the divergent control family")
    p.add_argument("--sample", action="append", default=None, help="sample point Q (repeatable)")
    return parser


_EXTRA = ("level", "corrupt", "function", "q", "at", "lam_char", "check_qde", "log_limit", "steps",
          "control", "sample")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    extra = tuple((k, getattr(ns, k)) for k in _EXTRA if hasattr(ns, k))
    cfg = RunConfig(
        command=ns.command,
        N=ns.N,
        D=ns.D,
        variant=getattr(ns, "variant", None) or "",
        q0=ns.q0,
        z=ns.z,
        lam=parse_lam(ns.lam),
        t_start=ns.t_start,
        t_ratio=ns.t_ratio,
        t_count=ns.t_count,
        tol=ns.tol,
        bits=ns.bits if ns.bits is not None else default_bits(),
        fmt=ns.fmt,
        output=ns.output,
        extra=extra,
    )
    if cfg.command == "specfun" and cfg.option("q") is not None:
        q = parse_number(cfg.option("q"))
        if not 0 < abs(q) < 1:
            raise ConfigError(f"|q| must be below 1, got {cfg.option('q')}")
        cfg = replace(cfg, q0=cfg.option("q") if 0 < q < 1 else cfg.q0)
    return validate(cfg)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = config_from_args(ns)
        doc, code = COMMANDS[cfg.command](cfg)
        doc["bits"] = cfg.bits
        emit(render(doc, cfg.fmt), cfg.output)
        return code
    except ConfigError as exc:
        print(f"qconf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"qconf: domain error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as exc:
        print(f"qconf: convergence failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"qconf: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"qconf: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
