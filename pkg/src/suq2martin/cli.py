"""Command-line front end.

Every command prints one table, as JSON (default) or CSV, with rows in
ascending label order.  Floats are written with ``repr``, the shortest string
that round-trips, so identical invocations give byte-identical output.

Exit codes: 0 success, 1 a computed check failed or a numerical safeguard
tripped, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from .blocks import chi0_identity_residual, podles_residuals, spin1_adjoint_residual
from .central import (
    CentralElement,
    asymptotic_report,
    balayage,
    green_central,
    martin_central,
    solve_delta,
    zero_two_sequence,
)
from .exceptions import InputError, Suq2Error
from .fusion import DeformationParams, WeightFunctional
from .martin import boundary_deviation
from .verify import INVARIANT_SUITES, run_suite

__all__ = ["COMMANDS", "PhiSpecError", "RunConfig", "main", "parse_phi", "run"]

COMMANDS = ("green", "delta", "ratio", "martin-central", "martin-block", "podles", "balayage", "zerotwo", "verify")
SUITES = (*INVARIANT_SUITES, "all", "acceptance")
NORM_SLACK = 1e-12

_PAIR = re.compile(r"^(\d+):([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)$")


class PhiSpecError(InputError):
    """A weight-functional specification that does not parse or is not admissible."""


def parse_phi(spec: str) -> WeightFunctional:
    """Parse ``"s2:w,s2:w,..."`` into a :class:`WeightFunctional`.

    Labels are twice-spins.  Duplicate labels are summed.  A malformed pair,
    a negative weight or a total weight above ``1 + 1e-12`` raises
    :class:`PhiSpecError` naming the offending token.

    Examples
    --------
    >>> parse_phi("1:0.6,1:0.4").weights[1]
    1.0
    """
    if not spec or not spec.strip():
        raise PhiSpecError("empty weight specification")
    pairs = []
    for token in spec.split(","):
        m = _PAIR.match(token.strip())
        if m is None:
            raise PhiSpecError(f"malformed pair {token!r}: expected TWICE_SPIN:WEIGHT")
        weight = float(m.group(2))
        if weight < 0 or math.copysign(1.0, weight) < 0:
            raise PhiSpecError(f"negative weight in pair {token!r}")
        pairs.append((int(m.group(1)), weight))
    phi = WeightFunctional.from_pairs(pairs)
    if phi.norm > 1.0 + NORM_SLACK:
        raise PhiSpecError(f"total weight {phi.norm!r} of {spec!r} exceeds 1")
    return phi


@dataclass(frozen=True)
class RunConfig:
    """Validated command-line parameters."""

    command: str
    q: float
    phi: WeightFunctional
    params: DeformationParams
    target: int | None = None
    s_max: int = 20
    r_max: int = 12
    n: int = 1
    k: int = 1
    Y: tuple[int, ...] = (0, 1)
    seed: int = 42
    fmt: str = "json"
    suite: str = "all"


# ---------------------------------------------------------------------------
# commands; each returns (rows, passed)


def _cmd_green(cfg: RunConfig):
    table = green_central(cfg.phi, cfg.target or 0, cfg.s_max, cfg.params)
    rows = [{"s2": s2, "value": float(v), "tail_bound": float(b)} for s2, v, b in table.rows()]
    return rows, True


def _cmd_delta(cfg: RunConfig):
    data = solve_delta(cfg.phi, cfg.q)
    rows = [
        {"quantity": "delta", "value": float(data.delta), "tail_bound": 0.0},
        {"quantity": "lambda_phi", "value": float(data.lambda_phi), "tail_bound": 0.0},
    ]
    return rows, True


def _cmd_ratio(cfg: RunConfig):
    report = asymptotic_report(cfg.phi, cfg.s_max, cfg.params)
    rows = [
        {
            "s2": row["s2"],
            "value": float(row["ratio"]),
            "tail_bound": float(row["ratio_bound"]),
            "constant": float(row["constant"]),
            "constant_bound": float(row["constant_bound"]),
        }
        for row in report
    ]
    return rows, True


def _cmd_martin_central(cfg: RunConfig):
    K, hw = martin_central(cfg.phi, cfg.target or 0, cfg.s_max, cfg.params)
    rows = [{"s2": s2, "value": float(K.values[s2]), "tail_bound": float(hw[s2])} for s2 in range(cfg.s_max + 1)]
    return rows, True


def _cmd_martin_block(cfg: RunConfig):
    report = boundary_deviation(cfg.phi, cfg.n, range(cfg.r_max + 1), cfg.params)
    rows = [
        {"s2": row["r2"], "value": float(row["D"]), "tail_bound": float(row["tail_bound"]),
         "D_entry": float(row["D_entry"])}
        for row in report.rows
    ]
    return rows, True


def _cmd_podles(cfg: RunConfig):
    rows, passed = [], True
    for s2 in range(cfg.s_max + 1):
        res = podles_residuals(s2, cfg.q)
        chi0 = chi0_identity_residual(s2, cfg.q)
        spin1 = spin1_adjoint_residual(s2, cfg.q)
        worst = max(res.max(), chi0, spin1)
        passed &= worst <= cfg.params.tol_assert
        row = {"s2": s2, "value": float(worst), "tail_bound": 0.0}
        row.update({k: float(v) for k, v in res._asdict().items()})
        row.update({"chi0": float(chi0), "spin1": float(spin1)})
        rows.append(row)
    return rows, bool(passed)


def _cmd_balayage(cfg: RunConfig):
    if cfg.target is None:
        x = CentralElement.constant(1.0, cfg.s_max)
    else:
        x = CentralElement(green_central(cfg.phi, cfg.target, cfg.s_max, cfg.params).values)
    b, _ = balayage(cfg.phi, cfg.Y, x, cfg.params)
    tol = cfg.params.tol_assert
    rows, passed = [], True
    for s2 in range(cfg.s_max + 1):
        xv, bv = float(x[s2]), float(b[s2])
        passed &= bv <= xv + tol and (s2 not in cfg.Y or abs(bv - xv) <= tol)
        rows.append({"s2": s2, "value": bv, "tail_bound": 0.0, "x": xv})
    return rows, bool(passed)


def _cmd_zerotwo(cfg: RunConfig):
    n_values = range(1, cfg.n + 1)
    est = zero_two_sequence(cfg.phi, n_values, cfg.k, cfg.s_max, cfg.q)
    rows = [{"n": n, "value": float(v), "tail_bound": 0.0} for n, v in zip(n_values, est)]
    return rows, True


def _cmd_verify(cfg: RunConfig):
    checks = run_suite(cfg.suite, cfg.q, cfg.seed)
    rows = [
        {"check": c.name, "passed": c.passed, "value": c.value, "threshold": c.threshold}
        for c in checks
    ]
    return rows, all(c.passed for c in checks)


_DISPATCH = {
    "green": _cmd_green,
    "delta": _cmd_delta,
    "ratio": _cmd_ratio,
    "martin-central": _cmd_martin_central,
    "martin-block": _cmd_martin_block,
    "podles": _cmd_podles,
    "balayage": _cmd_balayage,
    "zerotwo": _cmd_zerotwo,
    "verify": _cmd_verify,
}


# ---------------------------------------------------------------------------
# output


def _plain(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def render(cfg: RunConfig, rows: list[dict]) -> str:
    """Serialize the table for ``cfg.fmt``; output depends only on ``cfg`` and ``rows``."""
    rows = [{k: _plain(v) for k, v in row.items()} for row in rows]
    if cfg.fmt == "json":
        doc = {
            "q": cfg.q,
            "phi": [[s2, w] for s2, w in cfg.phi.weights.items()],
            "command": cfg.command,
            "rows": rows,
        }
        return json.dumps(doc) + "\n"
    buf = io.StringIO()
    columns = list(rows[0]) if rows else ["value", "tail_bound"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text!r}")
    return value


def _positive_float(text: str) -> float:
    value = float(text)
    if not (value > 0 and math.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _label_list(text: str) -> tuple[int, ...]:
    try:
        labels = tuple(sorted({int(t) for t in text.split(",") if t.strip()}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated twice-spins, got {text!r}") from None
    if not labels or min(labels) < 0:
        raise argparse.ArgumentTypeError(f"expected nonnegative twice-spins, got {text!r}")
    return labels


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=float, default=0.5, help="deformation parameter in (0, 1)")
    common.add_argument("--phi", default="1:1.0", help="weights as TWICE_SPIN:WEIGHT pairs, comma separated")
    common.add_argument("--target", type=_nonneg_int, default=None, help="target twice-spin")
    common.add_argument("--s-max", type=_nonneg_int, default=20, help="largest twice-spin in the table")
    common.add_argument("--r-max", type=_nonneg_int, default=12, help="largest block twice-spin")
    common.add_argument("--n", type=_nonneg_int, default=1, help="power index")
    common.add_argument("--k", type=_nonneg_int, default=1, help="shift in the 0-2 law")
    common.add_argument("--Y", type=_label_list, default=(0, 1), help="balayage window, comma-separated twice-spins")
    common.add_argument("--tol-tail", type=_positive_float, default=1e-8, help="truncation tolerance")
    common.add_argument("--tol-assert", type=_positive_float, default=1e-9, help="assertion tolerance")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--seed", type=int, default=42, help="seed for randomized checks")

    parser = _Parser(prog="suq2martin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "verify":
            p.add_argument("--suite", choices=SUITES, default="all")
    return parser


def make_config(argv) -> RunConfig:
    """Parse ``argv`` into a :class:`RunConfig`, raising :class:`InputError` on bad input."""
    ns = build_parser().parse_args(argv)
    params = DeformationParams(ns.q, tol_tail=ns.tol_tail, tol_assert=ns.tol_assert)
    return RunConfig(
        command=ns.command,
        q=params.q,
        phi=parse_phi(ns.phi),
        params=params,
        target=ns.target,
        s_max=ns.s_max,
        r_max=ns.r_max,
        n=ns.n,
        k=ns.k,
        Y=ns.Y,
        seed=ns.seed,
        fmt=ns.format,
        suite=getattr(ns, "suite", "all"),
    )


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run one command; returns the exit code."""
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        cfg = make_config(argv)
    except (InputError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    try:
        rows, passed = _DISPATCH[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=stderr)
        return 2
    except (Suq2Error, ArithmeticError, MemoryError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return 1
    stdout.write(render(cfg, rows))
    return 0 if passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
