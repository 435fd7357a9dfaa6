"""Command-line interface for ultrascale."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv
from rich.console import Console
from rich.logging import RichHandler
from rich.markdown import Markdown
from rich.table import Table

from ultrascale.analysis.padic_tree import (
    TailPolicy,
    build_tree,
    default_monna_ratio,
    monna_map,
    padic_expand,
    padic_valuation,
    sup_norm,
)
from ultrascale.analysis.valuation import (
    InfinitesimalFamily,
    ValuationForm,
    valuate,
    valuation_form_eval,
    valuation_profile,
)
from ultrascale.config import OUTPUT_FORMATS, RunConfig
from ultrascale.errors import DomainError, UltrascaleError
from ultrascale.evaluation.acceptance import run_acceptance
from ultrascale.geometry.cantor_function import devil_staircase, staircase_grid
from ultrascale.geometry.cantor_sets import (
    CantorApproximation,
    GapSchedule,
    IfsSystem,
    approximate,
    build_ifs,
    gaps,
    lebesgue_measure,
)
from ultrascale.geometry.fractal_measures import (
    ScaleLadder,
    box_count_dimension,
    box_counts,
    fatness_exponent,
)
from ultrascale.parsing import (
    format_rational,
    parse_int_list,
    parse_rational,
    parse_real_list,
    reciprocal,
)
from ultrascale.primes.prime_flow import (
    chebyshev_deformation,
    conservation_solve,
    conservation_valuation_check,
    inversion_cascade,
    parse_decades,
    pnt_deviation,
    valuation_growth,
)
from ultrascale.primes.sieve import PrimeTable, sieve

logger = logging.getLogger(__name__)

console = Console()

LOG_LEVEL_ENV = "ULTRASCALE_LOG_LEVEL"


class Output:
    """Renders command results in the configured format with the config stamp."""

    def __init__(self, config: RunConfig, fmt: str):
        self.config = config
        self.format = fmt

    def stamp(self) -> Dict[str, Any]:
        return {"config_hash": self.config.config_hash(), "seed": self.config.seed}

    def json(self, payload: Dict[str, Any]) -> None:
        sys.stdout.write(json.dumps({**payload, **self.stamp()}, indent=2) + "\n")

    def csv_text(self, header: Sequence[str], rows: Sequence[Sequence[Any]], footer: Sequence[str] = ()) -> str:
        buffer = io.StringIO()
        buffer.write(f"# config={self.config.config_hash()} seed={self.config.seed}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        for line in footer:
            buffer.write(f"# {line}\n")
        return buffer.getvalue()

    def csv(self, header: Sequence[str], rows: Sequence[Sequence[Any]], footer: Sequence[str] = ()) -> None:
        sys.stdout.write(self.csv_text(header, rows, footer))

    def emit(self, path: str, header: Sequence[str], rows: Sequence[Sequence[Any]], footer: Sequence[str] = ()) -> None:
        Path(path).write_text(self.csv_text(header, rows, footer))
        logger.info(f"Wrote {len(rows)} rows to {path}")

    def markdown(self, text: str) -> None:
        footer = f"config {self.config.config_hash()} seed {self.config.seed}"
        console.print(Markdown(f"{text}\n\n---\n\n_{footer}_"))

    def result(
        self,
        payload: Dict[str, Any],
        markdown: str,
        header: Sequence[str] = ("key", "value"),
        rows: Optional[Sequence[Sequence[Any]]] = None,
        footer: Sequence[str] = (),
    ) -> None:
        """Print a result as JSON, CSV (rows or key/value pairs) or markdown."""
        if self.format == "json":
            self.json(payload)
        elif self.format == "csv":
            self.csv(header, rows if rows is not None else _flat_rows(payload), footer)
        else:
            self.markdown(markdown)


def _flat_rows(payload: Dict[str, Any]) -> List[List[Any]]:
    return [[k, v] for k, v in payload.items() if not isinstance(v, (list, dict))]


# Subcommand handlers


def _provenance(args: argparse.Namespace) -> IfsSystem | GapSchedule:
    if args.schedule:
        return GapSchedule.parse(args.schedule)
    return build_ifs(args.ratio)


def _interval_rows(approx: CantorApproximation) -> List[List[int]]:
    return [
        [approx.level, i, u.numerator, u.denominator, v.numerator, v.denominator]
        for i, (u, v) in enumerate(approx.intervals)
    ]


def cmd_cantor(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    approx = approximate(_provenance(args), args.level, config.max_level)
    header = ["level", "index", "left_num", "left_den", "right_num", "right_den"]
    if args.emit:
        out.emit(args.emit, header, _interval_rows(approx))
    measure = lebesgue_measure(approx)
    payload = {
        "provenance": approx.provenance.label,
        "level": approx.level,
        "count": len(approx),
        "interval_length": format_rational(approx.interval_length),
        "measure": format_rational(measure),
        "measure_decimal": float(measure),
        "gap_count": len(approx) - 1,
    }
    if out.format == "csv" and not args.emit:
        out.csv(header, _interval_rows(approx))
        return
    if out.format == "json" and approx.level <= 12:
        payload["intervals"] = [
            [format_rational(u), format_rational(v)] for u, v in approx.intervals
        ]
        payload["gaps"] = [[format_rational(u), format_rational(v)] for u, v in gaps(approx)]
    out.result(
        payload,
        "\n".join(
            [
                f"**Set:** {payload['provenance']}",
                f"**Level:** {approx.level}, **intervals:** {len(approx)}",
                f"**Measure:** {payload['measure']} ≈ {float(measure):.10g}",
            ]
        ),
    )


def cmd_dim(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    provenance = _provenance(args)
    approx = approximate(provenance, args.level, config.max_level)
    if args.ladder:
        ladder = ScaleLadder.parse(args.ladder)
    elif isinstance(provenance, IfsSystem):
        ladder = ScaleLadder.geometric(provenance.ratio, config.ladder_count, start=provenance.ratio)
    else:
        ladder = config.ladder()
    dimension = box_count_dimension(approx, ladder, config.r2_threshold)
    fatness = fatness_exponent(approx, ladder, threshold=config.r2_threshold)
    counts = box_counts(approx, ladder)
    header = ["eps", "log_inv_eps", "count", "log_count"]
    rows = [
        [f"{eps:.12g}", f"{-lv:.12g}", int(n), f"{math.log(n):.12g}"]
        for eps, lv, n in zip(ladder.values, ladder.log_values, counts)
    ]
    if args.emit:
        out.emit(args.emit, header, rows)
    payload = {
        "provenance": provenance.label,
        "level": approx.level,
        "dimension": dimension.model_dump(exclude={"points"}),
        "fatness": fatness.model_dump(exclude={"points"}),
        "sum": dimension.exponent + fatness.exponent,
    }
    out.result(
        payload,
        "\n\n".join(
            ["### Box-counting dimension", dimension.to_markdown(), "### Fatness exponent", fatness.to_markdown()]
        ),
        header=header,
        rows=rows,
    )


def cmd_valuate(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    family = InfinitesimalFamily(args.l, args.lam)
    ladder = ScaleLadder.parse(args.delta_ladder)
    estimate = valuate(family, ladder)
    payload = {"l": args.l, "lambda": args.lam, **estimate.model_dump()}
    rows = [[f"{d:.12g}", f"{r:.12g}"] for d, r in zip(estimate.log_deltas, estimate.residuals)]
    out.result(payload, estimate.to_markdown(), header=["log_delta", "raw_value"], rows=rows)


def _form(args: argparse.Namespace) -> ValuationForm:
    variant = args.variant
    if variant == "series":
        return ValuationForm.series(args.a, parse_real_list(args.b or ""), parse_real_list(args.s or ""))
    b = float(args.b) if args.b is not None else 0.0
    s = float(args.s) if args.s is not None else None
    if variant == "constant-a":
        return ValuationForm.constant(args.a)
    if variant == "cantor-b":
        return ValuationForm("cantor-b", b=b, beta=args.beta)
    if variant == "combined":
        return ValuationForm("combined", a=args.a, b=b, beta=args.beta)
    if variant == "measure":
        return ValuationForm("measure", a=args.a, b=b, s=s, x_bar=args.x_bar)
    return ValuationForm("thin", b=b, s=s)


def cmd_vform(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    form = _form(args)
    if args.ladder:
        rows = valuation_profile(form, ScaleLadder.parse(args.ladder))
        header = ["x", "v", "Y", "loglog_inv_x"]
        table = [[f"{r.x:.12g}", f"{r.v:.12g}", f"{r.deformed:.12g}", f"{r.loglog:.12g}"] for r in rows]
        lines = ["| x | v | Y | log log 1/x |", "|---|---|---|---|"]
        lines.extend(f"| {r[0]} | {r[1]} | {r[2]} | {r[3]} |" for r in table)
        out.result(
            {"variant": form.variant, "profile": [r.model_dump() for r in rows]},
            "\n".join(lines),
            header=header,
            rows=table,
        )
        return
    if args.x is None:
        raise DomainError("vform needs --x or --ladder")
    v = valuation_form_eval(form, args.x)
    out.result({"variant": form.variant, "x": args.x, "v": v}, f"**v({args.x:g})** = {v:.12g}")


def cmd_staircase(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    precision = args.precision or config.precision
    if args.grid:
        grid = staircase_grid(args.grid, precision)
        rows = [[format_rational(t), format_rational(phi), f"{float(phi):.12g}"] for t, phi in grid]
        lines = ["| t | phi | decimal |", "|---|---|---|"]
        lines.extend(f"| {r[0]} | {r[1]} | {r[2]} |" for r in rows)
        out.result(
            {"grid": [{"t": r[0], "phi": r[1]} for r in rows]},
            "\n".join(lines),
            header=["t", "phi", "phi_decimal"],
            rows=rows,
        )
        return
    if args.t is None:
        raise DomainError("staircase needs --t or --grid")
    value = devil_staircase(args.t, precision)
    out.result(value.model_dump(), value.to_markdown())


def cmd_padic(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    valuation = padic_valuation(args.q, args.p)
    payload = valuation.model_dump()
    if payload["order"] == math.inf:
        payload["order"] = "inf"
    markdown = valuation.to_markdown()
    if args.depth:
        number = padic_expand(args.q, args.p, args.depth)
        payload["digits"] = list(number.digits)
        markdown += f"\n\n**Unit digits (little-endian):** {','.join(map(str, number.digits))}"
    out.result(payload, markdown)


def cmd_monna(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    digits = parse_int_list(args.digits)
    ratio = parse_rational(args.a) if args.a else default_monna_ratio(args.p)
    value = monna_map(digits, args.p, ratio)
    payload = {
        "digits": digits,
        "p": args.p,
        "a": format_rational(ratio),
        "construction": "sum d_k (1-a)/(p-1) a^k",
        "value": format_rational(value),
        "decimal": float(value),
    }
    out.result(payload, f"**xi({','.join(map(str, digits))})** = {payload['value']} ≈ {float(value):.12g}")


def _table_for(bound: float, config: RunConfig) -> PrimeTable:
    # Sieve only as far as needed; beyond the configured limit the operation reports it
    return sieve(max(2, min(config.sieve_limit, math.ceil(bound))))


def cmd_pnt(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    ys = parse_decades(args.ladder)
    table = _table_for(ys[-1], config)
    deviations = pnt_deviation(ys, table, config.r2_threshold)
    header = ["y", "pi", "psi", "dev_pi", "dev_psi"]
    rows = [[f"{r.y:.0f}", r.pi, f"{r.psi:.12g}", f"{r.dev_pi:.12g}", f"{r.dev_psi:.12g}"] for r in deviations.rows]
    footer = [
        f"alpha_hat={deviations.alpha_hat} stderr={deviations.stderr} r_squared={deviations.r_squared}",
        f"caveat={deviations.caveat}",
    ]
    if args.emit:
        out.emit(args.emit, header, rows, footer)
    out.result(deviations.model_dump(), deviations.to_markdown(), header=header, rows=rows, footer=footer)


def cmd_conserve(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    result = conservation_solve(args.x, args.a, args.p)
    payload = result.model_dump()
    markdown = f"**s** = {result.s:.12g}, **X** = {result.X:.12g}, **residual** = {result.residual:.3e}"
    if args.v is not None:
        Y = args.Y if args.Y is not None else result.X
        payload["valuation_residual"] = conservation_valuation_check(args.x, args.v, Y)
        markdown += f"\n\n**Valuation residual** = {payload['valuation_residual']:.3e}"
    out.result(payload, markdown)


def cmd_cascade(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    if not 0 < args.x < 1:
        raise DomainError(f"x must lie in (0, 1), got {args.x}")
    table = _table_for(reciprocal(args.x), config)
    trace = inversion_cascade(args.x, table)
    growth = valuation_growth(args.x, table)
    routes = chebyshev_deformation(args.x, table)
    if args.trace:
        Path(args.trace).write_text(trace.model_dump_json(indent=2) + "\n")
        logger.info(f"Wrote cascade trace to {args.trace}")
    payload = {
        **trace.model_dump(exclude={"steps", "states"}),
        "valuation_growth": growth.v,
        "log_y_pi": routes.log_y_pi,
        "log_y_psi": routes.log_y_psi,
    }
    out.result(payload, trace.to_markdown())


def _parse_components(text: str) -> List[tuple[int, float]]:
    components = []
    for item in filter(None, (part.strip() for part in text.split(","))):
        try:
            p, v = item.split(":")
            components.append((int(p), float(v)))
        except ValueError as e:
            raise DomainError(f"Cannot parse component {item!r}; use p:v") from e
    return components


def cmd_tree(args: argparse.Namespace, config: RunConfig, out: Output) -> None:
    components = _parse_components(args.components)
    root = build_tree(components)
    norm = sup_norm(components, TailPolicy(bound=args.tail_bound))
    if args.nested:
        sys.stdout.write(json.dumps({"tree": root.to_nested(), "sup_norm": norm, **out.stamp()}) + "\n")
        return
    out.result(
        {"tree": root.model_dump(), "sup_norm": norm},
        f"```\n{root.to_text()}\n```\n\n**Sup norm:** {norm:.6g}",
    )


def cmd_verify_all(args: argparse.Namespace, config: RunConfig, out: Output) -> int:
    only = parse_int_list(args.only) if args.only else None
    report = run_acceptance(config, only=only)
    if out.format == "json":
        out.json(report.model_dump())
    elif out.format == "csv":
        out.csv(
            ["id", "name", "passed", "detail"],
            [[c.id, c.name, c.passed, c.error or c.detail] for c in report.checks],
        )
    else:
        table = Table(title=f"Acceptance (config {report.config_hash}, seed {report.seed})")
        table.add_column("#", justify="right")
        table.add_column("Check")
        table.add_column("Result")
        table.add_column("Detail")
        for c in report.checks:
            result = "[green]PASS[/green]" if c.passed else "[red]FAIL[/red]"
            table.add_row(str(c.id), c.name, result, c.error or c.detail)
        console.print(table)
    return 0 if report.passed else 1


# Parser


def _add_set_options(parser: argparse.ArgumentParser, level: int) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--ratio", default="1/3", help="IFS contraction ratio a in (0, 1/2)")
    group.add_argument("--schedule", help="Fat gap schedule: geometric:<c0> or file:<path>")
    parser.add_argument("--level", type=int, default=level, help="Cover level n")


def build_parser() -> argparse.ArgumentParser:
    """Build the argument parser with all subcommands."""
    parser = argparse.ArgumentParser(
        prog="ultrascale",
        description="Cantor sets, ultrametric valuations, p-adic trees and prime flows",
        allow_abbrev=False,
    )
    parser.add_argument("--config", help="Flat key=value config file (overrides ULTRASCALE_CONFIG)")
    parser.add_argument("--seed", type=int, help="Seed for randomized sweeps")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, help="Output format")
    parser.add_argument("--sieve-limit", type=int, help="Largest prime table size")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("cantor", help="Build a level-n cover")
    _add_set_options(p, level=5)
    p.add_argument("--emit", help="Write intervals as CSV")
    p.set_defaults(handler=cmd_cantor, preferred_format=None)

    p = sub.add_parser("dim", help="Box-counting dimension and fatness exponent")
    _add_set_options(p, level=16)
    p.add_argument("--ladder", help="Scale ladder q:k or base:first:last[:step]")
    p.add_argument("--emit", help="Write box counts as CSV")
    p.set_defaults(handler=cmd_dim, preferred_format=None)

    p = sub.add_parser("valuate", help="Valuation of lambda * delta^(1+l)")
    p.add_argument("--l", type=float, required=True, help="Exponent l in [0, 1)")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="Prefactor in (0, 1]")
    p.add_argument("--delta-ladder", default="10:-2:-9", help="Scale ladder base:first:last")
    p.set_defaults(handler=cmd_valuate, preferred_format=None)

    p = sub.add_parser("vform", help="Evaluate a closed valuation form")
    p.add_argument(
        "--variant",
        required=True,
        choices=["constant-a", "cantor-b", "combined", "measure", "series", "thin"],
    )
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", help="Coefficient b, or comma list b_i for series")
    p.add_argument("--beta", type=float)
    p.add_argument("--s", help="Exponent s, or comma list s_i for series")
    p.add_argument("--x-bar", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--ladder", help="Profile along a ladder instead of a single x")
    p.set_defaults(handler=cmd_vform, preferred_format=None)

    p = sub.add_parser("staircase", help="Cantor function value or grid")
    p.add_argument("--t", help="Point in [0, 1], rational or decimal")
    p.add_argument("--grid", type=int, help="Tabulate t = k/n for k = 0..n")
    p.add_argument("--precision", type=int, help="Ternary digits consumed")
    p.set_defaults(handler=cmd_staircase, preferred_format=None)

    p = sub.add_parser("padic", help="p-adic order and norm of a rational")
    p.add_argument("--q", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--depth", type=int, help="Also expand this many unit digits")
    p.set_defaults(handler=cmd_padic, preferred_format=None)

    p = sub.add_parser("monna", help="Monna map of a digit stream")
    p.add_argument("--digits", required=True, help="Little-endian digits, comma separated")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--a", help="Target ratio, default 1/3 for p=2 else 1/(p+1)")
    p.set_defaults(handler=cmd_monna, preferred_format=None)

    p = sub.add_parser("pnt", help="Prime number theorem deviations along a decade ladder")
    p.add_argument("--ladder", default="1e2:1e7", help="Decades first:last, e.g. 1e2:1e7")
    p.add_argument("--emit", help="Write the deviation table as CSV")
    p.set_defaults(handler=cmd_pnt, preferred_format="csv")

    p = sub.add_parser("conserve", help="Solve the scale conservation law")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--p", required=True)
    p.add_argument("--v", type=float, help="Also check the valuation form with this v")
    p.add_argument("--Y", type=float, help="Deformed variable for the valuation check (default X)")
    p.set_defaults(handler=cmd_conserve, preferred_format=None)

    p = sub.add_parser("cascade", help="Prime-driven inversion cascade")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--trace", help="Write the full trace as JSON")
    p.set_defaults(handler=cmd_cascade, preferred_format=None)

    p = sub.add_parser("tree", help="Ultrametric tree over prime components")
    p.add_argument("--components", default="", help="p:v pairs, e.g. 2:0.5,3:0.3")
    p.add_argument("--tail-bound", type=float, default=0.0, help="Declared vanishing tail bound")
    p.add_argument("--nested", action="store_true", help="Print nested-list export")
    p.set_defaults(handler=cmd_tree, preferred_format=None)

    p = sub.add_parser("verify-all", help="Run the acceptance suite")
    p.add_argument("--only", help="Comma-separated check ids")
    p.set_defaults(handler=cmd_verify_all, preferred_format="plain")

    return parser


def setup_logging(verbose: int) -> None:
    """Install a rich handler on standard error."""
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, os.environ.get(LOG_LEVEL_ENV, "WARNING").upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point; returns the process exit code."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    setup_logging(args.verbose)

    try:
        config = RunConfig.from_env(config_path=args.config).with_overrides(
            seed=args.seed, sieve_limit=args.sieve_limit
        )
        fmt = args.format or args.preferred_format or config.output_format
        handler: Callable[..., Optional[int]] = args.handler
        code = handler(args, config, Output(config, fmt))
    except UltrascaleError as e:
        sys.stderr.write(json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n")
        return 1
    return code or 0


if __name__ == "__main__":
    sys.exit(main())
