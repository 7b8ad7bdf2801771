#!/usr/bin/env python3
"""
Command-line front end: compute a measure for named families, verify the
closed forms against the oracle, and emit the entropy/energy table.

Exit codes: 0 success, 1 usage error (bad parameters, omega outside the
support, double-precision overflow, or a failed verification), 2 domain
violation, 3 oracle non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import measures
import numpy as np
import oracle
from expfam import Density, DomainViolation, EnergyUndefined, density
from families import FAMILY_NAMES, CatalogEntry, describe_source, make_entry, resolve_entry
from utils import (
    Tolerances,
    canonical_json,
    format_float,
    parse_float_list,
    parse_param_string,
    parse_point,
    resolve_settings,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_NOT_CONVERGED = 3

COMMANDS = (
    "energy",
    "cross",
    "rho",
    "csd",
    "holder",
    "entropy",
    "jensen",
    "mixture",
    "verify",
    "table",
)
PAIR_COMMANDS = {"cross", "rho", "csd", "holder", "jensen"}
METHODS = ("auto", "closed", "omega", "oracle")
OMEGA_COMMANDS = {"energy", "cross", "rho", "csd", "holder"}

TABLE_ROWS: Tuple[Tuple[str, str], ...] = (
    ("exponential", "lambda=2"),
    ("normal", "mu=0,sigma=1"),
    ("mvn", "mu=0;0,cov=1;0;0;1"),
    ("lognormal", "mu=0,sigma=1"),
    ("pareto", "a=1,k=1"),
    ("gamma", "alpha=2,beta=1"),
    ("beta", "alpha=1,beta=1"),
    ("poisson", "lambda=1"),
    ("gamma", "alpha=0.4,beta=1"),
)
TABLE_COLUMNS = (
    "family",
    "params",
    "entropy_closed",
    "energy_closed",
    "entropy_oracle",
    "energy_oracle",
    "entropy_delta",
    "energy_delta",
)
VERIFY_COLUMNS = (
    "family",
    "check",
    "index",
    "params",
    "closed",
    "oracle",
    "abs_delta",
    "rel_delta",
    "rtol",
    "passed",
    "expected_disagreement",
)
SCALAR_COLUMNS = ("command", "family", "method", "value", "valid")


class UsageError(ValueError):
    """A request that is well-formed on the command line but not runnable."""


class OnicescuArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"Error: {message}\n")


# pylint: disable=too-many-instance-attributes
@dataclass
class Request:
    """One parsed CLI invocation."""

    command: str
    family: Optional[str] = None
    params: Optional[str] = None
    params2: Optional[str] = None
    method: str = "auto"
    omega: Optional[str] = None
    output: str = "json"
    show_natural: bool = False
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    weights: Optional[str] = None
    components: List[str] = field(default_factory=list)
    grid: str = "default"
    families: Optional[str] = None
    config: Optional[str] = None
    quadrature: Dict[str, Any] = field(default_factory=dict)


def _clean(value: Any) -> Any:
    """JSON-ready copy: plain floats, lists for tuples, None for non-finite."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_clean(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _resolve(family: Optional[str], params: Optional[str], label: str):
    if not family:
        raise UsageError("--family is required for this command")
    if not params:
        raise UsageError(f"{label} is required for this command")
    entry, coords = resolve_entry(family, parse_param_string(params))
    return entry, coords, density(entry.descriptor, coords)


def _omega(request: Request):
    if request.omega is None:
        return None
    point = parse_point(request.omega)
    return np.asarray(point, dtype=float) if isinstance(point, list) else point


def _effective_method(request: Request, p: Density) -> str:
    method = request.method
    if method == "omega" and request.command not in OMEGA_COMMANDS:
        raise UsageError(f"Method 'omega' is not available for '{request.command}'")
    if method == "auto":
        if request.command == "holder":
            return "omega" if p.family.has_zero_carrier else "oracle"
        return "closed"
    return method


def _omega_report(name: str, value: float) -> measures.MeasureReport:
    return measures.MeasureReport(name, value, measures.Method.OMEGA_TRICK)


def _oracle_value(result: oracle.OracleResult) -> float:
    return float(result.value)  # type: ignore[arg-type]


def _oracle_correlation(
    p: Density, q: Density, cfg: oracle.QuadratureConfig
) -> Tuple[float, Dict[str, Any]]:
    results = [
        oracle.integrate_product(p, q, cfg),
        oracle.integrate_product(p, p, cfg),
        oracle.integrate_product(q, q, cfg),
    ]
    cross, energy_p, energy_q = (_oracle_value(result) for result in results)
    log_rho = math.log(cross) - 0.5 * (math.log(energy_p) + math.log(energy_q))
    diagnostics = {
        "error_estimate": results[0].error_estimate / cross
        + 0.5 * results[1].error_estimate / energy_p
        + 0.5 * results[2].error_estimate / energy_q,
        "evaluations": sum(result.evaluations for result in results),
        "converged": all(result.converged for result in results),
    }
    return log_rho, diagnostics


# pylint: disable=too-many-return-statements,too-many-branches
def compute_measure(
    request: Request, p: Density, q: Optional[Density], cfg: oracle.QuadratureConfig
) -> measures.MeasureReport:
    """Dispatch one scalar measure by command and method."""
    command = request.command
    method = _effective_method(request, p)
    omega = _omega(request)

    if command == "energy":
        if method == "omega":
            return _omega_report("energy", measures.energy_omega(p, omega))
        if method == "oracle":
            return measures.oracle_report("energy", oracle.integrate_product(p, p, cfg))
        report = measures.energy(p)
        report.diagnostics["renyi2"] = measures.renyi2(p)
        report.diagnostics["vajda2"] = measures.vajda2(p)
        return report

    if command == "entropy":
        if method == "oracle":
            return measures.oracle_report("entropy", oracle.entropy_integral(p, cfg))
        report = measures.shannon_entropy(p)
        report.diagnostics["legendre_entropy"] = measures.legendre_entropy(p)
        return report

    assert q is not None
    if command == "cross":
        if method == "omega":
            return _omega_report(
                "cross_energy", measures.cross_energy_omega(p, q, omega)
            )
        if method == "oracle":
            return measures.oracle_report(
                "cross_energy", oracle.integrate_product(p, q, cfg)
            )
        return measures.cross_energy(p, q)

    if command in ("rho", "csd"):
        name = "correlation" if command == "rho" else "cauchy_schwarz"
        if method == "omega":
            value = measures.cauchy_schwarz_omega(p, q, omega)
            return _omega_report(name, math.exp(-value) if command == "rho" else value)
        if method == "oracle":
            log_rho, diagnostics = _oracle_correlation(p, q, cfg)
            value = math.exp(log_rho) if command == "rho" else -log_rho
            return measures.MeasureReport(
                name, value, measures.Method.ORACLE, True, diagnostics
            )
        return measures.correlation(p, q) if command == "rho" else measures.cauchy_schwarz(p, q)

    if command == "holder":
        if request.alpha is None or request.gamma is None:
            raise UsageError("holder requires --alpha and --gamma")
        if method == "oracle":
            return measures.oracle_report(
                "holder",
                oracle.holder_integral(p, q, request.alpha, request.gamma, cfg),
            )
        return measures.holder(
            p, q, request.alpha, request.gamma, omega, use_omega=method == "omega"
        )

    if command == "jensen":
        if method == "oracle":
            result = oracle.squared_difference(p, q, cfg)
            return measures.oracle_report(
                "energy_jensen_divergence",
                oracle.OracleResult(
                    0.25 * result.value,  # type: ignore[operator]
                    0.25 * result.error_estimate,
                    result.evaluations,
                    result.converged,
                ),
            )
        report = measures.energy_jensen_divergence(p, q)
        report.diagnostics["jensen_F"] = measures.jensen_F(p.family, p.theta, q.theta)
        return report

    raise UsageError(f"Unknown command '{command}'")


def _natural(p: Density) -> List[float]:
    return list(p.theta.coords)


def run_measure(request: Request, cfg: oracle.QuadratureConfig) -> Dict[str, Any]:
    """Evaluate a single-density or pair command into an output document."""
    entry, coords, p = _resolve(request.family, request.params, "--params")
    inputs: Dict[str, Any] = {
        "family": p.family.family_id,
        "params": describe_source(entry, coords),
        "method": request.method,
    }
    natural: Dict[str, Any] = {"p": _natural(p)}
    q = None
    if request.command in PAIR_COMMANDS:
        entry2, coords2, q = _resolve(request.family, request.params2, "--params2")
        inputs["params2"] = describe_source(entry2, coords2)
        natural["q"] = _natural(q)
    if request.command == "holder":
        inputs["alpha"] = request.alpha
        inputs["gamma"] = request.gamma
    if request.omega is not None:
        inputs["omega"] = parse_point(request.omega)

    report = compute_measure(request, p, q, cfg)
    document = {"command": request.command, "inputs": inputs, **report.to_dict()}
    if request.show_natural:
        document["natural"] = natural
    return document


def run_mixture(request: Request, cfg: oracle.QuadratureConfig) -> Dict[str, Any]:
    """Informational energy of a finite mixture."""
    if not request.family:
        raise UsageError("--family is required for this command")
    if not request.components:
        raise UsageError("mixture requires at least one --component")
    if request.method == "omega":
        raise UsageError("Method 'omega' is not available for 'mixture'")
    components = []
    described = []
    for text in request.components:
        entry, coords, component = _resolve(request.family, text, "--component")
        components.append(component)
        described.append(describe_source(entry, coords))
    weights = (
        parse_float_list(request.weights)
        if request.weights
        else [1.0 / len(components)] * len(components)
    )
    mixture = measures.Mixture(tuple(weights), tuple(components))
    if request.method == "oracle":
        report = measures.oracle_report(
            "mixture_energy",
            oracle.integrate_mixture_square(mixture.weights, mixture.components, cfg),
        )
    else:
        report = measures.mixture_energy(mixture)
    inputs = {
        "family": mixture.family.family_id,
        "components": described,
        "weights": list(mixture.weights),
        "method": request.method,
    }
    document = {"command": "mixture", "inputs": inputs, **report.to_dict()}
    if request.show_natural:
        document["natural"] = {"components": [_natural(c) for c in components]}
    return document


def _comparison(
    check: str,
    closed: float,
    reference: float,
    rtol: float,
    expected_disagreement: bool = False,
) -> Dict[str, Any]:
    abs_delta = abs(closed - reference)
    rel_delta = abs_delta / abs(reference) if reference else abs_delta
    return {
        "check": check,
        "closed": closed,
        "oracle": reference,
        "abs_delta": abs_delta,
        "rel_delta": rel_delta,
        "rtol": rtol,
        "passed": bool(rel_delta <= rtol),
        "expected_disagreement": expected_disagreement,
    }


def verify_entry(
    entry: CatalogEntry, cfg: oracle.QuadratureConfig, tolerances: Tolerances
) -> List[Dict[str, Any]]:
    """
    Closed form vs oracle on the entry's default grid.

    Per grid point: energy, entropy and the printed table expressions; per
    consecutive pair: cross energy. The literal Beta table expression is
    reported as an expected disagreement and never fails verification.
    """
    family = entry.descriptor
    grid = entry.default_grid
    rows: List[Dict[str, Any]] = []
    densities = [density(family, coords) for coords in grid]
    for index, (coords, p) in enumerate(zip(grid, densities)):
        params = describe_source(entry, coords)
        logger.debug("Verifying %s grid point %d: %s", family.family_id, index, params)
        energy = measures.energy(p).value
        energy_oracle = _oracle_value(oracle.integrate_product(p, p, cfg))
        entropy = measures.shannon_entropy(p).value
        entropy_oracle = _oracle_value(oracle.entropy_integral(p, cfg))
        vector = np.asarray(coords, dtype=float)

        checks = [
            _comparison("energy", energy, energy_oracle, tolerances.oracle_rtol),
            _comparison(
                "entropy", entropy, entropy_oracle, tolerances.entropy_oracle_rtol
            ),
        ]
        if entry.closed_form_energy is not None:
            checks.append(
                _comparison(
                    "table_energy",
                    entry.closed_form_energy(vector),
                    energy,
                    tolerances.closed_form_rtol,
                )
            )
        if entry.closed_form_entropy is not None:
            checks.append(
                _comparison(
                    "table_entropy",
                    entry.closed_form_entropy(vector),
                    entropy,
                    tolerances.closed_form_rtol,
                )
            )
        if entry.literal_table_energy is not None:
            checks.append(
                _comparison(
                    "table_energy_literal",
                    entry.literal_table_energy(vector),
                    energy_oracle,
                    tolerances.oracle_rtol,
                    expected_disagreement=True,
                )
            )
        for check in checks:
            rows.append(
                {"family": family.family_id, "index": index, "params": params, **check}
            )

    for index in range(len(densities) - 1):
        p, q = densities[index], densities[index + 1]
        check = _comparison(
            "cross_energy",
            measures.cross_energy(p, q).value,
            _oracle_value(oracle.integrate_product(p, q, cfg)),
            tolerances.oracle_rtol,
        )
        params = {
            "p": describe_source(entry, grid[index]),
            "q": describe_source(entry, grid[index + 1]),
        }
        rows.append(
            {
                "family": family.family_id,
                "index": f"{index}-{index + 1}",
                "params": params,
                **check,
            }
        )
    return rows


def _selected_families(text: Optional[str]) -> List[str]:
    if not text or text == "all":
        return list(FAMILY_NAMES)
    names = [name.strip() for name in text.split(",") if name.strip()]
    unknown = [name for name in names if name not in FAMILY_NAMES]
    if unknown:
        raise UsageError(
            f"Unknown family {unknown}; expected one of {', '.join(FAMILY_NAMES)}"
        )
    return names


def run_verify(
    request: Request, cfg: oracle.QuadratureConfig, tolerances: Tolerances
) -> Dict[str, Any]:
    """Verification document; ``passed`` is false if any unflagged row fails."""
    if request.grid != "default":
        raise UsageError(f"Unknown grid '{request.grid}'; only 'default' is available")
    rows: List[Dict[str, Any]] = []
    for name in _selected_families(request.family):
        rows.extend(verify_entry(make_entry(name), cfg, tolerances))
    passed = all(row["passed"] or row["expected_disagreement"] for row in rows)
    return {"command": "verify", "grid": request.grid, "passed": passed, "rows": rows}


def emit_table(
    families: Sequence[str], cfg: oracle.QuadratureConfig
) -> List[Dict[str, Any]]:
    """
    One row per default table entry of the requested families: closed-form
    and oracle entropy and energy with their absolute differences.
    """
    rows = []
    for name, params_text in TABLE_ROWS:
        if name not in families:
            continue
        entry, coords = resolve_entry(name, parse_param_string(params_text))
        p = density(entry.descriptor, coords)
        entropy = measures.shannon_entropy(p).value
        entropy_oracle = _oracle_value(oracle.entropy_integral(p, cfg))
        row: Dict[str, Any] = {
            "family": p.family.family_id,
            "params": describe_source(entry, coords),
            "entropy_closed": entropy,
            "entropy_oracle": entropy_oracle,
            "entropy_delta": abs(entropy - entropy_oracle),
        }
        try:
            energy = measures.energy(p).value
        except EnergyUndefined as exc:
            logger.info("Energy undefined for %s: %s", p, exc)
            row.update(
                energy_closed="EnergyUndefined", energy_oracle=None, energy_delta=None
            )
        else:
            energy_oracle = _oracle_value(oracle.integrate_product(p, p, cfg))
            row.update(
                energy_closed=energy,
                energy_oracle=energy_oracle,
                energy_delta=abs(energy - energy_oracle),
            )
        rows.append(row)
    return rows


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    if isinstance(value, dict):
        return ";".join(f"{k}={_cell(v)}" for k, v in sorted(value.items()))
    if isinstance(value, list):
        return " ".join(_cell(v) for v in value)
    return str(value)


def render(document: Dict[str, Any], output: str) -> str:
    """Render a document as JSON, CSV (header row first) or plain text."""
    if output == "json":
        return canonical_json(document) + "\n"

    if "rows" in document:
        columns = TABLE_COLUMNS if document["command"] == "table" else VERIFY_COLUMNS
        rows = document["rows"]
    else:
        columns = SCALAR_COLUMNS
        rows = [{**document, "family": document["inputs"]["family"]}]

    if output == "csv":
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])
        return buffer.getvalue()

    lines = []
    for row in rows:
        lines.append("  ".join(f"{column}={_cell(row.get(column))}" for column in columns))
    if "rows" not in document:
        for key, value in sorted(document.get("diagnostics", {}).items()):
            lines.append(f"  {key}: {_cell(value)}")
    return "\n".join(lines) + "\n"


def build_config(request: Request) -> Tuple[oracle.QuadratureConfig, Tolerances]:
    """Settings precedence: flags > settings file > built-ins."""
    settings = resolve_settings({"quadrature": request.quadrature}, request.config)
    return oracle.QuadratureConfig(**settings["quadrature"]), Tolerances.from_settings(
        settings
    )


def execute(request: Request) -> Tuple[Dict[str, Any], int]:
    """Evaluate a request into its output document and exit status."""
    cfg, tolerances = build_config(request)
    if request.command == "verify":
        document = run_verify(request, cfg, tolerances)
        return document, EXIT_OK if document["passed"] else EXIT_USAGE
    if request.command == "table":
        families = _selected_families(request.families)
        return {"command": "table", "rows": emit_table(families, cfg)}, EXIT_OK
    if request.command == "mixture":
        return run_mixture(request, cfg), EXIT_OK
    return run_measure(request, cfg), EXIT_OK


def run(request: Request, stream: Optional[TextIO] = None) -> int:
    """
    Execute a request, write its document to ``stream`` and return the exit
    status. Errors are reported on stderr as ``Error: ...``.
    """
    stream = stream or sys.stdout
    try:
        document, status = execute(request)
    except DomainViolation as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except oracle.NotConverged as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except ValueError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    stream.write(render(_clean(document), request.output))
    return status


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--output", choices=("json", "csv", "text"), default="json", help="Output format"
    )
    parser.add_argument("--config", help="Settings file (JSON); overrides ONICESCU_CONFIG")
    parser.add_argument("--abs-tol", type=float, help="Oracle absolute tolerance")
    parser.add_argument("--rel-tol", type=float, help="Oracle relative tolerance")
    parser.add_argument(
        "--max-subdivisions", type=int, help="Oracle subinterval limit"
    )
    parser.add_argument(
        "--transform",
        choices=[t.value for t in oracle.Transform],
        help="Half-line transform used by the oracle",
    )
    parser.add_argument("--verbose", action="store_true", help="Debug logging on stderr")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per measure."""
    parser = OnicescuArgumentParser(
        description="Onicescu informational energy and related measures "
        "on exponential families"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        _add_common(sub)
        if command == "table":
            sub.add_argument("--families", help="Comma-separated families (default: all)")
            continue
        if command == "verify":
            sub.add_argument("--family", help="Family name or 'all' (default)")
            sub.add_argument("--grid", default="default", help="Parameter grid")
            continue
        sub.add_argument("--family", help=f"Family name: {', '.join(FAMILY_NAMES)}")
        sub.add_argument("--method", choices=METHODS, default="auto")
        sub.add_argument("--show-natural", action="store_true")
        if command == "mixture":
            sub.add_argument("--weights", help="Comma-separated mixture weights")
            sub.add_argument(
                "--component",
                action="append",
                default=[],
                help="Component parameters (repeatable)",
            )
            continue
        sub.add_argument("--params", help="Source parameters, e.g. mu=0,sigma=1")
        sub.add_argument("--omega", help="Support point for the omega-trick")
        if command in PAIR_COMMANDS:
            sub.add_argument("--params2", help="Source parameters of the second density")
        if command == "holder":
            sub.add_argument("--alpha", type=float)
            sub.add_argument("--gamma", type=float)
    return parser


def request_from_args(args: argparse.Namespace) -> Request:
    """Translate parsed arguments into a Request."""
    quadrature = {
        "abs_tol": args.abs_tol,
        "rel_tol": args.rel_tol,
        "max_subdivisions": args.max_subdivisions,
        "transform": args.transform,
    }
    return Request(
        command=args.command,
        family=getattr(args, "family", None),
        params=getattr(args, "params", None),
        params2=getattr(args, "params2", None),
        method=getattr(args, "method", "auto"),
        omega=getattr(args, "omega", None),
        output=args.output,
        show_natural=getattr(args, "show_natural", False),
        alpha=getattr(args, "alpha", None),
        gamma=getattr(args, "gamma", None),
        weights=getattr(args, "weights", None),
        components=list(getattr(args, "component", [])),
        grid=getattr(args, "grid", "default"),
        families=getattr(args, "families", None),
        config=args.config,
        quadrature={k: v for k, v in quadrature.items() if v is not None},
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and run the requested command."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    return run(request_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
