# formatter.py

import json
import logging
import math
from typing import Any, Dict, List

import numpy as np
from tabulate import tabulate

from errors import SolitonLabError
from reports import FunctionalReport


def _plain(value):
    """JSON-safe scalar: numpy types unwrapped, non-finite floats spelled out."""
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _flatten(data, prefix=""):
    out = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return f"{value:.12g}"
    return str(value)


def format_report(report: FunctionalReport, config: Dict[str, Any] = None) -> str:
    """
    Key-value text rendering: values and context as `key=value` lines, then the
    identity checks and any table rows through tabulate.
    """
    lines = [f"[{report.name}]", f"pass={report.passed}"]
    for key, value in _flatten(report.context).items():
        lines.append(f"context.{key}={_fmt(value)}")
    for key, value in report.values.items():
        lines.append(f"{key}={_fmt(value)}")

    if report.checks:
        table = [
            [c.name, c.relation, c.lhs, c.rhs, c.residual, c.tolerance,
             "report" if c.passed is None else ("pass" if c.passed else "FAIL")]
            for c in report.checks
        ]
        lines.append("")
        lines.append(tabulate(table, headers=["check", "relation", "lhs", "rhs", "residual", "tolerance", "status"],
                              floatfmt=".6g"))
    if report.rows:
        lines.append("")
        lines.append(tabulate(report.rows, headers="keys", floatfmt=".10g"))
    failures = report.failures()
    if failures:
        lines.append("")
        lines.append("failed=" + ",".join(failures))
    if config:
        lines.append("")
        for key, value in _flatten(config).items():
            lines.append(f"config.{key}={_fmt(value)}")
    return "\n".join(lines) + "\n"


def structured_report(report: FunctionalReport, config: Dict[str, Any] = None) -> Dict[str, Any]:
    """One object per report; every value and check is an entry with name, value, residual, tolerance, pass."""
    entries: List[Dict[str, Any]] = [
        {"name": key, "value": value, "residual": None, "tolerance": None, "pass": None}
        for key, value in report.values.items()
    ]
    entries.extend(
        {"name": c.name, "relation": c.relation, "value": c.lhs, "expected": c.rhs, "residual": c.residual,
         "tolerance": c.tolerance, "pass": c.passed}
        for c in report.checks
    )
    payload = {
        "name": report.name,
        "pass": report.passed,
        "entries": entries,
        "rows": report.rows,
        "context": report.context,
        "config": config or {},
    }
    return _plain(payload)


def render(reports: List[FunctionalReport], fmt="text", config: Dict[str, Any] = None) -> str:
    if fmt == "structured":
        return json.dumps([structured_report(r, config) for r in reports], indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"Unknown output format: {fmt}")
    return "\n".join(format_report(r, config) for r in reports)


def error_object(exc: Exception) -> Dict[str, Any]:
    """Machine-readable error: type name, message and the exception payload."""
    details = exc.details() if isinstance(exc, SolitonLabError) else {}
    logging.debug(f"Rendering error object for {type(exc).__name__}")
    return _plain({"error": type(exc).__name__, "message": str(exc), "details": details})
