"""CSV and JSON encodings of speed-up reports.

Exact values are written as ``"p/q"`` strings, floats as numbers, so a JSON
report reads back with the same types it was written with.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any, Iterable, Optional

from .core import PerBox, SpeedupReport, StrategyId
from .exact import compare_to_bound

CSV_FIELDS = (
    "strategy", "k", "m", "mode", "theta", "speedup_inv_theta", "speedup_mean",
    "stderr", "trials", "seed", "bound", "ratio",
)

_NUMERIC = ("theta", "speedup_inv_theta", "speedup_mean", "stderr")


def encode_number(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def decode_number(v):
    if isinstance(v, str):
        return Fraction(v)
    return v


def format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, StrategyId):
        return v.value
    return str(v)


def report_to_dict(report: SpeedupReport) -> dict[str, Any]:
    d: dict[str, Any] = {
        "strategy": report.strategy.value if report.strategy else None,
        "k": report.k,
        "m": report.m,
        "mode": report.mode,
        "numeric_mode": report.numeric_mode,
        "placement": report.placement,
    }
    for name in _NUMERIC:
        d[name] = encode_number(getattr(report, name))
    d.update(
        trials=report.trials,
        seed=report.seed,
        valid=report.valid,
        not_found=report.not_found,
        rng_scheme=report.rng_scheme,
    )
    if report.per_x is not None:
        d["per_x"] = [
            {"x": p.x, "expected_time": encode_number(p.expected_time), "theta_x": encode_number(p.theta_x)}
            for p in report.per_x
        ]
    else:
        d["per_x"] = None
    return d


def report_from_dict(d: dict[str, Any]) -> SpeedupReport:
    per_x = d.get("per_x")
    if per_x is not None:
        per_x = [PerBox(p["x"], decode_number(p["expected_time"]), decode_number(p["theta_x"])) for p in per_x]
    return SpeedupReport(
        strategy=StrategyId.parse(d["strategy"]) if d.get("strategy") else None,
        k=d["k"],
        m=d["m"],
        theta=decode_number(d["theta"]),
        speedup_inv_theta=decode_number(d["speedup_inv_theta"]),
        speedup_mean=decode_number(d.get("speedup_mean")),
        per_x=per_x,
        stderr=d.get("stderr"),
        trials=d.get("trials"),
        seed=d.get("seed"),
        mode=d.get("mode", "exact"),
        numeric_mode=d.get("numeric_mode"),
        placement=d.get("placement", "uniform"),
        valid=d.get("valid", True),
        not_found=d.get("not_found", 0),
        rng_scheme=d.get("rng_scheme"),
    )


def _bound_fields(report: SpeedupReport) -> tuple[Optional[Fraction], Optional[float], Optional[str]]:
    try:
        cmp = compare_to_bound(report)
    except ValueError:
        return None, None, None
    return cmp.bound.value, cmp.ratio, cmp.bound.kind.value


def report_record(report: SpeedupReport, extra: Optional[dict] = None) -> dict[str, Any]:
    """JSON object for one report: the report itself plus its bound comparison."""
    d = report_to_dict(report)
    bound, ratio, kind = _bound_fields(report)
    d["bound"] = encode_number(bound)
    d["bound_kind"] = kind
    d["ratio"] = ratio
    if extra:
        d.update(extra)
    return d


def report_csv_row(report: SpeedupReport) -> list[str]:
    bound, ratio, _ = _bound_fields(report)
    values = {
        "strategy": report.strategy,
        "k": report.k,
        "m": report.m,
        "mode": report.mode,
        "theta": report.theta,
        "speedup_inv_theta": report.speedup_inv_theta,
        "speedup_mean": report.speedup_mean,
        "stderr": report.stderr,
        "trials": report.trials,
        "seed": report.seed,
        "bound": bound,
        "ratio": ratio,
    }
    return [format_cell(values[f]) for f in CSV_FIELDS]


def write_csv(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header))
    for row in rows:
        w.writerow([format_cell(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


def reports_csv(reports: Iterable[SpeedupReport]) -> str:
    return write_csv(CSV_FIELDS, (report_csv_row(r) for r in reports))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, default=encode_number) + "\n"
