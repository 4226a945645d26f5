"""CSV and JSON encodings of simulation results.

Every file carries ``schema_version`` and the full command configuration, so
re-running the same command with that configuration reproduces the payload
byte for byte.  CSV files put this in ``#`` comment lines above the header;
read them with e.g. ``pandas.read_csv(path, comment="#")``.
"""
from __future__ import annotations

import io
import json
import math
from typing import Any, Iterable, Sequence

from .engine import CorrelationCurve
from .reference import ReferenceCurve
from .rng import GENERATOR_ID
from .statistics import ChshReport, NoDataError, SPhiCurve, visibility

SCHEMA_VERSION = "eprsim/1"

SWEEP_COLUMNS = ("alpha_rad", "n_pp", "n_pm", "n_mp", "n_mm", "n_discarded")
CHSH_COLUMNS = (
    "threshold",
    "decoherence",
    "runs",
    "pairs",
    "mean_s",
    "abs_mean_s",
    "std_dev",
    "std_err",
    "violation_sigma",
    "s_values",
)
SPHI_COLUMNS = ("threshold", "phi_rad", "s", "std_dev")
REFERENCE_COLUMNS = ("delta_rad", "expected_count")


def _num(x: Any) -> Any:
    """JSON-safe number: non-finite floats become strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _fmt(x: Any) -> str:
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def envelope(command: str, config: dict, payload: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "generator": GENERATOR_ID,
        "command": command,
        "config": config,
        "payload": payload,
    }


def _csv(preamble: dict, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    for k, v in preamble.items():
        text = v if isinstance(v, str) else json.dumps(v, sort_keys=True, allow_nan=False)
        buf.write(f"# {k}={text}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(x) for x in row) + "\n")
    return buf.getvalue()


def _preamble(command: str, config: dict, **extra: Any) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "generator": GENERATOR_ID, "command": command, "config": config}
    out.update(extra)
    return out


# --- sweep --------------------------------------------------------------------


def safe_visibility(curve) -> float | None:
    try:
        return visibility(curve)
    except NoDataError:
        return None


def curve_payload(curve: CorrelationCurve) -> dict:
    return {
        "run_index": curve.run_index,
        "run_config": curve.config.to_dict(),
        "records": [
            dict(zip(SWEEP_COLUMNS, (a, *c.as_tuple()))) for a, c in curve.points
        ],
        "summary": {"visibility": safe_visibility(curve), "n_settings": len(curve)},
    }


def sweep_json(config: dict, curves: Sequence[CorrelationCurve]) -> str:
    return dumps_json(envelope("sweep", config, {"kind": "correlation_curve", "curves": [curve_payload(c) for c in curves]}))


def sweep_csv(config: dict, curve: CorrelationCurve) -> str:
    vis = safe_visibility(curve)
    pre = _preamble("sweep", config, run_index=str(curve.run_index), visibility=_fmt(vis) or "undefined")
    return _csv(pre, SWEEP_COLUMNS, ((a, *c.as_tuple()) for a, c in curve.points))


# --- chsh ---------------------------------------------------------------------


def chsh_row(threshold: float, decoherence: float, pairs: int, report: ChshReport) -> dict:
    return {
        "threshold": threshold,
        "decoherence": decoherence,
        "runs": len(report.s_values),
        "pairs": pairs,
        "mean_s": report.mean,
        "abs_mean_s": report.abs_mean,
        "std_dev": report.std_dev,
        "std_err": report.std_err,
        "violation_sigma": _num(report.violation_sigma),
        "s_values": list(report.s_values),
        "settings_rad": [list(s) for s in report.settings],
    }


def chsh_json(config: dict, rows: Sequence[dict]) -> str:
    return dumps_json(envelope("chsh", config, {"kind": "chsh_report", "grid": list(rows)}))


def chsh_csv(config: dict, rows: Sequence[dict]) -> str:
    def line(r: dict):
        return (*(r[c] for c in CHSH_COLUMNS[:-1]), ";".join(repr(s) for s in r["s_values"]))

    return _csv(_preamble("chsh", config), CHSH_COLUMNS, (line(r) for r in rows))


# --- sphi ---------------------------------------------------------------------


def sphi_json(config: dict, curves: Sequence[tuple[float, SPhiCurve]]) -> str:
    payload = {
        "kind": "s_phi_curve",
        "curves": [
            {
                "threshold": t,
                "records": [
                    {"phi_rad": p, "s": s, "std_dev": sd}
                    for (p, s), sd in zip(c.points, c.std_dev)
                ],
            }
            for t, c in curves
        ],
    }
    return dumps_json(envelope("sphi", config, payload))


def sphi_csv(config: dict, curves: Sequence[tuple[float, SPhiCurve]]) -> str:
    rows = ((t, p, s, sd) for t, c in curves for (p, s), sd in zip(c.points, c.std_dev))
    return _csv(_preamble("sphi", config), SPHI_COLUMNS, rows)


# --- reference ----------------------------------------------------------------


def reference_json(config: dict, curve: ReferenceCurve) -> str:
    payload = {
        "kind": "reference_curve",
        "label": curve.label,
        "records": [{"delta_rad": d, "expected_count": v} for d, v in curve.points],
        "summary": {"visibility": safe_visibility(curve)},
    }
    return dumps_json(envelope("reference", config, payload))


def reference_csv(config: dict, curve: ReferenceCurve) -> str:
    vis = safe_visibility(curve)
    pre = _preamble("reference", config, model=curve.label, visibility=_fmt(vis) or "undefined")
    return _csv(pre, REFERENCE_COLUMNS, curve.points)


def read_preamble(text: str) -> dict:
    """Parse the ``# key=value`` lines of a CSV file produced here."""
    out: dict[str, Any] = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition("=")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out
