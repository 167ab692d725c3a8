"""CSV and JSON writers for experiment reports.

Data sections are formatted with a fixed float representation so that
repeated runs with the same spec and seed are byte-identical. Wall times
and the timestamp live only in ``#`` comment lines (CSV) or under the
``timing`` key (JSON).
"""

import datetime
import json
import math

import numpy as np


def fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "nan" if math.isnan(v) else repr(v)
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def _header(spec, report):
    lines = [f"# timestamp: {datetime.datetime.now(datetime.timezone.utc).isoformat()}"]
    lines.append("# spec: " + json.dumps(_jsonable(spec.echo()), sort_keys=True))
    lines.append("# summary: " + json.dumps(_jsonable(report.summary), sort_keys=True))
    for row in report.timing:
        lines.append("# wall_time: " + ",".join(fmt(v) for v in row))
    if "timing_summary" in report.extra:
        lines.append("# wall_time_summary: " + json.dumps(_jsonable(report.extra["timing_summary"]), sort_keys=True))
    return lines


def bursts_csv(bursts):
    """Micro burst samples, one block per burst separated by blank lines."""
    blocks = []
    for b in bursts or []:
        blocks.append("\n".join(",".join(fmt(v) for v in (t, *u)) for t, u in zip(b.times, b.states)))
    return "\n\n".join(blocks)


def to_csv(spec, report):
    lines = _header(spec, report)
    lines.append(",".join(report.columns))
    lines.extend(",".join(fmt(v) for v in row) for row in report.rows)
    text = "\n".join(lines) + "\n"
    bursts = report.extra.get("bursts")
    if bursts:
        text += "\n# micro bursts: t," + ",".join(f"u{i + 1}" for i in range(bursts[0].states.shape[1])) + "\n"
        text += bursts_csv(bursts) + "\n"
    return text


def to_json(spec, report):
    doc = {
        "spec": spec.echo(),
        "summary": report.summary,
        "columns": report.columns,
        "rows": report.rows,
    }
    res = report.extra.get("result")
    if res is not None:
        doc["T"] = res.macro_times
        doc["X"] = res.macro_states
        doc["tms"] = [b.times for b in res.bursts or []]
        doc["xms"] = [b.states for b in res.bursts or []]
        doc["svf"] = {"t": res.svf_times, "dX": res.svf_dX}
    if "manifest" in report.extra:
        doc["manifest"] = report.extra["manifest"]
    if "summary_rows" in report.extra:
        doc["summary_rows"] = [{k: v for k, v in r.items() if not k.startswith("wall")} for r in report.extra["summary_rows"]]
    doc["timing"] = {
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "wall_time": report.timing,
        "summary": report.extra.get("timing_summary"),
    }
    return json.dumps(_jsonable(doc), indent=1, sort_keys=True) + "\n"


def strip_volatile(text):
    """Drop timestamp and wall-time lines, for comparing two CSV outputs."""
    return "\n".join(l for l in text.splitlines() if not l.startswith(("# timestamp", "# wall_time")))


def render(spec, report):
    return to_json(spec, report) if spec.format == "json" else to_csv(spec, report)
