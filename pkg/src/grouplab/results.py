"""Result rows with verdicts, and their CSV/JSON serialisation."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Optional, Union

COLUMNS = ("experiment", "group", "params", "measured", "ci", "bound_name", "bound", "verdict")
VERDICTS = ("PASS", "FAIL", "INFO")

Number = Union[int, float, Fraction]


@dataclass
class ResultRow:
    experiment: str
    group: str
    params: dict = field(default_factory=dict)
    measured: Optional[Number] = None
    ci: Optional[float] = None
    bound_name: str = ""
    bound: Optional[Number] = None
    verdict: str = "INFO"

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")

    @property
    def passed(self) -> bool:
        return self.verdict != "FAIL"


def bound_row(experiment: str, group: str, params: dict, measured: Number, ci: Optional[float],
              bound_name: str, bound: Number) -> ResultRow:
    """Upper-bound claim: PASS iff ``measured <= bound + ci``."""
    slack = ci or 0
    ok = measured <= bound + slack
    return ResultRow(experiment, group, params, measured, ci, bound_name, bound, "PASS" if ok else "FAIL")


def floor_row(experiment: str, group: str, params: dict, measured: Number, ci: Optional[float],
              bound_name: str, floor: Number) -> ResultRow:
    """Lower-bound claim: PASS iff ``measured >= floor``."""
    ok = measured >= floor
    return ResultRow(experiment, group, params, measured, ci, bound_name, floor, "PASS" if ok else "FAIL")


def near_row(experiment: str, group: str, params: dict, measured: Number, tolerance: float,
             bound_name: str, target: Number) -> ResultRow:
    """Two-sided claim: PASS iff ``|measured - target| <= tolerance``; the ci column holds the tolerance."""
    ok = abs(measured - target) <= tolerance
    return ResultRow(experiment, group, params, measured, tolerance, bound_name, target, "PASS" if ok else "FAIL")


def equality_row(experiment: str, group: str, params: dict, measured, expected, name: str) -> ResultRow:
    """Exact claim: PASS only on literal equality."""
    return ResultRow(experiment, group, params, measured, None, name, expected,
                     "PASS" if measured == expected else "FAIL")


def info_row(experiment: str, group: str, params: dict, measured, name: str = "", value=None) -> ResultRow:
    return ResultRow(experiment, group, params, measured, None, name, value, "INFO")


# --- formatting ----------------------------------------------------------------


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return str(v)
        return f"{v:.6g}"
    return str(v)


def parse_value(text: str):
    if text == "":
        return None
    if "/" in text:
        p, q = text.split("/", 1)
        return Fraction(int(p), int(q))
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def format_params(params: dict) -> str:
    return ";".join(f"{k}={format_value(v)}" for k, v in params.items())


def parse_params(text: str) -> dict:
    if not text:
        return {}
    out = {}
    for part in text.split(";"):
        k, _, v = part.partition("=")
        out[k] = parse_value(v)
    return out


def row_to_record(row: ResultRow) -> dict:
    """Flat string-valued record, shared by both output formats."""
    return {
        "experiment": row.experiment,
        "group": row.group,
        "params": format_params(row.params),
        "measured": format_value(row.measured),
        "ci": format_value(row.ci),
        "bound_name": row.bound_name,
        "bound": format_value(row.bound),
        "verdict": row.verdict,
    }


def record_to_row(rec: dict) -> ResultRow:
    missing = [c for c in COLUMNS if c not in rec]
    if missing:
        raise ValueError(f"result record lacks field(s) {missing}")
    return ResultRow(
        rec["experiment"],
        rec["group"],
        parse_params(rec["params"]),
        parse_value(rec["measured"]),
        parse_value(rec["ci"]),
        rec["bound_name"],
        parse_value(rec["bound"]),
        rec["verdict"],
    )


def to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(row_to_record(r))
    return buf.getvalue()


def to_json(rows: Iterable[ResultRow]) -> str:
    return json.dumps([row_to_record(r) for r in rows], indent=2) + "\n"


def emit(rows: Iterable[ResultRow], fmt: str = "csv", path: Optional[Union[str, Path]] = None) -> str:
    """Serialise rows; write to ``path`` when given and return the text either way."""
    rows = list(rows)
    if fmt == "csv":
        text = to_csv(rows)
    elif fmt == "json":
        text = to_json(rows)
    else:
        raise ValueError(f"unknown format {fmt!r}; expected csv or json")
    if path is not None:
        Path(path).write_text(text)
    return text


def loads(text: str) -> list[ResultRow]:
    """Parse CSV or JSON output back into rows (format detected from the first character)."""
    stripped = text.lstrip()
    if stripped.startswith("["):
        return [record_to_row(r) for r in json.loads(stripped)]
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != COLUMNS:
        raise ValueError("not a result CSV: unexpected header")
    return [record_to_row(r) for r in reader]


def load(path: Union[str, Path]) -> list[ResultRow]:
    return loads(Path(path).read_text())


def render_table(rows: Iterable[ResultRow]) -> str:
    """Fixed-width comparison table with a verdict tally."""
    recs = [row_to_record(r) for r in rows]
    cols = ("experiment", "group", "params", "measured", "ci", "bound_name", "bound", "verdict")
    widths = {c: max([len(c)] + [len(r[c]) for r in recs]) for c in cols}
    lines = ["  ".join(c.ljust(widths[c]) for c in cols)]
    lines.append("  ".join("-" * widths[c] for c in cols))
    for r in recs:
        lines.append("  ".join(r[c].ljust(widths[c]) for c in cols))
    tally = {v: sum(1 for r in recs if r["verdict"] == v) for v in VERDICTS}
    lines.append("")
    lines.append(" ".join(f"{v}={n}" for v, n in tally.items()))
    return "\n".join(lines) + "\n"
