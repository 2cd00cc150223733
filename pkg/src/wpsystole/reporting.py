"""CSV and JSON report writers and the verification suite record."""
import csv
import io
import json
import math
from dataclasses import dataclass, field

from . import __version__

CSV_HEADER = f"# wp-systole v{__version__} schema=1"
COLUMNS = ("g", "L", "mode", "value", "err", "constants")


def _num(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def rows_from_reports(reports):
    return [{"g": r.g, "L": r.L, "mode": r.mode, "value": r.value, "err": r.error_estimate,
             "constants": dict(sorted(r.constants_used.items())),
             "notes": list(r.notes), "components": dict(r.components), "omega": r.omega}
            for r in reports]


def render_csv(rows, config_snapshot):
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    buf.write("# config " + json.dumps(_jsonable(config_snapshot), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_num(row["g"]), _num(row["L"]), row["mode"], _num(row["value"]),
                    _num(row["err"]), json.dumps(_jsonable(row["constants"]), sort_keys=True)])
    return buf.getvalue()


def render_json(rows, config_snapshot):
    doc = {"schema": 1, "version": __version__, "config": config_snapshot,
           "columns": list(COLUMNS), "rows": rows}
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2) + "\n"


def render(rows, config_snapshot, fmt):
    return render_csv(rows, config_snapshot) if fmt == "csv" else render_json(rows, config_snapshot)


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    def add(self, name, status, inputs=None, **measured):
        if status not in ("pass", "fail", "skip"):
            raise ValueError(status)
        self.checks.append({"check": name, "status": status, "inputs": inputs or {},
                            "measured": measured})

    def record(self, name, ok, inputs=None, **measured):
        self.add(name, "pass" if ok else "fail", inputs, **measured)

    @property
    def failures(self):
        return [c for c in self.checks if c["status"] == "fail"]

    @property
    def passed(self):
        return not self.failures

    def as_dict(self):
        counts = {s: sum(c["status"] == s for c in self.checks) for s in ("pass", "fail", "skip")}
        return {"suite": self.suite, "summary": counts, "checks": self.checks, "config": self.config}

    def to_json(self):
        return json.dumps(_jsonable(self.as_dict()), sort_keys=True, indent=2) + "\n"
