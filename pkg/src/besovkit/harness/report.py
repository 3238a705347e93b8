"""Empirical constants, baseline gating and report serialisation."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .checks import Record

ZERO_TOL = 1e-12
BASELINE_SLACK = 1.1
LARGE_CONSTANT = 1e4
SANDWICH_CAP = 100.0

PASS, FAIL = "pass", "fail"


def is_zero(x: float, scale: float) -> bool:
    return abs(x) <= ZERO_TOL * scale


def record_ratio(r: Record) -> float | None:
    """lhs/rhs when both sides are positive; None when both vanish; inf when only rhs does."""
    lz, rz = is_zero(r.lhs, r.scale), is_zero(r.rhs, r.scale)
    if lz:
        return None
    if rz:
        return math.inf
    return r.lhs / r.rhs


@dataclass
class CheckSummary:
    check: str
    battery: str
    constant: float
    records: int
    zero_pairs: int
    violations: int
    nonfinite: int
    baseline: float | None = None
    status: str = PASS
    reasons: tuple = ()

    @property
    def key(self) -> str:
        return f"{self.check}|{self.battery}"

    def to_dict(self) -> dict:
        return {"check_id": self.check, "battery": self.battery, "constant": _num(self.constant),
                "records": self.records, "zero_pairs": self.zero_pairs,
                "violations": self.violations, "nonfinite": self.nonfinite,
                "baseline": _num(self.baseline), "pass": self.status == PASS,
                "reasons": list(self.reasons)}


def _num(x):
    if x is None:
        return None
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def summarise(records: list[Record]) -> list[CheckSummary]:
    groups: dict[tuple[str, str], list[Record]] = {}
    for r in records:
        groups.setdefault((r.check, r.battery), []).append(r)
    out = []
    for (check, battery), recs in sorted(groups.items()):
        const, zeros, viol, nonfin = 0.0, 0, 0, 0
        for r in recs:
            if not (math.isfinite(r.lhs) and math.isfinite(r.rhs)):
                nonfin += 1
                continue
            q = record_ratio(r)
            if q is None:
                zeros += 1
            elif math.isinf(q):
                viol += 1
            else:
                const = max(const, q)
        out.append(CheckSummary(check, battery, const, len(recs), zeros, viol, nonfin))
    return out


def gate(summaries: list[CheckSummary], baseline: dict[str, float] | None) -> None:
    """Set status and reasons in place; baseline None means record mode."""
    for s in summaries:
        reasons = []
        if s.violations:
            reasons.append("inequality violated")
        if s.nonfinite:
            reasons.append("non-finite side")
        if s.check.startswith("sandwich") and s.constant > SANDWICH_CAP:
            reasons.append(f"sandwich constant above {SANDWICH_CAP:g}")
        if baseline is not None:
            s.baseline = baseline.get(s.key)
            if s.baseline is None:
                reasons.append("no baseline entry")
            elif s.constant > s.baseline * BASELINE_SLACK + 1e-300:
                reasons.append(f"constant above baseline x{BASELINE_SLACK:g}")
        flag = ("large constant",) if s.constant > LARGE_CONSTANT else ()
        s.status = FAIL if reasons else PASS
        s.reasons = tuple(reasons) + flag


def baseline_path(directory: Path, config_hash: str) -> Path:
    return Path(directory) / f"baseline-{config_hash}.json"


def load_baseline(directory: Path | None, config_hash: str) -> dict[str, float] | None:
    if directory is None:
        return None
    path = baseline_path(directory, config_hash)
    if not path.exists():
        return None
    data = json.loads(path.read_text())
    if data.get("config_hash") != config_hash:
        return None
    return {k: float(v) for k, v in data["constants"].items()}


def write_baseline(directory: Path, config_hash: str, summaries: list[CheckSummary]) -> Path:
    path = baseline_path(directory, config_hash)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = {"config_hash": config_hash, "constants": {s.key: s.constant for s in summaries}}
    path.write_text(json.dumps(data, indent=1, sort_keys=True))
    return path


def build_report(records: list[Record], summaries: list[CheckSummary], config: dict,
                 config_hash: str, mode: str, timestamp: str, geometry: dict) -> dict:
    by_key = {s.key: s for s in summaries}
    rows = []
    for r in sorted(records, key=lambda r: (r.check, r.battery, r.field,
                                            json.dumps(r.params, sort_keys=True))):
        s = by_key[f"{r.check}|{r.battery}"]
        q = record_ratio(r)
        row = r.to_dict()
        row.update(lhs=_num(r.lhs), rhs=_num(r.rhs), ratio=_num(q),
                   constant=_num(s.constant), **{"pass": s.status == PASS})
        rows.append(row)
    body = {
        "config": config,
        "config_hash": config_hash,
        "mode": mode,
        "geometry": geometry,
        "summary": [s.to_dict() for s in summaries],
        "records": rows,
        "passed": all(s.status == PASS for s in summaries),
    }
    body["report_hash"] = report_hash(body)
    body["timestamp"] = timestamp
    return body


def report_hash(report: dict) -> str:
    """Hash of the report content with the timestamp and the hash itself removed."""
    body = {k: v for k, v in report.items() if k not in ("timestamp", "report_hash")}
    return hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()


def write_report(report: dict, out_dir: Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jpath, cpath = out_dir / "report.json", out_dir / "report.csv"
    jpath.write_text(json.dumps(report, indent=1, sort_keys=True))
    with cpath.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check_id", "battery", "field", "params", "lhs", "rhs", "ratio", "constant", "pass"])
        for row in report["records"]:
            w.writerow([row["check_id"], row["battery"], row["field"],
                        json.dumps(row["params"], sort_keys=True), row["lhs"], row["rhs"],
                        row["ratio"], row["constant"], row["pass"]])
    return jpath, cpath
