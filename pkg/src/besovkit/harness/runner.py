"""run_all: configure batteries, execute checks, gate against baselines, write reports."""

from __future__ import annotations

import datetime as _dt
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .. import __version__
from .batteries import PROFILES, Battery, battery_hash
from .checks import CHECKS, Record, run_checks
from .report import build_report, gate, load_baseline, summarise, write_baseline, write_report

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

DEFAULT_CONFIG = {"profile": "default", "seed": 0, "checks": sorted(CHECKS), "jobs": 1}


def load_config(path: str | Path | None) -> dict:
    """Merge a TOML file (flat key = value pairs) over the defaults."""
    overrides = {}
    if path is not None:
        with open(path, "rb") as fh:
            overrides = tomllib.load(fh)
    return resolve_config(overrides)


def resolve_config(overrides: dict) -> dict:
    cfg = dict(DEFAULT_CONFIG)
    cfg.update(overrides)
    unknown = set(cfg["checks"]) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {sorted(unknown)}")
    prof = PROFILES.get(cfg["profile"])
    if prof is None:
        raise ValueError(f"unknown profile {cfg['profile']!r}; known: {sorted(PROFILES)}")
    cfg.setdefault("heavy", prof["heavy"])
    cfg.setdefault("small", prof["small"])
    cfg["checks"] = sorted(cfg["checks"])
    return cfg


def _hash_config(cfg: dict) -> str:
    keyed = {k: cfg[k] for k in ("heavy", "small", "seed", "checks")}
    keyed["version"] = __version__
    return battery_hash(keyed)


def _run_battery(args) -> tuple[str, list[Record], dict]:
    descriptor, role, seed, checks = args
    b = Battery(descriptor, seed=seed, role=role)
    records = run_checks(b, checks)
    return b.name, records, b.geometry.to_dict()


def run_all(config: dict, baseline_dir: str | Path | None = None,
            out_dir: str | Path | None = None, timestamp: str | None = None) -> tuple[dict, int]:
    """Run every configured check and return (report, exit code)."""
    cfg = resolve_config(config)
    h = _hash_config(cfg)
    jobs = [(d, role, int(cfg["seed"]), cfg["checks"])
            for role in ("heavy", "small") for d in cfg[role]]
    if int(cfg["jobs"]) > 1:
        with ProcessPoolExecutor(max_workers=int(cfg["jobs"])) as pool:
            results = list(pool.map(_run_battery, jobs))
    else:
        results = [_run_battery(j) for j in jobs]
    results.sort(key=lambda r: r[0])
    records = [r for _, recs, _ in results for r in recs]
    geometry = {name: geo for name, _, geo in results}
    summaries = summarise(records)
    baseline = load_baseline(Path(baseline_dir), h) if baseline_dir is not None else None
    mode = "record" if baseline is None else "compare"
    gate(summaries, baseline)
    passed = all(s.status == "pass" for s in summaries)
    if mode == "record" and baseline_dir is not None and passed:
        write_baseline(Path(baseline_dir), h, summaries)
    stamp = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    report = build_report(records, summaries, {k: cfg[k] for k in sorted(cfg)}, h, mode, stamp,
                          geometry)
    if out_dir is not None:
        write_report(report, Path(out_dir))
    for s in summaries:
        if s.status != "pass":
            log.warning("%s on %s failed: %s", s.check, s.battery, ", ".join(s.reasons))
    return report, 0 if passed else 1
