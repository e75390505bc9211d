"""CSV and manifest output.

Per export entry ``name:metric`` in the config:

* ``regret``    -> ``name.csv``: pri, regret_mean, regret_stderr, algorithm
                   plus ``name_<other comparator>.csv`` in the same layout
* ``error``     -> ``name.csv``: cpi, pos_error_mean, pos_error_stderr, algorithm
* ``positions`` -> ``name.csv``: cpi, est_x, est_y, true_x, true_y, algorithm (trial 0 only)

``manifest.json`` echoes the resolved configuration and the files written.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .. import __version__
from ..core import SINGLE_BEST, TOP_N_SUM
from ..radar import target_track
from .runner import ExperimentResult


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def _write_rows(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _series_rows(result: ExperimentResult, metric: str):
    for label in result.config.labels:
        mean, stderr = result.aggregate(label, metric)
        for k, (m, s) in enumerate(zip(mean, stderr), start=1):
            yield (k, _fmt(m), _fmt(s), label)


def write_series(result: ExperimentResult, destination: str | Path) -> list[Path]:
    """Write every configured export into ``destination``; returns the files written."""
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    cfg = result.config
    written = []
    for name, metric in cfg.exports:
        path = out / f"{name}.csv"
        if metric == "regret":
            _write_rows(path, ["pri", "regret_mean", "regret_stderr", "algorithm"], _series_rows(result, "regret"))
            alt = SINGLE_BEST if cfg.comparator == TOP_N_SUM else TOP_N_SUM
            alt_path = out / f"{name}_{alt.replace('-', '_')}.csv"
            _write_rows(alt_path, ["pri", "regret_mean", "regret_stderr", "algorithm"], _series_rows(result, "regret_alt"))
            written += [path, alt_path]
            continue
        if metric == "error":
            _write_rows(path, ["cpi", "pos_error_mean", "pos_error_stderr", "algorithm"], _series_rows(result, "error"))
        else:
            truth = target_track(cfg.scene)
            first = result.trials[0]
            rows = (
                (k, _fmt(e[0]), _fmt(e[1]), _fmt(p[0]), _fmt(p[1]), label)
                for label in cfg.labels
                for k, (e, p) in enumerate(zip(first[label].estimates, truth), start=1)
            )
            _write_rows(path, ["cpi", "est_x", "est_y", "true_x", "true_y", "algorithm"], rows)
        written.append(path)
    manifest = {
        "version": __version__,
        "config": cfg.to_dict(),
        "files": [p.name for p in written],
    }
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return written + [mpath]
