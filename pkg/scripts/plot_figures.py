"""Plot the CSVs written by ``radarbandits run``.

    python scripts/plot_figures.py results/ [--out figures/]

Needs matplotlib, which is not a package dependency. Regret files get the
``pri`` axis, error files the ``cpi`` axis, position files an x/y track.
"""
from __future__ import annotations

import argparse
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path: Path) -> tuple[list[str], dict[str, list[list[float]]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    groups: dict[str, list[list[float]]] = defaultdict(list)
    for row in body:
        groups[row[-1]].append([float(v) for v in row[:-1]])
    return header, groups


def plot_series(path: Path, header, groups, ax) -> None:
    for label, rows in groups.items():
        t, m, s = zip(*rows)
        ax.plot(t, m, label=label)
        ax.fill_between(t, [a - b for a, b in zip(m, s)], [a + b for a, b in zip(m, s)], alpha=0.25)
    ax.set_xlabel(header[0].upper())
    ax.set_ylabel("cumulative regret" if header[1].startswith("regret") else "position error (m)")


def plot_track(groups, ax) -> None:
    first = True
    for label, rows in groups.items():
        _, ex, ey, tx, ty = zip(*rows)
        if first:
            ax.plot(tx, ty, "k-", lw=2, label="target")
            first = False
        ax.plot(ex, ey, ".", ms=3, label=label)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_aspect("equal", adjustable="datalim")


def main(argv=None) -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("results", type=Path)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args(argv)
    out = args.out or args.results
    out.mkdir(parents=True, exist_ok=True)
    for path in sorted(args.results.glob("*.csv")):
        header, groups = read(path)
        fig, ax = plt.subplots(figsize=(6, 4))
        if header[1] == "est_x":
            plot_track(groups, ax)
        else:
            plot_series(path, header, groups, ax)
        ax.set_title(path.stem)
        ax.legend()
        fig.tight_layout()
        fig.savefig(out / f"{path.stem}.png", dpi=120)
        plt.close(fig)
        print(out / f"{path.stem}.png")


if __name__ == "__main__":
    main()
