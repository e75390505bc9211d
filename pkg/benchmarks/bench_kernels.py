"""Time the compiled and pure-Python kernels on one full-scale trial.

    python benchmarks/bench_kernels.py [--repeat 3] [--cpis 500]

The pure-Python run is slow (tens of seconds per policy at full scale);
``--cpis`` shortens the horizon for a quick comparison.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from radarbandits.harness import load_config
from radarbandits.harness.runner import run_policy, trial_streams
from radarbandits.kernels import load_backend


def _time(fn, repeat: int) -> tuple[float, object]:
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--cpis", type=int, default=500)
    ap.add_argument("--config", default="paper_sec3")
    args = ap.parse_args(argv)

    cfg = load_config(args.config)
    if args.cpis != cfg.cpi_count:
        cfg = _shorten(args.config, args.cpis)
    streams = trial_streams(cfg, 0)
    backends = {name: load_backend(name) for name in ("cython", "python")}
    print(f"{cfg.name}: {cfg.horizon} PRIs, {cfg.n_players} nodes, {cfg.n_arms} arms")
    print(f"{'policy':<16}{'cython s':>10}{'python s':>10}{'speedup':>9}  identical")
    for policy in cfg.policies:
        runs = {}
        for name, be in backends.items():
            reps = args.repeat if name == "cython" else 1
            runs[name] = _time(lambda: run_policy(cfg, policy, streams, 0, be), reps)
        (tc, a), (tp, b) = runs["cython"], runs["python"]
        same = all(np.array_equal(getattr(a, f), getattr(b, f)) for f in ("actions", "regret", "error"))
        print(f"{policy.label:<16}{tc:>10.4f}{tp:>10.2f}{tp / tc:>8.0f}x  {same}")


def _shorten(name: str, cpis: int):
    """Reload ``name`` with a shorter horizon, keeping the shift at 40% of it."""
    from importlib import resources

    from radarbandits.harness import parse_config

    text = resources.files("radarbandits").joinpath("configs", f"{name}.cfg").read_text()
    shift = max(2, int(cpis * 0.4) + 1)
    text = text.replace("cpi_count = 500", f"cpi_count = {cpis}").replace("start_cpi = 201", f"start_cpi = {shift}")
    return parse_config(text)


if __name__ == "__main__":
    main()
