"""Scenario configuration files.

The format is INI (``configparser``) with one ``[scenario]`` section and
repeated ``[segment <name>]`` and ``[policy <label>]`` sections::

    [scenario]
    name = paper_sec3
    arms = 5
    players = 3
    cpi_count = 500
    pri_per_cpi = 50
    trials = 50
    seed = 2021
    noise = 0.05                 ; one scale, or one per arm
    comparator = top-n-sum       ; or single-best
    exports = fig1:regret, fig2:error

    [segment pre]
    start_cpi = 1                ; or start_pri = 1
    means = 0.95, 1, 0.9, 0.3, 0.3

    [scene]
    nodes = 0 500; 250 -100; 500 500
    target_start = 0 0
    target_end = 350 100
    sigma0 = 50
    sinr_alpha = 0.05
    sinr_beta = 0

    [policy C&P]
    algorithm = cp               ; saa, mc or cp
    explore_len = 3000
    subblocks = 10
    emitter = no
    tracked = 1

Segments start at 1-based steps; ``start_cpi = k`` means the first PRI of CPI
``k``. Policy-section order fixes the order of algorithms in every output.
Unknown keys are rejected.
"""
from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

from ..core import COMPARATOR_MODES, TOP_N_SUM, ConfigurationError
from ..environment import DEFAULT_SIGMA, RewardSchedule, SinrMap
from ..policies import (
    DEFAULT_ETA,
    DEFAULT_EXPLORE_LEN,
    DEFAULT_FORGETTING,
    DEFAULT_IMPLICIT_EXPLORATION,
    DEFAULT_SUBBLOCKS,
    block_schedule,
)
from ..radar import DEFAULT_SIGMA0, RadarScene

ALGORITHMS = ("saa", "mc", "cp")
METRICS = ("regret", "error", "positions")

_SCENARIO_KEYS = {
    "name", "arms", "players", "cpi_count", "pri_per_cpi", "trials", "seed", "noise", "comparator", "exports",
}
_SEGMENT_KEYS = {"start_cpi", "start_pri", "means"}
_SCENE_KEYS = {"nodes", "target_start", "target_end", "sigma0", "sinr_alpha", "sinr_beta"}
_POLICY_KEYS = {
    "algorithm", "explore_len", "settle", "subblocks", "eta", "forgetting", "implicit_exploration",
    "emitter", "tracked",
}


@dataclass(frozen=True)
class PolicyConfig:
    label: str
    algorithm: str
    explore_len: int = DEFAULT_EXPLORE_LEN
    settle: int = 100
    subblocks: int = DEFAULT_SUBBLOCKS
    eta: float = DEFAULT_ETA
    forgetting: float = DEFAULT_FORGETTING
    implicit_exploration: float = DEFAULT_IMPLICIT_EXPLORATION
    emitter: bool = False
    tracked: tuple[int, ...] = (1,)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    n_arms: int
    n_players: int
    cpi_count: int
    pri_per_cpi: int
    trials: int
    seed: int
    comparator: str
    schedule: RewardSchedule
    scene: RadarScene
    policies: tuple[PolicyConfig, ...]
    exports: tuple[tuple[str, str], ...] = field(default=())

    @property
    def horizon(self) -> int:
        return self.cpi_count * self.pri_per_cpi

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.policies]

    def with_overrides(self, trials: int | None = None, seed: int | None = None) -> "ScenarioConfig":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        if trials is not None:
            if trials < 1:
                raise ConfigurationError("trial count must be at least 1")
            d["trials"] = trials
        if seed is not None:
            d["seed"] = seed
        return ScenarioConfig(**d)

    def to_dict(self) -> dict:
        """Fully resolved configuration, defaults included."""
        s = self.schedule
        scene = self.scene
        return {
            "name": self.name,
            "arms": self.n_arms,
            "players": self.n_players,
            "cpi_count": self.cpi_count,
            "pri_per_cpi": self.pri_per_cpi,
            "horizon_pri": self.horizon,
            "trials": self.trials,
            "seed": self.seed,
            "comparator": self.comparator,
            "noise": list(s.noise),
            "segments": [{"start_pri": st, "means": list(m)} for st, m in zip(s.starts, s.segment_means)],
            "scene": {
                "nodes": [list(p) for p in scene.node_positions],
                "target_start": list(scene.target_start),
                "target_end": list(scene.target_end),
                "sigma0": scene.sigma0,
                "sinr_alpha": scene.sinr_map.alpha,
                "sinr_beta": scene.sinr_map.beta,
            },
            "policies": [dict(asdict(p), tracked=list(p.tracked)) for p in self.policies],
            "exports": [f"{n}:{m}" for n, m in self.exports],
        }


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigurationError(f"{what}: expected numbers, got {text!r}") from None


def _point(text: str, what: str) -> tuple[float, float]:
    v = _floats(text, what)
    if len(v) != 2:
        raise ConfigurationError(f"{what}: expected an 'x y' pair, got {text!r}")
    return v[0], v[1]


def _int(section, key, default=None) -> int:
    if key not in section:
        if default is None:
            raise ConfigurationError(f"[{section.name}] missing required key {key!r}")
        return default
    try:
        return section.getint(key)
    except ValueError:
        raise ConfigurationError(f"[{section.name}] {key} must be an integer") from None


def _float(section, key, default) -> float:
    try:
        return section.getfloat(key, default)
    except ValueError:
        raise ConfigurationError(f"[{section.name}] {key} must be a number") from None


def _check_keys(section, allowed) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigurationError(f"[{section.name}] unknown keys: {', '.join(sorted(unknown))}")


def parse_config(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from None
    if "scenario" not in cp:
        raise ConfigurationError("missing [scenario] section")
    sc = cp["scenario"]
    _check_keys(sc, _SCENARIO_KEYS)

    n_arms = _int(sc, "arms")
    n_players = _int(sc, "players")
    if n_arms < 2:
        raise ConfigurationError("need at least 2 arms")
    if not 1 <= n_players < n_arms:
        raise ConfigurationError(f"need 1 <= players < arms, got players={n_players}, arms={n_arms}")
    cpi_count = _int(sc, "cpi_count", 500)
    pri_per_cpi = _int(sc, "pri_per_cpi", 50)
    if cpi_count < 1 or pri_per_cpi < 1:
        raise ConfigurationError("cpi_count and pri_per_cpi must be positive")
    trials = _int(sc, "trials", 50)
    if trials < 1:
        raise ConfigurationError("trial count must be at least 1")
    comparator = sc.get("comparator", TOP_N_SUM)
    if comparator not in COMPARATOR_MODES:
        raise ConfigurationError(f"comparator must be one of {COMPARATOR_MODES}")
    noise = _floats(sc.get("noise", str(DEFAULT_SIGMA)), "noise")
    if len(noise) == 1:
        noise = noise * n_arms
    if len(noise) != n_arms:
        raise ConfigurationError(f"noise needs 1 or {n_arms} values, got {len(noise)}")

    segments = []
    for name in cp.sections():
        if not name.startswith("segment"):
            continue
        sec = cp[name]
        _check_keys(sec, _SEGMENT_KEYS)
        if ("start_cpi" in sec) == ("start_pri" in sec):
            raise ConfigurationError(f"[{name}] needs exactly one of start_cpi / start_pri")
        start = (_int(sec, "start_cpi") - 1) * pri_per_cpi + 1 if "start_cpi" in sec else _int(sec, "start_pri")
        means = _floats(sec.get("means", ""), f"[{name}] means")
        if len(means) != n_arms:
            raise ConfigurationError(f"[{name}] has {len(means)} means for {n_arms} arms")
        segments.append((start, means))
    if not segments:
        raise ConfigurationError("no [segment ...] sections: a reward schedule is required")
    schedule = RewardSchedule.from_segments(cpi_count * pri_per_cpi, segments, noise)

    scene = _parse_scene(cp, cpi_count, pri_per_cpi)
    if len(scene.node_positions) != n_players:
        raise ConfigurationError(f"scene lists {len(scene.node_positions)} nodes for {n_players} players")

    policies = []
    for name in cp.sections():
        if not name.startswith("policy"):
            continue
        policies.append(_parse_policy(cp[name], n_arms, n_players))
    if not policies:
        raise ConfigurationError("no [policy ...] sections")
    labels = [p.label for p in policies]
    if len(set(labels)) != len(labels):
        raise ConfigurationError("policy labels must be unique")

    exports = []
    for item in sc.get("exports", "").split(","):
        item = item.strip()
        if not item:
            continue
        fig, _, metric = item.partition(":")
        if metric not in METRICS:
            raise ConfigurationError(f"export {item!r}: metric must be one of {METRICS}")
        exports.append((fig.strip(), metric))

    return ScenarioConfig(
        name=sc.get("name", "scenario"),
        n_arms=n_arms,
        n_players=n_players,
        cpi_count=cpi_count,
        pri_per_cpi=pri_per_cpi,
        trials=trials,
        seed=_int(sc, "seed", 0),
        comparator=comparator,
        schedule=schedule,
        scene=scene,
        policies=tuple(policies),
        exports=tuple(exports),
    )


def _parse_scene(cp, cpi_count: int, pri_per_cpi: int) -> RadarScene:
    if "scene" not in cp:
        return RadarScene(cpi_count=cpi_count, pri_per_cpi=pri_per_cpi)
    sec = cp["scene"]
    _check_keys(sec, _SCENE_KEYS)
    kw = {}
    if "nodes" in sec:
        kw["node_positions"] = tuple(_point(p, "nodes") for p in sec["nodes"].split(";") if p.strip())
    if "target_start" in sec:
        kw["target_start"] = _point(sec["target_start"], "target_start")
    if "target_end" in sec:
        kw["target_end"] = _point(sec["target_end"], "target_end")
    sinr = SinrMap(_float(sec, "sinr_alpha", 0.05), _float(sec, "sinr_beta", 0.0))
    sigma0 = _float(sec, "sigma0", DEFAULT_SIGMA0)
    if sigma0 <= 0:
        raise ConfigurationError("sigma0 must be positive")
    return RadarScene(cpi_count=cpi_count, pri_per_cpi=pri_per_cpi, sinr_map=sinr, sigma0=sigma0, **kw)


def _parse_policy(sec, n_arms: int, n_players: int) -> PolicyConfig:
    _check_keys(sec, _POLICY_KEYS)
    label = sec.name.partition(" ")[2].strip() or sec.name
    algorithm = sec.get("algorithm", "").strip().lower()
    if algorithm not in ALGORITHMS:
        raise ConfigurationError(f"[{sec.name}] unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    try:
        emitter = sec.getboolean("emitter", False)
    except ValueError:
        raise ConfigurationError(f"[{sec.name}] emitter must be yes/no") from None
    tracked = tuple(int(x) for x in _floats(sec.get("tracked", "1"), "tracked"))
    if any(not 1 <= p <= n_players for p in tracked):
        raise ConfigurationError(f"[{sec.name}] tracked players must be in 1..{n_players}")
    pol = PolicyConfig(
        label=label,
        algorithm=algorithm,
        explore_len=_int(sec, "explore_len", DEFAULT_EXPLORE_LEN),
        settle=_int(sec, "settle", 100),
        subblocks=_int(sec, "subblocks", DEFAULT_SUBBLOCKS),
        eta=_float(sec, "eta", DEFAULT_ETA),
        forgetting=_float(sec, "forgetting", DEFAULT_FORGETTING),
        implicit_exploration=_float(sec, "implicit_exploration", DEFAULT_IMPLICIT_EXPLORATION),
        emitter=emitter,
        tracked=tracked,
    )
    if pol.explore_len < 1 or pol.settle < 0:
        raise ConfigurationError(f"[{sec.name}] explore_len must be positive and settle nonnegative")
    if algorithm == "cp":
        block_schedule(n_arms, n_players, pol.subblocks)
        if pol.eta <= 0 or not 0 < pol.forgetting <= 1 or pol.implicit_exploration < 0:
            raise ConfigurationError(f"[{sec.name}] need eta > 0, 0 < forgetting <= 1, implicit_exploration >= 0")
    return pol


def bundled_scenarios() -> list[str]:
    files = resources.files("radarbandits") / "configs"
    return sorted(p.name[:-4] for p in files.iterdir() if p.name.endswith(".cfg"))


def load_config(source: str | Path) -> ScenarioConfig:
    """Load a config from a file path or a bundled scenario name."""
    path = Path(source)
    if path.is_file():
        return parse_config(path.read_text(encoding="utf-8"))
    bundled = resources.files("radarbandits") / "configs" / f"{source}.cfg"
    if bundled.is_file():
        return parse_config(bundled.read_text(encoding="utf-8"))
    raise ConfigurationError(f"no config file or bundled scenario named {str(source)!r}")
