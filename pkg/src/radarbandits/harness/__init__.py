from .config import PolicyConfig, ScenarioConfig, bundled_scenarios, load_config, parse_config
from .export import write_series
from .runner import ExperimentResult, TrialSeries, aggregate_trials, run_experiment, run_trial

__all__ = [
    "ExperimentResult",
    "PolicyConfig",
    "ScenarioConfig",
    "TrialSeries",
    "aggregate_trials",
    "bundled_scenarios",
    "load_config",
    "parse_config",
    "run_experiment",
    "run_trial",
    "write_series",
]
