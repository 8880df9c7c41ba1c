"""Deterministic discrete-event simulation of replicas over a faulty network."""

from crdtkit.simulator.check import Report, check_convergence, check_safety
from crdtkit.simulator.fuzz import FuzzConfig, FuzzSummary, fuzz, random_scenario
from crdtkit.simulator.runner import RunResult, Runner, run
from crdtkit.simulator.scenario import InvalidScenario, Scenario, from_dict, load, shipped, shipped_names
from crdtkit.simulator.types import ADAPTERS, type_model_pairs

__all__ = [
    "ADAPTERS", "FuzzConfig", "FuzzSummary", "InvalidScenario", "Report", "RunResult", "Runner",
    "Scenario", "check_convergence", "check_safety", "from_dict", "fuzz", "load", "random_scenario",
    "run", "shipped", "shipped_names", "type_model_pairs",
]
