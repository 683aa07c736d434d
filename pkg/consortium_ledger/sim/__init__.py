from consortium_ledger.sim.adversarial import adversarial_scenario
from consortium_ledger.sim.checker import INVARIANTS, CheckReport, InvariantResult, check_trace
from consortium_ledger.sim.metrics import MetricsRecorder, RunMetrics, write_csv
from consortium_ledger.sim.network import Network
from consortium_ledger.sim.scenario import (
    ClientSpec,
    FaultSpec,
    GovernanceStep,
    Scenario,
    TamperSpec,
    load_scenario,
)
from consortium_ledger.sim.simulator import SimulationResult, Simulator, run_scenario, tamper
from consortium_ledger.sim.sweep import is_monotone, parse_values, run_sweep, summarize
from consortium_ledger.sim.trace import Trace

__all__ = [
    "INVARIANTS",
    "CheckReport",
    "ClientSpec",
    "FaultSpec",
    "GovernanceStep",
    "InvariantResult",
    "MetricsRecorder",
    "Network",
    "RunMetrics",
    "Scenario",
    "SimulationResult",
    "Simulator",
    "TamperSpec",
    "Trace",
    "adversarial_scenario",
    "check_trace",
    "is_monotone",
    "load_scenario",
    "parse_values",
    "run_scenario",
    "run_sweep",
    "summarize",
    "tamper",
    "write_csv",
]
