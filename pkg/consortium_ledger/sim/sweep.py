"""
Parameter sweeps: one scenario run for every (value, seed) pair.

Runs are independent simulations, so they are spread over worker processes.
Each worker receives plain dicts and returns plain dicts; results are sorted
afterwards so the output does not depend on completion order.
"""

import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from statistics import mean
from typing import Any, Dict, List, Optional, Sequence

from consortium_ledger.config.config_models import AppConfig
from consortium_ledger.project_logging import get_logger
from consortium_ledger.sim.scenario import Scenario
from consortium_ledger.sim.simulator import Simulator
from consortium_ledger.visualize.progress import track_runs

logger = get_logger("sim.sweep")

SUMMARY_FIELDS = (
    "write_throughput",
    "writes_per_work_s",
    "mean_time_to_commit_ms",
    "median_time_to_commit_ms",
    "mean_local_latency_ms",
)


def parse_values(text: str) -> List[Any]:
    """"1,10,100" -> [1, 10, 100]; non-numeric items stay strings."""
    values = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        for kind in (int, float):
            try:
                values.append(kind(item))
                break
            except ValueError:
                continue
        else:
            values.append(item)
    return values


def run_point(
    scenario_doc: Dict[str, Any],
    config_doc: Optional[Dict[str, Any]],
    param: str,
    value: Any,
    seed: int,
) -> Dict[str, Any]:
    """Run one sweep point; module level so worker processes can import it."""
    scenario = Scenario(**scenario_doc).with_param(param, value)
    scenario = scenario.copy(update={"seed": seed})
    config = AppConfig(**config_doc) if config_doc else None
    result = Simulator(scenario, config).run()
    row = {"param": param, "value": value, "seed": seed}
    row.update(result.metrics.to_dict())
    first = result.report.first_violation
    row["violations"] = sum(1 for r in result.report.results if not r.passed)
    row["first_violation"] = first.name if first else ""
    return row


def run_sweep(
    scenario: Scenario,
    param: str,
    values: Sequence[Any],
    seeds: Sequence[int],
    workers: int = 0,
    base_config: Optional[AppConfig] = None,
    show_progress: bool = True,
    use_rich: bool = True,
) -> List[Dict[str, Any]]:
    """
    Args:
        scenario: Base scenario; its own seed is replaced by each of `seeds`
        param: Parameter name accepted by Scenario.with_param
        values: Values to try
        seeds: Seeds per value
        workers: Worker processes; 0 means one per CPU, 1 runs in-process
    """
    if values:
        # fails fast on unknown parameter names
        scenario.with_param(param, values[0])
    jobs = [(value, seed) for value in values for seed in seeds]
    scenario_doc = scenario.dict()
    config_doc = base_config.dict() if base_config else None
    workers = workers or os.cpu_count() or 1
    logger.info(f"Sweeping {param} over {list(values)} with {len(seeds)} seeds, {workers} workers")

    rows = []
    if workers == 1:
        for value, seed in track_runs(jobs, f"Sweeping {param}", use_rich=use_rich, enabled=show_progress):
            rows.append(run_point(scenario_doc, config_doc, param, value, seed))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_point, scenario_doc, config_doc, param, value, seed)
                for value, seed in jobs
            ]
            for future in track_runs(
                as_completed(futures),
                f"Sweeping {param}",
                total=len(futures),
                use_rich=use_rich,
                enabled=show_progress,
            ):
                rows.append(future.result())
    order = {value: i for i, value in enumerate(values)}
    rows.sort(key=lambda r: (order[r["value"]], r["seed"]))
    return rows


def summarize(rows: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Mean of each summary field per swept value, in sweep order."""
    grouped: Dict[Any, List[Dict[str, Any]]] = {}
    for row in rows:
        grouped.setdefault(row["value"], []).append(row)
    summary = []
    for value, group in grouped.items():
        line = {"param": group[0]["param"], "value": value, "runs": len(group)}
        for name in SUMMARY_FIELDS:
            samples = [r[name] for r in group if r[name] is not None]
            line[name] = mean(samples) if samples else None
        line["violations"] = sum(r["violations"] for r in group)
        summary.append(line)
    return summary


def is_monotone(series: Sequence[Optional[float]], increasing: bool = True) -> bool:
    """Non-decreasing (or non-increasing); a missing value counts as a break."""
    if any(v is None for v in series):
        return False
    pairs = zip(series, series[1:])
    if increasing:
        return all(a <= b for a, b in pairs)
    return all(a >= b for a, b in pairs)
