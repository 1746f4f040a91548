"""Random instance generation, experiment orchestration and reporting.

Instances place pickup and delivery requests on a fixed set of parking
stations (nine synthetic stations by default, Euclidean distances with a
detour factor) with random charge levels and random time bounds between
8:00 and 15:00.  Experiments solve each instance for several worker counts
twice: a baseline search and a speedup configuration (symmetry breaking,
upper-bound cut and heuristic warm start, their computation time included
in the reported wall time), then report per-instance rows and per-size
averages with the relative CPU improvement.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .actiongraph import build_graph
from .distances import matrix_for_instance
from .domain import Instance, Location, Parameters, Request, RequestKind, Solution
from .search import SolveOptions, compute_upper_bound, solve_branch_and_bound

#: Operating constants used throughout the experiments.
DEFAULT_PARAMETERS = Parameters(
    max_range_km=150.0,
    recharge_time_min=240.0,
    shift_limit_min=300.0,
    workers=2,
    ev_speed_kmh=25.0,
    bike_speed_kmh=15.0,
    park_and_unload_min=1.0,
    load_and_exit_min=1.0,
)

#: Nine synthetic stations on a ~10 km urban footprint (planar km).
DEFAULT_STATIONS = (
    Location("s1", coordinates=(2.0, 8.5)),
    Location("s2", coordinates=(1.5, 4.0)),
    Location("s3", coordinates=(3.5, 1.0)),
    Location("s4", coordinates=(5.0, 6.5)),
    Location("s5", coordinates=(5.5, 3.5)),
    Location("s6", coordinates=(7.5, 8.0)),
    Location("s7", coordinates=(8.0, 5.0)),
    Location("s8", coordinates=(9.0, 2.0)),
    Location("s9", coordinates=(6.0, 0.5)),
)

DEFAULT_DEPOT = Location("depot", coordinates=(5.0, 4.8))


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs of the random instance generator."""

    request_total: int = 10
    seed: int = 0
    stations: tuple[Location, ...] = DEFAULT_STATIONS
    depot: Location = DEFAULT_DEPOT
    window_min: tuple[float, float] = (480.0, 900.0)
    pickup_charge: tuple[float, float] = (0.1, 1.0)
    delivery_charge: tuple[float, float] = (0.2, 0.9)
    detour_factor: float = 1.3
    parameters: Parameters = DEFAULT_PARAMETERS

    def __post_init__(self) -> None:
        if self.request_total % 2 != 0 or self.request_total < 0:
            raise ValueError("request_total must be even and nonnegative")
        lo, hi = self.window_min
        if not (0 <= lo <= hi <= 24 * 60):
            raise ValueError("time window bounds must lie within one day")
        if not self.stations:
            raise ValueError("need at least one station")


def generate_instance(config: GeneratorConfig) -> Instance:
    """Deterministically sample an instance; |pickups| equals |deliveries|.

    Stations are sampled with replacement per request; pickup charges,
    delivery required charges and request times are uniform within the
    configured bounds.
    """
    rng = np.random.default_rng(config.seed)
    half = config.request_total // 2
    lo, hi = config.window_min

    def sample(kind: RequestKind, index: int) -> Request:
        station = config.stations[int(rng.integers(len(config.stations)))]
        bounds = config.pickup_charge if kind is RequestKind.PICKUP else config.delivery_charge
        charge = round(float(rng.uniform(*bounds)), 4)
        time_min = round(float(rng.uniform(lo, hi)), 1)
        prefix = "p" if kind is RequestKind.PICKUP else "d"
        return Request(
            id=f"{prefix}{index}", kind=kind, location=station, charge=charge, time_min=time_min
        )

    requests = [sample(RequestKind.PICKUP, i + 1) for i in range(half)]
    requests += [sample(RequestKind.DELIVERY, i + 1) for i in range(half)]
    return Instance(
        parameters=config.parameters,
        depot=config.depot,
        requests=tuple(requests),
        distance_source={"type": "euclidean", "detour_factor": config.detour_factor},
    )


@dataclass(frozen=True)
class ExperimentRecord:
    """One (instance, worker count) cell of an experiment."""

    instance_name: str
    request_count: int
    workers: int
    served_pct: float
    objective: int
    cpu1_s: float
    cpu2_s: float
    improv_pct: float
    optimal_baseline: bool
    optimal_speedup: bool
    objective_baseline: int


@dataclass(frozen=True)
class BenchOptions:
    """Per-solve resource limits for experiment runs."""

    time_limit_s: float | None = 8.0
    node_limit: int | None = None
    bound_node_limit: int = 100_000
    bound_time_limit_s: float = 2.0


def run_experiment(
    named_instances: list[tuple[str, Instance]],
    k_values: list[int],
    options: BenchOptions | None = None,
) -> list[ExperimentRecord]:
    """Solve every (instance, K) cell in baseline and speedup configuration.

    The speedup run of each K is additionally warm-started with the previous
    K's solution, so the reported served percentage is non-decreasing in K
    even when a time limit stops a search early.  When both configurations
    prove optimality their objectives must agree.
    """
    options = options or BenchOptions()
    records: list[ExperimentRecord] = []
    for name, instance in named_instances:
        matrix = matrix_for_instance(instance)
        graph = build_graph(instance, matrix)
        total = len(instance.requests)
        previous: Solution | None = None
        for k in sorted(k_values):
            instance_k = replace(instance, parameters=replace(instance.parameters, workers=k))

            begin = time.perf_counter()
            baseline = solve_branch_and_bound(
                instance_k,
                graph,
                SolveOptions(
                    node_limit=options.node_limit, time_limit_s=options.time_limit_s
                ),
            )
            cpu1 = time.perf_counter() - begin

            begin = time.perf_counter()
            bound = compute_upper_bound(
                instance_k,
                graph,
                k,
                node_limit=options.bound_node_limit,
                time_limit_s=options.bound_time_limit_s,
            )
            speedup = solve_branch_and_bound(
                instance_k,
                graph,
                SolveOptions(
                    use_warm_start=True,
                    break_worker_symmetry=True,
                    upper_bound=bound,
                    node_limit=options.node_limit,
                    time_limit_s=options.time_limit_s,
                ),
                incumbent=previous,
            )
            cpu2 = time.perf_counter() - begin

            if (
                baseline.optimal
                and speedup.optimal
                and baseline.solution.served_count != speedup.solution.served_count
            ):
                raise RuntimeError(
                    f"configurations disagree on {name} K={k}: "
                    f"{baseline.solution.served_count} vs {speedup.solution.served_count}"
                )

            previous = speedup.solution
            objective = speedup.solution.served_count
            records.append(
                ExperimentRecord(
                    instance_name=name,
                    request_count=total,
                    workers=k,
                    served_pct=100.0 * objective / total if total else 0.0,
                    objective=objective,
                    cpu1_s=cpu1,
                    cpu2_s=cpu2,
                    improv_pct=(cpu1 - cpu2) / cpu1 * 100.0 if cpu1 > 0 else 0.0,
                    optimal_baseline=baseline.optimal,
                    optimal_speedup=speedup.optimal,
                    objective_baseline=baseline.solution.served_count,
                )
            )
    return records


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

_CSV_FIELDS = [
    "instance_name",
    "request_count",
    "workers",
    "served_pct",
    "objective",
    "cpu1_s",
    "cpu2_s",
    "improv_pct",
    "optimal_baseline",
    "optimal_speedup",
    "objective_baseline",
]


def emit_report(records: list[ExperimentRecord], fmt: str = "text") -> str:
    """Render records as an aligned text table, CSV, or JSON."""
    if not records:
        raise ValueError("no records to report")
    if fmt == "csv":
        out = io.StringIO()
        writer = csv.DictWriter(out, fieldnames=_CSV_FIELDS)
        writer.writeheader()
        for rec in records:
            row = {name: getattr(rec, name) for name in _CSV_FIELDS}
            for key, value in row.items():
                if isinstance(value, float):
                    row[key] = repr(value)
            writer.writerow(row)
        return out.getvalue()
    if fmt == "json":
        docs = [{name: getattr(rec, name) for name in _CSV_FIELDS} for rec in records]
        return json.dumps(docs, indent=2) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    k_values = sorted({rec.workers for rec in records})
    by_instance: dict[str, dict[int, ExperimentRecord]] = {}
    for rec in records:
        by_instance.setdefault(rec.instance_name, {})[rec.workers] = rec

    header = ["Instance", "Req"]
    for k in k_values:
        header += [f"K={k} Served", "CPU1", "CPU2", "Improv"]
    lines = ["\t".join(header)]
    for name in sorted(by_instance):
        cells = [name, str(next(iter(by_instance[name].values())).request_count)]
        for k in k_values:
            rec = by_instance[name].get(k)
            if rec is None:
                cells += ["-", "-", "-", "-"]
            else:
                flag = "" if rec.optimal_speedup and rec.optimal_baseline else "*"
                cells += [
                    f"{rec.served_pct:.0f}%{flag}",
                    f"{rec.cpu1_s:.2f}",
                    f"{rec.cpu2_s:.2f}",
                    f"{rec.improv_pct:.1f}%",
                ]
        lines.append("\t".join(cells))

    lines.append("")
    header2 = ["Requests"]
    for k in k_values:
        header2 += [f"K={k} Served", "CPU1", "CPU2", "Improv"]
    lines.append("\t".join(header2))
    sizes = sorted({rec.request_count for rec in records})
    for size in sizes:
        cells = [str(size)]
        for k in k_values:
            group = [r for r in records if r.request_count == size and r.workers == k]
            if not group:
                cells += ["-", "-", "-", "-"]
                continue
            cells += [
                f"{np.mean([r.served_pct for r in group]):.0f}%",
                f"{np.mean([r.cpu1_s for r in group]):.2f}",
                f"{np.mean([r.cpu2_s for r in group]):.2f}",
                f"{np.mean([r.improv_pct for r in group]):.1f}%",
            ]
        lines.append("\t".join(cells))
    lines.append("")
    lines.append("* not proven optimal within limits")
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> list[ExperimentRecord]:
    """Inverse of ``emit_report(..., fmt='csv')``."""
    records = []
    for row in csv.DictReader(io.StringIO(text)):
        records.append(
            ExperimentRecord(
                instance_name=row["instance_name"],
                request_count=int(row["request_count"]),
                workers=int(row["workers"]),
                served_pct=float(row["served_pct"]),
                objective=int(row["objective"]),
                cpu1_s=float(row["cpu1_s"]),
                cpu2_s=float(row["cpu2_s"]),
                improv_pct=float(row["improv_pct"]),
                optimal_baseline=row["optimal_baseline"] == "True",
                optimal_speedup=row["optimal_speedup"] == "True",
                objective_baseline=int(row["objective_baseline"]),
            )
        )
    return records
