"""Shared builders for hand-crafted test instances."""

import numpy as np
import pytest

from evrelocate import (
    DistanceMatrix,
    Instance,
    Location,
    Parameters,
    Request,
    RequestKind,
    Route,
    ScheduleResult,
    Solution,
)

BASE_PARAMS = Parameters(
    max_range_km=150.0,
    recharge_time_min=240.0,
    shift_limit_min=300.0,
    workers=1,
    ev_speed_kmh=25.0,
    bike_speed_kmh=15.0,
    park_and_unload_min=1.0,
    load_and_exit_min=1.0,
)


def make_instance(requests, params=BASE_PARAMS, depot_id="depot"):
    return Instance(
        parameters=params,
        depot=Location(depot_id),
        requests=tuple(requests),
        distance_source={"type": "inline-test"},
    )


def make_matrix(ids, entries, default=0.0):
    """Matrix from a sparse {(a, b): km} mapping; unspecified pairs default."""
    n = len(ids)
    pos = {x: i for i, x in enumerate(ids)}
    values = np.full((n, n), float(default))
    np.fill_diagonal(values, 0.0)
    for (a, b), km in entries.items():
        values[pos[a], pos[b]] = km
    return DistanceMatrix(ids=tuple(ids), values=values)


def pickup(rid, loc, charge, time_min):
    return Request(rid, RequestKind.PICKUP, Location(loc), charge, time_min)


def delivery(rid, loc, charge, time_min):
    return Request(rid, RequestKind.DELIVERY, Location(loc), charge, time_min)


def result_to_solution(pairs, sched: ScheduleResult, worker_index=0) -> Solution:
    visits = []
    for p, d in pairs:
        visits.append((p, sched.visit_times[p]))
        visits.append((d, sched.visit_times[d]))
    route = Route(
        worker_index=worker_index,
        visits=tuple(visits),
        depot_departure_min=sched.depot_departure_min,
        depot_return_min=sched.depot_return_min,
    )
    return Solution.from_routes([route])


@pytest.fixture
def one_pair():
    """One loose pickup/delivery pair, everything reachable."""
    requests = [
        pickup("p1", "a", 1.0, 480.0),
        delivery("d1", "b", 0.0, 600.0),
    ]
    inst = make_instance(requests)
    ids = ["depot", "a", "b"]
    matrix = make_matrix(ids, {}, default=5.0)
    return inst, matrix
