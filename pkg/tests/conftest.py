"""Shared fixtures: packaged cases, a pinned-voltage 2-bus variant, and a
random connected-case generator used by the property suites."""

import json
import math
from importlib import resources

import numpy as np
import pytest

import gridwave as gw
from gridwave.continuum import ContinuumGrid
from types import MappingProxyType


def data_text(name: str) -> str:
    return resources.files("gridwave").joinpath(f"data/{name}").read_text()


def data_path(name: str) -> str:
    return str(resources.files("gridwave").joinpath(f"data/{name}"))


@pytest.fixture(scope="session")
def ne39():
    return gw.parse_case_json(data_text("ne39.json"))


@pytest.fixture(scope="session")
def twobus():
    return gw.parse_case_json(data_text("twobus.json"))


def make_pv_twobus() -> gw.PowerCase:
    """2-bus variant with bus 2 held at 1.0 pu by a small machine.

    Both bus voltages are then pinned at exactly 1.0 in every disturbance
    phase, which makes the voltage profile identically flat: the cleanest
    setting for wave-speed and model-reduction checks.
    """
    return gw.PowerCase(
        base_mva=1000.0, frequency_hz=60.0,
        buses=(gw.Bus(id=1, kind="slack", v_set=1.0),
               gw.Bus(id=2, kind="pv", v_set=1.0, p_load=352.5, q_load=-358.0)),
        lines=(gw.Line(from_bus=1, to_bus=2, r=0.04, x=0.2, length_miles=20.0),),
        generators=(gw.Generator(bus=1, h_const=5.0, mva_rating=1000.0),
                    gw.Generator(bus=2, h_const=3.0, mva_rating=100.0)))


@pytest.fixture(scope="session")
def pv_twobus():
    return make_pv_twobus()


def load_step(target, frac=0.10, t_start=0.5) -> gw.Disturbance:
    return gw.parse_scenario_json(json.dumps({"disturbance": {
        "kind": "load_step", "target": target,
        "magnitude_fraction": frac, "t_start": t_start}}))


def uniform_grid(n: int, dxi: float, b: float, j_h: float,
                 omega0: float = 2.0 * math.pi * 60.0,
                 g: float = 0.0) -> ContinuumGrid:
    """Single-segment grid with constant parameters, for synthetic runs."""
    nu = math.sqrt(b / (j_h * omega0))
    ones = np.ones(n)
    return ContinuumGrid(
        n_points=n, dxi=dxi, b=b * ones, g=g * ones, j_h=j_h * ones,
        nu=nu * ones, bus_markers=MappingProxyType({0: 1, n - 1: 2}),
        segments=((0, n - 1, "1-2"),))


def random_connected_case(rng: np.random.Generator,
                          max_buses: int = 12) -> gw.PowerCase:
    """Random connected no-load network with 1..n generators.

    A spanning tree guarantees connectivity; extra edges add meshing. Loads
    are zero so the power flow is trivially solvable, leaving line impedance
    and generator inertia as the interesting degrees of freedom.
    """
    n = int(rng.integers(2, max_buses + 1))
    gen_buses = sorted(rng.choice(np.arange(1, n + 1),
                                  size=int(rng.integers(1, n + 1)),
                                  replace=False).tolist())
    slack = gen_buses[0]
    buses = tuple(
        gw.Bus(id=i,
               kind=("slack" if i == slack
                     else "pv" if i in gen_buses else "pq"),
               v_set=float(rng.uniform(0.97, 1.05)))
        for i in range(1, n + 1))

    edges = set()
    order = rng.permutation(np.arange(1, n + 1)).tolist()
    for a, b in zip(order, order[1:]):
        edges.add((min(a, b), max(a, b)))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        a, b = rng.choice(np.arange(1, n + 1), size=2, replace=False).tolist()
        edges.add((min(a, b), max(a, b)))

    lines = tuple(
        gw.Line(from_bus=a, to_bus=b,
                r=float(rng.uniform(0.0, 0.02)),
                x=float(rng.uniform(0.05, 0.6)),
                length_miles=float(rng.uniform(2.0, 60.0)))
        for a, b in sorted(edges))
    gens = tuple(
        gw.Generator(bus=g_, h_const=float(rng.uniform(1.0, 40.0)),
                     mva_rating=float(rng.uniform(50.0, 1200.0)))
        for g_ in gen_buses)
    return gw.PowerCase(base_mva=100.0, frequency_hz=60.0,
                        buses=buses, lines=lines, generators=gens)
