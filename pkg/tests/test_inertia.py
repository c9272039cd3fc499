"""Inertia distribution over lines: hand-worked cases, conservation, order
independence. The two small networks below are solved by hand from the
retention rule: a line carrying mass into a non-generator bus with n onward
lines keeps n*Y/(n*Y + sum Y_onward) of it, the rest splitting by admittance.
"""

import math

import numpy as np
import pytest

import gridwave as gw
from gridwave.inertia import GeneratorlessComponentError, InertiaMap, inertia_csv

from conftest import random_connected_case

OMEGA0 = 2.0 * math.pi * 60.0


def h_for_inertia(j: float, mva: float, base: float) -> float:
    """Machine H that makes the derived rotational inertia exactly j."""
    return j * base * OMEGA0 / (2.0 * mva)


def chain_case(j1=10.0, j2=1e-9):
    """G1 -- lineA(Y=5) -- bus2 -- lineB(Y=5) -- G2, G2 nearly massless."""
    return gw.PowerCase(
        base_mva=100.0, frequency_hz=60.0,
        buses=(gw.Bus(id=1, kind="slack"), gw.Bus(id=2), gw.Bus(id=3, kind="pv")),
        lines=(gw.Line(from_bus=1, to_bus=2, x=0.2, length_miles=4.0),
               gw.Line(from_bus=2, to_bus=3, x=0.2, length_miles=2.0)),
        generators=(gw.Generator(bus=1, mva_rating=100.0,
                                 h_const=h_for_inertia(j1, 100.0, 100.0)),
                    gw.Generator(bus=3, mva_rating=100.0,
                                 h_const=h_for_inertia(j2, 100.0, 100.0))))


class TestHandWorked:
    def test_chain_splits_evenly(self):
        c = chain_case()
        imap = gw.distribute_inertia(c)
        # at bus 2 the arriving 10 splits: A keeps 1*5/(1*5+5)*10 = 5
        assert imap.j_for(c.line("1-2")) == pytest.approx(5.0, rel=1e-8)
        assert imap.j_for(c.line("2-3")) == pytest.approx(5.0, rel=1e-8)

    def test_star_retention(self):
        # G(J=12) -- A(Y=2) -- hub -- B(Y=1), C(Y=1):
        # A keeps 2*2/(2*2+2)*12 = 8; B and C each receive 2
        c = gw.PowerCase(
            base_mva=100.0, frequency_hz=60.0,
            buses=(gw.Bus(id=1, kind="slack"), gw.Bus(id=2),
                   gw.Bus(id=3), gw.Bus(id=4)),
            lines=(gw.Line(from_bus=1, to_bus=2, x=0.5, length_miles=4.0),
                   gw.Line(from_bus=2, to_bus=3, x=1.0, length_miles=4.0),
                   gw.Line(from_bus=2, to_bus=4, x=1.0, length_miles=4.0)),
            generators=(gw.Generator(bus=1, mva_rating=100.0,
                                     h_const=h_for_inertia(12.0, 100.0, 100.0)),))
        imap = gw.distribute_inertia(c)
        assert imap.j_for(c.line("1-2")) == pytest.approx(8.0, rel=1e-9)
        assert imap.j_for(c.line("2-3")) == pytest.approx(2.0, rel=1e-9)
        assert imap.j_for(c.line("2-4")) == pytest.approx(2.0, rel=1e-9)
        assert imap.total == pytest.approx(12.0, rel=1e-12)

    def test_single_line_between_generator_buses(self):
        c = gw.PowerCase(
            base_mva=100.0, frequency_hz=60.0,
            buses=(gw.Bus(id=1, kind="slack"), gw.Bus(id=2, kind="pv")),
            lines=(gw.Line(from_bus=1, to_bus=2, x=0.2, length_miles=10.0),),
            generators=(gw.Generator(bus=1, mva_rating=100.0,
                                     h_const=h_for_inertia(7.0, 100.0, 100.0)),
                        gw.Generator(bus=2, mva_rating=100.0,
                                     h_const=h_for_inertia(3.0, 100.0, 100.0))))
        imap = gw.distribute_inertia(c)
        assert imap.j_for(c.line("1-2")) == pytest.approx(10.0, rel=1e-12)

    def test_colocated_generators_summed(self):
        c = gw.PowerCase(
            base_mva=100.0, frequency_hz=60.0,
            buses=(gw.Bus(id=1, kind="slack"), gw.Bus(id=2, kind="pv")),
            lines=(gw.Line(from_bus=1, to_bus=2, x=0.2, length_miles=10.0),),
            generators=(gw.Generator(bus=1, mva_rating=100.0,
                                     h_const=h_for_inertia(4.0, 100.0, 100.0)),
                        gw.Generator(bus=1, mva_rating=200.0,
                                     h_const=h_for_inertia(2.0, 200.0, 100.0)),
                        gw.Generator(bus=2, mva_rating=100.0,
                                     h_const=h_for_inertia(1.0, 100.0, 100.0))))
        imap = gw.distribute_inertia(c)
        assert imap.total == pytest.approx(7.0, rel=1e-12)


class TestDensity:
    def test_density_is_total_over_length(self):
        c = chain_case()
        imap = gw.distribute_inertia(c)
        ln = c.line("1-2")
        assert gw.line_density(imap, ln) == pytest.approx(
            imap.j_for(ln) / 4.0, rel=1e-15)

    def test_direct_map_values(self):
        imap = InertiaMap(j_line={"a-b": 5.0, "c-d": 0.0},
                          j_density={"a-b": 2.5, "c-d": 0.0})
        ln = gw.Line(from_bus=1, to_bus=2, x=0.1, length_miles=2.0, id="a-b")
        assert gw.line_density(imap, ln) == 2.5
        ghost = gw.Line(from_bus=1, to_bus=2, x=0.1, length_miles=2.0,
                        id="x-y")
        with pytest.raises(gw.UnknownTargetError):
            gw.line_density(imap, ghost)

    def test_39_bus_golden_density(self, ne39):
        # frozen from the first verified run of the pipeline
        imap = gw.distribute_inertia(ne39)
        assert imap.density_for(ne39.line("9-39")) == pytest.approx(
            0.01921762574719741, rel=1e-12)


class TestConservation:
    def test_39_bus(self, ne39):
        imap = gw.distribute_inertia(ne39)
        expected = sum(g.inertia_j for g in ne39.generators)
        assert imap.total == pytest.approx(expected, rel=1e-9)

    def test_random_graphs(self):
        rng = np.random.default_rng(42)
        for _ in range(60):
            c = random_connected_case(rng)
            imap = gw.distribute_inertia(c)
            expected = sum(g.inertia_j for g in c.generators)
            assert imap.total == pytest.approx(expected, rel=1e-9)
            assert all(j >= 0.0 for j in imap.j_line.values())
            # every in-service line appears in the map
            assert set(imap.j_line) == {ln.id for ln in c.lines}


class TestDeterminism:
    def test_order_independence(self):
        rng = np.random.default_rng(7)
        c = random_connected_case(rng, max_buses=10)
        imap = gw.distribute_inertia(c)
        shuffled = gw.PowerCase(
            base_mva=c.base_mva, frequency_hz=c.frequency_hz,
            buses=tuple(reversed(c.buses)), lines=tuple(reversed(c.lines)),
            generators=tuple(reversed(c.generators)))
        imap2 = gw.distribute_inertia(shuffled)
        for lid, j in imap.j_line.items():
            assert imap2.j_line[lid] == pytest.approx(j, rel=1e-12)


class TestErrors:
    def test_generatorless_component_named(self):
        c = gw.PowerCase(
            base_mva=100.0, frequency_hz=60.0,
            buses=(gw.Bus(id=1, kind="slack"), gw.Bus(id=2),
                   gw.Bus(id=3), gw.Bus(id=4)),
            lines=(gw.Line(from_bus=1, to_bus=2, x=0.2, length_miles=1.0),
                   gw.Line(from_bus=3, to_bus=4, x=0.2, length_miles=1.0)),
            generators=(gw.Generator(bus=1, mva_rating=100.0, h_const=5.0),))
        with pytest.raises(GeneratorlessComponentError) as err:
            gw.distribute_inertia(c)
        assert set(err.value.bus_ids) == {3, 4}

    def test_map_is_immutable(self, ne39):
        imap = gw.distribute_inertia(ne39)
        with pytest.raises(TypeError):
            imap.j_line["9-39"] = 0.0


class TestExport:
    def test_csv_shape(self, ne39):
        imap = gw.distribute_inertia(ne39)
        csv = inertia_csv(imap)
        lines = csv.strip().splitlines()
        assert lines[0] == "line_id,j_total,j_per_mile"
        assert len(lines) == 1 + len(ne39.lines)
        assert "np.float64" not in csv
