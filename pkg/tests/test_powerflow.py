"""Power flow: Ybus assembly, Newton-Raphson solves, line flows.

Voltage correctness is cross-checked against a hand-rolled Gauss-Seidel
iteration, a method independent of the Newton-Raphson implementation.
"""

import cmath
import json
import math

import numpy as np
import pytest

import gridwave as gw
from gridwave.powerflow import ConvergenceError, SingularJacobianError

from conftest import data_text


def gauss_seidel(c: gw.PowerCase, sweeps=20000, tol=1e-12):
    """Reference power flow by Gauss-Seidel sweeps.

    Shares nothing with the package solver beyond the Ybus definition:
    voltages are updated bus by bus from S = V * conj(Y V), with PV buses
    renormalized to their magnitude setpoint after each update.
    """
    ids = [b.id for b in c.buses]
    index = {bid: k for k, bid in enumerate(ids)}
    n = len(ids)
    y = np.zeros((n, n), dtype=complex)
    for ln in c.lines:
        if not ln.in_service:
            continue
        i, j = index[ln.from_bus], index[ln.to_bus]
        ys = 1.0 / complex(ln.r, ln.x)
        y[i, j] -= ys
        y[j, i] -= ys
        y[i, i] += ys + 0.5j * ln.b_shunt
        y[j, j] += ys + 0.5j * ln.b_shunt

    p_gen = {b.id: 0.0 for b in c.buses}
    for g in c.generators:
        p_gen[g.bus] += g.p_gen / c.base_mva
    s_sched = np.array([complex(p_gen[b.id] - b.p_load / c.base_mva,
                                -b.q_load / c.base_mva) for b in c.buses])

    v = np.ones(n, dtype=complex)
    for b in c.buses:
        if b.kind in ("slack", "pv"):
            v[index[b.id]] = b.v_set
    for _ in range(sweeps):
        worst = 0.0
        for b in c.buses:
            k = index[b.id]
            if b.kind == "slack":
                continue
            if b.kind == "pv":
                # injected Q from the current state, same sign as s_sched
                q_k = (v[k] * np.conj(y[k] @ v)).imag
                s_k = complex(s_sched[k].real, q_k)
            else:
                s_k = s_sched[k]
            v_new = (np.conj(s_k / v[k]) - (y[k] @ v - y[k, k] * v[k])) / y[k, k]
            if b.kind == "pv":
                v_new = b.v_set * v_new / abs(v_new)
            worst = max(worst, abs(v_new - v[k]))
            v[k] = v_new
        if worst < tol:
            break
    return {bid: v[index[bid]] for bid in ids}


class TestYbus:
    def test_single_line_hand_inversion(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.5,
                       "length_miles": 1.0}],
            "generators": []}))
        y = gw.build_ybus(c)
        assert y.matrix[0, 1] == pytest.approx(2j)
        assert y.matrix[0, 0] == pytest.approx(-2j)
        assert y.matrix[1, 1] == pytest.approx(-2j)

    def test_empty_network_zero_matrix(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}],
            "lines": [], "generators": []}))
        assert not gw.build_ybus(c).matrix.any()

    def test_out_of_service_line_excluded(self, ne39):
        d = gw.Disturbance(kind="line_outage", target="6-7", t_start=0.0,
                           duration=1.0)
        during = gw.apply_disturbance(ne39, d, "during")
        y_out = gw.build_ybus(during).matrix
        i = [b.id for b in ne39.buses].index(6)
        j = [b.id for b in ne39.buses].index(7)
        assert y_out[i, j] == 0.0

    def test_shunt_on_diagonal_only(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.5, "b_shunt": 0.1,
                       "length_miles": 1.0}],
            "generators": []}))
        y = gw.build_ybus(c)
        assert y.matrix[0, 0] == pytest.approx(-2j + 0.05j)
        assert y.matrix[0, 1] == pytest.approx(2j)

    def test_symmetry(self, ne39):
        y = gw.build_ybus(ne39).matrix
        assert np.allclose(y, y.T, atol=0.0)


class TestSolve:
    def test_no_load_fixed_point(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack", "v_set": 1.02},
                      {"id": 2}, {"id": 3}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.1,
                       "length_miles": 1.0},
                      {"from_bus": 2, "to_bus": 3, "x": 0.1,
                       "length_miles": 1.0}],
            "generators": []}))
        sol = gw.solve_power_flow(c)
        assert np.allclose(sol.v_mag, 1.02)
        assert np.allclose(sol.v_ang, 0.0, atol=1e-12)

    def test_no_load_unity_slack_converged_at_start(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.1,
                       "length_miles": 1.0}],
            "generators": []}))
        sol = gw.solve_power_flow(c)
        assert sol.iterations == 0
        assert np.allclose(sol.v_mag, 1.0)

    def test_two_bus_against_gauss_seidel(self, twobus):
        sol = gw.solve_power_flow(twobus)
        assert sol.max_mismatch < 1e-8
        ref = gauss_seidel(twobus)
        for bid in (1, 2):
            v_ref = ref[bid]
            assert sol.v_at(bid) == pytest.approx(abs(v_ref), abs=1e-6)
            assert sol.ang_at(bid) == pytest.approx(cmath.phase(v_ref), abs=1e-6)

    def test_39_bus_converges_quickly(self, ne39):
        sol = gw.solve_power_flow(ne39)
        assert sol.iterations <= 10
        assert sol.max_mismatch < 1e-8

    def test_slack_angle_zero(self, ne39):
        sol = gw.solve_power_flow(ne39)
        assert sol.ang_at(31) == 0.0

    def test_power_balance(self, ne39):
        sol = gw.solve_power_flow(ne39)
        total_inj = float(np.sum(sol.p_inj))
        loss = 0.0
        for ln in ne39.lines:
            s_from, s_to = gw.line_flow(sol, ln)
            loss += (s_from + s_to).real
        assert total_inj == pytest.approx(loss, abs=1e-7)

    def test_lossless_network_zero_loss(self, pv_twobus):
        c = pv_twobus
        lines = tuple(gw.Line(from_bus=ln.from_bus, to_bus=ln.to_bus, r=0.0,
                              x=ln.x, length_miles=ln.length_miles)
                      for ln in c.lines)
        lossless = gw.PowerCase(base_mva=c.base_mva,
                                frequency_hz=c.frequency_hz, buses=c.buses,
                                lines=lines, generators=c.generators)
        sol = gw.solve_power_flow(lossless)
        assert float(np.sum(sol.p_inj)) == pytest.approx(0.0, abs=1e-7)

    def test_bus_reordering_invariance(self, ne39):
        sol = gw.solve_power_flow(ne39)
        shuffled = gw.PowerCase(
            base_mva=ne39.base_mva, frequency_hz=ne39.frequency_hz,
            buses=tuple(reversed(ne39.buses)), lines=ne39.lines,
            generators=ne39.generators)
        sol2 = gw.solve_power_flow(shuffled)
        for b in ne39.buses:
            assert sol2.v_at(b.id) == pytest.approx(sol.v_at(b.id), abs=1e-9)
            assert sol2.ang_at(b.id) == pytest.approx(sol.ang_at(b.id), abs=1e-9)

    def test_nonconvergence_reported(self, twobus):
        d = gw.Disturbance(kind="load_step", target=2, t_start=0.0,
                           magnitude_fraction=50.0)
        hopeless = gw.apply_disturbance(twobus, d, "during")
        with pytest.raises(ConvergenceError) as err:
            gw.solve_power_flow(hopeless, max_iter=15)
        assert err.value.iterations == 15

    def test_disconnected_load_bus_singular(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2},
                      {"id": 3, "p_load": 10.0}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.1,
                       "length_miles": 1.0}],
            "generators": []}))
        with pytest.raises(SingularJacobianError):
            gw.solve_power_flow(c)

    def test_csv_export_deterministic(self, twobus):
        sol = gw.solve_power_flow(twobus)
        csv = gw.powerflow.solution_csv(sol)
        assert csv.splitlines()[0] == "bus_id,v_mag_pu,v_ang_rad,p_inj_pu,q_inj_pu"
        assert csv == gw.powerflow.solution_csv(gw.solve_power_flow(twobus))
        assert "np.float64" not in csv


class TestLineFlow:
    def test_equal_voltages_no_flow(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.2,
                       "length_miles": 1.0}],
            "generators": []}))
        sol = gw.solve_power_flow(c)
        s_from, s_to = gw.line_flow(sol, c.lines[0])
        assert abs(s_from) == pytest.approx(0.0, abs=1e-9)
        assert abs(s_to) == pytest.approx(0.0, abs=1e-9)

    def test_angle_difference_drives_p(self, monkeypatch):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.2,
                       "length_miles": 1.0}],
            "generators": []}))
        sol = gw.solve_power_flow(c)
        forced = gw.PowerFlowSolution(
            bus_ids=sol.bus_ids, v_mag=np.array([1.0, 1.0]),
            v_ang=np.array([0.0, -0.1]), p_inj=sol.p_inj, q_inj=sol.q_inj,
            iterations=0, max_mismatch=0.0)
        s_from, _ = gw.line_flow(forced, c.lines[0])
        assert s_from.real == pytest.approx(math.sin(0.1) / 0.2, rel=1e-12)

    def test_shunt_reactive_contribution(self):
        c = gw.parse_case_json(json.dumps({
            "base_mva": 100.0, "frequency_hz": 60.0,
            "buses": [{"id": 1, "kind": "slack"}, {"id": 2}],
            "lines": [{"from_bus": 1, "to_bus": 2, "x": 0.2, "b_shunt": 0.1,
                       "length_miles": 1.0}],
            "generators": []}))
        sol = gw.solve_power_flow(c)
        forced = gw.PowerFlowSolution(
            bus_ids=sol.bus_ids, v_mag=np.array([1.0, 1.0]),
            v_ang=np.array([0.0, 0.0]), p_inj=sol.p_inj, q_inj=sol.q_inj,
            iterations=0, max_mismatch=0.0)
        s_from, _ = gw.line_flow(forced, c.lines[0])
        assert s_from.imag == pytest.approx(-0.05, rel=1e-12)

    def test_line_with_unknown_endpoint(self, twobus):
        sol = gw.solve_power_flow(twobus)
        ghost = gw.Line(from_bus=7, to_bus=2, x=0.3, length_miles=1.0,
                        id="7-2")
        with pytest.raises(gw.UnknownTargetError):
            gw.line_flow(sol, ghost)


class TestPhased:
    def test_step_switching(self, twobus):
        sol = gw.solve_power_flow(twobus)
        d = gw.Disturbance(kind="load_step", target=2, t_start=1.0,
                           magnitude_fraction=0.10, duration=0.5)
        during = gw.solve_power_flow(gw.apply_disturbance(twobus, d, "during"))
        phased = gw.PhasedSolutions(pre=sol, during=during, post=sol,
                                    t_on=1.0, t_off=1.5)
        assert phased.v_mag_at(2, 0.5) == sol.v_at(2)
        assert phased.v_mag_at(2, 1.2) == during.v_at(2)
        assert phased.v_mag_at(2, 2.0) == sol.v_at(2)

    def test_lag_approach(self, twobus):
        sol = gw.solve_power_flow(twobus)
        d = gw.Disturbance(kind="load_step", target=2, t_start=1.0,
                           magnitude_fraction=0.10)
        during = gw.solve_power_flow(gw.apply_disturbance(twobus, d, "during"))
        phased = gw.PhasedSolutions(pre=sol, during=during, post=during,
                                    t_on=1.0, t_off=None, lag_tau=0.2)
        v0, v1 = sol.v_at(2), during.v_at(2)
        # one time constant in: 1 - 1/e of the way there
        expected = v1 + (v0 - v1) * math.exp(-1.0)
        assert phased.v_mag_at(2, 1.2) == pytest.approx(expected, rel=1e-12)
        assert phased.v_mag_at(2, 1.0 + 3.0) == pytest.approx(v1, rel=1e-6)
