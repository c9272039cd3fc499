"""Steady-state AC power flow supplying initial and boundary conditions.

Newton-Raphson in polar form with a flat start. The Jacobian is assembled
from the complex partial derivatives of S = V conj(Y V), which keeps the
code free of the per-element H/N/J/L bookkeeping. Dense linear algebra is
fine at the network sizes this package targets (tens of buses).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cases import CaseError, Line, PowerCase, UnknownTargetError


class ConvergenceError(RuntimeError):
    """Newton iteration exhausted max_iter without meeting tolerance."""

    def __init__(self, iterations, mismatch):
        super().__init__(
            f"power flow did not converge after {iterations} iterations "
            f"(max mismatch {mismatch:.3e} pu)")
        self.iterations = iterations
        self.mismatch = mismatch


class SingularJacobianError(RuntimeError):
    def __init__(self, iteration):
        super().__init__(f"singular Jacobian at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class AdmittanceMatrix:
    bus_ids: tuple[int, ...]
    matrix: np.ndarray  # dense complex, bus order as in bus_ids

    @property
    def n(self):
        return len(self.bus_ids)

    def index(self, bus_id):
        try:
            return self.bus_ids.index(bus_id)
        except ValueError:
            raise UnknownTargetError(f"no bus {bus_id}") from None


def build_ybus(c: PowerCase) -> AdmittanceMatrix:
    """Assemble the bus admittance matrix from in-service lines.

    Off-diagonals carry -1/(r+jx); each diagonal accumulates the series
    admittances plus j*b_shunt/2 per incident line end.
    """
    bus_ids = tuple(b.id for b in c.buses)
    pos = {bid: i for i, bid in enumerate(bus_ids)}
    y = np.zeros((len(bus_ids), len(bus_ids)), dtype=complex)
    for ln in c.lines:
        if not ln.in_service:
            continue
        i, j = pos[ln.from_bus], pos[ln.to_bus]
        ys = 1.0 / complex(ln.r, ln.x)
        y[i, i] += ys + 0.5j * ln.b_shunt
        y[j, j] += ys + 0.5j * ln.b_shunt
        y[i, j] -= ys
        y[j, i] -= ys
    y.flags.writeable = False
    return AdmittanceMatrix(bus_ids, y)


@dataclass(frozen=True)
class PowerFlowSolution:
    bus_ids: tuple[int, ...]
    v_mag: np.ndarray   # pu
    v_ang: np.ndarray   # rad, slack at 0
    p_inj: np.ndarray   # pu on base_mva
    q_inj: np.ndarray   # pu
    iterations: int
    max_mismatch: float

    def index(self, bus_id):
        try:
            return self.bus_ids.index(bus_id)
        except ValueError:
            raise UnknownTargetError(f"no bus {bus_id}") from None

    def v_at(self, bus_id):
        return float(self.v_mag[self.index(bus_id)])

    def ang_at(self, bus_id):
        return float(self.v_ang[self.index(bus_id)])

    def p_inj_at(self, bus_id):
        return float(self.p_inj[self.index(bus_id)])

    def complex_voltage(self, bus_id):
        i = self.index(bus_id)
        return self.v_mag[i] * np.exp(1j * self.v_ang[i])


def _scheduled_injections(c: PowerCase):
    """Net scheduled complex injection per bus, pu on base_mva."""
    gen_p = {b.id: 0.0 for b in c.buses}
    for g in c.generators:
        gen_p[g.bus] += g.p_gen
    s = np.array([complex(gen_p[b.id] - b.p_load, -b.q_load) / c.base_mva
                  for b in c.buses])
    return s


def solve_power_flow(c: PowerCase, tol: float = 1e-8,
                     max_iter: int = 25) -> PowerFlowSolution:
    """Newton-Raphson power flow from a flat start.

    Mismatch is the infinity norm of scheduled-minus-calculated P at pv/pq
    buses and Q at pq buses. PV reactive limits are not enforced.
    """
    slacks = c.slack_buses
    if len(slacks) != 1:
        raise CaseError(f"power flow needs exactly one slack bus, found {len(slacks)}")

    adm = build_ybus(c)
    y = adm.matrix
    kinds = [b.kind for b in c.buses]
    pv = np.array([k == "pv" for k in kinds])
    pq = np.array([k == "pq" for k in kinds])
    pvpq = pv | pq

    vm = np.array([b.v_set if b.kind in ("slack", "pv") else 1.0 for b in c.buses])
    va = np.zeros(len(c.buses))
    s_sched = _scheduled_injections(c)

    ipvpq = np.flatnonzero(pvpq)
    ipq = np.flatnonzero(pq)

    def mismatch(v):
        s = v * np.conj(y @ v)
        ds = s - s_sched
        return np.concatenate([ds.real[ipvpq], ds.imag[ipq]])

    v = vm * np.exp(1j * va)
    f = mismatch(v)
    iterations = 0
    while np.max(np.abs(f), initial=0.0) > tol:
        if iterations >= max_iter:
            raise ConvergenceError(iterations, float(np.max(np.abs(f))))
        ibus = y @ v
        diag_v = np.diag(v)
        diag_i = np.diag(ibus)
        diag_vn = np.diag(v / np.abs(v))
        ds_dva = 1j * diag_v @ np.conj(diag_i - y @ diag_v)
        ds_dvm = diag_v @ np.conj(y @ diag_vn) + np.conj(diag_i) @ diag_vn
        jac = np.block([
            [ds_dva[np.ix_(ipvpq, ipvpq)].real, ds_dvm[np.ix_(ipvpq, ipq)].real],
            [ds_dva[np.ix_(ipq, ipvpq)].imag, ds_dvm[np.ix_(ipq, ipq)].imag],
        ])
        try:
            dx = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            raise SingularJacobianError(iterations) from None
        va[ipvpq] += dx[:len(ipvpq)]
        vm[ipq] += dx[len(ipvpq):]
        v = vm * np.exp(1j * va)
        f = mismatch(v)
        iterations += 1

    s = v * np.conj(y @ v)
    for a in (vm, va):
        a.flags.writeable = False
    p_inj = s.real.copy()
    q_inj = s.imag.copy()
    p_inj.flags.writeable = False
    q_inj.flags.writeable = False
    return PowerFlowSolution(
        bus_ids=adm.bus_ids, v_mag=vm, v_ang=va, p_inj=p_inj, q_inj=q_inj,
        iterations=iterations,
        max_mismatch=float(np.max(np.abs(f), initial=0.0)))


def line_flow(sol: PowerFlowSolution, line: Line):
    """Complex power entering the line at each end, pu.

    S = V1 (V1 - V2)* (G + jB) - j V1^2 B_c/2 with G + jB = 1/Z*; the to-end
    value swaps the roles of the two ends.
    """
    v1 = sol.complex_voltage(line.from_bus)
    v2 = sol.complex_voltage(line.to_bus)
    inv_zconj = 1.0 / complex(line.r, -line.x)
    s_from = v1 * np.conj(v1 - v2) * inv_zconj - 1j * abs(v1) ** 2 * line.b_shunt / 2
    s_to = v2 * np.conj(v2 - v1) * inv_zconj - 1j * abs(v2) ** 2 * line.b_shunt / 2
    return complex(s_from), complex(s_to)


def solution_csv(sol: PowerFlowSolution) -> str:
    rows = ["bus_id,v_mag_pu,v_ang_rad,p_inj_pu,q_inj_pu"]
    for i, bid in enumerate(sol.bus_ids):
        rows.append(f"{bid},{float(sol.v_mag[i])!r},{float(sol.v_ang[i])!r},"
                    f"{float(sol.p_inj[i])!r},{float(sol.q_inj[i])!r}")
    return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class PhasedSolutions:
    """Pre/during/post power flows plus the switching schedule.

    Boundary values for the wave solver step between the three quasi-static
    solutions at t_on and t_off, optionally smoothed by a first-order lag
    with time constant lag_tau (0 means an ideal step).
    """
    pre: PowerFlowSolution
    during: PowerFlowSolution
    post: PowerFlowSolution
    t_on: float
    t_off: float | None = None
    lag_tau: float = 0.0

    def _blend(self, t, a, b, t_switch):
        # value moving from a toward b after t_switch
        if self.lag_tau <= 0:
            return b
        return b + (a - b) * math.exp(-(t - t_switch) / self.lag_tau)

    def _value(self, t, pre_v, dur_v, post_v):
        if t < self.t_on:
            return pre_v
        if self.t_off is None or t < self.t_off:
            return self._blend(t, pre_v, dur_v, self.t_on)
        at_off = self._blend(self.t_off, pre_v, dur_v, self.t_on)
        return self._blend(t, at_off, post_v, self.t_off)

    def v_mag_at(self, bus_id, t):
        return self._value(t, self.pre.v_at(bus_id), self.during.v_at(bus_id),
                           self.post.v_at(bus_id))

    def v_ang_at(self, bus_id, t):
        return self._value(t, self.pre.ang_at(bus_id),
                           self.during.ang_at(bus_id), self.post.ang_at(bus_id))

    def p_inj_at(self, bus_id, t):
        return self._value(t, self.pre.p_inj_at(bus_id),
                           self.during.p_inj_at(bus_id),
                           self.post.p_inj_at(bus_id))
