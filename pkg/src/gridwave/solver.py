"""Time integration of the first-order wave system on a path grid.

The second-order angle-deviation equation is advanced as the first-order
system lam_t = -nu*chi_xi, chi_t = -nu*gamma_xi with gamma = V^2*lam, using
the Richtmyer two-step Lax-Wendroff scheme inside each line segment. The
local characteristic invariants are V*lam +/- chi, traveling at -/+ nu*V.

At line junctions the media differ, so the new point value is solved from
three conditions: the invariant arriving along the left line, the invariant
arriving along the right line (each sampled at its characteristic foot,
which lies within one cell for any Courant number <= 1), and continuity of
the angle-gradient power flux kappa*lam where kappa = b/nu. The far end of
the path absorbs outgoing waves by setting the inbound invariant to zero;
the alternative fictitious-point extrapolation is kept behind a flag.

Voltage is quasi-static: re-solved from bus boundary values each step, after
which gamma is recomputed as V^2*lam exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .cases import Disturbance, PowerCase, apply_disturbance
from .continuum import (ContinuumGrid, FieldState, _frozen, discretize_path,
                        initial_conditions, solve_voltage_profile)
from .inertia import distribute_inertia
from .pathfind import EmwPath
from .powerflow import PhasedSolutions, solve_power_flow

MODELS = ("homogeneous", "nonhomogeneous")
BOUNDARY_MODES = ("characteristic", "fictitious")

# detector threshold: a healthy linear run stays within a small multiple of
# the forcing amplitude; 1000x is unambiguous blow-up
BLOWUP_FACTOR = 1e3


class InstabilityError(ArithmeticError):
    def __init__(self, message: str, step: int | None = None,
                 index: int | None = None):
        where = []
        if step is not None:
            where.append(f"step {step}")
        if index is not None:
            where.append(f"index {index}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.message = message
        self.step = step
        self.index = index


@dataclass(frozen=True)
class SolverConfig:
    """Integration settings; courant <= 1 guarantees linear stability."""

    t_end: float
    courant: float = 0.9
    model: str = "nonhomogeneous"
    boundary_mode: str = "characteristic"
    record_stride: int = 1
    dxi: float = 0.2
    lag_tau: float = 0.0
    p_only: bool = False

    def __post_init__(self):
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.courant <= 0.0:
            raise ValueError(f"courant must be positive, got {self.courant}")
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(
                f"boundary_mode must be one of {BOUNDARY_MODES}, got {self.boundary_mode!r}")
        if self.record_stride < 1:
            raise ValueError("record_stride must be at least 1")
        if self.dxi <= 0.0:
            raise ValueError(f"dxi must be positive, got {self.dxi}")
        if self.lag_tau < 0.0:
            raise ValueError("lag_tau must be nonnegative")


@dataclass(frozen=True)
class BoundaryValues:
    """Values imposed at the source end and at path buses for one step."""

    delta_theta: float
    chi: float
    gamma: float
    v_source: float
    v_pins: MappingProxyType = field(default_factory=lambda: MappingProxyType({}))


@dataclass(frozen=True)
class WaveField:
    times: tuple[float, ...]
    snapshots: tuple[FieldState, ...]
    grid: ContinuumGrid


def cfl_timestep(grid: ContinuumGrid, v_field: np.ndarray,
                 courant: float) -> float:
    """dt = courant * dxi / max(nu*V)."""
    if courant <= 0.0:
        raise ValueError(f"courant must be positive, got {courant}")
    speed = float(np.max(grid.nu * np.asarray(v_field)))
    if not math.isfinite(speed) or speed <= 0.0:
        raise ValueError(f"maximum wave speed is {speed}, cannot form a timestep")
    return courant * grid.dxi / speed


def lw_linear_step(u: np.ndarray, a: np.ndarray, dxi: float,
                   dt: float) -> np.ndarray:
    """One-step Lax-Wendroff update for u_t + A u_xi = 0, endpoints held."""
    u = np.asarray(u, dtype=float)
    squeeze = u.ndim == 1
    if squeeze:
        u = u[:, None]
    a = np.atleast_2d(np.asarray(a, dtype=float))
    c1 = dt / (2.0 * dxi)
    c2 = dt * dt / (2.0 * dxi * dxi)
    d1 = u[2:] - u[:-2]
    d2 = u[2:] - 2.0 * u[1:-1] + u[:-2]
    out = u.copy()
    out[1:-1] = u[1:-1] - c1 * (d1 @ a.T) + c2 * (d2 @ (a @ a).T)
    return out[:, 0] if squeeze else out


def richtmyer_step(u: np.ndarray, flux, dxi: float, dt: float) -> np.ndarray:
    """Two-step Lax-Wendroff: half-step midpoints, then a full flux sweep.

    ``flux`` maps a state array (m, k) to fluxes (m, k) pointwise; no
    Jacobian is formed, so nonlinear fluxes work unchanged. Endpoints are
    held fixed (boundary handling belongs to the caller).
    """
    u = np.asarray(u, dtype=float)
    squeeze = u.ndim == 1
    if squeeze:
        u = u[:, None]
    f = np.asarray(flux(u), dtype=float)
    half = 0.5 * (u[1:] + u[:-1]) - (dt / (2.0 * dxi)) * (f[1:] - f[:-1])
    fh = np.asarray(flux(half), dtype=float)
    out = u.copy()
    out[1:-1] = u[1:-1] - (dt / dxi) * (fh[1:] - fh[:-1])
    return out[:, 0] if squeeze else out


def _segment_sweep(lam, chi, v, s, e, nu_seg, lam_start, dxi, dt):
    """Richtmyer update of interior points s+1..e-1 of one line segment.

    lam_start substitutes the stored junction lambda converted into this
    segment's medium. Fluxes are (nu*chi, nu*V^2*lam) with V frozen at the
    current time; half-step fluxes use midpoint voltages, exact for the
    piecewise-linear V profile.
    """
    lam_loc = lam[s:e + 1].copy()
    lam_loc[0] = lam_start
    chi_loc = chi[s:e + 1]
    v_loc = v[s:e + 1]

    f_lam = nu_seg * chi_loc
    f_chi = nu_seg * v_loc * v_loc * lam_loc
    c = dt / (2.0 * dxi)
    lam_half = 0.5 * (lam_loc[1:] + lam_loc[:-1]) - c * (f_lam[1:] - f_lam[:-1])
    chi_half = 0.5 * (chi_loc[1:] + chi_loc[:-1]) - c * (f_chi[1:] - f_chi[:-1])
    v_half = 0.5 * (v_loc[1:] + v_loc[:-1])

    fh_lam = nu_seg * chi_half
    fh_chi = nu_seg * v_half * v_half * lam_half
    c2 = dt / dxi
    lam_new = lam_loc[1:-1] - c2 * (fh_lam[1:] - fh_lam[:-1])
    chi_new = chi_loc[1:-1] - c2 * (fh_chi[1:] - fh_chi[:-1])
    return lam_new, chi_new


def _kappa(grid: ContinuumGrid, idx: int) -> float:
    return grid.b[idx] / grid.nu[idx]


def step_emw(state: FieldState, grid: ContinuumGrid, bc: BoundaryValues,
             dt: float, model: str = "nonhomogeneous",
             boundary_mode: str = "characteristic") -> FieldState:
    """Advance the wave fields one step of size dt."""
    n = grid.n_points
    lam, chi, v = state.lam, state.chi, state.v
    lam_new = lam.copy()
    chi_new = chi.copy()

    for s, e, _lid in grid.segments:
        nu_seg = grid.nu[e]
        lam_start = lam[s]
        if s > 0:
            lam_start *= _kappa(grid, s) / _kappa(grid, s + 1)
        li, ci = _segment_sweep(lam, chi, v, s, e, nu_seg, lam_start, grid.dxi, dt)
        lam_new[s + 1:e] = li
        chi_new[s + 1:e] = ci

    # junction points: characteristic feet on both sides plus flux continuity
    for s, e, _lid in grid.segments[:-1]:
        j = e
        nu_l, nu_r = grid.nu[j], grid.nu[j + 1]
        kap_l, kap_r = _kappa(grid, j), _kappa(grid, j + 1)
        vj = v[j]
        wl = nu_l * vj * dt / grid.dxi
        r_plus = ((1.0 - wl) * (v[j] * lam[j] + chi[j])
                  + wl * (v[j - 1] * lam[j - 1] + chi[j - 1]))
        lam_jr = lam[j] * kap_l / kap_r
        wr = nu_r * vj * dt / grid.dxi
        r_minus = ((1.0 - wr) * (v[j] * lam_jr - chi[j])
                   + wr * (v[j + 1] * lam[j + 1] - chi[j + 1]))
        lam_l = kap_r * (r_plus + r_minus) / (vj * (kap_l + kap_r))
        lam_new[j] = lam_l
        chi_new[j] = r_plus - vj * lam_l

    # far end
    last = n - 1
    if boundary_mode == "characteristic":
        # absorbing: nothing re-enters, so V*lam - chi = 0 there
        w = grid.nu[last] * v[last] * dt / grid.dxi
        r_plus = ((1.0 - w) * (v[last] * lam[last] + chi[last])
                  + w * (v[last - 1] * lam[last - 1] + chi[last - 1]))
        lam_new[last] = r_plus / (2.0 * v[last])
        chi_new[last] = 0.5 * r_plus
    else:
        # fictitious grid point, extrapolated with the stated 2,-2 weights
        nu_seg = grid.nu[last]
        lam_g = 2.0 * lam[last] - 2.0 * lam[last - 1]
        chi_g = 2.0 * chi[last] - 2.0 * chi[last - 1]
        v_g = v[last]
        f_lam = nu_seg * np.array([chi[last - 1], chi[last], chi_g])
        f_chi = nu_seg * np.array([v[last - 1] ** 2 * lam[last - 1],
                                   v[last] ** 2 * lam[last],
                                   v_g * v_g * lam_g])
        lam_tri = np.array([lam[last - 1], lam[last], lam_g])
        chi_tri = np.array([chi[last - 1], chi[last], chi_g])
        c = dt / (2.0 * grid.dxi)
        lam_half = 0.5 * (lam_tri[1:] + lam_tri[:-1]) - c * (f_lam[1:] - f_lam[:-1])
        chi_half = 0.5 * (chi_tri[1:] + chi_tri[:-1]) - c * (f_chi[1:] - f_chi[:-1])
        v_half = np.array([0.5 * (v[last - 1] + v[last]), v[last]])
        fh_lam = nu_seg * chi_half
        fh_chi = nu_seg * v_half * v_half * lam_half
        c2 = dt / grid.dxi
        lam_new[last] = lam[last] - c2 * (fh_lam[1] - fh_lam[0])
        chi_new[last] = chi[last] - c2 * (fh_chi[1] - fh_chi[0])

    # source end is driven
    chi_new[0] = bc.chi

    # quasi-static voltage refresh, then the flux coupling
    if model == "homogeneous":
        v_new = np.ones(n)
    else:
        far_bus = grid.bus_markers[last]
        v_far = bc.v_pins.get(far_bus, v[last])
        v_new = solve_voltage_profile(grid, bc.v_source, v_far, dict(bc.v_pins))
    lam_new[0] = bc.gamma / (v_new[0] * v_new[0])

    theta_new = state.delta_theta.copy()
    theta_new[1:] += 0.5 * dt * (chi[1:] + chi_new[1:])
    theta_new[last] = theta_new[last - 1]
    theta_new[0] = bc.delta_theta

    gamma_new = v_new * v_new * lam_new

    for name, arr in (("lam", lam_new), ("chi", chi_new),
                      ("delta_theta", theta_new)):
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise InstabilityError(
                f"non-finite {name} value", index=int(bad[0]))

    return FieldState(delta_theta=_frozen(theta_new), chi=_frozen(chi_new),
                      lam=_frozen(lam_new), gamma=_frozen(gamma_new),
                      v=_frozen(v_new), time=state.time + dt)


def _phase_cases(c: PowerCase, d: Disturbance, p_only: bool):
    return (apply_disturbance(c, d, "pre", p_only=p_only),
            apply_disturbance(c, d, "during", p_only=p_only),
            apply_disturbance(c, d, "post", p_only=p_only))


def simulate(c: PowerCase, scenario: Disturbance, path: EmwPath,
             cfg: SolverConfig) -> WaveField:
    """Run the full pipeline along a path for one disturbance scenario.

    Boundary values at xi=0 come from phase-stepped power flows at the
    path's source bus: angle deviation delta_theta(0,t), its finite-
    difference rate chi(0,t), the flux gamma(0,t) = b*nu*dP with dP the
    injection change against the pre phase, and V(0,t). Junction and far
    buses pin the voltage profile each step.
    """
    pre_c, dur_c, post_c = _phase_cases(c, scenario, cfg.p_only)
    sols = PhasedSolutions(
        pre=solve_power_flow(pre_c),
        during=solve_power_flow(dur_c),
        post=solve_power_flow(post_c),
        t_on=scenario.t_start,
        t_off=(scenario.t_start + scenario.duration
               if scenario.duration is not None else None),
        lag_tau=cfg.lag_tau)

    imap = distribute_inertia(c)
    grid = discretize_path(path, imap, cfg.dxi, omega0=c.omega0)
    state = initial_conditions(grid, sols.pre, scenario)
    if cfg.model == "homogeneous":
        state = state.with_fields(v=np.ones(grid.n_points))

    dt = cfl_timestep(grid, state.v, cfg.courant)
    n_steps = max(1, math.ceil(cfg.t_end / dt))

    src = path.buses[0]
    pin_buses = [bus for idx, bus in grid.bus_markers.items() if idx != 0]
    pre_ang = sols.pre.ang_at(src)
    pre_p = sols.pre.p_inj_at(src)
    b0, nu0 = grid.b[0], grid.nu[0]

    times = [0.0]
    snaps = [state]
    forced = float(np.max(np.abs(state.chi)))
    for k in range(1, n_steps + 1):
        t1 = k * dt
        dth = sols.v_ang_at(src, t1) - pre_ang
        chi_b = (dth - (sols.v_ang_at(src, t1 - dt) - pre_ang)) / dt
        gamma_b = b0 * nu0 * (sols.p_inj_at(src, t1) - pre_p)
        if cfg.model == "homogeneous":
            v_src, pins = 1.0, {bus: 1.0 for bus in pin_buses}
        else:
            v_src = sols.v_mag_at(src, t1)
            pins = {bus: sols.v_mag_at(bus, t1) for bus in pin_buses}
        bc = BoundaryValues(delta_theta=dth, chi=chi_b, gamma=gamma_b,
                            v_source=v_src, v_pins=MappingProxyType(pins))
        try:
            state = step_emw(state, grid, bc, dt, model=cfg.model,
                             boundary_mode=cfg.boundary_mode)
        except InstabilityError as err:
            raise InstabilityError(err.message, step=k, index=err.index) from None

        forced = max(forced, abs(chi_b), abs(gamma_b) / v_src)
        peak = float(np.max(np.abs(state.chi)))
        if forced > 0.0 and peak > BLOWUP_FACTOR * forced:
            raise InstabilityError(
                f"chi magnitude {peak:.3e} exceeds {BLOWUP_FACTOR:.0e} x "
                f"forced scale {forced:.3e}", step=k,
                index=int(np.argmax(np.abs(state.chi))))
        if k % cfg.record_stride == 0 or k == n_steps:
            times.append(t1)
            snaps.append(state)

    return WaveField(times=tuple(times), snapshots=tuple(snaps), grid=grid)


def wavefield_csv(w: WaveField) -> str:
    xi = w.grid.xi
    rows = ["t,xi,delta_theta,chi,v"]
    for t, snap in zip(w.times, w.snapshots):
        for i in range(w.grid.n_points):
            rows.append(f"{float(t)!r},{float(xi[i])!r},"
                        f"{float(snap.delta_theta[i])!r},"
                        f"{float(snap.chi[i])!r},{float(snap.v[i])!r}")
    return "\n".join(rows) + "\n"
