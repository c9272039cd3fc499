"""One-dimensional continuum grid along a transmission path.

A path of lines becomes a uniform grid of spacing dxi. Per-mile line
parameters (susceptance b, conductance g, inertia density j_h) are
piecewise-constant per line; grid points at bus junctions are shared, with
parameters owned by the line arriving from the left. The wave parameter nu
satisfies nu^2 = b/(j_h*omega0), giving local front speed nu*V.

Per-line interval counts are round(length/dxi), so a line's discretized
length is the nearest multiple of dxi; all wave kinematics downstream use
grid coordinates, which keeps measured and predicted speeds consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from types import MappingProxyType

import numpy as np

from .inertia import InertiaMap
from .pathfind import EmwPath
from .powerflow import PowerFlowSolution

DEFAULT_OMEGA0 = 2.0 * math.pi * 60.0


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ContinuumGrid:
    """Spatial grid with piecewise-constant per-mile parameters."""

    n_points: int
    dxi: float
    b: np.ndarray
    g: np.ndarray
    j_h: np.ndarray
    nu: np.ndarray
    bus_markers: MappingProxyType          # grid index -> bus id
    segments: tuple[tuple[int, int, str], ...]  # (start, end, line id) per line

    @property
    def xi(self) -> np.ndarray:
        return _frozen(np.arange(self.n_points) * self.dxi)

    def segment_of(self, index: int) -> tuple[int, int, str]:
        for s, e, lid in self.segments:
            if s <= index <= e:
                return s, e, lid
        raise IndexError(f"grid index {index} out of range")


@dataclass(frozen=True)
class FieldState:
    """Wave fields on a grid at one instant.

    delta_theta is the rotor-angle deviation (rad), chi its time derivative
    (rad/s), lam the scaled spatial gradient -nu*d(delta_theta)/dxi, gamma
    the voltage-weighted flux V^2*lam, v the voltage profile (pu).
    """

    delta_theta: np.ndarray
    chi: np.ndarray
    lam: np.ndarray
    gamma: np.ndarray
    v: np.ndarray
    time: float

    def with_fields(self, **kw) -> "FieldState":
        kw = {k: _frozen(a) if isinstance(a, np.ndarray) else a
              for k, a in kw.items()}
        return replace(self, **kw)


def discretize_path(p: EmwPath, imap: InertiaMap, dxi: float,
                    omega0: float = DEFAULT_OMEGA0) -> ContinuumGrid:
    """Lay a uniform grid over the path's lines, sharing junction points."""
    if dxi <= 0.0:
        raise ValueError(f"dxi must be positive, got {dxi}")
    if not p.lines:
        raise ValueError("path has no lines to discretize")
    shortest = min(ln.length_miles for ln in p.lines)
    if dxi > shortest / 2.0:
        raise ValueError(
            f"dxi={dxi} exceeds half the shortest line ({shortest} miles)")

    counts = [int(round(ln.length_miles / dxi)) for ln in p.lines]
    n = 1 + sum(counts)
    b = np.empty(n)
    g = np.empty(n)
    j_h = np.empty(n)
    segments = []
    markers = {0: p.buses[0]}
    start = 0
    for ln, cnt, nxt_bus in zip(p.lines, counts, p.buses[1:]):
        end = start + cnt
        lo = start if start == 0 else start + 1  # junction owned by left line
        b[lo:end + 1] = ln.b_per_mile()
        g[lo:end + 1] = ln.g_per_mile()
        j_h[lo:end + 1] = imap.density_for(ln)
        segments.append((start, end, ln.id))
        markers[end] = nxt_bus
        start = end

    nu = np.sqrt(b / (j_h * omega0))
    return ContinuumGrid(
        n_points=n, dxi=dxi, b=_frozen(b), g=_frozen(g), j_h=_frozen(j_h),
        nu=_frozen(nu), bus_markers=MappingProxyType(markers),
        segments=tuple(segments))


def _derivs(field: np.ndarray, i: int, dxi: float) -> tuple[float, float]:
    d1 = (field[i + 1] - field[i - 1]) / (2.0 * dxi)
    d2 = (field[i + 1] - 2.0 * field[i] + field[i - 1]) / (dxi * dxi)
    return d1, d2


def _deviation(b: float, g: float, v: np.ndarray, theta: np.ndarray,
               i: int, dxi: float) -> tuple[float, float]:
    t1, t2 = _derivs(theta, i, dxi)
    v1, v2 = _derivs(v, i, dxi)
    vi = v[i]
    angle_part = vi * vi * t2 + 2.0 * vi * v1 * t1
    volt_part = vi * v2 - vi * vi * t1 * t1
    dp = -g * volt_part - b * angle_part
    dq = g * angle_part - b * volt_part
    return dp, dq


def _check_interior(grid: ContinuumGrid, i: int) -> None:
    if not 1 <= i <= grid.n_points - 2:
        raise IndexError(
            f"index {i} has no centered stencil on a {grid.n_points}-point grid")


def power_deviation_lossless(grid: ContinuumGrid, v: np.ndarray,
                             theta: np.ndarray, i: int) -> tuple[float, float]:
    """Per-unit-length (dP, dQ) drawn by the wave at interior point i, g = 0."""
    _check_interior(grid, i)
    return _deviation(grid.b[i], 0.0, v, theta, i, grid.dxi)


def power_deviation_lossy(grid: ContinuumGrid, v: np.ndarray,
                          theta: np.ndarray, i: int) -> tuple[float, float]:
    """Per-unit-length (dP, dQ) including the ohmic g terms."""
    _check_interior(grid, i)
    return _deviation(grid.b[i], grid.g[i], v, theta, i, grid.dxi)


def solve_voltage_profile(grid: ContinuumGrid, v_left: float, v_right: float,
                          pins: dict | None = None) -> np.ndarray:
    """Exact solution of the discrete Laplace equation for V along the grid.

    With no interior pins the solution is the straight line between v_left
    and v_right. ``pins`` maps bus id -> fixed pu voltage; every marker bus
    present in it becomes a Dirichlet node, and the solution is linear
    between consecutive fixed nodes, which satisfies the interior
    second-difference equation exactly.
    """
    if v_left <= 0.0 or v_right <= 0.0:
        raise ValueError("boundary voltages must be positive")
    n = grid.n_points
    fixed_idx = [0]
    fixed_val = [v_left]
    if pins:
        for idx in sorted(grid.bus_markers):
            if idx in (0, n - 1):
                continue
            bus = grid.bus_markers[idx]
            if bus in pins:
                if pins[bus] <= 0.0:
                    raise ValueError(f"pinned voltage at bus {bus} must be positive")
                fixed_idx.append(idx)
                fixed_val.append(pins[bus])
    fixed_idx.append(n - 1)
    fixed_val.append(v_right)
    return _frozen(np.interp(np.arange(n), fixed_idx, fixed_val))


def initial_conditions(grid: ContinuumGrid, sol: PowerFlowSolution,
                       d=None) -> FieldState:
    """Equilibrium state: zero deviation fields, V from the solved case."""
    n = grid.n_points
    first = min(grid.bus_markers)
    last = max(grid.bus_markers)
    pins = {bus: sol.v_at(bus) for idx, bus in grid.bus_markers.items()
            if idx not in (first, last)}
    v = solve_voltage_profile(grid, sol.v_at(grid.bus_markers[first]),
                              sol.v_at(grid.bus_markers[last]), pins)
    zero = _frozen(np.zeros(n))
    return FieldState(delta_theta=zero, chi=zero, lam=zero,
                      gamma=zero, v=v, time=0.0)


def grid_csv(grid: ContinuumGrid) -> str:
    rows = ["index,xi_miles,b,g,j_h,nu,bus_id"]
    xi = grid.xi
    for i in range(grid.n_points):
        bus = grid.bus_markers.get(i, "")
        rows.append(f"{i},{float(xi[i])!r},{float(grid.b[i])!r},"
                    f"{float(grid.g[i])!r},{float(grid.j_h[i])!r},"
                    f"{float(grid.nu[i])!r},{bus}")
    return "\n".join(rows) + "\n"
