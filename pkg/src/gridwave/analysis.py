"""Wave-characteristic extraction: arrival times, velocity, attenuation.

Arrival at a grid point is the first instant |chi| crosses a fraction of the
source-point peak. Velocities come from least-squares fits of distance
against arrival time, either globally over a window or per line segment
(parameters are piecewise-constant, so speeds are too).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .continuum import ContinuumGrid
from .solver import WaveField


@dataclass(frozen=True)
class ArrivalCurve:
    xi: tuple[float, ...]
    arrival_t: tuple[float | None, ...]
    threshold_frac: float


@dataclass(frozen=True)
class DivergenceReport:
    """Per-snapshot field differences between two runs on one grid."""

    times: tuple[float, ...]
    max_chi: tuple[float, ...]
    l2_chi: tuple[float, ...]
    max_theta: tuple[float, ...]
    l2_theta: tuple[float, ...]
    summary: float   # time-max of the chi L2 difference


def _chi_matrix(w: WaveField) -> np.ndarray:
    return np.stack([s.chi for s in w.snapshots])


def detect_arrival_times(w: WaveField, threshold_frac: float = 0.05) -> ArrivalCurve:
    """First |chi| threshold crossing per point, against the source peak."""
    if not 0.0 < threshold_frac < 1.0:
        raise ValueError(f"threshold_frac must be in (0,1), got {threshold_frac}")
    if not w.snapshots:
        raise ValueError("wave field holds no snapshots")
    chi = np.abs(_chi_matrix(w))
    source_peak = float(chi[:, 0].max())
    xi = tuple(float(x) for x in w.grid.xi)
    if source_peak == 0.0:
        return ArrivalCurve(xi, (None,) * w.grid.n_points, threshold_frac)
    thr = threshold_frac * source_peak
    arrivals = []
    times = np.asarray(w.times)
    for i in range(w.grid.n_points):
        hits = np.flatnonzero(chi[:, i] >= thr)
        arrivals.append(float(times[hits[0]]) if hits.size else None)
    return ArrivalCurve(xi, tuple(arrivals), threshold_frac)


def _fit(xs: np.ndarray, ts: np.ndarray) -> tuple[float, float]:
    t_var = float(np.var(ts))
    if t_var == 0.0:
        raise ValueError("arrival times do not vary; no slope to fit")
    t_mean, x_mean = ts.mean(), xs.mean()
    slope = float(np.sum((ts - t_mean) * (xs - x_mean)) / np.sum((ts - t_mean) ** 2))
    pred = x_mean + slope * (ts - t_mean)
    ss_res = float(np.sum((xs - pred) ** 2))
    ss_tot = float(np.sum((xs - x_mean) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, r2


def estimate_velocity(curve: ArrivalCurve,
                      window: tuple[float, float] | None = None) -> tuple[float, float]:
    """Least-squares front velocity (miles/s) and R^2 over detected points.

    ``window`` restricts the fit to xi in [lo, hi]; per-line estimates are
    available through segment_velocities.
    """
    pts = [(x, t) for x, t in zip(curve.xi, curve.arrival_t)
           if t is not None
           and (window is None or window[0] <= x <= window[1])]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 detected arrivals, have {len(pts)}")
    xs = np.array([p[0] for p in pts])
    ts = np.array([p[1] for p in pts])
    return _fit(xs, ts)


def segment_velocities(curve: ArrivalCurve, grid: ContinuumGrid) -> tuple:
    """(line_id, velocity, r2) per segment; velocity None when unfittable."""
    out = []
    for s, e, lid in grid.segments:
        xs, ts = [], []
        for i in range(s, e + 1):
            if curve.arrival_t[i] is not None:
                xs.append(curve.xi[i])
                ts.append(curve.arrival_t[i])
        if len(xs) < 3:
            out.append((lid, None, None))
            continue
        try:
            v, r2 = _fit(np.array(xs), np.array(ts))
        except ValueError:
            out.append((lid, None, None))
            continue
        out.append((lid, v, r2))
    return tuple(out)


def amplitude_profile(w: WaveField) -> np.ndarray:
    """Peak |chi| over time at every grid point."""
    if not w.snapshots:
        raise ValueError("wave field holds no snapshots")
    out = np.abs(_chi_matrix(w)).max(axis=0)
    out.setflags(write=False)
    return out


def segment_peak_amplitudes(w: WaveField) -> tuple:
    """(line_id, mean over the segment of peak |chi|) per line."""
    prof = amplitude_profile(w)
    return tuple((lid, float(prof[s:e + 1].mean()))
                 for s, e, lid in w.grid.segments)


def compare_models(a: WaveField, b: WaveField) -> DivergenceReport:
    """Max-norm and L2 differences of chi and delta_theta per snapshot."""
    if a.grid.n_points != b.grid.n_points or a.grid.dxi != b.grid.dxi:
        raise ValueError("wave fields live on different grids")
    if len(a.times) != len(b.times) or any(
            abs(x - y) > 1e-12 for x, y in zip(a.times, b.times)):
        raise ValueError("wave fields have different snapshot times")
    dxi = a.grid.dxi
    max_chi, l2_chi, max_theta, l2_theta = [], [], [], []
    for sa, sb in zip(a.snapshots, b.snapshots):
        dchi = sa.chi - sb.chi
        dth = sa.delta_theta - sb.delta_theta
        max_chi.append(float(np.max(np.abs(dchi))))
        l2_chi.append(math.sqrt(float(np.sum(dchi * dchi)) * dxi))
        max_theta.append(float(np.max(np.abs(dth))))
        l2_theta.append(math.sqrt(float(np.sum(dth * dth)) * dxi))
    return DivergenceReport(
        times=tuple(a.times), max_chi=tuple(max_chi), l2_chi=tuple(l2_chi),
        max_theta=tuple(max_theta), l2_theta=tuple(l2_theta),
        summary=max(l2_chi))


def arrivals_json(curve: ArrivalCurve) -> str:
    doc = {
        "threshold_frac": curve.threshold_frac,
        "xi_miles": list(curve.xi),
        "arrival_t_s": list(curve.arrival_t),
    }
    return json.dumps(doc, indent=2) + "\n"


def divergence_json(rep: DivergenceReport) -> str:
    doc = {
        "summary_l2_chi": rep.summary,
        "times": list(rep.times),
        "max_chi": list(rep.max_chi),
        "l2_chi": list(rep.l2_chi),
        "max_delta_theta": list(rep.max_theta),
        "l2_delta_theta": list(rep.l2_theta),
    }
    return json.dumps(doc, indent=2) + "\n"


def divergence_text(rep: DivergenceReport) -> str:
    rows = [f"{'t':>10}  {'max|dchi|':>12}  {'L2 chi':>12}  "
            f"{'max|dtheta|':>12}  {'L2 theta':>12}"]
    for t, mc, lc, mt, lt in zip(rep.times, rep.max_chi, rep.l2_chi,
                                 rep.max_theta, rep.l2_theta):
        rows.append(f"{t:>10.4f}  {mc:>12.4e}  {lc:>12.4e}  "
                    f"{mt:>12.4e}  {lt:>12.4e}")
    rows.append(f"summary (time-max L2 chi): {rep.summary:.6e}")
    return "\n".join(rows) + "\n"
