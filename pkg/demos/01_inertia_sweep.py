#!/usr/bin/env python3
"""Sweep machine inertia on the packaged 2-bus case and watch the wave.

The single generator's stored energy constant H is swept from 1.5 to
15 MJ/MVA. Heavier rotors spread the same inertia over the same line,
so the medium gets slower and the launched disturbance flattens: peak
|chi| falls monotonically while the crossing time grows.
"""

from dataclasses import replace
from importlib import resources
from pathlib import Path

import gridwave as gw

OUT = Path(__file__).parent / "out" / "01-inertia-sweep"


def data(name: str) -> str:
    return resources.files("gridwave").joinpath(f"data/{name}").read_text()


def run_once(c: gw.PowerCase, scen: gw.Disturbance) -> tuple:
    sol = gw.solve_power_flow(c)
    imap = gw.distribute_inertia(c)
    p = gw.shortest_emw_path(c, imap, sol, 2, 1)
    cfg = gw.SolverConfig(t_end=1.5, dxi=0.5)
    w = gw.simulate(c, scen, p, cfg)
    peak = float(gw.amplitude_profile(w).max())
    return w, float(w.grid.nu[0]), peak


def main():
    base = gw.parse_case_json(data("twobus.json"))
    scen = gw.parse_scenario_json(data("scenario_load2.json"))
    OUT.mkdir(parents=True, exist_ok=True)

    print("2-bus inertia sweep: 10% load step at bus 2, wave read at bus 1")
    print(f"{'H MJ/MVA':>9}  {'nu mi/s':>8}  {'peak |chi|':>11}")
    kept = None
    for h in (1.5, 3.0, 6.0, 15.0):
        gens = tuple(replace(g, h_const=h, inertia_j=0.0)
                     for g in base.generators)
        w, nu, peak = run_once(replace(base, generators=gens), scen)
        print(f"{h:>9.1f}  {nu:>8.3f}  {peak:>11.4f}")
        if h == 3.0:
            kept = w

    (OUT / "wavefield_h3.csv").write_text(gw.solver.wavefield_csv(kept))
    print(f"\nwrote {OUT / 'wavefield_h3.csv'}")
    print("stiffer rotors make a slower medium and a gentler wavefront")


if __name__ == "__main__":
    main()
