"""Open-system dynamics of a 7-site excitation-transfer chain.

One excitation hops along a chain of 7 two-level sites while every site
dissipates toward its ground state and dephases.  Two integration routes are
compared: a brute-force RK4 integration of the master equation, and a
digital simulation that alternates Trotterized unitaries with single-qubit
noise channels.  The digital route converges to the exact one at first order
in the step size.
"""

import json
from pathlib import Path

import numpy as np

from fmosim.cli import parse_config
from fmosim.dynamics import evolve_trotter_open, initial_density, integrate_exact
from fmosim.qcore import trace_distance

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "example.json"


def main() -> None:
    cfg = parse_config(json.loads(CONFIG.read_text()))
    n = cfg.fmo.n_sites
    rho0 = initial_density(cfg.initial_state, n)
    t_max = 2.0

    print(f"=== {n}-site chain, excitation starts on site 1 ===")
    print(f"site energies        : {cfg.fmo.epsilon}")
    print(f"dissipation rates    : {cfg.noise.dissipation}")
    print(f"dephasing rates      : {cfg.noise.dephasing}")

    exact = integrate_exact(rho0, cfg.fmo, cfg.noise, t_max, 1e-3, record_every=250)
    print(f"\nexact populations ({exact.method}):")
    header = "   t    " + "".join(f"   p{j}  " for j in range(1, n + 1)) + "   loss"
    print(header)
    for t, p in zip(exact.times, exact.populations()):
        print(f"  {t:4.2f}  " + "".join(f" {v:6.4f}" for v in p)
              + f"  {1 - p.sum():6.4f}")

    print("\nthe excitation spreads along the chain while dissipation drains")
    print("it into the ground state (growing 'loss' column).")

    print("\n=== digital route: Trotter + channels, step-size convergence ===")
    for dt in (0.1, 0.05, 0.025):
        traj = evolve_trotter_open(rho0, cfg.fmo, cfg.noise, t_max, dt)
        err = trace_distance(traj.final_state(), exact.final_state())
        print(f"  dt = {dt:<6}  trace distance to exact at t={t_max}: {err:.3e}")
    print("halving dt halves the error: first-order convergence.")

    print("\n=== same step, two circuit realizations ===")
    noise0 = cfg.noise.uniform(n, 0.0, 0.0)
    dense = evolve_trotter_open(rho0, cfg.fmo, noise0, 1.0, 0.05, "dense-blocks")
    pulses = evolve_trotter_open(rho0, cfg.fmo, noise0, 1.0, 0.05, "compiled-pulses")
    worst = max(trace_distance(a, b) for a, b in zip(dense.states, pulses.states))
    print(f"dense two-site blocks vs compiled pulse schedules: worst trace "
          f"distance {worst:.2e}")

    out = Path(__file__).resolve().parent / "fmo_trajectory.csv"
    out.write_text(exact.to_csv())
    print(f"\nwrote {out.name} (columns: t, p1..p{n}, loss, trace, purity)")


if __name__ == "__main__":
    main()
