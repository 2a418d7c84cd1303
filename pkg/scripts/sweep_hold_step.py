"""Segment-ratio pattern of the piecewise-noise scenario versus the noise hold step.

For each hold step, counts the noise seeds whose max-pairwise-distance curve
shrinks on [0,100), grows on [100,200) and shrinks on [200,300).

    python3 scripts/sweep_hold_step.py --holds 0.01 1 2 5 10 --seeds 10
"""

import argparse
import dataclasses

import numpy as np

from excitable.analysis import segment_ratios
from excitable.contraction import distance_curve
from excitable.integrator import EnsembleRun, integrate_ensemble
from excitable.models import fhn_deriv
from excitable.scenarios import default_initial_conditions, get_scenario
from excitable.signals import realize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--holds", type=float, nargs="+", default=[0.01, 1.0, 2.0, 5.0, 10.0])
    ap.add_argument("--seeds", type=int, default=10)
    args = ap.parse_args()
    spec = get_scenario("fig1d")
    t0, t1, dt = spec.horizon
    ics = default_initial_conditions(spec.ics, spec.model, spec.params, spec.seed)
    m = len(ics)
    for hold in args.holds:
        sig = dataclasses.replace(spec.signal, hold_step=hold)
        cols = [realize(sig, t0, t1, dt, seed=s) for s in range(args.seeds)]
        inputs = np.repeat(np.column_stack(cols), m, axis=1)
        batch = integrate_ensemble(lambda x, u: fhn_deriv(x, u, spec.params), np.tile(ics, (args.seeds, 1)), inputs, t0, t1, dt)
        hits = []
        for j in range(args.seeds):
            run = EnsembleRun(t0, dt, batch.states[j * m : (j + 1) * m], cols[j], ics, "fhn", spec.params)
            r = segment_ratios(*distance_curve(run), [100.0, 200.0])
            hits.append(r[0] < 1 < r[1] and r[2] < 1)
        print(f"hold_step={hold:<6g} pattern (<1,>1,<1) in {sum(hits)}/{args.seeds} seeds")


if __name__ == "__main__":
    main()
