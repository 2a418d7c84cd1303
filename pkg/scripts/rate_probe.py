"""Observed contraction rate of an FHN pair in the lower region versus sqrt(min(mu, b)).

Integrates the pair (-1.6,-0.6), (-1.4,-0.7) with u = 0 and reports the
exit time from the lower region, the fitted exponential rate of the distance
and the eigenvalues of the Jacobian at rest.

    python3 scripts/rate_probe.py --mu 0.2
"""

import argparse
import math

import numpy as np

from excitable.contraction import metric_fhn, region_labels_fhn
from excitable.integrator import integrate_ensemble
from excitable.models import fhn_deriv, fhn_jacobian, fhn_rest_point, fig1_params


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mu", type=float, default=0.2)
    ap.add_argument("--t1", type=float, default=40.0)
    args = ap.parse_args()
    p = fig1_params()
    run = integrate_ensemble(lambda x, u: fhn_deriv(x, u, p), [[-1.6, -0.6], [-1.4, -0.7]], None, 0.0, args.t1, 0.01)
    inside = np.all(region_labels_fhn(run.states[:, :, 0], args.mu) == -1, axis=0)
    k = len(inside) if inside.all() else int(np.argmin(inside))
    d = metric_fhn(run.states[0], run.states[1], p.epsilon)
    t = run.times
    rate_in = -np.polyfit(t[1:k], np.log(d[1:k]), 1)[0] if k > 2 else float("nan")
    tail = t > args.t1 / 2
    rate_tail = -np.polyfit(t[tail], np.log(d[tail]), 1)[0]
    ev = np.linalg.eigvals(fhn_jacobian(fhn_rest_point(p), p))
    print(f"lambda = sqrt(min(mu, b)) = {math.sqrt(min(args.mu, p.b)):.4f}")
    print(f"exit from lower region at t = {k * run.dt:.2f}")
    print(f"fitted rate inside the region: {rate_in:.4f}; late-time rate: {rate_tail:.4f}")
    print(f"Jacobian eigenvalues at rest: {ev}")
    print(f"min(mu, b*eps) = {min(args.mu, p.b * p.epsilon):.4f}")


if __name__ == "__main__":
    main()
