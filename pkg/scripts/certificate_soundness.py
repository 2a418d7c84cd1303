"""Randomized check of the average-contraction certificate on FHN ensembles.

Prints one JSON line per violating ensemble and a summary line.

    python3 scripts/certificate_soundness.py --ensembles 200 --seed 2024 --mu 0.2
"""

import argparse
import json
from dataclasses import asdict

from excitable.campaign import CampaignConfig, integrate_cases, sample_cases
from excitable.contraction import alpha_certificate
from excitable.signals import signal_to_dict


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ensembles", type=int, default=200)
    ap.add_argument("--members", type=int, default=5)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--mu", type=float, default=0.2)
    ap.add_argument("--t1", type=float, default=50.0)
    args = ap.parse_args()
    cfg = CampaignConfig(ensembles=args.ensembles, members=args.members, seed=args.seed, t1=args.t1)
    cases = sample_cases(cfg)
    runs = integrate_cases(cases, cfg.t1, cfg.dt)
    met = bad = 0
    for i, (case, run) in enumerate(zip(cases, runs)):
        c = alpha_certificate(run, args.mu, 0.0, cfg.t1)
        met += c.precondition_met
        if c.precondition_met and c.measured_ratio > c.alpha + 1e-9:
            bad += 1
            print(json.dumps({"ensemble": i, "params": asdict(case.params), "signal": signal_to_dict(case.signal), **c.to_dict()}))
    print(json.dumps({"ensembles": cfg.ensembles, "precondition_met": met, "violations": bad, "config": asdict(cfg)}))


if __name__ == "__main__":
    main()
