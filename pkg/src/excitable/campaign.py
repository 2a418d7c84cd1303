"""Randomized FHN ensembles for empirical checks of the contraction theory.

Every ensemble draws admissible parameters, one input from the signal
catalogue and uniform initial conditions. All ensembles are integrated in a
single vectorized RK4 pass (parameters and inputs broadcast per member) and
then split back into ordinary EnsembleRun objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import EnsembleRun, rk4
from .models import FHN_STATE, FhnParams, fhn_deriv
from .signals import Constant, NoiseSegment, PiecewiseGaussianNoise, Signal, Sine, Square, grid_steps, realize

SIGNAL_KINDS = ("constant", "sine", "square", "noise")


@dataclass(frozen=True)
class CampaignConfig:
    ensembles: int = 200
    members: int = 5
    seed: int = 2024
    t1: float = 50.0
    dt: float = 0.01
    v_box: tuple[float, float] = (-2.0, 2.0)
    w_box: tuple[float, float] = (-1.0, 1.0)


@dataclass(frozen=True)
class Case:
    params: FhnParams
    signal: Signal
    ics: np.ndarray
    noise_seed: int


def random_params(rng) -> FhnParams:
    b = rng.uniform(0.5, 0.95)
    a = rng.uniform(1 - 2 * b / 3, 1.0)
    return FhnParams(a=float(a), b=float(b), epsilon=float(rng.uniform(0.04, 0.12)))


def random_signal(rng, t1: float) -> Signal:
    kind = SIGNAL_KINDS[rng.integers(len(SIGNAL_KINDS))]
    if kind == "constant":
        return Constant(float(rng.uniform(0.0, 0.8)))
    if kind == "sine":
        return Sine(
            bias=float(rng.uniform(0.0, 0.8)),
            amplitude=float(rng.uniform(0.0, 0.4)),
            angular_frequency=float(rng.uniform(0.05, 0.5)),
            phase=float(rng.uniform(0.0, 2 * math.pi)),
        )
    if kind == "square":
        return Square(
            period=float(rng.uniform(10.0, 80.0)),
            amplitude=float(rng.uniform(0.0, 1.0)),
            duty_cycle=float(rng.uniform(0.1, 0.9)),
        )
    seg = NoiseSegment(0.0, t1, float(rng.uniform(0.0, 0.6)), float(rng.uniform(0.0, 0.3)))
    return PiecewiseGaussianNoise(segments=(seg,), seed=int(rng.integers(2**31)))


def sample_cases(cfg: CampaignConfig) -> list[Case]:
    rng = np.random.default_rng(cfg.seed)
    cases = []
    for _ in range(cfg.ensembles):
        p = random_params(rng)
        sig = random_signal(rng, cfg.t1)
        ics = np.column_stack((rng.uniform(*cfg.v_box, cfg.members), rng.uniform(*cfg.w_box, cfg.members)))
        cases.append(Case(p, sig, ics, int(getattr(sig, "seed", 0))))
    return cases


def integrate_cases(cases: list[Case], t1: float, dt: float, t0: float = 0.0) -> list[EnsembleRun]:
    """One batched RK4 pass over every member of every case."""
    n = grid_steps(t0, t1, dt)
    sizes = [len(c.ics) for c in cases]
    rep = lambda vals: np.repeat(np.asarray(vals, dtype=float), sizes)  # noqa: E731
    batch = FhnParams(
        a=rep([c.params.a for c in cases]),
        b=rep([c.params.b for c in cases]),
        epsilon=rep([c.params.epsilon for c in cases]),
    )
    inputs = np.column_stack([realize(c.signal, t0, t1, dt, seed=c.noise_seed) for c in cases])
    x0 = np.concatenate([c.ics for c in cases])
    states = rk4(lambda x, u: fhn_deriv(x, u, batch), x0, np.repeat(inputs, sizes, axis=1), t0, n, dt)
    runs = []
    start = 0
    for j, (c, m) in enumerate(zip(cases, sizes)):
        runs.append(
            EnsembleRun(
                t0=t0,
                dt=dt,
                states=states[:, start : start + m].transpose(1, 0, 2).copy(),
                inputs=inputs[:, j].copy(),
                initial_conditions=c.ics.copy(),
                model="fhn",
                params=c.params,
                signal=c.signal,
                seed=c.noise_seed,
                names=FHN_STATE,
            )
        )
        start += m
    return runs
