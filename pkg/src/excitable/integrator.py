"""Fixed-step classical RK4 on a uniform grid.

Input handling: an array input is sample-and-hold, one value per step taken
at the step's left endpoint and used by all four stages. A callable input
``u(t)`` is evaluated at the stage times instead, which keeps the scheme
fourth order for smooth forcing.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .signals import Signal, grid_steps, realize

MAX_ABS_STATE = 1e6


class DivergenceError(RuntimeError):
    def __init__(self, step, member=None):
        self.step = step
        self.member = member
        where = f" (member {member})" if member is not None else ""
        super().__init__(f"state left the finite bound {MAX_ABS_STATE:g} at step {step}{where}")


class GridError(ValueError):
    pass


@dataclass
class Trajectory:
    t0: float
    dt: float
    states: np.ndarray
    inputs: np.ndarray
    names: tuple[str, ...] = ()

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(len(self.states)) * self.dt

    @property
    def t1(self) -> float:
        return self.t0 + (len(self.states) - 1) * self.dt

    def index(self, t: float) -> int:
        return time_index(self.t0, self.dt, len(self.states), t)


@dataclass
class EnsembleRun:
    """Trajectories from several initial conditions under one input realization.

    ``states`` has shape (members, N+1, n).
    """

    t0: float
    dt: float
    states: np.ndarray
    inputs: np.ndarray
    initial_conditions: np.ndarray
    model: str = ""
    params: Any = None
    signal: Any = None
    seed: int | None = None
    names: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.states.shape[1]) * self.dt

    @property
    def t1(self) -> float:
        return self.t0 + (self.states.shape[1] - 1) * self.dt

    def __len__(self):
        return self.states.shape[0]

    @property
    def trajectories(self) -> list[Trajectory]:
        return [Trajectory(self.t0, self.dt, s, self.inputs, self.names) for s in self.states]

    def index(self, t: float) -> int:
        return time_index(self.t0, self.dt, self.states.shape[1], t)


def time_index(t0, dt, n_points, t) -> int:
    k = round((t - t0) / dt)
    if abs(t0 + k * dt - t) > 1e-6 * dt or not 0 <= k < n_points:
        raise GridError(f"t={t} is not a grid point of [{t0}, {t0 + (n_points - 1) * dt}]")
    return k


def _check(x, k):
    if not np.max(np.abs(x)) <= MAX_ABS_STATE:
        member = None
        if x.ndim > 1:
            bad = ~np.all(np.isfinite(x) & (np.abs(x) <= MAX_ABS_STATE), axis=-1)
            member = int(np.flatnonzero(bad.reshape(-1))[0])
        raise DivergenceError(k, member)


def rk4(field: Callable, x0, path, t0: float, n: int, dt: float) -> np.ndarray:
    """Raw RK4 loop; returns the states array of shape (n+1, *x0.shape)."""
    x = np.array(x0, dtype=float)
    out = np.empty((n + 1,) + x.shape)
    out[0] = x
    h2 = 0.5 * dt
    h6 = dt / 6.0
    if callable(path):
        for k in range(n):
            t = t0 + k * dt
            u0, um, u1 = path(t), path(t + h2), path(t + dt)
            k1 = field(x, u0)
            k2 = field(x + h2 * k1, um)
            k3 = field(x + h2 * k2, um)
            k4 = field(x + dt * k3, u1)
            x = x + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            _check(x, k + 1)
            out[k + 1] = x
        return out
    for k in range(n):
        uk = 0.0 if path is None else path[k]
        k1 = field(x, uk)
        k2 = field(x + h2 * k1, uk)
        k3 = field(x + h2 * k2, uk)
        k4 = field(x + dt * k3, uk)
        x = x + h6 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check(x, k + 1)
        out[k + 1] = x
    return out


def _inputs_on_grid(path, t0, n, dt):
    if path is None:
        return np.zeros(n + 1)
    if callable(path):
        return np.array([path(t0 + k * dt) for k in range(n + 1)], dtype=float)
    path = np.asarray(path, dtype=float)
    if len(path) < n:
        raise GridError(f"input has {len(path)} samples, grid needs {n + 1}")
    if len(path) == n:
        path = np.concatenate((path, path[-1:]))
    return path[: n + 1]


def integrate(field: Callable, x0, path, t0: float, t1: float, dt: float, names=()) -> Trajectory:
    """Integrate ``x' = field(x, u)`` from ``t0`` to ``t1``.

    ``path`` is an array of input samples on the grid (held over each step),
    a callable ``u(t)`` evaluated at the stage times, or ``None`` for zero
    input.
    """
    n = grid_steps(t0, t1, dt)
    inputs = _inputs_on_grid(path, t0, n, dt)
    states = rk4(field, x0, path if callable(path) else (None if path is None else inputs), t0, n, dt)
    return Trajectory(t0, dt, states, inputs, tuple(names))


def integrate_ensemble(
    field: Callable,
    ics,
    signal: Signal | np.ndarray | None,
    t0: float,
    t1: float,
    dt: float,
    seed: int | None = None,
    *,
    workers: int = 1,
    model: str = "",
    params=None,
    names=(),
) -> EnsembleRun:
    """Integrate every initial condition against one frozen input realization.

    Members are vectorized; with ``workers > 1`` contiguous chunks of
    members run on a thread pool. Each member's arithmetic does not depend
    on the chunking, so the result is bitwise identical for any ``workers``.
    """
    ics = np.atleast_2d(np.asarray(ics, dtype=float))
    if len(ics) == 0:
        raise ValueError("need at least one initial condition")
    n = grid_steps(t0, t1, dt)
    if signal is None or isinstance(signal, np.ndarray):
        inputs = _inputs_on_grid(signal, t0, n, dt)
    else:
        inputs = realize(signal, t0, t1, dt, seed=seed)
    hold = None if signal is None else inputs

    chunks = np.array_split(np.arange(len(ics)), max(1, min(workers, len(ics))))

    def job(idx):
        try:
            return rk4(field, ics[idx], hold, t0, n, dt)
        except DivergenceError as exc:
            member = None if exc.member is None else int(idx[exc.member])
            raise DivergenceError(exc.step, member) from None

    if len(chunks) == 1:
        parts = [job(chunks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(job, chunks))
    states = np.concatenate(parts, axis=1).transpose(1, 0, 2).copy()
    return EnsembleRun(
        t0=t0,
        dt=dt,
        states=states,
        inputs=inputs,
        initial_conditions=ics.copy(),
        model=model,
        params=params,
        signal=signal,
        seed=seed,
        names=tuple(names),
    )
