"""Input signals u(t) and their frozen realizations on a uniform grid.

A signal is a small immutable description. ``realize`` turns it into an
array of samples on ``t0 + k*dt``; for the noise variant the realization is
a deterministic function of the seed, so one array can be shared by every
member of an ensemble.

Noise generation: ``numpy.random.default_rng(seed)`` (PCG64) draws one
``standard_normal`` value per hold interval, in time order, in a single
call. Hold intervals are counted in whole grid steps from ``t0``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np

__all__ = [
    "Constant",
    "Sine",
    "Square",
    "NoiseSegment",
    "PiecewiseGaussianNoise",
    "Samples",
    "Signal",
    "SignalError",
    "grid_steps",
    "realize",
    "evaluate",
    "signal_to_dict",
    "signal_from_dict",
]


class SignalError(ValueError):
    pass


@dataclass(frozen=True)
class Constant:
    level: float


@dataclass(frozen=True)
class Sine:
    """bias + amplitude * sin(angular_frequency * t + phase)"""

    bias: float
    amplitude: float
    angular_frequency: float
    phase: float = 0.0


@dataclass(frozen=True)
class Square:
    """Pulse train, high (= amplitude) on the first duty_cycle fraction of each period."""

    period: float
    amplitude: float
    duty_cycle: float
    phase: float = 0.0

    def __post_init__(self):
        if not self.period > 0:
            raise SignalError("square wave period must be positive")
        if not 0 < self.duty_cycle < 1:
            raise SignalError("duty_cycle must lie in (0, 1)")


@dataclass(frozen=True)
class NoiseSegment:
    t_start: float
    t_end: float
    bias: float
    variance: float

    def __post_init__(self):
        if not self.t_end > self.t_start:
            raise SignalError(f"noise segment [{self.t_start}, {self.t_end}) is empty")
        if not self.variance >= 0:
            raise SignalError("noise variance must be non-negative")


@dataclass(frozen=True)
class PiecewiseGaussianNoise:
    """Sample-and-hold Gaussian noise with piecewise constant bias and variance.

    ``hold_step=None`` holds each draw for a single integration step.
    """

    segments: tuple[NoiseSegment, ...]
    hold_step: float | None = None
    seed: int = 0

    def __post_init__(self):
        segs = tuple(
            s if isinstance(s, NoiseSegment) else NoiseSegment(**s) for s in self.segments
        )
        object.__setattr__(self, "segments", segs)
        for prev, nxt in zip(segs, segs[1:]):
            if nxt.t_start < prev.t_end:
                raise SignalError("noise segments must be ordered and non-overlapping")
        if self.hold_step is not None and not self.hold_step > 0:
            raise SignalError("hold_step must be positive")


@dataclass(frozen=True)
class Samples:
    """Tabulated input with previous-sample hold."""

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.times) == 0 or len(self.times) != len(self.values):
            raise SignalError("samples need matching, non-empty times and values")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise SignalError("sample times must be strictly increasing")


Signal = Union[Constant, Sine, Square, PiecewiseGaussianNoise, Samples]

_TAGS = {
    Constant: "constant",
    Sine: "sine",
    Square: "square",
    PiecewiseGaussianNoise: "noise",
    Samples: "samples",
}
_BY_TAG = {tag: cls for cls, tag in _TAGS.items()}


def grid_steps(t0: float, t1: float, dt: float) -> int:
    """Number of steps N with t0 + N*dt == t1 (up to rounding)."""
    if not dt > 0:
        raise SignalError("dt must be positive")
    if not t1 >= t0:
        raise SignalError("grid end precedes grid start")
    n = round((t1 - t0) / dt)
    if abs(n * dt - (t1 - t0)) > 1e-9 * max(1.0, abs(t1 - t0)):
        raise SignalError(f"dt={dt} does not divide [{t0}, {t1}]")
    return n


def _square(sig: Square, t):
    phase = np.mod(np.asarray(t, dtype=float) - sig.phase, sig.period)
    return np.where(phase < sig.duty_cycle * sig.period, sig.amplitude, 0.0)


def _samples(sig: Samples, t):
    times = np.asarray(sig.times)
    idx = np.searchsorted(times, np.asarray(t, dtype=float), side="right") - 1
    # before the first sample the first value is held backwards
    return np.asarray(sig.values)[np.clip(idx, 0, None)]


def evaluate(signal: Signal, t):
    """Value of a deterministic signal at time(s) ``t``."""
    if isinstance(signal, Constant):
        return np.full(np.shape(t), float(signal.level)) if np.ndim(t) else float(signal.level)
    if isinstance(signal, Sine):
        out = signal.bias + signal.amplitude * np.sin(signal.angular_frequency * np.asarray(t) + signal.phase)
        return out if np.ndim(t) else float(out)
    if isinstance(signal, Square):
        out = _square(signal, t)
        return out if np.ndim(t) else float(out)
    if isinstance(signal, Samples):
        out = _samples(signal, t)
        return out if np.ndim(t) else float(out)
    if isinstance(signal, PiecewiseGaussianNoise):
        raise SignalError("noise has no pointwise value; use realize()")
    raise TypeError(f"not a signal: {signal!r}")


def _realize_noise(sig: PiecewiseGaussianNoise, t0, n, dt, seed):
    if sig.hold_step is None:
        per_hold = 1
    else:
        per_hold = round(sig.hold_step / dt)
        if per_hold < 1 or abs(per_hold * dt - sig.hold_step) > 1e-9 * sig.hold_step:
            raise SignalError(f"dt={dt} does not divide hold_step={sig.hold_step}")
    idx = np.arange(n + 1)
    rng = np.random.default_rng(sig.seed if seed is None else seed)
    z = rng.standard_normal(n // per_hold + 1)[idx // per_hold]
    t = t0 + idx * dt
    out = np.zeros(n + 1)
    for seg in sig.segments:
        on = (t >= seg.t_start) & (t < seg.t_end)
        out[on] = seg.bias + math.sqrt(seg.variance) * z[on]
    return out


def realize(signal: Signal, t0: float, t1: float, dt: float, seed: int | None = None) -> np.ndarray:
    """Samples of ``signal`` on ``t0 + k*dt``, k = 0..N.

    ``seed`` overrides the seed stored in a noise signal; it is ignored by
    deterministic variants.
    """
    n = grid_steps(t0, t1, dt)
    if isinstance(signal, PiecewiseGaussianNoise):
        return _realize_noise(signal, t0, n, dt, seed)
    t = t0 + np.arange(n + 1) * dt
    return np.asarray(evaluate(signal, t), dtype=float)


def signal_to_dict(signal: Signal) -> dict:
    out = {"type": _TAGS[type(signal)]}
    out.update(asdict(signal))
    if isinstance(signal, Samples):
        out["times"] = list(signal.times)
        out["values"] = list(signal.values)
    if isinstance(signal, PiecewiseGaussianNoise):
        out["segments"] = [asdict(s) for s in signal.segments]
    return out


def signal_from_dict(data: dict) -> Signal:
    data = dict(data)
    try:
        cls = _BY_TAG[data.pop("type")]
    except KeyError as exc:
        raise SignalError(f"unknown or missing signal type in {data!r}") from exc
    if cls is PiecewiseGaussianNoise:
        data["segments"] = tuple(NoiseSegment(**s) for s in data.get("segments", ()))
    try:
        return cls(**data)
    except TypeError as exc:
        raise SignalError(str(exc)) from exc
