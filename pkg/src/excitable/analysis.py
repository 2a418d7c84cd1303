"""Event detection and event statistics on uniformly sampled series."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EventTrain:
    times: np.ndarray
    kind: str = "spike"
    channel: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float).reshape(-1)
        if np.any(np.diff(t) <= 0):
            raise ValueError("event times must be strictly increasing")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return len(self.times)

    def within(self, lo, hi) -> "EventTrain":
        t = self.times
        return EventTrain(t[(t >= lo) & (t <= hi)], self.kind, self.channel)


def detect_spikes(t, v, threshold: float = 1.0, channel: str = "v") -> EventTrain:
    """Upward threshold crossings (v[k-1] < thr <= v[k]), linearly interpolated."""
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    k = np.flatnonzero((v[:-1] < threshold) & (v[1:] >= threshold)) + 1
    frac = (threshold - v[k - 1]) / (v[k] - v[k - 1])
    times = t[k - 1] + frac * (t[k] - t[k - 1])
    return EventTrain(times, "spike", channel)


def detect_peaks(t, y, channel: str = "y") -> EventTrain:
    """Local maxima y[k-1] < y[k] >= y[k+1], refined by a parabola through the three samples."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(y) < 3:
        return EventTrain(np.empty(0), "peak", channel)
    k = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    curv = y0 - 2.0 * y1 + y2
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(curv < 0, 0.5 * (y0 - y2) / curv, 0.0)
    h = t[1] - t[0]
    times = t[k] + np.clip(off, -0.5, 0.5) * h
    # clipping can make two refined times touch on a plateau; keep them ordered
    if len(times) > 1:
        keep = np.concatenate(([True], np.diff(times) > 0))
        times = times[keep]
    return EventTrain(times, "peak", channel)


def event_sync_score(a: EventTrain, b: EventTrain, tol: float = 2.0) -> float:
    """2 * matches / (|a| + |b|) under greedy nearest one-to-one matching within tol.

    Candidate pairs are taken in order of increasing distance; ties are
    broken on the unordered pair of times so the score is symmetric.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    ta = np.asarray(getattr(a, "times", a), dtype=float)
    tb = np.asarray(getattr(b, "times", b), dtype=float)
    total = len(ta) + len(tb)
    if total == 0:
        return 1.0
    if len(ta) == 0 or len(tb) == 0:
        return 0.0
    cands = []
    for i, x in enumerate(ta):
        lo = np.searchsorted(tb, x - tol, side="left")
        hi = np.searchsorted(tb, x + tol, side="right")
        for j in range(lo, hi):
            y = tb[j]
            cands.append((abs(x - y), min(x, y), max(x, y), i, j))
    cands.sort(key=lambda c: c[:3])
    used_a, used_b = set(), set()
    matches = 0
    for _, _, _, i, j in cands:
        if i not in used_a and j not in used_b:
            used_a.add(i)
            used_b.add(j)
            matches += 1
    return 2.0 * matches / total


def circular_std(phases) -> float:
    phases = np.asarray(phases, dtype=float)
    r = abs(np.mean(np.exp(1j * phases)))
    if r <= 0:
        return math.inf
    return math.sqrt(max(0.0, -2.0 * math.log(min(r, 1.0))))


def peak_phase_dispersion(trains, period: float, window: tuple[float, float]) -> float | None:
    """Circular standard deviation of pooled event phases inside ``window``.

    Returns None when fewer than two events fall in the window.
    """
    if not period > 0:
        raise ValueError("period must be positive")
    lo, hi = window
    pooled = []
    for tr in trains:
        t = np.asarray(getattr(tr, "times", tr), dtype=float)
        pooled.append(t[(t >= lo) & (t <= hi)])
    t = np.concatenate(pooled) if pooled else np.empty(0)
    if len(t) < 2:
        return None
    return circular_std(np.mod(t, period) * (2 * math.pi / period))


def segment_ratios(t, curve, boundaries) -> list[float]:
    """d(end)/d(start) on each segment between the window ends and ``boundaries``.

    0/0 counts as 1 (nothing left to contract).
    """
    t = np.asarray(t, dtype=float)
    curve = np.asarray(curve, dtype=float)
    cuts = [float(t[0]), *[float(b) for b in boundaries], float(t[-1])]
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ValueError("boundaries must be increasing and inside the curve window")
    dt = t[1] - t[0]
    idx = [int(round((c - t[0]) / dt)) for c in cuts]
    out = []
    for i0, i1 in zip(idx, idx[1:]):
        d0, d1 = curve[i0], curve[i1]
        if d0 == 0:
            out.append(1.0 if d1 == 0 else math.inf)
        else:
            out.append(float(d1 / d0))
    return out
