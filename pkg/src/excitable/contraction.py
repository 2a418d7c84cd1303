"""Contraction metrics, regions, rates and certificates.

FHN metric:      d^2 = (dv^2 + dw^2 / epsilon) / 2
network metric:  d^2 = dx^T diag(1, 1/eps_e, 1, 1/eps_u, 1, 1/eps_u) dx

For two FHN solutions under a common input, d(d^2)/dt = 3 - nu exactly,
which is what ``integral_criterion`` integrates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from itertools import combinations
from typing import Callable

import numpy as np

from .integrator import EnsembleRun, GridError, Trajectory
from .models import EiNetworkParams, FhnParams

SQRT2 = math.sqrt(2.0)


class Region(enum.IntEnum):
    LOWER = -1
    INTERIOR = 0
    UPPER = 1


# ---------------------------------------------------------------- metrics


def metric_fhn(xa, xb, epsilon):
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    dv = xa[..., 0] - xb[..., 0]
    dw = xa[..., 1] - xb[..., 1]
    return np.sqrt(0.5 * dv * dv + dw * dw / (2.0 * epsilon))


def network_weights(eps_e, eps_u) -> np.ndarray:
    return np.array([1.0, 1.0 / eps_e, 1.0, 1.0 / eps_u, 1.0, 1.0 / eps_u])


def metric_net(xa, xb, eps_e, eps_u):
    diff = np.asarray(xa, dtype=float)[..., :6] - np.asarray(xb, dtype=float)[..., :6]
    return np.sqrt(np.sum(diff * diff * network_weights(eps_e, eps_u), axis=-1))


def metric_for(run: EnsembleRun) -> Callable:
    """Default metric for the model stored in ``run``."""
    p = run.params
    if run.model == "fhn":
        return lambda a, b: metric_fhn(a, b, p.epsilon)
    if run.model == "ei":
        return lambda a, b: metric_net(a, b, p.e_params.epsilon, p.u_params.epsilon)
    return lambda a, b: np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)


# ---------------------------------------------------------------- regions


def region_fhn(x, mu: float) -> Region:
    if mu < 0:
        raise ValueError("mu must be non-negative")
    return Region(int(region_labels_fhn(np.asarray(x, dtype=float)[..., 0], mu)))


def region_labels_fhn(v, mu: float) -> np.ndarray:
    """-1 (lower), +1 (upper) or 0 (interior) for each potential in ``v``.

    mu = 0 gives the open regions |v| > 1.
    """
    v = np.asarray(v, dtype=float)
    if mu == 0:
        return np.where(v < -1.0, -1, np.where(v > 1.0, 1, 0))
    s = math.sqrt(1.0 + mu)
    return np.where(v <= -s, -1, np.where(v >= s, 1, 0))


def region_net(x, mu: float) -> tuple[bool, tuple[int, int, int]]:
    """Membership in C(mu) and the sign pattern of (v_e, v_i1, v_i2)."""
    x = np.asarray(x, dtype=float)
    vs = (x[0], x[2], x[4])
    inside = all(v * v >= 1.0 + mu for v in vs)
    return inside, tuple(int(np.sign(v)) for v in vs)


def region_labels_net(states, mu: float) -> np.ndarray:
    """Integer code per state: 0 outside C(mu), otherwise 1 + sign-pattern bits."""
    states = np.asarray(states, dtype=float)
    vs = states[..., [0, 2, 4]]
    inside = np.all(vs * vs >= 1.0 + mu, axis=-1)
    bits = (vs > 0).astype(int) @ np.array([1, 2, 4])
    return np.where(inside, 1 + bits, 0)


# ---------------------------------------------------------------- rates


def lambda_rate(mu: float, b: float) -> float:
    if not (mu > 0 and b > 0):
        raise ValueError("mu and b must be positive")
    return math.sqrt(min(mu, b))


def gain_matrix(k_e: float, k_u: float) -> np.ndarray:
    c = 0.5 * (k_u - k_e)
    return np.array(
        [
            [-k_e, c, 0.0],
            [c, -k_u, -k_u],
            [0.0, -k_u, -k_u],
        ]
    )


def sigma_of_gains(k_e: float, k_u: float) -> float:
    """Largest eigenvalue of the symmetric gain matrix K (never clamped)."""
    return float(np.linalg.eigvalsh(gain_matrix(k_e, k_u))[-1])


# ---------------------------------------------------------------- pairwise quantities


def _nu_excess(xa, xb, b):
    # nu - 3, exactly zero for identical states
    va, wa = xa[..., 0], xa[..., 1]
    vb, wb = xb[..., 0], xb[..., 1]
    dv = va - vb
    dw = wa - wb
    return (va * va + vb * vb + va * vb - 3.0) * dv * dv / 3.0 + b * dw * dw


def nu(xa, xb, b):
    return 3.0 + _nu_excess(np.asarray(xa, dtype=float), np.asarray(xb, dtype=float), b)


def distance_curve(run: EnsembleRun, metric: Callable | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(t, max pairwise distance) over the run's grid."""
    if len(run) < 2:
        raise ValueError("distance curve needs at least two trajectories")
    metric = metric or metric_for(run)
    out = np.zeros(run.states.shape[1])
    for i, j in combinations(range(len(run)), 2):
        np.maximum(out, metric(run.states[i], run.states[j]), out=out)
    return run.times, out


@dataclass
class CriterionResult:
    lhs: float
    rhs: float
    contracts: bool
    excess: float

    def to_dict(self):
        return asdict(self)


def _window(traj, t0, t1):
    i0, i1 = traj.index(t0), traj.index(t1)
    if i1 < i0:
        raise GridError("window end precedes window start")
    return i0, i1


def _trapz(y, dt):
    if len(y) < 2:
        return 0.0
    return float(dt * (0.5 * (y[0] + y[-1]) + np.sum(y[1:-1])))


def integral_criterion(xa: Trajectory, xb: Trajectory, t0: float, t1: float, b: float) -> CriterionResult:
    """Exact contraction test for a pair of FHN solutions on [t0, t1].

    lhs = integral of nu over the times both states share |v| > 1 on the
    same side; rhs = 3 (t1 - t0) minus the integral of nu elsewhere. The
    verdict uses the equivalent, cancellation-free form
    integral(nu - 3) > 0.
    """
    if xa.t0 != xb.t0 or xa.dt != xb.dt or len(xa.states) != len(xb.states):
        raise GridError("trajectories are not on a common grid")
    i0, i1 = _window(xa, t0, t1)
    sa = xa.states[i0 : i1 + 1]
    sb = xb.states[i0 : i1 + 1]
    la = region_labels_fhn(sa[:, 0], 0.0)
    lb = region_labels_fhn(sb[:, 0], 0.0)
    shared = (la == lb) & (la != 0)
    ex = _nu_excess(sa, sb, b)
    val = 3.0 + ex
    span = (i1 - i0) * xa.dt
    lhs = _trapz(np.where(shared, val, 0.0), xa.dt)
    rhs = 3.0 * span - _trapz(np.where(shared, 0.0, val), xa.dt)
    excess = _trapz(ex, xa.dt)
    return CriterionResult(lhs=lhs, rhs=rhs, contracts=bool(excess > 0.0), excess=excess)


# ---------------------------------------------------------------- co-contraction and certificate


def _classifier(name_or_fn, mu):
    if callable(name_or_fn):
        return lambda s: name_or_fn(s, mu)
    if name_or_fn == "fhn":
        return lambda s: region_labels_fhn(s[..., 0], mu)
    if name_or_fn == "net":
        return lambda s: region_labels_net(s, mu)
    raise ValueError(f"unknown region classifier {name_or_fn!r}")


def co_contraction_mask(run: EnsembleRun, mu: float, classifier="fhn") -> np.ndarray:
    """True at grid points where every member sits in the same contraction region."""
    labels = _classifier(classifier, mu)(run.states)  # (members, N+1)
    first = labels[0]
    return (first != 0) & np.all(labels == first, axis=0)


def co_contraction_time(run: EnsembleRun, mu: float, t0: float, t1: float, classifier="fhn") -> float:
    """Time on [t0, t1) during which all members share one contraction region.

    A step [t_k, t_k+1) counts when grid point k qualifies.
    """
    i0, i1 = run.index(t0), run.index(t1)
    mask = co_contraction_mask(run, mu, classifier)
    return int(np.count_nonzero(mask[i0:i1])) * run.dt


@dataclass
class ContractionCertificate:
    mu: float
    lam: float
    t0: float
    t1: float
    delta_c: float
    alpha: float
    precondition_met: bool
    measured_ratio: float | None = None

    def to_dict(self):
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @property
    def sound(self) -> bool | None:
        if not self.precondition_met or self.measured_ratio is None:
            return None
        return self.measured_ratio <= self.alpha


def certificate_bound(mu: float, b: float, t0: float, t1: float, delta_c: float) -> ContractionCertificate:
    """alpha = exp(-lambda dc + sqrt2 (t1 - t0 - dc)), certified when
    dc > sqrt2 (t1 - t0) / (sqrt2 + lambda)."""
    lam = lambda_rate(mu, b)
    span = t1 - t0
    alpha = math.exp(-lam * delta_c + SQRT2 * (span - delta_c))
    pre = delta_c > SQRT2 * span / (SQRT2 + lam)
    return ContractionCertificate(mu, lam, t0, t1, delta_c, alpha, bool(pre))


def measured_ratio(run: EnsembleRun, t0: float, t1: float, metric: Callable | None = None) -> float:
    """max over pairs of d(t1) / d(t0); pairs starting at distance 0 are skipped."""
    metric = metric or metric_for(run)
    i0, i1 = run.index(t0), run.index(t1)
    best = 0.0
    for i, j in combinations(range(len(run)), 2):
        d0 = float(metric(run.states[i, i0], run.states[j, i0]))
        if d0 > 0:
            best = max(best, float(metric(run.states[i, i1], run.states[j, i1])) / d0)
    return best


def alpha_certificate(run: EnsembleRun, mu: float, t0: float, t1: float, b: float | None = None) -> ContractionCertificate:
    """Average-contraction certificate of an FHN ensemble over [t0, t1]."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    if not isinstance(run.params, FhnParams):
        raise TypeError("certificates are defined for FHN ensembles only")
    b = run.params.b if b is None else b
    dc = co_contraction_time(run, mu, t0, t1, "fhn")
    cert = certificate_bound(mu, b, t0, t1, dc)
    if len(run) >= 2:
        cert.measured_ratio = measured_ratio(run, t0, t1, lambda x, y: metric_fhn(x, y, run.params.epsilon))
    return cert


def network_sigma(p: EiNetworkParams) -> float:
    return sigma_of_gains(p.k_e, p.k_u)
