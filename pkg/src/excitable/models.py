"""Vector fields and equilibria.

All derivative functions act on the last axis of ``x`` and broadcast over
leading axes, so a whole ensemble (shape ``(m, n)``) is evaluated in one
call. Parameter fields may themselves be arrays of shape ``(m,)``.

State orderings:

    FHN       (v, w)
    network   (v_e, w_e, v_i1, w_i1, v_i2, w_i2)
    exosystem (v_u1, w_u1, v_u2, w_u2)
    LTI       (y, ydot)
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

FHN_STATE = ("v", "w")
NETWORK_STATE = ("v_e", "w_e", "v_i1", "w_i1", "v_i2", "w_i2")
EXO_STATE = ("v_u1", "w_u1", "v_u2", "w_u2")
LTI_STATE = ("y", "ydot")


@dataclass(frozen=True)
class FhnParams:
    a: float
    b: float
    epsilon: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LtiParams:
    omega: float

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")

    def to_dict(self):
        return asdict(self)


def validate_params(p: FhnParams) -> list[str]:
    """Violated conditions of the admissible FHN parameter range (empty if none)."""
    out = []
    if not 1 - 2 * p.b / 3 < p.a < 1:
        out.append("1-2b/3 < a < 1")
    if not 0 < p.b < 1:
        out.append("b in (0,1)")
    if p.b != 0 and not p.epsilon < 1 / p.b:
        out.append("epsilon < 1/b")
    return out


def fhn_rest_point(p: FhnParams) -> np.ndarray:
    """Equilibrium (v*, w*) of the FHN neuron at u = 0.

    The v-nullcline and w-nullcline meet at the real root of
    v^3 + (3/b)(1-b) v + 3a/b = 0. For b in (0, 1) the cubic is strictly
    increasing, so a bracketed Newton iteration (bisection fallback)
    converges to the unique root.
    """
    c1 = 3 / p.b * (1 - p.b)
    c0 = 3 * p.a / p.b
    if c1 <= 0:
        warnings.warn("rest cubic not monotone; returning the largest real root", RuntimeWarning)
        roots = np.roots([1.0, 0.0, c1, c0])
        v = float(max(r.real for r in roots if abs(r.imag) < 1e-9))
        return np.array([v, (v + p.a) / p.b])
    # every real root satisfies |v| <= 1 + |c1| + |c0|
    lo, hi = -(1 + abs(c1) + abs(c0)), 1 + abs(c1) + abs(c0)
    v = -1.0
    for _ in range(200):
        f = v**3 + c1 * v + c0
        if f > 0:
            hi = v
        else:
            lo = v
        step = f / (3 * v * v + c1)
        nxt = v - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - v) <= 1e-15 * max(1.0, abs(v)):
            v = nxt
            break
        v = nxt
    else:
        raise RuntimeError("rest-point iteration did not converge")
    return np.array([v, (v + p.a) / p.b])


def _fast(v, w):
    return v - v * v * v / 3 - w


def fhn_deriv(x, u, p: FhnParams):
    v = x[..., 0]
    w = x[..., 1]
    return np.stack((_fast(v, w) + u, p.epsilon * (v - p.b * w + p.a)), axis=-1)


def fhn_jacobian(x, p: FhnParams) -> np.ndarray:
    v = float(x[0])
    return np.array([[1 - v * v, -1.0], [p.epsilon, -p.b * p.epsilon]])


@dataclass(frozen=True)
class EiNetworkParams:
    """Plant E plus controller I; ``u_params`` is shared with the nominal exosystem.

    ``v_rest`` is computed from ``e_params`` when not given.
    ``literal_typo_mode`` makes the second neuron's recovery equation read
    w_1 instead of w_2 (the asymmetric variant of the half-center).
    """

    e_params: FhnParams
    u_params: FhnParams
    k_e: float
    k_u: float
    v_rest: float | None = None
    literal_typo_mode: bool = False

    def __post_init__(self):
        if self.k_e < 0 or self.k_u < 0:
            raise ValueError("coupling gains must be non-negative")
        rest = float(fhn_rest_point(self.e_params)[0])
        if self.v_rest is None:
            object.__setattr__(self, "v_rest", rest)
        elif abs(self.v_rest - rest) > 1e-9:
            raise ValueError(f"v_rest={self.v_rest} is not the rest potential of E ({rest})")

    def to_dict(self):
        return {
            "e_params": asdict(self.e_params),
            "u_params": asdict(self.u_params),
            "k_e": self.k_e,
            "k_u": self.k_u,
            "v_rest": self.v_rest,
            "literal_typo_mode": self.literal_typo_mode,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["e_params"] = FhnParams(**d["e_params"])
        d["u_params"] = FhnParams(**d["u_params"])
        return cls(**d)


def _half_center(v1, w1, v2, w2, drive, p: FhnParams, k, literal):
    # shared by controller I (drive = y - v_rest) and exosystem U (drive = 0)
    w2_in = w1 if literal else w2
    return (
        _fast(v1, w1) + k * (drive - v2 - v1),
        p.epsilon * (v1 - p.b * w1 + p.a),
        _fast(v2, w2) + k * (-v1 - v2),
        p.epsilon * (v2 - p.b * w2_in + p.a),
    )


def ei_deriv(x, u, p: EiNetworkParams):
    """EI network with eta = v_i1 as the inhibitory control input to E."""
    ve, we = x[..., 0], x[..., 1]
    vi1, wi1, vi2, wi2 = x[..., 2], x[..., 3], x[..., 4], x[..., 5]
    pe = p.e_params
    dve = _fast(ve, we) + p.k_e * (u - vi1 + p.v_rest - ve)
    dwe = pe.epsilon * (ve - pe.b * we + pe.a)
    ctrl = _half_center(vi1, wi1, vi2, wi2, ve - p.v_rest, p.u_params, p.k_u, p.literal_typo_mode)
    return np.stack((dve, dwe) + ctrl, axis=-1)


def exo_deriv(x, p_u: FhnParams, k_u, literal_typo_mode=False):
    """Half-center oscillator; its output is u = v_u1."""
    parts = _half_center(x[..., 0], x[..., 1], x[..., 2], x[..., 3], 0.0, p_u, k_u, literal_typo_mode)
    return np.stack(parts, axis=-1)


def ei_exo_deriv(x, p: EiNetworkParams, p_exo: FhnParams):
    """Network and exosystem integrated as one 10-dimensional system, u = v_u1."""
    net = x[..., :6]
    exo = x[..., 6:]
    return np.concatenate(
        (ei_deriv(net, exo[..., 0], p), exo_deriv(exo, p_exo, p.k_u, p.literal_typo_mode)),
        axis=-1,
    )


def lti_deriv(x, u, p: LtiParams):
    return np.stack((x[..., 1], u - p.omega * p.omega * x[..., 0]), axis=-1)


def lti_resonance(t, omega):
    """Zero-initial-condition response to u = sin(omega t) at resonance."""
    t = np.asarray(t, dtype=float)
    y = np.sin(omega * t) / (2 * omega**2) - t * np.cos(omega * t) / (2 * omega)
    ydot = t * np.sin(omega * t) / 2
    return np.stack((y, ydot), axis=-1)


def fig1_params() -> FhnParams:
    return FhnParams(a=0.7, b=0.8, epsilon=1 / 12.5)


def fig3_params(**overrides) -> EiNetworkParams:
    base = dict(
        e_params=fig1_params(),
        u_params=FhnParams(a=0.6, b=0.7, epsilon=1 / 30),
        k_e=4.0,
        k_u=0.5,
    )
    base.update(overrides)
    return EiNetworkParams(**base)
