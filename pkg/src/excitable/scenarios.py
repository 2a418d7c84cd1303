"""Named experiment recipes and the runner that turns them into results.

A ScenarioSpec is plain data and round-trips through JSON (see
docs/scenario.schema.json). ``run_scenario`` integrates the ensemble,
co-simulating the exosystem when the input is exosystem-driven, and computes
the analysis summary for the model at hand.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import numpy as np

from . import __version__
from .analysis import EventTrain, detect_peaks, detect_spikes, event_sync_score, peak_phase_dispersion, segment_ratios
from .contraction import (
    ContractionCertificate,
    alpha_certificate,
    co_contraction_time,
    distance_curve,
    sigma_of_gains,
)
from .integrator import EnsembleRun, integrate_ensemble
from .models import (
    EXO_STATE,
    FHN_STATE,
    LTI_STATE,
    NETWORK_STATE,
    EiNetworkParams,
    FhnParams,
    LtiParams,
    ei_deriv,
    ei_exo_deriv,
    fhn_deriv,
    fhn_rest_point,
    lti_deriv,
    validate_params,
)
from .signals import Constant, NoiseSegment, PiecewiseGaussianNoise, SignalError, Sine, Square, signal_from_dict, signal_to_dict

FORMAT_VERSION = "1"
EXO_X0 = (-1.2, -0.6, 1.0, 0.3)


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Exosystem:
    """Half-center oscillator generating u = v_u1; shares k_u with the network."""

    params: FhnParams
    x0: tuple[float, ...] = EXO_X0


@dataclass
class ScenarioSpec:
    name: str
    model: str
    params: Any
    signal: Any
    ics: dict
    horizon: tuple[float, float, float]
    seed: int = 0
    analysis: dict = field(default_factory=dict)
    description: str = ""
    waiver: str | None = None

    def to_dict(self) -> dict:
        if isinstance(self.signal, Exosystem):
            sig = {"type": "exosystem", "params": self.signal.params.to_dict(), "x0": list(self.signal.x0)}
        else:
            sig = signal_to_dict(self.signal)
        return {
            "name": self.name,
            "description": self.description,
            "model": self.model,
            "params": self.params.to_dict(),
            "signal": sig,
            "ics": copy.deepcopy(self.ics),
            "horizon": {"t0": self.horizon[0], "t1": self.horizon[1], "dt": self.horizon[2]},
            "seed": self.seed,
            "analysis": copy.deepcopy(self.analysis),
            "waiver": self.waiver,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        try:
            model = d["model"]
            if model == "fhn":
                params = FhnParams(**d["params"])
            elif model == "ei":
                params = EiNetworkParams.from_dict(d["params"])
            elif model == "lti":
                params = LtiParams(**d["params"])
            else:
                raise ScenarioError(f"unknown model {model!r}")
            sig = dict(d["signal"])
            if sig.get("type") == "exosystem":
                signal = Exosystem(FhnParams(**sig["params"]), tuple(float(v) for v in sig.get("x0", EXO_X0)))
            else:
                signal = signal_from_dict(sig)
            h = d["horizon"]
            horizon = (float(h["t0"]), float(h["t1"]), float(h["dt"]))
            spec = cls(
                name=d["name"],
                model=model,
                params=params,
                signal=signal,
                ics=dict(d["ics"]),
                horizon=horizon,
                seed=int(d.get("seed", 0)),
                analysis=dict(d.get("analysis", {})),
                description=d.get("description", ""),
                waiver=d.get("waiver"),
            )
            spec.violations()  # type check of the numeric fields
            return spec
        except (KeyError, TypeError, ValueError, SignalError) as exc:
            raise ScenarioError(f"invalid scenario spec: {exc}") from exc

    def spec_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def violations(self) -> list[str]:
        if self.model == "fhn":
            return validate_params(self.params)
        if self.model == "ei":
            out = [f"E: {v}" for v in validate_params(self.params.e_params)]
            out += [f"I: {v}" for v in validate_params(self.params.u_params)]
            if isinstance(self.signal, Exosystem):
                out += [f"U: {v}" for v in validate_params(self.signal.params)]
            return out
        return []


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    run: EnsembleRun
    distance: tuple[np.ndarray, np.ndarray]
    certificates: list[ContractionCertificate]
    events: list[tuple[int, EventTrain]]
    summary: dict
    provenance: dict


# ---------------------------------------------------------------- registry


def _fig1(name, signal, description, t1=400.0, analysis=None):
    return ScenarioSpec(
        name=name,
        model="fhn",
        params=FhnParams(a=0.7, b=0.8, epsilon=1 / 12.5),
        signal=signal,
        ics={"kind": "grid_around_rest", "extent": [0.5, 0.5], "counts": [3, 3]},
        horizon=(0.0, t1, 0.01),
        seed=7,
        analysis={"mu": 0.2, **(analysis or {})},
        description=description,
    )


def _fig3(name, signal, description):
    return ScenarioSpec(
        name=name,
        model="ei",
        params=EiNetworkParams(
            e_params=FhnParams(a=0.7, b=0.8, epsilon=1 / 12.5),
            u_params=FhnParams(a=0.6, b=0.7, epsilon=1 / 30),
            k_e=4.0,
            k_u=0.5,
        ),
        signal=signal,
        ics={"kind": "ei_trials", "count": 10, "e_radius": 0.5, "controller_box": [[-2.0, 2.0], [-1.0, 1.0]]},
        horizon=(0.0, 400.0, 0.01),
        seed=7,
        analysis={"tail_window": [300.0, 400.0], "spike_after": 100.0, "sync_tol": 2.0, "exo_peak_window": [100.0, 400.0]},
        description=description,
    )


def _fig4(name, multiple, description):
    omega = math.pi / 30
    return ScenarioSpec(
        name=name,
        model="lti",
        params=LtiParams(omega=omega),
        signal=Sine(bias=0.0, amplitude=1.0, angular_frequency=multiple * omega, phase=0.0),
        ics={"kind": "uniform_box", "low": [-1.0, -1.0], "high": [1.0, 1.0], "count": 5},
        horizon=(0.0, 600.0, 0.01),
        seed=7,
        analysis={"dispersion_window": [480.0, 600.0], "period": 2 * math.pi / omega},
        description=description,
    )


def builtin_scenarios() -> list[ScenarioSpec]:
    fig1d_noise = PiecewiseGaussianNoise(
        segments=(
            NoiseSegment(0.0, 100.0, 0.5, 0.25),
            NoiseSegment(100.0, 200.0, 0.3, 0.01),
            NoiseSegment(200.0, 300.0, 0.1, 0.0025),
        ),
        hold_step=None,
        seed=7,
    )
    u_exo = FhnParams(a=0.6, b=0.7, epsilon=1 / 30)
    return [
        _fig1("fig1a", Constant(0.7), "FHN, constant input 0.7: tonic spiking, no contraction"),
        _fig1("fig1b", Sine(0.7, 0.2, math.pi / 23, 0.0), "FHN, resonant sine 0.7+0.2 sin(pi t/23): reliable"),
        _fig1("fig1c", Square(60.0, 0.6, 1 / 3, 0.0), "FHN, slow square wave (period 60, amp 0.6, duty 1/3): reliable"),
        _fig1(
            "fig1d",
            fig1d_noise,
            "FHN, piecewise Gaussian noise with decreasing bias/variance",
            t1=300.0,
            analysis={"segment_boundaries": [100.0, 200.0]},
        ),
        _fig3("fig3a", Exosystem(u_exo), "EI network, disturbance from the half-center exosystem"),
        _fig3("fig3b", Sine(0.0, 2.0, math.pi / 30, 0.0), "EI network, sinusoidal disturbance 2 sin(pi t/30)"),
        _fig3("fig3c", Exosystem(FhnParams(0.6, 0.7, 1 / 5)), "EI network, exosystem with eps_u = 1/5 (controller keeps 1/30)"),
        _fig3("fig3c_quarter", Exosystem(FhnParams(0.6, 0.7, 1 / 4)), "as fig3c with eps_u = 1/4"),
        _fig4("fig4a", 1, "undamped oscillator, resonant input sin(w t), w = pi/30"),
        _fig4("fig4b", 2, "undamped oscillator, off-resonance input sin(2 w t)"),
    ]


def get_scenario(name: str) -> ScenarioSpec:
    for spec in builtin_scenarios():
        if spec.name == name:
            return spec
    raise KeyError(f"no builtin scenario named {name!r}")


# ---------------------------------------------------------------- initial conditions


def _ic_rng(seed):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))


def _center(model, params):
    if model == "fhn":
        return fhn_rest_point(params)
    if model == "ei":
        rest = fhn_rest_point(params.e_params)
        return np.concatenate((rest, np.zeros(4)))
    return np.zeros(2)


def default_initial_conditions(recipe: dict, model: str, params, seed: int | None = 0) -> np.ndarray:
    kind = recipe.get("kind")
    seed = recipe.get("seed", seed)
    if kind == "explicit":
        return np.array(recipe["states"], dtype=float)
    if kind == "grid_around_rest":
        center = _center(model, params)
        ev, ew = recipe.get("extent", [0.5, 0.5])
        nv, nw = recipe.get("counts", [3, 3])
        dv = np.linspace(-ev, ev, nv) if nv > 1 else np.zeros(1)
        dw = np.linspace(-ew, ew, nw) if nw > 1 else np.zeros(1)
        return np.array([center[:2] + (a, b) for a in dv for b in dw])
    if kind == "random_ball":
        rng = _ic_rng(seed)
        center = _center(model, params)
        n = len(center)
        count = int(recipe["count"])
        direction = rng.standard_normal((count, n))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = recipe["radius"] * rng.uniform(size=(count, 1)) ** (1.0 / n)
        return center + radius * direction
    if kind == "uniform_box":
        rng = _ic_rng(seed)
        low = np.asarray(recipe["low"], dtype=float)
        high = np.asarray(recipe["high"], dtype=float)
        return rng.uniform(low, high, size=(int(recipe["count"]), len(low)))
    if kind == "ei_trials":
        if model != "ei":
            raise ScenarioError("ei_trials recipe needs the ei model")
        rng = _ic_rng(seed)
        count = int(recipe.get("count", 10))
        rest = fhn_rest_point(params.e_params)
        r = recipe.get("e_radius", 0.5) * np.sqrt(rng.uniform(size=count))
        th = rng.uniform(0.0, 2 * math.pi, size=count)
        (vlo, vhi), (wlo, whi) = recipe.get("controller_box", [[-2.0, 2.0], [-1.0, 1.0]])
        out = np.empty((count, 6))
        out[:, 0] = rest[0] + r * np.cos(th)
        out[:, 1] = rest[1] + r * np.sin(th)
        for j in (2, 4):
            out[:, j] = rng.uniform(vlo, vhi, size=count)
            out[:, j + 1] = rng.uniform(wlo, whi, size=count)
        return out
    raise ScenarioError(f"unknown initial-condition recipe {kind!r}")


# ---------------------------------------------------------------- overrides


def _parse_value(raw):
    if not isinstance(raw, str):
        return raw
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def _set_path(node, keys, value, full):
    key, rest = keys[0], keys[1:]
    if isinstance(node, list):
        targets = range(len(node)) if key == "*" else [int(key)] if key.lstrip("-").isdigit() else None
        if targets is None:
            raise ScenarioError(f"override {full!r}: {key!r} is not a list index")
        for i in targets:
            if rest:
                _set_path(node[i], rest, value, full)
            else:
                node[i] = value
        return
    if not isinstance(node, dict):
        raise ScenarioError(f"override {full!r}: cannot descend into {type(node).__name__}")
    keys_here = list(node) if key == "*" else [key]
    for k in keys_here:
        if rest:
            if k not in node:
                raise ScenarioError(f"override {full!r}: no field {k!r}")
            _set_path(node[k], rest, value, full)
        else:
            node[k] = value


def apply_overrides(spec: ScenarioSpec, overrides: dict | None) -> ScenarioSpec:
    """Set dotted fields (``signal.segments.*.variance``) on a copy of ``spec``."""
    if not overrides:
        return spec
    d = spec.to_dict()
    for path, raw in overrides.items():
        _set_path(d, path.split("."), _parse_value(raw), path)
    return ScenarioSpec.from_dict(d)


# ---------------------------------------------------------------- running


def simulate(spec: ScenarioSpec, workers: int = 1) -> EnsembleRun:
    t0, t1, dt = spec.horizon
    ics = default_initial_conditions(spec.ics, spec.model, spec.params, spec.seed)
    p = spec.params
    if spec.model == "fhn":
        return integrate_ensemble(
            lambda x, u: fhn_deriv(x, u, p), ics, spec.signal, t0, t1, dt, spec.seed,
            workers=workers, model="fhn", params=p, names=FHN_STATE,
        )
    if spec.model == "lti":
        return integrate_ensemble(
            lambda x, u: lti_deriv(x, u, p), ics, spec.signal, t0, t1, dt, spec.seed,
            workers=workers, model="lti", params=p, names=LTI_STATE,
        )
    if spec.model != "ei":
        raise ScenarioError(f"unknown model {spec.model!r}")
    if isinstance(spec.signal, Exosystem):
        exo = spec.signal
        full = np.hstack((ics[:, :6], np.tile(np.asarray(exo.x0, dtype=float), (len(ics), 1))))
        run = integrate_ensemble(
            lambda x, u: ei_exo_deriv(x, p, exo.params), full, None, t0, t1, dt, spec.seed,
            workers=workers, model="ei", params=p, names=NETWORK_STATE + EXO_STATE,
        )
        run.inputs = run.states[0, :, 6].copy()
        run.signal = exo
        return run
    return integrate_ensemble(
        lambda x, u: ei_deriv(x, u, p), ics, spec.signal, t0, t1, dt, spec.seed,
        workers=workers, model="ei", params=p, names=NETWORK_STATE,
    )


def _pairwise_sync(trains, tol):
    scores = [event_sync_score(a, b, tol) for a, b in combinations(trains, 2)]
    return scores


def _analyze_fhn(spec, run, t, d):
    a = spec.analysis
    mu = float(a.get("mu", 0.2))
    thr = float(a.get("spike_threshold", 1.0))
    t0, t1 = run.t0, run.t1
    events = [(i, detect_spikes(t, run.states[i, :, 0], thr, "v")) for i in range(len(run))]
    certs = [alpha_certificate(run, mu, t0, t1)] if a.get("certificate", True) and len(run) > 1 else []
    summary = {
        "distance_initial": float(d[0]),
        "distance_final": float(d[-1]),
        "distance_ratio": float(d[-1] / d[0]) if d[0] > 0 else None,
        "mu": mu,
        "co_contraction_time": co_contraction_time(run, mu, t0, t1, "fhn"),
        "spike_counts": [len(e) for _, e in events],
    }
    cuts = [float(c) for c in a.get("segment_boundaries", ()) if t0 < c < t1]
    if cuts:
        summary["segment_boundaries"] = cuts
        summary["segment_ratios"] = segment_ratios(t, d, cuts)
    return certs, events, summary


def _analyze_ei(spec, run, t, d):
    a = spec.analysis
    p = spec.params
    thr = float(a.get("spike_threshold", 1.0))
    tol = float(a.get("sync_tol", 2.0))
    sigma = sigma_of_gains(p.k_e, p.k_u)
    mu = float(a.get("mu", sigma + 0.1))
    lo, hi = a.get("tail_window", [run.t0, run.t1])
    # windows are clipped to the horizon so shortened runs stay analyzable
    lo = min(max(lo, run.t0), run.t1)
    hi = min(max(hi, lo), run.t1)
    i0, i1 = run.index(lo), run.index(hi)
    after = float(a.get("spike_after", run.t0))
    y = run.states[:, :, 0]
    eta = run.states[:, :, 2]

    u_peaks = detect_peaks(t, run.inputs, "u")
    events = [(-1, u_peaks)]
    y_spikes, eta_peaks = [], []
    for i in range(len(run)):
        y_spikes.append(detect_spikes(t, y[i], thr, "y"))
        eta_peaks.append(detect_peaks(t, eta[i], "eta"))
        events += [(i, y_spikes[-1]), (i, eta_peaks[-1])]
    eta_u = [event_sync_score(e, u_peaks, tol) for e in eta_peaks]
    eta_pairs = _pairwise_sync(eta_peaks, tol)
    tails = np.max(np.abs(y[:, i0 : i1 + 1] - p.v_rest), axis=1)
    elo, ehi = a.get("exo_peak_window", [run.t0, run.t1])
    summary = {
        "v_rest": p.v_rest,
        "sigma": sigma,
        "mu": mu,
        "co_contraction_time": co_contraction_time(run, mu, run.t0, run.t1, "net"),
        "distance_initial": float(d[0]),
        "distance_final": float(d[-1]),
        "distance_ratio": float(d[-1] / d[0]) if d[0] > 0 else None,
        "tail_window": [lo, hi],
        "tail_max_abs_y_minus_v_rest": tails.tolist(),
        "y_spikes_after": [int(np.count_nonzero(s.times > after)) for s in y_spikes],
        "spike_after": after,
        "sync_tol": tol,
        "eta_u_sync": eta_u,
        "eta_u_sync_mean": float(np.mean(eta_u)),
        "eta_pairwise_sync_min": float(min(eta_pairs)) if eta_pairs else None,
        "eta_pairwise_sync_mean": float(np.mean(eta_pairs)) if eta_pairs else None,
        "u_peaks_in_window": len(u_peaks.within(elo, ehi)),
        "u_peak_window": [elo, ehi],
    }
    return [], events, summary


def _analyze_lti(spec, run, t, d):
    a = spec.analysis
    omega = spec.params.omega
    period = float(a.get("period", 2 * math.pi / omega))
    window = tuple(a.get("dispersion_window", [run.t0, run.t1]))
    peaks = [(i, detect_peaks(t, run.states[i, :, 0], "y")) for i in range(len(run))]
    disp = peak_phase_dispersion([e for _, e in peaks], period, window)
    summary = {
        "period": period,
        "dispersion_window": list(window),
        "peak_phase_dispersion": disp,
        "peaks_in_window": [len(e.within(*window)) for _, e in peaks],
        "distance_ratio": float(d[-1] / d[0]) if d[0] > 0 else None,
    }
    return [], peaks, summary


def run_scenario(spec: ScenarioSpec, overrides: dict | None = None, workers: int = 1) -> ScenarioResult:
    spec = apply_overrides(spec, overrides)
    run = simulate(spec, workers=workers)
    if len(run) >= 2:
        t, d = distance_curve(run)
    else:
        t, d = run.times, np.zeros(len(run.times))
    analyze = {"fhn": _analyze_fhn, "ei": _analyze_ei, "lti": _analyze_lti}[spec.model]
    certs, events, summary = analyze(spec, run, t, d)
    provenance = {
        "spec_hash": spec.spec_hash(),
        "seed": spec.seed,
        "toolkit_version": __version__,
        "format_version": FORMAT_VERSION,
        "param_violations": spec.violations(),
    }
    return ScenarioResult(spec, run, (t, d), certs, events, summary, provenance)
