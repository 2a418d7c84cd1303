"""Result directories: CSV/JSON/SVG writers and the reader used by ``certify``.

CSV dialect: comma separated, '.' decimal point, one header row, LF line
endings, floats as ``%.17g`` so values round-trip exactly.
"""

from __future__ import annotations

import io
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .contraction import co_contraction_mask
from .integrator import EnsembleRun
from .scenarios import FORMAT_VERSION, ScenarioResult, ScenarioSpec
from .svg import _bands_from_mask, line_plot

TRAJECTORIES = "trajectories.csv"
DISTANCE = "distance.csv"
EVENTS = "events.csv"
CERTIFICATES = "certificates.json"
RUN = "run.json"


@dataclass
class RunManifest:
    out_dir: Path
    files: list[str]
    spec_hash: str
    seed: int
    format_version: str = FORMAT_VERSION
    extra: dict = field(default_factory=dict)


def atomic_write(path: Path, data: str | bytes):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": "\n", "encoding": "utf-8"})) as fh:
            fh.write(data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _clean(obj):
    # JSON has no inf/nan
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def trajectories_csv(run: EnsembleRun) -> str:
    buf = io.StringIO()
    names = run.names or tuple(f"x{i}" for i in range(run.states.shape[2]))
    buf.write(",".join(("trial", "t") + tuple(names) + ("u",)) + "\n")
    t = run.times
    n = run.states.shape[2]
    fmt = ["%d"] + ["%.17g"] * (n + 2)
    for i, states in enumerate(run.states):
        block = np.column_stack((np.full(len(t), i), t, states, run.inputs))
        np.savetxt(buf, block, fmt=fmt, delimiter=",", newline="\n")
    return buf.getvalue()


def _two_column(header, a, b) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    np.savetxt(buf, np.column_stack((a, b)), fmt="%.17g", delimiter=",", newline="\n")
    return buf.getvalue()


def events_csv(events) -> str:
    lines = ["trial,channel,kind,time"]
    for trial, train in events:
        lines += [f"{trial},{train.channel},{train.kind},{t:.17g}" for t in train.times]
    return "\n".join(lines) + "\n"


def _plots(result: ScenarioResult) -> dict[str, str]:
    run = result.run
    t = run.times
    spec = result.spec
    comp = 0
    bands = ()
    hlines = ()
    if spec.model == "fhn":
        mu = float(spec.analysis.get("mu", 0.2))
        bands = _bands_from_mask(t, co_contraction_mask(run, mu, "fhn"))
        hlines = (-math.sqrt(1 + mu), math.sqrt(1 + mu))
    elif spec.model == "ei":
        hlines = (spec.params.v_rest,)
    label = (run.names or ("x0",))[comp]
    out = {
        "trajectories.svg": line_plot(
            [(t, s[:, comp]) for s in run.states], title=f"{spec.name}: {label}", ylabel=label, bands=bands, hlines=hlines
        ),
        "distance.svg": line_plot([result.distance], title=f"{spec.name}: max pairwise distance", ylabel="d", bands=bands),
        "input.svg": line_plot([(t, run.inputs, "#d1495b")], title=f"{spec.name}: input u", ylabel="u"),
    }
    if spec.model == "ei":
        out["eta.svg"] = line_plot(
            [(t, s[:, 2]) for s in run.states] + [(t, run.inputs, "#edae49")], title=f"{spec.name}: eta (trials) and u", ylabel="eta"
        )
    return out


def write_result(result: ScenarioResult, out_dir, svg: bool = False) -> RunManifest:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prov = result.provenance
    files = {
        TRAJECTORIES: trajectories_csv(result.run),
        DISTANCE: _two_column("t,d_max", *result.distance),
        EVENTS: events_csv(result.events),
        CERTIFICATES: dumps(
            {
                "format_version": FORMAT_VERSION,
                "spec_hash": prov["spec_hash"],
                "certificates": [c.to_dict() for c in result.certificates],
            }
        ),
    }
    if svg:
        files.update(_plots(result))
    for name, text in files.items():
        atomic_write(out / name, text)
    listed = sorted(files) + [RUN]
    run_doc = {
        "format_version": FORMAT_VERSION,
        "spec_hash": prov["spec_hash"],
        "seed": prov["seed"],
        "toolkit_version": prov["toolkit_version"],
        "model": result.spec.model,
        "state_names": list(result.run.names),
        "spec": result.spec.to_dict(),
        "summary": result.summary,
        "param_violations": prov["param_violations"],
        "files": listed,
    }
    atomic_write(out / RUN, dumps(run_doc))
    return RunManifest(out, listed, prov["spec_hash"], prov["seed"])


def load_run(run_dir) -> tuple[EnsembleRun, dict]:
    """Rebuild the EnsembleRun stored in a result directory."""
    run_dir = Path(run_dir)
    doc = json.loads((run_dir / RUN).read_text())
    spec = ScenarioSpec.from_dict(doc["spec"])
    table = np.loadtxt(run_dir / TRAJECTORIES, delimiter=",", skiprows=1, ndmin=2)
    trials = table[:, 0].astype(int)
    m = int(trials.max()) + 1
    per = len(table) // m
    names = tuple(doc.get("state_names", ()))
    n = table.shape[1] - 3
    states = table[:, 2 : 2 + n].reshape(m, per, n)
    t = table[:per, 1]
    dt = float(spec.horizon[2])
    params = spec.params
    run = EnsembleRun(
        t0=float(t[0]),
        dt=dt,
        states=states,
        inputs=table[:per, -1],
        initial_conditions=states[:, 0].copy(),
        model=spec.model,
        params=params,
        signal=spec.signal,
        seed=doc.get("seed"),
        names=names,
    )
    return run, doc
