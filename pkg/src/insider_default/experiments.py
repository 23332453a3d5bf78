"""Figure reproductions, parameter sweeps and CSV/manifest output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .before_default import insider_ex_ante_value, investor_value, merton_value
from .curves import value_curve
from .market import Model, model_from_mapping
from .mc import unbounded_wealth_experiment

CURVE_HEADER = ("t", "insider", "investor", "merton", "defaulted")
SWEEP_HEADER = ("param", "insider", "investor", "merton")
UNBOUNDED_HEADER = ("psi", "mean_wealth", "mean_utility", "stderr")
WEALTH_HEADER = ("t", "insider", "investor", "merton")

FIGURE_DEFAULTS: dict[int, dict[str, float]] = {
    1: {"lambda": 0.3, "delta": 0.5, "gamma": 0.2},
    2: {"delta": 0.1},
    3: {"lambda": 0.5, "gamma": 0.5, "delta": 0.1},
    4: {"lambda": 0.3, "gamma": 0.5},
}
FIGURE2_LAMBDAS = (0.1, 0.3)
FIGURE2_GAMMAS = (0.1, 0.3, 0.5)
FIGURE4_DELTAS = (0.0, 0.1, 0.3, 0.5)
UNBOUNDED_PSIS = (1.0, 5.0, 25.0, 125.0)
#: Scenario barrier "auto": half the figure's own intensity times its horizon, so
#: the default lands mid-horizon unless the intensity is overridden.
AUTO = "auto"


@dataclass
class ExperimentSpec:
    command: str
    overrides: dict[str, Any] = field(default_factory=dict)
    out_dir: Path = Path("out")
    seed: int = 0
    n: int = 100_000
    svg: bool = False
    barrier: float | str | None = AUTO   # ``None``: no default before T
    extra: dict[str, Any] = field(default_factory=dict)

    def model(self, **figure_defaults) -> Model:
        return model_from_mapping({**figure_defaults, **self.overrides})


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.9g}"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    write_atomic(path, buf.getvalue())
    return Path(path)


def write_manifest(spec: ExperimentSpec, models: dict[str, Model], outputs: list[Path], results: dict) -> Path:
    doc = {
        "tool": "insider-default",
        "version": __version__,
        "command": spec.command,
        "seed": spec.seed,
        "n": spec.n,
        "barrier": spec.barrier,
        "overrides": spec.overrides,
        "extra": spec.extra,
        "models": {
            k: {**m.params.as_config(), "profile.kind": m.profile.kind} for k, m in models.items()
        },
        "outputs": [os.path.relpath(p, spec.out_dir) for p in outputs],
        "results": results,
    }
    path = Path(spec.out_dir) / f"{spec.command}_manifest.json"
    write_atomic(path, json.dumps(doc, indent=2, sort_keys=True, default=float) + "\n")
    return path


def scenario_level(model: Model, barrier: float | str | None, figure_lam: float | None = None) -> float:
    """Barrier level of a figure scenario.

    ``None`` gives a level the intensity cannot reach by ``T``; ``"auto"``
    uses ``0.5 * figure_lam * T`` with the figure's own intensity.
    """
    pr = model.params
    if barrier is None:
        return 2.0 * pr.lam * pr.T + 1.0
    if barrier == AUTO:
        return 0.5 * (pr.lam if figure_lam is None else figure_lam) * pr.T
    return float(barrier)


def sweep_row(model: Model, param_value: float, investor_floor: float | None = None):
    return (
        param_value,
        insider_ex_ante_value(model).value,
        investor_value(model, floor=investor_floor),
        merton_value(model),
    )


def _sweep_point(args):
    name, value, overrides, floor_same, point_path = args
    m = model_from_mapping({**overrides, name: value})
    row = sweep_row(m, value, m.params.delta if floor_same else None)
    write_csv(point_path, SWEEP_HEADER, [row])
    return m, row


def run_sweep(spec: ExperimentSpec) -> dict:
    """One row per parameter value; points run in parallel when ``workers > 1``.

    Each point is also written atomically to ``points/`` so an interrupted
    sweep leaves only complete files behind.
    """
    name = spec.extra.get("param", "gamma")
    values = [float(v) for v in spec.extra.get("values", (0.1, 0.3, 0.5))]
    floor_same = bool(spec.extra.get("investor_floor", False))
    workers = int(spec.extra.get("workers", 1))
    point_dir = Path(spec.out_dir) / "points"
    jobs = [
        (name, v, spec.overrides, floor_same, point_dir / f"sweep_{name}={fmt(v)}.csv") for v in values
    ]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = list(pool.map(_sweep_point, jobs))
    else:
        done = [_sweep_point(j) for j in jobs]
    models = {f"{name}={fmt(v)}": m for v, (m, _) in zip(values, done)}
    rows = [r for _, r in done]
    out = write_csv(Path(spec.out_dir) / "sweep.csv", SWEEP_HEADER, rows)
    outputs = [out] + [j[-1] for j in jobs] + _maybe_svg(spec, out, kind="sweep", xlabel=name)
    results = {"param": name, "rows": [list(map(float, r)) for r in rows]}
    write_manifest(spec, models, outputs, results)
    return results


def run_unbounded(spec: ExperimentSpec) -> dict:
    m = spec.model()
    psis = [float(v) for v in spec.extra.get("psis", UNBOUNDED_PSIS)]
    table = unbounded_wealth_experiment(
        psis, m, level=spec.extra.get("level"), eta_frac=float(spec.extra.get("eta_frac", 0.05)),
        n=spec.n, seed=spec.seed,
    )
    rows = [(r.psi, r.mean_wealth, r.mean_utility, r.stderr) for r in table]
    out = write_csv(Path(spec.out_dir) / "unbounded.csv", UNBOUNDED_HEADER, rows)
    results = {"rows": [list(r) for r in rows]}
    write_manifest(spec, {"model": m}, [out], results)
    return results


def _curve_csv(path: Path, curve) -> Path:
    return write_csv(path, CURVE_HEADER, curve.rows())


def run_figure(number: int, spec: ExperimentSpec) -> dict:
    """Write the CSV files for one figure and return a summary dictionary."""
    if number not in FIGURE_DEFAULTS:
        raise ValueError(f"figure must be 1..4, got {number!r}")
    out_dir = Path(spec.out_dir)
    defaults = FIGURE_DEFAULTS[number]
    outputs: list[Path] = []
    models: dict[str, Model] = {}
    results: dict[str, Any] = {}

    if number in (1, 3):
        m = spec.model(**defaults)
        models["model"] = m
        level = scenario_level(m, spec.barrier, defaults["lambda"])
        curve = value_curve(level, m, seed=spec.seed)
        name = f"figure{number}"
        outputs.append(_curve_csv(out_dir / f"{name}.csv", curve))
        outputs += _maybe_svg(spec, outputs[-1], kind="curve")
        results.update(
            default_time=curve.theta if curve.defaults else None,
            initial={a: curve.initial(a) for a in curve.values},
            jump={a: curve.jump(a) for a in curve.values},
            at_default_fraction=curve.at_default_fraction,
            ex_ante={"insider": insider_ex_ante_value(m).value, "investor": investor_value(m),
                     "merton": merton_value(m)},
        )
        if number == 3:
            survive = value_curve(scenario_level(m, None), m, seed=spec.seed)
            rows = zip(survive.t, *(survive.wealth[a] for a in ("insider", "investor", "merton")))
            outputs.append(write_csv(out_dir / "figure3_wealth.csv", WEALTH_HEADER, rows))
            outputs += _maybe_svg(spec, outputs[-1], kind="wealth")
            results["no_default_terminal_wealth"] = {a: float(survive.wealth[a][-1]) for a in survive.wealth}

    elif number == 2:
        for lam in FIGURE2_LAMBDAS:
            rows = []
            for g in FIGURE2_GAMMAS:
                m = spec.model(**{**defaults, "lambda": lam, "gamma": g})
                key = f"lambda={fmt(lam)},gamma={fmt(g)}"
                models[key] = m
                curve = value_curve(scenario_level(m, spec.barrier, lam), m, seed=spec.seed)
                outputs.append(_curve_csv(out_dir / f"figure2_lambda{fmt(lam)}_gamma{fmt(g)}.csv", curve))
                rows.append(sweep_row(m, g))
            outputs.append(write_csv(out_dir / f"figure2_lambda{fmt(lam)}.csv", SWEEP_HEADER, rows))
            outputs += _maybe_svg(spec, outputs[-1], kind="sweep", xlabel="gamma")
            results[f"lambda={fmt(lam)}"] = [list(map(float, r)) for r in rows]

    else:
        rows = []
        for d in FIGURE4_DELTAS:
            m = spec.model(**{**defaults, "delta": d})
            models[f"delta={fmt(d)}"] = m
            rows.append(sweep_row(m, d))
        outputs.append(write_csv(out_dir / "figure4.csv", SWEEP_HEADER, rows))
        outputs += _maybe_svg(spec, outputs[-1], kind="sweep", xlabel="delta")
        results["rows"] = [list(map(float, r)) for r in rows]

    write_manifest(spec, models, outputs, results)
    return results


def _maybe_svg(spec: ExperimentSpec, csv_path: Path, *, kind: str, xlabel: str = "t") -> list[Path]:
    if not spec.svg:
        return []
    from .plotting import plot_csv

    return [plot_csv(csv_path, kind=kind, xlabel=xlabel)]
