"""Command-line driver: validated configs, task dispatch, persistence and sweeps.

``twistlab run cfg.yaml`` runs one task, ``twistlab sweep cfg.yaml --axis beta
--values 0,0.5,1,2`` fans a parameter out over a worker pool and ``twistlab
check`` runs the seeded inequality suite. Configs are YAML or JSON.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import copy
import csv
import datetime as _dt
import hashlib
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import yaml

from .errors import ConfigInvalid, TaskFailed, TwistlabError

__all__ = [
    "RunConfig",
    "ResultRecord",
    "TASKS",
    "load_config",
    "run",
    "sweep",
    "main",
    "write_csv",
]

TASKS = ("modes", "mu-curve", "hardy", "lambda-sweep", "evolve", "fit", "oracle-1d",
         "energy-ode", "inequalities", "stability")

RESULT_ANCHORS = {
    "modes": "cross-section Dirichlet modes",
    "mu-curve": "self-similar threshold: positivity and strong limit",
    "hardy": "Hardy inequality in twisted tubes",
    "lambda-sweep": "threshold on shrinking twisting intervals",
    "evolve": "heat semigroup of the shifted Dirichlet Laplacian",
    "fit": "decay rate of the heat semigroup",
    "oracle-1d": "oscillator ground states with and without a central node",
    "energy-ode": "energy inequality system and its Lambert W solution",
    "inequalities": "elementary inequalities behind the Hardy and decay estimates",
    "stability": "threshold stability under attractive Hardy-type potentials",
}

_EVOLVE = {"u0": {"family": "gaussian", "n": 6.0}, "T_end": 50.0, "dt": None,
           "scheme": "implicit_euler", "snapshots": []}

TASK_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "modes": {},
    "mu-curve": {"s": [0.0, 2.0, 4.0, 6.0, 8.0], "h_coarse": 0.05},
    "hardy": {"I": None},
    "lambda-sweep": {"eps": [1.0, 0.5, 0.25, 0.125], "I": None},
    "evolve": dict(_EVOLVE),
    "fit": dict(_EVOLVE, window=[5.0, 50.0]),
    "oracle-1d": {"L": 20.0, "n": 4000},
    "energy-ode": {"a0": 1.0, "b0": 2.0, "cH": 0.3, "T_end": 50.0, "dt": 0.01},
    "inequalities": {"n_seeds": 100},
    "stability": {"eps_pot": 0.5},
}

DEFAULTS: Dict[str, Any] = {
    "task": None,
    "seed": 0,
    "output": "twistlab_out",
    "workers": 1,
    "tube": {
        "cross_section": {"kind": "rectangle", "params": [math.pi, math.pi]},
        "twist": {"family": "bump", "beta": 2.0, "width": 1.0},
        "L": 20.0,
    },
    "grid": {"h_cross": math.pi / 10, "n1": 64, "h_fine": None, "h_coarse": None},
    "params": {},
    "companions": {"L_doubling": False, "h_halving": False},
}

_TWIST_KEYS = {"family", "beta", "width", "x", "thetadot"}
_SECTION_KEYS = {"kind", "params"}
_U0_KEYS = {"family", "n"}

# sweep axis aliases -> dotted config paths
AXIS_ALIASES = {
    "beta": "tube.twist.beta",
    "width": "tube.twist.width",
    "L": "tube.L",
    "h_cross": "grid.h_cross",
    "I_epsilon": "params.eps",
    "eps_pot": "params.eps_pot",
    "seed": "seed",
}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigInvalid(f"unknown config key {where!r}")
        if isinstance(base[key], dict) and base[key] and key not in ("params",):
            if not isinstance(val, dict):
                raise ConfigInvalid(f"{where!r} must be a mapping")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = copy.deepcopy(val)
    return out


@dataclass
class RunConfig:
    """A validated experiment description: one task per config."""

    data: dict

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigInvalid("config must be a mapping")
        task = raw.get("task")
        if task not in TASKS:
            raise ConfigInvalid(f"task must be one of {', '.join(TASKS)}; got {task!r}")
        raw = copy.deepcopy(raw)
        tube = raw.get("tube", {})
        # the twist and section are replaced wholesale, then key-checked
        twist = tube.pop("twist", None) if isinstance(tube, dict) else None
        section = tube.pop("cross_section", None) if isinstance(tube, dict) else None
        data = _merge(DEFAULTS, raw)
        if twist is not None:
            _check_keys(twist, _TWIST_KEYS, "tube.twist")
            data["tube"]["twist"] = twist
        if section is not None:
            _check_keys(section, _SECTION_KEYS, "tube.cross_section")
            data["tube"]["cross_section"] = section
        params = dict(TASK_DEFAULTS[task])
        given = raw.get("params", {}) or {}
        _check_keys(given, set(params), "params")
        params.update(copy.deepcopy(given))
        if "u0" in params:
            _check_keys(params["u0"], _U0_KEYS, "params.u0")
        data["params"] = params
        cfg = cls(data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        d = self.data
        try:
            self.tube()
        except (ValueError, TypeError) as exc:
            raise ConfigInvalid(f"invalid tube: {exc}") from exc
        h = d["grid"]["h_cross"]
        if not (isinstance(h, (int, float)) and h > 0):
            raise ConfigInvalid("grid.h_cross must be positive")
        if not (isinstance(d["workers"], int) and d["workers"] >= 1):
            raise ConfigInvalid("workers must be a positive integer")
        p = d["params"]
        if d["task"] == "mu-curve":
            s = np.asarray(p["s"], dtype=float)
            if s.ndim != 1 or s.size == 0 or np.any(np.diff(s) <= 0) or s[0] < 0:
                raise ConfigInvalid("params.s must be nonnegative and strictly increasing")
        if d["task"] == "lambda-sweep":
            eps = p["eps"] if isinstance(p["eps"], list) else [p["eps"]]
            if not eps or any(not e > 0 for e in eps):
                raise ConfigInvalid("params.eps must hold positive values")
            p["eps"] = [float(e) for e in eps]
        if d["task"] in ("evolve", "fit"):
            from .evolution import SCHEMES
            if p["scheme"] not in SCHEMES:
                raise ConfigInvalid(f"unknown scheme {p['scheme']!r}")

    def tube(self):
        from .geometry import CrossSection, TubeSpec, TwistProfile
        t = self.data["tube"]
        cs = t["cross_section"]
        if cs["kind"] == "square":
            section = CrossSection.square(*cs.get("params", []))
        else:
            section = CrossSection(cs["kind"], tuple(cs["params"]))
        tw = t["twist"]
        fam = tw.get("family", "bump")
        if fam == "zero":
            twist = TwistProfile.zero()
        elif fam == "bump":
            twist = TwistProfile.bump(tw.get("beta", 0.0), tw.get("width", 1.0))
        elif fam == "tabulated":
            twist = TwistProfile.tabulated(tw["x"], tw["thetadot"])
        else:
            raise ValueError(f"unknown twist family {fam!r}")
        return TubeSpec(section, twist, float(t["L"]))

    @property
    def task(self) -> str:
        return self.data["task"]

    @property
    def params(self) -> dict:
        return self.data["params"]

    def hash(self) -> str:
        """SHA-256 of the canonical JSON of everything that affects results."""
        core = {k: v for k, v in self.data.items() if k not in ("output", "workers")}
        blob = json.dumps(core, sort_keys=True, default=float).encode()
        return hashlib.sha256(blob).hexdigest()

    def output_root(self) -> Path:
        return Path(os.environ.get("TWISTLAB_OUT") or self.data["output"])

    def with_value(self, path: str, value) -> "RunConfig":
        """Copy with the leaf at dotted ``path`` replaced."""
        data = copy.deepcopy(self.data)
        keys = path.split(".")
        node = data
        for k in keys[:-1]:
            if not isinstance(node, dict) or k not in node:
                raise ConfigInvalid(f"{path!r} does not name a config leaf")
            node = node[k]
        if not isinstance(node, dict) or keys[-1] not in node:
            raise ConfigInvalid(f"{path!r} does not name a config leaf")
        node[keys[-1]] = value
        cfg = RunConfig(data)
        cfg.validate()
        return cfg


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigInvalid(f"{where!r} must be a mapping")
    extra = set(d) - set(allowed)
    if extra:
        raise ConfigInvalid(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def load_config(path) -> RunConfig:
    """Read a YAML or JSON config file (JSON is valid YAML)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
        raw = yaml.safe_load(text)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return RunConfig.from_dict(raw or {})


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return "" if v is None else str(v)


def write_csv(path, header: Sequence[str], rows) -> Path:
    """Comma-separated, header row, LF endings, floats to 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


@dataclass
class ResultRecord:
    """Everything a run produced: summary numbers, file paths and invariant verdicts."""

    config_hash: str
    task: str
    started: str
    finished: str
    outputs: Dict[str, str]
    summary: Dict[str, Any]
    invariants: Dict[str, bool]
    version: str
    status: str = "ok"
    error: Optional[str] = None
    companions: Dict[str, Any] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status == "ok" and all(self.invariants.values())

    def to_dict(self) -> dict:
        return _jsonable({
            "config_hash": self.config_hash, "task": self.task,
            "paper_ref": RESULT_ANCHORS.get(self.task, ""),
            "started": self.started, "finished": self.finished,
            "version": self.version, "status": self.status, "error": self.error,
            "outputs": self.outputs, "summary": self.summary,
            "invariants": self.invariants, "companions": self.companions,
        })


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------------


def _grid2(cfg: RunConfig, tube, scale: float = 1.0):
    from .discretize import Grid2D
    return Grid2D.build(tube.cross_section, cfg.data["grid"]["h_cross"] * scale)


def _axial_kw(cfg: RunConfig) -> dict:
    g = cfg.data["grid"]
    return {k: g[k] for k in ("h_fine", "h_coarse") if g[k] is not None}


def _task_modes(cfg, tube, out):
    from .spectral import compute_modes_on_grid
    modes = compute_modes_on_grid(_grid2(cfg, tube))
    return modes.to_dict(), {}, {}


def _task_mu_curve(cfg, tube, out):
    from .spectral import mu_curve
    p = cfg.params
    curve = mu_curve(tube, p["s"], _grid2(cfg, tube), h_coarse=p["h_coarse"],
                     seed=cfg.data["seed"])
    path = write_csv(out / "mu_curve.csv", ("s", "mu", "residual", "node_amp"), curve.rows())
    summary = {"mu_first": curve.mu[0], "mu_last": curve.mu[-1], "s": curve.s, "mu": curve.mu,
               "grid": curve.grid}
    inv = {"mu_above_quarter": bool(np.all(curve.mu >= 0.25 - 5e-3)),
           "residuals_below_tol": bool(np.all(curve.residual <= 1e-8))}
    return summary, {"curve": str(path)}, inv


def _hardy_report(cfg, tube, L_scale=1.0, h_scale=1.0):
    from .spectral import (compute_modes_on_grid, hardy_axial_grid, hardy_certified,
                           hardy_variational, lambda_bounded)
    t = tube.with_L(tube.L * L_scale)
    g2 = _grid2(cfg, t, h_scale)
    var = hardy_variational(t, g2, hardy_axial_grid(t.L, **_axial_kw(cfg)), seed=cfg.data["seed"])
    I = cfg.params.get("I") or t.twist.support
    if I is None:
        lam = 0.0
    else:
        lam = lambda_bounded(t, I, g2, n1=cfg.data["grid"]["n1"], seed=cfg.data["seed"]).value
    return hardy_certified(t, compute_modes_on_grid(g2), lam, I, cH_variational=var)


def _task_hardy(cfg, tube, out):
    rep = _hardy_report(cfg, tube)
    summary = rep.to_dict()
    inv = {"certified_below_variational": rep.cH_certified <= rep.cH_variational + 1e-10,
           "certified_nonnegative": rep.cH_certified >= 0.0}
    comp = {}
    if cfg.data["companions"]["L_doubling"]:
        r2 = _hardy_report(cfg, tube, L_scale=2.0)
        comp["L_doubling"] = {"cH_variational": r2.cH_variational,
                              "relative_change": abs(r2.cH_variational - rep.cH_variational)
                              / max(abs(rep.cH_variational), 1e-300)}
    if cfg.data["companions"]["h_halving"]:
        r2 = _hardy_report(cfg, tube, h_scale=0.5)
        comp["h_halving"] = {"cH_variational": r2.cH_variational, "cH_certified": r2.cH_certified}
    return summary, {}, inv, comp


def _task_lambda_sweep(cfg, tube, out):
    from .spectral import lambda_bounded
    p = cfg.params
    I = p["I"] or tube.twist.support
    if I is None:
        raise ValueError("lambda-sweep needs an interval or a compactly supported twist")
    g2 = _grid2(cfg, tube)
    rows = []
    for e in p["eps"]:
        Ie = (e * I[0], e * I[1])
        est = lambda_bounded(tube, Ie, g2, n1=cfg.data["grid"]["n1"], seed=cfg.data["seed"])
        rows.append((e, est.value, est.raw, est.residual))
    path = write_csv(out / "lambda.csv", ("eps", "lambda", "raw", "residual"), rows)
    lam = np.array([r[1] for r in rows])
    summary = {"eps": p["eps"], "lambda": lam[0] if lam.size == 1 else lam,
               "strictly_decreasing": bool(np.all(np.diff(lam) < 0))}
    inv = {"lambda_nonnegative": bool(np.all(lam >= 0))}
    return summary, {"lambda": str(path)}, inv


def _evolve(cfg, tube):
    from .evolution import DEFAULT_SCHEDULE, InitialData, evolution_axial_grid, evolve_and_record
    p = cfg.params
    u0 = InitialData(p["u0"].get("family", "gaussian"), float(p["u0"].get("n", 6.0)))
    grid1 = evolution_axial_grid(tube.L, **_axial_kw(cfg))
    dt = DEFAULT_SCHEDULE if p["dt"] is None else p["dt"]
    if isinstance(dt, list):
        dt = [tuple(s) for s in dt] if dt and isinstance(dt[0], (list, tuple)) else dt
    return evolve_and_record(tube, u0, float(p["T_end"]), dt, p["scheme"], _grid2(cfg, tube),
                             grid1, snapshot_times=p["snapshots"])


def _series_invariants(series, scheme):
    inv = {"sobolev_chain": bool(np.all(series.norm_mixed1 ** 2
                                        <= math.pi * series.norm_rhoinv ** 2 * (1 + 1e-12))),
           "mixed_norm_nonincreasing": bool(np.all(series.norm_mixed1[1:]
                                                   <= series.norm_mixed1[0] * (1 + 1e-12)))}
    if scheme == "implicit_euler":
        inv["non_expansive"] = series.non_expansive
        inv["positive"] = series.positive
    return inv


def _task_evolve(cfg, tube, out):
    series = _evolve(cfg, tube)
    path = write_csv(out / "norms.csv", series.COLUMNS, zip(*series.columns()))
    summary = {"steps": int(series.t.size - 1), "T_end": series.t[-1],
               "norm_L2_final": series.norm_L2[-1], "min_ratio": float(series.min_ratio.min()),
               "meta": series.meta}
    return summary, {"norms": str(path)}, _series_invariants(series, cfg.params["scheme"])


def _task_fit(cfg, tube, out):
    from .evolution import fit_decay_rate
    series = _evolve(cfg, tube)
    path = write_csv(out / "norms.csv", series.COLUMNS, zip(*series.columns()))
    fit = fit_decay_rate(series.t, series.norm_L2, tuple(cfg.params["window"]), L=tube.L,
                         width=series.meta["support_width"])
    summary = dict(fit.to_dict(), meta=series.meta)
    return summary, {"norms": str(path)}, _series_invariants(series, cfg.params["scheme"])


def _task_oracle_1d(cfg, tube, out):
    from .discretize import Grid1D, assemble_oscillator
    from .spectral import smallest_eigenpairs
    p = cfg.params
    g = Grid1D.uniform(float(p["L"]), int(p["n"]))
    e1 = smallest_eigenpairs(assemble_oscillator(g, False), 1)[0]
    e1d = smallest_eigenpairs(assemble_oscillator(g, True), 1)[0]
    summary = {"e1": e1.value, "e1_dirichlet": e1d.value,
               "residuals": [e1.residual, e1d.residual]}
    return summary, {}, {"ordered": e1.value < e1d.value}


def _task_energy_ode(cfg, tube, out):
    from .evolution import energy_system_integrate, lambert_closed_form
    p = cfg.params
    traj = energy_system_integrate(p["a0"], p["b0"], p["cH"], p["T_end"], p["dt"])
    a_ex, b_ex = lambert_closed_form(p["a0"], p["b0"], p["cH"], traj.t)
    path = write_csv(out / "energy.csv", ("t", "a", "b", "a_exact", "b_exact"),
                     zip(traj.t, traj.a, traj.b, a_ex, b_ex))
    err = max(float(np.max(np.abs(traj.a / a_ex - 1))), float(np.max(np.abs(traj.b / b_ex - 1))))
    summary = {"xi0": traj.xi0, "max_relative_error": err, "a_final": traj.a[-1],
               "b_final": traj.b[-1]}
    return summary, {"trajectory": str(path)}, {"a_below_b": bool(np.all(traj.a <= traj.b))}


def _task_inequalities(cfg, tube, out):
    from .inequalities import run_suite
    rows = run_suite(int(cfg.params["n_seeds"]), first_seed=int(cfg.data["seed"]))
    return _suite_outputs(rows, out)


def _suite_outputs(rows, out):
    outputs, summary, inv = {}, {}, {}
    for check in sorted({r.check for r in rows}):
        sel = [r for r in rows if r.check == check]
        path = write_csv(out / f"{check}.csv", ("seed", "margin", "scale"),
                         ((r.seed, r.margin, r.scale) for r in sel))
        outputs[check] = str(path)
        worst = min(r.relative for r in sel)
        summary[check] = {"n": len(sel), "min_relative_margin": worst}
        inv[check] = worst >= -1e-9
    return summary, outputs, inv


def _task_stability(cfg, tube, out):
    from .spectral import stability_probe
    g2 = _grid2(cfg, tube) if tube.twisted else None
    val = stability_probe(tube, float(cfg.params["eps_pot"]), g2, seed=cfg.data["seed"])
    return {"eps_pot": cfg.params["eps_pot"], "lambda": val, "twisted": tube.twisted}, {}, {}


_DISPATCH = {
    "modes": _task_modes,
    "mu-curve": _task_mu_curve,
    "hardy": _task_hardy,
    "lambda-sweep": _task_lambda_sweep,
    "evolve": _task_evolve,
    "fit": _task_fit,
    "oracle-1d": _task_oracle_1d,
    "energy-ode": _task_energy_ode,
    "inequalities": _task_inequalities,
    "stability": _task_stability,
}


def run(config: RunConfig, out_dir=None) -> ResultRecord:
    """Dispatch ``config`` to its task, write outputs and return the record.

    Raises
    ------
    TaskFailed
        Wrapping any module error raised by the task.
    """
    from . import __version__
    if not isinstance(config, RunConfig):
        config = RunConfig.from_dict(config)
    h = config.hash()
    out = Path(out_dir) if out_dir is not None else config.output_root() / f"{config.task}-{h[:12]}"
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", category=UserWarning)
            res = _DISPATCH[config.task](config, config.tube(), out)
    except (TwistlabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise TaskFailed(f"{config.task}: {type(exc).__name__}: {exc}") from exc
    summary, outputs, inv = res[:3]
    comp = res[3] if len(res) > 3 else {}
    rec = ResultRecord(h, config.task, started, _now(), outputs, summary,
                       {k: bool(v) for k, v in inv.items()}, __version__, companions=comp)
    (out / "config.json").write_text(json.dumps(_jsonable(config.data), indent=2, sort_keys=True)
                                     + "\n", encoding="utf-8")
    rec.outputs["summary"] = str(out / "summary.json")
    (out / "summary.json").write_text(json.dumps(rec.to_dict(), indent=2) + "\n", encoding="utf-8")
    return rec


def _sweep_one(args):
    cfg, out = args
    try:
        return run(cfg, out)
    except TaskFailed as exc:
        return exc


def _scalar_items(summary: dict):
    for k, v in summary.items():
        if isinstance(v, (bool, int, float, np.floating, np.integer)) and not isinstance(v, dict):
            yield k, v


def sweep(base: RunConfig, axis: str, values: Sequence, workers: Optional[int] = None,
          out_dir=None) -> List[Any]:
    """Run ``base`` once per value of ``axis`` concurrently.

    Returns one :class:`ResultRecord` (or the :class:`TaskFailed` raised) per
    value and writes ``sweep_summary.csv`` with a per-value status column.
    """
    path = AXIS_ALIASES.get(axis, axis)
    cfgs = []
    for v in values:
        val = [float(v)] if path == "params.eps" else v
        cfgs.append(base.with_value(path, val))
    root = Path(out_dir) if out_dir is not None else base.output_root() / f"sweep-{axis}-{base.hash()[:12]}"
    jobs = [(c, root / f"{axis}={_fmt(v)}") for c, v in zip(cfgs, values)]
    n = workers or base.data["workers"]
    if n > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    keys: List[str] = []
    for r in results:
        if isinstance(r, ResultRecord):
            keys += [k for k, _ in _scalar_items(r.summary) if k not in keys]
    rows = []
    for v, r in zip(values, results):
        if isinstance(r, ResultRecord):
            vals = dict(_scalar_items(r.summary))
            rows.append([v, "ok" if r.ok else "invariant-failed"] + [vals.get(k) for k in keys])
        else:
            rows.append([v, f"failed: {r}"] + [None] * len(keys))
    write_csv(root / "sweep_summary.csv", [axis, "status"] + keys, rows)
    return results


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def _parse_values(text: str) -> list:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if "/" in tok:
            num, den = tok.split("/")
            out.append(float(num) / float(den))
        else:
            out.append(float(tok))
    return out


def _report(rec: ResultRecord) -> None:
    print(json.dumps({"task": rec.task, "summary": rec.outputs.get("summary"),
                      "invariants": rec.invariants}, indent=2))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="twistlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one task from a YAML/JSON config")
    p_run.add_argument("config")
    p_sw = sub.add_parser("sweep", help="run a config over several values of one parameter")
    p_sw.add_argument("config")
    p_sw.add_argument("--axis", required=True,
                      help="alias (%s) or dotted config path" % ", ".join(AXIS_ALIASES))
    p_sw.add_argument("--values", required=True, help="comma-separated, fractions allowed")
    p_sw.add_argument("--workers", type=int, default=None)
    p_ck = sub.add_parser("check", help="run the seeded inequality suite")
    p_ck.add_argument("--seeds", type=int, default=100)
    p_ck.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            rec = run(load_config(args.config))
            _report(rec)
            return 0 if rec.ok else 1
        if args.command == "sweep":
            results = sweep(load_config(args.config), args.axis, _parse_values(args.values),
                            args.workers)
            ok = all(isinstance(r, ResultRecord) and r.ok for r in results)
            for r in results:
                if isinstance(r, ResultRecord):
                    _report(r)
                else:
                    print(f"failed: {r}", file=sys.stderr)
            return 0 if ok else 1
        cfg = RunConfig.from_dict({"task": "inequalities", "params": {"n_seeds": args.seeds}})
        rec = run(cfg, args.out)
        for check, s in rec.summary.items():
            verdict = "PASS" if rec.invariants[check] else "FAIL"
            print(f"{verdict} {check}: n={s['n']} min relative margin {s['min_relative_margin']:.3e}")
        return 0 if rec.ok else 1
    except (ConfigInvalid, TaskFailed) as exc:
        print(f"twistlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
