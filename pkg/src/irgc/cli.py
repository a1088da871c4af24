"""Batch front end.

A run is described by a flat ``key = value`` file, for example::

    task = stereo
    left = left.pgm
    right = right.pgm
    labels = 8
    preset = teddy
    solver = IRGC_EXPANSION

Relative paths are resolved against the directory of the config file.
Command-line flags override the file.
"""

from __future__ import annotations

import argparse
import configparser
import enum
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from irgc.estimator import IRGC, AlphaExpansion, ExhaustiveSearch
from irgc.model_io import ModelFormatError, read_model
from irgc.mrf_model import energy
from irgc.multilabel_graph import estimate_memory
from irgc.priors import PriorKind, PriorSpec, decompose
from irgc.solvers import InstanceTooLargeError, brute_force_min
from irgc.vision_tasks import (
    GradientGammaRule,
    GrayImage,
    Matcher,
    PGMError,
    inpainting_model,
    labels_to_image,
    read_pgm,
    stereo_model,
    write_pgm,
)


class Task(str, enum.Enum):
    STEREO = "STEREO"
    INPAINT = "INPAINT"
    SYNTHETIC = "SYNTHETIC"


class Solver(str, enum.Enum):
    IRGC = "IRGC"
    IRGC_EXPANSION = "IRGC_EXPANSION"
    EXPANSION = "EXPANSION"
    BRUTE_FORCE = "BRUTE_FORCE"


class ConfigError(ValueError):
    pass


# Named potentials. Keys set here are defaults; explicit config keys win.
PRESETS = {
    "teddy": dict(prior="TRUNCATED_LINEAR", lam=8, gamma_threshold=10, gamma_low_gradient=30,
                  gamma_high_gradient=10, matcher="BIRCHFIELD_TOMASI"),
    "map": dict(prior="TRUNCATED_LINEAR", lam=6, gamma=4, matcher="BIRCHFIELD_TOMASI"),
    "sawtooth": dict(prior="TRUNCATED_QUADRATIC", lam=3, gamma=20, matcher="BIRCHFIELD_TOMASI"),
    "venus": dict(prior="TRUNCATED_QUADRATIC", lam=3, gamma=50, matcher="ABSOLUTE_DIFFERENCE"),
    "cones": dict(prior="CAUCHY", lam=8, gamma=10, matcher="BIRCHFIELD_TOMASI"),
    "tsukuba": dict(prior="CAUCHY", lam=2, gamma_threshold=8, gamma_low_gradient=40,
                    gamma_high_gradient=20, matcher="ABSOLUTE_DIFFERENCE"),
    "tsukuba_cg": dict(prior="CORRUPTED_GAUSSIAN", alpha=0.75, beta=50, gamma_threshold=8,
                       gamma_low_gradient=40, gamma_high_gradient=20, matcher="ABSOLUTE_DIFFERENCE"),
    "penguin": dict(prior="TRUNCATED_QUADRATIC", lam=10, gamma=20, label_step=2),
    "house": dict(prior="TRUNCATED_QUADRATIC", lam=15, gamma=5, label_step=4),
}

_PATH_KEYS = ("left", "right", "ground_truth", "image", "mask", "model", "out")
_KEYS = {
    "task", "preset", "prior", "lambda", "alpha", "beta", "labels", "matcher", "label_step",
    "gamma", "gamma_threshold", "gamma_low_gradient", "gamma_high_gradient", "connectivity",
    "solver", "initial_weight", "max_iterations", "convergence", "lower_bound", *_PATH_KEYS,
}


@dataclass
class RunConfig:
    task: Task
    prior: PriorSpec | None = None
    solver: Solver = Solver.IRGC_EXPANSION
    out: Path = Path("out")
    left: Path | None = None
    right: Path | None = None
    ground_truth: Path | None = None
    image: Path | None = None
    mask: Path | None = None
    model: Path | None = None
    labels: int | None = None
    matcher: Matcher = Matcher.ABSOLUTE_DIFFERENCE
    label_step: int | None = None
    gamma_rule: GradientGammaRule | None = None
    connectivity: int = 4
    initial_weight: float = 0.5
    max_iterations: int = 100
    convergence: float = 1e-9
    lower_bound: float | None = None
    source: Path | None = field(default=None, compare=False)

    def input_paths(self):
        return [p for p in (self.left, self.right, self.ground_truth, self.image, self.mask, self.model) if p]


def quality(E, E_b):
    """Relative gap to a lower bound in percent: ``(E - E_b) / E_b * 100``."""
    if not E_b > 0:
        raise ValueError(f"lower bound must be positive, got {E_b}")
    if E < E_b - 1e-9:
        raise ValueError(f"energy {E} lies below the lower bound {E_b}")
    return (E - E_b) / E_b * 100.0


# -- config parsing -----------------------------------------------------------------


def read_config_file(path):
    """Raw key/value pairs of a config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string("[run]\n" + path.read_text(), source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return dict(parser["run"])


def _get(raw, key, convert, default=None):
    if key not in raw:
        return default
    try:
        return convert(raw[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw[key]!r} ({exc})") from None


def _enum(cls):
    return lambda s: cls(s.strip().upper())


def make_config(raw, base_dir=".", source=None):
    """Turn raw key/value pairs into a validated :class:`RunConfig`."""
    raw = {k.lower(): str(v).strip() for k, v in raw.items() if v is not None}
    unknown = sorted(set(raw) - _KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    if "task" not in raw:
        raise ConfigError("config must set 'task'")

    values = {}
    if "preset" in raw:
        name = raw["preset"].lower()
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {raw['preset']!r}; choose from {', '.join(PRESETS)}")
        values.update({k: str(v) for k, v in PRESETS[name].items()})
        if "lam" in values:
            values["lambda"] = values.pop("lam")
    values.update(raw)

    task = _get(values, "task", _enum(Task))
    base = Path(base_dir)
    paths = {k: base / values[k] for k in _PATH_KEYS if k in values}
    if "out" not in paths:
        stem = Path(source).stem if source else "run"
        paths["out"] = base / f"{stem}_out"

    cfg = RunConfig(task=task, source=Path(source) if source else None, **paths)
    cfg.solver = _get(values, "solver", _enum(Solver), cfg.solver)
    cfg.connectivity = _get(values, "connectivity", int, cfg.connectivity)
    cfg.initial_weight = _get(values, "initial_weight", float, cfg.initial_weight)
    cfg.max_iterations = _get(values, "max_iterations", int, cfg.max_iterations)
    cfg.convergence = _get(values, "convergence", float, cfg.convergence)
    cfg.lower_bound = _get(values, "lower_bound", float)
    cfg.labels = _get(values, "labels", int)
    cfg.matcher = _get(values, "matcher", _enum(Matcher), cfg.matcher)
    cfg.label_step = _get(values, "label_step", int)

    if task is not Task.SYNTHETIC:
        if "prior" not in values:
            raise ConfigError(f"{task.value.lower()} task needs 'prior' or 'preset'")
        try:
            cfg.prior = PriorSpec(
                _get(values, "prior", _enum(PriorKind)),
                lam=_get(values, "lambda", float),
                alpha=_get(values, "alpha", float),
                beta=_get(values, "beta", float),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if "gamma_low_gradient" in values or "gamma_high_gradient" in values:
            try:
                cfg.gamma_rule = GradientGammaRule(
                    _get(values, "gamma_threshold", int, 0),
                    _get(values, "gamma_low_gradient", float),
                    _get(values, "gamma_high_gradient", float),
                )
            except (TypeError, ValueError):
                raise ConfigError("gradient gamma rule needs gamma_threshold, gamma_low_gradient "
                                  "and gamma_high_gradient") from None
        elif "gamma" in values:
            cfg.gamma_rule = GradientGammaRule.uniform(_get(values, "gamma", float))
        else:
            raise ConfigError("config must set 'gamma' or a gradient gamma rule")

    _check_task_fields(cfg)
    return cfg


def _check_task_fields(cfg):
    required = {
        Task.STEREO: ("left", "right", "labels"),
        Task.INPAINT: ("image", "label_step"),
        Task.SYNTHETIC: ("model",),
    }[cfg.task]
    missing = [k for k in required if getattr(cfg, k) is None]
    if missing:
        raise ConfigError(f"{cfg.task.value.lower()} task is missing: {', '.join(missing)}")
    if cfg.solver is Solver.BRUTE_FORCE and cfg.task is not Task.SYNTHETIC:
        raise ConfigError("BRUTE_FORCE is only available for synthetic models")
    if cfg.task is Task.INPAINT and cfg.prior.kind is not PriorKind.TRUNCATED_QUADRATIC:
        raise ConfigError("inpainting uses a truncated quadratic prior")
    if cfg.connectivity not in (4, 8):
        raise ConfigError(f"connectivity must be 4 or 8, got {cfg.connectivity}")
    if cfg.lower_bound is not None and not cfg.lower_bound > 0:
        raise ConfigError("lower_bound must be positive")


def load_config(path, overrides=None):
    path = Path(path)
    raw = read_config_file(path)
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return make_config(raw, base_dir=path.parent, source=path)


# -- model construction --------------------------------------------------------------


def _check_inputs(cfg):
    for p in cfg.input_paths():
        if not p.is_file():
            raise FileNotFoundError(f"input file not found: {p}")


@dataclass
class Problem:
    model: object
    width: int
    height: int
    truth: np.ndarray | None = None


def build_problem(cfg):
    _check_inputs(cfg)
    if cfg.task is Task.SYNTHETIC:
        model = read_model(cfg.model)
        return Problem(model, model.node_count, 1)
    prior = decompose(cfg.prior)
    if cfg.task is Task.STEREO:
        left, right = read_pgm(cfg.left), read_pgm(cfg.right)
        model = stereo_model(left, right, cfg.labels, prior, cfg.gamma_rule, cfg.connectivity, cfg.matcher)
        truth = read_pgm(cfg.ground_truth).pixels.ravel().astype(np.int64) if cfg.ground_truth else None
        return Problem(model, left.width, left.height, truth)
    image = read_pgm(cfg.image)
    if cfg.mask is not None:
        mask = read_pgm(cfg.mask).pixels > 0
    else:
        mask = np.ones(image.pixels.shape, dtype=bool)
    if cfg.connectivity != 4:
        raise ConfigError("inpainting is defined on the 4-connected grid")
    rule = cfg.gamma_rule
    if rule.gamma_low_gradient != rule.gamma_high_gradient:
        raise ConfigError("inpainting takes a single gamma")
    model = inpainting_model(image, mask, cfg.label_step, rule.gamma_low_gradient, cfg.prior.lam)
    return Problem(model, image.width, image.height)


def make_solver(cfg):
    if cfg.solver is Solver.BRUTE_FORCE:
        return ExhaustiveSearch()
    if cfg.solver is Solver.EXPANSION:
        return AlphaExpansion(max_iterations=cfg.max_iterations, convergence=cfg.convergence)
    return IRGC(cfg.initial_weight, cfg.max_iterations, cfg.convergence, hybrid=cfg.solver is Solver.IRGC_EXPANSION)


# -- running ----------------------------------------------------------------------


def _summary_lines(cfg, problem, est, wall):
    model = problem.model
    lines = [
        f"task: {cfg.task.value}",
        f"solver: {cfg.solver.value}",
        f"nodes: {model.node_count}",
        f"labels: {model.label_count}",
        f"energy: {est.energy_!r}",
        f"iterations: {est.n_iter_}",
        f"time_seconds: {wall:.6f}",
    ]
    if cfg.lower_bound is not None:
        lines.append(f"lower_bound: {cfg.lower_bound!r}")
        lines.append(f"quality_percent: {quality(est.energy_, cfg.lower_bound):.6f}")
    if problem.truth is not None:
        acc = float(np.mean(est.labels_ == problem.truth))
        lines.append(f"accuracy: {acc:.6f}")
    return lines


def execute(cfg):
    """Solve ``cfg`` and write its outputs; raises on any failure after cleaning up."""
    started = time.perf_counter()
    problem = build_problem(cfg)
    est = make_solver(cfg).fit(problem.model)
    wall = time.perf_counter() - started

    out = Path(cfg.out)
    created_dir = not out.exists()
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        model = problem.model
        target = out / "labels.pgm"
        written.append(target)
        write_pgm(labels_to_image(est.labels_, problem.width, problem.height, model.label_count), target)
        if cfg.task is Task.INPAINT:
            target = out / "inpainted.pgm"
            written.append(target)
            levels = (est.labels_ * cfg.label_step).reshape(problem.height, problem.width)
            write_pgm(GrayImage(levels), target)
        target = out / "trace.csv"
        written.append(target)
        est.trace_.write_csv(target)
        target = out / "summary.txt"
        written.append(target)
        target.write_text("\n".join(_summary_lines(cfg, problem, est, wall)) + "\n")
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        if created_dir and out.is_dir() and not any(out.iterdir()):
            out.rmdir()
        raise
    return est


_EXPECTED = (OSError, ValueError, ConfigError, PGMError, ModelFormatError, InstanceTooLargeError)


def run(cfg, stream=None):
    """Run one config; returns a process exit status."""
    stream = stream or sys.stderr
    try:
        est = execute(cfg)
    except _EXPECTED as exc:
        name = cfg.source or "config"
        print(f"error: {name}: {exc}", file=stream)
        return 1
    print(f"{cfg.out}: energy {est.energy_!r} after {est.n_iter_} iterations", file=sys.stdout)
    return 0


def _run_path(args):
    path, overrides = args
    try:
        cfg = load_config(path, overrides)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(cfg)


# -- commands ------------------------------------------------------------------------


def cmd_run(ns):
    overrides = {"solver": ns.solver}
    if ns.lower_bound is not None:
        overrides["lower_bound"] = repr(ns.lower_bound)
    jobs = []
    for path in ns.configs:
        o = dict(overrides)
        if ns.out is not None:
            out = Path(ns.out) if len(ns.configs) == 1 else Path(ns.out) / Path(path).stem
            # make it absolute so it is not re-rooted at the config directory
            o["out"] = str(out.resolve())
        jobs.append((path, o))
    if ns.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            statuses = list(pool.map(_run_path, jobs))
    else:
        statuses = [_run_path(j) for j in jobs]
    return max(statuses)


def cmd_oracle(ns):
    try:
        model = read_model(ns.model)
        x, e = brute_force_min(model)
    except (OSError, ModelFormatError, InstanceTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"energy: {e!r}")
    print("labels: " + " ".join(str(int(v)) for v in x))
    return 0


def cmd_mem_estimate(ns):
    try:
        cfg = load_config(ns.config)
        problem = build_problem(cfg)
    except _EXPECTED as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    model = problem.model
    arcs = estimate_memory(model)
    print(f"nodes: {model.node_count * model.label_count + 2}")
    print(f"arcs: {arcs}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="irgc", description="Multi-label MRF energy minimization.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="solve one or more configured problems")
    p.add_argument("configs", nargs="+", metavar="config")
    p.add_argument("--solver", type=str.upper, choices=[s.value for s in Solver])
    p.add_argument("--out", help="output directory (one subdirectory per config when several are given)")
    p.add_argument("--lower-bound", type=float, help="external lower bound E_b for the quality measure")
    p.add_argument("--jobs", type=int, default=1, help="configs to run in parallel")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("oracle", help="exhaustive minimum of a small model file")
    p.add_argument("model")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("mem-estimate", help="arc count of the multi-label graph for a config")
    p.add_argument("config")
    p.set_defaults(func=cmd_mem_estimate)
    return parser


def main(argv=None):
    ns = build_parser().parse_args(argv)
    if getattr(ns, "jobs", 1) < 1:
        print("error: --jobs must be positive", file=sys.stderr)
        return 2
    return ns.func(ns)


if __name__ == "__main__":
    sys.exit(main())
