"""Config-driven experiment runner.

Usage::

    python -m levywave --config experiment.yaml [--seed N] [--threads N] [--out DIR]

The config is a YAML (or JSON) mapping with tagged sections. Unknown keys are
errors. Exit status: 0 on success, 2 on a configuration/validation error,
3 on a runtime numeric or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import subprocess
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .fields import Scenario, scenario_from_dict
from .geometry import GridGeometry
from .levy_measure import InfiniteMomentError, LevyMeasure, measure_from_dict
from .moments import estimate_moments, lyapunov_fit
from .oracle_bounds import (bound_constants, crossing_time, kernel_from_dict, linear_second_moment,
                            lower_bound_moment, rosenthal_check, upper_bound_moment, volterra_solve)
from .prm import (StepFunction, TruncationPolicy, cell_variance, integrate_step_samples,
                  noise_increments)
from .solver import Scheme, picard_differences, picard_sequence, simulate

log = logging.getLogger(__name__)

COMMANDS = ("simulate", "moments", "picard", "oracle", "bounds", "rosenthal", "noise-test")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class ConfigError(ValueError):
    pass


def _reject_unknown(section: dict, allowed: set, where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {', '.join(sorted(unknown))}")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    seed: int = 0
    replicates: int = 1000
    p_list: tuple[float, ...] = (2.0,)
    measure: LevyMeasure | None = None
    scenario: Scenario = field(default_factory=Scenario)
    geometry: GridGeometry | None = None
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)
    scheme: Scheme = Scheme.DIAMOND
    output_dir: str = "."
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "seed": self.seed,
            "replicates": self.replicates,
            "p_list": list(self.p_list),
            "measure": None if self.measure is None else self.measure.to_dict(),
            "scenario": self.scenario.to_dict(),
            "geometry": None if self.geometry is None else self.geometry.to_dict(),
            "policy": self.policy.to_dict(),
            "scheme": self.scheme.value,
            "output": {"dir": self.output_dir},
            **({self._section: self.options} if self.options else {}),
        }

    @property
    def _section(self) -> str:
        return self.command.replace("-", "_")


# per-command option sections and their allowed keys
_OPTION_KEYS = {
    "simulate": {"replicate"},
    "moments": {"window", "mode", "point"},
    "picard": {"n_max", "replicate"},
    "oracle": {"a2", "kernel", "T", "delta"},
    "bounds": {"C0", "t", "lower"},
    "rosenthal": {"integrand", "T", "max_dt"},
    "noise_test": {"integrand", "T"},
}

_TOP_KEYS = {"command", "seed", "replicates", "p_list", "measure", "scenario", "geometry",
             "policy", "scheme", "output"} | set(_OPTION_KEYS)


def parse_config(raw: dict) -> ExperimentConfig:
    """Parse and validate a config mapping. Raises :class:`ConfigError`."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    _reject_unknown(raw, _TOP_KEYS, "config")
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}")
    section = command.replace("-", "_")
    stray = (set(raw) & set(_OPTION_KEYS)) - {section}
    if stray:
        raise ConfigError(f"section(s) {', '.join(sorted(stray))} do not apply to command {command}")
    try:
        seed = int(raw.get("seed", 0))
        if not 0 <= seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        replicates = int(raw.get("replicates", 1000))
        p_list = tuple(float(p) for p in raw.get("p_list", [2.0]))
        measure = measure_from_dict(raw["measure"]) if raw.get("measure") is not None else None
        scenario = scenario_from_dict(raw.get("scenario", {}))
        geometry = None
        if raw.get("geometry") is not None:
            g = raw["geometry"]
            _reject_unknown(g, {"T", "K", "delta"}, "geometry")
            geometry = GridGeometry(float(g["T"]), float(g.get("K", 0.0)), float(g["delta"]))
        pol = raw.get("policy") or {}
        _reject_unknown(pol, {"epsilon", "small_jumps", "target_variance_fraction"}, "policy")
        policy = TruncationPolicy(pol.get("epsilon"), pol.get("small_jumps", "gaussian"),
                                  float(pol.get("target_variance_fraction", 1e-3)))
        scheme = Scheme(raw.get("scheme", "diamond"))
        out = raw.get("output") or {}
        _reject_unknown(out, {"dir"}, "output")
        options = dict(raw.get(section) or {})
        _reject_unknown(options, _OPTION_KEYS[section], section)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc) if not isinstance(exc, KeyError) else f"missing field {exc}") from exc
    cfg = ExperimentConfig(command, seed, replicates, p_list, measure, scenario, geometry,
                           policy, scheme, str(out.get("dir", ".")), options)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig):
    """Cross-field checks; all run before any computation."""
    needs_measure = cfg.command in ("simulate", "moments", "picard", "bounds", "rosenthal", "noise-test")
    if needs_measure and cfg.measure is None:
        raise ConfigError(f"command {cfg.command} needs a measure section")
    if cfg.command in ("simulate", "moments", "picard") and cfg.geometry is None:
        raise ConfigError(f"command {cfg.command} needs a geometry section")
    if cfg.command in ("moments", "rosenthal", "noise-test") and cfg.replicates < 2:
        raise ConfigError("replicates must be >= 2")
    if cfg.command in ("moments", "bounds", "rosenthal"):
        for p in cfg.p_list:
            if p < 2:
                raise ConfigError(f"moment orders must be >= 2, got {p}")
            try:
                cfg.measure.max_moment(p)
            except InfiniteMomentError as exc:
                raise ConfigError(str(exc)) from exc
    o = cfg.options
    if cfg.command == "oracle":
        for key in ("a2", "kernel", "T", "delta"):
            if key not in o:
                raise ConfigError(f"oracle section needs {key}")
        try:
            kernel_from_dict(o["kernel"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        n = round(o["T"] / o["delta"])
        if abs(n * o["delta"] - o["T"]) > 1e-9 * max(1.0, o["T"]):
            raise ConfigError("oracle T must be an integer multiple of delta")
    if cfg.command == "picard" and int(o.get("n_max", 40)) < 1:
        raise ConfigError("picard n_max must be >= 1")
    if cfg.command == "bounds" and o.get("lower", False):
        try:
            cfg.scenario.lower_bound_level()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if cfg.command == "bounds" and float(o.get("C0", 1.0)) < 1:
        raise ConfigError("C0 must be >= 1")
    if cfg.command in ("rosenthal", "noise-test") and "integrand" in o:
        try:
            X = StepFunction(tuple(tuple(r) for r in o["integrand"]))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad integrand: {exc}") from exc
        if X.t_max > float(o.get("T", 1.0)) + 1e-12:
            raise ConfigError("integrand support extends past T")
    if cfg.command == "moments" and "window" in o:
        lo, hi = o["window"]
        if not 0 <= lo < hi <= cfg.geometry.T + 1e-12:
            raise ConfigError("fit window must lie inside [0, T]")


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return parse_config(raw)


# -- emitters ------------------------------------------------------------------

def version_string() -> str:
    """Package version, suffixed with ``git describe`` output when available."""
    try:
        desc = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                              text=True, cwd=Path(__file__).parent, timeout=5, check=True).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{__version__}+g{desc}" if desc else __version__


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def emit_csv(path, header, rows):
    """Write a CSV with '.' decimals and '\\n' row terminators."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def emit_json(path, data: dict):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def moment_rows(estimates):
    for est in estimates:
        for j, t in enumerate(est.t_grid):
            for i, x in enumerate(est.x_grid):
                yield est.p, t, x, est.mean_p[j, i], est.stderr[j, i]


MOMENT_HEADER = ("p", "t", "x", "mean", "stderr")


# -- commands ------------------------------------------------------------------

def _summary(cfg: ExperimentConfig, **payload) -> dict:
    return {"config": cfg.to_dict(), "seed": cfg.seed, "version": version_string(), **payload}


def _run_simulate(cfg, out, threads):
    r = int(cfg.options.get("replicate", 0))
    noise = noise_increments(cfg.measure, cfg.geometry, cfg.policy, seed=cfg.seed, replicate=r)
    sol = simulate(cfg.scenario, cfg.geometry, noise, cfg.scheme)
    rows = ((t, x, sol.values[j, i]) for j, t in enumerate(sol.t) for i, x in enumerate(sol.x))
    emit_csv(out / "simulate.csv", ("t", "x", "u"), rows)
    emit_json(out / "simulate.json", _summary(cfg, replicate=r, epsilon=noise.epsilon,
                                              u_final_max=float(np.max(np.abs(sol.values[-1])))))
    print(f"simulate: replicate {r}, {sol.values.shape[0]} x {sol.values.shape[1]} nodes, "
          f"max|u(T,.)| = {np.max(np.abs(sol.values[-1])):.6g}")


def _run_moments(cfg, out, threads):
    g = cfg.geometry
    ests = estimate_moments(cfg.scenario, g, cfg.measure, cfg.policy, cfg.p_list, cfg.replicates,
                            cfg.seed, cfg.scheme, threads=threads)
    emit_csv(out / "moments.csv", MOMENT_HEADER, moment_rows(ests))
    t_pt, x_pt = cfg.options.get("point", [g.T, 0.0])
    x_pt = float(g.x_window[np.argmin(np.abs(g.x_window - x_pt))])
    window = cfg.options.get("window")
    mode = cfg.options.get("mode", "sup")
    points, fits = [], []
    for est in ests:
        mean, se = est.at(t_pt, x_pt)
        points.append({"p": est.p, "t": t_pt, "x": x_pt, "mean": mean, "stderr": se})
        print(f"moments: p={est.p:g} E|u({t_pt:g},{x_pt:g})|^p = {mean:.6g} +/- {se:.2g} "
              f"(R={est.replicates})")
        try:
            fits.append(lyapunov_fit(est, window, mode).to_dict())
        except ValueError as exc:
            log.warning("no Lyapunov fit for p=%g: %s", est.p, exc)
    emit_json(out / "moments.json", _summary(cfg, points=points, fits=fits,
                                             window_halfwidth=g.K))


def _run_picard(cfg, out, threads):
    r = int(cfg.options.get("replicate", 0))
    n_max = int(cfg.options.get("n_max", 40))
    noise = noise_increments(cfg.measure, cfg.geometry, cfg.policy, seed=cfg.seed, replicate=r)
    its = picard_sequence(cfg.scenario, cfg.geometry, noise, n_max)
    d = picard_differences(its)
    ref = simulate(cfg.scenario, cfg.geometry, noise, Scheme.CONE_SUM)
    gap = float(np.max(np.abs(its[-1].values - ref.values)))
    emit_csv(out / "picard.csv", ("n", "sup_diff"), enumerate(d))
    emit_json(out / "picard.json", _summary(cfg, sup_diff=d, final_vs_simulate=gap))
    print(f"picard: {n_max} iterations, last sup gap {d[-1]:.3g}, |u_n - u| = {gap:.3g}")


def _run_oracle(cfg, out, threads):
    o = cfg.options
    sol = volterra_solve(float(o["a2"]), kernel_from_dict(o["kernel"]), float(o["T"]), float(o["delta"]))
    emit_csv(out / "oracle.csv", ("t", "f"), zip(sol.t, sol.f))
    emit_json(out / "oracle.json", _summary(cfg, f_final=float(sol.f[-1]), t_final=float(sol.t[-1])))
    print(f"oracle: f({sol.t[-1]:g}) = {sol.f[-1]:.9g}")


def _run_bounds(cfg, out, threads):
    o = cfg.options
    C0 = float(o.get("C0", 1.0))
    consts = bound_constants(cfg.scenario, cfg.measure, C0)
    t = np.asarray(o.get("t", [0.0, 0.25, 0.5, 0.75, 1.0]), dtype=float)
    rows, report = [], {"constants": consts.to_dict(), "C0": C0, "upper": [], "lower": None}
    for p in cfg.p_list:
        ub = upper_bound_moment(consts, cfg.measure, p, t)
        report["upper"].append({"p": p, "beta": consts.beta(cfg.measure, p), "t": t,
                                "log_bound": ub.log_value})
        rows.extend((p, ti, lv, v) for ti, lv, v in zip(t, ub.log_value, ub.value))
    emit_csv(out / "bounds.csv", ("p", "t", "log_upper", "upper"), rows)
    if o.get("lower", False):
        a = cfg.scenario.lower_bound_level()
        lam = cfg.scenario.sigma.slope
        exact = linear_second_moment(a, lam, consts.m2, t)
        lower = lower_bound_moment(a, consts.L_sigma, consts.m2, t)
        report["lower"] = {"t": t, "lower_bound": lower, "linear_second_moment": exact,
                           "crossing_time": crossing_time(t, exact, lower), "rate": consts.lam}
    emit_json(out / "bounds.json", _summary(cfg, **report))
    print(f"bounds: L1 = {consts.L1:.6g}, L2 = {consts.L2:.6g}, C0 = {C0:g}, "
          f"in proof regime: {consts.in_proof_regime}")


def _integrand(o) -> StepFunction:
    rects = o.get("integrand", [[0.0, 1.0, 0.0, 1.0, 1.0]])
    return StepFunction(tuple(tuple(r) for r in rects))


def _run_rosenthal(cfg, out, threads):
    o = cfg.options
    X = _integrand(o)
    T = float(o.get("T", 1.0))
    max_dt = float(o.get("max_dt", 1 / 256))
    reps = [rosenthal_check(X, cfg.measure, cfg.policy, p, T, cfg.replicates, cfg.seed, max_dt)
            for p in cfg.p_list]
    emit_csv(out / "rosenthal.csv", ("p", "lhs", "term_quadratic", "term_jump", "ratio"),
             ((r.p, r.lhs_p_norm, r.term_quadratic, r.term_jump, r.empirical_ratio) for r in reps))
    emit_json(out / "rosenthal.json", _summary(cfg, reports=[r.to_dict() for r in reps]))
    for r in reps:
        print(f"rosenthal: p={r.p:g} ||sup|Y|||_p = {r.lhs_p_norm:.6g}, ratio = {r.empirical_ratio:.4g}")


def _run_noise_test(cfg, out, threads):
    o = cfg.options
    X = _integrand(o)
    T = float(o.get("T", 1.0))
    samples = integrate_step_samples(X, T, cfg.measure, cfg.policy, cfg.replicates, cfg.seed)
    R = samples.size
    var = float(np.var(samples, ddof=1))
    m4 = float(np.mean((samples - samples.mean()) ** 4))
    var_se = float(np.sqrt(max(m4 - var ** 2, 0.0) / R))
    expected = cfg.measure.m2 * X.norm_p(2.0) ** 2
    unit = cell_variance(cfg.measure, cfg.policy)
    emit_json(out / "noise_test.json", _summary(
        cfg, mean=float(samples.mean()), mean_stderr=float(samples.std(ddof=1) / np.sqrt(R)),
        variance=var, variance_stderr=var_se, expected_variance=expected,
        unit_cell_variance=unit, epsilon=cfg.policy.cutoff(cfg.measure)))
    print(f"noise-test: var = {var:.6g} +/- {var_se:.2g}, isometry predicts {expected:.6g}")


_RUNNERS = {"simulate": _run_simulate, "moments": _run_moments, "picard": _run_picard,
            "oracle": _run_oracle, "bounds": _run_bounds, "rosenthal": _run_rosenthal,
            "noise-test": _run_noise_test}


def run(cfg: ExperimentConfig, threads: int = 1, out: str | None = None) -> int:
    """Execute a parsed config; returns the exit status."""
    out_dir = Path(out if out is not None else cfg.output_dir)
    try:
        _RUNNERS[cfg.command](cfg, out_dir, threads)
    except OSError as exc:
        log.error("I/O failure: %s", exc)
        return EXIT_RUNTIME
    except (ArithmeticError, ValueError) as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_RUNTIME
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="levywave", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="YAML or JSON experiment file")
    parser.add_argument("--seed", type=int, help="override the master seed (u64)")
    parser.add_argument("--threads", type=int, default=1, help="worker threads for replicates")
    parser.add_argument("--out", help="output directory (overrides output.dir)")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        with open(args.config, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
        if args.seed is not None:
            if not isinstance(raw, dict):
                raise ConfigError("config must be a mapping")
            raw = {**raw, "seed": args.seed}
        cfg = parse_config(raw)
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_RUNTIME
    except (ConfigError, yaml.YAMLError) as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    if args.threads < 1:
        log.error("invalid config: --threads must be >= 1")
        return EXIT_CONFIG
    return run(cfg, args.threads, args.out)


if __name__ == "__main__":
    sys.exit(main())
