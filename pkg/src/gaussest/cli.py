"""Command-line interface: ``gaussest experiment | estimate | selftest``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from ._validation import DegenerateDataError, DomainError
from .conjugate import EmOptions, GaussianParams
from .displacement import estimate_heterodyne, estimate_homodyne
from .experiments import ExperimentConfig, Task, run_experiment, write_plotdata, write_summary_csv
from .phase import EbOptions, VonMisesParam, estimate_phase
from .simulate import MeasurementBatch, ProbeConfig, Scheme
from .squeezing import estimate_ml_homodyne, estimate_povm_em

DEFAULT_TRIALS = 10_000
FORMATS = ("csv", "plotdata")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class CliConfig:
    experiment: ExperimentConfig
    output_path: str | None = None
    format: str = "csv"


def _type_name(types) -> str:
    names = {bool: "boolean", int: "integer", float: "number", str: "string", list: "array", dict: "object"}
    types = types if isinstance(types, tuple) else (types,)
    if set(types) == {int, float}:
        return "number"
    return " or ".join(dict.fromkeys(names.get(t, t.__name__) for t in types))


def _get(obj: dict, key: str, types, where: str, default=...):
    name = f"{where}.{key}" if where else key
    if key not in obj:
        if default is ...:
            raise ConfigError(f"missing required key {name!r} (expected {_type_name(types)})")
        return default
    value = obj[key]
    types_t = types if isinstance(types, tuple) else (types,)
    if isinstance(value, bool) and bool not in types_t:
        raise ConfigError(f"key {name!r} must be {_type_name(types)}, got boolean")
    if not isinstance(value, types_t):
        raise ConfigError(f"key {name!r} must be {_type_name(types)}, got {type(value).__name__}")
    return value


_NUM = (int, float)


def _gaussian(obj, where) -> GaussianParams:
    if not isinstance(obj, dict):
        raise ConfigError(f"key {where!r} must be object, got {type(obj).__name__}")
    mean = _get(obj, "mean", _NUM, where)
    var = _get(obj, "variance", _NUM, where)
    if not math.isfinite(var) or var <= 0:
        raise ConfigError(f"key '{where}.variance' must be a positive number, got {var}")
    if not math.isfinite(mean):
        raise ConfigError(f"key '{where}.mean' must be finite")
    return GaussianParams(mean, var)


def config_from_dict(raw: dict) -> CliConfig:
    """Validate a decoded JSON config and apply defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    task_name = _get(raw, "task", str, "")
    try:
        task = Task(task_name)
    except ValueError:
        options = ", ".join(t.value for t in Task)
        raise ConfigError(f"unknown task {task_name!r}; expected one of: {options}") from None
    grid = _get(raw, "m_grid", list, "")
    for i, m in enumerate(grid):
        if isinstance(m, bool) or not isinstance(m, int) or m < 1:
            raise ConfigError(f"key 'm_grid[{i}]' must be a positive integer, got {m!r}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ConfigError("m_grid must be strictly increasing")
    trials = _get(raw, "trials", int, "", DEFAULT_TRIALS)
    if trials < 1:
        raise ConfigError("key 'trials' must be a positive integer")
    seed = _get(raw, "base_seed", int, "", 0)

    probe_raw = _get(raw, "probe", dict, "", {})
    probe = ProbeConfig(
        alpha_re=_get(probe_raw, "alpha_re", _NUM, "probe", 0.0),
        alpha_im=_get(probe_raw, "alpha_im", _NUM, "probe", 0.0),
        squeeze_r=_get(probe_raw, "squeeze_r", _NUM, "probe", 0.0),
    )

    prior_raw = _get(raw, "true_prior", dict, "")
    prior = {}
    if task in (Task.DISPLACEMENT_HET, Task.DISPLACEMENT_HOM):
        prior["re"] = _gaussian(_get(prior_raw, "re", dict, "true_prior"), "true_prior.re")
        if task is Task.DISPLACEMENT_HET:
            prior["im"] = _gaussian(_get(prior_raw, "im", dict, "true_prior"), "true_prior.im")
    elif task is Task.PHASE:
        kappa = _get(prior_raw, "kappa", dict, "true_prior")
        conc = _get(kappa, "abs", _NUM, "true_prior.kappa")
        if conc < 0:
            raise ConfigError("key 'true_prior.kappa.abs' must be nonnegative")
        prior["kappa"] = VonMisesParam.polar(conc, _get(kappa, "angle", _NUM, "true_prior.kappa"))
    else:
        prior["r"] = _gaussian(_get(prior_raw, "r", dict, "true_prior"), "true_prior.r")
    if task in (Task.SQUEEZING_POVM, Task.SQUEEZING_BOTH, Task.PHASE) and probe.alpha == 0:
        raise ConfigError(f"task {task.value} needs a non-zero probe displacement (probe.alpha_re / probe.alpha_im)")

    em_raw = _get(raw, "em", dict, "", {})
    eb_raw = _get(raw, "eb", dict, "", {})
    try:
        em = EmOptions(
            epsilon_q=_get(em_raw, "epsilon_q", _NUM, "em", 1e-3),
            epsilon_param=_get(em_raw, "epsilon_param", _NUM, "em", 1e-9),
            max_iter=_get(em_raw, "max_iter", int, "em", 10_000),
            variance_floor=_get(em_raw, "variance_floor", _NUM, "em", 1e-12),
        )
        eb = EbOptions(
            kappa_max=_get(eb_raw, "kappa_max", _NUM, "eb", 1e3),
            tol=_get(eb_raw, "tol", _NUM, "eb", 1e-6),
            max_eval=_get(eb_raw, "max_eval", int, "eb", 200),
        )
    except (ValueError, DomainError) as exc:
        raise ConfigError(str(exc)) from None

    fmt = _get(raw, "format", str, "", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"key 'format' must be one of {FORMATS}, got {fmt!r}")
    out = _get(raw, "output_path", str, "", None)
    experiment = ExperimentConfig(task, tuple(grid), prior, probe, trials, em, eb, seed)
    return CliConfig(experiment, out, fmt)


def parse_config(file_path) -> CliConfig:
    try:
        with open(file_path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{file_path}: invalid JSON ({exc})") from None
    return config_from_dict(raw)


def cmd_experiment(config: CliConfig, strict: bool = False, engine: str = "batch", jobs: int = 1) -> int:
    out = config.output_path
    if out and out != "-":
        parent = os.path.dirname(os.path.abspath(out))
        if not os.path.isdir(parent):
            print(f"error: output directory does not exist: {parent}", file=sys.stderr)
            return 2
    summary = run_experiment(config.experiment, engine=engine, n_jobs=jobs)
    writer = write_plotdata if config.format == "plotdata" else write_summary_csv
    try:
        if out and out != "-":
            writer(summary, out)
        else:
            writer(summary, sys.stdout)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    failed = sum(r.failed for r in summary.records)
    if summary.degraded:
        print(f"warning: degraded run ({failed} failed trials)", file=sys.stderr)
        if strict:
            return 1
    return 0


def read_measurements(path, scheme: Scheme) -> MeasurementBatch:
    """Load one sample per line (``re im`` for complex schemes); ``#`` starts a comment."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.size == 0:
        raise ValueError(f"{path}: no samples")
    cols = data.shape[1]
    if scheme.is_complex and cols != 2:
        raise ValueError(f"scheme {scheme.value} expects complex samples written as 're im' (2 columns), got {cols}")
    if not scheme.is_complex and cols != 1:
        raise ValueError(f"scheme {scheme.value} expects one real sample per line, got {cols} columns")
    if scheme.is_complex:
        return MeasurementBatch(scheme, data[:, 0], data[:, 1])
    return MeasurementBatch(scheme, data[:, 0])


def _kv(pairs) -> str:
    def fmt(v):
        if isinstance(v, bool):
            return str(v).lower()
        if isinstance(v, float):
            return repr(v)
        return str(v)

    return " ".join(f"{k}={fmt(v)}" for k, v in pairs)


def estimate_fields(scheme: Scheme, batch: MeasurementBatch, known: dict, em: EmOptions, eb: EbOptions) -> list:
    """Run the single-batch estimator for ``scheme`` and return its key/value summary."""
    base = [("scheme", scheme.value), ("m", batch.count)]
    if scheme is Scheme.HETERODYNE_DISPLACEMENT:
        e = estimate_heterodyne(batch, known["squeeze_r"], em)
        return base + [
            ("alpha_re_hat", e.alpha_re_hat),
            ("alpha_im_hat", e.alpha_im_hat),
            ("prior_re_mean", e.fitted_prior_re.mean),
            ("prior_re_variance", e.fitted_prior_re.variance),
            ("prior_im_mean", e.fitted_prior_im.mean),
            ("prior_im_variance", e.fitted_prior_im.variance),
            ("posterior_re_variance", e.posterior_re.variance),
            ("posterior_im_variance", e.posterior_im.variance),
            ("converged", e.converged),
        ]
    if scheme is Scheme.HOMODYNE_DISPLACEMENT:
        e = estimate_homodyne(batch, known["squeeze_r"], em)
        return base + [
            ("alpha_re_hat", e.alpha_re_hat),
            ("prior_mean", e.fitted_prior_re.mean),
            ("prior_variance", e.fitted_prior_re.variance),
            ("posterior_variance", e.posterior_re.variance),
            ("converged", e.converged),
        ]
    if scheme is Scheme.POVM_SQUEEZING:
        e = estimate_povm_em(batch, known["alpha_abs"], em)
        return base + [
            ("r_hat", e.r_hat),
            ("prior_mean", e.fitted_prior.mean),
            ("prior_variance", e.fitted_prior.variance),
            ("posterior_variance", e.posterior.variance),
            ("converged", e.converged),
        ]
    if scheme is Scheme.HOMODYNE_SQUEEZING:
        e = estimate_ml_homodyne(batch, known["alpha_re"])
        return base + [("r_hat", e.r_hat)]
    e = estimate_phase(batch, known["alpha_abs"], eb)
    return base + [
        ("theta_hat", e.theta_hat),
        ("kappa0_re", e.fitted_kappa0.real),
        ("kappa0_im", e.fitted_kappa0.imag),
        ("kappa_p_re", e.kappa_p.real),
        ("kappa_p_im", e.kappa_p.imag),
        ("objective", e.objective_value),
    ]


_REQUIRED_KNOWN = {
    Scheme.HETERODYNE_DISPLACEMENT: "squeeze_r",
    Scheme.HOMODYNE_DISPLACEMENT: "squeeze_r",
    Scheme.POVM_SQUEEZING: "alpha_abs",
    Scheme.HOMODYNE_SQUEEZING: "alpha_re",
    Scheme.HETERODYNE_PHASE: "alpha_abs",
}


def cmd_estimate(scheme, data_file, known_params: dict, options: dict | None = None) -> int:
    options = options or {}
    try:
        scheme = Scheme(scheme)
    except ValueError:
        print(f"error: unknown scheme {scheme!r}; expected one of: {', '.join(s.value for s in Scheme)}", file=sys.stderr)
        return 2
    need = _REQUIRED_KNOWN[scheme]
    if known_params.get(need) is None:
        print(f"error: scheme {scheme.value} needs --{need.replace('_', '-')}", file=sys.stderr)
        return 2
    em = EmOptions(init_seed=options.get("seed", 0))
    eb = EbOptions(kappa_max=options.get("kappa_max", 1e3))
    try:
        batch = read_measurements(data_file, scheme)
        fields = estimate_fields(scheme, batch, known_params, em, eb)
    except DegenerateDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(_kv(fields))
    width = max(len(k) for k, _ in fields)
    for k, v in fields:
        print(f"  {k:<{width}}  {v}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gaussest", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("experiment", help="run a Monte Carlo sweep from a JSON config")
    e.add_argument("--config", required=True)
    e.add_argument("--out", help="output file (default: config output_path, else stdout)")
    e.add_argument("--format", choices=FORMATS)
    e.add_argument("--strict", action="store_true", help="exit 1 when the run is degraded")
    e.add_argument("--seed", type=int, help="override base_seed")
    e.add_argument("--trials", type=int, help="override trials")
    e.add_argument("--engine", choices=("batch", "trial"), default="batch")
    e.add_argument("--jobs", type=int, default=1)

    s = sub.add_parser("estimate", help="estimate from a measurement file")
    s.add_argument("--scheme", required=True, choices=[x.value for x in Scheme])
    s.add_argument("--data", required=True)
    s.add_argument("--squeeze-r", type=float)
    s.add_argument("--alpha-abs", type=float)
    s.add_argument("--alpha-re", type=float)
    s.add_argument("--seed", type=int, default=0, help="EM starting-point seed")
    s.add_argument("--kappa-max", type=float, default=1e3)

    t = sub.add_parser("selftest", help="run the quick invariant suite")
    t.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "experiment":
        try:
            cfg = parse_config(args.config)
        except OSError as exc:
            print(f"error: cannot read config {args.config}: {exc.strerror or exc}", file=sys.stderr)
            return 2
        except (ConfigError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        exp = cfg.experiment
        if args.seed is not None:
            exp = replace(exp, base_seed=args.seed)
        if args.trials is not None:
            exp = replace(exp, trials=args.trials)
        cfg = CliConfig(exp, args.out or cfg.output_path, args.format or cfg.format)
        return cmd_experiment(cfg, strict=args.strict, engine=args.engine, jobs=args.jobs)
    if args.command == "estimate":
        known = {"squeeze_r": args.squeeze_r, "alpha_abs": args.alpha_abs, "alpha_re": args.alpha_re}
        return cmd_estimate(args.scheme, args.data, known, {"seed": args.seed, "kappa_max": args.kappa_max})
    from .selftest import run_selftest

    return run_selftest(seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
