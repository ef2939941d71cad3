"""Monte Carlo sweeps comparing learned-prior estimators with genie-aided baselines.

Each trial owns a random stream derived from ``(base_seed, task, M, trial)``,
so results do not depend on how trials are chunked or scheduled. Two engines
produce the same per-trial errors:

``"batch"``
    simulates every trial, then runs each estimator once over all trials
    with array kernels. Runtimes are the batch time divided by the number
    of trials.
``"trial"``
    calls the public single-batch estimators trial by trial and times every
    call individually (use this when runtimes matter).
"""
from __future__ import annotations

import contextlib
import csv
import enum
import hashlib
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from . import conjugate, squeezing
from ._validation import DomainError, check_count, check_positive, wrap_angle
from .conjugate import EmOptions, GaussianParams, LinearGaussianModel, draw_em_init, em_fit_many
from .displacement import estimate_heterodyne, estimate_homodyne, genie_estimate, quadrature_models
from .phase import EbOptions, VonMisesParam, estimate_phase, genie_phase_estimate, phase_estimates_from_sums
from .simulate import (
    ProbeConfig,
    RngStream,
    Scheme,
    hash_to_u64,
    povm_variance,
    sample_von_mises,
    simulate_displacement_heterodyne,
    simulate_displacement_homodyne,
    simulate_phase_heterodyne,
    simulate_squeezing_homodyne,
    simulate_squeezing_povm,
)

__all__ = [
    "Task",
    "ExperimentConfig",
    "TrialRecord",
    "SummaryRow",
    "ExperimentSummary",
    "CSV_HEADER",
    "estimator_names",
    "theoretical_genie_mse",
    "run_trial",
    "run_trials",
    "run_experiment",
    "write_summary_csv",
    "read_summary_csv",
    "write_plotdata",
]

CSV_HEADER = (
    "task",
    "m",
    "estimator",
    "metric",
    "metric_name",
    "metric_stderr",
    "theory",
    "mean_runtime_ns",
    "median_runtime_ns",
    "trials",
    "failed",
)

DEGRADED_FAILURE_FRACTION = 0.01


class Task(str, enum.Enum):
    DISPLACEMENT_HET = "displacement_het"
    DISPLACEMENT_HOM = "displacement_hom"
    SQUEEZING_POVM = "squeezing_povm"
    SQUEEZING_ML_HOM = "squeezing_ml_hom"
    SQUEEZING_BOTH = "squeezing_both"
    PHASE = "phase"


_ESTIMATORS = {
    Task.DISPLACEMENT_HET: ("em_re", "em_im", "genie_re", "genie_im"),
    Task.DISPLACEMENT_HOM: ("em", "genie"),
    Task.SQUEEZING_POVM: ("povm_em", "povm_genie"),
    Task.SQUEEZING_ML_HOM: ("homodyne_ml",),
    Task.SQUEEZING_BOTH: ("povm_em", "povm_genie", "homodyne_ml"),
    Task.PHASE: ("eb", "genie"),
}

_PRIOR_KEYS = {
    Task.DISPLACEMENT_HET: ("re", "im"),
    Task.DISPLACEMENT_HOM: ("re",),
    Task.SQUEEZING_POVM: ("r",),
    Task.SQUEEZING_ML_HOM: ("r",),
    Task.SQUEEZING_BOTH: ("r",),
    Task.PHASE: ("kappa",),
}


def estimator_names(task) -> tuple[str, ...]:
    return _ESTIMATORS[Task(task)]


@dataclass(frozen=True)
class ExperimentConfig:
    """One figure-style sweep.

    ``probe`` carries the known probe quantities: ``squeeze_r`` for the
    displacement tasks, ``alpha_re``/``alpha_im`` for squeezing and phase.
    ``true_prior`` maps ``"re"``/``"im"`` (displacement), ``"r"`` (squeezing)
    or ``"kappa"`` (phase) to the prior the truth is drawn from.
    """

    task: Task
    m_grid: tuple
    true_prior: Mapping
    probe: ProbeConfig = field(default_factory=ProbeConfig)
    trials: int = 10_000
    em_opts: EmOptions = field(default_factory=EmOptions)
    eb_opts: EbOptions = field(default_factory=EbOptions)
    base_seed: int = 0

    def __post_init__(self):
        task = Task(self.task)
        object.__setattr__(self, "task", task)
        grid = tuple(check_count(m, "m_grid entry") for m in self.m_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("m_grid must be strictly increasing")
        object.__setattr__(self, "m_grid", grid)
        check_count(self.trials, "trials")
        prior = dict(self.true_prior)
        for key in _PRIOR_KEYS[task]:
            if key not in prior:
                raise ValueError(f"task {task.value} needs true_prior[{key!r}]")
            want = VonMisesParam if key == "kappa" else GaussianParams
            if not isinstance(prior[key], want):
                raise TypeError(f"true_prior[{key!r}] must be a {want.__name__}")
        object.__setattr__(self, "true_prior", prior)
        if task in (Task.SQUEEZING_POVM, Task.SQUEEZING_BOTH, Task.PHASE) and self.alpha_abs <= 0:
            raise DomainError("the probe displacement must be non-zero for this task")

    @property
    def alpha_abs(self) -> float:
        return abs(self.probe.alpha)

    def trial_seed(self, m: int, trial_index: int) -> int:
        return hash_to_u64(int(self.base_seed), self.task.value, int(m), int(trial_index))


@dataclass
class TrialRecord:
    m: int
    trial_index: int
    errors: dict = field(default_factory=dict)
    runtimes_ns: dict = field(default_factory=dict)
    failed: bool = False
    message: str = ""
    batch_digest: str = ""


@dataclass
class SummaryRow:
    m: int
    estimator: str
    metric: float
    metric_name: str
    metric_stderr: float
    theory: float | None
    mean_runtime_ns: float
    median_runtime_ns: float
    trials: int
    failed: int


@dataclass
class ExperimentSummary:
    task: Task
    rows: list
    degraded: bool = False
    records: list = field(default_factory=list, repr=False)

    def row(self, m: int, estimator: str) -> SummaryRow:
        for r in self.rows:
            if r.m == m and r.estimator == estimator:
                return r
        raise KeyError((m, estimator))

    def paired_errors(self, m: int, estimator: str) -> np.ndarray:
        """Per-trial errors of one estimator at ``m`` (failed trials excluded), in trial order."""
        return np.array(
            [r.errors[estimator] for r in self.records if r.m == m and not r.failed], dtype=float
        )


def theoretical_genie_mse(task, true_prior_variance, noise_variance, gain_norm_sq) -> float:
    """Bayes risk of the genie posterior mean, i.e. its posterior variance."""
    task = Task(task)
    if task in (Task.SQUEEZING_ML_HOM, Task.PHASE):
        raise ValueError(f"no closed-form genie risk for task {task.value}")
    s0 = check_positive(true_prior_variance, "true_prior_variance")
    sn2 = check_positive(noise_variance, "noise_variance")
    gg = check_positive(gain_norm_sq, "gain_norm_sq")
    return 1.0 / (1.0 / s0 + gg / sn2)


def _theory(config: ExperimentConfig, m: int, estimator: str) -> float | None:
    task = config.task
    if task in (Task.DISPLACEMENT_HET, Task.DISPLACEMENT_HOM):
        models = quadrature_models(
            Scheme.HETERODYNE_DISPLACEMENT if task is Task.DISPLACEMENT_HET else Scheme.HOMODYNE_DISPLACEMENT,
            config.probe.squeeze_r,
        )
        key = "im" if estimator.endswith("_im") else "re"
        g, var = models[1 if key == "im" else 0]
        return theoretical_genie_mse(task, config.true_prior[key].variance, var, m * g * g)
    if estimator.startswith("povm"):
        return theoretical_genie_mse(task, config.true_prior["r"].variance, povm_variance(config.alpha_abs), m)
    return None


def _digest(*arrays) -> str:
    h = hashlib.sha1()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return h.hexdigest()


def _em_opts(config: ExperimentConfig, trial_seed: int) -> EmOptions:
    return replace(config.em_opts, init_seed=hash_to_u64(trial_seed, "em"))


# --- per-trial simulation shared by both engines ------------------------------------


@dataclass
class _Draw:
    truth: dict
    batches: dict
    em_opts: EmOptions


def _simulate(config: ExperimentConfig, m: int, trial_index: int) -> _Draw:
    seed = config.trial_seed(m, trial_index)
    truth_gen = RngStream(seed, 0).generator()
    task = config.task
    prior = config.true_prior
    if task is Task.DISPLACEMENT_HET:
        a_re = prior["re"].mean + math.sqrt(prior["re"].variance) * float(truth_gen.standard_normal())
        a_im = prior["im"].mean + math.sqrt(prior["im"].variance) * float(truth_gen.standard_normal())
        probe = ProbeConfig(a_re, a_im, config.probe.squeeze_r)
        truth = {"re": a_re, "im": a_im}
        batches = {"het": simulate_displacement_heterodyne(probe, m, RngStream(seed, 1))}
    elif task is Task.DISPLACEMENT_HOM:
        a_re = prior["re"].mean + math.sqrt(prior["re"].variance) * float(truth_gen.standard_normal())
        probe = ProbeConfig(a_re, 0.0, config.probe.squeeze_r)
        truth = {"re": a_re}
        batches = {"hom": simulate_displacement_homodyne(probe, m, RngStream(seed, 1))}
    elif task is Task.PHASE:
        theta = sample_von_mises(prior["kappa"].kappa, RngStream(seed, 0))
        truth = {"theta": theta}
        batches = {"phase": simulate_phase_heterodyne(config.alpha_abs, theta, m, RngStream(seed, 1))}
    else:
        r = prior["r"].mean + math.sqrt(prior["r"].variance) * float(truth_gen.standard_normal())
        truth = {"r": r}
        batches = {}
        if task in (Task.SQUEEZING_POVM, Task.SQUEEZING_BOTH):
            batches["povm"] = simulate_squeezing_povm(config.alpha_abs, r, m, RngStream(seed, 1))
        if task in (Task.SQUEEZING_ML_HOM, Task.SQUEEZING_BOTH):
            batches["hom"] = simulate_squeezing_homodyne(config.probe.alpha_re, r, m, RngStream(seed, 2))
    return _Draw(truth, batches, _em_opts(config, seed))


def _batch_digest(draw: _Draw) -> str:
    arrays = []
    for key in sorted(draw.batches):
        arrays += [draw.batches[key].samples_re, draw.batches[key].samples_im]
    return _digest(*arrays)


# --- trial engine -------------------------------------------------------------------


def _timed(fn, *args):
    start = time.perf_counter_ns()
    out = fn(*args)
    return out, time.perf_counter_ns() - start


def run_trial(config: ExperimentConfig, m: int, trial_index: int) -> TrialRecord:
    """One Monte Carlo repetition: draw the truth, simulate, run every estimator on the same batch."""
    if m not in config.m_grid:
        raise ValueError(f"m={m} is not in the configured m_grid")
    rec = TrialRecord(m, trial_index)
    try:
        draw = _simulate(config, m, trial_index)
        rec.batch_digest = _batch_digest(draw)
        task, prior, truth = config.task, config.true_prior, draw.truth
        err, rt = rec.errors, rec.runtimes_ns
        if task is Task.DISPLACEMENT_HET:
            b, r = draw.batches["het"], config.probe.squeeze_r
            est, rt["em_re"] = _timed(estimate_heterodyne, b, r, draw.em_opts)
            rt["em_im"] = rt["em_re"]
            gen, rt["genie_re"] = _timed(genie_estimate, b, r, prior["re"], prior["im"])
            rt["genie_im"] = rt["genie_re"]
            err["em_re"] = (est.alpha_re_hat - truth["re"]) ** 2
            err["em_im"] = (est.alpha_im_hat - truth["im"]) ** 2
            err["genie_re"] = (gen.alpha_re_hat - truth["re"]) ** 2
            err["genie_im"] = (gen.alpha_im_hat - truth["im"]) ** 2
        elif task is Task.DISPLACEMENT_HOM:
            b, r = draw.batches["hom"], config.probe.squeeze_r
            est, rt["em"] = _timed(estimate_homodyne, b, r, draw.em_opts)
            gen, rt["genie"] = _timed(genie_estimate, b, r, prior["re"])
            err["em"] = (est.alpha_re_hat - truth["re"]) ** 2
            err["genie"] = (gen.alpha_re_hat - truth["re"]) ** 2
        elif task is Task.PHASE:
            b, kappa0 = draw.batches["phase"], prior["kappa"].kappa
            est, rt["eb"] = _timed(estimate_phase, b, config.alpha_abs, config.eb_opts)
            gen, rt["genie"] = _timed(genie_phase_estimate, b, config.alpha_abs, kappa0)
            err["eb"] = math.sin(truth["theta"] - est.theta_hat) ** 2
            err["genie"] = math.sin(truth["theta"] - gen.theta_hat) ** 2
        else:
            if "povm" in draw.batches:
                b = draw.batches["povm"]
                est, rt["povm_em"] = _timed(squeezing.estimate_povm_em, b, config.alpha_abs, draw.em_opts)
                gen, rt["povm_genie"] = _timed(squeezing.genie_povm_estimate, b, config.alpha_abs, prior["r"])
                err["povm_em"] = (est.r_hat - truth["r"]) ** 2
                err["povm_genie"] = (gen.r_hat - truth["r"]) ** 2
            if "hom" in draw.batches:
                est, rt["homodyne_ml"] = _timed(
                    squeezing.estimate_ml_homodyne, draw.batches["hom"], config.probe.alpha_re
                )
                err["homodyne_ml"] = (est.r_hat - truth["r"]) ** 2
    except (ValueError, FloatingPointError, ArithmeticError) as exc:
        rec.failed = True
        rec.message = f"{type(exc).__name__}: {exc}"
        rec.errors, rec.runtimes_ns = {}, {}
    return rec


# --- batch engine -------------------------------------------------------------------


def _em_stats(batch, values, gain, noise_variance):
    st = conjugate._stats(LinearGaussianModel.constant(batch.count, gain, noise_variance), values)
    return st.gg, st.gy, st.rss0


def _run_em(items, opts_list, stream_id):
    """items: list of (m, gg, gy, rss0, sn2). Runs em_fit_many with each trial's own start."""
    m, gg, gy, rss0, sn2 = (np.array(col, dtype=float) for col in zip(*items))
    inits = [draw_em_init(RngStream(o.init_seed, stream_id), o.variance_floor) for o in opts_list]
    mu0 = np.array([i[0] for i in inits])
    s0 = np.array([i[1] for i in inits])
    return em_fit_many(m, gg, gy, rss0, sn2, mu0, s0, opts_list[0])


def run_trials(config: ExperimentConfig, m: int, trial_indices) -> list[TrialRecord]:
    """Batch engine for a set of trials at one ``M``; errors match :func:`run_trial`."""
    if m not in config.m_grid:
        raise ValueError(f"m={m} is not in the configured m_grid")
    recs, draws = [], []
    for i in trial_indices:
        rec = TrialRecord(m, int(i))
        try:
            draw = _simulate(config, m, int(i))
            rec.batch_digest = _batch_digest(draw)
            draws.append((rec, draw))
        except (ValueError, ArithmeticError) as exc:
            rec.failed, rec.message = True, f"{type(exc).__name__}: {exc}"
        recs.append(rec)
    if not draws:
        return recs
    task, prior = config.task, config.true_prior

    def record(name, values, elapsed):
        per = elapsed // len(ok)
        for (rec, _), v in zip(ok, values):
            rec.errors[name] = float(v)
            rec.runtimes_ns[name] = per

    ok = draws
    if task in (Task.DISPLACEMENT_HET, Task.DISPLACEMENT_HOM):
        scheme = Scheme.HETERODYNE_DISPLACEMENT if task is Task.DISPLACEMENT_HET else Scheme.HOMODYNE_DISPLACEMENT
        key = "het" if task is Task.DISPLACEMENT_HET else "hom"
        models = quadrature_models(scheme, config.probe.squeeze_r)
        parts = [("re", "samples_re", 0)] + ([("im", "samples_im", 1)] if len(models) == 2 else [])
        names = {"re": ("em_re", "genie_re"), "im": ("em_im", "genie_im")}
        if task is Task.DISPLACEMENT_HOM:
            names = {"re": ("em", "genie")}
        em_time = genie_time = 0
        results = {}
        for (part, attr, sid), (g, var) in zip(parts, models):
            items = [
                (d.batches[key].count, *_em_stats(d.batches[key], getattr(d.batches[key], attr), g, var), var)
                for _, d in ok
            ]
            truth = np.array([d.truth[part] for _, d in ok])
            t0 = time.perf_counter_ns()
            fit = _run_em(items, [d.em_opts for _, d in ok], sid)
            t1 = time.perf_counter_ns()
            _, gg, gy, _, sn2 = (np.array(c, dtype=float) for c in zip(*items))
            genie_mean, _ = conjugate._posterior(prior[part].mean, prior[part].variance, gg, gy, sn2)
            t2 = time.perf_counter_ns()
            em_time += t1 - t0
            genie_time += t2 - t1
            results[part] = ((fit.posterior_mean - truth) ** 2, (genie_mean - truth) ** 2)
        for part, (em_err, genie_err) in results.items():
            record(names[part][0], em_err, em_time)
            record(names[part][1], genie_err, genie_time)
    elif task is Task.PHASE:
        a = config.alpha_abs
        c = np.array([2.0 * a * complex(d.batches["phase"].samples_re.sum(), -d.batches["phase"].samples_im.sum()) for _, d in draws])
        bad = np.abs(c) == 0
        for (rec, _), b in zip(draws, bad):
            if b:
                rec.failed, rec.message = True, "DegenerateDataError: degenerate measurement sum"
        ok = [pair for pair, b in zip(draws, bad) if not b]
        c = c[~bad]
        if ok:
            theta = np.array([d.truth["theta"] for _, d in ok])
            t0 = time.perf_counter_ns()
            th_eb, _, _, _ = phase_estimates_from_sums(c, config.eb_opts)
            t1 = time.perf_counter_ns()
            kp = prior["kappa"].kappa + c
            th_genie = wrap_angle(np.arctan2(kp.imag, kp.real))
            t2 = time.perf_counter_ns()
            record("eb", np.sin(theta - th_eb) ** 2, t1 - t0)
            record("genie", np.sin(theta - th_genie) ** 2, t2 - t1)
    else:
        truth = np.array([d.truth["r"] for _, d in draws])
        if task in (Task.SQUEEZING_POVM, Task.SQUEEZING_BOTH):
            var = povm_variance(config.alpha_abs)
            items = [(d.batches["povm"].count, *_em_stats(d.batches["povm"], d.batches["povm"].samples_re, 1.0, var), var) for _, d in draws]
            t0 = time.perf_counter_ns()
            fit = _run_em(items, [d.em_opts for _, d in draws], 0)
            t1 = time.perf_counter_ns()
            _, gg, gy, _, sn2 = (np.array(col, dtype=float) for col in zip(*items))
            genie_mean, _ = conjugate._posterior(prior["r"].mean, prior["r"].variance, gg, gy, sn2)
            t2 = time.perf_counter_ns()
            record("povm_em", (fit.posterior_mean - truth) ** 2, t1 - t0)
            record("povm_genie", (genie_mean - truth) ** 2, t2 - t1)
        if task in (Task.SQUEEZING_ML_HOM, Task.SQUEEZING_BOTH):
            q1 = np.array([float(d.batches["hom"].samples_re.sum()) for _, d in draws])
            q2 = np.array([float(d.batches["hom"].samples_re @ d.batches["hom"].samples_re) for _, d in draws])
            bad = q2 <= 0
            t0 = time.perf_counter_ns()
            r_hat = squeezing.ml_homodyne_closed_form(m, q1, q2, config.probe.alpha_re)
            t1 = time.perf_counter_ns()
            record("homodyne_ml", (r_hat - truth) ** 2, t1 - t0)
            for (rec, _), b in zip(draws, bad):
                if b:
                    rec.failed, rec.message = True, "DegenerateDataError: all homodyne samples are zero"
    for rec in recs:
        if rec.failed:
            rec.errors, rec.runtimes_ns = {}, {}
    return recs


def _chunk_worker(args):
    config, engine, m, indices = args
    if engine == "trial":
        return [run_trial(config, m, i) for i in indices]
    return run_trials(config, m, indices)


def _aggregate(config: ExperimentConfig, records: list[TrialRecord]) -> ExperimentSummary:
    metric_name = "sin2" if config.task is Task.PHASE else "mse"
    rows, degraded = [], False
    for m in config.m_grid:
        at_m = [r for r in records if r.m == m]
        good = [r for r in at_m if not r.failed]
        failed = len(at_m) - len(good)
        if at_m and failed > DEGRADED_FAILURE_FRACTION * len(at_m):
            degraded = True
        for name in sorted(estimator_names(config.task)):
            errs = np.array([r.errors[name] for r in good], dtype=float)
            rts = np.array([r.runtimes_ns[name] for r in good], dtype=float)
            n = errs.size
            rows.append(
                SummaryRow(
                    m=m,
                    estimator=name,
                    metric=float(errs.mean()) if n else float("nan"),
                    metric_name=metric_name,
                    metric_stderr=float(errs.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                    theory=_theory(config, m, name),
                    mean_runtime_ns=float(rts.mean()) if n else float("nan"),
                    median_runtime_ns=float(np.median(rts)) if n else float("nan"),
                    trials=n,
                    failed=failed,
                )
            )
    return ExperimentSummary(config.task, rows, degraded, records)


def run_experiment(
    config: ExperimentConfig,
    engine: str = "batch",
    chunk_size: int | None = None,
    n_jobs: int = 1,
) -> ExperimentSummary:
    """Run ``config.trials`` repetitions at every ``M`` and aggregate per estimator.

    The result is identical for any ``chunk_size`` and ``n_jobs``: records
    are reduced in ``(M, trial_index)`` order.
    """
    if engine not in ("batch", "trial"):
        raise ValueError("engine must be 'batch' or 'trial'")
    size = chunk_size or config.trials
    jobs = [
        (config, engine, m, range(start, min(start + size, config.trials)))
        for m in config.m_grid
        for start in range(0, config.trials, size)
    ]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(_chunk_worker, jobs))
    else:
        parts = [_chunk_worker(j) for j in jobs]
    records = sorted((r for part in parts for r in part), key=lambda r: (r.m, r.trial_index))
    return _aggregate(config, records)


# --- output ------------------------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".12g")


def _sorted_rows(summary: ExperimentSummary):
    return sorted(summary.rows, key=lambda r: (r.m, r.estimator))


@contextlib.contextmanager
def _text_sink(target, newline=None):
    if hasattr(target, "write"):
        yield target
    else:
        with open(target, "w", newline=newline) as fh:
            yield fh


def write_summary_csv(summary: ExperimentSummary, path) -> None:
    """One row per ``(M, estimator)``, ``M`` then estimator name ascending, floats at 12 significant digits.

    ``path`` may also be an open text stream.
    """
    try:
        with _text_sink(path, newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for r in _sorted_rows(summary):
                w.writerow(
                    [
                        summary.task.value,
                        r.m,
                        r.estimator,
                        _fmt(r.metric),
                        r.metric_name,
                        _fmt(r.metric_stderr),
                        _fmt(r.theory),
                        _fmt(r.mean_runtime_ns),
                        _fmt(r.median_runtime_ns),
                        r.trials,
                        r.failed,
                    ]
                )
    except OSError as exc:
        raise OSError(f"cannot write summary to {path}: {exc.strerror or exc}") from exc


def read_summary_csv(path) -> ExperimentSummary:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows, task = [], None
        for rec in reader:
            task = rec[0]
            rows.append(
                SummaryRow(
                    m=int(rec[1]),
                    estimator=rec[2],
                    metric=float(rec[3]),
                    metric_name=rec[4],
                    metric_stderr=float(rec[5]),
                    theory=float(rec[6]) if rec[6] else None,
                    mean_runtime_ns=float(rec[7]),
                    median_runtime_ns=float(rec[8]),
                    trials=int(rec[9]),
                    failed=int(rec[10]),
                )
            )
    return ExperimentSummary(Task(task) if task else None, rows)


def write_plotdata(summary: ExperimentSummary, path) -> None:
    """Whitespace-separated blocks, one per estimator, separated by two blank lines."""
    by_est: dict[str, list[SummaryRow]] = {}
    for r in _sorted_rows(summary):
        by_est.setdefault(r.estimator, []).append(r)
    try:
        with _text_sink(path) as fh:
            for i, (name, rows) in enumerate(sorted(by_est.items())):
                if i:
                    fh.write("\n\n")
                fh.write(f"# task={summary.task.value} estimator={name}\n")
                fh.write(f"# m {rows[0].metric_name} stderr theory median_runtime_ns\n")
                for r in rows:
                    theory = _fmt(r.theory) if r.theory is not None else "nan"
                    fh.write(f"{r.m} {_fmt(r.metric)} {_fmt(r.metric_stderr)} {theory} {_fmt(r.median_runtime_ns)}\n")
    except OSError as exc:
        raise OSError(f"cannot write plot data to {path}: {exc.strerror or exc}") from exc
