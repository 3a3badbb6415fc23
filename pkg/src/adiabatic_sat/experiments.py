"""Experimental protocols: time hunts, probability sweeps, scrambled controls, fits.

Every per-instance task derives its own seed from ``(master_seed, problem, n,
index, stream)``, so tasks can run in any order or in parallel and results are
sorted by ``(n, instance_index)`` before aggregation.
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import AdiabaticSatError, FitError, HuntNotFoundError, InvalidParameterError
from .evolution import EvolutionConfig, evolve
from .hamiltonian import BitDegrees, DiagonalProblem, build_degrees, build_problem, scramble
from .instances import Instance, derive_seed, generate

log = logging.getLogger(__name__)

WINDOW = (0.12, 0.13)
HUNT_T_START = 1.0
HUNT_T_CAP = 2.0**14
HUNT_REL_WIDTH = 1e-3

IN_WINDOW = "in-window"
BRACKET_JUMP = "bracket-jump"


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".10g")


# ---------------------------------------------------------------- fits


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of y against n.

    ``coefficients`` are polynomial coefficients in increasing degree for the
    linear and quadratic models, and ``(a, b)`` for ``a * b**n``.  ``rss`` is
    always measured on y itself so models can be compared directly; see
    :meth:`rss_log` for the log-space residual.
    """

    model: str
    coefficients: tuple[float, ...]
    rss: float
    problem: str = ""

    def __call__(self, n):
        n = np.asarray(n, dtype=float)
        if self.model == "exponential":
            a, b = self.coefficients
            out = a * b**n
        else:
            out = sum(c * n**k for k, c in enumerate(self.coefficients))
        return float(out) if out.ndim == 0 else out

    def rss_log(self, points) -> float:
        ns, ys = _split(points)
        pred = np.asarray(self(ns), dtype=float)
        if np.any(pred <= 0):
            return math.inf
        return float(np.sum((np.log(ys) - np.log(pred)) ** 2))


MODELS = {"linear": 1, "quadratic": 2, "exponential": 1}


def _split(points):
    pts = list(points)
    ns = np.array([p[0] for p in pts], dtype=float)
    ys = np.array([p[1] for p in pts], dtype=float)
    return ns, ys


def fit(model: str, points, problem: str = "") -> FitResult:
    """Ordinary least squares; the exponential model is fit as log y = log a + n log b."""
    if model not in MODELS:
        raise FitError(f"unknown model {model!r}; choose from {sorted(MODELS)}")
    ns, ys = _split(points)
    degree = MODELS[model]
    if ns.size < degree + 2:
        raise FitError(f"{model} fit needs at least {degree + 2} points, got {ns.size}")
    target = ys
    if model == "exponential":
        if np.any(ys <= 0):
            raise FitError("exponential fit needs y > 0")
        target = np.log(ys)
    design = np.vander(ns, degree + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
    if rank < degree + 1:
        raise FitError("degenerate design: not enough distinct n values")
    if model == "exponential":
        coef = np.exp(coef)
    result = FitResult(model, tuple(float(c) for c in coef), 0.0, problem)
    rss = float(np.sum((ys - np.asarray(result(ns))) ** 2))
    return FitResult(model, result.coefficients, rss, problem)


def log_linear_slope(points) -> float:
    """Slope of log y against n by least squares."""
    ns, ys = _split(points)
    if np.any(ys <= 0):
        raise FitError("log-linear slope needs y > 0")
    return float(np.polyfit(ns, np.log(ys), 1)[0])


# ---------------------------------------------------------------- hunts


@dataclass
class TimeHuntResult:
    instance_id: str
    T_found: float
    probability_at_T: float
    flag: str
    probe_log: list = field(default_factory=list)
    max_norm_drift: float = 0.0


def hunt_time(
    diag: DiagonalProblem,
    deg: BitDegrees,
    satisfying: Sequence[int],
    window: tuple[float, float] = WINDOW,
    evo_options: dict | None = None,
    instance_id: str = "",
    t_start: float = HUNT_T_START,
    t_cap: float = HUNT_T_CAP,
    rel_width: float = HUNT_REL_WIDTH,
    probability: Callable[[float], float] | None = None,
) -> TimeHuntResult:
    """Find a run time whose success probability lands in ``window``.

    Doubling from ``t_start`` brackets the first crossing of the lower edge,
    then bisection on P(T) >= lower narrows it.  If the window is stepped over
    inside a bracket narrower than ``rel_width * T`` the smallest probed time
    with P >= lower is returned with the bracket-jump flag.

    ``probability`` replaces the evolution, for testing the search alone.
    """
    lo, hi = window
    if not (0.0 < lo < hi < 1.0):
        raise InvalidParameterError(f"window must satisfy 0 < lower < upper < 1, got {window}")
    evo_options = dict(evo_options or {})
    drift = [0.0]
    if probability is None:
        def probability(T):
            res = evolve(diag, deg, satisfying, EvolutionConfig(T, **evo_options))
            drift[0] = max(drift[0], res.final_norm_drift)
            return res.success_probability

    probes = []

    def run(T):
        p = probability(T)
        probes.append((float(T), float(p)))
        return p

    def done(T, p, flag):
        return TimeHuntResult(instance_id, T, p, flag, probes, drift[0])

    T = float(t_start)
    while True:
        p = run(T)
        if p >= lo:
            break
        if T >= t_cap:
            raise HuntNotFoundError(f"P(T={T:g}) = {p:.4g} still below {lo} at the doubling cap", probes)
        T *= 2.0
    if p <= hi:
        return done(T, p, IN_WINDOW)

    b, p_b = T, p
    if T > t_start:
        a = T / 2.0
    else:
        a = 0.0
        p0 = run(0.0)
        if p0 >= lo:
            return done(0.0, p0, IN_WINDOW if p0 <= hi else BRACKET_JUMP)
    while b - a >= rel_width * b:
        m = 0.5 * (a + b)
        p = run(m)
        if lo <= p <= hi:
            return done(m, p, IN_WINDOW)
        if p >= lo:
            b, p_b = m, p
        else:
            a = m
    return done(b, p_b, BRACKET_JUMP)


# ---------------------------------------------------------------- shared machinery


def problem_label(problem: str, scrambled: bool) -> str:
    return f"{problem}scram" if scrambled else problem


def degrees_checksum(deg: BitDegrees) -> str:
    return hashlib.sha256(np.ascontiguousarray(deg.degrees, dtype="<i8").tobytes()).hexdigest()[:16]


def _prepare(problem, n, master_seed, index, stream, scrambled, identity_scramble=False):
    seed = derive_seed(master_seed, problem, n, index, stream)
    inst = generate(problem, n, seed)
    diag = build_problem(inst)
    if scrambled:
        if identity_scramble:
            diag = scramble(diag, None, permutation=np.arange(1 << n))
        else:
            diag = scramble(diag, derive_seed(master_seed, problem, n, index, stream + "/scramble"))
    return inst, diag, build_degrees(inst)


def _map(func, tasks, workers: int):
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [func(t) for t in tasks]


def order_statistics(values) -> dict:
    """count, median, 10th-lowest and lowest of ``values``."""
    v = sorted(float(x) for x in values)
    if not v:
        return {"count": 0, "median": math.nan, "p10th_lowest": math.nan, "lowest": math.nan}
    return {
        "count": len(v),
        "median": float(np.median(v)),
        "p10th_lowest": v[9] if len(v) >= 10 else math.nan,
        "lowest": v[0],
    }


@dataclass
class Failure:
    problem: str
    n: int
    instance_index: int
    seed: int
    reason: str


# ---------------------------------------------------------------- median-time experiment


@dataclass
class HuntRecord:
    problem: str
    n: int
    instance_index: int
    seed: int
    T_found: float
    probability: float
    flag: str
    probes: list
    max_norm_drift: float = 0.0


@dataclass
class HuntTable:
    problem: str
    records: list
    failures: list

    def by_n(self) -> dict:
        out = {}
        for r in self.records:
            out.setdefault(r.n, []).append(r.T_found)
        return out

    def summary(self) -> list:
        rows = []
        for n, ts in sorted(self.by_n().items()):
            rows.append({"problem": self.problem, "n": n, **order_statistics(ts)})
        return rows

    def medians(self) -> list:
        return [(row["n"], row["median"]) for row in self.summary()]


def _hunt_task(args):
    problem, n, master_seed, index, stream, scrambled, window, evo_options = args
    seed = derive_seed(master_seed, problem, n, index, stream)
    label = problem_label(problem, scrambled)
    try:
        inst, diag, deg = _prepare(problem, n, master_seed, index, stream, scrambled)
        res = hunt_time(diag, deg, diag.ground_states(), window, evo_options, instance_id=f"{label}/{n}/{index}")
    except AdiabaticSatError as exc:
        return Failure(label, n, index, seed, f"{type(exc).__name__}: {exc}")
    return HuntRecord(label, n, index, seed, res.T_found, res.probability_at_T, res.flag, res.probe_log,
                      res.max_norm_drift)


def median_time_experiment(
    problem: str,
    n_values: Iterable[int],
    instances_per_n: int,
    master_seed: int,
    scrambled: bool = False,
    window: tuple[float, float] = WINDOW,
    evo_options: dict | None = None,
    workers: int = 1,
    stream: str = "hunt",
) -> HuntTable:
    if instances_per_n < 1:
        raise InvalidParameterError("instances_per_n must be >= 1")
    tasks = [
        (problem, n, master_seed, i, stream, scrambled, window, dict(evo_options or {}))
        for n in n_values
        for i in range(instances_per_n)
    ]
    out = _map(_hunt_task, tasks, workers)
    records = sorted((r for r in out if isinstance(r, HuntRecord)), key=lambda r: (r.n, r.instance_index))
    failures = sorted((r for r in out if isinstance(r, Failure)), key=lambda r: (r.n, r.instance_index))
    for f in failures:
        log.warning("excluded %s n=%d #%d: %s", f.problem, f.n, f.instance_index, f.reason)
    return HuntTable(problem_label(problem, scrambled), records, failures)


# ---------------------------------------------------------------- sweeps


@dataclass
class SweepRecord:
    problem: str
    n: int
    instance_index: int
    seed: int
    T_used: float
    probability: float
    degrees_checksum: str = ""
    norm_drift: float = 0.0


@dataclass
class SweepTable:
    problem: str
    records: list
    failures: list

    def by_n(self) -> dict:
        out = {}
        for r in self.records:
            out.setdefault(r.n, []).append(r.probability)
        return out

    def summary(self) -> list:
        return [{"problem": self.problem, "n": n, **order_statistics(ps)} for n, ps in sorted(self.by_n().items())]

    def medians(self) -> list:
        return [(row["n"], row["median"]) for row in self.summary()]


def _sweep_task(args):
    problem, n, master_seed, index, stream, scrambled, T, evo_options, identity = args
    seed = derive_seed(master_seed, problem, n, index, stream)
    label = problem_label(problem, scrambled)
    try:
        inst, diag, deg = _prepare(problem, n, master_seed, index, stream, scrambled, identity)
        res = evolve(diag, deg, diag.ground_states(), EvolutionConfig(T, **evo_options))
    except AdiabaticSatError as exc:
        return Failure(label, n, index, seed, f"{type(exc).__name__}: {exc}")
    return SweepRecord(label, n, index, seed, T, res.success_probability, degrees_checksum(deg),
                       res.final_norm_drift)


def probability_sweep(
    problem: str,
    n_values: Iterable[int],
    T_of_n: Callable[[int], float],
    instances_per_n: int = 100,
    master_seed: int = 0,
    scrambled: bool = False,
    evo_options: dict | None = None,
    workers: int = 1,
    stream: str = "sweep",
    identity_scramble: bool = False,
) -> SweepTable:
    """Evolve fresh instances once each at T(n) and collect success probabilities.

    ``stream`` must differ from the one used for the hunts that produced
    ``T_of_n`` so that the instances are new.
    """
    if instances_per_n < 1:
        raise InvalidParameterError("instances_per_n must be >= 1")
    tasks = []
    for n in n_values:
        T = float(T_of_n(n))
        if not T > 0:
            raise InvalidParameterError(f"T(n={n}) = {T} is not positive")
        for i in range(instances_per_n):
            tasks.append((problem, n, master_seed, i, stream, scrambled, T, dict(evo_options or {}), identity_scramble))
    out = _map(_sweep_task, tasks, workers)
    records = sorted((r for r in out if isinstance(r, SweepRecord)), key=lambda r: (r.n, r.instance_index))
    failures = sorted((r for r in out if isinstance(r, Failure)), key=lambda r: (r.n, r.instance_index))
    for f in failures:
        log.warning("excluded %s n=%d #%d: %s", f.problem, f.n, f.instance_index, f.reason)
    return SweepTable(problem_label(problem, scrambled), records, failures)


def fixed_time_sweep(problem, n_values, T_fixed, instances_per_n=100, master_seed=0, **kwargs) -> SweepTable:
    if not T_fixed > 0:
        raise InvalidParameterError("T_fixed must be positive")
    return probability_sweep(problem, n_values, lambda n: T_fixed, instances_per_n, master_seed, **kwargs)


def scrambled_sweep(problem, n_values, T_of_n, instances_per_n=100, master_seed=0, **kwargs) -> SweepTable:
    """Same instances and code path as :func:`probability_sweep`, scrambled diagonal."""
    return probability_sweep(problem, n_values, T_of_n, instances_per_n, master_seed, scrambled=True, **kwargs)


# ---------------------------------------------------------------- CSV


HUNT_FIELDS = ["problem", "n", "instance_index", "seed", "T_found", "probability", "flag", "probes"]
SWEEP_FIELDS = ["problem", "n", "instance_index", "seed", "T_used", "probability"]
SUMMARY_FIELDS = ["problem", "n", "count", "median", "p10th_lowest", "lowest"]
FIT_FIELDS = ["problem", "model", "c0", "c1", "c2", "rss"]


def _csv(fields, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def hunts_csv(table: HuntTable) -> str:
    rows = []
    for r in table.records:
        probes = ";".join(f"{fmt(t)}:{fmt(p)}" for t, p in r.probes)
        rows.append([r.problem, r.n, r.instance_index, r.seed, fmt(r.T_found), fmt(r.probability), r.flag, probes])
    return _csv(HUNT_FIELDS, rows)


def sweeps_csv(table: SweepTable) -> str:
    rows = [[r.problem, r.n, r.instance_index, r.seed, fmt(r.T_used), fmt(r.probability)] for r in table.records]
    return _csv(SWEEP_FIELDS, rows)


def summary_csv(summary_rows) -> str:
    rows = [[row["problem"], row["n"], row["count"], fmt(row["median"]), fmt(row["p10th_lowest"]), fmt(row["lowest"])]
            for row in summary_rows]
    return _csv(SUMMARY_FIELDS, rows)


def fits_csv(fits: Sequence[FitResult]) -> str:
    rows = []
    for f in fits:
        c = list(f.coefficients) + [None] * (3 - len(f.coefficients))
        rows.append([f.problem, f.model, fmt(c[0]), fmt(c[1]), fmt(c[2]), fmt(f.rss)])
    return _csv(FIT_FIELDS, rows)


def read_summary_points(text: str, problem: str | None = None) -> list:
    points = []
    for row in csv.DictReader(io.StringIO(text)):
        if problem and row["problem"] != problem:
            continue
        if row["median"]:
            points.append((int(row["n"]), float(row["median"])))
    return points


def read_fits(text: str) -> list:
    fits = []
    for row in csv.DictReader(io.StringIO(text)):
        keys = ("c0", "c1") if row["model"] in ("linear", "exponential") else ("c0", "c1", "c2")
        coef = tuple(float(row[k]) for k in keys)
        fits.append(FitResult(row["model"], coef, float(row["rss"]) if row["rss"] else math.nan, row["problem"]))
    return fits
