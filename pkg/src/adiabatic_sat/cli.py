"""Command-line front end.

    adiabatic-sat gen --problem ec3 --n 8 --count 5 --seed 42 --out instances/
    adiabatic-sat evolve --instance instances/EC3_n8_0000.json --T 10
    adiabatic-sat hunt --problem ec3 --n-range 7-9 --count 10 --seed 1 --out d/
    adiabatic-sat experiment --preset fig1 --seed 1 --out d/
    adiabatic-sat fit --model exponential --in d/fig1_summary.csv

Exit codes: 0 success, 2 configuration error, 3 generation failure,
4 accuracy / budget failure, 5 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .errors import (
    AccuracyError,
    AdiabaticSatError,
    BudgetError,
    GenerationError,
    HuntNotFoundError,
)
from .evolution import EvolutionConfig, evolve
from .experiments import (
    fit,
    fits_csv,
    hunt_time,
    hunts_csv,
    HuntRecord,
    HuntTable,
    median_time_experiment,
    read_fits,
    read_summary_points,
    summary_csv,
)
from .hamiltonian import build_degrees, build_problem, scramble
from .instances import PROBLEMS, Instance, generate_indexed
from .presets import PRESETS, get_preset, run_preset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GENERATION = 3
EXIT_ACCURACY = 4
EXIT_IO = 5

ENV_OUT = "ADIABATIC_SAT_OUT"
ENV_WORKERS = "ADIABATIC_SAT_WORKERS"
DEFAULT_CAP = 20

log = logging.getLogger("adiabatic_sat")


class ConfigError(Exception):
    pass


def _problem(name: str) -> str:
    lookup = {p.lower(): p for p in PROBLEMS}
    try:
        return lookup[name.lower()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}") from None


def parse_n_range(text: str) -> tuple:
    """'7-12', '7..12', '7,9,11' or '8'."""
    text = text.strip()
    try:
        for sep in ("..", "-"):
            if sep in text:
                lo, hi = text.split(sep)
                values = tuple(range(int(lo), int(hi) + 1))
                break
        else:
            values = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse n range {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty n range {text!r}")
    return values


def _check_range(n_values, cap):
    bad = [n for n in n_values if not 2 <= n <= cap]
    if bad:
        raise ConfigError(f"n values {bad} outside [2, {cap}]")


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(ENV_OUT, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    if ENV_WORKERS in os.environ:
        return int(os.environ[ENV_WORKERS])
    return os.cpu_count() or 1


def _evo_options(args) -> dict:
    opts = {}
    if getattr(args, "tol", None) is not None:
        opts["local_error_tol"] = args.tol
    if getattr(args, "drift_limit", None) is not None:
        opts["norm_drift_limit"] = args.drift_limit
    if getattr(args, "max_steps", None) is not None:
        opts["max_steps"] = args.max_steps
    return opts


def _load_instance(path) -> Instance:
    return Instance.from_json(Path(path).read_text())


def _write(out: Path, name: str, text: str) -> Path:
    path = out / name
    path.write_text(text)
    return path


def _report_failures(failures, total) -> int:
    for f in failures:
        print(f"excluded {f.problem} n={f.n} #{f.instance_index}: {f.reason}", file=sys.stderr)
    if failures:
        print(f"{len(failures)} of {total} instances excluded", file=sys.stderr)
    if total and len(failures) == total:
        if all(f.reason.startswith(GenerationError.__name__) for f in failures):
            return EXIT_GENERATION
        return EXIT_ACCURACY
    return EXIT_OK


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> int:
    _check_range([args.n], args.cap)
    out = _out_dir(args)
    for i in range(args.count):
        inst = generate_indexed(args.problem, args.n, args.seed, i, cap=args.cap)
        path = _write(out, f"{args.problem}_n{args.n}_{i:04d}.json", inst.to_json() + "\n")
        print(f"{path}\tclauses={inst.num_clauses}\tsatisfying={len(inst.satisfying)}")
    return EXIT_OK


def cmd_evolve(args) -> int:
    inst = _load_instance(args.instance)
    _check_range([inst.n], args.cap)
    diag = build_problem(inst)
    if args.scramble_seed is not None:
        diag = scramble(diag, args.scramble_seed)
    res = evolve(diag, build_degrees(inst), diag.ground_states(), EvolutionConfig(args.T, **_evo_options(args)))
    if args.dump_state:
        res.dump_state(args.dump_state)
    print(json.dumps(res.to_dict()))
    return EXIT_OK


def cmd_hunt(args) -> int:
    opts = _evo_options(args)
    if args.instance:
        inst = _load_instance(args.instance)
        _check_range([inst.n], args.cap)
        diag = build_problem(inst)
        scrambled = args.scramble_seed is not None
        if scrambled:
            diag = scramble(diag, args.scramble_seed)
        label = f"{inst.problem or ''}{'scram' if scrambled else ''}"
        res = hunt_time(diag, build_degrees(inst), diag.ground_states(), evo_options=opts)
        table = HuntTable(label, [HuntRecord(label, inst.n, 0, inst.seed or 0, res.T_found, res.probability_at_T,
                                             res.flag, res.probe_log, res.max_norm_drift)], [])
        text = hunts_csv(table)
        if args.out:
            _write(_out_dir(args), "hunts.csv", text)
        sys.stdout.write(text)
        return EXIT_OK
    if args.problem is None or args.n_range is None or args.seed is None:
        raise ConfigError("hunt needs --instance, or --problem, --n-range and --seed")
    _check_range(args.n_range, args.cap)
    table = median_time_experiment(args.problem, args.n_range, args.count, args.seed, scrambled=args.scrambled,
                                   evo_options=opts, workers=_workers(args))
    out = _out_dir(args)
    _write(out, "hunts.csv", hunts_csv(table))
    summary = summary_csv(table.summary())
    _write(out, "summary.csv", summary)
    sys.stdout.write(summary)
    return _report_failures(table.failures, len(args.n_range) * args.count)


def _pick_fit(fits, problem, model):
    for f in fits:
        if f.model == model and f.problem == problem:
            return f
    for f in fits:
        if f.model == model:
            return f
    if fits:
        return fits[0]
    raise ConfigError("fit file contains no fits")


def cmd_experiment(args) -> int:
    preset = get_preset(args.preset)
    n_values = args.n_range
    if n_values is not None:
        _check_range(n_values, args.cap)
    T_fit = None
    if args.fit is not None:
        if preset.kind != "sweep" or preset.T_source[0] != "fit":
            raise ConfigError(f"--fit does not apply to preset {preset.name}")
        source = PRESETS[preset.T_source[1]]
        label = f"{source.problem}{'scram' if source.scrambled else ''}"
        T_fit = _pick_fit(read_fits(Path(args.fit).read_text()), label, source.fit_models[0])
    run = run_preset(args.preset, args.seed, n_values=n_values, instances=args.count, full=args.full,
                     T_fit=T_fit, T_fixed=args.T, evo_options=_evo_options(args), workers=_workers(args))
    out = _out_dir(args)
    for name, text in run.files.items():
        _write(out, name, text)
        print(out / name)
    total = len(run.table.records) + len(run.table.failures)
    code = _report_failures(run.failures, total)
    if run.source is not None:
        src_total = len(run.source.table.records) + len(run.source.table.failures)
        code = code or _report_failures(run.source.failures, src_total)
    return code


def cmd_fit(args) -> int:
    points = read_summary_points(Path(args.input).read_text(), args.problem)
    problem = args.problem or ""
    if not problem:
        rows = list(csv.DictReader(io.StringIO(Path(args.input).read_text())))
        problems = {r["problem"] for r in rows}
        if len(problems) > 1:
            raise ConfigError(f"summary holds several problems {sorted(problems)}; pass --problem")
        problem = problems.pop() if problems else ""
    result = fit(args.model, points, problem=problem)
    text = fits_csv([result])
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _add_evo_flags(p):
    p.add_argument("--tol", type=float, help="per-step relative local error tolerance")
    p.add_argument("--drift-limit", type=float, help="maximum end-to-end squared-norm drift")
    p.add_argument("--max-steps", type=int, help="integrator step budget")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adiabatic-sat", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--cap", type=int, default=DEFAULT_CAP, help="largest allowed bit count")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate random instances as JSON files")
    p.add_argument("--problem", type=_problem, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("evolve", help="run one adiabatic evolution")
    p.add_argument("--instance", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--scramble-seed", type=int)
    p.add_argument("--dump-state", help="write the final state as interleaved little-endian float64")
    _add_evo_flags(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("hunt", help="find the time reaching success probability in [0.12, 0.13]")
    p.add_argument("--instance")
    p.add_argument("--scramble-seed", type=int)
    p.add_argument("--problem", type=_problem)
    p.add_argument("--n-range", type=parse_n_range)
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--seed", type=int)
    p.add_argument("--scrambled", action="store_true")
    p.add_argument("--out")
    p.add_argument("--workers", type=int)
    _add_evo_flags(p)
    p.set_defaults(func=cmd_hunt)

    p = sub.add_parser("experiment", help="run a figure preset")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("--n-range", type=parse_n_range)
    p.add_argument("--count", type=int)
    p.add_argument("--full", action="store_true", help="use the original, much longer n range")
    p.add_argument("--fit", help="fits CSV supplying T(n) instead of running the source hunt")
    p.add_argument("--T", type=float, help="override the run time with a constant")
    p.add_argument("--workers", type=int)
    _add_evo_flags(p)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("fit", help="least-squares fit of summary medians against n")
    p.add_argument("--model", choices=["linear", "quadratic", "exponential"], required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--problem")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except GenerationError as exc:
        print(f"generation failure: {exc}", file=sys.stderr)
        return EXIT_GENERATION
    except (AccuracyError, BudgetError, HuntNotFoundError) as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except (ConfigError, AdiabaticSatError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
