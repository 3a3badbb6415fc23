"""Named experiment presets, one per figure of the original study.

Instance counts, clause arity and the source of the run time follow the
figure captions.  ``n_values`` is the desk-scale default range;
``full_n_values`` is the range of the original runs (hours of CPU).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from .errors import FitError, InvalidParameterError
from .experiments import (
    FitResult,
    HuntTable,
    SweepTable,
    fit,
    fits_csv,
    hunts_csv,
    median_time_experiment,
    probability_sweep,
    summary_csv,
    sweeps_csv,
)


@dataclass(frozen=True)
class Preset:
    name: str
    kind: str  # "hunt" or "sweep"
    problem: str
    n_values: tuple
    full_n_values: tuple
    instances: int
    scrambled: bool = False
    fit_models: tuple = ()
    # sweeps: ("fit", hunt preset name) or ("fixed", T)
    T_source: tuple = ()
    stream: str = "sweep"


PRESETS = {
    p.name: p
    for p in [
        Preset("fig1", "hunt", "EC3", tuple(range(7, 13)), tuple(range(7, 16)), 50,
               fit_models=("quadratic", "linear", "exponential")),
        Preset("fig2", "hunt", "EC2", tuple(range(7, 13)), tuple(range(7, 16)), 50,
               fit_models=("linear", "quadratic", "exponential")),
        Preset("fig3", "hunt", "EC2", tuple(range(7, 13)), tuple(range(7, 13)), 100, scrambled=True,
               fit_models=("exponential", "quadratic")),
        Preset("fig4", "sweep", "EC3", tuple(range(7, 13)), tuple(range(7, 17)), 100, T_source=("fit", "fig1")),
        Preset("fig5", "sweep", "EC2", tuple(range(7, 13)), tuple(range(7, 16)), 100, T_source=("fit", "fig2")),
        Preset("fig6", "sweep", "EC3", tuple(range(7, 13)), tuple(range(7, 15)), 100, T_source=("fixed", 5.82)),
        Preset("fig7", "sweep", "EC3", tuple(range(7, 13)), tuple(range(7, 15)), 100, scrambled=True,
               T_source=("fit", "fig1")),
        Preset("fig8", "sweep", "EC3multi", tuple(range(10, 13)), tuple(range(10, 14)), 100,
               T_source=("fit", "fig1")),
    ]
}


@dataclass
class PresetRun:
    preset: Preset
    table: HuntTable | SweepTable
    fits: list = field(default_factory=list)
    T_of_n: Callable | None = None
    source: "PresetRun | None" = None
    files: dict = field(default_factory=dict)

    @property
    def failures(self):
        return self.table.failures

    @property
    def primary_fit(self) -> FitResult | None:
        if not self.preset.fit_models:
            return None
        return next((f for f in self.fits if f.model == self.preset.fit_models[0]), None)


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise InvalidParameterError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def hunt_fits(table: HuntTable, models) -> list:
    points = table.medians()
    out = []
    for model in models:
        try:
            out.append(fit(model, points, problem=table.problem))
        except FitError:
            pass
    return out


def run_preset(
    name: str,
    master_seed: int,
    n_values=None,
    instances: int | None = None,
    full: bool = False,
    T_fit: FitResult | None = None,
    T_fixed: float | None = None,
    evo_options: dict | None = None,
    workers: int = 1,
    source_instances: int | None = None,
) -> PresetRun:
    """Run one preset and render its CSV outputs into ``run.files``.

    Sweeps whose run time comes from a fit run the source hunt preset first
    unless ``T_fit`` is supplied.  The source hunt uses its own default range.
    """
    preset = get_preset(name)
    if n_values is None:
        n_values = preset.full_n_values if full else preset.n_values
    n_values = tuple(n_values)
    count = preset.instances if instances is None else int(instances)

    if preset.kind == "hunt":
        table = median_time_experiment(preset.problem, n_values, count, master_seed, scrambled=preset.scrambled,
                                       evo_options=evo_options, workers=workers)
        fits = hunt_fits(table, preset.fit_models)
        run = PresetRun(preset, table, fits)
        run.files = {
            f"{name}_hunts.csv": hunts_csv(table),
            f"{name}_summary.csv": summary_csv(table.summary()),
            f"{name}_fits.csv": fits_csv(fits),
        }
        return run

    source = None
    kind, value = preset.T_source
    if T_fixed is not None:
        T_of_n = lambda n: float(T_fixed)  # noqa: E731
    elif kind == "fixed":
        T_of_n = lambda n: float(value)  # noqa: E731
    elif T_fit is not None:
        T_of_n = T_fit
    else:
        source = run_preset(value, master_seed, full=full, instances=source_instances,
                            evo_options=evo_options, workers=workers)
        T_of_n = source.primary_fit
        if T_of_n is None:
            raise FitError(f"source preset {value} produced no usable {source.preset.fit_models[0]} fit")
    table = probability_sweep(preset.problem, n_values, T_of_n, count, master_seed, scrambled=preset.scrambled,
                              evo_options=evo_options, workers=workers, stream=preset.stream)
    run = PresetRun(preset, table, [], T_of_n, source)
    if source is not None:
        run.files.update(source.files)
    run.files[f"{name}_sweeps.csv"] = sweeps_csv(table)
    run.files[f"{name}_summary.csv"] = summary_csv(table.summary())
    return run
