"""Replication engine for empirical size and power tables.

Each replication derives its own random stream from (master_seed, "rep", r),
so a report is a pure function of its config and never depends on the number
of worker threads. The coefficient matrix of a temporal model is drawn once
per experiment from the (master_seed, "coeff") stream and held fixed across
replications.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dgp import (
    CovarianceSpec,
    ModelKind,
    ModelSpec,
    ScenarioSpec,
    build_covariance,
    derive_rng,
    gen_series,
    resolve_coeff,
)
from .errors import InvalidSpecError, McRunError
from .stats_tests import TEST_NAMES, evaluate_tests_collect

__all__ = [
    "McCell",
    "McConfig",
    "McReport",
    "McTable",
    "power_table",
    "run_experiment",
    "size_table",
    "tabulate_reports",
]

#: Replications may error (degenerate data) up to this fraction per cell.
ERROR_BUDGET = 0.01


@dataclass(frozen=True, eq=False)
class McConfig:
    """One experiment cell: a data-generating setup crossed with tests and lags."""

    tests: tuple[str, ...]
    scenario: ScenarioSpec
    model: ModelSpec
    cov: CovarianceSpec
    n: int
    p: int
    H_values: tuple[int, ...]
    reps: int
    master_seed: int = 0
    alpha: float = 0.05
    threads: int | None = None
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tests", tuple(self.tests))
        object.__setattr__(self, "H_values", tuple(int(h) for h in self.H_values))
        if not self.tests:
            raise InvalidSpecError("tests must not be empty")
        for name in self.tests:
            if name not in TEST_NAMES:
                raise InvalidSpecError(f"unknown test {name!r}; expected one of {TEST_NAMES}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 4:
            raise InvalidSpecError("n must be an integer >= 4")
        if not isinstance(self.p, (int, np.integer)) or self.p < 1:
            raise InvalidSpecError("p must be a positive integer")
        if not self.H_values:
            raise InvalidSpecError("H_values must not be empty")
        for h in self.H_values:
            if h < 1 or h > self.n - 2:
                raise InvalidSpecError(f"H={h} must lie in [1, n-2] = [1, {self.n - 2}]")
        if not isinstance(self.reps, (int, np.integer)) or self.reps < 1:
            raise InvalidSpecError("reps must be a positive integer")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidSpecError("alpha must lie strictly between 0 and 1")
        if self.threads is not None and (
            not isinstance(self.threads, (int, np.integer)) or self.threads < 1
        ):
            raise InvalidSpecError("threads must be a positive integer or None")
        if self.cov.p != self.p:
            raise InvalidSpecError(f"cov is for p={self.cov.p}, expected {self.p}")


@dataclass(frozen=True)
class McCell:
    """Aggregated rejection rate for one (test, H) pair."""

    test: str
    H: int
    rejection_rate: float
    mc_se: float
    reps: int
    errors: int


@dataclass(frozen=True, eq=False)
class McReport:
    """Cells plus the config they came from and the wall time spent."""

    cells: tuple[McCell, ...]
    config: McConfig
    wall_time_s: float
    coeff_fingerprint: float | None = None

    def cell(self, test: str, H: int) -> McCell:
        for c in self.cells:
            if c.test == test and c.H == H:
                return c
        raise KeyError((test, H))


def _auto_threads() -> int:
    return min(os.cpu_count() or 1, 8)


def _resolve_model(cfg: McConfig) -> tuple[ModelSpec, float | None]:
    """Fix the coefficient matrix once per experiment, tagged off the master seed."""
    model = cfg.model
    if model.kind in (ModelKind.IID, ModelKind.H1_SIGN) or model.coeff is None:
        return model, None
    A = resolve_coeff(model, derive_rng(cfg.master_seed, "coeff"))
    return replace(model, coeff=A), float((A * A).sum())


def run_experiment(cfg: McConfig) -> McReport:
    """Run every requested test at every lag window over reps replications.

    Replication r generates one series from the stream (master_seed, "rep", r)
    and records a reject flag per (test, H). Replications where a test raises
    a degenerate-data style error are excluded from that test's denominator
    and counted; a cell whose error fraction exceeds 1% fails the whole run.
    """
    start = time.perf_counter()
    model, fingerprint = _resolve_model(cfg)
    innov_cov = build_covariance(cfg.cov)
    keys = [(t, h) for t in cfg.tests for h in cfg.H_values]

    def one_rep(r: int) -> dict[tuple[str, int], bool | None]:
        rng = derive_rng(cfg.master_seed, "rep", r)
        series = gen_series(model, cfg.scenario, cfg.n, cfg.p, rng, innov_cov=innov_cov)
        outcomes, errs = evaluate_tests_collect(series, cfg.tests, cfg.H_values, cfg.alpha)
        flags: dict[tuple[str, int], bool | None] = {}
        for key in keys:
            flags[key] = outcomes[key].reject if key in outcomes else None
        return flags

    threads = cfg.threads if cfg.threads is not None else _auto_threads()
    if threads == 1:
        per_rep = [one_rep(r) for r in range(cfg.reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_rep = list(pool.map(one_rep, range(cfg.reps)))

    cells = []
    over_budget = []
    for key in keys:
        rejected = sum(1 for flags in per_rep if flags[key] is True)
        errored = sum(1 for flags in per_rep if flags[key] is None)
        effective = cfg.reps - errored
        if errored > ERROR_BUDGET * cfg.reps or effective == 0:
            over_budget.append((key, errored))
            continue
        rate = rejected / effective
        se = math.sqrt(rate * (1.0 - rate) / effective)
        cells.append(McCell(key[0], key[1], rate, se, effective, errored))
    if over_budget:
        detail = ", ".join(f"{t}@H={h}: {e} errors" for (t, h), e in over_budget)
        raise McRunError(f"error budget exceeded ({detail} of {cfg.reps} reps)")

    return McReport(
        cells=tuple(cells),
        config=cfg,
        wall_time_s=time.perf_counter() - start,
        coeff_fingerprint=fingerprint,
    )


@dataclass(frozen=True)
class McTable:
    """Rectangular rejection-rate layout: context columns then test-by-lag rates."""

    columns: tuple[str, ...]
    rows: tuple[dict, ...]


def _model_label(cfg: McConfig) -> str:
    model = cfg.model
    name = model.kind.value
    if hasattr(model.coeff, "regime"):
        name += f"-{model.coeff.regime.value}"
    return name


def tabulate_reports(reports) -> McTable:
    """Lay finished reports out as one table row per experiment cell."""
    reports = list(reports)
    if not reports:
        return McTable((), ())
    rate_cols: list[str] = []
    for cfg in (r.config for r in reports):
        for h in cfg.H_values:
            for t in cfg.tests:
                col = f"{t.upper()}_H{h}"
                if col not in rate_cols:
                    rate_cols.append(col)
    context = ("label", "scenario", "model", "n", "p")
    rows = []
    for rep in reports:
        cfg = rep.config
        row: dict = {
            "label": cfg.label,
            "scenario": cfg.scenario.kind.value,
            "model": _model_label(cfg),
            "n": cfg.n,
            "p": cfg.p,
        }
        for cell in rep.cells:
            row[f"{cell.test.upper()}_H{cell.H}"] = cell.rejection_rate
        rows.append(row)
    return McTable(context + tuple(rate_cols), tuple(rows))


def size_table(grid) -> McTable:
    """Empirical sizes over a grid of null configs, one row per (scenario, n, p)."""
    return tabulate_reports(run_experiment(cfg) for cfg in grid)


def power_table(grid) -> McTable:
    """Empirical powers over a grid of alternative configs, one row per model cell."""
    return tabulate_reports(run_experiment(cfg) for cfg in grid)
