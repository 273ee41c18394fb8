"""Brute-force oracles: direct evaluation of the defining series.

These deliberately reuse nothing from the invariant or spectral modules;
they ground the expected values of every derived test and the three-way
agreement suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import Observable
from .linalg import dagger
from .program import (
    DEFAULT_TAIL_TOL,
    QuantumProgram,
    StepTrace,
    step_probabilities,
    terminal_state_series,
)

ORACLE_N_MAX = 1_000_000


@dataclass(frozen=True, eq=False)
class OracleResult:
    expectation_series: float
    running_time_series: float
    p_table: StepTrace
    tail_tol_used: float
    n_used: int


def oracle_expectation(
    prog: QuantumProgram,
    p: Observable,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int = ORACLE_N_MAX,
) -> OracleResult:
    """Series evaluation of the terminal expectation and running time.

    The running time partial sum is flagged infinite (returned as
    ``math.inf``) when the leftover nontermination mass exceeds
    ``sqrt(tail_tol)``, i.e. when the series demonstrably failed to
    exhaust the probability mass.
    """
    series = terminal_state_series(prog, tail_tol, n_max)
    expectation = float(np.trace(p.mat @ series.rho_star.mat).real)
    table = step_probabilities(prog, max(series.n_used + 1, 1))
    if series.residual > math.sqrt(tail_tol):
        running_time = math.inf
    else:
        running_time = sum(rec.n * rec.p for rec in table.steps)
    return OracleResult(
        expectation_series=expectation,
        running_time_series=running_time,
        p_table=table,
        tail_tol_used=tail_tol,
        n_used=series.n_used,
    )


def oracle_fixed_point(
    prog: QuantumProgram,
    p: Observable,
    tol: float = 1e-13,
    n_max: int = 10_000_000,
) -> Observable:
    """Independent recomputation of the least invariant.

    Runs the monotone completion iteration from zero, written out here so
    it shares no code with the verifier it cross-checks, at 10x tighter
    tolerance and 10x more iterations than the verifier defaults.
    """
    m0, m1 = prog.meas.m0, prog.meas.m1
    base = dagger(m0) @ p.mat @ m0
    limit = np.zeros_like(base)
    for _ in range(n_max):
        nxt = base + dagger(m1) @ prog.e.apply_dual_mat(limit) @ m1
        done = float(np.max(np.abs(nxt - limit))) < tol
        limit = nxt
        if done:
            break
    q = prog.e.apply_dual_mat(limit)
    return Observable((q + dagger(q)) / 2)
