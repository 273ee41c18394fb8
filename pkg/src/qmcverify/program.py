"""Quantum Markov chain programs and their step-by-step semantics.

A program scheme is a trace-preserving super-operator ``E`` plus a
two-outcome termination measurement ``{M0, M1}``; feeding it an initial
state ``rho0`` gives a program.  One execution step measures, stops on
outcome 0, and otherwise applies ``E``, so the surviving (unnormalized)
state evolves under ``G = E . E1`` with ``E_i(rho) = M_i rho M_i^dag``.

The truncated series ``sum_n E0(G^n(rho0))`` computed here is the oracle
against which the invariant and closed-form methods are checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .channels import DensityOperator, SuperOperator, compose
from .errors import DimensionMismatchError, ValidationError
from .linalg import TOL_TP, dagger, max_abs, require_square

DEFAULT_TAIL_TOL = 1e-12
DEFAULT_N_MAX = 1_000_000


@dataclass(frozen=True, eq=False)
class TerminationMeasurement:
    """Yes-no measurement {M0, M1} with M0^dag M0 + M1^dag M1 = I.

    Outcome 0 halts the program; outcome 1 lets it continue.
    """

    m0: np.ndarray
    m1: np.ndarray

    def __init__(self, m0, m1):
        a = require_square(m0, "m0")
        b = require_square(m1, "m1")
        if a.shape != b.shape:
            raise DimensionMismatchError(
                f"m0 and m1 have different shapes {a.shape} and {b.shape}"
            )
        defect = max_abs(dagger(a) @ a + dagger(b) @ b - np.eye(a.shape[0]))
        if defect > TOL_TP:
            raise ValidationError(
                "termination measurement is not complete: "
                f"||M0^dag M0 + M1^dag M1 - I||_max = {defect:.3e}"
            )
        object.__setattr__(self, "m0", np.array(a))
        object.__setattr__(self, "m1", np.array(b))
        self.m0.setflags(write=False)
        self.m1.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.m0.shape[0]

    @cached_property
    def e0(self) -> SuperOperator:
        return SuperOperator([self.m0])

    @cached_property
    def e1(self) -> SuperOperator:
        return SuperOperator([self.m1])


@dataclass(frozen=True, eq=False)
class ProgramScheme:
    """A super-operator together with a termination measurement; becomes a
    program once an initial state is supplied."""

    e: SuperOperator
    meas: TerminationMeasurement

    def __post_init__(self):
        if not self.e.trace_preserving:
            raise ValidationError("the step super-operator must be trace-preserving")
        if self.e.dim != self.meas.dim:
            raise DimensionMismatchError(
                f"channel dimension {self.e.dim} != measurement dimension {self.meas.dim}"
            )
        # Trace preservation of G + E0 follows from the two contracts above;
        # verify it anyway since everything downstream leans on it.
        ksum = dagger(self.meas.m0) @ self.meas.m0
        for k in self.g.kraus:
            ksum = ksum + dagger(k) @ k
        defect = max_abs(ksum - np.eye(self.dim))
        if defect > 10 * TOL_TP:
            raise ValidationError(
                f"G + E0 is not trace-preserving (defect {defect:.3e}); "
                "check the channel and measurement data"
            )

    @property
    def dim(self) -> int:
        return self.e.dim

    @cached_property
    def g(self) -> SuperOperator:
        """The survival step G = E . E1."""
        return compose(self.e, self.meas.e1)

    def with_initial_state(self, rho0: DensityOperator) -> "QuantumProgram":
        return QuantumProgram(self.e, self.meas, rho0)


@dataclass(frozen=True, eq=False)
class QuantumProgram(ProgramScheme):
    """A program scheme plus a unit-trace initial state."""

    rho0: DensityOperator

    def __post_init__(self):
        ProgramScheme.__post_init__(self)
        if self.rho0.dim != self.dim:
            raise DimensionMismatchError(
                f"initial state dimension {self.rho0.dim} != program dimension {self.dim}"
            )
        if abs(self.rho0.trace - 1.0) > 1e-9:
            raise ValidationError(
                f"initial state must have unit trace, got {self.rho0.trace:.12g}"
            )

    @property
    def scheme(self) -> ProgramScheme:
        return ProgramScheme(self.e, self.meas)


@dataclass(frozen=True)
class StepRecord:
    n: int
    p: float
    p_nontermination: float
    partial_terminal: DensityOperator


@dataclass(frozen=True)
class StepTrace:
    """Per-step termination/survival probabilities.

    ``steps[k]`` describes step ``n = k + 1``:
    ``p = tr(E0(G^(n-1)(rho0)))`` and
    ``p_nontermination = tr(E1(G^(n-1)(rho0)))``.
    For every prefix, ``sum(p_1..p_n) + p_nontermination_n = 1``.
    """

    steps: tuple[StepRecord, ...]
    residual_mass: float


def _real_trace(mat: np.ndarray) -> float:
    return float(np.trace(mat).real)


def step_probabilities(prog: QuantumProgram, n_max: int) -> StepTrace:
    """Tabulate p_n and the nontermination probability for n = 1..n_max."""
    if n_max < 1:
        raise ValidationError(f"n_max must be >= 1, got {n_max}")
    e0, e1, g = prog.meas.e0, prog.meas.e1, prog.g
    sigma = prog.rho0.mat
    steps = []
    p_nonterm = 1.0
    for n in range(1, n_max + 1):
        terminal = e0.apply_mat(sigma)
        p = _real_trace(terminal)
        p_nonterm = _real_trace(e1.apply_mat(sigma))
        steps.append(
            StepRecord(
                n=n,
                p=p,
                p_nontermination=p_nonterm,
                partial_terminal=DensityOperator(terminal),
            )
        )
        if n < n_max:
            sigma = g.apply_mat(sigma)
    return StepTrace(steps=tuple(steps), residual_mass=p_nonterm)


@dataclass(frozen=True, eq=False)
class SeriesResult:
    rho_star: DensityOperator
    residual: float
    n_used: int


def _terminal_series_mat(
    scheme: ProgramScheme, rho_mat: np.ndarray, tail_tol: float, n_max: int
) -> tuple[np.ndarray, float, int]:
    """Sum E0(G^n(rho)) until the surviving mass drops below tail_tol or
    n reaches n_max.  The mass tr(G^(n+1)(rho)) is monotone nonincreasing,
    which makes it the natural stopping functional."""
    e0, g = scheme.meas.e0, scheme.g
    sigma = rho_mat
    acc = e0.apply_mat(sigma)
    n = 0
    while True:
        sigma = g.apply_mat(sigma)
        mass = _real_trace(sigma)
        if mass < tail_tol or n >= n_max:
            return acc, mass, n
        n += 1
        acc += e0.apply_mat(sigma)


def terminal_state_series(
    prog: QuantumProgram,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int = DEFAULT_N_MAX,
) -> SeriesResult:
    """Truncated terminal state sum_{n=0}^{n_used} E0(G^n(rho0)).

    A residual above ``tail_tol`` is not an error: the series still
    converges, but the program may not terminate almost surely and any
    expectation taken in ``rho_star`` is a lower estimate.
    """
    if tail_tol <= 0:
        raise ValidationError(f"tail_tol must be positive, got {tail_tol}")
    acc, residual, n_used = _terminal_series_mat(prog, prog.rho0.mat, tail_tol, n_max)
    return SeriesResult(rho_star=DensityOperator(acc), residual=residual, n_used=n_used)


def check_recursion(
    prog: QuantumProgram,
    rho: DensityOperator,
    tail_tol: float = DEFAULT_TAIL_TOL,
    n_max: int = DEFAULT_N_MAX,
) -> float:
    """Self-consistency residual ||F(rho) - E0(rho) - F(G(rho))||_max,
    with F evaluated by series summation on both sides."""
    lhs, _, _ = _terminal_series_mat(prog, rho.mat, tail_tol, n_max)
    g_rho = prog.g.apply_mat(rho.mat)
    tail, _, _ = _terminal_series_mat(prog, g_rho, tail_tol, n_max)
    rhs = prog.meas.e0.apply_mat(rho.mat) + tail
    return max_abs(lhs - rhs)
