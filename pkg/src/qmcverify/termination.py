"""Exact and almost-sure termination of programs and schemes.

Both notions reduce to the step representation ``M`` acting on
``x = (rho0 (x) I)|Phi>``: exact termination means ``M^n x = 0`` at some
finite power (it then already happens at the nilpotent index of the zero
eigenvalue), and almost termination means ``x`` carries no unit-modulus
spectral component, read against the dual eigenbasis since ``M`` is not
normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import DensityOperator
from .errors import ConsistencyError
from .spectral import ProgramRepresentation, vec

ZERO_VECTOR_RTOL = 1e-9


@dataclass(frozen=True)
class TerminationVerdict:
    terminates: bool
    terminates_at: int | None
    almost_terminates: bool
    unit_overlap_norm: float
    nilpotent_check_power: int

    def __post_init__(self):
        if self.terminates and not self.almost_terminates:
            raise ConsistencyError("exact termination without almost termination")
        if self.terminates != (self.terminates_at is not None):
            raise ConsistencyError("terminates_at must be present iff terminates")


def _verdict_for_vector(
    rep: ProgramRepresentation, x: np.ndarray, tol: float
) -> TerminationVerdict:
    x_norm = float(np.linalg.norm(x))
    overlap = float(np.linalg.norm(rep.unit_projector @ x))
    almost = overlap <= tol * x_norm

    # M^n x can only vanish for x inside the generalized null space at
    # eigenvalue zero, which M^k with k = nilpotent index annihilates, so
    # searching beyond the index bound is pointless.
    bound = rep.spectral.zero_nilpotent_index_bound
    terminates = False
    terminates_at = None
    v = x
    for n in range(1, bound + 1):
        v = rep.m @ v
        if float(np.linalg.norm(v)) <= tol * x_norm:
            terminates = True
            terminates_at = n
            break

    return TerminationVerdict(
        terminates=terminates,
        terminates_at=terminates_at,
        almost_terminates=almost or terminates,
        unit_overlap_norm=overlap,
        nilpotent_check_power=bound,
    )


def check_program_termination(
    rep: ProgramRepresentation,
    rho0: DensityOperator,
    tol: float = ZERO_VECTOR_RTOL,
) -> TerminationVerdict:
    """Termination verdict for the program started in ``rho0``."""
    return _verdict_for_vector(rep, vec(rho0.mat), tol)


def check_scheme_termination(
    rep: ProgramRepresentation, tol: float = ZERO_VECTOR_RTOL
) -> TerminationVerdict:
    """Termination verdict quantified over all initial states.

    Evaluated directly on ``|Phi>`` and, as a cross-check, through the
    maximally mixed initial state ``I/d`` (a scheme terminates iff the
    program started in ``I/d`` does).
    """
    via_phi = _verdict_for_vector(rep, rep.phi, tol)
    mixed = DensityOperator(np.eye(rep.dim) / rep.dim)
    via_mixed = check_program_termination(rep, mixed, tol)
    if (
        via_phi.terminates != via_mixed.terminates
        or via_phi.terminates_at != via_mixed.terminates_at
        or via_phi.almost_terminates != via_mixed.almost_terminates
    ):
        raise ConsistencyError(
            f"scheme termination routes disagree: |Phi> gave {via_phi}, "
            f"I/d gave {via_mixed}"
        )
    return via_phi
