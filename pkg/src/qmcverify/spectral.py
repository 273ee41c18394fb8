"""Closed-form verification through matrix representations.

The survival step ``G`` acts on vectorized operators as a d^2 x d^2 matrix
``M``, and the halting step ``E0`` as ``N0``.  Every eigenvalue of ``M``
has modulus at most one, and unit-modulus eigenvalues are semisimple, so
removing their (rank-one, biorthogonal) spectral components yields a
strictly contracting matrix ``N`` with ``N0 M^n = N0 N^n``.  Terminal
expectations and the average running time then reduce to resolvent
solves against ``(rho0 (x) I)|Phi>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channels import DensityOperator, Observable, maximally_entangled_vector
from .errors import ConsistencyError, RepresentationError, SingularResolventError
from .linalg import (
    EPS_UNIT,
    TOL_PROJ,
    SpectralData,
    kron,
    max_abs,
    spectral_decompose,
)
from .program import ProgramScheme

IMAG_TOL = 1e-9


def vec(mat: np.ndarray) -> np.ndarray:
    """Row-major vectorization; identical to ``(A (x) I)|Phi>`` with
    ``|Phi> = sum_j |jj>``."""
    return np.asarray(mat, dtype=complex).reshape(-1)


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(d, d)


@dataclass(frozen=True, eq=False)
class ProgramRepresentation:
    """Vectorized-space data of a program scheme.

    ``n1`` is kept for completeness but feeds no formula here.
    ``margin`` is the gap ``1 - max{|lambda| : lambda below the unit
    circle}``; it quantifies the conditioning of the ``I - N`` solves.
    """

    dim: int
    dim2: int
    n0: np.ndarray
    n1: np.ndarray
    m: np.ndarray
    spectral: SpectralData
    unit_projector: np.ndarray
    n_filtered: np.ndarray
    phi: np.ndarray
    margin: float

    def has_unit_spectrum(self) -> bool:
        return bool(np.any(self.spectral.unit_circle_flags))


def build_representation(
    scheme: ProgramScheme,
    eps_unit: float = EPS_UNIT,
    tol_proj: float = TOL_PROJ,
) -> ProgramRepresentation:
    """Assemble N0, N1, M and the unit-circle-filtered N for a scheme.

    Raises
    ------
    RepresentationError
        If the spectral radius of M exceeds ``1 + eps_unit`` or a
        unit-modulus eigenvalue cluster is not semisimple.  Valid programs
        (trace-preserving channel, complete measurement) cannot trigger
        either; the usual cause is corrupted model data.
    """
    m0, m1 = scheme.meas.m0, scheme.meas.m1
    d = scheme.dim
    n0 = kron(m0, m0.conj())
    n1 = kron(m1, m1.conj())
    m = np.zeros((d * d, d * d), dtype=complex)
    for k in scheme.e.kraus:
        km = k @ m1
        m += kron(km, km.conj())

    sd = spectral_decompose(m, eps_unit)
    radius = sd.spectral_radius()
    if radius > 1.0 + eps_unit:
        raise RepresentationError(
            f"step representation has spectral radius {radius:.12g} > 1; "
            "the channel is not trace-nonincreasing on the survival branch"
        )

    m_norm = max(1.0, float(np.linalg.norm(m, 2)))
    p_u = sd.unit_projector()
    if np.any(sd.unit_circle_flags):
        if max_abs(p_u @ p_u - p_u) > tol_proj:
            raise RepresentationError(
                "unit-circle spectral projector is not idempotent "
                f"(defect {max_abs(p_u @ p_u - p_u):.3e}); a unit-modulus "
                "eigenvalue is defective, which valid programs cannot produce"
            )
        if max_abs(p_u @ m - m @ p_u) > tol_proj * m_norm:
            raise RepresentationError(
                "unit-circle spectral projector does not commute with the "
                "step representation"
            )
        for cid in np.unique(sd.cluster_ids[sd.unit_circle_flags]):
            idx = np.flatnonzero(sd.cluster_ids == cid)
            lam = sd.eigenvalues[idx].mean()
            p_c = sd.cluster_projector(int(cid))
            defect = max_abs((m - lam * np.eye(d * d)) @ p_c)
            if defect > tol_proj * m_norm:
                raise RepresentationError(
                    f"unit-modulus eigenvalue cluster at {lam:.9g} is not "
                    f"semisimple (nilpotent defect {defect:.3e})"
                )

    n = m - m @ p_u
    nonunit = np.abs(sd.eigenvalues[~sd.unit_circle_flags])
    margin = float(1.0 - nonunit.max()) if nonunit.size else 1.0

    return ProgramRepresentation(
        dim=d,
        dim2=d * d,
        n0=n0,
        n1=n1,
        m=m,
        spectral=sd,
        unit_projector=p_u,
        n_filtered=n,
        phi=maximally_entangled_vector(d),
        margin=margin,
    )


def _resolvent_solve(rep: ProgramRepresentation, rhs: np.ndarray) -> np.ndarray:
    if rep.margin <= 0:
        raise SingularResolventError(
            f"I - N is singular (margin {rep.margin:.3e}); filtering failed"
        )
    try:
        return np.linalg.solve(np.eye(rep.dim2) - rep.n_filtered, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularResolventError(str(exc)) from exc


def _real_part(value: complex, what: str) -> float:
    if abs(value.imag) > IMAG_TOL * max(1.0, abs(value)):
        raise ConsistencyError(
            f"{what} came out with imaginary part {value.imag:.3e}"
        )
    return float(value.real)


def expectation_closed_form(
    rep: ProgramRepresentation, rho0: DensityOperator, p: Observable
) -> float:
    """Terminal expectation ``<Phi| (P (x) I) N0 (I - N)^-1 (rho0 (x) I)
    |Phi>``, evaluated by a linear solve rather than explicit inversion."""
    x = vec(rho0.mat)
    y = _resolvent_solve(rep, x)
    z = kron(p.mat, np.eye(rep.dim)) @ (rep.n0 @ y)
    return _real_part(complex(rep.phi.conj() @ z), "closed-form expectation")


def average_running_time(
    rep: ProgramRepresentation, rho0: DensityOperator, tol: float = 1e-9
) -> float:
    """Average number of steps ``<Phi| N0 (I - N)^-2 (rho0 (x) I) |Phi>``.

    Returns ``inf`` when the initial state overlaps the unit-circle
    eigenspace: the termination probability is then below one and the mean
    genuinely diverges (or the quadratic form would undercount).
    """
    x = vec(rho0.mat)
    overlap = float(np.linalg.norm(rep.unit_projector @ x))
    if overlap > tol * float(np.linalg.norm(x)):
        return math.inf
    y = _resolvent_solve(rep, _resolvent_solve(rep, x))
    return _real_part(complex(rep.phi.conj() @ (rep.n0 @ y)), "average running time")


def filtered_power_residual(rep: ProgramRepresentation, n: int) -> float:
    """||N0 M^n - N0 N^n||_max; zero in exact arithmetic for all n >= 0."""
    if n < 0:
        raise ValueError("n must be >= 0")
    pm = np.linalg.matrix_power(rep.m, n)
    pn = np.linalg.matrix_power(rep.n_filtered, n)
    return max_abs(rep.n0 @ pm - rep.n0 @ pn)


def power_norm_bound_check(
    rep: ProgramRepresentation, alpha: np.ndarray, n: int, slack: float = 1e-9
) -> bool:
    """Whether ``||M^n alpha|| <= 4 sqrt(d) ||alpha||`` (with slack)."""
    a = np.asarray(alpha, dtype=complex).reshape(-1)
    v = a
    for _ in range(n):
        v = rep.m @ v
    bound = 4.0 * math.sqrt(rep.dim) * float(np.linalg.norm(a)) + slack
    return bool(np.linalg.norm(v) <= bound)
