"""Random instance generation for property suites and golden files.

All generators take an explicit ``numpy.random.Generator`` so that golden
records and test suites are reproducible from a seed alone.
"""

from __future__ import annotations

import numpy as np

from .channels import DensityOperator, Observable, SuperOperator
from .program import ProgramScheme, QuantumProgram, TerminationMeasurement
from .spectral import build_representation


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, d, d))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_channel(d: int, rng: np.random.Generator, n_kraus: int = 2) -> SuperOperator:
    """Haar-style trace-preserving channel: a random isometry from d to
    n_kraus*d dimensions, sliced into Kraus blocks."""
    q, _ = np.linalg.qr(_ginibre(rng, n_kraus * d, d))
    return SuperOperator([q[i * d : (i + 1) * d, :] for i in range(n_kraus)])


def random_measurement(d: int, rng: np.random.Generator) -> TerminationMeasurement:
    """Random complete two-outcome measurement with both effects strictly
    inside (0, I), so neither branch is degenerate."""
    g = _ginibre(rng, d, d)
    h = g @ g.conj().T
    w, v = np.linalg.eigh(h)
    top = rng.uniform(0.3, 0.95)
    w = w * (top / w.max())
    m1 = random_unitary(d, rng) @ (v * np.sqrt(w)) @ v.conj().T
    m0 = random_unitary(d, rng) @ (v * np.sqrt(1.0 - w)) @ v.conj().T
    return TerminationMeasurement(m0, m1)


def random_density(d: int, rng: np.random.Generator, pure: bool = False) -> DensityOperator:
    if pure:
        return DensityOperator.from_pure(_ginibre(rng, d, 1))
    g = _ginibre(rng, d, d)
    rho = g @ g.conj().T
    return DensityOperator(rho / np.trace(rho).real)


def random_observable(d: int, rng: np.random.Generator, psd: bool = False) -> Observable:
    g = _ginibre(rng, d, d)
    if psd:
        return Observable(g @ g.conj().T / d)
    return Observable((g + g.conj().T) / 2)


def random_scheme(d: int, rng: np.random.Generator, n_kraus: int = 2) -> ProgramScheme:
    return ProgramScheme(random_channel(d, rng, n_kraus), random_measurement(d, rng))


def random_program(d: int, rng: np.random.Generator, n_kraus: int = 2) -> QuantumProgram:
    return random_scheme(d, rng, n_kraus).with_initial_state(random_density(d, rng))


def random_contracting_program(
    d: int,
    rng: np.random.Generator,
    n_kraus: int = 2,
    radius_cap: float = 0.95,
    max_tries: int = 200,
) -> QuantumProgram:
    """Random program whose step representation has spectral radius at
    most ``radius_cap``; such programs terminate almost surely from every
    initial state and their series converge quickly."""
    for _ in range(max_tries):
        prog = random_program(d, rng, n_kraus)
        rep = build_representation(prog)
        if rep.spectral.spectral_radius() <= radius_cap:
            return prog
    raise RuntimeError(
        f"no program with spectral radius <= {radius_cap} in {max_tries} draws"
    )
