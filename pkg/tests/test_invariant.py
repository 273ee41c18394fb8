import numpy as np
import pytest

from qmcverify import (
    Observable,
    ValidationError,
    certificate_for,
    check_conditions,
    expectation_via_invariant,
    general_expectation,
    is_positive_semidefinite,
    completion_expansion_residual,
    least_fixed_point_q,
    oracle_expectation,
    terminal_state_series,
)
from qmcverify.linalg import max_abs
from qmcverify.sampling import random_contracting_program, random_density, random_observable

from helpers import P0, Z, bitflip_program, m1_zero_program


def test_least_fixed_point_bitflip_terminating():
    # K = pK + (1-p) has the unique solution K = 1, so the completion is I
    prog = bitflip_program(0.5, 0.6, 0.8)
    cert = least_fixed_point_q(prog, P0)
    assert cert.converged
    assert max_abs(cert.completion.mat - np.eye(2)) <= 1e-10
    assert cert.qv2_residual <= 1e-10


def test_least_fixed_point_bitflip_stuck():
    # p = 1 admits every K; the least solution picks K = 0
    prog = bitflip_program(1.0, 0.6, 0.8)
    cert = least_fixed_point_q(prog, P0)
    assert cert.converged
    assert cert.q.mat[1, 1].real == pytest.approx(0.0, abs=1e-12)
    assert max_abs(cert.completion.mat - np.diag([1.0, 0.0])) <= 1e-12


def test_least_fixed_point_m1_zero_single_iteration():
    prog = m1_zero_program()
    cert = least_fixed_point_q(prog, P0)
    expected = prog.e.apply_dual_mat(
        prog.meas.m0.conj().T @ P0.mat @ prog.meas.m0
    )
    assert max_abs(cert.q.mat - expected) <= 1e-12
    assert cert.iterations <= 2


def test_least_fixed_point_requires_psd_observable():
    prog = bitflip_program(0.5, 0.6, 0.8)
    with pytest.raises(ValidationError):
        least_fixed_point_q(prog, Observable(Z))


def test_solve_fast_path_matches_iteration(rng):
    for _ in range(5):
        prog = random_contracting_program(2, rng)
        p = random_observable(2, rng, psd=True)
        a = least_fixed_point_q(prog, p, method="iterate")
        b = least_fixed_point_q(prog, p, method="solve")
        assert max_abs(a.q.mat - b.q.mat) <= 1e-8


def test_solve_fast_path_refused_on_unit_spectrum():
    prog = bitflip_program(1.0, 0.6, 0.8)
    with pytest.raises(ValidationError):
        least_fixed_point_q(prog, P0, method="solve")


def test_conditions_hold_for_terminating_bitflip():
    prog = bitflip_program(0.5, 0.6, 0.8)
    cert = least_fixed_point_q(prog, P0)
    cond = check_conditions(prog, P0, cert)
    assert cond.qv1 and cond.qv2 and cond.qv3
    assert cond.almost_terminating


def test_conditions_reject_non_least_candidate_when_stuck():
    # on the p = 1 program, K = 1 satisfies QV2 but the tail stays |beta|^2
    prog = bitflip_program(1.0, 0.6, 0.8)
    cert = certificate_for(prog, P0, Observable(np.eye(2)))
    cond = check_conditions(prog, P0, cert)
    assert cond.qv2
    assert not cond.qv3
    assert cond.qv3_limit == pytest.approx(0.64, abs=1e-10)


def test_conditions_zero_observable():
    prog = bitflip_program(0.5, 0.6, 0.8)
    cert = least_fixed_point_q(prog, Observable(np.zeros((2, 2))))
    cond = check_conditions(prog, Observable(np.zeros((2, 2))), cert)
    assert cond.qv1 and cond.qv2 and cond.qv3
    assert cond.qv1_value == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "p,alpha,beta,expected",
    [(0.5, 0.6, 0.8, 1.0), (1.0, 0.6, 0.8, 0.36), (1.0, 1.0, 0.0, 1.0)],
)
def test_expectation_reproduces_termination_probabilities(p, alpha, beta, expected):
    prog = bitflip_program(p, alpha, beta)
    cert = least_fixed_point_q(prog, P0)
    assert expectation_via_invariant(prog, P0, cert) == pytest.approx(expected, abs=1e-9)


def test_klem_identity_base_case(rng):
    prog = random_contracting_program(2, rng)
    p = random_observable(2, rng, psd=True)
    cert = least_fixed_point_q(prog, p)
    assert completion_expansion_residual(prog, p, cert, 0) <= 1e-10


def test_klem_identity_bitflip_range():
    prog = bitflip_program(0.5, 0.6, 0.8)
    cert = least_fixed_point_q(prog, P0)
    for n in range(1, 11):
        assert completion_expansion_residual(prog, P0, cert, n) <= 1e-9


def test_klem_identity_m1_zero():
    prog = m1_zero_program()
    cert = least_fixed_point_q(prog, P0)
    for n in (0, 3, 7):
        assert completion_expansion_residual(prog, P0, cert, n) <= 1e-12


def test_monotone_iteration_bounded_by_terminal_dual(rng):
    # Q_n <= F*(P) for every iterate, tested weakly on a basis of density
    # matrices: tr(Q_n rho) <= tr(P F(rho))
    from qmcverify.invariant import _completion_mat
    from qmcverify.program import _terminal_series_mat

    prog = random_contracting_program(2, rng)
    p = random_observable(2, rng, psd=True)
    basis = [
        np.diag([1.0, 0.0]).astype(complex),
        np.diag([0.0, 1.0]).astype(complex),
        np.full((2, 2), 0.5, dtype=complex),
        np.array([[0.5, -0.5j], [0.5j, 0.5]]),
    ]
    bounds = []
    for rho in basis:
        f_rho, _, _ = _terminal_series_mat(prog, rho, 1e-13, 10**6)
        bounds.append(np.trace(p.mat @ f_rho).real)
    q_n = np.zeros((2, 2), dtype=complex)
    for _ in range(30):
        q_n = _completion_mat(prog.meas, p.mat, prog.e.apply_dual_mat(q_n))
        for rho, bound in zip(basis, bounds):
            assert np.trace(q_n @ rho).real <= bound + 1e-8


def test_monotone_iteration_is_loewner_increasing():
    from qmcverify.invariant import _completion_mat

    prog = bitflip_program(0.7, 0.6, 0.8)
    prev = np.zeros((2, 2), dtype=complex)
    for _ in range(20):
        nxt = _completion_mat(
            prog.meas, P0.mat, prog.e.apply_dual_mat(prev)
        )
        assert is_positive_semidefinite(nxt - prev, tol=1e-10)
        prev = nxt


def test_fixed_point_minimality_weak(rng):
    # any other QV2 solution dominates the least one in expectation
    prog = bitflip_program(1.0, 0.6, 0.8)
    least = least_fixed_point_q(prog, P0)
    other = certificate_for(prog, P0, Observable(np.eye(2)))
    assert other.qv2_residual <= 1e-12
    for _ in range(10):
        rho = random_density(2, rng)
        lhs = np.trace(least.q.mat @ rho.mat).real
        rhs = np.trace(other.q.mat @ rho.mat).real
        assert lhs <= rhs + 1e-10


def test_agreement_with_series_oracle(rng):
    tail_tol = 1e-12
    for _ in range(10):
        prog = random_contracting_program(2, rng)
        p = random_observable(2, rng, psd=True)
        cert = least_fixed_point_q(prog, p)
        via_invariant = expectation_via_invariant(prog, p, cert)
        via_series = oracle_expectation(prog, p, tail_tol).expectation_series
        assert abs(via_invariant - via_series) <= max(10 * tail_tol, 1e-8)


def test_general_expectation_matches_psd_route(rng):
    prog = random_contracting_program(2, rng)
    p = random_observable(2, rng, psd=True)
    cert = least_fixed_point_q(prog, p)
    direct = expectation_via_invariant(prog, p, cert)
    assert general_expectation(prog, p) == pytest.approx(direct, abs=1e-9)


def test_general_expectation_pauli_z_vs_series():
    prog = bitflip_program(0.5, *np.sqrt([0.5, 0.5]))
    rho_star = terminal_state_series(prog, tail_tol=1e-13).rho_star
    expected = np.trace(Z @ rho_star.mat).real
    assert general_expectation(prog, Observable(Z)) == pytest.approx(expected, abs=1e-8)


def test_general_expectation_zero_observable():
    prog = bitflip_program(0.5, 0.6, 0.8)
    assert general_expectation(prog, Observable(np.zeros((2, 2)))) == 0.0
