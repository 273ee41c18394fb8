import json
import math
from pathlib import Path

import numpy as np
import pytest

from qmcverify import oracle_expectation, oracle_fixed_point
from qmcverify.cli import golden_records
from qmcverify.sampling import random_contracting_program, random_observable

from helpers import P0, bitflip_program, m1_zero_program

GOLDEN_PATH = Path(__file__).parent / "goldens" / "oracle_goldens.json"


def test_oracle_bitflip_reference_values():
    prog = bitflip_program(0.5, 0.0, 1.0)
    result = oracle_expectation(prog, P0, tail_tol=1e-12)
    assert result.expectation_series == pytest.approx(1.0, abs=1e-8)
    assert result.running_time_series == pytest.approx(3.0, abs=1e-6)


def test_oracle_single_step_when_m1_zero():
    prog = m1_zero_program()
    result = oracle_expectation(prog, P0, tail_tol=1e-12)
    assert result.n_used == 0
    expected = np.trace(
        P0.mat @ prog.meas.m0 @ prog.rho0.mat @ prog.meas.m0.conj().T
    ).real
    assert result.expectation_series == pytest.approx(expected, abs=1e-12)


def test_oracle_flags_divergent_running_time():
    prog = bitflip_program(1.0, 0.6, 0.8)
    result = oracle_expectation(prog, P0, tail_tol=1e-10, n_max=300)
    assert result.running_time_series == math.inf
    assert result.expectation_series == pytest.approx(0.36, abs=1e-10)


def test_oracle_expectation_within_spectral_range(rng):
    for _ in range(5):
        prog = random_contracting_program(2, rng)
        p = random_observable(2, rng, psd=True)
        result = oracle_expectation(prog, p, tail_tol=1e-12)
        w = np.linalg.eigvalsh(p.mat)
        trace_star = sum(rec.p for rec in result.p_table.steps)
        assert w.min() * trace_star - 1e-9 <= result.expectation_series
        assert result.expectation_series <= w.max() * trace_star + 1e-9


def test_oracle_self_consistency_under_refinement(rng):
    for _ in range(5):
        prog = random_contracting_program(2, rng)
        p = random_observable(2, rng, psd=True)
        coarse = oracle_expectation(prog, p, tail_tol=1e-10, n_max=10**5)
        fine = oracle_expectation(prog, p, tail_tol=5e-11, n_max=2 * 10**5)
        assert abs(coarse.expectation_series - fine.expectation_series) <= 1e-7


def test_fixed_point_oracle_bitflip_values():
    q = oracle_fixed_point(bitflip_program(0.5, 0.6, 0.8), P0)
    assert q.mat[1, 1].real == pytest.approx(1.0, abs=1e-10)
    q = oracle_fixed_point(bitflip_program(1.0, 0.6, 0.8), P0)
    assert q.mat[1, 1].real == pytest.approx(0.0, abs=1e-12)


def test_fixed_point_oracle_m1_zero():
    prog = m1_zero_program()
    q = oracle_fixed_point(prog, P0)
    expected = prog.e.apply_dual_mat(prog.meas.m0.conj().T @ P0.mat @ prog.meas.m0)
    assert np.allclose(q.mat, expected, atol=1e-12)


def test_fixed_point_oracle_agrees_with_verifier(rng):
    from qmcverify import least_fixed_point_q

    for _ in range(5):
        prog = random_contracting_program(2, rng)
        p = random_observable(2, rng, psd=True)
        via_oracle = oracle_fixed_point(prog, p)
        via_verifier = least_fixed_point_q(prog, p).q
        assert np.max(np.abs(via_oracle.mat - via_verifier.mat)) <= 1e-9


def test_committed_goldens_match_deep_recomputation():
    committed = json.loads(GOLDEN_PATH.read_text())
    assert committed["format"] == "qmc-goldens/1"
    # regenerate from scratch at double truncation depth
    fresh = golden_records(tail_tol=0.5e-12)
    assert len(fresh["records"]) == len(committed["records"])
    for got, want in zip(fresh["records"], committed["records"]):
        assert got["seed"] == want["seed"]
        assert got["model_hash"] == want["model_hash"]
        assert got["values"]["expectation_series"] == pytest.approx(
            want["values"]["expectation_series"], abs=1e-7
        )
        assert got["values"]["running_time_series"] == pytest.approx(
            want["values"]["running_time_series"], abs=1e-6
        )
        for a, b in zip(got["values"]["p_first"], want["values"]["p_first"]):
            assert a == pytest.approx(b, abs=1e-9)
