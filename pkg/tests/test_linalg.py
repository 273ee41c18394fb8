import numpy as np
import pytest

from qmcverify import (
    DimensionMismatchError,
    is_positive_semidefinite,
    kron,
    maximally_entangled_vector,
    spectral_decompose,
)
from qmcverify.linalg import TOL_EIG, max_abs

from helpers import X


def random_complex(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def test_kron_identity():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_pauli_flip():
    expected = np.zeros((4, 4))
    expected[0, 3] = expected[1, 2] = expected[2, 1] = expected[3, 0] = 1.0
    assert np.array_equal(kron(X, X), expected)


def test_kron_single_entry_placement():
    e01 = np.zeros((2, 2))
    e01[0, 1] = 1.0
    out = kron(e01, e01)
    expected = np.zeros((4, 4))
    expected[0, 3] = 1.0
    assert np.array_equal(out, expected)


def test_kron_associative_and_bilinear(rng):
    for _ in range(10):
        a, b, c = (random_complex(rng, 2) for _ in range(3))
        assert max_abs(kron(kron(a, b), c) - kron(a, kron(b, c))) <= 1e-9
        s, t = rng.standard_normal(2)
        assert max_abs(kron(s * a + t * b, c) - s * kron(a, c) - t * kron(b, c)) <= 1e-9
        assert max_abs(kron(c, s * a + t * b) - s * kron(c, a) - t * kron(c, b)) <= 1e-9


@pytest.mark.parametrize("d", [2, 3])
def test_entangled_vector_shuffle_identity(rng, d):
    # (A (x) B)(C (x) I)|Phi> = (A C B^T (x) I)|Phi>
    phi = maximally_entangled_vector(d)
    eye = np.eye(d)
    for _ in range(10):
        a, b, c = (random_complex(rng, d) for _ in range(3))
        lhs = kron(a, b) @ (kron(c, eye) @ phi)
        rhs = kron(a @ c @ b.T, eye) @ phi
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(lhs))


def test_psd_zero_matrix():
    assert is_positive_semidefinite(np.zeros((3, 3)))


def test_psd_small_negative_eigenvalue():
    assert not is_positive_semidefinite(np.diag([1.0, -1e-3]), tol=1e-9)


def test_psd_plus_projector():
    assert is_positive_semidefinite(np.full((2, 2), 0.5))


def test_psd_rejects_non_square():
    with pytest.raises(DimensionMismatchError):
        is_positive_semidefinite(np.zeros((2, 3)))


def test_psd_rejects_non_hermitian():
    assert not is_positive_semidefinite(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_spectral_diagonal():
    sd = spectral_decompose(np.diag([1.0, 0.5]))
    order = np.argsort(-np.abs(sd.eigenvalues))
    assert np.allclose(sd.eigenvalues[order], [1.0, 0.5])
    assert list(sd.unit_circle_flags[order]) == [True, False]


def test_spectral_bitflip_step_matrix():
    p = 0.5
    m = np.zeros((4, 4))
    m[0, 3] = 1 - p
    m[3, 3] = p
    sd = spectral_decompose(m)
    assert np.allclose(sorted(np.abs(sd.eigenvalues)), [0.0, 0.0, 0.0, 0.5], atol=1e-12)
    assert not sd.unit_circle_flags.any()


def test_spectral_nilpotent_index():
    sd = spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert np.allclose(sd.eigenvalues, 0.0)
    assert sd.zero_nilpotent_index_bound == 2


def test_spectral_eigenpair_residuals(rng):
    for d in (2, 4, 6):
        a = random_complex(rng, d)
        sd = spectral_decompose(a)
        norm = np.linalg.norm(a, 2)
        res = max_abs(a @ sd.right_vectors - sd.right_vectors * sd.eigenvalues[None, :])
        assert res <= TOL_EIG * max(1.0, norm)


def test_unit_projector_idempotent_for_unitary(rng):
    # every eigenvalue of a unitary is unit-modulus and semisimple
    g = random_complex(rng, 4)
    q, _ = np.linalg.qr(g)
    sd = spectral_decompose(q)
    assert sd.unit_circle_flags.all()
    p = sd.unit_projector()
    assert max_abs(p @ p - p) <= 1e-6
    assert max_abs(p - np.eye(4)) <= 1e-6


def test_unit_projector_zero_without_unit_spectrum():
    sd = spectral_decompose(np.diag([0.5, 0.25]))
    assert max_abs(sd.unit_projector()) == 0.0
