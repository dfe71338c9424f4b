"""
Test script for the linear-algebra core.

Tests:
1. Seeded generators and axis-fixing rotations
2. Partial traces and Schmidt decompositions
3. Density-operator validation
4. Hermiticity, PSD and purity checks
5. Kronecker products, spectra and Haar moments

Run from project root: python api/tests/test_matcore.py
Or use pytest: pytest api/tests/test_matcore.py
"""

import sys
import traceback
from pathlib import Path

import numpy as np

# Add project root to path for imports
project_root = Path(__file__).parent.parent.parent
sys.path.insert(0, str(project_root))

from api.services import matcore
from api.services.errors import DimensionMismatch, NotHermitian, StateValidationError


def test_generators_and_rotations():
    """Seeds reproduce streams; rotations are orthogonal and fix (1,...,1)."""
    print("=" * 60)
    print("Testing Generators and Rotations")
    print("=" * 60)

    a = matcore.generator(42).standard_normal(5)
    b = matcore.generator(42).standard_normal(5)
    assert np.array_equal(a, b)
    print("✓ Same seed, same stream")

    assert np.array_equal(matcore.random_orthogonal_fixing_ones(9, 0), np.eye(9))
    assert all(np.array_equal(o, np.eye(3)) for o in matcore.rotation_family(3, 4, 0))
    print("✓ Seed 0 gives identities")

    for seed in range(1, 21):
        o = matcore.random_orthogonal_fixing_ones(5, seed)
        assert matcore.rotation_defect(o) < 1e-12
        assert not np.allclose(o, np.eye(5))
    print("✓ 20 random rotations are orthogonal with fixed all-ones axis")

    family = matcore.rotation_family(4, 3, 7)
    assert len(family) == 3
    assert not np.allclose(family[0], family[1])
    assert all(matcore.rotation_defect(o) < 1e-12 for o in family)
    print("✓ Rotation family draws distinct rotations from one stream")

    assert matcore.rotation_defect(np.eye(3)[[1, 0, 2]] * np.array([1, 1, -1])) > 1e-3
    print("✓ Defect flags a matrix that moves the all-ones axis")

    u = matcore.haar_unitary(4, 3)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-12)
    print("✓ Haar unitary is unitary")


def test_partial_trace_and_schmidt():
    """Partial traces of products and Schmidt coefficients of known states."""
    print("=" * 60)
    print("Testing Partial Trace and Schmidt Decomposition")
    print("=" * 60)

    sigma_a = matcore.random_density(2, 1)
    sigma_b = matcore.random_density(3, 2)
    product = matcore.kron(sigma_a, sigma_b)
    assert np.allclose(matcore.partial_trace(product, 'A', 2, 3), sigma_a, atol=1e-12)
    assert np.allclose(matcore.partial_trace(product, 'B', 2, 3), sigma_b, atol=1e-12)
    print("✓ Partial traces of a product state")

    try:
        matcore.partial_trace(np.eye(5), 'A', 2, 3)
        raise AssertionError("expected DimensionMismatch")
    except DimensionMismatch:
        print("✓ Wrong shape rejected")

    for d in (2, 3, 4):
        coefficients = matcore.schmidt_coefficients(matcore.maximally_entangled_vector(d), d, d)
        assert np.allclose(coefficients, np.full(d, 1 / np.sqrt(d)), atol=1e-12)
        assert abs(np.sum(coefficients ** 2) - 1) < 1e-12
    print("✓ Maximally entangled states have flat Schmidt coefficients")

    psi = np.kron(matcore.random_pure_state(3, 5), matcore.random_pure_state(3, 6))
    assert matcore.schmidt_rank(psi, 3, 3) == 1
    print("✓ Product state has Schmidt rank 1")

    phi = matcore.maximally_entangled_projector(3)
    assert abs(np.trace(phi) - 1) < 1e-12
    unnormalized = matcore.maximally_entangled_projector(3, normalized=False)
    assert abs(np.trace(unnormalized) - 3) < 1e-12
    print("✓ Normalized and unnormalized maximally entangled projectors")


def test_density_validation():
    """Each failed invariant is named."""
    print("=" * 60)
    print("Testing Density Validation")
    print("=" * 60)

    rho = matcore.random_density(4, 9)
    assert np.allclose(matcore.validate_density(rho, dim=4), rho)
    print("✓ Random density accepted")

    cases = {
        'trace': 0.9 * np.eye(4) / 4,
        'hermitian': np.eye(4) / 4 + 1e-3 * np.triu(np.ones((4, 4)), 1),
        'psd': np.diag([0.6, 0.6, -0.2, 0.0]),
        'shape': np.ones((2, 3)),
        'finite': np.full((2, 2), np.nan),
    }
    for invariant, bad in cases.items():
        try:
            matcore.validate_density(bad)
            raise AssertionError(f"expected {invariant} failure")
        except StateValidationError as e:
            assert e.invariant == invariant, (e.invariant, invariant)
            print(f"✓ '{invariant}' failure named")


def test_hermitian_and_psd():
    """Hermiticity check, PSD verdicts and the purity criterion."""
    print("=" * 60)
    print("Testing Hermitian and PSD Checks")
    print("=" * 60)

    try:
        matcore.hermitian_spectrum(np.array([[0, 1], [0, 0]], dtype=complex))
        raise AssertionError("expected NotHermitian")
    except NotHermitian:
        print("✓ Non-Hermitian operator rejected")

    assert matcore.is_psd(np.diag([1.0, 0.0, -1e-12]))
    assert not matcore.is_psd(np.diag([1.0, -1e-6]))
    print("✓ PSD verdict uses the global slack")

    spectrum = matcore.hermitian_spectrum(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(spectrum, [-1.0, 2.0, 3.0])
    assert abs(matcore.min_eigenvalue(np.diag([3.0, -1.0])) + 1.0) < 1e-12
    print("✓ Spectrum is ascending")

    assert matcore.purity_certifies_psd(np.eye(4) / 4)
    assert not matcore.purity_certifies_psd(matcore.projector(matcore.random_pure_state(4, 1)))
    print("✓ Purity criterion: maximally mixed certified, pure state not")

    a = matcore.random_density(3, 11)
    assert matcore.digest(a) == matcore.digest(a.copy())
    assert matcore.digest(a) != matcore.digest(a + 1e-15)
    print("✓ Digest is content-addressed")


def test_kron():
    """Kronecker product layout, associativity and trace."""
    print("=" * 60)
    print("Testing Kronecker Product")
    print("=" * 60)

    assert np.array_equal(matcore.kron(np.diag([1, 2]), np.diag([3, 4])), np.diag([3, 4, 6, 8]))
    print("✓ diag(1,2) ⊗ diag(3,4) = diag(3,4,6,8)")

    ket0_bra1 = np.array([[0, 1], [0, 0]])
    ket1_bra0 = np.array([[0, 0], [1, 0]])
    product = matcore.kron(ket0_bra1, ket1_bra0)
    expected = np.zeros((4, 4))
    expected[1, 2] = 1
    assert np.array_equal(product, expected)
    print("✓ |0⟩⟨1| ⊗ |1⟩⟨0| = |01⟩⟨10|")

    rng = matcore.generator(17)
    for _ in range(20):
        a, b, c = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for n in (2, 3, 2))
        left = matcore.kron(matcore.kron(a, b), c)
        right = matcore.kron(a, matcore.kron(b, c))
        assert np.max(np.abs(left - right)) < 1e-12
        assert np.isclose(np.trace(matcore.kron(a, b)), np.trace(a) * np.trace(b), rtol=1e-12, atol=1e-12)
    print("✓ Associative, Tr(A⊗B) = Tr A · Tr B")


def test_spectrum_identities():
    """Eigenvalues sum to the trace, squares to the Frobenius norm, and ignore unitary conjugation."""
    print("=" * 60)
    print("Testing Spectrum Identities")
    print("=" * 60)

    rng = matcore.generator(23)
    for n in (2, 5, 9, 16):
        for _ in range(10):
            g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            h = g + g.conj().T
            spectrum = matcore.hermitian_spectrum(h)
            frobenius = float(np.linalg.norm(h))
            assert np.all(np.diff(spectrum) >= 0)
            assert abs(np.sum(spectrum) - np.trace(h).real) <= 1e-9 * frobenius
            assert abs(np.sum(spectrum ** 2) - frobenius ** 2) <= 1e-9 * frobenius ** 2
            vectors = np.linalg.eigh(h)[1]
            rebuilt = vectors @ np.diag(spectrum) @ vectors.conj().T
            assert np.linalg.norm(rebuilt - h) <= 1e-9 * frobenius

            u = matcore.haar_unitary(n, rng)
            rotated = matcore.hermitian_spectrum(u @ h @ u.conj().T)
            assert np.max(np.abs(rotated - spectrum)) <= 1e-9 * frobenius
    print("✓ Σλ = Tr H, Σλ² = ‖H‖_F², V·diag(λ)·V† = H, spectrum invariant under U·H·U†")


def test_partial_trace_identities():
    """Reduced maximally entangled state and trace preservation."""
    print("=" * 60)
    print("Testing Partial Trace Identities")
    print("=" * 60)

    for d in (2, 3, 5):
        phi = matcore.maximally_entangled_projector(d)
        for keep in ('A', 'B'):
            assert np.max(np.abs(matcore.partial_trace(phi, keep, d, d) - np.eye(d) / d)) < 1e-12
    print("✓ Tr_B Φ = Tr_A Φ = I/d")

    rng = matcore.generator(29)
    for d_a, d_b in ((2, 3), (3, 2), (4, 4)):
        n = d_a * d_b
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        h = g + g.conj().T
        for keep in ('A', 'B'):
            reduced = matcore.partial_trace(h, keep, d_a, d_b)
            assert abs(np.trace(reduced) - np.trace(h)) < 1e-10
            assert np.max(np.abs(reduced - reduced.conj().T)) < 1e-10
    print("✓ Partial traces preserve trace and Hermiticity")


def test_haar_unitaries():
    """Unitarity, the first moment E|U₀₀|² = 1/d and the d=1 phase."""
    print("=" * 60)
    print("Testing Haar Unitaries")
    print("=" * 60)

    for d in (2, 3, 5):
        rng = matcore.generator(100 + d)
        samples = 2000
        total = 0.0
        for _ in range(samples):
            u = matcore.haar_unitary(d, rng)
            assert np.max(np.abs(u.conj().T @ u - np.eye(d))) < 1e-12
            total += abs(u[0, 0]) ** 2
        mean = total / samples
        assert abs(mean - 1 / d) < 0.03, (d, mean)
        print(f"✓ d={d}: mean |U₀₀|² = {mean:.4f} (1/d = {1 / d:.4f})")

    for seed in range(1, 11):
        u = matcore.haar_unitary(1, seed)
        assert u.shape == (1, 1) and abs(abs(u[0, 0]) - 1) < 1e-12
    assert not np.allclose(matcore.haar_unitary(1, 1), matcore.haar_unitary(1, 2))
    print("✓ d=1 draws unit-modulus phases")


def test_rotation_grid():
    """Axis-fixing rotations over 1000 seeds per size."""
    print("=" * 60)
    print("Testing Rotation Grid")
    print("=" * 60)

    for n in (2, 4, 9, 16, 25):
        worst = max(matcore.rotation_defect(matcore.random_orthogonal_fixing_ones(n, seed))
                    for seed in range(1, 1001))
        assert worst < 1e-12, (n, worst)
        print(f"✓ n={n}: worst defect {worst:.2e} over 1000 seeds")


def test_schmidt_examples():
    """Known coefficients, local-unitary invariance and the norm check."""
    print("=" * 60)
    print("Testing Schmidt Coefficients")
    print("=" * 60)

    psi = np.zeros(4, dtype=complex)
    psi[0], psi[3] = 2 / np.sqrt(5), 1 / np.sqrt(5)
    coefficients = matcore.schmidt_coefficients(psi, 2, 2)
    assert np.allclose(coefficients, [2 / np.sqrt(5), 1 / np.sqrt(5)], atol=1e-12)
    print("✓ (2|00⟩ + |11⟩)/√5 → (0.894, 0.447)")

    rng = matcore.generator(31)
    for d_a, d_b in ((2, 3), (3, 3), (4, 2)):
        for _ in range(10):
            state = matcore.random_pure_state(d_a * d_b, rng)
            local = matcore.kron(matcore.haar_unitary(d_a, rng), matcore.haar_unitary(d_b, rng))
            before = matcore.schmidt_coefficients(state, d_a, d_b)
            after = matcore.schmidt_coefficients(local @ state, d_a, d_b)
            assert np.max(np.abs(before - after)) < 1e-10
            assert np.all(np.diff(before) <= 1e-15)
    print("✓ Coefficients descending and invariant under U⊗V")

    try:
        matcore.schmidt_coefficients(2 * matcore.maximally_entangled_vector(2), 2, 2)
        raise AssertionError("expected StateValidationError")
    except StateValidationError as e:
        assert e.invariant == 'norm'
        print("✓ Unnormalized state rejected ('norm')")


def main():
    """Run all matcore tests."""
    print("\n" + "=" * 60)
    print("MATCORE TEST SUITE")
    print("=" * 60 + "\n")

    tests = {
        "Generators/Rotations": test_generators_and_rotations,
        "Partial Trace/Schmidt": test_partial_trace_and_schmidt,
        "Density Validation": test_density_validation,
        "Hermitian/PSD": test_hermitian_and_psd,
        "Kronecker": test_kron,
        "Spectrum": test_spectrum_identities,
        "Partial Trace": test_partial_trace_identities,
        "Haar": test_haar_unitaries,
        "Rotation Grid": test_rotation_grid,
        "Schmidt": test_schmidt_examples,
    }
    results = {}
    for name, test in tests.items():
        try:
            test()
            results[name] = True
        except Exception as e:
            print(f"✗ {name} failed: {e}")
            traceback.print_exc()
            results[name] = False

    print("\n" + "=" * 60)
    print("Test Summary")
    print("=" * 60)
    for name, ok in results.items():
        print(f"  {name + ':':24} {'✓ PASS' if ok else '✗ FAIL'}")

    if all(results.values()):
        print("\n🎉 All tests passed!")
        return True
    print("\n⚠ Some tests failed. Please review the errors above.")
    return False


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
