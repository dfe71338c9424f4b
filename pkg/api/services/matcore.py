"""
Dense complex linear-algebra substrate.

Everything above this module (frames, maps, witnesses, certification) works
on plain numpy arrays:
- ComplexMatrix / HermitianOperator: 2-D complex128 arrays
- PureStateVector: 1-D complex128 array of unit norm
- RngSeed: unsigned 64-bit integer feeding a Philox (counter-based) generator

Sampling functions take an explicit seed so every sequence is reproducible.
Seed 0 is reserved: rotations drawn with seed 0 are identities.
"""

import hashlib
import logging
from typing import Literal, Union

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import qr

from api.services.errors import (
    DimensionMismatch,
    NotHermitian,
    ParameterOutOfRange,
    StateValidationError,
)

logger = logging.getLogger(__name__)

ComplexMatrix = NDArray[np.complex128]
HermitianOperator = NDArray[np.complex128]
PureStateVector = NDArray[np.complex128]
RealMatrix = NDArray[np.float64]
RngSeed = int

# Global slack for every signed-eigenvalue verdict in the toolkit.
PSD_SLACK = 1e-9
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-12
STATE_TOL = 1e-9

RNG_NAME = "philox-4x64-v1"

Subsystem = Literal['A', 'B']


def generator(seed: Union[RngSeed, np.random.SeedSequence]) -> np.random.Generator:
    """
    Build the toolkit's counter-based generator for a seed.

    Args:
        seed: 64-bit unsigned integer (or a spawned SeedSequence)

    Returns:
        numpy Generator backed by Philox
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    if not 0 <= int(seed) < 2 ** 64:
        raise ParameterOutOfRange(f"Seed must be a 64-bit unsigned integer (got {seed})")
    return np.random.Generator(np.random.Philox(int(seed)))


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Kronecker product a ⊗ b."""
    return np.kron(np.asarray(a), np.asarray(b))


def check_hermitian(h: ComplexMatrix, tol: float = HERMITIAN_TOL) -> None:
    """
    Reject matrices that are not square and Hermitian.

    Args:
        h: Candidate operator
        tol: Allowed max |H - H†| relative to the largest entry magnitude

    Raises:
        NotHermitian: If the matrix is not square or not Hermitian
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NotHermitian(f"Operator must be square (got shape {h.shape})")
    scale = float(np.max(np.abs(h))) if h.size else 0.0
    deviation = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if deviation > tol * max(scale, np.finfo(float).tiny):
        raise NotHermitian(
            f"Operator is not Hermitian: max |H - H†| = {deviation:.3e} "
            f"(largest entry {scale:.3e})"
        )


def hermitian_spectrum(h: HermitianOperator) -> NDArray[np.float64]:
    """
    Real eigenvalues of a Hermitian operator in ascending order.

    Args:
        h: Hermitian operator

    Returns:
        Ascending real eigenvalues

    Raises:
        NotHermitian: If h fails the Hermiticity check
    """
    check_hermitian(h)
    h = np.asarray(h, dtype=complex)
    return np.linalg.eigvalsh((h + h.conj().T) / 2)


def min_eigenvalue(h: HermitianOperator) -> float:
    """Smallest eigenvalue of a Hermitian operator."""
    return float(hermitian_spectrum(h)[0])


def psd_threshold(h: HermitianOperator) -> float:
    """Eigenvalue floor -1e-9·max(1, ‖H‖_F) used for every PSD verdict."""
    return -PSD_SLACK * max(1.0, float(np.linalg.norm(h)))


def is_psd(h: HermitianOperator) -> bool:
    """True when the smallest eigenvalue clears the global PSD slack."""
    return min_eigenvalue(h) >= psd_threshold(h)


def purity_certifies_psd(h: HermitianOperator) -> bool:
    """
    Sufficient purity test for positivity.

    A trace-one Hermitian matrix on a D-dimensional space with
    Tr H² ≤ 1/(D-1) is positive semidefinite.

    Args:
        h: Hermitian operator with unit trace

    Returns:
        True when the purity criterion certifies positivity
    """
    check_hermitian(h)
    dim = h.shape[0]
    if dim < 2:
        return bool(np.real(np.trace(h)) >= 0)
    if abs(np.trace(h) - 1) > STATE_TOL:
        raise ParameterOutOfRange("Purity criterion needs a trace-one operator")
    purity = float(np.real(np.trace(h @ h)))
    return purity <= 1.0 / (dim - 1) + PSD_SLACK


def partial_trace(
    m: ComplexMatrix,
    keep: Subsystem,
    d_a: int,
    d_b: int
) -> ComplexMatrix:
    """
    Trace out one factor of a bipartite operator.

    Args:
        m: Square operator on the d_a·d_b space
        keep: 'A' to keep the first factor, 'B' to keep the second
        d_a: Dimension of the first factor
        d_b: Dimension of the second factor

    Returns:
        Reduced operator on the kept factor

    Raises:
        DimensionMismatch: If m is not (d_a·d_b) x (d_a·d_b)
    """
    m = np.asarray(m)
    side = d_a * d_b
    if m.shape != (side, side):
        raise DimensionMismatch(
            f"Partial trace expects a {side}x{side} operator (got {m.shape})"
        )
    blocks = m.reshape(d_a, d_b, d_a, d_b)
    if keep == 'A':
        return np.einsum('ijkj->ik', blocks)
    if keep == 'B':
        return np.einsum('ijil->jl', blocks)
    raise ValueError(f"keep must be 'A' or 'B' (got {keep!r})")


def haar_unitary(d: int, seed: Union[RngSeed, np.random.Generator]) -> ComplexMatrix:
    """
    Haar-random unitary from the QR decomposition of a Ginibre matrix.

    Args:
        d: Dimension (>= 1)
        seed: RngSeed, or a Generator to draw from directly

    Returns:
        d x d unitary
    """
    if d < 1:
        raise ParameterOutOfRange(f"Dimension must be >= 1 (got {d})")
    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)

    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def _orthogonal_fixing_ones(n: int, rng: np.random.Generator) -> RealMatrix:
    block_size = n - 1
    q, r = qr(rng.standard_normal((block_size, block_size)))
    q = q * np.sign(np.diag(r))

    embedded = np.eye(n)
    embedded[1:, 1:] = q

    # Householder reflection exchanging e_1 and (1,...,1)/√n
    v = np.zeros(n)
    v[0] = 1.0
    v -= np.full(n, 1.0 / np.sqrt(n))
    householder = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    return householder @ embedded @ householder


def random_orthogonal_fixing_ones(n: int, seed: RngSeed) -> RealMatrix:
    """
    Random real orthogonal matrix O with O·(1,...,1)ᵀ = (1,...,1)ᵀ.

    Seed 0 returns the identity.

    Args:
        n: Matrix side (>= 1)
        seed: RngSeed

    Returns:
        n x n real orthogonal matrix fixing the all-ones axis
    """
    if n < 1:
        raise ParameterOutOfRange(f"Rotation size must be >= 1 (got {n})")
    if n == 1 or seed == 0:
        return np.eye(n)
    return _orthogonal_fixing_ones(n, generator(seed))


def rotation_family(n: int, count: int, seed: RngSeed) -> list[RealMatrix]:
    """
    Draw `count` axis-fixing rotations from one seeded stream.

    Seed 0 returns `count` identities.
    """
    if n < 1 or count < 1:
        raise ParameterOutOfRange(f"Need n >= 1 and count >= 1 (got {n}, {count})")
    if n == 1 or seed == 0:
        return [np.eye(n) for _ in range(count)]
    rng = generator(seed)
    return [_orthogonal_fixing_ones(n, rng) for _ in range(count)]


def rotation_defect(o: RealMatrix) -> float:
    """max(‖OᵀO - I‖_max, ‖O·1 - 1‖_max); zero for a valid rotation."""
    o = np.asarray(o)
    if o.ndim != 2 or o.shape[0] != o.shape[1] or np.iscomplexobj(o) and np.any(o.imag):
        return float('inf')
    o = np.real(o)
    n = o.shape[0]
    orthogonality = np.max(np.abs(o.T @ o - np.eye(n)))
    axis = np.max(np.abs(o @ np.ones(n) - np.ones(n)))
    return float(max(orthogonality, axis))


def check_unit_norm(psi: PureStateVector, tol: float = NORM_TOL) -> None:
    """Raise StateValidationError('norm') when ‖psi‖ deviates from 1."""
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > tol:
        raise StateValidationError('norm', f"state norm {norm:.15g} is not 1")


def schmidt_coefficients(psi: PureStateVector, d_a: int, d_b: int) -> NDArray[np.float64]:
    """
    Schmidt coefficients √λ_i of a bipartite pure state, descending.

    The coefficients are the singular values of the d_a x d_b coefficient
    matrix; their squares sum to 1.

    Args:
        psi: Unit vector on the d_a·d_b space
        d_a: Dimension of the first factor
        d_b: Dimension of the second factor

    Raises:
        DimensionMismatch: If psi has the wrong length
        StateValidationError: If psi is not normalized
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != d_a * d_b:
        raise DimensionMismatch(f"State of length {psi.size} is not on a {d_a}x{d_b} space")
    check_unit_norm(psi)
    return np.linalg.svd(psi.reshape(d_a, d_b), compute_uv=False)


def schmidt_rank(psi: PureStateVector, d_a: int, d_b: int, tol: float = 1e-10) -> int:
    """Number of Schmidt coefficients above tol."""
    return int(np.sum(schmidt_coefficients(psi, d_a, d_b) > tol))


def maximally_entangled_vector(d: int, normalized: bool = True) -> PureStateVector:
    """Σ_i |ii⟩, divided by √d when normalized."""
    vec = np.eye(d, dtype=complex).ravel()
    return vec / np.sqrt(d) if normalized else vec


def maximally_entangled_projector(d: int, normalized: bool = True) -> HermitianOperator:
    """Φ_norm = |ψ⟩⟨ψ| for the normalized state, or Φ_unnorm = Σ_ij |ii⟩⟨jj|."""
    vec = maximally_entangled_vector(d, normalized)
    return np.outer(vec, vec.conj())


def projector(psi: PureStateVector) -> HermitianOperator:
    """|psi⟩⟨psi|."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def validate_density(
    rho: ComplexMatrix,
    dim: int | None = None,
    tol: float = STATE_TOL
) -> HermitianOperator:
    """
    Validate a density operator.

    Args:
        rho: Candidate density operator
        dim: Expected side length (optional)
        tol: Tolerance for Hermiticity, trace and positivity

    Returns:
        rho as a Hermitian-symmetrized complex array

    Raises:
        StateValidationError: With invariant 'shape', 'finite', 'hermitian',
            'trace' or 'psd'
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateValidationError('shape', f"density operator must be square (got {rho.shape})")
    if dim is not None and rho.shape[0] != dim:
        raise StateValidationError('shape', f"expected side {dim} (got {rho.shape[0]})")
    if not np.all(np.isfinite(rho)):
        raise StateValidationError('finite', "density operator has non-finite entries")

    deviation = float(np.max(np.abs(rho - rho.conj().T)))
    if deviation > tol:
        raise StateValidationError('hermitian', f"max |ρ - ρ†| = {deviation:.3e}")
    rho = (rho + rho.conj().T) / 2

    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > tol:
        raise StateValidationError('trace', f"trace is {trace:.12g}, expected 1")

    lowest = float(np.linalg.eigvalsh(rho)[0])
    if lowest < -tol:
        raise StateValidationError('psd', f"smallest eigenvalue is {lowest:.3e}")
    return rho


def random_pure_state(dim: int, seed: Union[RngSeed, np.random.Generator]) -> PureStateVector:
    """Haar-random unit vector."""
    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)
    vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return vec / np.linalg.norm(vec)


def random_density(
    dim: int,
    seed: Union[RngSeed, np.random.Generator],
    rank: int | None = None
) -> HermitianOperator:
    """
    Random density operator from the induced (Ginibre) ensemble.

    Args:
        dim: Side of the operator
        seed: RngSeed or Generator
        rank: Rank of the Ginibre factor (default: full rank)
    """
    rng = seed if isinstance(seed, np.random.Generator) else generator(seed)
    cols = rank or dim
    g = rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


def digest(matrix: ComplexMatrix) -> str:
    """SHA-256 of the canonical complex128 bytes of a matrix."""
    canonical = np.ascontiguousarray(np.asarray(matrix, dtype=np.complex128))
    sha = hashlib.sha256()
    sha.update(str(canonical.shape).encode())
    sha.update(canonical.tobytes())
    return sha.hexdigest()
