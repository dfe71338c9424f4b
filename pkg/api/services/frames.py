"""
SIC-POVM and MUB construction, verification and file I/O.

This service:
1. Builds Weyl-Heisenberg SICs from a fiducial vector
2. Searches fiducials numerically by minimizing the frame potential
3. Builds complete MUB sets in prime dimension
4. Verifies frames and evaluates the 2-design identities maps rely on
5. Reads and writes the JSON frame-file format

Frame file format:
    {"kind": "sic" | "mub", "d": int,
     "vectors": [[{"re": x, "im": y}, ...], ...],
     "bases": [[0, 1, ...], ...]      (MUB only, optional)
     "fiducial": [{"re": x, "im": y}, ...]   (SIC only, optional)}
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize

from api.models.frame_models import FrameDiagnostics, MubCollection, SicPovm
from api.services import matcore
from api.services.errors import (
    DimensionMismatch,
    FrameFileError,
    NotPrime,
    OverlapViolation,
    ParameterOutOfRange,
    SearchFailed,
)

logger = logging.getLogger(__name__)

Frame = Union[SicPovm, MubCollection]

SIC_TOL = 1e-8
IDENTITY_TOL = 1e-10
DEFAULT_RESTARTS = 64
NATIVE_SIC_MAX_D = 8


# ============================================================================
# Weyl-Heisenberg SICs
# ============================================================================

def weyl_heisenberg_displacements(d: int) -> np.ndarray:
    """
    Displacement operators X^a Z^b for a, b in 0..d-1.

    X is the cyclic shift X|j⟩ = |j+1⟩ and Z = diag(ω^j) with ω = e^{2πi/d}.
    Index a·d + b holds X^a Z^b.

    Returns:
        Array of shape (d², d, d)
    """
    shift = np.roll(np.eye(d, dtype=complex), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    ops = []
    for a in range(d):
        shift_a = np.linalg.matrix_power(shift, a)
        for b in range(d):
            ops.append(shift_a @ np.linalg.matrix_power(clock, b))
    return np.stack(ops)


def _sic_overlap_deviation(vectors: np.ndarray) -> float:
    d = vectors.shape[1]
    gram = np.abs(vectors.conj() @ vectors.T) ** 2
    off_diagonal = ~np.eye(len(vectors), dtype=bool)
    if not off_diagonal.any():
        return 0.0
    return float(np.max(np.abs(gram[off_diagonal] - 1.0 / (d + 1))))


def wh_sic_from_fiducial(fiducial: matcore.PureStateVector) -> SicPovm:
    """
    Weyl-Heisenberg orbit of a fiducial vector.

    Args:
        fiducial: Unit vector of dimension d

    Returns:
        SicPovm with effects (X^a Z^b)|φ⟩⟨φ|(X^a Z^b)†/d

    Raises:
        StateValidationError: If the fiducial is not normalized
        OverlapViolation: If some pairwise overlap misses 1/(d+1) by > 1e-8
    """
    fiducial = np.asarray(fiducial, dtype=complex).ravel()
    matcore.check_unit_norm(fiducial, tol=IDENTITY_TOL)
    d = fiducial.size

    vectors = weyl_heisenberg_displacements(d) @ fiducial
    deviation = _sic_overlap_deviation(vectors)
    if deviation > SIC_TOL:
        raise OverlapViolation(
            f"Fiducial does not generate a SIC in d={d}: "
            f"max |overlap² - 1/(d+1)| = {deviation:.3e}",
            max_deviation=deviation
        )

    return SicPovm(
        d=d,
        vectors=vectors,
        effects=np.einsum('ip,iq->ipq', vectors, vectors.conj()) / d,
        fiducial=fiducial,
    )


def _overlap_residuals(x: np.ndarray, ops: np.ndarray, d: int) -> Tuple[float, np.ndarray]:
    """Frame-potential excess Σ (|⟨ψ|D|ψ⟩|²/‖ψ‖⁴ - 1/(d+1))² and its real gradient."""
    psi = x[:d] + 1j * x[d:]
    norm2 = float(np.real(np.vdot(psi, psi)))

    d_psi = ops @ psi
    d_dag_psi = np.conj(np.transpose(ops, (0, 2, 1))) @ psi
    c = d_psi @ psi.conj()
    abs2 = np.abs(c) ** 2
    residual = abs2 / norm2 ** 2 - 1.0 / (d + 1)

    # Wirtinger derivative with respect to conj(ψ)
    d_abs2 = c.conj()[:, None] * d_psi + c[:, None] * d_dag_psi
    grad_p = d_abs2 / norm2 ** 2 - 2.0 * abs2[:, None] * psi[None, :] / norm2 ** 3
    wirtinger = np.sum(2.0 * residual[:, None] * grad_p, axis=0)

    value = float(np.sum(residual ** 2))
    return value, 2.0 * np.concatenate([wirtinger.real, wirtinger.imag])


def wh_frame_potential(psi: matcore.PureStateVector) -> float:
    """
    Σ_{(a,b)≠(0,0)} |⟨ψ|X^a Z^b|ψ⟩|⁴ for a unit vector ψ.

    The minimum (d-1)/(d+1) is reached exactly by SIC fiducials.
    """
    psi = np.asarray(psi, dtype=complex).ravel()
    ops = weyl_heisenberg_displacements(psi.size)[1:]
    c = (ops @ psi) @ psi.conj()
    return float(np.sum(np.abs(c) ** 4))


def _canonical_phase(psi: np.ndarray) -> np.ndarray:
    psi = psi / np.linalg.norm(psi)
    pivot = psi[int(np.argmax(np.abs(psi)))]
    return psi * (abs(pivot) / pivot)


def find_sic_fiducial(
    d: int,
    seed: matcore.RngSeed = 0,
    restarts: int = DEFAULT_RESTARTS
) -> matcore.PureStateVector:
    """
    Numerical search for a Weyl-Heisenberg SIC fiducial.

    Each restart draws a random start from its own child seed and runs BFGS
    with the analytic gradient on the frame-potential excess
    Σ (|⟨ψ|D_ab|ψ⟩|² - 1/(d+1))², which equals the frame potential minus its
    lower bound (d-1)/(d+1) for unit vectors. The first candidate whose orbit
    passes verification within 1e-8 is returned.

    Args:
        d: Dimension (>= 2)
        seed: RngSeed for the restart sequence
        restarts: Restart budget

    Returns:
        Unit fiducial vector (phase fixed on its largest component)

    Raises:
        SearchFailed: After the restart budget, carrying the best residual
    """
    if d < 2:
        raise ParameterOutOfRange(f"Fiducial search needs d >= 2 (got {d})")
    if restarts < 1:
        raise ParameterOutOfRange(f"Restart budget must be >= 1 (got {restarts})")

    ops = weyl_heisenberg_displacements(d)[1:]
    best_residual = float('inf')

    for attempt, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = matcore.generator(child)
        x = rng.standard_normal(2 * d)

        # A fresh BFGS run from the previous point refines slow tails
        for _ in range(3):
            result = minimize(
                _overlap_residuals, x, args=(ops, d), jac=True, method='BFGS',
                options={'gtol': 1e-14, 'maxiter': 5000}
            )
            x = result.x
            if result.fun < 1e-24:
                break

        psi = _canonical_phase(x[:d] + 1j * x[d:])
        residual = _sic_overlap_deviation(weyl_heisenberg_displacements(d) @ psi)
        best_residual = min(best_residual, residual)
        logger.debug("SIC search d=%d restart %d: residual %.3e", d, attempt, residual)

        if residual <= SIC_TOL:
            logger.info("Found SIC fiducial for d=%d after %d restart(s)", d, attempt + 1)
            return psi

    raise SearchFailed(
        f"No SIC fiducial found for d={d} in {restarts} restart(s); "
        f"best residual {best_residual:.3e}",
        best_residual=best_residual
    )


# ============================================================================
# Mutually unbiased bases
# ============================================================================

def is_prime(n: int) -> bool:
    """Trial-division primality test."""
    if n < 2:
        return False
    return all(n % p for p in range(2, int(n ** 0.5) + 1))


def mub_prime(d: int) -> MubCollection:
    """
    Complete set of d + 1 MUBs in prime dimension.

    The computational basis comes first. For odd prime d, basis α holds the
    vectors with amplitudes ω^{αk² + jk}/√d; for d = 2 the remaining bases are
    the eigenbases of Pauli X and Y.

    Raises:
        NotPrime: If d is not prime
    """
    if not is_prime(d):
        raise NotPrime(f"Native MUB construction needs a prime dimension (got {d})")

    bases = [np.eye(d, dtype=complex)]
    if d == 2:
        bases.append(np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2))
        bases.append(np.array([[1, 1j], [1, -1j]], dtype=complex) / np.sqrt(2))
    else:
        k = np.arange(d)
        omega = np.exp(2j * np.pi / d)
        for alpha in range(d):
            basis = np.array([
                omega ** ((alpha * k * k + j * k) % d) for j in range(d)
            ]) / np.sqrt(d)
            bases.append(basis)

    return MubCollection(d=d, bases=np.stack(bases))


# ============================================================================
# Verification and 2-design identities
# ============================================================================

def verify_frames(obj: Frame, tol: float = SIC_TOL) -> FrameDiagnostics:
    """
    Worst-case deviations of every frame invariant.

    SIC: completeness ‖Σ P_i - I‖_F, trace max |Tr P_i - 1/d|, overlap
    max |d²·Tr(P_j P_k) - 1/(d+1)| over j ≠ k, count |#effects - d²|.
    MUB: orthonormality within each basis, unbiasedness
    max ||⟨e|f⟩|² - 1/d| across bases, count max(0, L - d - 1).

    Args:
        obj: SicPovm or MubCollection
        tol: Pass/fail tolerance

    Returns:
        FrameDiagnostics (never raises on a failed invariant)
    """
    d = obj.d
    if isinstance(obj, SicPovm):
        effects = np.asarray(obj.effects)
        n = effects.shape[0]
        pair_traces = np.real(np.einsum('ipq,jqp->ij', effects, effects))
        off_diagonal = ~np.eye(n, dtype=bool)
        overlap = (
            float(np.max(np.abs(d * d * pair_traces[off_diagonal] - 1.0 / (d + 1))))
            if off_diagonal.any() else 0.0
        )
        deviations = {
            'completeness': float(np.linalg.norm(effects.sum(axis=0) - np.eye(d))),
            'trace': float(np.max(np.abs(np.einsum('ipp->i', effects) - 1.0 / d))),
            'overlap': overlap,
            'count': float(abs(n - d * d)),
        }
        size = n
    else:
        bases = np.asarray(obj.bases)
        L = bases.shape[0]
        orthonormality = max(
            float(np.max(np.abs(basis.conj() @ basis.T - np.eye(d)))) for basis in bases
        )
        unbiased = 0.0
        for m in range(L):
            for m2 in range(m + 1, L):
                cross = np.abs(bases[m].conj() @ bases[m2].T) ** 2
                unbiased = max(unbiased, float(np.max(np.abs(cross - 1.0 / d))))
        deviations = {
            'orthonormality': orthonormality,
            'unbiasedness': unbiased,
            'count': float(max(0, L - d - 1)),
        }
        size = L

    passed = all(value <= tol for value in deviations.values())
    logger.debug("Verified %s frame d=%d: %s", obj.kind, d, deviations)
    return FrameDiagnostics(
        kind=obj.kind, d=d, size=size, tol=tol, deviations=deviations, passed=passed
    )


def _check_state_dim(rho: np.ndarray, d: int) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d, d):
        raise DimensionMismatch(f"State of shape {rho.shape} does not match frame dimension {d}")
    return rho


def sic_purity_identity(rho: matcore.ComplexMatrix, sic: SicPovm) -> Tuple[float, float]:
    """
    Both sides of Σ_j |Tr(P_j ρ)|² = (Tr ρ² + 1)/(d + d²).

    Returns:
        (lhs, rhs)
    """
    d = sic.d
    rho = _check_state_dim(rho, d)
    probabilities = np.einsum('ipq,qp->i', sic.effects, rho)
    lhs = float(np.sum(np.abs(probabilities) ** 2))
    rhs = float((np.real(np.trace(rho @ rho)) + 1.0) / (d + d * d))
    return lhs, rhs


def mub_purity_bound(rho: matcore.ComplexMatrix, mubs: MubCollection) -> Tuple[float, float]:
    """
    Both sides of Σ_α Σ_i |Tr(ρ Q_i^(α))|² ≤ Tr ρ² + (L-1)/d.

    Equality holds for complete sets.

    Returns:
        (lhs, bound)
    """
    d = mubs.d
    rho = _check_state_dim(rho, d)
    probabilities = np.einsum('aip,pq,aiq->ai', mubs.bases.conj(), rho, mubs.bases)
    lhs = float(np.sum(np.abs(probabilities) ** 2))
    bound = float(np.real(np.trace(rho @ rho)) + (mubs.L - 1) / d)
    return lhs, bound


def offdiag_frame_sums(frame: Frame, i: int, j: int) -> float:
    """
    Squared off-diagonal frame sums.

    SIC: Σ_l |Tr(P_l |i⟩⟨j|)|², which equals 1/(d(d+1)) for every SIC
    (and is therefore below 1/d²).
    MUB: Σ_α Σ_l |Tr(Q_l^(α) |i⟩⟨j|)|², bounded by L/d.

    Args:
        frame: SicPovm or MubCollection
        i, j: Distinct computational-basis indices

    Raises:
        ParameterOutOfRange: If i == j or an index is out of range
    """
    d = frame.d
    if i == j:
        raise ParameterOutOfRange("Off-diagonal sums need i != j")
    if not (0 <= i < d and 0 <= j < d):
        raise ParameterOutOfRange(f"Indices must lie in 0..{d - 1} (got {i}, {j})")

    # Tr(A |i⟩⟨j|) = A[j, i]
    if isinstance(frame, SicPovm):
        return float(np.sum(np.abs(frame.effects[:, j, i]) ** 2))
    return float(np.sum(np.abs(frame.projectors[:, :, j, i]) ** 2))


def frame_digest(frame: Frame) -> str:
    """SHA-256 over the frame kind, dimension and canonical vector bytes."""
    vectors = frame.vectors if isinstance(frame, SicPovm) else frame.bases
    sha = hashlib.sha256()
    sha.update(f"{frame.kind}:{frame.d}:".encode())
    sha.update(np.ascontiguousarray(vectors, dtype=np.complex128).tobytes())
    return sha.hexdigest()


# ============================================================================
# Frame files
# ============================================================================

def _encode_vector(vec: np.ndarray) -> List[Dict[str, float]]:
    return [{"re": float(z.real), "im": float(z.imag)} for z in np.asarray(vec).ravel()]


def _decode_vector(entries: Any, d: int, path: Optional[str]) -> np.ndarray:
    if not isinstance(entries, list) or len(entries) != d:
        raise FrameFileError(f"every vector must list {d} entries", path)
    try:
        return np.array([complex(float(e["re"]), float(e["im"])) for e in entries])
    except (KeyError, TypeError, ValueError) as e:
        raise FrameFileError(f"bad complex entry: {e}", path)


def frame_to_json(frame: Frame) -> Dict[str, Any]:
    """Frame-file document for a frame (floats keep their exact repr)."""
    if isinstance(frame, SicPovm):
        doc: Dict[str, Any] = {
            "kind": "sic",
            "d": frame.d,
            "vectors": [_encode_vector(v) for v in frame.vectors],
        }
        if frame.fiducial is not None:
            doc["fiducial"] = _encode_vector(frame.fiducial)
        return doc

    d = frame.d
    return {
        "kind": "mub",
        "d": d,
        "vectors": [_encode_vector(v) for basis in frame.bases for v in basis],
        "bases": [list(range(a * d, (a + 1) * d)) for a in range(frame.L)],
    }


def frame_from_json(
    doc: Dict[str, Any],
    tol: float = SIC_TOL,
    path: Optional[str] = None
) -> Frame:
    """
    Parse and verify a frame-file document.

    Args:
        doc: Parsed JSON document
        tol: Verification tolerance
        path: Source path, for error messages

    Raises:
        FrameFileError: If the document is malformed
        OverlapViolation: If the decoded frame fails verification
    """
    if not isinstance(doc, dict):
        raise FrameFileError("frame file must hold a JSON object", path)
    kind = doc.get("kind")
    d = doc.get("d")
    if kind not in ("sic", "mub") or not isinstance(d, int) or d < 1:
        raise FrameFileError("frame file needs 'kind' in {sic, mub} and a positive integer 'd'", path)
    raw_vectors = doc.get("vectors")
    if not isinstance(raw_vectors, list) or not raw_vectors:
        raise FrameFileError("frame file needs a non-empty 'vectors' list", path)
    vectors = np.stack([_decode_vector(v, d, path) for v in raw_vectors])

    if kind == "sic":
        frame: Frame = SicPovm(
            d=d,
            vectors=vectors,
            effects=np.einsum('ip,iq->ipq', vectors, vectors.conj()) / d,
            fiducial=_decode_vector(doc["fiducial"], d, path) if "fiducial" in doc else None,
        )
    else:
        groups = doc.get("bases") or [
            list(range(a * d, (a + 1) * d)) for a in range(len(vectors) // d)
        ]
        try:
            bases = np.stack([vectors[list(group)] for group in groups])
        except (IndexError, TypeError, ValueError) as e:
            raise FrameFileError(f"bad 'bases' grouping: {e}", path)
        if bases.shape[1:] != (d, d):
            raise FrameFileError(f"every basis must hold {d} vectors", path)
        frame = MubCollection(d=d, bases=bases)

    diagnostics = verify_frames(frame, tol)
    if not diagnostics.passed:
        worst = max(diagnostics.deviations.values())
        raise OverlapViolation(
            f"{kind} frame (d={d}) failed verification: {', '.join(diagnostics.failed)}",
            max_deviation=worst
        )
    return frame


def save_frame(frame: Frame, path: Union[str, Path]) -> Path:
    """Write a frame file; raises OSError when the path is unwritable."""
    path = Path(path)
    path.write_text(json.dumps(frame_to_json(frame), indent=1))
    return path


def load_frame(path: Union[str, Path], tol: float = SIC_TOL) -> Frame:
    """
    Read and verify a frame file.

    Raises:
        FrameFileError: If the file cannot be read or parsed
        OverlapViolation: If the frame fails verification
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except OSError as e:
        raise FrameFileError(f"cannot read frame file: {e}", str(path))
    except json.JSONDecodeError as e:
        raise FrameFileError(f"malformed JSON: {e}", str(path))
    return frame_from_json(doc, tol, str(path))
