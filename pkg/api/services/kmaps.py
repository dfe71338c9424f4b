"""
k-positive maps built from SIC-POVMs, MUBs and the reduction family.

This service:
1. Builds maps from a verified frame and axis-fixing rotations
2. Applies them, their adjoints and their extensions I⊗Λ
3. Computes Choi matrices from matrix units
4. Recognizes maps that collapse to the reduction family
5. Probes k-positivity on random maximally entangled rank-k states

Maps are stored by parameters. Every operation goes through the d²×d²
superoperator S with vec(Λ(X)) = S·vec(X) (row-major vec), built on demand.
"""

import logging
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from api.models.frame_models import MubCollection, SicPovm
from api.models.map_models import KPositiveMap, ProbeResult
from api.services import frames, matcore
from api.services.errors import (
    DimensionMismatch,
    FrameFileError,
    InvalidRotation,
    OverlapViolation,
    ParameterOutOfRange,
)

logger = logging.getLogger(__name__)

ROTATION_TOL = 1e-10


# ============================================================================
# Constants
# ============================================================================

def sic_constant(d: int, k: int) -> float:
    """h = √((d⁴ + d³)/((kd - 1)(kd + k - 2)))."""
    denominator = (k * d - 1) * (k * d + k - 2)
    if denominator <= 0:
        raise ParameterOutOfRange(f"SIC constant undefined for d={d}, k={k}")
    return float(np.sqrt((d ** 4 + d ** 3) / denominator))


def mub_constant(d: int, k: int, L: int) -> float:
    """h_s = √(1/((dk - 1)(Lk - L + d - 1)))."""
    denominator = (d * k - 1) * (L * k - L + d - 1)
    if denominator <= 0:
        raise ParameterOutOfRange(f"MUB constant undefined for d={d}, k={k}, L={L}")
    return float(np.sqrt(1.0 / denominator))


def _check_order(d: int, k: int) -> None:
    if not 1 <= k <= d:
        raise ParameterOutOfRange(f"Positivity order k must satisfy 1 <= k <= d={d} (got {k})")
    if d < 2:
        raise ParameterOutOfRange("Maps need d >= 2")


def _check_rotation(o: np.ndarray, n: int) -> np.ndarray:
    o = np.asarray(o)
    if o.shape != (n, n):
        raise InvalidRotation(f"Rotation must be {n}x{n} (got {o.shape})")
    defect = matcore.rotation_defect(o)
    if defect > ROTATION_TOL:
        raise InvalidRotation(
            f"Rotation is not orthogonal with fixed all-ones axis (defect {defect:.3e})"
        )
    return np.real(o)


def _check_frame(frame: Union[SicPovm, MubCollection], d: int) -> None:
    if frame.d != d:
        raise DimensionMismatch(f"Frame dimension {frame.d} does not match d={d}")
    diagnostics = frames.verify_frames(frame)
    if not diagnostics.passed:
        raise OverlapViolation(
            f"Frame failed verification: {', '.join(diagnostics.failed)}",
            max_deviation=max(diagnostics.deviations.values())
        )


# ============================================================================
# Construction
# ============================================================================

def build_sic_map(
    d: int,
    k: int,
    sic: SicPovm,
    rotation: Optional[matcore.RealMatrix] = None,
    rotation_seed: Optional[int] = None
) -> KPositiveMap:
    """
    SIC-based k-positive map.

    Args:
        d: Local dimension
        k: Positivity order, 1 <= k <= d
        sic: Verified SIC on C^d
        rotation: d²×d² orthogonal matrix fixing (1,...,1) (default: identity)
        rotation_seed: Provenance of the rotation, if it was drawn

    Raises:
        ParameterOutOfRange: If k is out of range
        InvalidRotation: If the rotation is not admissible
    """
    _check_order(d, k)
    _check_frame(sic, d)
    n = d * d
    rotation = np.eye(n) if rotation is None else _check_rotation(rotation, n)
    return KPositiveMap(
        kind='sic', d=d, k=k, constant=sic_constant(d, k), frame=sic,
        rotations=rotation[None, :, :], rotation_seed=rotation_seed,
    )


def build_mub_map(
    d: int,
    k: int,
    mubs: MubCollection,
    rotations: Optional[Sequence[matcore.RealMatrix]] = None,
    rotation_seed: Optional[int] = None
) -> KPositiveMap:
    """
    MUB-based k-positive map.

    Args:
        d: Local dimension
        k: Positivity order, 1 <= k <= d
        mubs: Verified collection of L MUBs on C^d
        rotations: L matrices, d×d orthogonal fixing (1,...,1) (default: identities)
        rotation_seed: Provenance of the rotations, if they were drawn

    Raises:
        ParameterOutOfRange: If k is out of range
        InvalidRotation: If the rotation count differs from L or a rotation is not admissible
    """
    _check_order(d, k)
    _check_frame(mubs, d)
    L = mubs.L
    if rotations is None:
        rotations = [np.eye(d)] * L
    if len(rotations) != L:
        raise InvalidRotation(f"Expected {L} rotations, one per basis (got {len(rotations)})")
    checked = np.stack([_check_rotation(o, d) for o in rotations])
    return KPositiveMap(
        kind='mub', d=d, k=k, constant=mub_constant(d, k, L), frame=mubs,
        rotations=checked, rotation_seed=rotation_seed,
    )


def reduction_map(d: int, p: float) -> KPositiveMap:
    """
    Reduction family X ↦ Tr(X)·I - p·X.

    The map is k-positive for p <= 1/k; k records the largest such order (capped at d).

    Raises:
        ParameterOutOfRange: If p is outside (0, 1]
    """
    if not 0 < p <= 1:
        raise ParameterOutOfRange(f"Reduction parameter p must lie in (0, 1] (got {p})")
    if d < 1:
        raise ParameterOutOfRange(f"Dimension must be >= 1 (got {d})")
    k = min(d, int(np.floor(1.0 / p + 1e-12)))
    return KPositiveMap(kind='reduction', d=d, k=max(k, 1), constant=float(p))


def random_rotations(kind: str, frame: Union[SicPovm, MubCollection], seed: int) -> np.ndarray:
    """
    Seeded rotations for a frame map: one d²×d² matrix (SIC) or L d×d matrices (MUB).

    Seed 0 gives identities.
    """
    if kind == 'sic':
        return np.stack([matcore.random_orthogonal_fixing_ones(frame.d ** 2, seed)])
    return np.stack(matcore.rotation_family(frame.d, frame.L, seed))


def build_map(
    frame: Union[SicPovm, MubCollection],
    k: int,
    rotation_seed: int = 0
) -> KPositiveMap:
    """Frame map of order k with rotations drawn from `rotation_seed`."""
    rotations = random_rotations(frame.kind, frame, rotation_seed)
    if isinstance(frame, SicPovm):
        return build_sic_map(frame.d, k, frame, rotations[0], rotation_seed)
    return build_mub_map(frame.d, k, frame, list(rotations), rotation_seed)


# ============================================================================
# Action
# ============================================================================

def _frame_terms(map_: KPositiveMap) -> Tuple[float, np.ndarray, np.ndarray]:
    """(α, effects E (n, d, d), coupling C (n, n)) of a frame map."""
    d = map_.d
    if map_.kind == 'sic':
        h = map_.constant
        return (h + d) / d ** 2, np.asarray(map_.frame.effects), h * map_.rotations[0]

    mubs = map_.frame
    h_s = map_.constant
    n = mubs.L * d
    coupling = np.zeros((n, n))
    for alpha, o in enumerate(map_.rotations):
        block = slice(alpha * d, (alpha + 1) * d)
        coupling[block, block] = h_s * o
    effects = mubs.projectors.reshape(n, d, d)
    return (1 + mubs.L * h_s) / d, effects, coupling


def superoperator(map_: KPositiveMap) -> matcore.ComplexMatrix:
    """
    Matrix S of the map acting on row-major vectorized d×d matrices.

    Compute it once and pass it around when applying a map many times.
    """
    d = map_.d
    vec_identity = np.eye(d, dtype=complex).ravel()
    if map_.kind == 'reduction':
        return np.outer(vec_identity, vec_identity) - map_.constant * np.eye(d * d)

    alpha, effects, coupling = _frame_terms(map_)
    n = effects.shape[0]
    # Tr(E_l X) = vec(E_lᵀ)·vec(X)
    outputs = effects.reshape(n, d * d)
    readouts = np.transpose(effects, (0, 2, 1)).reshape(n, d * d)
    return alpha * np.outer(vec_identity, vec_identity) - outputs.T @ coupling @ readouts


def _check_square(x: np.ndarray, d: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape != (d, d):
        raise DimensionMismatch(f"{what} must be {d}x{d} (got {x.shape})")
    return x


def apply_map(
    map_: KPositiveMap,
    x: matcore.ComplexMatrix,
    superop: Optional[matcore.ComplexMatrix] = None
) -> matcore.ComplexMatrix:
    """
    Λ(X) for a d×d matrix.

    Args:
        map_: KPositiveMap
        x: d×d matrix
        superop: Precomputed superoperator(map_), optional

    Raises:
        DimensionMismatch: If x is not d×d
    """
    d = map_.d
    x = _check_square(x, d, "Input")
    s = superoperator(map_) if superop is None else superop
    return (s @ x.ravel()).reshape(d, d)


def adjoint_apply(
    map_: KPositiveMap,
    x: matcore.ComplexMatrix,
    superop: Optional[matcore.ComplexMatrix] = None
) -> matcore.ComplexMatrix:
    """
    Λ†(X), defined by Tr(A† Λ(B)) = Tr(Λ†(A)† B).

    Raises:
        DimensionMismatch: If x is not d×d
    """
    d = map_.d
    x = _check_square(x, d, "Input")
    s = superoperator(map_) if superop is None else superop
    return (s.conj().T @ x.ravel()).reshape(d, d)


def apply_extended(
    map_: KPositiveMap,
    rho: matcore.ComplexMatrix,
    superop: Optional[matcore.ComplexMatrix] = None
) -> matcore.HermitianOperator:
    """
    (I⊗Λ)(ρ), applying Λ to every d×d block of the second factor.

    Raises:
        DimensionMismatch: If rho is not d²×d²
    """
    d = map_.d
    rho = _check_square(rho, d * d, "Bipartite operator")
    s = superoperator(map_) if superop is None else superop

    # rho[(i,a),(j,b)] -> blocks[(i,j), (a,b)]
    blocks = rho.reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    mapped = (blocks @ s.T).reshape(d, d, d, d).transpose(0, 2, 1, 3).reshape(d * d, d * d)
    return mapped


def choi(map_: KPositiveMap) -> matcore.HermitianOperator:
    """Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|), the Choi matrix from matrix units."""
    d = map_.d
    return apply_extended(map_, matcore.maximally_entangled_projector(d, normalized=False))


def frame_operator(map_: KPositiveMap) -> matcore.HermitianOperator:
    """
    Σ_{g,l} O_gl·conj(E_l)⊗E_g of a frame map, without the constant h or h_s.

    For MUB maps this sums over every basis with its own rotation.
    """
    if map_.kind == 'reduction':
        raise ParameterOutOfRange("The reduction family has no frame operator")
    d = map_.d
    _, effects, coupling = _frame_terms(map_)
    # Σ_g (Σ_l O_gl conj(E_l)) ⊗ E_g
    mixed = np.einsum('gl,lpq->gpq', coupling / map_.constant, effects.conj())
    return np.einsum('gpq,grs->prqs', mixed, effects).reshape(d * d, d * d)


def closed_form_choi(map_: KPositiveMap) -> matcore.HermitianOperator:
    """
    Choi matrix from the frame expansion
    α·I⊗I - c·Σ_{g,l} O_gl·conj(E_l)⊗E_g (reduction: I⊗I - p·Σ_ij |ii⟩⟨jj|).
    """
    d = map_.d
    if map_.kind == 'reduction':
        return (np.eye(d * d) - map_.constant
                * matcore.maximally_entangled_projector(d, normalized=False))

    alpha, _, _ = _frame_terms(map_)
    return alpha * np.eye(d * d) - map_.constant * frame_operator(map_)


# ============================================================================
# Reduction-family form and probes
# ============================================================================

def as_reduction_family(map_: KPositiveMap) -> Tuple[float, float]:
    """
    (scale, p) with Λ(X) = scale·(Tr(X)·I - p·X).

    Holds for reduction maps, SIC maps with identity rotation (2-design
    contraction Σ_l Tr(Y P_l) P_l = Y/(d(d+1)) for traceless Y) and maps from
    complete MUB sets with identity rotations.

    Raises:
        ParameterOutOfRange: If the map is not of that form
    """
    d = map_.d
    if map_.kind == 'reduction':
        return 1.0, map_.constant
    if not map_.identity_rotations:
        raise ParameterOutOfRange("Rotated frame maps are not in the reduction family")

    if map_.kind == 'sic':
        c = map_.constant / (d * (d + 1))
    elif map_.frame.complete:
        c = map_.constant
    else:
        raise ParameterOutOfRange(
            f"MUB maps reduce only for complete sets (L={map_.frame.L}, d={d})"
        )
    return (1 + c) / d, c * d / (1 + c)


def max_entangled_probe(
    d: int,
    k: int,
    seed: Union[matcore.RngSeed, np.random.Generator]
) -> matcore.PureStateVector:
    """(U⊗V)·Σ_{i<k}|ii⟩/√k with independent Haar U, V."""
    rng = seed if isinstance(seed, np.random.Generator) else matcore.generator(seed)
    core = np.zeros((d, d), dtype=complex)
    core[np.arange(k), np.arange(k)] = 1.0 / np.sqrt(k)
    u = matcore.haar_unitary(d, rng)
    v = matcore.haar_unitary(d, rng)
    # (U⊗V)vec(M) = vec(U M Vᵀ) for row-major vec
    return (u @ core @ v.T).ravel()


def probe_k_positivity(
    map_: KPositiveMap,
    k: Optional[int] = None,
    trials: int = 200,
    seed: matcore.RngSeed = 1
) -> ProbeResult:
    """
    Sampled k-positivity check.

    For each trial, draws a maximally entangled rank-k probe ψ and records
    the smallest eigenvalue and the purity of (I⊗Λ)(|ψ⟩⟨ψ|).

    Args:
        map_: KPositiveMap
        k: Probe Schmidt rank (default: the map's order)
        trials: Number of probes
        seed: RngSeed for the per-trial seed stream

    Raises:
        ParameterOutOfRange: If k or trials is out of range
    """
    d = map_.d
    k = map_.k if k is None else k
    if not 1 <= k <= d:
        raise ParameterOutOfRange(f"Probe rank must satisfy 1 <= k <= {d} (got {k})")
    if trials < 1:
        raise ParameterOutOfRange(f"Need at least one trial (got {trials})")

    s = superoperator(map_)
    trial_seeds = [int(x) for x in matcore.generator(seed).integers(1, 2 ** 62, size=trials)]
    min_eigenvalue = float('inf')
    max_purity = 0.0
    for trial_seed in trial_seeds:
        psi = max_entangled_probe(d, k, trial_seed)
        out = apply_extended(map_, matcore.projector(psi), superop=s)
        out = (out + out.conj().T) / 2
        min_eigenvalue = min(min_eigenvalue, float(np.linalg.eigvalsh(out)[0]))
        max_purity = max(max_purity, float(np.real(np.trace(out @ out))))

    result = ProbeResult(
        kind=map_.kind, d=d, k=k, trials=trials,
        min_eigenvalue=min_eigenvalue, max_purity=max_purity,
        purity_bound=1.0 / (d * k - 1) if d * k > 1 else float('inf'),
        seeds=trial_seeds,
    )
    logger.info(
        "Probe %s d=%d k=%d: min eigenvalue %.3e, max purity %.6f (bound %.6f)",
        map_.kind, d, k, result.min_eigenvalue, result.max_purity, result.purity_bound
    )
    return result


# ============================================================================
# Serialization
# ============================================================================

def map_from_json(
    doc: Dict[str, Any],
    frame: Optional[Union[SicPovm, MubCollection]] = None
) -> KPositiveMap:
    """
    Rebuild a map from KPositiveMap.to_json() output.

    Args:
        doc: Serialized map
        frame: The frame the map was built from (checked against frame_ref)

    Raises:
        FrameFileError: If the document is malformed or the frame does not match
    """
    try:
        kind, d, k, constant = doc["kind"], int(doc["d"]), int(doc["k"]), float(doc["constant"])
    except (KeyError, TypeError, ValueError) as e:
        raise FrameFileError(f"bad map document: {e}")

    if kind == 'reduction':
        return reduction_map(d, constant)
    if frame is None or frames.frame_digest(frame) != doc.get("frame_ref"):
        raise FrameFileError("map document refers to a different frame")

    rotations = doc.get("rotations")
    seed = doc.get("rotation_seed")
    if kind == 'sic':
        rotation = None if rotations is None else np.asarray(rotations[0], dtype=float)
        return build_sic_map(d, k, frame, rotation, seed)
    if kind == 'mub':
        rotation_list = None if rotations is None else [np.asarray(o, dtype=float) for o in rotations]
        return build_mub_map(d, k, frame, rotation_list, seed)
    raise FrameFileError(f"unknown map kind {kind!r}")
