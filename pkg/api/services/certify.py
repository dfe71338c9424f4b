"""
Schmidt-number certification.

This service:
1. Computes the fidelity bound F = Tr(ρ Φ_norm) (ρ ∈ S_k implies F <= k/d)
2. Collects witness and k-map spectrum evidence for every order k
3. Bounds the Frobenius distance from ρ to S_k from below (witnesses) and
   above (sampled S_k states)
4. Builds isotropic states and sweep tables

Every verdict uses the global 1e-9 slack from matcore.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from api.models.frame_models import MubCollection, SicPovm
from api.models.map_models import WitnessOperator
from api.models.report_models import (
    CertificateReport,
    CertificationStrategy,
    DistanceBound,
    Evidence,
    METHOD_ORDER,
    SkSample,
    SweepRow,
    sn_verdict,
)
from api.services import frames, kmaps, matcore, witness
from api.services.errors import (
    DimensionMismatch,
    FramesUnavailable,
    ParameterOutOfRange,
)
from api.services.frame_store import FrameStore

logger = logging.getLogger(__name__)

SLACK = matcore.PSD_SLACK

Frame = Union[SicPovm, MubCollection]


def local_dimension(rho: matcore.ComplexMatrix) -> int:
    """d for an operator on C^d ⊗ C^d."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DimensionMismatch(f"Operator must be square (got shape {rho.shape})")
    d = math.isqrt(rho.shape[0])
    if d * d != rho.shape[0]:
        raise DimensionMismatch(f"Side {rho.shape[0]} is not a square d·d")
    return d


# ============================================================================
# Fidelity bound
# ============================================================================

def fidelity_bound(rho: matcore.ComplexMatrix) -> Tuple[float, int]:
    """
    Fidelity with the normalized maximally entangled state and the SN bound it gives.

    F > k/d certifies SN >= k + 1; a fidelity exactly at k/d does not.

    Returns:
        (F, sn_lower) with sn_lower = max(1, ⌈d·F⌉) off the boundary

    Raises:
        DimensionMismatch: If rho is not on a d⊗d space
    """
    d = local_dimension(rho)
    vec = matcore.maximally_entangled_vector(d)
    fidelity = float(np.real(np.vdot(vec, np.asarray(rho, dtype=complex) @ vec)))
    sn_lower = max(1, min(d, math.ceil(d * fidelity - d * SLACK)))
    return fidelity, sn_lower


def fidelity_certifies(fidelity: float, d: int, k: int) -> bool:
    return fidelity > k / d + SLACK


# ============================================================================
# Sampling S_k
# ============================================================================

def random_rank_k_pure(
    d: int,
    k: int,
    seed: Union[matcore.RngSeed, np.random.Generator],
    uniform: bool = False
) -> matcore.PureStateVector:
    """
    (U⊗V)·Σ_{i<k} √μ_i |ii⟩ with Haar U, V.

    Args:
        d: Local dimension
        k: Schmidt rank bound, 1 <= k <= d
        seed: RngSeed or Generator
        uniform: μ_i = 1/k (maximally entangled of rank k) instead of Dirichlet(1,...,1)

    Raises:
        ParameterOutOfRange: If k is out of range
    """
    if not 1 <= k <= d:
        raise ParameterOutOfRange(f"Schmidt rank k must satisfy 1 <= k <= {d} (got {k})")
    rng = seed if isinstance(seed, np.random.Generator) else matcore.generator(seed)
    mu = np.full(k, 1.0 / k) if uniform else rng.dirichlet(np.ones(k))
    core = np.zeros((d, d), dtype=complex)
    core[np.arange(k), np.arange(k)] = np.sqrt(mu)
    u = matcore.haar_unitary(d, rng)
    v = matcore.haar_unitary(d, rng)
    psi = (u @ core @ v.T).ravel()
    return psi / np.linalg.norm(psi)


def sample_sk_state(
    d: int,
    k: int,
    components: Optional[int] = None,
    seed: Union[matcore.RngSeed, np.random.Generator] = 0,
    weights: Optional[Sequence[float]] = None
) -> SkSample:
    """
    Dirichlet mixture of random pure states of Schmidt rank <= k.

    Args:
        d: Local dimension
        k: Schmidt rank bound
        components: Number of pure components (default 2d)
        seed: RngSeed or Generator
        weights: Explicit mixture weights (default Dirichlet(1,...,1))

    Raises:
        ParameterOutOfRange: If components < 1 or the weights are not a distribution
    """
    components = 2 * d if components is None else components
    if components < 1:
        raise ParameterOutOfRange(f"Need at least one component (got {components})")
    rng = seed if isinstance(seed, np.random.Generator) else matcore.generator(seed)

    if weights is None:
        w = rng.dirichlet(np.ones(components))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (components,) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ParameterOutOfRange("Weights must be a probability vector over the components")

    states = np.stack([random_rank_k_pure(d, k, rng) for _ in range(components)])
    rho = np.einsum('i,ip,iq->pq', w, states, states.conj())
    return SkSample(d=d, k=k, weights=w, components=states, rho=rho)


def isotropic_state(d: int, p: float) -> matcore.HermitianOperator:
    """
    p·Φ_norm + (1-p)·I/d².

    Raises:
        ParameterOutOfRange: If p is outside [-1/(d²-1), 1]
    """
    lower = -1.0 / (d * d - 1) if d > 1 else 0.0
    if not lower - 1e-12 <= p <= 1 + 1e-12:
        raise ParameterOutOfRange(f"Isotropic parameter must lie in [{lower:.6g}, 1] (got {p})")
    n = d * d
    return p * matcore.maximally_entangled_projector(d) + (1 - p) * np.eye(n) / n


# ============================================================================
# Distance bounds
# ============================================================================

def distance_lower_bound(rho: matcore.ComplexMatrix, w: WitnessOperator) -> float:
    """
    max(0, -Tr(Wρ)/b) for an MUB witness, a lower bound on min_{σ∈S_k} ‖ρ - σ‖_F.

    Raises:
        ParameterOutOfRange: If w is not an MUB witness
        DimensionMismatch: If rho does not match the witness
    """
    b = witness.witness_b_constant(w)
    return max(0.0, -witness.evaluate(w, rho) / b)


def witness_distance_bound(rho: matcore.ComplexMatrix, w: WitnessOperator) -> float:
    """Same bound for any witness kind, with b from the Frobenius norm of W's traceless part."""
    b = witness.frobenius_b(w)
    if b <= 0:
        return 0.0
    return max(0.0, -witness.evaluate(w, rho) / b)


def distance_upper_bound_sampler(
    rho: matcore.ComplexMatrix,
    d: int,
    k: int,
    samples: int,
    components: Optional[int] = None,
    seed: matcore.RngSeed = 0,
    candidates: Iterable[matcore.ComplexMatrix] = ()
) -> float:
    """
    min ‖ρ - σ‖_F over sampled σ ∈ S_k, an upper bound on the distance to S_k.

    Sample i is drawn from the i-th child of SeedSequence(seed), so a larger
    `samples` extends the same sequence and never raises the result.

    Args:
        rho: Operator on C^d ⊗ C^d
        d: Local dimension
        k: Schmidt number bound
        samples: Number of SkSample draws (>= 1)
        components: Pure components per sample (default 2d)
        seed: RngSeed
        candidates: Extra states known to lie in S_k

    Raises:
        ParameterOutOfRange: If samples < 1
    """
    if samples < 1:
        raise ParameterOutOfRange(f"Need at least one sample (got {samples})")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (d * d, d * d):
        raise DimensionMismatch(f"State must be {d * d}x{d * d} (got {rho.shape})")

    best = min((float(np.linalg.norm(rho - np.asarray(c))) for c in candidates), default=np.inf)
    for child in np.random.SeedSequence(seed).spawn(samples):
        sigma = sample_sk_state(d, k, components, matcore.generator(child)).rho
        best = min(best, float(np.linalg.norm(rho - sigma)))
    return float(best)


# ============================================================================
# Certification
# ============================================================================

def _provide_frames(d: int, strategy: CertificationStrategy, store: Optional[FrameStore]) -> List[Frame]:
    if strategy.frames:
        for frame in strategy.frames:
            if frame.d != d:
                raise DimensionMismatch(f"Frame dimension {frame.d} does not match state dimension {d}")
        return list(strategy.frames)
    if not strategy.auto_frames:
        raise FramesUnavailable(f"No frames supplied for d={d}")
    return (store or FrameStore()).provide_all(d)


def _frame_cells(
    rho: np.ndarray,
    frame: Frame,
    k: int,
    seeds: Sequence[int],
    digest: str
) -> Tuple[List[Evidence], List[Evidence], float]:
    """Witness and map-spectrum evidence for one frame and order, plus the best distance bound."""
    witness_cells, spectrum_cells = [], []
    best_distance = 0.0
    for seed in seeds:
        map_ = kmaps.build_map(frame, k, seed)
        w = witness.witness_from_map(map_)
        value = witness.evaluate(w, rho)
        certified = value < -SLACK
        witness_cells.append(Evidence(
            k=k, method=f"{frame.kind}-witness", frame=digest, rotation_seed=seed,
            value=value, threshold=0.0, certified=certified, verdict=sn_verdict(k, certified),
        ))
        if frame.kind == 'mub':
            best_distance = max(best_distance, distance_lower_bound(rho, w))
        else:
            best_distance = max(best_distance, witness_distance_bound(rho, w))

        lowest = matcore.min_eigenvalue(kmaps.apply_extended(map_, rho))
        certified = lowest < -SLACK
        spectrum_cells.append(Evidence(
            k=k, method='kmap-spectrum', frame=digest, rotation_seed=seed,
            value=lowest, threshold=0.0, certified=certified, verdict=sn_verdict(k, certified),
        ))
    return witness_cells, spectrum_cells, best_distance


def certify_schmidt_number(
    rho: matcore.ComplexMatrix,
    max_k: Optional[int] = None,
    strategy: Optional[CertificationStrategy] = None,
    store: Optional[FrameStore] = None
) -> CertificateReport:
    """
    Gather evidence that SN(ρ) >= k + 1 for k = 1..max_k.

    For each k the report holds the fidelity test and, for every frame and
    rotation seed, the witness value and the smallest eigenvalue of (I⊗Λ)(ρ).
    Evidence is ordered by (k, method, frame, seed); the final bound is
    1 + the largest certified k.

    Args:
        rho: Density operator on C^d ⊗ C^d
        max_k: Largest order to test (default d - 1)
        strategy: Frames, rotation seeds and sampler settings
        store: FrameStore used when frames are provisioned automatically

    Raises:
        StateValidationError: If rho is not a density operator
        FramesUnavailable: If no frame can be provided for d
        ParameterOutOfRange: If max_k is outside 1..d-1
    """
    strategy = strategy or CertificationStrategy()
    d = local_dimension(rho)
    rho = matcore.validate_density(rho, dim=d * d)
    max_k = d - 1 if max_k is None else max_k
    if not 1 <= max_k <= d - 1:
        raise ParameterOutOfRange(f"max_k must lie in 1..{d - 1} (got {max_k})")

    frame_list = _provide_frames(d, strategy, store)
    digests = [frames.frame_digest(frame) for frame in frame_list]
    fidelity, _ = fidelity_bound(rho)

    evidence: List[Evidence] = []
    distances: List[DistanceBound] = []
    for k in range(1, max_k + 1):
        certified = fidelity_certifies(fidelity, d, k)
        cells = {method: [] for method in METHOD_ORDER}
        cells['fidelity'].append(Evidence(
            k=k, method='fidelity', value=fidelity, threshold=k / d,
            certified=certified, verdict=sn_verdict(k, certified),
        ))

        lower = 0.0
        for frame, digest in zip(frame_list, digests):
            witness_cells, spectrum_cells, distance = _frame_cells(
                rho, frame, k, strategy.rotation_seeds, digest
            )
            cells[f"{frame.kind}-witness"].extend(witness_cells)
            cells['kmap-spectrum'].extend(spectrum_cells)
            lower = max(lower, distance)

        for method in METHOD_ORDER:
            evidence.extend(sorted(cells[method], key=lambda e: (e.frame or '', e.rotation_seed or 0)))

        upper = None
        if strategy.upper_samples:
            upper = distance_upper_bound_sampler(
                rho, d, k, strategy.upper_samples, strategy.components, strategy.sampler_seed
            )
        distances.append(DistanceBound(k=k, lower=lower, upper=upper))

    certified_orders = [e.k for e in evidence if e.certified]
    final_bound = 1 + max(certified_orders, default=0)
    report = CertificateReport(
        d=d,
        input_digest=matcore.digest(rho),
        rng=matcore.RNG_NAME,
        max_k=max_k,
        rotation_seeds=list(strategy.rotation_seeds),
        frames=[f"{frame.kind}:{digest}" for frame, digest in zip(frame_list, digests)],
        evidence=evidence,
        fidelity=fidelity,
        final_bound=final_bound,
        verdict=f"SN ≥ {final_bound}",
        distance_bounds=distances,
    )
    logger.info("Certified d=%d state: %s", d, report.verdict)
    return report


# ============================================================================
# Isotropic sweep
# ============================================================================

def isotropic_sweep(
    d: int,
    k: int,
    grid: Sequence[float],
    frame: Frame,
    seeds: Sequence[int] = (0,)
) -> List[SweepRow]:
    """
    Fidelity and witness verdicts for isotropic states over a p grid.

    The witness value is the most negative over the rotation seeds; the
    distance bound comes from that witness.

    Raises:
        ParameterOutOfRange: If k or a grid point is out of range
    """
    if not 1 <= k <= d - 1:
        raise ParameterOutOfRange(f"k must lie in 1..{d - 1} (got {k})")
    witnesses = [witness.seeded_witness(frame, k, seed) for seed in seeds]
    if not witnesses:
        raise ParameterOutOfRange("Need at least one rotation seed")

    rows = []
    for p in grid:
        rho = isotropic_state(d, p)
        fidelity, _ = fidelity_bound(rho)
        values = [witness.evaluate(w, rho) for w in witnesses]
        best = int(np.argmin(values))
        w = witnesses[best]
        bound = distance_lower_bound(rho, w) if w.kind == 'mub' else witness_distance_bound(rho, w)
        rows.append(SweepRow(
            p=float(p),
            fidelity=fidelity,
            fidelity_verdict=sn_verdict(k, fidelity_certifies(fidelity, d, k)),
            witness_value=values[best],
            witness_verdict=sn_verdict(k, values[best] < -SLACK),
            distance_lower_bound=bound,
        ))
    return rows
