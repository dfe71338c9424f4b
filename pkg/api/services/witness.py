"""
Schmidt-number witnesses from SIC and MUB maps.

A witness W_k is the Choi matrix of a k-positive frame map:
    SIC: W = ((h+d)/d²)·I⊗I - h·Σ_{g,l} O_gl·conj(P_l)⊗P_g
    MUB: W = ((1+L·h_s)/d)·I⊗I - h_s·Σ_α Σ_{g,l} O^(α)_gl·conj(Q_l^(α))⊗Q_g^(α)
Tr(Wσ) >= 0 on every σ of Schmidt number <= k, so Tr(Wρ) < 0 certifies
SN(ρ) >= k + 1. conj(·) is entrywise conjugation in the computational basis.
"""

import logging
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from api.models.frame_models import MubCollection, SicPovm
from api.models.map_models import KPositiveMap, WitnessOperator
from api.services import kmaps, matcore
from api.services.errors import DimensionMismatch, ParameterOutOfRange

logger = logging.getLogger(__name__)


def witness_from_map(map_: KPositiveMap) -> WitnessOperator:
    """Witness of a SIC or MUB map (its closed-form Choi matrix)."""
    if map_.kind == 'reduction':
        raise ParameterOutOfRange("Witnesses are built from SIC or MUB maps")
    return WitnessOperator(
        kind=map_.kind,
        d=map_.d,
        k=map_.k,
        constant=map_.constant,
        matrix=kmaps.closed_form_choi(map_),
        source=map_,
    )


def sic_witness(
    d: int,
    k: int,
    sic: SicPovm,
    rotation: Optional[matcore.RealMatrix] = None,
    rotation_seed: Optional[int] = None
) -> WitnessOperator:
    """
    SIC witness of order k.

    Raises:
        ParameterOutOfRange: If k is out of range
        InvalidRotation: If the rotation is not admissible
    """
    return witness_from_map(kmaps.build_sic_map(d, k, sic, rotation, rotation_seed))


def mub_witness(
    d: int,
    k: int,
    mubs: MubCollection,
    rotations: Optional[Sequence[matcore.RealMatrix]] = None,
    rotation_seed: Optional[int] = None
) -> WitnessOperator:
    """
    MUB witness of order k.

    For k = 1 the constant is h_s = 1/(d-1) for every L.

    Raises:
        ParameterOutOfRange: If k is out of range
        InvalidRotation: If the rotation count differs from L or a rotation is not admissible
    """
    return witness_from_map(kmaps.build_mub_map(d, k, mubs, rotations, rotation_seed))


def seeded_witness(frame: Union[SicPovm, MubCollection], k: int, rotation_seed: int = 0) -> WitnessOperator:
    """Witness of order k with rotations drawn from `rotation_seed` (0 = identity)."""
    return witness_from_map(kmaps.build_map(frame, k, rotation_seed))


def evaluate(w: WitnessOperator, rho: matcore.ComplexMatrix) -> float:
    """
    Tr(W ρ).

    Raises:
        DimensionMismatch: If rho is not d²×d²
    """
    rho = np.asarray(rho, dtype=complex)
    side = w.d * w.d
    if rho.shape != (side, side):
        raise DimensionMismatch(f"State must be {side}x{side} for a d={w.d} witness (got {rho.shape})")
    return float(np.real(np.einsum('ij,ji->', w.matrix, rho)))


def best_over_rotations(
    frame: Union[SicPovm, MubCollection],
    k: int,
    rho: matcore.ComplexMatrix,
    seeds: Iterable[int] = (0,)
) -> Tuple[float, int, WitnessOperator]:
    """
    Most negative Tr(W ρ) over witnesses drawn with each rotation seed.

    Ties keep the earlier seed.

    Returns:
        (value, seed, witness)
    """
    best: Optional[Tuple[float, int, WitnessOperator]] = None
    for seed in seeds:
        w = seeded_witness(frame, k, seed)
        value = evaluate(w, rho)
        logger.debug("%s witness d=%d k=%d seed %d: %.6g", frame.kind, frame.d, k, seed, value)
        if best is None or value < best[0]:
            best = (value, seed, w)
    if best is None:
        raise ParameterOutOfRange("Need at least one rotation seed")
    return best


def frobenius_b(w: Union[WitnessOperator, matcore.ComplexMatrix], d: Optional[int] = None) -> float:
    """
    √(Tr W†W - (Tr W)²/d²), the Frobenius norm of the traceless part of W.

    Args:
        w: WitnessOperator or a d²×d² Hermitian matrix
        d: Local dimension when w is a bare matrix

    Raises:
        NotHermitian: If the matrix is not Hermitian
    """
    matrix = w.matrix if isinstance(w, WitnessOperator) else np.asarray(w, dtype=complex)
    matcore.check_hermitian(matrix, tol=1e-10)
    side = matrix.shape[0]
    if d is not None and d * d != side:
        raise DimensionMismatch(f"Matrix of side {side} is not on a {d}x{d} space")
    trace = np.real(np.trace(matrix))
    squared = float(np.real(np.vdot(matrix, matrix)))
    return float(np.sqrt(max(0.0, squared - trace ** 2 / side)))


def witness_b_constant(w: WitnessOperator) -> float:
    """
    b for an MUB witness, evaluated numerically.

    Equals h_s·√(L(d-1)) for any admissible rotations (see mub_b_closed_form).

    Raises:
        ParameterOutOfRange: If w is not an MUB witness
        NotHermitian: If the matrix is not Hermitian
    """
    if w.kind != 'mub':
        raise ParameterOutOfRange("The b constant is derived for MUB witnesses; use frobenius_b")
    b = frobenius_b(w)
    closed = mub_b_closed_form(w)
    if abs(b - closed) > 1e-9:
        logger.warning("Numeric b %.12g differs from closed form %.12g", b, closed)
    return b


def mub_b_closed_form(w: WitnessOperator) -> float:
    """h_s·√(L(d-1))."""
    if w.kind != 'mub':
        raise ParameterOutOfRange("Closed-form b is defined for MUB witnesses")
    return float(w.constant * np.sqrt(w.L * (w.d - 1)))


def z_traces(w: WitnessOperator) -> Tuple[float, float]:
    """
    (Tr Z, Tr Z†Z) for the frame part Z = Σ_α Σ_{g,l} O^(α)_gl·conj(Q_l)⊗Q_g of an MUB witness.

    Both are rotation independent: Tr Z = L·d and Tr Z†Z = L·d + L² - L.
    """
    if w.kind != 'mub':
        raise ParameterOutOfRange("Z traces are defined for MUB witnesses")
    z = kmaps.frame_operator(w.source)
    return float(np.real(np.trace(z))), float(np.real(np.vdot(z, z)))


def witness_from_json(
    doc: Dict[str, Any],
    frame: Union[SicPovm, MubCollection]
) -> WitnessOperator:
    """Rebuild a witness from WitnessOperator.to_json() output and its frame."""
    if doc.get("kind") not in ('sic', 'mub'):
        raise ParameterOutOfRange(f"Unknown witness kind {doc.get('kind')!r}")
    return witness_from_map(kmaps.map_from_json(doc, frame))
