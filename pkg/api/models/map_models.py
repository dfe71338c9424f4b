"""
Map and witness data models.

This module defines:
- KPositiveMap: SIC, MUB or reduction-family k-positive map, by parameters
- WitnessOperator: Schmidt-number witness W_k (the Choi matrix of a map)
- ProbeResult: outcome of a sampled k-positivity probe
"""

from typing import Any, Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from api.models.frame_models import MubCollection, SicPovm


def _frozen_real(value) -> np.ndarray:
    array = np.array(value, dtype=float, copy=True)
    array.setflags(write=False)
    return array


class KPositiveMap(BaseModel):
    """
    k-positive map on d x d matrices.

    Frame maps act as
        Λ(X) = α·Tr(X)·I - Σ_{g,l} c·O_gl·Tr(E_l X)·E_g
    with α = (h+d)/d², c = h for SIC frames and α = (1+L·h_s)/d, c = h_s for
    MUB frames (one rotation per basis). The reduction family is
    Λ(X) = Tr(X)·I - p·X.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: Literal['sic', 'mub', 'reduction'] = Field(..., description="Map family")

    d: int = Field(..., ge=1, description="Local dimension")

    k: int = Field(..., ge=1, description="Positivity order")

    constant: float = Field(..., description="h (SIC), h_s (MUB) or p (reduction)")

    frame: Optional[Union[SicPovm, MubCollection]] = Field(
        default=None,
        description="Frame the map is built from (none for the reduction family)"
    )

    rotations: Optional[np.ndarray] = Field(
        default=None,
        description="Axis-fixing rotations: (1, d², d²) for SIC, (L, d, d) for MUB"
    )

    rotation_seed: Optional[int] = Field(
        default=None,
        description="Seed the rotations were drawn with, when they were drawn"
    )

    @field_validator('rotations', mode='before')
    @classmethod
    def _freeze(cls, value):
        return None if value is None else _frozen_real(value)

    @property
    def frame_ref(self) -> Optional[str]:
        """Digest of the frame, or None for the reduction family."""
        if self.frame is None:
            return None
        # Deferred to keep models free of service imports at load time
        from api.services.frames import frame_digest
        return frame_digest(self.frame)

    @property
    def identity_rotations(self) -> bool:
        if self.rotations is None:
            return True
        return all(np.allclose(o, np.eye(o.shape[0]), atol=1e-12) for o in self.rotations)

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "d": self.d,
            "k": self.k,
            "constant": self.constant,
            "frame_ref": self.frame_ref,
            "rotation_seed": self.rotation_seed,
            "rotations": None if self.rotations is None else self.rotations.tolist(),
        }


class WitnessOperator(BaseModel):
    """
    Schmidt-number witness: Tr(W σ) >= 0 for every σ of Schmidt number <= k.

    A negative value Tr(W ρ) certifies SN(ρ) >= k + 1.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: Literal['sic', 'mub'] = Field(..., description="Frame family")

    d: int = Field(..., ge=1, description="Local dimension")

    k: int = Field(..., ge=1, description="Witness order")

    constant: float = Field(..., description="h (SIC) or h_s (MUB)")

    matrix: np.ndarray = Field(..., description="Hermitian operator on C^d ⊗ C^d")

    source: KPositiveMap = Field(..., description="Map whose Choi matrix this is")

    @field_validator('matrix', mode='before')
    @classmethod
    def _freeze(cls, value):
        array = np.array(value, dtype=complex, copy=True)
        array.setflags(write=False)
        return array

    @property
    def L(self) -> Optional[int]:
        """Number of bases for MUB witnesses."""
        frame = self.source.frame
        return frame.L if isinstance(frame, MubCollection) else None

    def to_json(self, include_matrix: bool = False) -> Dict[str, Any]:
        doc = self.source.to_json()
        if include_matrix:
            doc["re"] = self.matrix.real.tolist()
            doc["im"] = self.matrix.imag.tolist()
        return doc


class ProbeResult(BaseModel):
    """Sampled k-positivity probe over maximally entangled rank-k states."""

    kind: str = Field(..., description="Map family")

    d: int = Field(..., description="Local dimension")

    k: int = Field(..., description="Probe Schmidt rank")

    trials: int = Field(..., description="Number of random probes")

    min_eigenvalue: float = Field(..., description="Smallest eigenvalue seen over all probes")

    max_purity: float = Field(..., description="Largest Tr[(I⊗Λ)(ψψ†)²] seen")

    purity_bound: float = Field(..., description="1/(dk - 1)")

    seeds: List[int] = Field(default_factory=list, description="Per-trial seeds")

    @property
    def positive(self) -> bool:
        return self.min_eigenvalue >= -1e-9

    @property
    def purity_ok(self) -> bool:
        return self.max_purity <= self.purity_bound + 1e-9

    @property
    def passed(self) -> bool:
        return self.positive and self.purity_ok
