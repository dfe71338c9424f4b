"""
Frame data models.

This module defines the measurement frames the k-positive maps are built from:
- SicPovm: d² subnormalized rank-1 effects with uniform pairwise overlap
- MubCollection: L pairwise mutually unbiased orthonormal bases
- FrameDiagnostics: worst-case deviations reported by frame verification

Array fields hold numpy data; models are frozen and their arrays read-only.
"""

from typing import Dict, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


def _frozen_array(value) -> np.ndarray:
    array = np.array(value, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


class SicPovm(BaseModel):
    """
    Symmetric informationally complete POVM on C^d.

    Effects are stored as a (d², d, d) array with P_i = |φ_i⟩⟨φ_i|/d; the
    generating unit vectors φ_i are kept as a (d², d) array.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: int = Field(..., ge=1, description="Local dimension")

    vectors: np.ndarray = Field(..., description="Unit vectors φ_i, shape (d², d)")

    effects: np.ndarray = Field(..., description="Effects P_i = |φ_i⟩⟨φ_i|/d, shape (d², d, d)")

    fiducial: Optional[np.ndarray] = Field(
        default=None,
        description="Fiducial vector the Weyl-Heisenberg orbit was generated from"
    )

    @field_validator('vectors', 'effects', 'fiducial', mode='before')
    @classmethod
    def _freeze(cls, value):
        return None if value is None else _frozen_array(value)

    @property
    def kind(self) -> Literal['sic']:
        return 'sic'

    @property
    def size(self) -> int:
        """Number of effects (d²)."""
        return self.effects.shape[0]


class MubCollection(BaseModel):
    """
    L mutually unbiased orthonormal bases of C^d.

    bases[α, i] is the i-th vector of basis α; projectors[α, i] is
    Q_i^(α) = |e_i^α⟩⟨e_i^α|.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: int = Field(..., ge=1, description="Local dimension")

    bases: np.ndarray = Field(..., description="Basis vectors, shape (L, d, d)")

    @field_validator('bases', mode='before')
    @classmethod
    def _freeze(cls, value):
        return _frozen_array(value)

    @property
    def kind(self) -> Literal['mub']:
        return 'mub'

    @property
    def L(self) -> int:
        """Number of bases."""
        return self.bases.shape[0]

    @property
    def complete(self) -> bool:
        """True for a complete set (L = d + 1)."""
        return self.L == self.d + 1

    @property
    def projectors(self) -> np.ndarray:
        """Rank-1 projectors Q_i^(α), shape (L, d, d, d)."""
        return np.einsum('aip,aiq->aipq', self.bases, self.bases.conj())

    def subset(self, indices) -> "MubCollection":
        """Collection restricted to the bases at `indices`."""
        return MubCollection(d=self.d, bases=self.bases[list(indices)])


class FrameDiagnostics(BaseModel):
    """Worst-case invariant deviations of a frame, with a pass/fail verdict."""

    kind: Literal['sic', 'mub'] = Field(..., description="Frame kind")

    d: int = Field(..., description="Local dimension")

    size: int = Field(..., description="Number of effects (SIC) or bases (MUB)")

    tol: float = Field(..., description="Tolerance the verdict was taken at")

    deviations: Dict[str, float] = Field(
        default_factory=dict,
        description="Invariant name -> worst-case deviation"
    )

    passed: bool = Field(..., description="All deviations within tol")

    class Config:
        json_schema_extra = {
            "example": {
                "kind": "sic",
                "d": 3,
                "size": 9,
                "tol": 1e-8,
                "deviations": {"completeness": 2.1e-15, "trace": 1.1e-16, "overlap": 3.3e-13},
                "passed": True
            }
        }

    @property
    def failed(self) -> list[str]:
        """Names of the invariants above tolerance."""
        return [name for name, value in self.deviations.items() if value > self.tol]
